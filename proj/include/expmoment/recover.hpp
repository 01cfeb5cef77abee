#pragma once

// Truncated Stieltjes/Hausdorff moment problems: PSD solvability criteria and
// recovery of an atomic representing measure as the Gauss rule of the moment
// sequence (Chebyshev algorithm + symmetric tridiagonal eigenproblem).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "expmoment/expcore.hpp"
#include "expmoment/hankel.hpp"
#include "expmoment/measures.hpp"
#include "expmoment/numerics.hpp"

namespace expmoment {

/// Error raised by one stage of the moment pipeline; stage() names it.
class MomentProblemError : public std::runtime_error {
 public:
  MomentProblemError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Residual tolerance for reproduced moments, relative to max(1, |c_j|).
inline constexpr double kMomentResidualTolerance = 1e-8;
/// A recurrence pivot below this fraction of the Hankel diagonal it came from counts as zero.
inline constexpr double kRankTolerance = 1e-12;
/// Nodes this far outside the domain (relative to max(1, |node|)) are clipped onto it.
inline constexpr double kNodeClipTolerance = 1e-9;

template <class T>
struct SolvabilityReport {
  Domain domain;
  std::vector<FormCheck<T>> checks;
  bool solvable = false;
  /// Rank of the plain Hankel (c_{i+j}) of maximal size.
  std::size_t rank = 0;
  /// Forms of maximal size that are PSD but singular, e.g. "Q2 singular".
  std::vector<std::string> boundary_flags;
  /// Empty when solvable; otherwise names the first failing form.
  std::string diagnostic;
};

namespace detail {

template <class T>
void require_odd_order(const MomentSequence<T>& c) {
  if (c.values.size() < 2 || c.values.size() % 2 != 0)
    throw std::invalid_argument("moment sequence needs an even number of entries c_0..c_N with N odd, got " +
                                std::to_string(c.values.size()));
}

template <class T>
std::string describe_failure(const FormCheck<T>& f) {
  std::string s = "Hankel form indefinite at k=" + std::to_string(f.k) + " (" + form_name(f.form);
  if constexpr (std::is_same_v<T, Rational>) {
    for (std::size_t i = 0; i < f.psd.minors.size(); ++i)
      if (f.psd.minors[i] < 0) {
        s += ", leading minor " + std::to_string(i + 1) + " = " + to_string(f.psd.minors[i]);
        break;
      }
  } else {
    if (f.psd.min_eigenvalue) s += ", min eigenvalue " + std::to_string(*f.psd.min_eigenvalue);
  }
  return s + ")";
}

template <class T>
SolvabilityReport<T> summarize(const MomentSequence<T>& c, std::vector<FormCheck<T>> checks, double eps) {
  SolvabilityReport<T> rep;
  rep.domain = c.domain;
  rep.checks = std::move(checks);
  rep.solvable = true;
  const unsigned kmax = (c.order() - 1) / 2;
  for (const auto& f : rep.checks) {
    if (!f.psd.is_psd && rep.solvable) {
      rep.solvable = false;
      rep.diagnostic = describe_failure(f);
    }
    if (f.k == kmax && f.psd.is_psd && !f.psd.is_pd) rep.boundary_flags.push_back(std::string(form_name(f.form)) + " singular");
  }
  auto plain = build_hankel(HankelSpec<T>::of(c.values, kmax, FormKind::plain));
  rep.rank = certify(plain, eps).rank;
  return rep;
}

/// Moments of the pull-back u = (t - a) / (b - a) onto [0, 1].
template <class T>
std::vector<T> pull_back_to_unit(const std::vector<T>& c, const T& a, const T& len) {
  std::vector<T> u(c.size(), T(0));
  for (std::size_t j = 0; j < c.size(); ++j) {
    // sum_i C(j,i) (-a)^{j-i} c_i / len^j
    T acc(0), binom(1), apow(1);
    for (std::size_t i = j + 1; i-- > 0;) {
      acc += binom * apow * c[i];
      binom = binom * T(double(i)) / T(double(j - i + 1));
      apow *= -a;
    }
    T lp(1);
    for (std::size_t p = 0; p < j; ++p) lp *= len;
    u[j] = acc / lp;
  }
  return u;
}

template <class T>
MomentSequence<T> to_unit_interval(const MomentSequence<T>& c) {
  if (c.domain.kind != Domain::Kind::interval) throw std::invalid_argument("not an interval domain");
  if (c.domain.is_unit_interval()) return c;
  T a, len;
  if constexpr (std::is_same_v<T, Rational>) {
    a = rational_from_double(c.domain.a);
    len = rational_from_double(c.domain.b) - a;
  } else {
    a = c.domain.a;
    len = c.domain.b - c.domain.a;
  }
  return MomentSequence<T>{pull_back_to_unit(c.values, a, len), Domain::unit_interval()};
}

}  // namespace detail

/// Half-line criteria: (c_{i+j}) PSD for 2k <= N and (c_{i+j+1}) PSD for 2k+1 <= N.
template <class T>
SolvabilityReport<T> stieltjes_solvable(const MomentSequence<T>& c, double eps = kPsdTolerance) {
  if (c.domain.kind != Domain::Kind::halfline) throw std::invalid_argument("stieltjes_solvable needs a halfline domain");
  detail::require_odd_order(c);
  return detail::summarize(c, certify_forms(c.values, {FormKind::plain, FormKind::shifted}, eps), eps);
}

/// Compact-interval criteria on [0, 1]: (c_{i+j+1}) and (c_{i+j} - c_{i+j+1})
/// PSD for 2k+1 <= N. Other intervals are pulled back affinely first.
template <class T>
SolvabilityReport<T> hausdorff_solvable(const MomentSequence<T>& c, double eps = kPsdTolerance) {
  if (c.domain.kind != Domain::Kind::interval) throw std::invalid_argument("hausdorff_solvable needs an interval domain");
  detail::require_odd_order(c);
  auto unit = detail::to_unit_interval(c);
  auto rep = detail::summarize(unit, certify_forms(unit.values, {FormKind::shifted, FormKind::differenced}, eps), eps);
  rep.domain = c.domain;
  return rep;
}

template <class T>
SolvabilityReport<T> check_solvable(const MomentSequence<T>& c, double eps = kPsdTolerance) {
  return c.domain.kind == Domain::Kind::halfline ? stieltjes_solvable(c, eps) : hausdorff_solvable(c, eps);
}

/// Three-term recurrence pi_{k+1} = (t - alpha_k) pi_k - beta_k pi_{k-1}.
struct JacobiCoefficients {
  std::vector<double> alphas;  // length rank
  std::vector<double> betas;   // beta_1..beta_{rank-1}, all > 0
  double mass = 0;             // c_0
  std::size_t rank = 0;
};

/// Chebyshev algorithm on ordinary moments c_0..c_{2n-1}. Stops early at the
/// numerical rank of the Hankel matrix, which yields the recurrence of the
/// unique rank-atom measure.
inline JacobiCoefficients jacobi_from_moments(const MomentSequence<double>& c) {
  detail::require_odd_order(c);
  const auto& mu = c.values;
  if (!(mu[0] > 0)) throw MomentProblemError("jacobi", "c_0 must be positive, got " + std::to_string(mu[0]));
  const std::size_t n = mu.size() / 2;
  {
    auto plain = build_hankel(HankelSpec<double>::of(mu, static_cast<unsigned>(n - 1), FormKind::plain));
    auto rep = psd_check(plain);
    if (!rep.is_psd)
      throw MomentProblemError("jacobi", "Hankel matrix (c_{i+j}) is indefinite, min eigenvalue " +
                                             std::to_string(*rep.min_eigenvalue));
  }

  JacobiCoefficients out;
  out.mass = mu[0];
  // sigma_{k,l} for the previous two k.
  std::vector<double> prev(2 * n, 0.0), cur(mu.begin(), mu.end());
  out.alphas.push_back(mu[1] / mu[0]);
  double beta_prev = mu[0];
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<double> next(2 * n, 0.0);
    const double a = out.alphas.back();
    for (std::size_t l = k; l + k < 2 * n; ++l) next[l] = cur[l + 1] - a * cur[l] - beta_prev * prev[l];
    const double pivot = next[k];
    if (pivot <= kRankTolerance * std::abs(mu[2 * k])) {
      if (pivot < -kRankTolerance * std::abs(mu[2 * k]))
        throw MomentProblemError("jacobi", "negative recurrence pivot " + std::to_string(pivot) + " at k=" +
                                               std::to_string(k));
      break;
    }
    const double beta = pivot / cur[k - 1];
    out.alphas.push_back(next[k + 1] / pivot - cur[k] / cur[k - 1]);
    out.betas.push_back(beta);
    beta_prev = beta;
    prev = std::move(cur);
    cur = std::move(next);
  }
  out.rank = out.alphas.size();
  return out;
}

/// Gauss rule of the recurrence: nodes are the eigenvalues of the Jacobi
/// matrix, weights mass * (first eigenvector component)^2.
inline AtomicMeasure gauss_from_jacobi(const JacobiCoefficients& jc) {
  const std::size_t r = jc.alphas.size();
  if (r == 0) return {};
  if (jc.betas.size() + 1 != r) throw std::invalid_argument("gauss_from_jacobi: need rank-1 off-diagonal terms");
  if (!(jc.mass > 0)) throw std::invalid_argument("gauss_from_jacobi: mass must be positive");
  Eigen::VectorXd diag(static_cast<Eigen::Index>(r)), sub(static_cast<Eigen::Index>(r > 1 ? r - 1 : 0));
  for (std::size_t i = 0; i < r; ++i) diag(static_cast<Eigen::Index>(i)) = jc.alphas[i];
  for (std::size_t i = 0; i + 1 < r; ++i) {
    if (!(jc.betas[i] > 0)) throw std::invalid_argument("gauss_from_jacobi: betas must be positive");
    sub(static_cast<Eigen::Index>(i)) = std::sqrt(jc.betas[i]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw MomentProblemError("gauss", "tridiagonal eigenproblem did not converge");
  std::vector<Atom<double>> atoms;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(r); ++i) {
    const double v0 = es.eigenvectors()(0, i);
    atoms.push_back({es.eigenvalues()(i), jc.mass * v0 * v0});
  }
  return AtomicMeasure(std::move(atoms));
}

/// max_j |int t^j dnu - c_j| / max(1, |c_j|).
inline double moment_residual(const AtomicMeasure& nu, const std::vector<double>& c) {
  if (c.empty()) return 0;
  auto m = power_moments(nu, static_cast<unsigned>(c.size() - 1));
  double worst = 0;
  for (std::size_t j = 0; j < c.size(); ++j)
    worst = std::max(worst, std::abs(m.values[j] - c[j]) / std::max(1.0, std::abs(c[j])));
  return worst;
}

namespace detail {

/// Gauss-rule measure with nodes clipped onto [lo, hi]; no residual check.
inline AtomicMeasure gauss_measure(const std::vector<double>& c, double lo, double hi) {
  if (std::all_of(c.begin(), c.end(), [](double v) { return v == 0; })) return {};
  auto nu = gauss_from_jacobi(jacobi_from_moments(MomentSequence<double>{c, Domain::halfline()}));
  std::vector<Atom<double>> atoms;
  for (auto a : nu.atoms()) {
    const double tol = kNodeClipTolerance * std::max(1.0, std::abs(a.x));
    if (a.x < lo) {
      if (a.x < lo - tol)
        throw MomentProblemError("recover", "node " + std::to_string(a.x) + " lies below the domain bound " +
                                                std::to_string(lo));
      a.x = lo;
    }
    if (a.x > hi) {
      if (a.x > hi + tol)
        throw MomentProblemError("recover", "node " + std::to_string(a.x) + " lies above the domain bound " +
                                                std::to_string(hi));
      a.x = hi;
    }
    atoms.push_back(a);
  }
  return AtomicMeasure(std::move(atoms));
}

/// Recovery without the residual gate. Interval domains are solved on [0,1]
/// and mapped back.
inline AtomicMeasure recover_unchecked(const MomentSequence<double>& c) {
  if (c.domain.kind == Domain::Kind::halfline) return gauss_measure(c.values, 0.0, std::numeric_limits<double>::infinity());
  auto unit = to_unit_interval(c);
  auto nu = gauss_measure(unit.values, 0.0, 1.0);
  if (c.domain.is_unit_interval()) return nu;
  std::vector<Atom<double>> atoms;
  for (const auto& a : nu.atoms()) atoms.push_back({c.domain.a + (c.domain.b - c.domain.a) * a.x, a.w});
  return AtomicMeasure(std::move(atoms));
}

}  // namespace detail

/// Atomic nu with at most (N+1)/2 atoms in the declared domain reproducing
/// c_0..c_N to kMomentResidualTolerance. The Gauss rule is one of possibly many
/// solutions.
inline AtomicMeasure recover_measure(const MomentSequence<double>& c, double eps = kPsdTolerance) {
  detail::require_odd_order(c);
  if (c.is_zero()) return {};
  auto solv = check_solvable(c, eps);
  if (!solv.solvable) throw MomentProblemError("solvability", solv.diagnostic);
  auto nu = detail::recover_unchecked(c);
  const double res = moment_residual(nu, c.values);
  if (!(res <= kMomentResidualTolerance))
    throw MomentProblemError("recover", "recovered measure misses the moments (relative residual " +
                                            std::to_string(res) + "); the sequence is inconsistent");
  return nu;
}

struct TransferReport {
  Domain domain;
  MomentSequence<double> c_hat;
  SolvabilityReport<double> solvability;
  AtomicMeasure nu;
  double max_residual = 0;
  bool pass = false;
  std::vector<std::string> diagnostics;
};

/// Exponential moments of mu, then a classical representing measure for them:
/// c_hat = exp_moments(mu); solvability on the domain; nu = recover(c_hat);
/// pass iff solvable and the moment residual is within tolerance.
inline TransferReport verify_transfer(const Frequencies& freq, const Measure& mu, const Domain& domain,
                                      double eps = kPsdTolerance) {
  if (!freq.all_positive()) throw MomentProblemError("input", "verify_transfer requires all frequencies > 0");
  TransferReport rep;
  rep.domain = domain;
  try {
    rep.c_hat = exp_moments(freq, mu, domain);
  } catch (const std::exception& e) {
    throw MomentProblemError("exp_moments", e.what());
  }
  rep.solvability = check_solvable(rep.c_hat, eps);
  if (!rep.solvability.solvable) {
    rep.diagnostics.push_back("solvability: " + rep.solvability.diagnostic);
    return rep;
  }
  try {
    rep.nu = detail::recover_unchecked(rep.c_hat);
  } catch (const MomentProblemError&) {
    throw;
  } catch (const std::exception& e) {
    throw MomentProblemError("recover", e.what());
  }
  rep.max_residual = moment_residual(rep.nu, rep.c_hat.values);
  rep.pass = rep.max_residual <= kMomentResidualTolerance;
  if (!rep.pass) rep.diagnostics.push_back("residual: " + std::to_string(rep.max_residual) + " exceeds 1e-8");
  return rep;
}

}  // namespace expmoment
