#pragma once

// Hankel forms built from a sequence, positive-semidefiniteness certificates
// (exact and floating), Chammam's closed-form Hankel determinant and the
// positivity check of the basis sequence b_0(x), ..., b_N(x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <type_traits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "expmoment/expcore.hpp"
#include "expmoment/numerics.hpp"

namespace expmoment {

inline constexpr double kPsdTolerance = 1e-10;

enum class PsdMode { exact, floating };

struct PsdReport {
  bool is_psd = false;
  bool is_pd = false;
  PsdMode mode = PsdMode::floating;
  /// Relative eigenvalue tolerance; always 0 in exact mode.
  double tolerance = 0;
  /// Exact mode: leading principal minors det M_1..det M_n.
  std::vector<Rational> minors;
  /// Floating mode: smallest eigenvalue.
  std::optional<double> min_eigenvalue;
  std::size_t rank = 0;
};

/// Which of the three quadratic forms a Hankel matrix represents.
enum class FormKind {
  plain,        // sum p_i p_j c_{i+j}
  shifted,      // sum p_i p_j c_{i+j+1}
  differenced,  // sum p_i p_j (c_{i+j} - c_{i+j+1})
};

inline const char* form_name(FormKind f) {
  switch (f) {
    case FormKind::plain: return "Q1";
    case FormKind::shifted: return "Q2";
    case FormKind::differenced: return "Q3";
  }
  return "?";
}

template <class T>
struct HankelSpec {
  std::vector<T> sequence;
  unsigned k = 0;
  unsigned shift = 0;
  bool differenced = false;

  static HankelSpec of(std::vector<T> seq, unsigned k, FormKind form) {
    return HankelSpec{std::move(seq), k, form == FormKind::shifted ? 1u : 0u, form == FormKind::differenced};
  }

  void validate() const {
    if (shift > 1) throw std::invalid_argument("hankel shift must be 0 or 1");
    if (differenced && shift == 1) throw std::invalid_argument("differenced and shifted forms are exclusive");
    const std::size_t need = 2 * std::size_t(k) + ((shift == 1 || differenced) ? 1 : 0);
    if (sequence.empty() || need > sequence.size() - 1)
      throw std::out_of_range("hankel of size " + std::to_string(k + 1) + " needs c_0..c_" + std::to_string(need) +
                              ", sequence has " + std::to_string(sequence.size()) + " entries");
  }
};

template <class T>
Matrix<T> build_hankel(const HankelSpec<T>& spec) {
  spec.validate();
  Matrix<T> m(spec.k + 1);
  const auto& c = spec.sequence;
  for (std::size_t i = 0; i <= spec.k; ++i)
    for (std::size_t j = 0; j <= spec.k; ++j)
      m(i, j) = spec.differenced ? T(c[i + j] - c[i + j + 1]) : c[i + j + spec.shift];
  return m;
}

template <class T>
T quadratic_form(const Matrix<T>& m, std::span<const T> p) {
  if (p.size() != m.order())
    throw std::invalid_argument("quadratic_form: vector of length " + std::to_string(p.size()) +
                                " for a matrix of order " + std::to_string(m.order()));
  T acc(0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) acc += p[i] * p[j] * m(i, j);
  return acc;
}

template <class T>
T quadratic_form(const Matrix<T>& m, const std::vector<T>& p) {
  return quadratic_form(m, std::span<const T>(p));
}

/// Exact certificate. PSD and rank come from an LDL^T with symmetric
/// (largest-diagonal) pivoting in exact arithmetic; PD from Sylvester's
/// leading minors, which are returned as evidence.
inline PsdReport psd_check(const RationalMatrix& m) {
  if (!m.is_symmetric()) throw std::invalid_argument("psd_check: matrix is not symmetric");
  PsdReport rep;
  rep.mode = PsdMode::exact;
  rep.minors = leading_principal_minors(m);
  rep.is_pd = std::all_of(rep.minors.begin(), rep.minors.end(), [](const Rational& d) { return d > 0; });

  RationalMatrix a = m;
  std::vector<std::size_t> live(m.order());
  for (std::size_t i = 0; i < live.size(); ++i) live[i] = i;
  rep.is_psd = true;
  while (!live.empty()) {
    auto best = std::max_element(live.begin(), live.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
    const std::size_t p = *best;
    if (a(p, p) > 0) {
      live.erase(best);
      for (std::size_t i : live)
        for (std::size_t j : live) a(i, j) -= a(i, p) * a(p, j) / a(p, p);
      ++rep.rank;
      continue;
    }
    // Every remaining diagonal entry is <= 0; PSD needs the rest to vanish.
    for (std::size_t i : live)
      for (std::size_t j : live)
        if (a(i, j) != 0) rep.is_psd = false;
    break;
  }
  return rep;
}

/// Floating certificate: smallest eigenvalue against -eps * max(1, trace).
inline PsdReport psd_check(const Matrix<double>& m, double eps = kPsdTolerance) {
  if (!m.is_symmetric()) throw std::invalid_argument("psd_check: matrix is not symmetric");
  PsdReport rep;
  rep.mode = PsdMode::floating;
  rep.tolerance = eps;
  const auto n = static_cast<Eigen::Index>(m.order());
  if (n == 0) {
    rep.is_psd = rep.is_pd = true;
    return rep;
  }
  Eigen::MatrixXd a(n, n);
  double trace = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m(i, j);
    trace += std::abs(a(i, i));
  }
  if (!a.allFinite()) throw std::domain_error("psd_check: matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_check: eigenvalue iteration did not converge");
  const auto& ev = es.eigenvalues();
  const double tol = eps * std::max(1.0, trace);
  rep.min_eigenvalue = ev.minCoeff();
  rep.is_psd = *rep.min_eigenvalue >= -tol;
  rep.is_pd = *rep.min_eigenvalue > tol;
  rep.rank = static_cast<std::size_t>((ev.array() > tol).count());
  return rep;
}

namespace detail {

inline void require_nonzero_pochhammer(const Rational& base, unsigned len, const char* what) {
  for (unsigned i = 0; i < len; ++i)
    if (base + i == 0)
      throw std::domain_error(std::string("zero-division: ") + what + " (" + to_string(base) + ")_" +
                              std::to_string(len) + " vanishes");
}

}  // namespace detail

/// Hankel matrix with entries (alpha)_{i+j} / (1+alpha+beta)_{i+j}, 0 <= i,j <= m.
inline RationalMatrix chammam_matrix(const Rational& alpha, const Rational& beta, unsigned m) {
  const Rational top = 1 + alpha + beta;
  detail::require_nonzero_pochhammer(top, 2 * m, "denominator");
  std::vector<Rational> seq(2 * m + 1);
  for (unsigned l = 0; l <= 2 * m; ++l) seq[l] = pochhammer(alpha, l) / pochhammer(top, l);
  return build_hankel(HankelSpec<Rational>{std::move(seq), m, 0, false});
}

/// Closed form of det chammam_matrix(alpha, beta, m):
/// prod_{k=0}^m k! (alpha)_k (1+beta)_k / ((alpha+beta+k)_k (1+alpha+beta)_{2k}).
inline Rational chammam_det(const Rational& alpha, const Rational& beta, unsigned m) {
  Rational prod = 1;
  for (unsigned k = 0; k <= m; ++k) {
    detail::require_nonzero_pochhammer(alpha + beta + k, k, "denominator");
    detail::require_nonzero_pochhammer(1 + alpha + beta, 2 * k, "denominator");
    prod *= factorial(k) * pochhammer(alpha, k) * pochhammer(Rational(1 + beta), k) /
            (pochhammer(Rational(alpha + beta + k), k) * pochhammer(Rational(1 + alpha + beta), 2 * k));
  }
  return prod;
}

/// Hankel matrix of the single Taylor term x^s of Phi:
/// entry (i,j) = (i+j)! s!/(s-N+i+j)! x^{i+j}.
template <class T>
Matrix<T> monomial_hankel(unsigned n, unsigned k, unsigned s, const T& x) {
  if (s < n) throw std::invalid_argument("monomial_hankel: need s >= N");
  std::vector<T> seq(2 * k + 1);
  T xp(1);
  for (unsigned l = 0; l <= 2 * k; ++l) {
    const Rational coeff = factorial(l) * factorial(s) / factorial(s - n + l);
    if constexpr (std::is_same_v<T, Rational>) {
      seq[l] = coeff * xp;
    } else {
      seq[l] = to_double(coeff) * xp;
    }
    xp *= x;
  }
  return build_hankel(HankelSpec<T>{std::move(seq), k, 0, false});
}

template <class T>
struct FormCheck {
  unsigned k = 0;
  FormKind form = FormKind::plain;
  Matrix<T> matrix;
  PsdReport psd;
};

template <class T>
PsdReport certify(const Matrix<T>& m, double eps) {
  if constexpr (std::is_same_v<T, Rational>) {
    (void)eps;
    return psd_check(m);
  } else {
    return psd_check(m, eps);
  }
}

/// Builds and certifies every admissible k of each requested form.
template <class T>
std::vector<FormCheck<T>> certify_forms(const std::vector<T>& seq, std::initializer_list<FormKind> forms,
                                        double eps = kPsdTolerance) {
  std::vector<FormCheck<T>> out;
  if (seq.empty()) return out;
  const std::size_t top = seq.size() - 1;
  for (FormKind f : forms) {
    const std::size_t extra = f == FormKind::plain ? 0 : 1;
    for (unsigned k = 0; 2 * std::size_t(k) + extra <= top; ++k) {
      auto m = build_hankel(HankelSpec<T>::of(seq, k, f));
      auto rep = certify(m, eps);
      out.push_back(FormCheck<T>{k, f, std::move(m), std::move(rep)});
    }
  }
  return out;
}

enum class Region { halfline, unit_interval };

inline const char* region_name(Region r) { return r == Region::halfline ? "halfline" : "unit_interval"; }

struct Theorem1Options {
  double tolerance = kPsdTolerance;
  /// Number of log-spaced sample points in [1e-3, x] for the hypothesis check.
  unsigned hypothesis_points = 32;
};

template <class T>
struct Theorem1Report {
  Region region = Region::halfline;
  T x{};
  BasisValues<T> basis;
  PhiPositivityReport hypothesis;
  std::vector<FormCheck<T>> checks;
  bool pass = false;
};

namespace detail {

inline void theorem1_preconditions(const Frequencies& freq, double x, Region region) {
  if (!freq.all_positive()) throw std::invalid_argument("theorem1_check requires all frequencies > 0");
  if (!std::isfinite(x) || x < 0) throw std::domain_error("x must be a finite value >= 0");
  if (region == Region::unit_interval && x > 1) throw std::domain_error("x outside [0,1]");
}

inline PhiPositivityReport theorem1_hypothesis(const Frequencies& freq, double x, const Theorem1Options& opt) {
  const double lo = 1e-3, hi = std::max(x, lo);
  std::vector<double> grid;
  const unsigned n = std::max(1u, opt.hypothesis_points);
  for (unsigned i = 0; i < n; ++i)
    grid.push_back(n == 1 ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return check_phi_positivity(freq, 2 * freq.order() + 1, grid);
}

template <class T>
Theorem1Report<T> theorem1_assemble(BasisValues<T> basis, Region region, PhiPositivityReport hyp, double eps) {
  Theorem1Report<T> rep;
  rep.region = region;
  rep.x = basis.x;
  rep.hypothesis = hyp;
  rep.checks = region == Region::halfline
                   ? certify_forms(basis.values, {FormKind::plain, FormKind::shifted}, eps)
                   : certify_forms(basis.values, {FormKind::shifted, FormKind::differenced}, eps);
  rep.basis = std::move(basis);
  rep.pass = rep.hypothesis.pass &&
             std::all_of(rep.checks.begin(), rep.checks.end(), [](const FormCheck<T>& c) { return c.psd.is_psd; });
  return rep;
}

}  // namespace detail

/// Half-line: the plain Hankel of (b_j(x)) for 2k <= N and the shifted one for
/// 2k+1 <= N are PSD. Unit interval: the shifted and differenced Hankels for
/// 2k+1 <= N are PSD. Floating evaluation of b_j.
inline Theorem1Report<double> theorem1_check(const Frequencies& freq, double x, Region region,
                                             const Theorem1Options& opt = {}) {
  detail::theorem1_preconditions(freq, x, region);
  auto hyp = detail::theorem1_hypothesis(freq, x, opt);
  return detail::theorem1_assemble(eval_basis(freq, x), region, hyp, opt.tolerance);
}

/// Same forms certified exactly on the Taylor series of b_j truncated at s_max.
inline Theorem1Report<Rational> theorem1_check_exact(const Frequencies& freq, const Rational& x, Region region,
                                                     const Theorem1Options& opt = {},
                                                     std::optional<unsigned> s_max = std::nullopt) {
  if (!freq.is_exact()) throw std::invalid_argument("exact mode needs rational frequencies");
  if (x < 0) throw std::domain_error("x must be a finite value >= 0");
  if (region == Region::unit_interval && x > 1) throw std::domain_error("x outside [0,1]");
  detail::theorem1_preconditions(freq, to_double(x), region);
  auto hyp = detail::theorem1_hypothesis(freq, to_double(x), opt);
  return detail::theorem1_assemble(eval_basis_exact(freq, x, s_max), region, hyp, 0.0);
}

}  // namespace expmoment
