#pragma once

// The exponential space spanned by e^{lambda_0 x}, ..., e^{lambda_N x}: its
// fundamental function Phi (vanishing derivatives of order < N at zero,
// N-th derivative one), Taylor coefficients and the basis b_j = j! Phi^{(N-j)}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "expmoment/numerics.hpp"

namespace expmoment {

/// Pairs closer than this fraction of max|lambda| count as repeated.
inline constexpr double kMinRelativeGap = 1e-8;

/// The frequency vector Lambda = (lambda_0, ..., lambda_N), N odd.
class Frequencies {
 public:
  explicit Frequencies(std::vector<double> lambda) : lambda_(std::move(lambda)) { validate(); }

  /// Rational frequencies; enables the exact Taylor and basis paths.
  explicit Frequencies(std::vector<Rational> lambda) : exact_(std::move(lambda)) {
    lambda_.reserve(exact_->size());
    for (const auto& q : *exact_) lambda_.push_back(to_double(q));
    validate();
  }

  std::span<const double> lambda() const { return lambda_; }
  const std::vector<double>& values() const { return lambda_; }
  bool is_exact() const { return exact_.has_value(); }
  const std::vector<Rational>& exact() const {
    if (!exact_) throw std::logic_error("frequencies carry no exact rational values");
    return *exact_;
  }

  /// N = number of frequencies - 1.
  unsigned order() const { return static_cast<unsigned>(lambda_.size() - 1); }
  double min() const { return *std::min_element(lambda_.begin(), lambda_.end()); }
  double max() const { return *std::max_element(lambda_.begin(), lambda_.end()); }
  bool all_positive() const {
    return exact_ ? std::all_of(exact_->begin(), exact_->end(), [](const Rational& q) { return q > 0; })
                  : std::all_of(lambda_.begin(), lambda_.end(), [](double v) { return v > 0; });
  }
  bool all_nonnegative() const {
    return exact_ ? std::all_of(exact_->begin(), exact_->end(), [](const Rational& q) { return q >= 0; })
                  : std::all_of(lambda_.begin(), lambda_.end(), [](double v) { return v >= 0; });
  }

 private:
  void validate() const {
    if (lambda_.size() < 2 || lambda_.size() % 2 != 0)
      throw std::invalid_argument("need an even number (>= 2) of frequencies so that N is odd, got " +
                                  std::to_string(lambda_.size()));
    double scale = 0;
    for (double v : lambda_) {
      if (!std::isfinite(v)) throw std::invalid_argument("frequencies must be finite");
      scale = std::max(scale, std::abs(v));
    }
    std::vector<double> sorted = lambda_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      double gap = sorted[i] - sorted[i - 1];
      if (gap <= 0 || gap < kMinRelativeGap * scale)
        throw std::invalid_argument("frequencies must be pairwise distinct");
    }
    if (exact_) {
      for (std::size_t i = 0; i < exact_->size(); ++i)
        for (std::size_t j = i + 1; j < exact_->size(); ++j)
          if ((*exact_)[i] == (*exact_)[j]) throw std::invalid_argument("frequencies must be pairwise distinct");
    }
  }

  std::vector<double> lambda_;
  std::optional<std::vector<Rational>> exact_;
};

/// w_j = 1 / prod_{i != j} (lambda_j - lambda_i), so Phi(x) = sum_j w_j e^{lambda_j x}.
/// Only distinct nodes are required here; the parity of N does not matter.
template <class T>
std::vector<T> barycentric_weights(std::span<const T> lam) {
  std::vector<T> w(lam.size());
  for (std::size_t j = 0; j < lam.size(); ++j) {
    T p(1);
    for (std::size_t i = 0; i < lam.size(); ++i) {
      if (i == j) continue;
      if (lam[j] == lam[i]) throw std::invalid_argument("barycentric_weights: repeated node");
      p *= lam[j] - lam[i];
    }
    w[j] = T(1) / p;
  }
  return w;
}

inline std::vector<double> barycentric_weights(const Frequencies& freq) {
  return barycentric_weights<double>(freq.lambda());
}

inline std::vector<Rational> barycentric_weights_exact(const Frequencies& freq) {
  return barycentric_weights<Rational>(std::span<const Rational>(freq.exact()));
}

namespace detail {

inline void check_exponent_range(const Frequencies& freq, double x) {
  double top = std::max(freq.max() * x, freq.min() * x);
  if (!std::isfinite(x) || top > 709.0)
    throw std::overflow_error("exponent lambda*x = " + std::to_string(top) + " exceeds the double range");
}

/// Beyond this spread*|x| the series route is abandoned for the closed form.
inline constexpr double kSeriesSpreadLimit = 40.0;

/// D_r = Psi^{(r)}(x), r = 0..max_order, for shifted frequencies mu by the
/// Taylor series sum_k h_k(mu) x^{k+N-r} / (k+N-r)!. Returns nullopt if the
/// series does not settle or leaves the double range.
inline std::optional<std::vector<double>> shifted_series(std::span<const double> mu, unsigned max_order,
                                                         double x, double spread) {
  const unsigned n = static_cast<unsigned>(mu.size() - 1);
  std::vector<double> d(max_order + 1, 0.0);
  std::vector<double> h(mu.size(), 1.0);  // h_k(mu_0..mu_i) for the current k
  // x^p / p! for p = 0, 1, ...
  std::vector<double> xp{1.0};
  auto xpow = [&](unsigned p) {
    while (xp.size() <= p) xp.push_back(xp.back() * x / static_cast<double>(xp.size()));
    return xp[p];
  };
  const unsigned k_min = static_cast<unsigned>(std::ceil(spread * std::abs(x))) + 4;
  constexpr unsigned k_cap = 4000;
  for (unsigned k = 0; k < k_cap; ++k) {
    if (k > 0) {
      // Newton triangle: h_k(mu_0..mu_i) = h_k(mu_0..mu_{i-1}) + mu_i h_{k-1}(mu_0..mu_i)
      double acc = 0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        acc += mu[i] * h[i];
        h[i] = acc;
      }
    }
    const double hk = h.back();
    bool settled = k >= k_min;
    for (unsigned r = 0; r <= max_order; ++r) {
      if (k + n < r) continue;
      double term = hk * xpow(k + n - r);
      d[r] += term;
      if (std::abs(term) > 1e-17 * std::abs(d[r])) settled = false;
    }
    if (!std::isfinite(hk) || !std::isfinite(d[0])) return std::nullopt;
    if (settled) return d;
  }
  return std::nullopt;
}

}  // namespace detail

/// Phi^{(order)}(x) by the closed form sum_j w_j lambda_j^order e^{lambda_j x}.
inline double phi_derivative_closed_form(const Frequencies& freq, unsigned order, double x) {
  detail::check_exponent_range(freq, x);
  auto lam = freq.lambda();
  auto w = barycentric_weights(freq);
  double s = 0;
  for (std::size_t j = 0; j < lam.size(); ++j) s += w[j] * std::pow(lam[j], order) * std::exp(lam[j] * x);
  return s;
}

/// Phi, Phi', ..., Phi^{(max_order)} at x.
///
/// Frequencies are shifted by c (min lambda for x >= 0, max lambda for x < 0)
/// so that every Taylor term of the shifted function has one sign, then the
/// shift is undone with Leibniz' rule: Phi^{(m)} = e^{cx} sum_r C(m,r) c^{m-r} Psi^{(r)}.
/// Very wide spreads spread*|x| fall back to the closed form.
inline std::vector<double> phi_derivatives(const Frequencies& freq, unsigned max_order, double x) {
  detail::check_exponent_range(freq, x);
  auto lam = freq.lambda();
  const double c = x >= 0 ? freq.min() : freq.max();
  std::vector<double> mu(lam.size());
  if (freq.is_exact()) {
    const auto& q = freq.exact();
    Rational qc = x >= 0 ? *std::min_element(q.begin(), q.end()) : *std::max_element(q.begin(), q.end());
    for (std::size_t i = 0; i < q.size(); ++i) mu[i] = to_double(q[i] - qc);
  } else {
    for (std::size_t i = 0; i < lam.size(); ++i) mu[i] = lam[i] - c;
  }
  double spread = 0;
  for (double v : mu) spread = std::max(spread, std::abs(v));

  std::optional<std::vector<double>> d;
  if (spread * std::abs(x) <= detail::kSeriesSpreadLimit) d = detail::shifted_series(mu, max_order, x, spread);

  std::vector<double> out(max_order + 1);
  if (!d) {
    for (unsigned m = 0; m <= max_order; ++m) out[m] = phi_derivative_closed_form(freq, m, x);
    return out;
  }
  const double ecx = std::exp(c * x);
  for (unsigned m = 0; m <= max_order; ++m) {
    double s = 0, binom = 1, cpow = 1;
    // r runs downward so c^{m-r} builds up incrementally.
    for (unsigned r = m + 1; r-- > 0;) {
      s += binom * cpow * (*d)[r];
      binom = binom * r / static_cast<double>(m - r + 1);
      cpow *= c;
    }
    out[m] = ecx * s;
  }
  return out;
}

inline double eval_phi_deriv(const Frequencies& freq, unsigned order, double x) {
  return phi_derivatives(freq, order, x)[order];
}

inline double eval_phi(const Frequencies& freq, double x) { return eval_phi_deriv(freq, 0, x); }

/// Taylor coefficients a_N, ..., a_{s_max} of Phi; a_s = h_{s-N}(Lambda) / s!.
template <class T>
struct PhiSeries {
  std::vector<double> lambda;
  unsigned start = 0;  // N
  std::vector<T> coeffs;

  unsigned s_max() const { return start + static_cast<unsigned>(coeffs.size()) - 1; }
  const T& a(unsigned s) const { return coeffs.at(s - start); }
};

inline constexpr unsigned kDefaultSeriesExtra = 60;
inline constexpr unsigned kMaxSeriesExtra = 400;

/// T = double uses the floating frequencies; T = Rational requires exact ones.
template <class T>
PhiSeries<T> taylor_coeffs(const Frequencies& freq, unsigned s_max) {
  const unsigned n = freq.order();
  if (s_max < n) throw std::invalid_argument("taylor_coeffs: s_max must be at least N");
  PhiSeries<T> out{freq.values(), n, {}};
  std::vector<T> h;
  if constexpr (std::is_same_v<T, Rational>) {
    h = complete_homogeneous_table<Rational>(s_max - n, freq.exact());
  } else {
    h = complete_homogeneous_table<double>(s_max - n, freq.lambda());
  }
  out.coeffs.reserve(h.size());
  T fact(1);
  for (unsigned s = 1; s <= n; ++s) fact *= T(s);
  for (unsigned s = n; s <= s_max; ++s) {
    if (s > n) fact *= T(s);
    out.coeffs.push_back(h[s - n] / fact);
  }
  return out;
}

/// sum_{s=N}^{s_max} a_s x^s.
template <class T>
T eval_series(const PhiSeries<T>& series, const T& x) {
  T acc(0);
  for (unsigned s = series.s_max() + 1; s-- > series.start;) acc = acc * x + series.a(s);
  for (unsigned s = 0; s < series.start; ++s) acc *= x;
  return acc;
}

/// Values b_0(x), ..., b_N(x).
template <class T>
struct BasisValues {
  std::vector<double> lambda;
  T x;
  std::vector<T> values;
  /// Last Taylor index used by the truncated exact path; 0 for the floating evaluator.
  unsigned series_order = 0;
};

using ExpBasisValues = BasisValues<double>;

inline ExpBasisValues eval_basis(const Frequencies& freq, double x) {
  const unsigned n = freq.order();
  auto d = phi_derivatives(freq, n, x);
  ExpBasisValues out{freq.values(), x, std::vector<double>(n + 1), 0};
  double jf = 1;
  for (unsigned j = 0; j <= n; ++j) {
    if (j > 0) jf *= j;
    out.values[j] = jf * d[n - j];
  }
  return out;
}

/// Smallest Taylor truncation index s_max (>= N + 60, <= N + 400) whose next
/// basis term for b_0 falls below 1e-16 of the partial sum at |x|.
inline unsigned series_order_for(const Frequencies& freq, double x) {
  const unsigned n = freq.order();
  const double ax = std::abs(x);
  auto lam = freq.lambda();
  std::vector<double> abs_lam(lam.size());
  std::transform(lam.begin(), lam.end(), abs_lam.begin(), [](double v) { return std::abs(v); });
  auto h = complete_homogeneous_table<double>(kMaxSeriesExtra + 1, abs_lam);
  // b_0 = sum_k h_k x^k / k!
  double sum = 0, xk = 1;
  for (unsigned k = 0; k <= kMaxSeriesExtra; ++k) {
    if (k > 0) xk *= ax / k;
    sum += h[k] * xk;
    double next = h[k + 1] * xk * ax / (k + 1);
    if (k >= kDefaultSeriesExtra && next <= 1e-16 * sum) return n + k;
  }
  throw std::runtime_error("Taylor series of Phi needs more than N+" + std::to_string(kMaxSeriesExtra) +
                           " terms at x = " + std::to_string(x));
}

/// Exact b_j of the Taylor series truncated at s_max:
/// b_j = j! sum_{s=N}^{s_max} a_s s!/(s-N+j)! x^{s-N+j} = sum_k h_k x^{k+j} j!/(k+j)!.
inline BasisValues<Rational> eval_basis_exact(const Frequencies& freq, const Rational& x,
                                              std::optional<unsigned> s_max = std::nullopt) {
  const unsigned n = freq.order();
  const unsigned top = s_max ? *s_max : series_order_for(freq, to_double(x));
  if (top < n) throw std::invalid_argument("eval_basis_exact: s_max must be at least N");
  const unsigned kmax = top - n;
  auto h = complete_homogeneous_table<Rational>(kmax, freq.exact());
  // x^p / p! for p = 0..kmax+N
  std::vector<Rational> xp(kmax + n + 1);
  xp[0] = 1;
  for (unsigned p = 1; p < xp.size(); ++p) xp[p] = xp[p - 1] * x / p;
  BasisValues<Rational> out{freq.values(), x, std::vector<Rational>(n + 1), top};
  Rational jf = 1;
  for (unsigned j = 0; j <= n; ++j) {
    if (j > 0) jf *= j;
    Rational acc = 0;
    for (unsigned k = 0; k <= kmax; ++k) acc += h[k] * xp[k + j];
    out.values[j] = jf * acc;
  }
  return out;
}

struct PhiPositivityReport {
  bool pass = true;
  double min_value = std::numeric_limits<double>::infinity();
  unsigned min_order = 0;
  double min_x = 0;
  double tolerance = 0;
  /// Taylor coefficients a_N..a_{N+60} all >= 0 (exact when the frequencies are rational).
  bool taylor_nonnegative = true;
  unsigned taylor_checked_to = 0;
  bool taylor_exact = false;
};

/// Samples Phi^{(j)}(x) >= -tolerance for 0 <= j <= j_max over the grid and
/// checks the sign of the Taylor coefficients.
inline PhiPositivityReport check_phi_positivity(const Frequencies& freq, unsigned j_max, std::span<const double> grid,
                                                double tolerance = 1e-10) {
  if (!freq.all_nonnegative()) throw std::invalid_argument("check_phi_positivity: frequencies must be >= 0");
  PhiPositivityReport rep;
  rep.tolerance = tolerance;
  for (double x : grid) {
    auto d = phi_derivatives(freq, j_max, x);
    for (unsigned j = 0; j <= j_max; ++j) {
      if (d[j] < rep.min_value) {
        rep.min_value = d[j];
        rep.min_order = j;
        rep.min_x = x;
      }
    }
  }
  const unsigned s_max = freq.order() + kDefaultSeriesExtra;
  rep.taylor_checked_to = s_max;
  if (freq.is_exact()) {
    rep.taylor_exact = true;
    auto series = taylor_coeffs<Rational>(freq, s_max);
    rep.taylor_nonnegative = std::all_of(series.coeffs.begin(), series.coeffs.end(), [](const Rational& a) { return a >= 0; });
  } else {
    auto series = taylor_coeffs<double>(freq, s_max);
    rep.taylor_nonnegative = std::all_of(series.coeffs.begin(), series.coeffs.end(), [](double a) { return a >= 0; });
  }
  rep.pass = rep.taylor_nonnegative && (grid.empty() || rep.min_value >= -tolerance);
  return rep;
}

}  // namespace expmoment
