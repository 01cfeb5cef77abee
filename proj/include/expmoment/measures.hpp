#pragma once

// Nonnegative measures on [0, inf) (atomic, uniform, truncated exponential),
// their exponential moments c_j = int b_j dmu and classical power moments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <type_traits>
#include <utility>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "expmoment/expcore.hpp"
#include "expmoment/numerics.hpp"

namespace expmoment {

/// Half-line [0, inf) or a compact interval [a, b] with 0 <= a < b.
struct Domain {
  enum class Kind { halfline, interval };
  Kind kind = Kind::halfline;
  double a = 0;
  double b = std::numeric_limits<double>::infinity();

  static Domain halfline() { return {}; }
  static Domain interval(double a, double b) {
    if (!(std::isfinite(a) && std::isfinite(b)) || a < 0 || !(a < b))
      throw std::invalid_argument("interval domain needs 0 <= a < b, got [" + std::to_string(a) + ", " +
                                  std::to_string(b) + "]");
    return {Kind::interval, a, b};
  }
  static Domain unit_interval() { return interval(0, 1); }

  bool is_unit_interval() const { return kind == Kind::interval && a == 0 && b == 1; }
  bool contains(double x, double tol = 0) const { return x >= a - tol && x <= b + tol; }
  std::string describe() const {
    return kind == Kind::halfline ? "halfline" : "interval [" + std::to_string(a) + ", " + std::to_string(b) + "]";
  }
  friend bool operator==(const Domain&, const Domain&) = default;
};

template <class T>
struct Atom {
  T x;
  T w;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finitely many (position, weight >= 0) pairs. Positions are sorted and
/// near-coincident atoms merged; zero weights are dropped.
template <class T>
class BasicAtomicMeasure {
 public:
  BasicAtomicMeasure() = default;
  explicit BasicAtomicMeasure(std::vector<Atom<T>> atoms) : atoms_(std::move(atoms)) { canonicalize(); }

  const std::vector<Atom<T>>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }
  T mass() const {
    T m(0);
    for (const auto& a : atoms_) m += a.w;
    return m;
  }
  BasicAtomicMeasure scaled(const T& s) const {
    auto atoms = atoms_;
    for (auto& a : atoms) a.w *= s;
    return BasicAtomicMeasure(std::move(atoms));
  }
  friend BasicAtomicMeasure operator+(const BasicAtomicMeasure& l, const BasicAtomicMeasure& r) {
    auto atoms = l.atoms_;
    atoms.insert(atoms.end(), r.atoms_.begin(), r.atoms_.end());
    return BasicAtomicMeasure(std::move(atoms));
  }

 private:
  void canonicalize() {
    for (const auto& a : atoms_) {
      if constexpr (std::is_same_v<T, double>) {
        if (!std::isfinite(a.x) || !std::isfinite(a.w)) throw std::invalid_argument("atom with non-finite data");
      }
      if (a.w < 0) throw std::invalid_argument("atom weights must be nonnegative");
    }
    std::erase_if(atoms_, [](const Atom<T>& a) { return a.w == 0; });
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom<T>& l, const Atom<T>& r) { return l.x < r.x; });
    std::vector<Atom<T>> merged;
    for (const auto& a : atoms_) {
      if (!merged.empty() && close(merged.back().x, a.x)) {
        merged.back().w += a.w;
      } else {
        merged.push_back(a);
      }
    }
    atoms_ = std::move(merged);
  }
  static bool close(const T& l, const T& r) {
    if constexpr (std::is_same_v<T, double>) {
      return std::abs(l - r) <= 1e-12 * std::max({1.0, std::abs(l), std::abs(r)});
    } else {
      return l == r;
    }
  }

  std::vector<Atom<T>> atoms_;
};

using AtomicMeasure = BasicAtomicMeasure<double>;
using ExactAtomicMeasure = BasicAtomicMeasure<Rational>;

/// Density 1/(b-a) on [a, b].
struct UniformDensity {
  double a = 0;
  double b = 1;
};

/// Density rate * e^{-rate x} on [0, truncate]; truncate may be +inf. Not renormalized.
struct ExponentialDensity {
  double rate = 1;
  double truncate = std::numeric_limits<double>::infinity();
};

using Measure = std::variant<AtomicMeasure, UniformDensity, ExponentialDensity>;

/// Smallest and largest point of the support.
inline std::pair<double, double> support_bounds(const Measure& mu) {
  return std::visit(
      [](const auto& m) -> std::pair<double, double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, AtomicMeasure>) {
          if (m.empty()) return {0.0, 0.0};
          return {m.atoms().front().x, m.atoms().back().x};
        } else if constexpr (std::is_same_v<M, UniformDensity>) {
          return {m.a, m.b};
        } else {
          return {0.0, m.truncate};
        }
      },
      mu);
}

inline void validate_measure(const Measure& mu) {
  if (const auto* u = std::get_if<UniformDensity>(&mu)) {
    if (!(std::isfinite(u->a) && std::isfinite(u->b)) || !(u->a < u->b))
      throw std::invalid_argument("uniform density needs finite a < b");
  } else if (const auto* e = std::get_if<ExponentialDensity>(&mu)) {
    if (!std::isfinite(e->rate) || e->rate <= 0) throw std::invalid_argument("exponential density needs rate > 0");
    if (std::isnan(e->truncate) || e->truncate <= 0) throw std::invalid_argument("exponential truncation must be > 0");
  }
}

inline void require_support_in(const Measure& mu, const Domain& domain) {
  validate_measure(mu);
  if (const auto* at = std::get_if<AtomicMeasure>(&mu); at && at->empty()) return;
  auto [lo, hi] = support_bounds(mu);
  if (lo < 0) throw std::domain_error("measure support intersects (-inf, 0)");
  if (!domain.contains(lo) || !domain.contains(hi))
    throw std::domain_error("measure support [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] is not inside the " + domain.describe());
}

template <class T>
struct MomentSequence {
  std::vector<T> values;
  Domain domain;

  /// N = length - 1.
  unsigned order() const { return static_cast<unsigned>(values.size()) - 1; }
  bool is_zero() const {
    return std::all_of(values.begin(), values.end(), [](const T& v) { return v == 0; });
  }
};

/// Thrown when adaptive quadrature misses its target; carries the best estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, std::vector<double> estimate)
      : std::runtime_error(what), estimate_(std::move(estimate)) {}
  const std::vector<double>& estimate() const { return estimate_; }

 private:
  std::vector<double> estimate_;
};

namespace quadrature {

inline constexpr unsigned kGaussPoints = 15;
inline constexpr double kRelativeTarget = 1e-11;
inline constexpr unsigned kMaxDepth = 40;

struct Rule {
  std::array<double, kGaussPoints> nodes{};
  std::array<double, kGaussPoints> weights{};
};

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline const Rule& gauss_legendre() {
  static const Rule rule = [] {
    Rule r;
    constexpr unsigned n = kGaussPoints;
    for (unsigned i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = z;
        for (unsigned k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      r.nodes[i] = z;
      r.weights[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return r;
  }();
  return rule;
}

using VectorIntegrand = std::function<std::vector<double>(double)>;

inline std::vector<double> panel(const VectorIntegrand& f, double a, double b, std::size_t dim) {
  const auto& rule = gauss_legendre();
  const double half = (b - a) / 2, mid = (a + b) / 2;
  std::vector<double> acc(dim, 0.0);
  for (unsigned i = 0; i < kGaussPoints; ++i) {
    auto v = f(mid + half * rule.nodes[i]);
    for (std::size_t j = 0; j < dim; ++j) acc[j] += rule.weights[i] * half * v[j];
  }
  return acc;
}

struct Adaptive {
  const VectorIntegrand& f;
  std::size_t dim;
  std::vector<double> scale;
  bool converged = true;

  std::vector<double> run(double a, double b, const std::vector<double>& whole, unsigned depth) {
    const double mid = (a + b) / 2;
    auto left = panel(f, a, mid, dim);
    auto right = panel(f, mid, b, dim);
    bool ok = true;
    for (std::size_t j = 0; j < dim; ++j) {
      double refined = left[j] + right[j];
      if (std::abs(refined - whole[j]) > kRelativeTarget * scale[j]) ok = false;
    }
    if (ok || depth >= kMaxDepth) {
      if (!ok) converged = false;
      for (std::size_t j = 0; j < dim; ++j) left[j] += right[j];
      return left;
    }
    auto l = run(a, mid, left, depth + 1);
    auto r = run(mid, b, right, depth + 1);
    for (std::size_t j = 0; j < dim; ++j) l[j] += r[j];
    return l;
  }
};

/// Adaptive Gauss-Legendre on [a, b]: panels are bisected until the two halves
/// agree with the parent to kRelativeTarget of the component's magnitude.
inline std::vector<double> integrate(const VectorIntegrand& f, double a, double b, std::size_t dim) {
  // Coarse pass fixes the per-component scale.
  constexpr int coarse = 16;
  std::vector<double> scale(dim, 0.0);
  for (int p = 0; p < coarse; ++p) {
    auto v = panel(f, a + (b - a) * p / coarse, a + (b - a) * (p + 1) / coarse, dim);
    for (std::size_t j = 0; j < dim; ++j) scale[j] += std::abs(v[j]);
  }
  for (auto& s : scale) s = std::max(s, std::numeric_limits<double>::min());
  Adaptive ad{f, dim, scale};
  auto result = ad.run(a, b, panel(f, a, b, dim), 0);
  if (!ad.converged)
    throw QuadratureError("adaptive quadrature did not reach relative accuracy 1e-11 within depth 40", result);
  return result;
}

/// [0, inf) as panels [0,1], [1,2], [2,4], ... until a panel adds nothing.
inline std::vector<double> integrate_halfline(const VectorIntegrand& f, std::size_t dim) {
  std::vector<double> total(dim, 0.0);
  double a = 0, b = 1;
  for (int p = 0; p < 200; ++p) {
    auto part = integrate(f, a, b, dim);
    bool negligible = true;
    for (std::size_t j = 0; j < dim; ++j) {
      total[j] += part[j];
      if (std::abs(part[j]) > 1e-17 * std::abs(total[j])) negligible = false;
    }
    if (negligible && p > 2) return total;
    a = b;
    b *= 2;
  }
  throw QuadratureError("integral over [0, inf) does not settle", total);
}

}  // namespace quadrature

namespace detail {

inline std::vector<double> integrate_density(const Measure& mu, const quadrature::VectorIntegrand& g, std::size_t dim) {
  if (const auto* u = std::get_if<UniformDensity>(&mu)) {
    const double dens = 1 / (u->b - u->a);
    auto r = quadrature::integrate(g, u->a, u->b, dim);
    for (auto& v : r) v *= dens;
    return r;
  }
  const auto& e = std::get<ExponentialDensity>(mu);
  auto weighted = [&](double x) {
    auto v = g(x);
    const double dens = e.rate * std::exp(-e.rate * x);
    for (auto& y : v) y *= dens;
    return v;
  };
  return std::isinf(e.truncate) ? quadrature::integrate_halfline(weighted, dim)
                                : quadrature::integrate(weighted, 0, e.truncate, dim);
}

}  // namespace detail

/// c_j = int b_j dmu, j = 0..N. Atomic measures are summed exactly; densities
/// use adaptive Gauss-Legendre panels.
inline MomentSequence<double> exp_moments(const Frequencies& freq, const Measure& mu,
                                          const Domain& domain = Domain::halfline()) {
  require_support_in(mu, domain);
  const unsigned n = freq.order();
  MomentSequence<double> out{std::vector<double>(n + 1, 0.0), domain};
  if (const auto* at = std::get_if<AtomicMeasure>(&mu)) {
    for (const auto& a : at->atoms()) {
      auto b = eval_basis(freq, a.x);
      for (unsigned j = 0; j <= n; ++j) out.values[j] += a.w * b.values[j];
    }
    return out;
  }
  if (const auto* e = std::get_if<ExponentialDensity>(&mu); e && std::isinf(e->truncate) && e->rate <= freq.max())
    throw std::domain_error("exponential moments diverge: rate must exceed the largest frequency");
  out.values = detail::integrate_density(mu, [&](double x) { return eval_basis(freq, x).values; }, n + 1);
  return out;
}

/// Exact moments of the truncated Taylor form of b_j (rational frequencies and atoms).
inline MomentSequence<Rational> exp_moments_exact(const Frequencies& freq, const ExactAtomicMeasure& mu,
                                                  const Domain& domain = Domain::halfline(),
                                                  std::optional<unsigned> s_max = std::nullopt) {
  const unsigned n = freq.order();
  MomentSequence<Rational> out{std::vector<Rational>(n + 1, Rational(0)), domain};
  for (const auto& a : mu.atoms()) {
    if (a.x < 0 || !domain.contains(to_double(a.x)))
      throw std::domain_error("atom at " + to_string(a.x) + " is not inside the " + domain.describe());
    auto b = eval_basis_exact(freq, a.x, s_max);
    for (unsigned j = 0; j <= n; ++j) out.values[j] += a.w * b.values[j];
  }
  return out;
}

/// c_j = int t^j dmu, j = 0..top.
inline MomentSequence<double> power_moments(const Measure& mu, unsigned top,
                                            const Domain& domain = Domain::halfline()) {
  validate_measure(mu);
  MomentSequence<double> out{std::vector<double>(top + 1, 0.0), domain};
  auto& c = out.values;
  if (const auto* at = std::get_if<AtomicMeasure>(&mu)) {
    for (const auto& a : at->atoms()) {
      double p = a.w;
      for (unsigned j = 0; j <= top; ++j, p *= a.x) c[j] += p;
    }
  } else if (const auto* u = std::get_if<UniformDensity>(&mu)) {
    double pa = u->a, pb = u->b;
    for (unsigned j = 0; j <= top; ++j, pa *= u->a, pb *= u->b) c[j] = (pb - pa) / ((j + 1) * (u->b - u->a));
  } else {
    // int_0^T t^j r e^{-rt} dt = -T^j e^{-rT} + (j/r) c_{j-1}
    const auto& e = std::get<ExponentialDensity>(mu);
    const bool inf = std::isinf(e.truncate);
    const double tail = inf ? 0.0 : std::exp(-e.rate * e.truncate);
    double tp = 1;
    for (unsigned j = 0; j <= top; ++j, tp *= inf ? 0.0 : e.truncate) {
      c[j] = (j == 0 ? 1.0 : j / e.rate * c[j - 1]) - tp * tail;
    }
  }
  return out;
}

inline MomentSequence<Rational> power_moments(const ExactAtomicMeasure& mu, unsigned top,
                                              const Domain& domain = Domain::halfline()) {
  MomentSequence<Rational> out{std::vector<Rational>(top + 1, Rational(0)), domain};
  for (const auto& a : mu.atoms()) {
    Rational p = a.w;
    for (unsigned j = 0; j <= top; ++j, p *= a.x) out.values[j] += p;
  }
  return out;
}

}  // namespace expmoment
