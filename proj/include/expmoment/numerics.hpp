#pragma once

// Exact arithmetic kernels: rationals, dense matrices, Pochhammer symbols,
// complete homogeneous symmetric polynomials and Bareiss determinants.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace expmoment {

using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<
    boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

inline BigInt numerator(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator(const Rational& q) { return boost::multiprecision::denominator(q); }

/// "p/q" with q omitted when it is 1.
inline std::string to_string(const Rational& q) { return q.str(); }

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Parses "p", "p/q", or a finite decimal such as "-3.25" or "1e-3" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw std::invalid_argument("not a rational number: '" + std::string(text) + "'"); };
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  auto parse_int = [&](std::string_view s) -> BigInt {
    s = trim(s);
    bool neg = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
      neg = s.front() == '-';
      s.remove_prefix(1);
    }
    if (s.empty()) fail();
    BigInt v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') fail();
      v = v * 10 + (c - '0');
    }
    return neg ? BigInt(-v) : v;
  };

  text = trim(text);
  if (text.empty()) fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt den = parse_int(text.substr(slash + 1));
    if (den == 0) throw std::domain_error("zero denominator in '" + std::string(text) + "'");
    return Rational(parse_int(text.substr(0, slash)), den);
  }

  // Decimal with optional exponent.
  std::string_view mant = text;
  long exp10 = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mant = text.substr(0, e);
    BigInt ev = parse_int(text.substr(e + 1));
    if (boost::multiprecision::abs(ev) > 4000) fail();
    exp10 = ev.convert_to<long>();
  }
  bool neg = false;
  if (!mant.empty() && (mant.front() == '+' || mant.front() == '-')) {
    neg = mant.front() == '-';
    mant.remove_prefix(1);
  }
  std::string digits;
  bool seen_point = false, any_digit = false;
  for (char c : mant) {
    if (c == '.') {
      if (seen_point) fail();
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) --exp10;
    } else {
      fail();
    }
  }
  if (!any_digit) fail();
  BigInt v = parse_int(digits);
  if (neg) v = -v;
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exp10)));
  return exp10 >= 0 ? Rational(v * scale) : Rational(v, scale);
}

/// Exact rational equal to the binary value of a finite double.
inline Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite value has no rational form");
  int exp = 0;
  double mant = std::frexp(v, &exp);
  // 53-bit mantissa scaled to an integer.
  auto m = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r(m);
  BigInt p = boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(std::abs(exp)));
  return exp >= 0 ? Rational(r * p) : Rational(r / p);
}

inline Rational factorial(unsigned n) {
  BigInt f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return Rational(f);
}

/// Rising factorial (x)_m = x (x+1) ... (x+m-1), (x)_0 = 1.
template <class T>
T pochhammer(const T& x, unsigned m) {
  T r(1);
  for (unsigned i = 0; i < m; ++i) r *= x + T(i);
  return r;
}

/// h_0 .. h_m of the given variables, one Newton-triangle column per variable.
template <class T>
std::vector<T> complete_homogeneous_table(unsigned m, std::span<const T> values) {
  if (values.empty()) throw std::invalid_argument("complete_homogeneous: empty variable list");
  std::vector<T> h(m + 1, T(0));
  h[0] = T(1);
  // Column for the first variable: h_k = v^k.
  for (unsigned k = 1; k <= m; ++k) h[k] = h[k - 1] * values[0];
  for (std::size_t i = 1; i < values.size(); ++i)
    for (unsigned k = 1; k <= m; ++k) h[k] += values[i] * h[k - 1];
  return h;
}

template <class T>
T complete_homogeneous(unsigned m, std::span<const T> values) {
  return complete_homogeneous_table<T>(m, values).back();
}

template <class T>
T complete_homogeneous(unsigned m, const std::vector<T>& values) {
  return complete_homogeneous<T>(m, std::span<const T>(values));
}

/// Dense square matrix, row-major.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t order) : order_(order), data_(order * order, T(0)) {}
  Matrix(std::initializer_list<std::initializer_list<T>> rows) : order_(rows.size()) {
    data_.reserve(order_ * order_);
    for (const auto& row : rows) {
      if (row.size() != order_) throw std::invalid_argument("Matrix: rows must form a square");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }
  Matrix(std::size_t order, std::vector<T> row_major) : order_(order), data_(std::move(row_major)) {
    if (data_.size() != order_ * order_) throw std::invalid_argument("Matrix: entry count is not order^2");
  }

  static Matrix identity(std::size_t order) {
    Matrix m(order);
    for (std::size_t i = 0; i < order; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t order() const { return order_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * order_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * order_ + j]; }
  const std::vector<T>& entries() const { return data_; }

  bool is_symmetric() const {
    for (std::size_t i = 0; i < order_; ++i)
      for (std::size_t j = i + 1; j < order_; ++j)
        if (!((*this)(i, j) == (*this)(j, i))) return false;
    return true;
  }

  /// Top-left principal submatrix of the given order.
  Matrix leading(std::size_t k) const {
    Matrix m(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  template <class U, class F>
  Matrix<U> map(F&& f) const {
    std::vector<U> out;
    out.reserve(data_.size());
    for (const auto& v : data_) out.push_back(f(v));
    return Matrix<U>(order_, std::move(out));
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t order_ = 0;
  std::vector<T> data_;
};

using RationalMatrix = Matrix<Rational>;

inline Matrix<double> to_double(const RationalMatrix& m) {
  return m.map<double>([](const Rational& q) { return to_double(q); });
}

/// Exact determinant. Rows are scaled to integers, then Bareiss fraction-free
/// elimination runs on the integer matrix; order 0 gives 1.
inline Rational exact_det(const RationalMatrix& m) {
  const std::size_t n = m.order();
  if (n == 0) return Rational(1);

  std::vector<BigInt> a(n * n);
  BigInt scale = 1;
  for (std::size_t i = 0; i < n; ++i) {
    BigInt row_lcm = 1;
    for (std::size_t j = 0; j < n; ++j) row_lcm = boost::multiprecision::lcm(row_lcm, denominator(m(i, j)));
    scale *= row_lcm;
    for (std::size_t j = 0; j < n; ++j) {
      const Rational& q = m(i, j);
      a[i * n + j] = numerator(q) * (row_lcm / denominator(q));
    }
  }
  auto at = [&](std::size_t i, std::size_t j) -> BigInt& { return a[i * n + j]; };

  int sign = 1;
  BigInt prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (at(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && at(p, k) == 0) ++p;
      if (p == n) return Rational(0);
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
      at(i, k) = 0;
    }
    prev = at(k, k);
  }
  return Rational(sign * at(n - 1, n - 1), scale);
}

/// (det M_1, ..., det M_n) for the nested top-left blocks of a symmetric matrix.
inline std::vector<Rational> leading_principal_minors(const RationalMatrix& m) {
  if (!m.is_symmetric()) throw std::invalid_argument("leading_principal_minors: matrix is not symmetric");
  std::vector<Rational> minors;
  minors.reserve(m.order());
  for (std::size_t k = 1; k <= m.order(); ++k) minors.push_back(exact_det(m.leading(k)));
  return minors;
}

}  // namespace expmoment
