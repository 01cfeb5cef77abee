#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "expmoment/expcore.hpp"
#include "oracles.hpp"

namespace expmoment {
namespace {

std::vector<Rational> q(std::initializer_list<Rational> v) { return v; }

Frequencies f12() { return Frequencies(q({1, 2})); }
Frequencies f1234() { return Frequencies(q({1, 2, 3, 4})); }

void expect_rel(double got, double want, double tol) {
  EXPECT_LE(std::abs(got - want), tol * std::max(1.0, std::abs(want))) << got << " vs " << want;
}

TEST(Frequencies, RejectsEvenOrder) {
  EXPECT_THROW(Frequencies(std::vector<double>{0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(Frequencies(std::vector<double>{1}), std::invalid_argument);
}

TEST(Frequencies, RejectsRepeats) {
  try {
    Frequencies(std::vector<double>{1, 2, 2, 3});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "frequencies must be pairwise distinct");
  }
  EXPECT_THROW(Frequencies(q({Rational(1, 2), Rational(2, 4)})), std::invalid_argument);
  EXPECT_THROW(Frequencies(std::vector<double>{1, 1 + 1e-12}), std::invalid_argument);
}

TEST(Frequencies, RejectsNonFinite) {
  EXPECT_THROW(Frequencies(std::vector<double>{1, NAN}), std::invalid_argument);
  EXPECT_THROW(Frequencies(std::vector<double>{1, INFINITY}), std::invalid_argument);
}

TEST(Weights, Examples) {
  EXPECT_EQ(barycentric_weights_exact(f12()), q({-1, 1}));
  const std::vector<Rational> three{0, 1, 2};
  EXPECT_EQ(barycentric_weights<Rational>(three), q({Rational(1, 2), -1, Rational(1, 2)}));
  EXPECT_EQ(barycentric_weights_exact(f1234()), q({Rational(-1, 6), Rational(1, 2), Rational(-1, 2), Rational(1, 6)}));
  auto w = barycentric_weights(Frequencies(std::vector<double>{1, 2}));
  EXPECT_DOUBLE_EQ(w[0], -1);
  EXPECT_DOUBLE_EQ(w[1], 1);
}

TEST(Weights, PowerSumsVanishBelowN) {
  // sum_j w_j lambda_j^k = 0 for k < N and 1 for k = N
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rational> lam;
    while (lam.size() < 6) {
      Rational r = oracle::random_rational(rng, -30, 30, 7);
      if (std::find(lam.begin(), lam.end(), r) == lam.end()) lam.push_back(r);
    }
    Frequencies f(lam);
    auto w = barycentric_weights_exact(f);
    for (unsigned k = 0; k <= 5; ++k) {
      Rational s = 0;
      for (std::size_t j = 0; j < lam.size(); ++j) {
        Rational p = 1;
        for (unsigned i = 0; i < k; ++i) p *= lam[j];
        s += w[j] * p;
      }
      EXPECT_EQ(s, k == 5 ? 1 : 0);
    }
  }
}

TEST(Phi, Examples) {
  EXPECT_EQ(eval_phi(f12(), 0), 0);
  expect_rel(eval_phi(f12(), 1), 4.6707742704716049919, 1e-14);
  EXPECT_EQ(eval_phi(f1234(), 0), 0);
  EXPECT_DOUBLE_EQ(eval_phi_deriv(f12(), 1, 0), 1);
  expect_rel(eval_phi_deriv(f12(), 1, 1), 12.059830369402255219, 1e-14);
  EXPECT_EQ(eval_phi_deriv(f1234(), 2, 0), 0);
}

TEST(Phi, OverflowReported) {
  EXPECT_THROW(eval_phi(f12(), 400), std::overflow_error);
}

TEST(Phi, BoundaryConditions) {
  std::mt19937_64 rng(17);
  for (std::size_t count : {2u, 4u, 6u, 8u}) {
    for (int trial = 0; trial < 10; ++trial) {
      Frequencies f(oracle::random_frequencies(rng, count, -3, 5, 0.05));
      const unsigned n = f.order();
      auto d = phi_derivatives(f, n, 0.0);
      for (unsigned j = 0; j < n; ++j) EXPECT_LE(std::abs(d[j]), 1e-12) << "order " << j;
      EXPECT_NEAR(d[n], 1.0, 1e-12);
    }
  }
}

TEST(Phi, SeriesAgreesWithClosedForm) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    Frequencies f(oracle::random_frequencies(rng, 4, -2, 3, 0.5));
    for (double x : {-1.5, -0.3, 0.2, 1.0, 2.5}) {
      for (unsigned k = 0; k <= 5; ++k) {
        double closed = phi_derivative_closed_form(f, k, x);
        // the closed form loses digits to cancellation when |x| is small
        expect_rel(eval_phi_deriv(f, k, x), closed, 1e-9);
      }
    }
  }
}

TEST(Phi, PermutationInvariant) {
  std::vector<double> lam{0.3, 1.7, -0.4, 2.2, 0.9, 3.1};
  Frequencies a(lam);
  std::reverse(lam.begin(), lam.end());
  std::swap(lam[1], lam[4]);
  Frequencies b(lam);
  for (double x : {-1.0, 0.25, 1.5})
    for (unsigned k = 0; k <= 7; ++k) expect_rel(eval_phi_deriv(a, k, x), eval_phi_deriv(b, k, x), 1e-11);
}

TEST(Phi, DerivativeMatchesFiniteDifference) {
  Frequencies f(std::vector<double>{0.5, 1.25, 2, 3.5});
  for (double x : {0.1, 0.7, 1.9}) {
    for (unsigned k = 0; k < 4; ++k) {
      double fd = oracle::central_difference([&](double t) { return eval_phi_deriv(f, k, t); }, x, 1e-5);
      expect_rel(eval_phi_deriv(f, k + 1, x), fd, 1e-7);
    }
  }
}

TEST(Phi, CloseFrequenciesStayAccurate) {
  Frequencies f(std::vector<double>{1, 1 + 1e-6, 2, 3});
  auto b = eval_basis(f, 1.0);
  const double want[] = {83.940228512338079609, 21.752374087112565954, 10.086069885855798502, 6.181083815127342814};
  for (int j = 0; j < 4; ++j) expect_rel(b.values[j], want[j], 1e-12);
}

TEST(Taylor, Examples) {
  auto s = taylor_coeffs<Rational>(f12(), 4);
  EXPECT_EQ(s.a(1), 1);
  EXPECT_EQ(s.a(2), Rational(3, 2));
  EXPECT_EQ(taylor_coeffs<Rational>(f1234(), 3).a(3), Rational(1, 6));
  EXPECT_THROW(taylor_coeffs<Rational>(f12(), 0), std::invalid_argument);
}

TEST(Taylor, LeadingCoefficientAndSigns) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rational> lam;
    const std::size_t count = 2 * (1 + trial % 3);
    while (lam.size() < count) {
      Rational r = oracle::random_rational(rng, 0, 40, 9);
      if (std::find(lam.begin(), lam.end(), r) == lam.end()) lam.push_back(r);
    }
    Frequencies f(lam);
    const unsigned n = f.order();
    auto s = taylor_coeffs<Rational>(f, n + 60);
    EXPECT_EQ(s.a(n), Rational(1) / Rational(factorial(n)));
    for (unsigned k = n; k <= n + 60; ++k) EXPECT_GE(s.a(k), 0);
  }
}

TEST(Taylor, SeriesMatchesEvaluator) {
  Frequencies f(q({Rational(1, 2), 1, Rational(5, 2), 4}));
  auto s = taylor_coeffs<Rational>(f, 3 + 60);
  for (Rational x : {Rational(1, 3), Rational(1), Rational(3, 2)})
    expect_rel(to_double(eval_series(s, x)), eval_phi(f, to_double(x)), 1e-14);
}

TEST(Basis, Examples) {
  auto b0 = eval_basis(f1234(), 0);
  EXPECT_EQ(b0.values, (std::vector<double>{1, 0, 0, 0}));
  auto b = eval_basis(f12(), 1);
  expect_rel(b.values[0], 12.059830369402255219, 1e-14);
  expect_rel(b.values[1], 4.6707742704716049919, 1e-14);
  EXPECT_EQ(eval_basis(f12(), 0).values, (std::vector<double>{1, 0}));
}

TEST(Basis, FrozenReferenceValues) {
  const double at1[] = {340.32869598148446237, 69.535215827158258956, 26.412940863004267591, 13.790425731914141302};
  const double at_half[] = {28.912136374415886902, 4.6983255590951780172, 1.2939974875780535903,
                            0.45011310259346331866};
  const double at_m2[] = {0.020821788661465560096, 0.0038155794507743306049, -0.015469456327531596195,
                          -0.087489160472506714443};
  auto b1 = eval_basis(f1234(), 1), bh = eval_basis(f1234(), 0.5), bm = eval_basis(f1234(), -2);
  for (int j = 0; j < 4; ++j) {
    expect_rel(b1.values[j], at1[j], 1e-13);
    expect_rel(bh.values[j], at_half[j], 1e-13);
    EXPECT_LE(std::abs(bm.values[j] - at_m2[j]), 1e-13 * std::abs(at_m2[j])) << j;
  }
}

TEST(Basis, ExactTruncationMatchesFloating) {
  auto f = f1234();
  for (Rational x : {Rational(1, 2), Rational(1), Rational(7, 2)}) {
    auto e = eval_basis_exact(f, x);
    auto d = eval_basis(f, to_double(x));
    EXPECT_GE(e.series_order, f.order() + kDefaultSeriesExtra);
    for (std::size_t j = 0; j < e.values.size(); ++j) expect_rel(to_double(e.values[j]), d.values[j], 1e-13);
  }
}

TEST(Basis, ExactAtZero) {
  auto e = eval_basis_exact(f1234(), Rational(0), 10);
  EXPECT_EQ(e.values, q({1, 0, 0, 0}));
}

TEST(Positivity, Examples) {
  const double g1[] = {0.1, 1, 5};
  auto r1 = check_phi_positivity(f12(), 3, g1);
  EXPECT_TRUE(r1.pass);
  EXPECT_GT(r1.min_value, 0);
  const double g2[] = {0.5};
  EXPECT_TRUE(check_phi_positivity(f1234(), 5, g2).pass);
  const double g3[] = {0};
  auto r3 = check_phi_positivity(f12(), 0, g3);
  EXPECT_TRUE(r3.pass);
  EXPECT_EQ(r3.min_value, 0);
  EXPECT_TRUE(r3.taylor_exact);
}

TEST(Positivity, RandomNonnegativeFrequencies) {
  std::mt19937_64 rng(99);
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.15 * i);
  for (int trial = 0; trial < 20; ++trial) {
    Frequencies f(oracle::random_frequencies(rng, 4, 0, 4, 0.1));
    auto r = check_phi_positivity(f, 9, grid);
    EXPECT_TRUE(r.pass) << r.min_value << " at order " << r.min_order;
    EXPECT_TRUE(r.taylor_nonnegative);
  }
}

TEST(Positivity, NegativeFrequencyRejected) {
  const double g[] = {1};
  EXPECT_THROW(check_phi_positivity(Frequencies(std::vector<double>{-1, 2}), 2, g), std::invalid_argument);
}

}  // namespace
}  // namespace expmoment
