#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "expmoment/recover.hpp"
#include "oracles.hpp"

namespace expmoment {
namespace {

MomentSequence<Rational> exact_seq(std::vector<Rational> v, Domain d = Domain::halfline()) { return {std::move(v), d}; }
MomentSequence<double> seq(std::vector<double> v, Domain d = Domain::halfline()) { return {std::move(v), d}; }

void expect_atoms(const AtomicMeasure& nu, const std::vector<Atom<double>>& want, double tol) {
  ASSERT_EQ(nu.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(nu.atoms()[i].x, want[i].x, tol) << i;
    EXPECT_NEAR(nu.atoms()[i].w, want[i].w, tol) << i;
  }
}

TEST(Stieltjes, Examples) {
  auto a = stieltjes_solvable(exact_seq({1, 1, 1, 1}));
  EXPECT_TRUE(a.solvable);
  EXPECT_EQ(a.rank, 1u);
  for (const auto& c : a.checks)
    if (c.k == 1) EXPECT_EQ(c.matrix, (RationalMatrix{{1, 1}, {1, 1}}));
  auto b = stieltjes_solvable(exact_seq({1, 2, 1, 2}));
  EXPECT_FALSE(b.solvable);
  EXPECT_NE(b.diagnostic.find("k=1"), std::string::npos);
  EXPECT_NE(b.diagnostic.find("-3"), std::string::npos);
  EXPECT_TRUE(stieltjes_solvable(exact_seq({0, 0, 0, 0})).solvable);
  EXPECT_FALSE(stieltjes_solvable(seq({1, 2, 1, 2})).solvable);
}

TEST(Stieltjes, DomainMismatch) {
  EXPECT_THROW(stieltjes_solvable(exact_seq({1, 1, 1, 1}, Domain::unit_interval())), std::invalid_argument);
  EXPECT_THROW(hausdorff_solvable(exact_seq({1, 1, 1, 1})), std::invalid_argument);
  EXPECT_THROW(stieltjes_solvable(exact_seq({1, 1, 1})), std::invalid_argument);
}

TEST(Hausdorff, Examples) {
  auto a = hausdorff_solvable(exact_seq({1, Rational(1, 2), Rational(1, 3), Rational(1, 4)}, Domain::unit_interval()));
  EXPECT_TRUE(a.solvable);
  for (const auto& c : a.checks) {
    if (c.k == 1) {
      EXPECT_TRUE(c.psd.is_pd);
      EXPECT_EQ(c.psd.minors, (std::vector<Rational>{Rational(1, 2), Rational(1, 72)}));
    }
  }
  auto b = hausdorff_solvable(exact_seq({1, 1, 1, 1}, Domain::unit_interval()));
  EXPECT_TRUE(b.solvable);
  auto c = hausdorff_solvable(exact_seq({1, 2, 4, 8}, Domain::unit_interval()));
  EXPECT_FALSE(c.solvable);
  EXPECT_NE(c.diagnostic.find("k=0"), std::string::npos);
  EXPECT_NE(c.diagnostic.find("Q3"), std::string::npos);
}

TEST(Hausdorff, GeneralIntervalPullBack) {
  // delta_3 on [2, 4] is fine; delta_5 is not
  EXPECT_TRUE(hausdorff_solvable(exact_seq({1, 3, 9, 27}, Domain::interval(2, 4))).solvable);
  EXPECT_FALSE(hausdorff_solvable(exact_seq({1, 5, 25, 125}, Domain::interval(2, 4))).solvable);
  EXPECT_TRUE(hausdorff_solvable(seq({1, 3, 9, 27}, Domain::interval(2, 4))).solvable);
}

TEST(Solvability, ComputedExponentialMomentsAreSolvable) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ux(0, 1), uw(0.1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    Frequencies f(oracle::random_frequencies(rng, 2 + 2 * (trial % 3), 0, 3, 0.2));
    std::vector<Atom<double>> atoms;
    for (int i = 0; i < 3; ++i) atoms.push_back({ux(rng), uw(rng)});
    AtomicMeasure mu(atoms);
    EXPECT_TRUE(hausdorff_solvable(exp_moments(f, mu, Domain::unit_interval())).solvable);
    EXPECT_TRUE(stieltjes_solvable(exp_moments(f, mu.scaled(2))).solvable);
  }
}

TEST(Jacobi, Examples) {
  auto a = jacobi_from_moments(seq({1, 1, 1, 1}));
  EXPECT_EQ(a.rank, 1u);
  EXPECT_DOUBLE_EQ(a.alphas[0], 1);
  EXPECT_DOUBLE_EQ(a.mass, 1);
  auto b = jacobi_from_moments(seq({1, 0, 1, 0}));
  EXPECT_EQ(b.alphas, (std::vector<double>{0, 0}));
  EXPECT_EQ(b.betas, (std::vector<double>{1}));
  auto c = jacobi_from_moments(seq({1, 1, 2, 4}));
  EXPECT_EQ(c.alphas, (std::vector<double>{1, 1}));
  EXPECT_EQ(c.betas, (std::vector<double>{1}));
  EXPECT_DOUBLE_EQ(c.mass, 1);
}

TEST(Jacobi, IndefiniteRejected) {
  try {
    jacobi_from_moments(seq({1, 2, 1, 2}));
    FAIL();
  } catch (const MomentProblemError& e) {
    EXPECT_EQ(e.stage(), "jacobi");
    EXPECT_NE(std::string(e.what()).find("eigenvalue"), std::string::npos);
  }
}

TEST(Jacobi, LegendreRecurrence) {
  // uniform on [-1, 1]: alpha_k = 0, beta_k = k^2 / (4k^2 - 1)
  std::vector<double> c(10);
  for (unsigned j = 0; j < c.size(); ++j) c[j] = j % 2 ? 0.0 : 1.0 / (j + 1);
  auto jc = jacobi_from_moments(seq(c));
  ASSERT_EQ(jc.rank, 5u);
  for (double a : jc.alphas) EXPECT_NEAR(a, 0, 1e-13);
  for (std::size_t k = 1; k < 5; ++k) EXPECT_NEAR(jc.betas[k - 1], k * k / (4.0 * k * k - 1), 1e-12);
}

TEST(Gauss, Examples) {
  expect_atoms(gauss_from_jacobi({{1}, {}, 1, 1}), {{1, 1}}, 1e-15);
  expect_atoms(gauss_from_jacobi({{0, 0}, {1}, 1, 2}), {{-1, 0.5}, {1, 0.5}}, 1e-15);
  expect_atoms(gauss_from_jacobi({{1, 1}, {1}, 1, 2}), {{0, 0.5}, {2, 0.5}}, 1e-15);
  EXPECT_TRUE(gauss_from_jacobi({}).empty());
  EXPECT_THROW(gauss_from_jacobi({{1, 1}, {}, 1, 2}), std::invalid_argument);
}

TEST(Gauss, ExactForHighDegree) {
  // a 5-point Legendre rule integrates t^j exactly for j <= 9
  std::vector<double> c(10);
  for (unsigned j = 0; j < c.size(); ++j) c[j] = j % 2 ? 0.0 : 2.0 / (j + 1);
  auto nu = gauss_from_jacobi(jacobi_from_moments(seq(c)));
  EXPECT_EQ(nu.size(), 5u);
  EXPECT_LE(moment_residual(nu, c), 1e-14);
}

TEST(Recover, Examples) {
  expect_atoms(recover_measure(seq({1, 1, 1, 1})), {{1, 1}}, 1e-14);
  expect_atoms(recover_measure(seq({1, 1, 2, 4})), {{0, 0.5}, {2, 0.5}}, 1e-14);
  EXPECT_TRUE(recover_measure(seq({0, 0, 0, 0})).empty());
}

TEST(Recover, EndpointAtomsOnUnitInterval) {
  expect_atoms(recover_measure(seq({1, 1, 1, 1}, Domain::unit_interval())), {{1, 1}}, 1e-14);
  expect_atoms(recover_measure(seq({1, 0.5, 0.5, 0.5}, Domain::unit_interval())), {{0, 0.5}, {1, 0.5}}, 1e-13);
}

TEST(Recover, RefusesUnsolvable) {
  try {
    recover_measure(seq({1, 2, 1, 2}));
    FAIL();
  } catch (const MomentProblemError& e) {
    EXPECT_EQ(e.stage(), "solvability");
  }
  try {
    recover_measure(seq({1, 2, 4, 8}, Domain::unit_interval()));
    FAIL();
  } catch (const MomentProblemError& e) {
    EXPECT_EQ(e.stage(), "solvability");
  }
}

TEST(Recover, InconsistentSingularData) {
  // (c_{i+j}) is PSD of rank 1 but c_3 does not continue delta_1
  try {
    recover_measure(seq({1, 1, 1, 5}));
    FAIL();
  } catch (const MomentProblemError& e) {
    EXPECT_EQ(e.stage(), "recover");
  }
}

TEST(Recover, RoundTrip) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> uw(0.1, 1);
  std::uniform_int_distribution<int> count(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    auto xs = oracle::random_frequencies(rng, count(rng), 0, 4, 0.2);
    std::vector<Atom<double>> atoms;
    for (double x : xs) atoms.push_back({x, uw(rng)});
    AtomicMeasure mu(atoms);
    auto c = power_moments(mu, 5);
    auto nu = recover_measure(c);
    ASSERT_EQ(nu.size(), mu.size()) << trial;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      EXPECT_LE(std::abs(nu.atoms()[i].x - mu.atoms()[i].x), 1e-6 * mu.atoms()[i].x) << trial;
      EXPECT_LE(std::abs(nu.atoms()[i].w - mu.atoms()[i].w), 1e-6 * mu.atoms()[i].w) << trial;
    }
  }
}

TEST(Recover, GeneralInterval) {
  AtomicMeasure mu({{2.5, 0.3}, {3.75, 0.7}});
  auto c = power_moments(mu, 3, Domain::interval(2, 4));
  expect_atoms(recover_measure(c), {{2.5, 0.3}, {3.75, 0.7}}, 1e-10);
}

TEST(Transfer, Examples) {
  Frequencies f(std::vector<double>{1, 2, 3, 4});
  auto a = verify_transfer(f, AtomicMeasure({{1, 1}}), Domain::halfline());
  EXPECT_TRUE(a.pass);
  EXPECT_LE(a.nu.size(), 2u);
  EXPECT_LE(moment_residual(a.nu, a.c_hat.values), 1e-8);
  auto b = verify_transfer(Frequencies(std::vector<double>{1, 2}), AtomicMeasure(std::vector<Atom<double>>{}),
                           Domain::halfline());
  EXPECT_TRUE(b.pass);
  EXPECT_TRUE(b.nu.empty());
  auto c = verify_transfer(f, UniformDensity{0, 1}, Domain::unit_interval());
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.nu.size(), 2u);
  for (const auto& at : c.nu.atoms()) EXPECT_TRUE(at.x >= 0 && at.x <= 1);
}

TEST(Transfer, StageTaggedErrors) {
  try {
    verify_transfer(Frequencies(std::vector<double>{0, 1}), AtomicMeasure({{1, 1}}), Domain::halfline());
    FAIL();
  } catch (const MomentProblemError& e) {
    EXPECT_EQ(e.stage(), "input");
  }
  try {
    verify_transfer(Frequencies(std::vector<double>{1, 2}), AtomicMeasure({{2, 1}}), Domain::unit_interval());
    FAIL();
  } catch (const MomentProblemError& e) {
    EXPECT_EQ(e.stage(), "exp_moments");
  }
}

TEST(Transfer, RandomAtomic) {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> uh(0, 2), uu(0, 1), uw(0.05, 1);
  for (int trial = 0; trial < 30; ++trial) {
    Frequencies f(oracle::random_frequencies(rng, 2 + 2 * (trial % 3), 0, 3, 0.2));
    std::vector<Atom<double>> ah, au;
    for (int i = 0; i < 4; ++i) {
      ah.push_back({uh(rng), uw(rng)});
      au.push_back({uu(rng), uw(rng)});
    }
    auto h = verify_transfer(f, AtomicMeasure(ah), Domain::halfline());
    EXPECT_TRUE(h.pass) << trial << " " << h.max_residual;
    auto u = verify_transfer(f, AtomicMeasure(au), Domain::unit_interval());
    EXPECT_TRUE(u.pass) << trial << " " << u.max_residual;
  }
}

}  // namespace
}  // namespace expmoment
