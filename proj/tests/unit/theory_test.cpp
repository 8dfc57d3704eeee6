#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fdd/domains.hpp"
#include "fdd/error.hpp"
#include "fdd/theory.hpp"
#include "test_support.hpp"

namespace {

using namespace fdd;

SteadyStateDist uniform(Eigen::Index m) { return {Vector::Constant(m, 1.0 / static_cast<double>(m))}; }

IntMatrix random_int_matrix(std::size_t rows, std::size_t cols, int lo, int hi, Rng& rng) {
  std::uniform_int_distribution<int> u(lo, hi);
  IntMatrix m(rows, std::vector<std::int64_t>(cols));
  for (auto& r : m) {
    for (auto& x : r) x = u(rng);
  }
  return m;
}

// Rank by floating point column-pivoted QR; fine for small well-scaled integers.
std::size_t float_rank(const IntMatrix& m) {
  Eigen::MatrixXd a(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) a(i, j) = static_cast<double>(m[i][j]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-9);
  return static_cast<std::size_t>(qr.rank());
}

TEST(Angle, Examples) {
  const auto d = uniform(3);
  Vector x(3);
  x << 1, 2, 3;
  EXPECT_NEAR(angle(x, x, d), 0.0, 1e-7);
  EXPECT_NEAR(angle(x, -x, d), 0.0, 1e-7);
  Vector a(3), b(3);
  a << 1, 0, 0;
  b << 0, 1, 1;
  EXPECT_DOUBLE_EQ(angle(a, b, d), std::numbers::pi / 2);
  EXPECT_THROW(angle(Vector::Zero(3), a, d), DomainError);
}

TEST(Angle, StaysInRangeAndMatchesEta) {
  Rng rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const auto states = binary_states(3);
    Vector delta(8);
    for (auto& v : delta) v = g(rng);
    const auto d = uniform(8);
    const Feature f = Feature{static_cast<Index>(1 + k % 3)};
    Vector phi(8);
    for (Eigen::Index s = 0; s < 8; ++s) phi[s] = f.active(states[s]) ? 1.0 : 0.0;
    const double beta = angle(phi, delta, d);
    EXPECT_GE(beta, 0.0);
    EXPECT_LE(beta, std::numbers::pi / 2);
    const double e = eta(f, states, d, delta);
    EXPECT_NEAR(e, std::cos(beta), 1e-12);
    for (double gamma : {0.1, 0.5, 0.9}) {
      if (std::abs(e - gamma) > 1e-12) EXPECT_EQ(e > gamma, beta < std::acos(gamma));
    }
  }
}

TEST(Zeta, Examples) {
  EXPECT_EQ(zeta(0.9, 0.0), 1.0 - 0.9);
  EXPECT_NEAR(zeta(0.9, 0.0), 0.1, 1e-15);
  EXPECT_NEAR(zeta(0.9, std::acos(0.9) * (1 - 1e-12)), 0.0, 1e-9);
  for (double beta : {0.0, 0.3, 1.0, 1.5}) EXPECT_NEAR(zeta(0.0, beta), 1.0 - std::sin(beta), 1e-15);
  EXPECT_THROW(zeta(0.9, std::acos(0.9)), DomainError);
  EXPECT_THROW(zeta(0.9, -0.1), DomainError);
  EXPECT_THROW(zeta(1.0, 0.0), DomainError);
  EXPECT_THROW(zeta(-0.1, 0.0), DomainError);
}

TEST(Zeta, StrictlyDecreasingAndConsistentWithEta) {
  for (double gamma : {0.0, 0.3, 0.5, 0.9, 0.99}) {
    const double top = std::acos(gamma);
    double prev = zeta(gamma, 0.0);
    for (int i = 1; i < 500; ++i) {
      const double beta = top * i / 500.0;
      const double z = zeta(gamma, beta);
      EXPECT_LT(z, prev);
      EXPECT_LT(z, 1.0);
      EXPECT_NEAR(zeta_from_eta(gamma, std::cos(beta)), z, 1e-12);
      prev = z;
    }
  }
  EXPECT_THROW(zeta_from_eta(0.5, 0.5), DomainError);
  EXPECT_THROW(zeta_from_eta(0.5, 1.1), DomainError);
}

TEST(Eta, Examples) {
  const auto states = binary_states(1);
  const auto d = uniform(2);
  EXPECT_NEAR(eta(Feature::null(), binary_states(1), d, Vector::Constant(2, 3.0)), std::sqrt(0.5), 1e-15);
  // Both states carry bit 1, so {1} is active everywhere.
  Vector c(2);
  c << 3, 3;
  const std::vector<BaseBits> both_on(2, BaseBits::from_list({1}));
  EXPECT_NEAR(eta(Feature{1}, both_on, d, c), 1.0, 1e-15);
  Vector alt(2);
  alt << 1, -1;
  EXPECT_NEAR(eta(Feature{1}, both_on, d, alt), 0.0, 1e-15);
  EXPECT_THROW(eta(Feature{1}, states, d, Vector::Zero(2)), DomainError);
  EXPECT_THROW(eta(Feature{1}, states, d, Vector::Zero(3)), DimensionError);
}

TEST(Rank, ModularAgreesWithExactOnRandomMatrices) {
  Rng rng(77);
  for (int k = 0; k < 200; ++k) {
    const std::size_t rows = 1 + k % 7;
    const std::size_t cols = 1 + (k / 7) % 6;
    auto m = random_int_matrix(rows, cols, -3, 3, rng);
    if (k % 3 == 0 && cols > 1) {
      for (auto& r : m) r[cols - 1] = r[0] - 2 * r[cols - 2];
    }
    const auto exact = exact_rank(m);
    EXPECT_EQ(exact, float_rank(m));
    EXPECT_EQ(modular_rank(m, (std::uint64_t{1} << 61) - 1), exact);
    EXPECT_LE(modular_rank(m, 3), exact);
  }
}

TEST(Rank, ModularCanUndercount) {
  const std::int64_t p = (std::int64_t{1} << 61) - 1;
  const IntMatrix m{{p, 0}, {0, 1}};
  EXPECT_EQ(modular_rank(m, static_cast<std::uint64_t>(p)), 1u);
  EXPECT_EQ(exact_rank(m), 2u);
  EXPECT_EQ(exact_rank(IntMatrix{}), 0u);
  EXPECT_THROW(exact_rank(IntMatrix{{1, 2}, {3}}), DimensionError);
  EXPECT_THROW(modular_rank(IntMatrix{{1, 2}, {3}}, 7), DimensionError);
}

TEST(Rank, CompleteLatticesAreInvertible) {
  const auto phi1 = build_phi_matrix(FeatureSet::all(1), binary_states(1));
  EXPECT_TRUE(phi1.isIdentity());
  EXPECT_DOUBLE_EQ(phi1.determinant(), 1.0);
  for (std::size_t n = 1; n <= 8; ++n) {
    EXPECT_TRUE(verify_rank(FeatureSet::all(n), n)) << n;
    const auto phi = build_phi_matrix(FeatureSet::all(n), binary_states(n));
    IntMatrix rows(phi.rows(), std::vector<std::int64_t>(phi.cols()));
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
      for (Eigen::Index j = 0; j < phi.cols(); ++j) rows[i][j] = static_cast<std::int64_t>(phi(i, j));
    }
    if (n <= 6) EXPECT_EQ(exact_rank(rows), std::size_t{1} << n);
  }
}

TEST(Rank, RandomSubsetsHaveFullColumnRank) {
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    const auto chi = test::random_subset(FeatureSet::all(4), rng);
    EXPECT_TRUE(verify_rank(chi, 4)) << chi.to_string();
  }
  // Extra zero bits only add rows.
  Rng rng2(5);
  for (int k = 0; k < 20; ++k) EXPECT_TRUE(verify_rank(test::random_subset(FeatureSet::all(3), rng2), 5));
}

TEST(Rank, Guards) {
  EXPECT_THROW(verify_rank(FeatureSet::base(17), 17), SizeGuardError);
  EXPECT_THROW(verify_rank(FeatureSet::base(4), 3), DimensionError);
}

BitChainParams chain(std::size_t d, double gamma) {
  BitChainParams p;
  p.d = d;
  p.gamma = gamma;
  return p;
}

TEST(Bound, CompletingTheBasisRemovesAllError) {
  for (std::size_t d = 2; d <= 4; ++d) {
    const auto mdp = bitchain_build(chain(d, 0.5));
    for (const auto& g : FeatureSet::all(d)) {
      if (g.order() < 2) continue;
      FeatureSet chi(d);
      for (const auto& h : FeatureSet::all(d)) {
        if (h != g) chi.insert(h);
      }
      const auto rep = verify_bound_reduction(mdp, chi, g);
      EXPECT_NEAR(rep.x_after, 0.0, 1e-10);
      EXPECT_TRUE(rep.line_search_agrees);
      EXPECT_LE(rep.x_line, rep.x + 1e-12);
      if (rep.satisfied) EXPECT_TRUE(*rep.satisfied);
    }
  }
}

TEST(Bound, RejectsBadInputs) {
  const auto mdp = bitchain_build(chain(2, 0.5));
  EXPECT_THROW(verify_bound_reduction(mdp, FeatureSet::base(2), Feature{1}), DomainError);
  const auto bare = test::make_mdp(Eigen::MatrixXd::Identity(2, 2), Vector::Ones(2), 0.5);
  EXPECT_THROW(verify_bound_reduction(bare, FeatureSet::base(1), Feature{1}), DomainError);
}

TEST(Bound, ExhaustiveBitChainSweeps) {
  Rng rng(19);
  for (std::size_t d : {3, 4}) {
    for (double gamma : {0.5, 0.9}) {
      const auto mdp = bitchain_build(chain(d, gamma));
      for (int k = 0; k < 10; ++k) {
        const auto chi = k == 0 ? FeatureSet::base(d) : test::random_subset(FeatureSet::all(d), FeatureSet::base(d), rng);
        const auto sweep = sweep_bound_reduction(mdp, chi);
        EXPECT_EQ(sweep.candidates, pair(chi).size());
        EXPECT_EQ(sweep.violations, 0u);
        EXPECT_EQ(sweep.monotonicity_violations, 0u);
        EXPECT_EQ(sweep.line_search_mismatches, 0u);
        EXPECT_LE(sweep.worst_monotonicity, 1e-12);
        if (sweep.admissible > 0) EXPECT_GE(sweep.worst_margin, -kBoundTolerance);
      }
    }
  }
}

TEST(Bound, RandomChainsExerciseAdmissibleCandidates) {
  Rng rng(21);
  std::size_t admissible = 0;
  for (int k = 0; k < 60; ++k) {
    const auto mdp = random_chain(3, 0.5, rng);
    const auto chi = test::random_subset(FeatureSet::all(3), FeatureSet::base(3), rng);
    const auto sweep = sweep_bound_reduction(mdp, chi);
    admissible += sweep.admissible;
    EXPECT_EQ(sweep.violations, 0u);
    EXPECT_EQ(sweep.monotonicity_violations, 0u);
  }
  EXPECT_GT(admissible, 0u);
}

TEST(RandomChain, RowsAreDistributions) {
  Rng a(3), b(3);
  const auto m1 = random_chain(3, 0.7, a);
  const auto m2 = random_chain(3, 0.7, b);
  const Eigen::MatrixXd P(m1.P());
  EXPECT_NEAR((P.rowwise().sum().array() - 1.0).abs().maxCoeff(), 0.0, 1e-12);
  EXPECT_GE(P.minCoeff(), 0.0);
  EXPECT_EQ(P, Eigen::MatrixXd(m2.P()));
  EXPECT_EQ(m1.R(), m2.R());
  EXPECT_EQ(m1.gamma(), 0.7);
  EXPECT_EQ(m1.state_bits(), binary_states(3));
  EXPECT_THROW(random_chain(0, 0.5, a), SizeGuardError);
  EXPECT_THROW(random_chain(11, 0.5, a), SizeGuardError);
}

}  // namespace
