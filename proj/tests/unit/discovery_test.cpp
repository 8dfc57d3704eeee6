#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdd/discovery.hpp"
#include "fdd/domains.hpp"
#include "fdd/error.hpp"
#include "fdd/lstd.hpp"
#include "fdd/theory.hpp"
#include "test_support.hpp"

namespace {

using namespace fdd;

SampleSet from_bits(const std::vector<std::vector<int>>& rows) {
  SampleSet out;
  for (const auto& r : rows) {
    const auto b = BaseBits::from_list(r);
    out.push_back(Sample::transition(b, 0.0, b, true));
  }
  return out;
}

// Brute force: every member of pair(chi) that fires on some sample.
FeatureSet coactive_pairs(const FeatureSet& chi, const SampleSet& samples) {
  FeatureSet out(chi.n());
  for (const auto& f : pair(chi)) {
    const bool fires = std::any_of(samples.begin(), samples.end(), [&](const Sample& s) { return f.active(s.s_bits); });
    if (fires) out.insert(f);
  }
  return out;
}

double hand_sum(const Feature& f, const SampleSet& samples, const std::vector<double>& deltas, bool absolute) {
  double s = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (f.active(samples[i].s_bits)) s += absolute ? std::abs(deltas[i]) : deltas[i];
  }
  return s;
}

TEST(Candidates, NeverCoactiveGivesNothing) {
  const auto samples = from_bits({{1, 0}, {1, 0}, {1, 0}});
  EXPECT_TRUE(generate_candidates(FeatureSet::base(2), samples).empty());
}

TEST(Candidates, CoactiveSampleYieldsPair) {
  const auto samples = from_bits({{1, 1}});
  EXPECT_EQ(generate_candidates(FeatureSet::base(2), samples).to_string(), "{1,2}");
}

TEST(Candidates, MatchExhaustiveFilter) {
  Rng rng(5);
  std::bernoulli_distribution coin(0.4);
  for (int k = 0; k < 100; ++k) {
    const auto chi = test::random_subset(FeatureSet::all(5), FeatureSet::base(5), rng);
    std::vector<std::vector<int>> rows(20, std::vector<int>(5));
    for (auto& r : rows) {
      for (auto& b : r) b = coin(rng) ? 1 : 0;
    }
    const auto samples = from_bits(rows);
    EXPECT_EQ(generate_candidates(chi, samples), coactive_pairs(chi, samples)) << chi.to_string();
  }
}

TEST(Scores, IfddPlusExamples) {
  const Feature f{1};
  const auto three = from_bits({{1}, {0}, {1}});
  EXPECT_NEAR(score_ifdd_plus(f, three, std::vector<double>{1, -1, 2}), 3.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(score_ifdd_plus(f, from_bits({{1}}), std::vector<double>{5}), 5.0);
  EXPECT_DOUBLE_EQ(score_ifdd_plus(f, from_bits({{1}, {1}}), std::vector<double>{1, -1}), 0.0);
  EXPECT_THROW(score_ifdd_plus(f, three, std::vector<double>{1, 2}), DimensionError);
}

TEST(Scores, Icml11Examples) {
  const Feature f{1};
  EXPECT_DOUBLE_EQ(score_ifdd_icml11(f, from_bits({{1}, {0}, {1}}), std::vector<double>{1, -1, 2}), 3.0);
  EXPECT_DOUBLE_EQ(score_ifdd_icml11(f, from_bits({{1}, {1}}), std::vector<double>{1, -1}), 2.0);
  EXPECT_DOUBLE_EQ(score_ifdd_icml11(f, from_bits({{0}, {0}}), std::vector<double>{1, -1}), 0.0);
}

TEST(Scores, OmpTdExamples) {
  const Feature f{1};
  EXPECT_DOUBLE_EQ(score_omptd(f, from_bits({{1}, {0}, {0}, {0}}), std::vector<double>{1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(score_omptd(f, from_bits({{1}, {1}, {1}}), std::vector<double>{1, -3, 2}), 0.0);
  EXPECT_DOUBLE_EQ(score_omptd(f, from_bits({{0}}), std::vector<double>{4}), 0.0);
}

TEST(Scores, MatchHandSumsAndOmpTdEqualsIfddPlus) {
  Rng rng(17);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto features = FeatureSet::all(4);
  for (int k = 0; k < 50; ++k) {
    std::vector<std::vector<int>> rows(30, std::vector<int>(4));
    std::vector<double> deltas;
    for (auto& r : rows) {
      for (auto& b : r) b = coin(rng) ? 1 : 0;
      deltas.push_back(gauss(rng));
    }
    const auto samples = from_bits(rows);
    for (const auto& f : features) {
      const double count = hand_sum(f, samples, std::vector<double>(30, 1.0), false);
      const double plus = score_ifdd_plus(f, samples, deltas);
      EXPECT_EQ(score_omptd(f, samples, deltas), plus);
      EXPECT_NEAR(score_ifdd_icml11(f, samples, deltas), hand_sum(f, samples, deltas, true), 1e-12);
      if (count > 0) EXPECT_NEAR(plus, std::abs(hand_sum(f, samples, deltas, false)) / std::sqrt(count), 1e-12);
    }
  }
}

TEST(Scores, InvariantUnderSamplePermutation) {
  BitChainParams p;
  p.d = 4;
  const EnumeratedDomain dom("bitchain", std::make_shared<EnumeratedMdp>(bitchain_build(p)));
  auto samples = simulate(dom, 500, 9);
  const auto chi = FeatureSet::base(4);
  const auto deltas = sample_td_errors(samples, lstd_fit(samples, chi, p.gamma).theta, chi, p.gamma);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), Rng(2));
  SampleSet shuffled;
  std::vector<double> shuffled_deltas;
  for (auto i : order) {
    shuffled.push_back(samples[i]);
    shuffled_deltas.push_back(deltas[i]);
  }
  for (const auto& f : FeatureSet::all(4)) {
    EXPECT_NEAR(score_ifdd_plus(f, samples, deltas), score_ifdd_plus(f, shuffled, shuffled_deltas), 1e-12);
    EXPECT_NEAR(score_ifdd_icml11(f, samples, deltas), score_ifdd_icml11(f, shuffled, shuffled_deltas), 1e-10);
  }
}

TEST(Scores, ExactEq2Example) {
  const auto states = binary_states(2);
  SteadyStateDist d{Vector::Constant(4, 0.25)};
  // Feature {1} fires on codes 1 and 3.
  Vector delta(4);
  delta << -1, 1, -1, 1;
  const auto sc = score_exact_eq2(Feature{1}, states, d, delta, 0.5);
  EXPECT_NEAR(sc.score, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(sc.eta, std::sqrt(0.5), 1e-15);
  EXPECT_TRUE(sc.admissible);
  EXPECT_FALSE(score_exact_eq2(Feature{1}, states, d, delta, 0.9).admissible);

  SteadyStateDist zero_on_support{Vector(4)};
  zero_on_support.d << 0.5, 0.0, 0.5, 0.0;
  EXPECT_THROW(score_exact_eq2(Feature{1}, states, zero_on_support, delta, 0.5), DomainError);
}

TEST(Scores, ExactEq2IsWeightedNormTimesCosine) {
  Rng rng(23);
  for (int k = 0; k < 30; ++k) {
    const auto mdp = random_chain(3, 0.5, rng);
    const auto d = steady_state(mdp);
    const Vector delta = bellman_error(mdp, Vector::Zero(8));
    for (const auto& f : FeatureSet::all(3)) {
      Vector phi(8);
      for (Eigen::Index s = 0; s < 8; ++s) phi[s] = f.active(mdp.state_bits()[s]) ? 1.0 : 0.0;
      const auto sc = score_exact_eq2(f, mdp.state_bits(), d, delta, 0.5);
      EXPECT_NEAR(sc.score, weighted_norm(delta, d) * std::cos(angle(phi, delta, d)), 1e-10);
    }
  }
}

// With theta chosen so that Phi theta is the projection of V, the eta of every
// candidate matches the one the bound checker measures independently, and the
// pick maximises the guaranteed reduction among admissible candidates.
TEST(Scores, ExactEq2PickMaximisesGuaranteedReduction) {
  Rng rng(31);
  std::size_t admissible_seen = 0;
  for (int k = 0; k < 40; ++k) {
    const auto mdp = std::make_shared<EnumeratedMdp>(random_chain(3, 0.5, rng));
    const auto d = steady_state(*mdp);
    const auto chi = test::random_subset(FeatureSet::all(3), FeatureSet::base(3), rng);
    const Eigen::MatrixXd phi = build_phi_matrix(chi, mdp->state_bits());
    const Vector sqrt_d = d.d.cwiseSqrt();
    const Vector theta =
        (sqrt_d.asDiagonal() * phi).colPivHouseholderQr().solve(sqrt_d.cwiseProduct(exact_value(*mdp)));

    const auto method = DiscoveryMethod::exact_eq2(mdp, d);
    const auto rows = expectation_samples(*mdp, d);
    const auto encoded = encode_samples(rows, chi);
    const std::vector<double> deltas(rows.size(), 0.0);
    const auto cands = score_candidates(method, chi, rows, encoded, deltas, theta, 0.5);
    ASSERT_EQ(cands.size(), pair(chi).size());

    double best_zeta = -1.0;
    for (const auto& c : cands) {
      const auto rep = verify_bound_reduction(*mdp, chi, c.feature, d);
      EXPECT_NEAR(c.eta, rep.eta, 1e-9);
      EXPECT_EQ(c.admissible, rep.admissible);
      if (c.admissible) best_zeta = std::max(best_zeta, zeta_from_eta(0.5, c.eta));
    }
    const auto best = select_best(cands);
    if (!best) continue;
    ++admissible_seen;
    EXPECT_NEAR(zeta_from_eta(0.5, best->eta), best_zeta, 1e-12);
  }
  EXPECT_GT(admissible_seen, 0u);
}

TEST(SelectBest, TieGoesToCanonicallySmallest) {
  std::vector<Candidate> c(3);
  c[0].feature = Feature{1, 3};
  c[1].feature = Feature{2};
  c[2].feature = Feature{1, 2};
  for (auto& x : c) x.score = 1.5;
  EXPECT_EQ(select_best(c)->feature, Feature{2});
  c[1].score = 1.0;
  EXPECT_EQ(select_best(c)->feature, (Feature{1, 2}));
  c[2].admissible = false;
  EXPECT_EQ(select_best(c)->feature, (Feature{1, 3}));
  c[0].admissible = false;
  c[1].admissible = false;
  EXPECT_FALSE(select_best(c).has_value());
}

TEST(Method, Labels) {
  EXPECT_EQ(DiscoveryMethod::ifdd_plus().label(), "ifdd+");
  EXPECT_EQ(DiscoveryMethod::ifdd_icml11().label(), "ifdd-icml11");
  EXPECT_EQ(DiscoveryMethod::omp_td(FeatureSet::all(2)).label(), "omptd(4)");
  const auto mdp = std::make_shared<EnumeratedMdp>(test::swap_chain());
  EXPECT_EQ(DiscoveryMethod::exact_eq2(mdp, steady_state(*mdp)).label(), "exact-eq2");
  EXPECT_THROW(DiscoveryMethod::exact_eq2(nullptr, {}), DomainError);
}

ExpansionState bitchain_state(std::size_t d, DiscoveryMethod method, double reg) {
  BitChainParams p;
  p.d = d;
  const auto mdp = bitchain_build(p);
  ExpansionState st;
  st.chi = FeatureSet::base(d);
  st.samples = std::make_shared<SampleSet>(expectation_samples(mdp, steady_state(mdp)));
  st.method = std::move(method);
  st.gamma = p.gamma;
  st.reg = reg;
  return st;
}

TEST(ExpandStep, CompleteLatticeSaturates) {
  auto st = bitchain_state(3, DiscoveryMethod::ifdd_plus(), 0.0);
  st.chi = FeatureSet::all(3);
  const auto out = expand_step(st);
  EXPECT_TRUE(out.record.saturated);
  EXPECT_FALSE(out.record.added.has_value());
  EXPECT_EQ(out.chi, st.chi);
  EXPECT_EQ(out.record.candidates_scored, 0u);
  EXPECT_THROW(expand_step(ExpansionState{}), DomainError);
}

TEST(ExpandStep, IfddPlusReachesExactRepresentation) {
  auto st = bitchain_state(4, DiscoveryMethod::ifdd_plus(), 0.0);
  const std::size_t steps = 16 - st.chi.size();
  for (std::size_t k = 0; k < steps; ++k) {
    const auto p = pair(st.chi);
    const auto out = expand_step(st);
    ASSERT_TRUE(out.record.added.has_value());
    EXPECT_TRUE(p.contains(*out.record.added));
    st.chi = out.chi;
    st.solution = out.solution;
    if (k + 1 == steps) EXPECT_LE(out.record.td_error_l2, 1e-8);
  }
  EXPECT_EQ(st.chi, FeatureSet::all(4));
  EXPECT_TRUE(expand_step(st).record.saturated);
}

TEST(ExpandStep, OmpTdPicksFromPoolOnly) {
  FeatureSet pool = FeatureSet::base(3).with(Feature{2, 3});
  auto st = bitchain_state(3, DiscoveryMethod::omp_td(pool), 0.0);
  auto out = expand_step(st);
  EXPECT_EQ(out.record.added, (Feature{2, 3}));
  st.chi = out.chi;
  EXPECT_TRUE(expand_step(st).record.saturated);
}

// With every conjunction in the pool, OMP-TD and iFDD+ make the same picks
// on a depth-two lattice.
TEST(ExpandStep, OmpTdWithFullPoolMatchesIfddPlus) {
  auto run = [](DiscoveryMethod m, const Domain& dom, std::uint64_t seed, std::size_t steps) {
    ExpansionState st;
    st.chi = dom.initial_features();
    st.samples = std::make_shared<SampleSet>(simulate(dom, 3000, seed));
    st.method = std::move(m);
    st.gamma = dom.default_gamma();
    st.reg = 1e-6;
    std::vector<std::pair<std::optional<Feature>, double>> trace;
    for (std::size_t k = 0; k < steps; ++k) {
      const auto out = expand_step(st);
      if (out.record.saturated) break;
      trace.emplace_back(out.record.added, out.record.td_error_l2);
      st.chi = out.chi;
      st.solution = out.solution;
    }
    return trace;
  };

  BitChainParams p;
  p.d = 2;
  const EnumeratedDomain chain("bitchain", std::make_shared<EnumeratedMdp>(bitchain_build(p)));
  EXPECT_EQ(run(DiscoveryMethod::ifdd_plus(), chain, 4, 3),
            run(DiscoveryMethod::omp_td(full(FeatureSet::base(2))), chain, 4, 3));

  MountainCarParams mp;
  mp.bins_per_dim = 4;
  const MountainCarDomain car(mp);
  const auto pool = build_pool(8, car.initial_features(), 1000, car.exclusive_groups());
  EXPECT_EQ(pool.size(), 8u + 16u);
  const auto a = run(DiscoveryMethod::ifdd_plus(), car, 11, 10);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, run(DiscoveryMethod::omp_td(pool), car, 11, 10));
}

TEST(Pool, GridOfPositionAndVelocity) {
  const MountainCarDomain car;
  const auto pool = build_pool(40, car.initial_features(), 440, car.exclusive_groups());
  ASSERT_EQ(pool.size(), 440u);
  std::size_t pairs = 0;
  for (const auto& f : pool) {
    if (f.order() != 2) continue;
    ++pairs;
    EXPECT_LE(f.indices()[0], 20u);
    EXPECT_GT(f.indices()[1], 20u);
  }
  EXPECT_EQ(pairs, 400u);
}

TEST(Pool, CapAtInitialKeepsInitial) {
  const auto init = FeatureSet::base(5);
  EXPECT_EQ(build_pool(5, init, init.size()), init);
  EXPECT_THROW(build_pool(5, init, 2), DomainError);
  EXPECT_THROW(build_pool(4, init, 10), DimensionError);
}

TEST(Pool, SysAdminLevels) {
  SysAdminParams p;
  p.machines = 20;
  const SysAdminDomain net(p);
  const auto pool = build_pool(40, net.initial_features(), 2000, net.exclusive_groups());
  std::vector<std::size_t> by_size(4, 0);
  for (const auto& f : pool) ++by_size.at(f.order());
  EXPECT_EQ(by_size[1], 40u);
  EXPECT_EQ(by_size[2], 760u);
  EXPECT_EQ(by_size[3], 1200u);

  p.machines = 8;
  const SysAdminDomain small(p);
  EXPECT_EQ(build_pool(16, small.initial_features(), 128, small.exclusive_groups()).size(), 128u);
  std::size_t valid = 1;
  for (int i = 0; i < 8; ++i) valid *= 3;
  EXPECT_EQ(build_pool(16, small.initial_features(), 100000, small.exclusive_groups()).size(), valid - 1);
}

TEST(Pool, LevelsAreLexicographic) {
  const auto pool = build_pool(4, FeatureSet::singletons(4), 8);
  std::vector<std::string> text;
  for (const auto& f : pool) text.push_back(f.to_string());
  EXPECT_EQ(text, (std::vector<std::string>{"{1}", "{2}", "{3}", "{4}", "{1,2}", "{1,3}", "{1,4}", "{2,3}"}));
}

}  // namespace
