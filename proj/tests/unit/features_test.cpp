#include <gtest/gtest.h>

#include <set>

#include "fdd/domains.hpp"
#include "fdd/error.hpp"
#include "fdd/features.hpp"
#include "fdd/theory.hpp"
#include "test_support.hpp"

namespace {

using namespace fdd;

// Closure of chi under pairwise union, computed as a fixed point.
std::set<std::vector<Index>> union_closure(const FeatureSet& chi) {
  std::set<std::vector<Index>> out;
  for (const auto& f : chi) out.insert({f.indices().begin(), f.indices().end()});
  for (bool grown = true; grown;) {
    grown = false;
    std::vector<std::vector<Index>> cur(out.begin(), out.end());
    for (const auto& a : cur) {
      for (const auto& b : cur) {
        std::set<Index> u(a.begin(), a.end());
        u.insert(b.begin(), b.end());
        grown = out.insert({u.begin(), u.end()}).second || grown;
      }
    }
  }
  return out;
}

TEST(Feature, ActivationFollowsConjunction) {
  const auto s = BaseBits::from_list({1, 0, 1});
  EXPECT_TRUE(activate(Feature{1, 3}, s));
  EXPECT_FALSE(activate(Feature{1, 2}, s));
  EXPECT_TRUE(activate(Feature{2}, BaseBits::from_list({0, 1, 0})));
}

TEST(Feature, NullFeatureActiveOnlyOnAllZeroState) {
  EXPECT_TRUE(activate(Feature::null(), BaseBits::from_list({0, 0, 0})));
  EXPECT_FALSE(activate(Feature::null(), BaseBits::from_list({1, 0, 0})));
  for (const auto& s : binary_states(4)) {
    const auto active = activate_all(FeatureSet::base(4), s);
    if (s.none()) {
      EXPECT_EQ(active, std::vector<std::size_t>{0});
    } else {
      EXPECT_FALSE(activate(Feature::null(), s));
      EXPECT_EQ(active.size(), s.count());
    }
  }
}

TEST(Feature, OutOfRangeIndexThrows) {
  EXPECT_THROW(activate(Feature{4}, BaseBits::from_list({1, 1, 1})), DomainError);
  EXPECT_THROW(Feature({0, 1}), DomainError);
}

TEST(Feature, IndicesSortedAndDeduplicated) {
  const Feature f({3, 1, 3});
  EXPECT_EQ(f.to_string(), "{1,3}");
  EXPECT_EQ(f, (Feature{1, 3}));
  EXPECT_EQ(Feature::null().to_string(), "{}");
}

TEST(Feature, ParseRoundTripAndRejectsGarbage) {
  for (const char* text : {"{}", "{7}", "{1,3,12}"}) EXPECT_EQ(Feature::parse(text).to_string(), text);
  for (const char* text : {"", "{", "1,2", "{1,,2}", "{a}", "{0}", "{1,2}x"}) {
    EXPECT_THROW(Feature::parse(text), Error) << text;
  }
}

TEST(Feature, CanonicalOrderIsCardinalityThenLexicographic) {
  EXPECT_LT(Feature::null(), Feature{5});
  EXPECT_LT(Feature{5}, (Feature{1, 2}));
  EXPECT_LT((Feature{1, 3}), (Feature{2, 3}));
  EXPECT_LT((Feature{2, 3}), (Feature{1, 2, 3}));
}

TEST(Feature, WideIndicesUseSeveralWords) {
  BaseBits s(130);
  s.set(1);
  s.set(70);
  s.set(130);
  EXPECT_TRUE(activate(Feature({1, 70, 130}), s));
  EXPECT_FALSE(activate(Feature({1, 69, 130}), s));
  EXPECT_EQ(s.count(), 3u);
}

TEST(FeatureSet, ActivateAllExamples) {
  const auto b3 = FeatureSet::base(3);
  auto names = [&](const FeatureSet& chi, const BaseBits& s) {
    std::string out;
    for (auto j : activate_all(chi, s)) out += chi[j].to_string();
    return out;
  };
  EXPECT_EQ(names(b3, BaseBits::from_list({1, 0, 1})), "{1}{3}");
  EXPECT_EQ(names(b3, BaseBits::from_list({0, 0, 0})), "{}");
  const auto chi = FeatureSet::base(2).with(Feature{1, 2});
  EXPECT_EQ(names(chi, BaseBits::from_list({1, 1})), "{1}{2}{1,2}");
}

TEST(FeatureSet, PairExamples) {
  EXPECT_EQ(pair(FeatureSet::base(2)).to_string(), "{1,2}");
  EXPECT_TRUE(pair(FeatureSet::base(1)).empty());
  EXPECT_EQ(pair(FeatureSet::singletons(3)).to_string(), "{1,2} {1,3} {2,3}");
}

TEST(FeatureSet, PairOfCompleteLatticeIsEmpty) {
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_TRUE(pair(FeatureSet::all(n)).empty());
}

TEST(FeatureSet, PairMembersAreNewUnions) {
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto chi = test::random_subset(FeatureSet::all(5), rng);
    const auto p = pair(chi);
    for (const auto& f : p) {
      EXPECT_FALSE(chi.contains(f));
      bool found = false;
      for (const auto& a : chi) {
        for (const auto& b : chi) found = found || a.unite(b) == f;
      }
      EXPECT_TRUE(found) << f.to_string();
    }
    // Every new union appears.
    for (const auto& a : chi) {
      for (const auto& b : chi) {
        const auto u = a.unite(b);
        if (!chi.contains(u)) EXPECT_TRUE(p.contains(u));
      }
    }
  }
}

TEST(FeatureSet, FullExamples) {
  for (std::size_t n = 0; n <= 10; ++n) {
    const auto f = full(FeatureSet::base(n));
    EXPECT_EQ(f.size(), std::size_t{1} << n);
    EXPECT_EQ(f, FeatureSet::all(n));
  }
  EXPECT_EQ(full(FeatureSet::singletons(3)).size(), 7u);
  EXPECT_FALSE(full(FeatureSet::singletons(3)).contains(Feature::null()));
}

TEST(FeatureSet, FullMatchesUnionClosureOnRandomSubsets) {
  Rng rng(41);
  for (int k = 0; k < 200; ++k) {
    const auto chi = test::random_subset(FeatureSet::all(4), rng);
    const auto closure = union_closure(chi);
    const auto f = full(chi);
    ASSERT_EQ(f.size(), closure.size()) << chi.to_string();
    for (const auto& g : f) EXPECT_TRUE(closure.count({g.indices().begin(), g.indices().end()}));
  }
}

TEST(FeatureSet, SizeGuards) {
  EXPECT_THROW(FeatureSet::all(25), SizeGuardError);
  EXPECT_THROW(full(FeatureSet::base(25)), SizeGuardError);
}

TEST(FeatureSet, NoDuplicatesAndCanonicalOrder) {
  FeatureSet chi(4);
  EXPECT_TRUE(chi.insert(Feature{2, 3}));
  EXPECT_TRUE(chi.insert(Feature{1}));
  EXPECT_TRUE(chi.insert(Feature::null()));
  EXPECT_FALSE(chi.insert(Feature{3, 2}));
  EXPECT_EQ(chi.to_string(), "{} {1} {2,3}");
  EXPECT_EQ(chi.index_of(Feature{2, 3}), 2u);
  EXPECT_FALSE(chi.index_of(Feature{4}).has_value());
  EXPECT_THROW(chi.insert(Feature{5}), DomainError);
}

TEST(FeatureSet, SerializeParseIsIdentity) {
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const auto chi = test::random_subset(FeatureSet::all(5), rng);
    EXPECT_EQ(FeatureSet::parse(chi.to_string(), 5), chi);
  }
  EXPECT_THROW(FeatureSet::parse("{1} {1}", 3), Error);
}

TEST(Coverage, ThreeComputerNetwork) {
  // Machine i owns bits 2i+1 (up) and 2i+2 (down).
  std::vector<BaseBits> states;
  for (std::uint64_t code = 0; code < 8; ++code) {
    MachineStatus st(3);
    for (std::size_t i = 0; i < 3; ++i) st[i] = (code >> i) & 1U;
    states.push_back(sysadmin_encode(st));
  }
  EXPECT_DOUBLE_EQ(coverage(Feature{2}, states), 0.5);
  EXPECT_DOUBLE_EQ(coverage(Feature{3, 6}, states), 0.25);
}

TEST(Coverage, NullFeatureWeighsOnlyTheAllZeroState) {
  const auto states = binary_states(3);
  std::vector<double> w{0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  EXPECT_DOUBLE_EQ(coverage(Feature::null(), states, w), 0.3);
  EXPECT_THROW(coverage(Feature::null(), states, std::vector<double>{1.0}), DimensionError);
}

TEST(PhiMatrix, Examples) {
  const auto s1 = binary_states(1);
  EXPECT_TRUE(build_phi_matrix(FeatureSet::all(1), s1).isIdentity());

  const auto phi = build_phi_matrix(FeatureSet::base(2), binary_states(2));
  Eigen::MatrixXd expected(4, 3);
  expected << 1, 0, 0,  //
      0, 1, 0,          //
      0, 0, 1,          //
      0, 1, 1;
  EXPECT_EQ(phi, expected);

  const auto phi3 = build_phi_matrix(FeatureSet::all(3), binary_states(3));
  IntMatrix rows(8, std::vector<std::int64_t>(8));
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) rows[i][j] = static_cast<std::int64_t>(phi3(i, j));
  }
  EXPECT_EQ(exact_rank(rows), 8u);
}

TEST(Discretize, BoundsAndOneHot) {
  const std::vector<double> lows{-1.2, -0.07};
  const std::vector<double> highs{0.6, 0.07};
  const auto lo = discretize(std::vector<double>{-1.2, -0.07}, lows, highs, 20);
  EXPECT_EQ(lo.size(), 40u);
  EXPECT_TRUE(lo.test(1));
  EXPECT_TRUE(lo.test(21));
  const auto hi = discretize(std::vector<double>{0.6, 0.07}, lows, highs, 20);
  EXPECT_TRUE(hi.test(20));
  EXPECT_TRUE(hi.test(40));
  const auto out_of_range = discretize(std::vector<double>{5.0, -3.0}, lows, highs, 20);
  EXPECT_TRUE(out_of_range.test(20));
  EXPECT_TRUE(out_of_range.test(21));

  Rng rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const auto b = discretize(std::vector<double>{u(rng), u(rng)}, lows, highs, 20);
    EXPECT_EQ(b.count(), 2u);
  }
}

TEST(Discretize, Errors) {
  const std::vector<double> lows{0.0};
  const std::vector<double> highs{1.0};
  EXPECT_THROW(discretize(std::vector<double>{std::nan("")}, lows, highs, 4), DomainError);
  EXPECT_THROW(discretize(std::vector<double>{0.5}, lows, highs, 0), DomainError);
  EXPECT_THROW(discretize(std::vector<double>{0.5, 0.5}, lows, highs, 4), DimensionError);
  EXPECT_THROW(discretize(std::vector<double>{0.5}, highs, lows, 4), DomainError);
}

TEST(BaseBits, CodesAndStrings) {
  const auto b = BaseBits::from_code(0b101, 3);
  EXPECT_EQ(b, BaseBits::from_list({1, 0, 1}));
  EXPECT_EQ(b.to_string(), "101");
  EXPECT_THROW(b.test(0), DomainError);
  EXPECT_THROW(b.test(4), DomainError);
  EXPECT_EQ(binary_states(3)[6], BaseBits::from_list({0, 1, 1}));
}

}  // namespace
