#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fdd/domains.hpp"
#include "fdd/harness.hpp"
#include "fdd/lstd.hpp"
#include "fdd/rng.hpp"
#include "fdd/theory.hpp"

namespace fdd {

namespace {

FeatureSet random_subset(const FeatureSet& universe, const FeatureSet& always, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  FeatureSet out = always;
  for (const auto& f : universe) {
    if (!out.contains(f) && coin(rng)) out.insert(f);
  }
  return out;
}

TheoryCheckRow check_rank(const TheoryCheckOptions& opt, Rng& rng) {
  TheoryCheckRow row{"rank of random subsets of F_n", 0, 0, 0.0, "rank deficit"};
  for (std::size_t n = 1; n <= opt.max_n; ++n) {
    const auto all = FeatureSet::all(n);
    for (std::size_t k = 0; k < opt.rank_samples; ++k) {
      ++row.cases;
      if (!verify_rank(random_subset(all, FeatureSet(n), rng), n)) ++row.failures;
    }
  }
  for (std::size_t n = 1; n <= std::max<std::size_t>(opt.max_n, 8); ++n) {
    ++row.cases;
    if (!verify_rank(FeatureSet::all(n), n)) ++row.failures;
  }
  row.worst = static_cast<double>(row.failures);
  return row;
}

TheoryCheckRow check_full_exact(const TheoryCheckOptions& opt) {
  TheoryCheckRow row{"F_n represents V exactly (reg 0)", 0, 0, 0.0, "max |Phi theta - V|"};
  for (std::size_t d = 1; d <= std::min<std::size_t>(opt.max_n, 6); ++d) {
    BitChainParams p;
    p.d = d;
    p.gamma = opt.gamma;
    const auto mdp = bitchain_build(p);
    const auto dist = steady_state(mdp);
    const auto chi = FeatureSet::all(d);
    const auto sol = lstd_fit(expectation_samples(mdp, dist), chi, opt.gamma, 0.0);
    const Vector approx = build_phi_matrix(chi, mdp.state_bits()) * sol.theta;
    const double err = (approx - exact_value(mdp)).cwiseAbs().maxCoeff();
    ++row.cases;
    if (!(err <= 1e-8)) ++row.failures;
    row.worst = std::max(row.worst, err);
  }
  return row;
}

// Instance 0 uses the default chain; later ones draw rewards and flip rates.
BitChainParams random_bitchain(std::size_t d, double gamma, std::size_t instance, Rng& rng) {
  BitChainParams p;
  p.d = d;
  p.gamma = gamma;
  p.flip_down_prob = 0.3;
  if (instance == 0) return p;
  std::uniform_real_distribution<double> rate(0.05, 0.95);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  p.flip_prob = rate(rng);
  p.flip_down_prob = rate(rng);
  for (std::size_t i = 0; i < d; ++i) p.reward_weights.push_back(weight(rng));
  p.interaction = 4.0 * weight(rng);
  return p;
}

struct BoundRows {
  TheoryCheckRow bound{"bound reduction, admissible pairs", 0, 0, 0.0, "worst margin"};
  TheoryCheckRow mono{"error never grows when adding a pair", 0, 0, 0.0, "max growth"};
  TheoryCheckRow line{"line search matches closed form", 0, 0, 0.0, "mismatches"};
  bool any_admissible = false;
  bool any_candidate = false;

  void add(const EnumeratedMdp& mdp, const FeatureSet& chi) {
    const auto sweep = sweep_bound_reduction(mdp, chi, steady_state(mdp));
    bound.cases += sweep.admissible;
    bound.failures += sweep.violations;
    if (sweep.admissible > 0) {
      bound.worst = any_admissible ? std::min(bound.worst, sweep.worst_margin) : sweep.worst_margin;
      any_admissible = true;
    }
    mono.cases += sweep.candidates;
    mono.failures += sweep.monotonicity_violations;
    line.cases += sweep.candidates;
    line.failures += sweep.line_search_mismatches;
    if (sweep.candidates > 0) {
      mono.worst = any_candidate ? std::max(mono.worst, sweep.worst_monotonicity) : sweep.worst_monotonicity;
      any_candidate = true;
    }
  }
};

void check_bounds(const TheoryCheckOptions& opt, Rng& rng, BoundRows& rows) {
  for (std::size_t d = 2; d <= opt.max_n; ++d) {
    const auto all = FeatureSet::all(d);
    const auto base = FeatureSet::base(d);
    for (std::size_t k = 0; k < opt.bound_instances; ++k) {
      const auto mdp = bitchain_build(random_bitchain(d, opt.gamma, k, rng));
      rows.add(mdp, k == 0 ? base : random_subset(all, base, rng));
      // Dense random chains reach eta > gamma far more often than BitChain.
      if (d <= 3) rows.add(random_chain(d, opt.gamma, rng), random_subset(all, base, rng));
    }
  }
  rows.line.worst = static_cast<double>(rows.line.failures);
}

TheoryCheckRow check_eta_angle(const TheoryCheckOptions& opt, Rng& rng) {
  TheoryCheckRow row{"eta equals cos(angle)", 0, 0, 0.0, "max |eta - cos beta|"};
  std::uniform_int_distribution<std::size_t> pick_n(1, std::max<std::size_t>(opt.max_n, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t k = 0; k < opt.eta_instances; ++k) {
    const std::size_t n = pick_n(rng);
    const auto states = binary_states(n);
    const auto m = static_cast<Eigen::Index>(states.size());
    SteadyStateDist d{Vector(m)};
    Vector delta(m);
    for (Eigen::Index s = 0; s < m; ++s) {
      d.d[s] = 0.05 + unit(rng);
      delta[s] = gauss(rng);
    }
    d.d /= d.d.sum();
    std::vector<Index> idx;
    for (Index i = 1; i <= static_cast<Index>(n); ++i) {
      if (unit(rng) < 0.5) idx.push_back(i);
    }
    const Feature f(idx);
    Vector phi(m);
    for (Eigen::Index s = 0; s < m; ++s) phi[s] = f.active(states[static_cast<std::size_t>(s)]) ? 1.0 : 0.0;
    const double diff = std::abs(eta(f, states, d, delta) - std::cos(angle(phi, delta, d)));
    ++row.cases;
    if (!(diff <= 1e-12)) ++row.failures;
    row.worst = std::max(row.worst, diff);
  }
  return row;
}

TheoryCheckRow check_zeta(const TheoryCheckOptions& opt) {
  TheoryCheckRow row{"zeta endpoints and monotonicity", 0, 0, 0.0, "max |zeta| near arccos(gamma)"};
  std::vector<double> gammas{0.0, 0.5, 0.9, opt.gamma};
  for (double g : gammas) {
    ++row.cases;
    if (zeta(g, 0.0) != 1.0 - g) ++row.failures;

    const double top = std::acos(g);
    const double edge = zeta(g, top * (1.0 - 1e-12));
    ++row.cases;
    if (!(std::abs(edge) <= 1e-9)) ++row.failures;
    row.worst = std::max(row.worst, std::abs(edge));

    constexpr int kGrid = 1000;
    double prev = zeta(g, 0.0);
    bool strict = true;
    for (int i = 1; i < kGrid; ++i) {
      const double z = zeta(g, top * i / kGrid);
      strict = strict && z < prev;
      prev = z;
    }
    ++row.cases;
    if (!strict) ++row.failures;
  }
  return row;
}

}  // namespace

std::vector<TheoryCheckRow> run_theory_checks(const TheoryCheckOptions& opt) {
  Rng rng(opt.seed);
  std::vector<TheoryCheckRow> rows;
  rows.push_back(check_zeta(opt));
  rows.push_back(check_eta_angle(opt, rng));
  rows.push_back(check_rank(opt, rng));
  rows.push_back(check_full_exact(opt));
  BoundRows bounds;
  check_bounds(opt, rng, bounds);
  rows.push_back(bounds.bound);
  rows.push_back(bounds.mono);
  rows.push_back(bounds.line);
  return rows;
}

void print_theory_table(std::ostream& out, const std::vector<TheoryCheckRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-40s %8s %8s  %-6s %s\n", "check", "cases", "failed", "result", "worst");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-40s %8zu %8zu  %-6s %.3e (%s)\n", r.name.c_str(), r.cases, r.failures,
                  r.passed() ? "PASS" : "FAIL", r.worst, r.worst_label.c_str());
    out << buf;
  }
}

}  // namespace fdd
