#include "fdd/discovery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "fdd/error.hpp"

namespace fdd {

namespace {

struct Accum {
  double sum_wd = 0.0;
  double sum_w = 0.0;
  double sum_w_absd = 0.0;
  std::size_t count = 0;
};

void require_deltas(const SampleSet& samples, std::span<const double> deltas) {
  if (samples.size() != deltas.size()) throw DimensionError("deltas must have one entry per sample");
}

Accum accumulate_column(const Feature& f, const SampleSet& samples, std::span<const double> deltas) {
  require_deltas(samples, deltas);
  Accum acc;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!f.active(samples[i].s_bits)) continue;
    const double w = samples[i].weight;
    acc.sum_wd += w * deltas[i];
    acc.sum_w += w;
    acc.sum_w_absd += w * std::abs(deltas[i]);
    ++acc.count;
  }
  return acc;
}

// Accumulates, in sample order, the statistics of every member of pair(chi)
// that is active in some sample. A union f ∪ g of nonempty parents is active
// exactly where both parents are, so enumerating co-active pairs per sample
// visits each active candidate once per sample after deduplication.
std::vector<std::pair<Feature, Accum>> accumulate_pair_candidates(const FeatureSet& chi, const SampleSet& samples,
                                                                  const std::vector<EncodedSample>& encoded,
                                                                  std::span<const double> deltas) {
  std::unordered_map<Feature, Accum, FeatureHash> table;
  std::vector<Feature> unions;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& active = encoded[i].active;
    unions.clear();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        Feature u = chi[active[a]].unite(chi[active[b]]);
        if (!chi.contains(u)) unions.push_back(std::move(u));
      }
    }
    if (unions.empty()) continue;
    std::sort(unions.begin(), unions.end());
    unions.erase(std::unique(unions.begin(), unions.end()), unions.end());
    const double w = samples[i].weight;
    const double delta = deltas.empty() ? 0.0 : deltas[i];
    for (auto& u : unions) {
      Accum& acc = table[std::move(u)];
      acc.sum_wd += w * delta;
      acc.sum_w += w;
      acc.sum_w_absd += w * std::abs(delta);
      ++acc.count;
    }
  }
  std::vector<std::pair<Feature, Accum>> out(std::make_move_iterator(table.begin()),
                                             std::make_move_iterator(table.end()));
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

double normalized(double sum, double mass) { return mass > 0.0 ? std::abs(sum) / std::sqrt(mass) : 0.0; }

Vector state_values(const EnumeratedMdp& mdp, const FeatureSet& chi, const Vector& theta) {
  return build_phi_matrix(chi, mdp.state_bits()) * theta;
}

}  // namespace

// ---------------------------------------------------------------------------

DiscoveryMethod DiscoveryMethod::ifdd_icml11() {
  DiscoveryMethod m;
  m.kind = MethodKind::ifdd_icml11;
  return m;
}

DiscoveryMethod DiscoveryMethod::omp_td(FeatureSet pool) {
  DiscoveryMethod m;
  m.kind = MethodKind::omp_td;
  m.pool = std::move(pool);
  return m;
}

DiscoveryMethod DiscoveryMethod::exact_eq2(std::shared_ptr<const EnumeratedMdp> mdp, SteadyStateDist d) {
  if (!mdp) throw DomainError("exact_eq2 needs an enumerated model");
  if (mdp->state_bits().empty()) throw DomainError("exact_eq2 needs state encodings");
  DiscoveryMethod m;
  m.kind = MethodKind::exact_eq2;
  m.mdp = std::move(mdp);
  m.d = std::move(d);
  return m;
}

std::string DiscoveryMethod::label() const {
  switch (kind) {
    case MethodKind::ifdd_plus:
      return "ifdd+";
    case MethodKind::ifdd_icml11:
      return "ifdd-icml11";
    case MethodKind::omp_td:
      return "omptd(" + std::to_string(pool.size()) + ")";
    case MethodKind::exact_eq2:
      return "exact-eq2";
  }
  return "unknown";
}

FeatureSet generate_candidates(const FeatureSet& chi, const SampleSet& samples) {
  validate_samples(samples);
  const auto encoded = encode_samples(samples, chi);
  std::vector<Feature> out;
  for (auto& [f, acc] : accumulate_pair_candidates(chi, samples, encoded, {})) out.push_back(f);
  return FeatureSet(chi.n(), std::move(out));
}

double score_ifdd_plus(const Feature& f, const SampleSet& samples, std::span<const double> deltas) {
  const Accum acc = accumulate_column(f, samples, deltas);
  return normalized(acc.sum_wd, acc.sum_w);
}

double score_ifdd_icml11(const Feature& f, const SampleSet& samples, std::span<const double> deltas) {
  return accumulate_column(f, samples, deltas).sum_w_absd;
}

double score_omptd(const Feature& f, const SampleSet& samples, std::span<const double> deltas) {
  require_deltas(samples, deltas);
  double inner = 0.0;
  double sq_norm = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double phi = f.active(samples[i].s_bits) ? 1.0 : 0.0;
    if (phi == 0.0) continue;
    const double w = samples[i].weight;
    inner += w * phi * deltas[i];
    sq_norm += w * phi * phi;
  }
  return normalized(inner, sq_norm);
}

Eq2Score score_exact_eq2(const Feature& f, std::span<const BaseBits> states, const SteadyStateDist& d,
                         const Vector& delta, double gamma) {
  if (states.size() != static_cast<std::size_t>(d.d.size()) || delta.size() != d.d.size()) {
    throw DimensionError("score_exact_eq2: states, d and delta must agree on |S|");
  }
  double num = 0.0;
  double mass = 0.0;
  double delta_sq = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto k = static_cast<Eigen::Index>(s);
    delta_sq += d.d[k] * delta[k] * delta[k];
    if (f.active(states[s])) {
      num += d.d[k] * delta[k];
      mass += d.d[k];
    }
  }
  if (!(mass > 0.0)) throw DomainError("score_exact_eq2: feature " + f.to_string() + " has zero-weight support");
  Eq2Score out;
  out.score = std::abs(num) / std::sqrt(mass);
  out.eta = delta_sq > 0.0 ? out.score / std::sqrt(delta_sq) : 0.0;
  out.admissible = delta_sq > 0.0 && out.eta > gamma;
  return out;
}

std::vector<Candidate> score_candidates(const DiscoveryMethod& method, const FeatureSet& chi,
                                        const SampleSet& samples, const std::vector<EncodedSample>& encoded,
                                        std::span<const double> deltas, const Vector& theta, double gamma) {
  require_deltas(samples, deltas);
  std::vector<Candidate> out;
  switch (method.kind) {
    case MethodKind::ifdd_plus:
    case MethodKind::ifdd_icml11: {
      for (auto& [f, acc] : accumulate_pair_candidates(chi, samples, encoded, deltas)) {
        Candidate c;
        c.feature = f;
        c.active_count = acc.count;
        c.score = method.kind == MethodKind::ifdd_plus ? normalized(acc.sum_wd, acc.sum_w) : acc.sum_w_absd;
        out.push_back(std::move(c));
      }
      break;
    }
    case MethodKind::omp_td: {
      for (const auto& f : method.pool) {
        if (chi.contains(f)) continue;
        double inner = 0.0;
        double sq_norm = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          if (!f.active_unchecked(samples[i].s_bits)) continue;
          const double w = samples[i].weight;
          inner += w * deltas[i];
          sq_norm += w;
          ++count;
        }
        Candidate c;
        c.feature = f;
        c.active_count = count;
        c.score = normalized(inner, sq_norm);
        // All-zero columns stay in the list (they were evaluated) but can never win.
        c.admissible = count > 0;
        out.push_back(std::move(c));
      }
      break;
    }
    case MethodKind::exact_eq2: {
      const auto& mdp = *method.mdp;
      const Vector delta = bellman_error(mdp, state_values(mdp, chi, theta));
      const auto rows = expectation_samples(mdp, method.d);
      for (const auto& f : generate_candidates(chi, rows)) {
        const Eq2Score sc = score_exact_eq2(f, mdp.state_bits(), method.d, delta, gamma);
        Candidate c;
        c.feature = f;
        c.score = sc.score;
        c.eta = sc.eta;
        c.admissible = sc.admissible;
        c.active_count = static_cast<std::size_t>(std::count_if(
            mdp.state_bits().begin(), mdp.state_bits().end(), [&f](const BaseBits& s) { return f.active(s); }));
        out.push_back(std::move(c));
      }
      break;
    }
  }
  return out;
}

std::optional<Candidate> select_best(std::span<const Candidate> candidates) {
  const Candidate* best = nullptr;
  for (const auto& c : candidates) {
    if (!c.admissible) continue;
    if (best == nullptr || c.score > best->score || (c.score == best->score && c.feature < best->feature)) {
      best = &c;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

ExpansionResult expand_step(const ExpansionState& state) {
  if (!state.samples || state.samples->empty()) throw DomainError("expand_step needs samples");
  const SampleSet& samples = *state.samples;
  const auto start = std::chrono::steady_clock::now();

  const auto encoded = encode_samples(samples, state.chi);
  LstdSolution solution = state.solution && static_cast<std::size_t>(state.solution->theta.size()) == state.chi.size()
                              ? *state.solution
                              : lstd_fit(encoded, samples, state.chi.size(), state.gamma, state.reg);
  const auto deltas = sample_td_errors(encoded, samples, solution.theta, state.gamma);
  const auto candidates =
      score_candidates(state.method, state.chi, samples, encoded, deltas, solution.theta, state.gamma);
  const auto best = select_best(candidates);

  ExpansionResult out;
  out.record.candidates_scored = candidates.size();
  if (!best) {
    out.chi = state.chi;
    out.solution = std::move(solution);
    out.record.saturated = true;
    out.record.td_error_l2 = td_error_norm(samples, deltas);
  } else {
    out.chi = state.chi.with(best->feature);
    out.record.added = best->feature;
    const auto encoded_next = encode_samples(samples, out.chi);
    out.solution = lstd_fit(encoded_next, samples, out.chi.size(), state.gamma, state.reg);
    const auto deltas_next = sample_td_errors(encoded_next, samples, out.solution.theta, state.gamma);
    out.record.td_error_l2 = td_error_norm(samples, deltas_next);
  }
  out.record.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

FeatureSet build_pool(std::size_t n, const FeatureSet& initial, std::size_t cap,
                      const std::vector<std::vector<Index>>& exclusive_groups) {
  if (cap < initial.size()) throw DomainError("build_pool: cap is smaller than the initial representation");
  if (initial.n() != n) throw DimensionError("build_pool: initial set is over a different n");

  std::vector<long> group_of(n + 1, -1);
  for (std::size_t g = 0; g < exclusive_groups.size(); ++g) {
    for (Index i : exclusive_groups[g]) {
      if (i == 0 || i > n) throw DomainError("build_pool: group index out of range");
      group_of[i] = static_cast<long>(g);
    }
  }

  constexpr std::size_t kMaxPool = 5'000'000;
  FeatureSet pool = initial;
  std::vector<Index> combo;
  std::vector<char> used_group(exclusive_groups.size(), 0);

  for (std::size_t k = 2; k <= n && pool.size() < cap; ++k) {
    bool level_nonempty = false;
    // Depth-first over increasing indices visits k-combinations in lexicographic order.
    std::function<void(Index)> extend = [&](Index from) {
      if (pool.size() >= cap) return;
      if (combo.size() == k) {
        level_nonempty = true;
        if (pool.insert(Feature(combo)) && pool.size() > kMaxPool) {
          throw SizeGuardError("build_pool: pool exceeds " + std::to_string(kMaxPool) + " features");
        }
        return;
      }
      for (Index i = from; i <= n; ++i) {
        if (n - i + 1 < k - combo.size()) return;
        const long g = group_of[i];
        if (g >= 0 && used_group[static_cast<std::size_t>(g)]) continue;
        if (g >= 0) used_group[static_cast<std::size_t>(g)] = 1;
        combo.push_back(i);
        extend(i + 1);
        combo.pop_back();
        if (g >= 0) used_group[static_cast<std::size_t>(g)] = 0;
        if (pool.size() >= cap) return;
      }
    };
    extend(1);
    if (!level_nonempty) break;
  }
  return pool;
}

}  // namespace fdd
