#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdd/features.hpp"
#include "fdd/lstd.hpp"
#include "fdd/mdp.hpp"

namespace fdd {

enum class MethodKind {
  ifdd_plus,    // |sum delta| / sqrt(count) over pair(chi)
  ifdd_icml11,  // sum |delta| over pair(chi)
  omp_td,       // normalized residual correlation over a fixed pool
  exact_eq2,    // exact d-weighted criterion with the eta > gamma filter
};

/// Feature-expansion criterion plus whatever it needs besides the samples.
struct DiscoveryMethod {
  MethodKind kind = MethodKind::ifdd_plus;
  FeatureSet pool;                           // omp_td: fixed for the whole run
  std::shared_ptr<const EnumeratedMdp> mdp;  // exact_eq2
  SteadyStateDist d;                         // exact_eq2

  static DiscoveryMethod ifdd_plus() { return {}; }
  static DiscoveryMethod ifdd_icml11();
  static DiscoveryMethod omp_td(FeatureSet pool);
  static DiscoveryMethod exact_eq2(std::shared_ptr<const EnumeratedMdp> mdp, SteadyStateDist d);

  /// "ifdd+", "ifdd-icml11", "omptd(<pool size>)", "exact-eq2".
  std::string label() const;
};

struct Candidate {
  Feature feature;
  double score = 0.0;
  std::size_t active_count = 0;
  bool admissible = true;  // only meaningful for exact_eq2
  double eta = 0.0;        // exact_eq2 only
};

/// Members of pair(chi) active in at least one sample, canonically ordered.
FeatureSet generate_candidates(const FeatureSet& chi, const SampleSet& samples);

/// |sum of w_i delta_i over samples where f is active| / sqrt(sum of w_i there).
/// Returns 0 when f is never active.
double score_ifdd_plus(const Feature& f, const SampleSet& samples, std::span<const double> deltas);
/// sum of w_i |delta_i| over samples where f is active.
double score_ifdd_icml11(const Feature& f, const SampleSet& samples, std::span<const double> deltas);
/// |<phi_f, delta>| / ||phi_f|| with the empirical (sample-weighted) inner product.
/// Returns 0 for an all-zero column.
double score_omptd(const Feature& f, const SampleSet& samples, std::span<const double> deltas);

struct Eq2Score {
  double score = 0.0;
  double eta = 0.0;
  bool admissible = false;
};

/// Exact criterion over enumerated states. Throws DomainError when f has no
/// positive-weight support.
Eq2Score score_exact_eq2(const Feature& f, std::span<const BaseBits> states, const SteadyStateDist& d,
                         const Vector& delta, double gamma);

/// Scores every candidate the method considers. `encoded` must be
/// encode_samples(samples, chi); `theta` is needed by exact_eq2 only.
std::vector<Candidate> score_candidates(const DiscoveryMethod& method, const FeatureSet& chi,
                                        const SampleSet& samples, const std::vector<EncodedSample>& encoded,
                                        std::span<const double> deltas, const Vector& theta, double gamma);

/// Highest score among admissible candidates; ties go to the canonically
/// smallest feature (fewest terms, then lexicographic).
std::optional<Candidate> select_best(std::span<const Candidate> candidates);

struct ExpansionState {
  FeatureSet chi;
  std::shared_ptr<const SampleSet> samples;
  DiscoveryMethod method;
  double gamma = 0.95;
  double reg = kDefaultLstdReg;
  /// Fit on `chi` from the previous step, if available.
  std::optional<LstdSolution> solution;
};

struct ExpansionRecord {
  std::optional<Feature> added;
  std::size_t candidates_scored = 0;
  double td_error_l2 = 0.0;
  double wall_ms = 0.0;
  bool saturated = false;
};

struct ExpansionResult {
  FeatureSet chi;
  LstdSolution solution;
  ExpansionRecord record;
};

/// Fit, score, append the best candidate, refit. With no (admissible)
/// candidate the representation is returned unchanged and flagged saturated.
ExpansionResult expand_step(const ExpansionState& state);

/// Initial features, then every valid 2-term conjunction, then 3-term, and so
/// on, each level in lexicographic order, truncated once `cap` features are
/// collected. A conjunction is valid when no two of its indices share an
/// exclusive group.
FeatureSet build_pool(std::size_t n, const FeatureSet& initial, std::size_t cap,
                      const std::vector<std::vector<Index>>& exclusive_groups = {});

}  // namespace fdd
