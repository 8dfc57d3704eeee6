#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdd/discovery.hpp"
#include "fdd/mdp.hpp"

namespace fdd {

/// One expansion method of an experiment. For omp_td, pool_size 0 means the
/// complete pool of valid conjunctions.
struct MethodSpec {
  MethodKind kind = MethodKind::ifdd_plus;
  std::size_t pool_size = 0;

  /// Accepts "ifdd+", "ifdd-icml11", "omptd", "omptd:<size>", "exact-eq2".
  static MethodSpec parse(std::string_view token);
  /// Comma separated list of tokens.
  static std::vector<MethodSpec> parse_list(std::string_view text);
  std::string token() const;
};

struct ExperimentConfig {
  std::string domain = "mountain-car";
  /// Domain parameters, by config key (bins, machines, topology, d, ...).
  std::map<std::string, std::string> domain_params;
  std::vector<MethodSpec> methods{MethodSpec{}};
  std::size_t iterations = 30;
  std::size_t samples = 10'000;
  std::size_t runs = 30;
  std::optional<double> gamma;  // domain default when unset
  double reg = kDefaultLstdReg;
  std::uint64_t seed = 1;
  /// Enumerable domains only: replace sampling by the exact d-weighted model.
  bool expectation_model = false;
  std::string out;
  std::size_t threads = 0;  // 0: FDD_THREADS or hardware concurrency

  void validate() const;
};

/// Flat `key = value` text; '#' starts a comment. Throws ConfigError.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> load_key_values(const std::string& path);
/// Applies entries on top of `base`; later calls win, so flags go last.
ExperimentConfig apply_config(ExperimentConfig base, const std::map<std::string, std::string>& entries);

std::unique_ptr<Domain> make_domain(const std::string& name, const std::map<std::string, std::string>& params);

struct ExperimentRecord {
  std::size_t run_id = 0;
  std::string method;
  std::size_t iteration = 0;
  std::size_t num_features = 0;
  double td_error_l2 = 0.0;
  double wall_ms = 0.0;  // cumulative time inside expand_step
  std::size_t candidates_scored = 0;
  std::optional<Feature> feature_added;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

/// Header used by write_records_csv.
inline constexpr std::string_view kRecordCsvHeader =
    "run_id,method,iteration,num_features,td_error_l2,wall_ms,candidates_scored,feature_added";

/// Every run draws its own sample set from derive_seed(seed, run_id), shared
/// by all methods of that run. Records come back ordered by run, method and
/// iteration. An expansion that finds no candidate ends that method's run.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config);

struct SummaryRow {
  std::string method;
  std::size_t iteration = 0;
  std::size_t runs = 0;
  double mean_td_error = 0.0;
  std::optional<double> ci_half_width;  // needs at least two runs
  double mean_wall_ms = 0.0;
  double mean_features = 0.0;
};

/// Per (method, iteration): mean error, normal-approximation CI half-width
/// z * s / sqrt(runs), and mean wall-clock. Rows ordered by method label
/// first appearance, then iteration.
std::vector<SummaryRow> aggregate(const std::vector<ExperimentRecord>& records, double confidence = 0.95);

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Worker count: explicit value, else FDD_THREADS, else hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

// ---------------------------------------------------------------------------
// theory-check

struct TheoryCheckOptions {
  std::size_t max_n = 4;
  double gamma = 0.9;
  std::uint64_t seed = 7;
  std::size_t rank_samples = 200;
  std::size_t bound_instances = 50;
  std::size_t eta_instances = 1000;
};

struct TheoryCheckRow {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  std::string worst_label;  // what `worst` measures
  // A row that never found a case to check does not pass.
  bool passed() const noexcept { return failures == 0 && cases > 0; }
};

std::vector<TheoryCheckRow> run_theory_checks(const TheoryCheckOptions& options);
void print_theory_table(std::ostream& out, const std::vector<TheoryCheckRow>& rows);

}  // namespace fdd
