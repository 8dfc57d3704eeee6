#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fdd/features.hpp"
#include "fdd/rng.hpp"

namespace fdd {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Markov chain induced by a fixed policy, with expected per-state rewards.
/// P is row-stochastic; gamma is in [0, 1).
class EnumeratedMdp {
 public:
  /// `state_bits` may be empty; otherwise one BaseBits per state, all of equal width.
  EnumeratedMdp(SparseMatrix P, Vector R, double gamma, std::vector<BaseBits> state_bits = {});

  std::size_t num_states() const noexcept { return static_cast<std::size_t>(R_.size()); }
  const SparseMatrix& P() const noexcept { return P_; }
  const Vector& R() const noexcept { return R_; }
  double gamma() const noexcept { return gamma_; }
  const std::vector<BaseBits>& state_bits() const noexcept { return state_bits_; }
  std::size_t num_base_features() const noexcept {
    return state_bits_.empty() ? 0 : state_bits_.front().size();
  }

  EnumeratedMdp with_gamma(double gamma) const;

 private:
  SparseMatrix P_;
  Vector R_;
  double gamma_;
  std::vector<BaseBits> state_bits_;
};

/// Stationary distribution of the policy chain.
struct SteadyStateDist {
  Vector d;
};

/// Successor of a sample with its transition probability.
struct Successor {
  BaseBits bits;
  double prob = 1.0;
};

/// One transition (s, r, s'). A Monte Carlo sample has a single successor with
/// probability one and unit weight; an expectation-model row carries the full
/// successor distribution of s and weight d(s). A terminal transition has no
/// successors, so phi(s') contributes zero.
struct Sample {
  BaseBits s_bits;
  double r = 0.0;
  std::vector<Successor> next;
  double weight = 1.0;

  static Sample transition(BaseBits s, double r, BaseBits sp, bool terminal);

  bool terminal() const noexcept { return next.empty(); }
};

using SampleSet = std::vector<Sample>;

/// Throws DimensionError if bit widths differ across the set.
void validate_samples(const SampleSet& samples);

/// Solves (I - gamma P) V = R.
Vector exact_value(const EnumeratedMdp& mdp);

/// R + gamma P V.
Vector bellman_apply(const EnumeratedMdp& mdp, const Vector& V);

/// T(V) - V.
Vector bellman_error(const EnumeratedMdp& mdp, const Vector& V);

struct SteadyStateOptions {
  std::size_t max_iterations = 1'000'000;
  double tolerance = 1e-12;
  double residual_tolerance = 1e-10;
};

/// Power iteration from the uniform vector. Throws ConvergenceError if
/// ||d'P - d'||_1 stays above the residual tolerance.
SteadyStateDist steady_state(const EnumeratedMdp& mdp, const SteadyStateOptions& options = {});

/// Visit frequencies of a simulated trajectory of `num_steps` steps started
/// from the uniform distribution.
SteadyStateDist empirical_distribution(const EnumeratedMdp& mdp, std::size_t num_steps, std::uint64_t seed);

double weighted_inner(const Vector& X, const Vector& Y, const SteadyStateDist& d);
double weighted_norm(const Vector& X, const SteadyStateDist& d);

/// Exact "sample set": one row per state with d(s) > 0, carrying the
/// expected reward R(s), the successor distribution P(s, .) and weight d(s).
/// Requires state_bits.
SampleSet expectation_samples(const EnumeratedMdp& mdp, const SteadyStateDist& d);

/// Active feature positions of s and the expected successor features for
/// every sample, relative to one FeatureSet.
struct EncodedSample {
  std::vector<std::size_t> active;
  std::vector<std::pair<std::size_t, double>> next;  // (position, expected activation), sorted
};

std::vector<EncodedSample> encode_samples(const SampleSet& samples, const FeatureSet& chi);

/// delta_i = r_i + [gamma phi(s'_i) - phi(s_i)]' theta.
std::vector<double> sample_td_errors(const SampleSet& samples, const Vector& theta,
                                     const FeatureSet& chi, double gamma);
std::vector<double> sample_td_errors(const std::vector<EncodedSample>& encoded, const SampleSet& samples,
                                     const Vector& theta, double gamma);

/// One TD(0) step: theta + alpha * delta * phi(s).
Vector td0_update(const Vector& theta, const Vector& phi_s, const Vector& phi_sp, double r, double gamma,
                  double alpha);

// ---------------------------------------------------------------------------
// Simulation

using State = std::vector<double>;

struct StepResult {
  State next;
  double reward = 0.0;
  bool terminal = false;
};

/// A benchmark environment together with its fixed evaluation policy.
class Domain {
 public:
  virtual ~Domain() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_base_features() const = 0;
  virtual double default_gamma() const = 0;
  virtual std::size_t horizon() const = 0;

  virtual State initial_state(Rng& rng) const = 0;
  virtual int policy(const State& s, Rng& rng) const = 0;
  virtual StepResult step(const State& s, int action, Rng& rng) const = 0;
  virtual BaseBits encode(const State& s) const = 0;

  /// Representation every method starts from.
  virtual FeatureSet initial_features() const = 0;
  /// Groups of base indices of which at most one can be set in any state.
  /// Conjunctions within a group are never active.
  virtual std::vector<std::vector<Index>> exclusive_groups() const { return {}; }
  /// Full model, for domains small enough to enumerate.
  virtual std::shared_ptr<const EnumeratedMdp> enumerated() const { return nullptr; }
};

using Policy = std::function<int(const State&, Rng&)>;

/// Collects exactly `num_samples` transitions following `policy`, restarting
/// from the initial distribution on termination or at the horizon.
SampleSet simulate(const Domain& domain, const Policy& policy, std::size_t num_samples, std::uint64_t seed);
/// Same, using the domain's own fixed policy.
SampleSet simulate(const Domain& domain, std::size_t num_samples, std::uint64_t seed);

}  // namespace fdd
