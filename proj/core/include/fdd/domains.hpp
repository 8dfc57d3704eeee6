#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fdd/features.hpp"
#include "fdd/mdp.hpp"
#include "fdd/rng.hpp"

namespace fdd {

/// Static description of a benchmark environment.
struct DomainSpec {
  std::string name;
  std::string state_description;
  std::vector<int> actions;
  std::string policy;
  double default_gamma = 0.95;
  std::size_t bins_per_dim = 0;  // continuous domains only
  std::size_t horizon = 500;
  std::size_t num_base_features = 0;
};

// ---------------------------------------------------------------------------
// Mountain Car

struct MountainCarStep {
  double x = 0.0;
  double v = 0.0;
  double reward = -1.0;
  bool terminal = false;
};

/// Classic dynamics; a in {-1, 0, +1}. The rng is not consumed.
MountainCarStep mountain_car_step(double x, double v, int a, Rng& rng);
/// Accelerate in the direction of the current velocity; zero velocity counts as positive.
int mountain_car_policy(double v);

struct MountainCarParams {
  std::size_t bins_per_dim = 20;
  double init_x_low = -0.6;
  double init_x_high = -0.4;
  std::size_t horizon = 500;
  double gamma = 0.95;
};

class MountainCarDomain final : public Domain {
 public:
  static constexpr double kMinX = -1.2;
  static constexpr double kMaxX = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalX = 0.5;

  explicit MountainCarDomain(MountainCarParams params = {});

  const DomainSpec& spec() const noexcept { return spec_; }
  std::string name() const override { return spec_.name; }
  std::size_t num_base_features() const override { return spec_.num_base_features; }
  double default_gamma() const override { return params_.gamma; }
  std::size_t horizon() const override { return params_.horizon; }
  State initial_state(Rng& rng) const override;
  int policy(const State& s, Rng& rng) const override;
  StepResult step(const State& s, int action, Rng& rng) const override;
  BaseBits encode(const State& s) const override;
  FeatureSet initial_features() const override;
  std::vector<std::vector<Index>> exclusive_groups() const override;

 private:
  MountainCarParams params_;
  DomainSpec spec_;
};

// ---------------------------------------------------------------------------
// Inverted Pendulum

struct PendulumParams {
  double gravity = 9.8;
  double pole_mass = 2.0;
  double cart_mass = 8.0;
  double length = 0.5;
  double dt = 0.1;
  double force = 50.0;
  double noise = 10.0;  // force noise drawn uniformly from [-noise, noise]
  std::size_t bins_per_dim = 20;
  double max_thdot = 3.0;  // discretization range of the angular velocity
  double init_range = 0.2;
  std::size_t horizon = 500;
  double gamma = 0.95;
};

struct PendulumStep {
  double th = 0.0;
  double thdot = 0.0;
  double reward = 0.0;
  bool terminal = false;
};

/// Euler step of the cart-pole model; a in {-force, 0, +force} newtons.
PendulumStep pendulum_step(double th, double thdot, double a, Rng& rng, const PendulumParams& params = {});
/// Force whose effect on the pole opposes its angular velocity; 0 when at rest.
double pendulum_policy(double thdot, const PendulumParams& params = {});

class PendulumDomain final : public Domain {
 public:
  explicit PendulumDomain(PendulumParams params = {});

  const DomainSpec& spec() const noexcept { return spec_; }
  const PendulumParams& params() const noexcept { return params_; }
  std::string name() const override { return spec_.name; }
  std::size_t num_base_features() const override { return spec_.num_base_features; }
  double default_gamma() const override { return params_.gamma; }
  std::size_t horizon() const override { return params_.horizon; }
  State initial_state(Rng& rng) const override;
  int policy(const State& s, Rng& rng) const override;
  StepResult step(const State& s, int action, Rng& rng) const override;
  BaseBits encode(const State& s) const override;
  FeatureSet initial_features() const override;
  std::vector<std::vector<Index>> exclusive_groups() const override;

 private:
  PendulumParams params_;
  DomainSpec spec_;
};

// ---------------------------------------------------------------------------
// System Administrator

using Edge = std::pair<std::size_t, std::size_t>;

enum class Topology { ring, star, edge_list };

struct SysAdminParams {
  std::size_t machines = 20;
  Topology topology = Topology::ring;
  std::vector<Edge> edges;  // Topology::edge_list only, 0-indexed, undirected
  double base_up = 0.95;
  double neighbor_penalty = 0.3;
  std::size_t horizon = 500;
  double gamma = 0.95;
};

/// Undirected edge list, one `i j` pair per line, 0-indexed. '#' starts a comment.
std::vector<Edge> load_edge_list(const std::string& path);
std::vector<Edge> parse_edge_list(const std::string& text);

/// Adjacency lists for the configured topology.
std::vector<std::vector<std::size_t>> sysadmin_neighbors(const SysAdminParams& params);

using MachineStatus = std::vector<std::uint8_t>;  // 1 = up

struct SysAdminStep {
  MachineStatus status;
  double reward = 0.0;
  bool terminal = false;
};

/// action = machine index to reboot, or -1 for no action. Reward is the
/// fraction of machines up before the transition.
SysAdminStep sysadmin_step(const MachineStatus& status, int action, Rng& rng, const SysAdminParams& params,
                           const std::vector<std::vector<std::size_t>>& neighbors);
SysAdminStep sysadmin_step(const MachineStatus& status, int action, Rng& rng, const SysAdminParams& params = {});

/// Uniformly random down machine, or -1 when every machine is up.
int sysadmin_policy(const MachineStatus& status, Rng& rng);

/// Machine i (0-based) owns index 2i+1 (up) and 2i+2 (down).
BaseBits sysadmin_encode(const MachineStatus& status);

/// Exact policy chain for n <= 12 machines; state code bit i = machine i up.
EnumeratedMdp sysadmin_enumerate(const SysAdminParams& params);

class SysAdminDomain final : public Domain {
 public:
  explicit SysAdminDomain(SysAdminParams params = {});

  const DomainSpec& spec() const noexcept { return spec_; }
  const SysAdminParams& params() const noexcept { return params_; }
  std::string name() const override { return spec_.name; }
  std::size_t num_base_features() const override { return spec_.num_base_features; }
  double default_gamma() const override { return params_.gamma; }
  std::size_t horizon() const override { return params_.horizon; }
  State initial_state(Rng& rng) const override;
  int policy(const State& s, Rng& rng) const override;
  StepResult step(const State& s, int action, Rng& rng) const override;
  BaseBits encode(const State& s) const override;
  FeatureSet initial_features() const override;
  std::vector<std::vector<Index>> exclusive_groups() const override;
  /// Built on every call; null for more than 12 machines.
  std::shared_ptr<const EnumeratedMdp> enumerated() const override;

 private:
  SysAdminParams params_;
  std::vector<std::vector<std::size_t>> neighbors_;
  DomainSpec spec_;
};

// ---------------------------------------------------------------------------
// BitChain: enumerable oracle MDP over d binary coordinates.

struct BitChainParams {
  std::size_t d = 3;
  double flip_prob = 0.5;       // a chosen 0-bit turns on with this probability
  double flip_down_prob = -1.0; // a chosen 1-bit turns off; negative means flip_prob
  std::vector<double> reward_weights;  // empty: w_i = 1/i
  double interaction = 1.0;     // w_12 * bit_1 * bit_2
  double gamma = 0.9;
};

/// Each step one uniformly chosen bit flips with the configured probability.
/// R(s) = sum_i w_i bit_i + w_12 bit_1 bit_2; state code c has bit i = (c >> (i-1)) & 1.
EnumeratedMdp bitchain_build(const BitChainParams& params);
EnumeratedMdp bitchain_build(std::size_t d, double flip_prob, std::vector<double> reward_weights,
                             double gamma = 0.9);

/// Simulator over an explicit chain: uniform initial state, reward R(s).
class EnumeratedDomain final : public Domain {
 public:
  EnumeratedDomain(std::string name, std::shared_ptr<const EnumeratedMdp> mdp, std::size_t horizon = 500);

  const EnumeratedMdp& mdp() const noexcept { return *mdp_; }
  std::string name() const override { return name_; }
  std::size_t num_base_features() const override { return mdp_->num_base_features(); }
  double default_gamma() const override { return mdp_->gamma(); }
  std::size_t horizon() const override { return horizon_; }
  State initial_state(Rng& rng) const override;
  int policy(const State& s, Rng& rng) const override;
  StepResult step(const State& s, int action, Rng& rng) const override;
  BaseBits encode(const State& s) const override;
  /// B_n: the all-zero state is reachable, so the null feature is kept.
  FeatureSet initial_features() const override;
  std::shared_ptr<const EnumeratedMdp> enumerated() const override { return mdp_; }

 private:
  std::string name_;
  std::shared_ptr<const EnumeratedMdp> mdp_;
  std::size_t horizon_;
};

/// Short descriptions of the built-in domains, for `fdd list-domains`.
std::vector<DomainSpec> builtin_domains();

}  // namespace fdd
