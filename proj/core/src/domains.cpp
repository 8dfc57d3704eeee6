#include "fdd/domains.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fdd/error.hpp"

namespace fdd {

namespace {

std::vector<std::vector<Index>> one_hot_groups(std::size_t dims, std::size_t bins) {
  std::vector<std::vector<Index>> groups(dims);
  for (std::size_t k = 0; k < dims; ++k) {
    for (std::size_t b = 0; b < bins; ++b) groups[k].push_back(static_cast<Index>(k * bins + b + 1));
  }
  return groups;
}

std::size_t state_index(const State& s, std::size_t num_states) {
  if (s.size() != 1 || !(s[0] >= 0.0) || s[0] >= static_cast<double>(num_states)) {
    throw DomainError("enumerated state out of range");
  }
  return static_cast<std::size_t>(s[0]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Mountain Car

MountainCarStep mountain_car_step(double x, double v, int a, Rng& /*rng*/) {
  if (a < -1 || a > 1) throw DomainError("mountain car action must be -1, 0 or +1");
  MountainCarStep out;
  out.v = std::clamp(v + 0.001 * a - 0.0025 * std::cos(3.0 * x), -MountainCarDomain::kMaxSpeed,
                     MountainCarDomain::kMaxSpeed);
  out.x = std::clamp(x + out.v, MountainCarDomain::kMinX, MountainCarDomain::kMaxX);
  if (out.x <= MountainCarDomain::kMinX && out.v < 0.0) out.v = 0.0;
  out.reward = -1.0;
  out.terminal = out.x >= MountainCarDomain::kGoalX;
  return out;
}

int mountain_car_policy(double v) { return v >= 0.0 ? 1 : -1; }

MountainCarDomain::MountainCarDomain(MountainCarParams params) : params_(params) {
  if (params_.bins_per_dim < 1) throw DomainError("mountain car needs at least one bin per dimension");
  spec_.name = "mountain-car";
  spec_.state_description = "position in [-1.2, 0.6], velocity in [-0.07, 0.07]";
  spec_.actions = {-1, 0, 1};
  spec_.policy = "accelerate in the direction of the velocity";
  spec_.default_gamma = params_.gamma;
  spec_.bins_per_dim = params_.bins_per_dim;
  spec_.horizon = params_.horizon;
  spec_.num_base_features = 2 * params_.bins_per_dim;
}

State MountainCarDomain::initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> ux(params_.init_x_low, params_.init_x_high);
  return {ux(rng), 0.0};
}

int MountainCarDomain::policy(const State& s, Rng& /*rng*/) const { return mountain_car_policy(s.at(1)); }

StepResult MountainCarDomain::step(const State& s, int action, Rng& rng) const {
  const auto r = mountain_car_step(s.at(0), s.at(1), action, rng);
  return {{r.x, r.v}, r.reward, r.terminal};
}

BaseBits MountainCarDomain::encode(const State& s) const {
  static constexpr std::array<double, 2> lows{kMinX, -kMaxSpeed};
  static constexpr std::array<double, 2> highs{kMaxX, kMaxSpeed};
  return discretize(s, lows, highs, params_.bins_per_dim);
}

FeatureSet MountainCarDomain::initial_features() const { return FeatureSet::singletons(spec_.num_base_features); }

std::vector<std::vector<Index>> MountainCarDomain::exclusive_groups() const {
  return one_hot_groups(2, params_.bins_per_dim);
}

// ---------------------------------------------------------------------------
// Inverted Pendulum

PendulumStep pendulum_step(double th, double thdot, double a, Rng& rng, const PendulumParams& p) {
  double u = a;
  if (p.noise > 0.0) {
    std::uniform_real_distribution<double> noise(-p.noise, p.noise);
    u += noise(rng);
  }
  const double alpha = 1.0 / (p.pole_mass + p.cart_mass);
  const double c = std::cos(th);
  const double num = p.gravity * std::sin(th) - alpha * p.pole_mass * p.length * thdot * thdot * std::sin(2.0 * th) / 2.0 -
                     alpha * c * u;
  const double den = 4.0 * p.length / 3.0 - alpha * p.pole_mass * p.length * c * c;
  const double thddot = num / den;

  PendulumStep out;
  out.th = th + p.dt * thdot;
  out.thdot = thdot + p.dt * thddot;
  out.terminal = std::abs(out.th) > std::numbers::pi / 2;
  out.reward = out.terminal ? -1.0 : 0.0;
  return out;
}

double pendulum_policy(double thdot, const PendulumParams& p) {
  // A positive cart force lowers the angular acceleration while the pole is upright.
  if (thdot > 0.0) return p.force;
  if (thdot < 0.0) return -p.force;
  return 0.0;
}

PendulumDomain::PendulumDomain(PendulumParams params) : params_(params) {
  if (params_.bins_per_dim < 1) throw DomainError("pendulum needs at least one bin per dimension");
  spec_.name = "pendulum";
  spec_.state_description = "angle in [-pi/2, pi/2], angular velocity";
  spec_.actions = {-1, 0, 1};
  spec_.policy = "push against the angular velocity";
  spec_.default_gamma = params_.gamma;
  spec_.bins_per_dim = params_.bins_per_dim;
  spec_.horizon = params_.horizon;
  spec_.num_base_features = 2 * params_.bins_per_dim;
}

State PendulumDomain::initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> u(-params_.init_range, params_.init_range);
  const double th = u(rng);
  const double thdot = u(rng);
  return {th, thdot};
}

int PendulumDomain::policy(const State& s, Rng& /*rng*/) const {
  const double f = pendulum_policy(s.at(1), params_);
  return f > 0.0 ? 1 : (f < 0.0 ? -1 : 0);
}

StepResult PendulumDomain::step(const State& s, int action, Rng& rng) const {
  if (action < -1 || action > 1) throw DomainError("pendulum action must be -1, 0 or +1");
  const auto r = pendulum_step(s.at(0), s.at(1), action * params_.force, rng, params_);
  return {{r.th, r.thdot}, r.reward, r.terminal};
}

BaseBits PendulumDomain::encode(const State& s) const {
  const std::array<double, 2> lows{-std::numbers::pi / 2, -params_.max_thdot};
  const std::array<double, 2> highs{std::numbers::pi / 2, params_.max_thdot};
  return discretize(s, lows, highs, params_.bins_per_dim);
}

FeatureSet PendulumDomain::initial_features() const { return FeatureSet::singletons(spec_.num_base_features); }

std::vector<std::vector<Index>> PendulumDomain::exclusive_groups() const {
  return one_hot_groups(2, params_.bins_per_dim);
}

// ---------------------------------------------------------------------------
// BitChain

EnumeratedMdp bitchain_build(const BitChainParams& params) {
  const std::size_t d = params.d;
  if (d < 1 || d > 12) throw SizeGuardError("bitchain_build supports 1 <= d <= 12; got " + std::to_string(d));
  const double up = params.flip_prob;
  const double down = params.flip_down_prob < 0.0 ? params.flip_prob : params.flip_down_prob;
  if (!(up >= 0.0 && up <= 1.0) || !(down >= 0.0 && down <= 1.0)) {
    throw DomainError("bitchain flip probabilities must lie in [0, 1]");
  }
  std::vector<double> w = params.reward_weights;
  if (w.empty()) {
    for (std::size_t i = 1; i <= d; ++i) w.push_back(1.0 / static_cast<double>(i));
  }
  if (w.size() != d) throw DimensionError("bitchain reward_weights must have d entries");

  const std::size_t n = std::size_t{1} << d;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * (d + 1));
  Vector R(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    double stay = 1.0;
    double r = 0.0;
    for (std::size_t b = 0; b < d; ++b) {
      const bool on = (s >> b) & 1U;
      if (on) r += w[b];
      const double p = (on ? down : up) / static_cast<double>(d);
      if (p > 0.0) {
        triplets.emplace_back(static_cast<int>(s), static_cast<int>(s ^ (std::size_t{1} << b)), p);
        stay -= p;
      }
    }
    if (d >= 2 && (s & 1U) && (s & 2U)) r += params.interaction;
    if (stay > 0.0) triplets.emplace_back(static_cast<int>(s), static_cast<int>(s), stay);
    R[static_cast<Eigen::Index>(s)] = r;
  }
  SparseMatrix P(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  P.setFromTriplets(triplets.begin(), triplets.end());
  return EnumeratedMdp(std::move(P), std::move(R), params.gamma, binary_states(d));
}

EnumeratedMdp bitchain_build(std::size_t d, double flip_prob, std::vector<double> reward_weights, double gamma) {
  BitChainParams p;
  p.d = d;
  p.flip_prob = flip_prob;
  p.reward_weights = std::move(reward_weights);
  p.gamma = gamma;
  return bitchain_build(p);
}

// ---------------------------------------------------------------------------
// EnumeratedDomain

EnumeratedDomain::EnumeratedDomain(std::string name, std::shared_ptr<const EnumeratedMdp> mdp, std::size_t horizon)
    : name_(std::move(name)), mdp_(std::move(mdp)), horizon_(horizon) {
  if (!mdp_) throw DomainError("EnumeratedDomain needs a model");
  if (mdp_->state_bits().empty()) throw DomainError("EnumeratedDomain needs state encodings");
}

State EnumeratedDomain::initial_state(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> u(0, mdp_->num_states() - 1);
  return {static_cast<double>(u(rng))};
}

int EnumeratedDomain::policy(const State& /*s*/, Rng& /*rng*/) const { return 0; }

StepResult EnumeratedDomain::step(const State& s, int /*action*/, Rng& rng) const {
  const std::size_t k = state_index(s, mdp_->num_states());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  std::size_t next = k;
  for (SparseMatrix::InnerIterator it(mdp_->P(), static_cast<Eigen::Index>(k)); it; ++it) {
    if (it.value() <= 0.0) continue;
    acc += it.value();
    next = static_cast<std::size_t>(it.col());
    if (u < acc) break;
  }
  return {{static_cast<double>(next)}, mdp_->R()[static_cast<Eigen::Index>(k)], false};
}

BaseBits EnumeratedDomain::encode(const State& s) const {
  return mdp_->state_bits()[state_index(s, mdp_->num_states())];
}

FeatureSet EnumeratedDomain::initial_features() const { return FeatureSet::base(mdp_->num_base_features()); }

// ---------------------------------------------------------------------------

std::vector<DomainSpec> builtin_domains() {
  std::vector<DomainSpec> out;
  out.push_back(MountainCarDomain().spec());
  out.push_back(PendulumDomain().spec());
  out.push_back(SysAdminDomain().spec());
  DomainSpec bc;
  bc.name = "bitchain";
  bc.state_description = "d binary coordinates (d <= 12), enumerable";
  bc.actions = {0};
  bc.policy = "none (uncontrolled chain)";
  bc.default_gamma = BitChainParams{}.gamma;
  bc.horizon = 500;
  bc.num_base_features = BitChainParams{}.d;
  out.push_back(bc);
  return out;
}

}  // namespace fdd
