#include "fdd/mdp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "fdd/error.hpp"

namespace fdd {

namespace {

void require_size(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
  }
}

std::size_t draw_successor(const SparseMatrix& P, std::size_t s, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  std::size_t last = s;
  for (SparseMatrix::InnerIterator it(P, static_cast<Eigen::Index>(s)); it; ++it) {
    if (it.value() <= 0.0) continue;
    acc += it.value();
    last = static_cast<std::size_t>(it.col());
    if (u < acc) return last;
  }
  return last;
}

}  // namespace

EnumeratedMdp::EnumeratedMdp(SparseMatrix P, Vector R, double gamma, std::vector<BaseBits> state_bits)
    : P_(std::move(P)), R_(std::move(R)), gamma_(gamma), state_bits_(std::move(state_bits)) {
  const auto n = static_cast<std::size_t>(R_.size());
  if (n == 0) throw DomainError("EnumeratedMdp needs at least one state");
  if (static_cast<std::size_t>(P_.rows()) != n || static_cast<std::size_t>(P_.cols()) != n) {
    throw DimensionError("transition matrix must be |S| x |S|");
  }
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw DomainError("gamma must lie in [0, 1)");
  P_.makeCompressed();
  for (Eigen::Index s = 0; s < P_.outerSize(); ++s) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(P_, s); it; ++it) {
      if (it.value() < 0.0 || it.value() > 1.0) throw DomainError("transition probability outside [0, 1]");
      row += it.value();
    }
    if (std::abs(row - 1.0) > 1e-12) {
      throw DomainError("row " + std::to_string(s) + " of P sums to " + std::to_string(row));
    }
  }
  if (!state_bits_.empty()) {
    if (state_bits_.size() != n) throw DimensionError("state_bits must have one entry per state");
    const auto width = state_bits_.front().size();
    for (const auto& b : state_bits_) {
      if (b.size() != width) throw DimensionError("state_bits widths differ");
    }
  }
}

EnumeratedMdp EnumeratedMdp::with_gamma(double gamma) const {
  return EnumeratedMdp(P_, R_, gamma, state_bits_);
}

Sample Sample::transition(BaseBits s, double r, BaseBits sp, bool terminal) {
  Sample out;
  out.s_bits = std::move(s);
  out.r = r;
  if (!terminal) out.next.push_back(Successor{std::move(sp), 1.0});
  return out;
}

void validate_samples(const SampleSet& samples) {
  if (samples.empty()) return;
  const auto width = samples.front().s_bits.size();
  for (const auto& smp : samples) {
    if (smp.s_bits.size() != width) throw DimensionError("sample bit vectors differ in length");
    for (const auto& nx : smp.next) {
      if (nx.bits.size() != width) throw DimensionError("successor bit vectors differ in length");
    }
  }
}

Vector exact_value(const EnumeratedMdp& mdp) {
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  Eigen::SparseMatrix<double> A(n, n);
  A.setIdentity();
  A -= mdp.gamma() * Eigen::SparseMatrix<double>(mdp.P());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw NumericalError("exact_value: factorization of (I - gamma P) failed");
  Vector V = lu.solve(mdp.R());
  if (lu.info() != Eigen::Success || !V.allFinite()) throw NumericalError("exact_value: solve failed");
  return V;
}

Vector bellman_apply(const EnumeratedMdp& mdp, const Vector& V) {
  require_size(V, mdp.num_states(), "bellman_apply");
  return mdp.R() + mdp.gamma() * (mdp.P() * V);
}

Vector bellman_error(const EnumeratedMdp& mdp, const Vector& V) { return bellman_apply(mdp, V) - V; }

SteadyStateDist steady_state(const EnumeratedMdp& mdp, const SteadyStateOptions& options) {
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  const Eigen::SparseMatrix<double> Pt = Eigen::SparseMatrix<double>(mdp.P()).transpose();
  Vector d = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double change = 0.0;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    Vector next = Pt * d;
    next /= next.sum();
    change = (next - d).lpNorm<1>();
    d = std::move(next);
    if (change < options.tolerance) break;
  }
  const double residual = (Pt * d - d).lpNorm<1>();
  if (!(residual < options.residual_tolerance)) {
    throw ConvergenceError("steady_state: power iteration did not converge (residual " +
                               std::to_string(residual) + ")",
                           residual);
  }
  return SteadyStateDist{std::move(d)};
}

SteadyStateDist empirical_distribution(const EnumeratedMdp& mdp, std::size_t num_steps, std::uint64_t seed) {
  if (num_steps == 0) throw DomainError("empirical_distribution needs at least one step");
  Rng rng(seed);
  const auto n = mdp.num_states();
  std::uniform_int_distribution<std::size_t> start(0, n - 1);
  std::vector<double> counts(n, 0.0);
  std::size_t s = start(rng);
  for (std::size_t t = 0; t < num_steps; ++t) {
    counts[s] += 1.0;
    s = draw_successor(mdp.P(), s, rng);
  }
  Vector d(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) d[static_cast<Eigen::Index>(k)] = counts[k] / static_cast<double>(num_steps);
  return SteadyStateDist{std::move(d)};
}

double weighted_inner(const Vector& X, const Vector& Y, const SteadyStateDist& d) {
  if (X.size() != Y.size() || X.size() != d.d.size()) {
    throw DimensionError("weighted_inner: length mismatch");
  }
  return (d.d.array() * X.array() * Y.array()).sum();
}

double weighted_norm(const Vector& X, const SteadyStateDist& d) { return std::sqrt(weighted_inner(X, X, d)); }

SampleSet expectation_samples(const EnumeratedMdp& mdp, const SteadyStateDist& d) {
  const auto& bits = mdp.state_bits();
  if (bits.empty()) throw DomainError("expectation_samples requires state encodings");
  require_size(d.d, mdp.num_states(), "expectation_samples");
  SampleSet out;
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    const double w = d.d[static_cast<Eigen::Index>(s)];
    if (w <= 0.0) continue;
    Sample smp;
    smp.s_bits = bits[s];
    smp.r = mdp.R()[static_cast<Eigen::Index>(s)];
    smp.weight = w;
    for (SparseMatrix::InnerIterator it(mdp.P(), static_cast<Eigen::Index>(s)); it; ++it) {
      if (it.value() > 0.0) smp.next.push_back(Successor{bits[static_cast<std::size_t>(it.col())], it.value()});
    }
    out.push_back(std::move(smp));
  }
  return out;
}

std::vector<EncodedSample> encode_samples(const SampleSet& samples, const FeatureSet& chi) {
  std::vector<EncodedSample> out(samples.size());
  std::vector<double> acc(chi.size(), 0.0);
  std::vector<std::size_t> touched;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& smp = samples[i];
    out[i].active = activate_all(chi, smp.s_bits);
    touched.clear();
    for (const auto& nx : smp.next) {
      for (std::size_t j : activate_all(chi, nx.bits)) {
        if (acc[j] == 0.0) touched.push_back(j);
        acc[j] += nx.prob;
      }
    }
    std::sort(touched.begin(), touched.end());
    out[i].next.reserve(touched.size());
    for (std::size_t j : touched) {
      out[i].next.emplace_back(j, acc[j]);
      acc[j] = 0.0;
    }
  }
  return out;
}

std::vector<double> sample_td_errors(const std::vector<EncodedSample>& encoded, const SampleSet& samples,
                                     const Vector& theta, double gamma) {
  if (encoded.size() != samples.size()) throw DimensionError("encoded rows do not match samples");
  std::vector<double> deltas(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double v_s = 0.0;
    for (std::size_t j : encoded[i].active) v_s += theta[static_cast<Eigen::Index>(j)];
    double v_sp = 0.0;
    for (const auto& [j, p] : encoded[i].next) v_sp += p * theta[static_cast<Eigen::Index>(j)];
    deltas[i] = samples[i].r + gamma * v_sp - v_s;
  }
  return deltas;
}

std::vector<double> sample_td_errors(const SampleSet& samples, const Vector& theta, const FeatureSet& chi,
                                     double gamma) {
  require_size(theta, chi.size(), "sample_td_errors");
  return sample_td_errors(encode_samples(samples, chi), samples, theta, gamma);
}

Vector td0_update(const Vector& theta, const Vector& phi_s, const Vector& phi_sp, double r, double gamma,
                  double alpha) {
  if (phi_s.size() != theta.size() || phi_sp.size() != theta.size()) {
    throw DimensionError("td0_update: feature vectors must match theta");
  }
  if (!(alpha > 0.0)) throw DomainError("td0_update: alpha must be positive");
  const double delta = r + gamma * theta.dot(phi_sp) - theta.dot(phi_s);
  return theta + alpha * delta * phi_s;
}

SampleSet simulate(const Domain& domain, const Policy& policy, std::size_t num_samples, std::uint64_t seed) {
  SampleSet out;
  out.reserve(num_samples);
  if (num_samples == 0) return out;
  Rng rng(seed);
  State s = domain.initial_state(rng);
  std::size_t steps = 0;
  while (out.size() < num_samples) {
    const int a = policy(s, rng);
    StepResult res = domain.step(s, a, rng);
    out.push_back(Sample::transition(domain.encode(s), res.reward, domain.encode(res.next), res.terminal));
    ++steps;
    if (res.terminal || steps >= domain.horizon()) {
      s = domain.initial_state(rng);
      steps = 0;
    } else {
      s = std::move(res.next);
    }
  }
  return out;
}

SampleSet simulate(const Domain& domain, std::size_t num_samples, std::uint64_t seed) {
  return simulate(
      domain, [&domain](const State& s, Rng& rng) { return domain.policy(s, rng); }, num_samples, seed);
}

}  // namespace fdd
