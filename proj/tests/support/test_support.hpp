#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "fdd/features.hpp"
#include "fdd/mdp.hpp"
#include "fdd/rng.hpp"

namespace fdd::test {

// Each member of `universe` joins `always` with probability 1/2.
inline FeatureSet random_subset(const FeatureSet& universe, const FeatureSet& always, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  FeatureSet out = always;
  for (const auto& f : universe) {
    if (!out.contains(f) && coin(rng)) out.insert(f);
  }
  return out;
}

inline FeatureSet random_subset(const FeatureSet& universe, Rng& rng) {
  return random_subset(universe, FeatureSet(universe.n()), rng);
}

// Value iteration to a fixed point; independent of the sparse solve.
inline Vector value_iteration(const EnumeratedMdp& mdp, double tol = 1e-13) {
  Vector V = Vector::Zero(static_cast<Eigen::Index>(mdp.num_states()));
  for (int it = 0; it < 100000; ++it) {
    Vector next = mdp.R() + mdp.gamma() * (mdp.P() * V);
    const double diff = (next - V).cwiseAbs().maxCoeff();
    V = std::move(next);
    if (diff < tol) break;
  }
  return V;
}

inline EnumeratedMdp make_mdp(const Eigen::MatrixXd& P, const Vector& R, double gamma,
                              std::vector<BaseBits> bits = {}) {
  return EnumeratedMdp(SparseMatrix(P.sparseView()), R, gamma, std::move(bits));
}

// Two states that swap every step; state k is encoded as the 1-bit value k.
inline EnumeratedMdp swap_chain(double gamma = 0.5) {
  Eigen::MatrixXd P(2, 2);
  P << 0, 1, 1, 0;
  Vector R(2);
  R << 1, 0;
  return make_mdp(P, R, gamma, binary_states(1));
}

}  // namespace fdd::test
