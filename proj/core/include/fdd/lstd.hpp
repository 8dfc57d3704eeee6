#pragma once

#include <cstddef>
#include <span>

#include "fdd/features.hpp"
#include "fdd/mdp.hpp"

namespace fdd {

/// Ridge added to the LSTD A matrix unless a caller asks otherwise.
inline constexpr double kDefaultLstdReg = 1e-6;

struct LstdSolution {
  Vector theta;
  double reg = kDefaultLstdReg;
  std::size_t num_samples = 0;
};

/// Solves (A + reg I) theta = b with
///   A = sum_i w_i phi(s_i) (phi(s_i) - gamma E[phi(s'_i)])'
///   b = sum_i w_i phi(s_i) r_i.
/// With reg == 0 a rank-deficient A raises SingularError.
LstdSolution lstd_fit(const SampleSet& samples, const FeatureSet& chi, double gamma, double reg = kDefaultLstdReg);
LstdSolution lstd_fit(const std::vector<EncodedSample>& encoded, const SampleSet& samples, std::size_t num_features,
                      double gamma, double reg = kDefaultLstdReg);

/// sqrt(sum_i w_i delta_i^2); with unit weights this is the plain l2 norm of
/// the per-sample TD errors.
double td_error_norm(const SampleSet& samples, const LstdSolution& solution, const FeatureSet& chi, double gamma);
double td_error_norm(const SampleSet& samples, std::span<const double> deltas);

/// d-weighted least-squares projection of V onto span(Phi_chi).
Vector weighted_projection(const Vector& V, const FeatureSet& chi, std::span<const BaseBits> states,
                           const SteadyStateDist& d);
/// Same, for an explicit basis matrix (columns need not be binary).
Vector weighted_projection(const Vector& V, const Eigen::MatrixXd& phi, const SteadyStateDist& d);

}  // namespace fdd
