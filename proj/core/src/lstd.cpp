#include "fdd/lstd.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/QR>

#include "fdd/error.hpp"

namespace fdd {

LstdSolution lstd_fit(const std::vector<EncodedSample>& encoded, const SampleSet& samples, std::size_t num_features,
                      double gamma, double reg) {
  if (samples.empty()) throw DomainError("lstd_fit needs at least one sample");
  if (!(reg >= 0.0)) throw DomainError("lstd_fit: reg must be >= 0");
  if (encoded.size() != samples.size()) throw DimensionError("encoded rows do not match samples");

  const auto k = static_cast<Eigen::Index>(num_features);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
  Vector b = Vector::Zero(k);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = samples[i].weight;
    const auto& row = encoded[i];
    for (std::size_t a : row.active) {
      const auto ja = static_cast<Eigen::Index>(a);
      for (std::size_t c : row.active) A(ja, static_cast<Eigen::Index>(c)) += w;
      for (const auto& [c, p] : row.next) A(ja, static_cast<Eigen::Index>(c)) -= w * gamma * p;
      b[ja] += w * samples[i].r;
    }
  }

  LstdSolution sol;
  sol.reg = reg;
  sol.num_samples = samples.size();
  if (reg > 0.0) {
    A.diagonal().array() += reg;
    sol.theta = A.partialPivLu().solve(b);
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < k) {
      throw SingularError("lstd_fit: A has rank " + std::to_string(lu.rank()) + " < " + std::to_string(k) +
                              " (rank deficiency " + std::to_string(k - lu.rank()) + ") with reg = 0",
                          static_cast<std::size_t>(lu.rank()), num_features);
    }
    sol.theta = lu.solve(b);
  }
  if (!sol.theta.allFinite()) throw NumericalError("lstd_fit: non-finite weights");
  return sol;
}

LstdSolution lstd_fit(const SampleSet& samples, const FeatureSet& chi, double gamma, double reg) {
  validate_samples(samples);
  return lstd_fit(encode_samples(samples, chi), samples, chi.size(), gamma, reg);
}

double td_error_norm(const SampleSet& samples, std::span<const double> deltas) {
  if (samples.size() != deltas.size()) throw DimensionError("td_error_norm: deltas do not match samples");
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) acc += samples[i].weight * deltas[i] * deltas[i];
  return std::sqrt(acc);
}

double td_error_norm(const SampleSet& samples, const LstdSolution& solution, const FeatureSet& chi, double gamma) {
  const auto deltas = sample_td_errors(samples, solution.theta, chi, gamma);
  return td_error_norm(samples, deltas);
}

Vector weighted_projection(const Vector& V, const Eigen::MatrixXd& phi, const SteadyStateDist& d) {
  if (phi.rows() != V.size() || d.d.size() != V.size()) {
    throw DimensionError("weighted_projection: V, Phi and d must agree on |S|");
  }
  const Vector sqrt_d = d.d.array().sqrt();
  const Eigen::MatrixXd weighted = sqrt_d.asDiagonal() * phi;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weighted);
  if (qr.rank() < phi.cols()) {
    throw SingularError("weighted_projection: Phi has weighted rank " + std::to_string(qr.rank()) + " < " +
                            std::to_string(phi.cols()),
                        static_cast<std::size_t>(qr.rank()), static_cast<std::size_t>(phi.cols()));
  }
  const Vector theta = qr.solve(Vector(sqrt_d.cwiseProduct(V)));
  return phi * theta;
}

Vector weighted_projection(const Vector& V, const FeatureSet& chi, std::span<const BaseBits> states,
                           const SteadyStateDist& d) {
  if (states.size() != static_cast<std::size_t>(V.size())) {
    throw DimensionError("weighted_projection: one state per entry of V expected");
  }
  return weighted_projection(V, build_phi_matrix(chi, states), d);
}

}  // namespace fdd
