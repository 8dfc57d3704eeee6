#pragma once

// Numerical checks of the error-bound-reduction results for conjunctive
// features on enumerable MDPs, and exact rank checks of feature matrices.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fdd/features.hpp"
#include "fdd/mdp.hpp"
#include "fdd/rng.hpp"

namespace fdd {

/// Acute angle between the lines spanned by X and Y under the d-weighted
/// inner product, in [0, pi/2]. Throws DomainError for a zero vector.
double angle(const Vector& X, const Vector& Y, const SteadyStateDist& d);

/// Guaranteed fractional reduction 1 - gamma cos(beta) - sqrt(1 - gamma^2) sin(beta).
/// Defined for 0 <= beta < arccos(gamma).
double zeta(double gamma, double beta);

/// The same rate written in terms of eta = cos(beta); defined for gamma < eta <= 1.
double zeta_from_eta(double gamma, double eta);

/// |sum_{f active} d(s) delta(s)| / sqrt(sum_{f active} d(s) * sum_s d(s) delta(s)^2).
double eta(const Feature& f, std::span<const BaseBits> states, const SteadyStateDist& d, const Vector& delta);

using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// Rank over GF(p) for a prime p < 2^62. Never exceeds the rational rank.
std::size_t modular_rank(const IntMatrix& rows, std::uint64_t prime);
/// Rank over the rationals by fraction-free (Bareiss) elimination in
/// arbitrary-precision integers.
std::size_t exact_rank(const IntMatrix& rows);

/// True iff Phi_chi over all 2^n binary states has rank |chi|. Exact: a full
/// rank mod p is a certificate; anything less is settled by exact_rank().
bool verify_rank(const FeatureSet& chi, std::size_t n);

struct BoundCheckReport {
  double x = 0.0;         // ||V - Pi V||_d
  double x_after = 0.0;   // ||V - Pi' V||_d with phi_f appended
  double x_line = 0.0;    // min over xi of ||V - (Pi V + xi phi_f)||_d, by scalar search
  double xi_closed = 0.0;
  double xi_search = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double zeta = 0.0;      // from eta; only set when admissible
  bool admissible = false;
  /// Empty when the bound makes no claim (inadmissible angle or x == 0).
  std::optional<bool> satisfied;
  double margin = 0.0;       // (x - x_after) - zeta x
  double margin_line = 0.0;  // (x - x_line) - zeta x
  bool line_search_agrees = false;
};

inline constexpr double kBoundTolerance = 1e-9;

/// Projects the exact value onto span(Phi_chi), forms the Bellman error of
/// the projection, and measures the reduction obtained by appending f.
/// `d` defaults to the steady state of `mdp`.
BoundCheckReport verify_bound_reduction(const EnumeratedMdp& mdp, const FeatureSet& chi, const Feature& f,
                                        const std::optional<SteadyStateDist>& d = std::nullopt);

/// Random chain over the 2^d binary encodings: rows drawn from a sparse
/// Dirichlet(0.2), standard normal rewards. Used to stress the bound checks
/// beyond BitChain.
EnumeratedMdp random_chain(std::size_t d, double gamma, Rng& rng);

struct BoundSweep {
  std::size_t candidates = 0;
  std::size_t admissible = 0;
  std::size_t violations = 0;            // admissible with margin < -tolerance
  std::size_t monotonicity_violations = 0;  // x_after > x + 1e-12
  std::size_t line_search_mismatches = 0;
  double worst_margin = 0.0;             // minimum margin over admissible candidates
  double worst_monotonicity = 0.0;       // maximum of x_after - x
};

/// verify_bound_reduction over every f in pair(chi).
BoundSweep sweep_bound_reduction(const EnumeratedMdp& mdp, const FeatureSet& chi,
                                 const std::optional<SteadyStateDist>& d = std::nullopt);

}  // namespace fdd
