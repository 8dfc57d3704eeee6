#include "fdd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/tools/minima.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "fdd/error.hpp"
#include "fdd/lstd.hpp"

namespace fdd {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>((static_cast<u128>(a) * b) % p);
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1;
  while (e) {
    if (e & 1U) r = mul_mod(r, a, p);
    a = mul_mod(a, a, p);
    e >>= 1U;
  }
  return r;
}

std::uint64_t to_residue(std::int64_t v, std::uint64_t p) {
  const auto m = static_cast<std::int64_t>(v % static_cast<std::int64_t>(p));
  return static_cast<std::uint64_t>(m < 0 ? m + static_cast<std::int64_t>(p) : m);
}

Vector column_of(const Feature& f, std::span<const BaseBits> states) {
  Vector col(static_cast<Eigen::Index>(states.size()));
  for (std::size_t s = 0; s < states.size(); ++s) col[static_cast<Eigen::Index>(s)] = f.active(states[s]) ? 1.0 : 0.0;
  return col;
}

}  // namespace

double angle(const Vector& X, const Vector& Y, const SteadyStateDist& d) {
  const double nx = weighted_norm(X, d);
  const double ny = weighted_norm(Y, d);
  if (!(nx > 0.0) || !(ny > 0.0)) throw DomainError("angle: zero vector under the weighted norm");
  const double c = std::clamp(std::abs(weighted_inner(X, Y, d)) / (nx * ny), 0.0, 1.0);
  return std::clamp(std::acos(c), 0.0, std::numbers::pi / 2);
}

double zeta(double gamma, double beta) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("zeta: gamma must lie in [0, 1)");
  if (!(beta >= 0.0 && beta < std::acos(gamma))) {
    throw DomainError("zeta: beta must lie in [0, arccos(gamma))");
  }
  return 1.0 - gamma * std::cos(beta) - std::sqrt(1.0 - gamma * gamma) * std::sin(beta);
}

double zeta_from_eta(double gamma, double eta_f) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("zeta_from_eta: gamma must lie in [0, 1)");
  if (!(eta_f > gamma && eta_f <= 1.0 + 1e-15)) throw DomainError("zeta_from_eta: eta must lie in (gamma, 1]");
  const double e = std::min(eta_f, 1.0);
  return 1.0 - gamma * e - std::sqrt(1.0 - gamma * gamma) * std::sqrt(1.0 - e * e);
}

double eta(const Feature& f, std::span<const BaseBits> states, const SteadyStateDist& d, const Vector& delta) {
  if (states.size() != static_cast<std::size_t>(d.d.size()) || delta.size() != d.d.size()) {
    throw DimensionError("eta: states, d and delta must agree on |S|");
  }
  double num = 0.0;
  double mass = 0.0;
  double delta_sq = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto k = static_cast<Eigen::Index>(s);
    delta_sq += d.d[k] * delta[k] * delta[k];
    if (f.active(states[s])) {
      num += d.d[k] * delta[k];
      mass += d.d[k];
    }
  }
  if (!(mass > 0.0) || !(delta_sq > 0.0)) throw DomainError("eta: degenerate support or zero Bellman error");
  return std::abs(num) / std::sqrt(mass * delta_sq);
}

std::size_t modular_rank(const IntMatrix& rows, std::uint64_t prime) {
  if (rows.empty()) return 0;
  const std::size_t m = rows.size();
  const std::size_t n = rows.front().size();
  std::vector<std::vector<std::uint64_t>> a(m, std::vector<std::uint64_t>(n));
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != n) throw DimensionError("modular_rank: ragged matrix");
    for (std::size_t j = 0; j < n; ++j) a[i][j] = to_residue(rows[i][j], prime);
  }
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n && rank < m; ++c) {
    std::size_t piv = rank;
    while (piv < m && a[piv][c] == 0) ++piv;
    if (piv == m) continue;
    std::swap(a[piv], a[rank]);
    const std::uint64_t inv = pow_mod(a[rank][c], prime - 2, prime);
    for (std::size_t j = c; j < n; ++j) a[rank][j] = mul_mod(a[rank][j], inv, prime);
    for (std::size_t i = rank + 1; i < m; ++i) {
      const std::uint64_t factor = a[i][c];
      if (factor == 0) continue;
      for (std::size_t j = c; j < n; ++j) {
        const std::uint64_t sub = mul_mod(factor, a[rank][j], prime);
        a[i][j] = a[i][j] >= sub ? a[i][j] - sub : a[i][j] + prime - sub;
      }
    }
    ++rank;
  }
  return rank;
}

std::size_t exact_rank(const IntMatrix& rows) {
  using boost::multiprecision::cpp_int;
  if (rows.empty()) return 0;
  const std::size_t m = rows.size();
  const std::size_t n = rows.front().size();
  std::vector<std::vector<cpp_int>> a(m, std::vector<cpp_int>(n));
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != n) throw DimensionError("exact_rank: ragged matrix");
    for (std::size_t j = 0; j < n; ++j) a[i][j] = rows[i][j];
  }
  cpp_int prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n && rank < m; ++c) {
    std::size_t piv = rank;
    while (piv < m && a[piv][c] == 0) ++piv;
    if (piv == m) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t i = rank + 1; i < m; ++i) {
      for (std::size_t j = c + 1; j < n; ++j) {
        a[i][j] = (a[rank][c] * a[i][j] - a[i][c] * a[rank][j]) / prev;
      }
      a[i][c] = 0;
    }
    prev = a[rank][c];
    ++rank;
  }
  return rank;
}

bool verify_rank(const FeatureSet& chi, std::size_t n) {
  if (n > 16) throw SizeGuardError("verify_rank limited to n <= 16; got " + std::to_string(n));
  if (chi.n() > n) throw DimensionError("verify_rank: FeatureSet uses more than n indices");
  const auto states = binary_states(n);
  if (chi.size() > states.size()) return false;
  IntMatrix rows(states.size(), std::vector<std::int64_t>(chi.size(), 0));
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (std::size_t j = 0; j < chi.size(); ++j) rows[s][j] = chi[j].active(states[s]) ? 1 : 0;
  }
  if (modular_rank(rows, kMersenne61) == chi.size()) return true;
  return exact_rank(rows) == chi.size();
}

BoundCheckReport verify_bound_reduction(const EnumeratedMdp& mdp, const FeatureSet& chi, const Feature& f,
                                        const std::optional<SteadyStateDist>& d_opt) {
  const auto& states = mdp.state_bits();
  if (states.empty()) throw DomainError("verify_bound_reduction requires state encodings");
  if (chi.contains(f)) throw DomainError("verify_bound_reduction: feature already in the representation");
  const SteadyStateDist d = d_opt ? *d_opt : steady_state(mdp);

  const Vector V = exact_value(mdp);
  const Eigen::MatrixXd phi = build_phi_matrix(chi, states);
  const Vector v_tilde = weighted_projection(V, phi, d);
  const Vector delta = bellman_error(mdp, v_tilde);
  const Vector phi_f = column_of(f, states);
  const Vector residual = V - v_tilde;

  BoundCheckReport rep;
  rep.x = weighted_norm(residual, d);

  Eigen::MatrixXd phi_ext(phi.rows(), phi.cols() + 1);
  phi_ext << phi, phi_f;
  rep.x_after = weighted_norm(V - weighted_projection(V, phi_ext, d), d);

  const double norm_phi = weighted_norm(phi_f, d);
  if (!(norm_phi > 0.0)) throw DomainError("verify_bound_reduction: feature has zero-weight support");

  // Closed form of the scalar fit, and an independent bracketed Brent search.
  rep.xi_closed = weighted_inner(residual, phi_f, d) / (norm_phi * norm_phi);
  const double bound = rep.x / norm_phi + 1.0;
  auto line_error = [&](double xi) { return weighted_norm(residual - xi * phi_f, d); };
  const auto [xi_min, err_min] = boost::math::tools::brent_find_minima(line_error, -bound, bound, 52);
  rep.xi_search = xi_min;
  rep.x_line = err_min;
  rep.line_search_agrees = std::abs(err_min - line_error(rep.xi_closed)) <= 1e-9 * (1.0 + rep.x) &&
                           std::abs(xi_min - rep.xi_closed) <= 1e-6 * (1.0 + std::abs(rep.xi_closed));

  const double delta_norm = weighted_norm(delta, d);
  if (!(delta_norm > 0.0) || !(rep.x > 0.0)) return rep;

  rep.beta = angle(phi_f, delta, d);
  rep.eta = eta(f, states, d, delta);
  rep.admissible = rep.eta > mdp.gamma();
  if (!rep.admissible) return rep;

  rep.zeta = zeta_from_eta(mdp.gamma(), rep.eta);
  rep.margin = (rep.x - rep.x_after) - rep.zeta * rep.x;
  rep.margin_line = (rep.x - rep.x_line) - rep.zeta * rep.x;
  rep.satisfied = rep.margin >= -kBoundTolerance && rep.margin_line >= -kBoundTolerance;
  return rep;
}

BoundSweep sweep_bound_reduction(const EnumeratedMdp& mdp, const FeatureSet& chi,
                                 const std::optional<SteadyStateDist>& d_opt) {
  const SteadyStateDist d = d_opt ? *d_opt : steady_state(mdp);
  BoundSweep sweep;
  bool first = true;
  for (const auto& f : pair(chi)) {
    const auto rep = verify_bound_reduction(mdp, chi, f, d);
    ++sweep.candidates;
    const double growth = rep.x_after - rep.x;
    sweep.worst_monotonicity = first ? growth : std::max(sweep.worst_monotonicity, growth);
    first = false;
    if (growth > 1e-12) ++sweep.monotonicity_violations;
    if (!rep.line_search_agrees) ++sweep.line_search_mismatches;
    if (rep.satisfied.has_value()) {
      sweep.worst_margin = sweep.admissible == 0 ? rep.margin : std::min(sweep.worst_margin, rep.margin);
      ++sweep.admissible;
      if (!*rep.satisfied) ++sweep.violations;
    }
  }
  return sweep;
}

EnumeratedMdp random_chain(std::size_t d, double gamma, Rng& rng) {
  if (d < 1 || d > 10) throw SizeGuardError("random_chain supports 1 <= d <= 10; got " + std::to_string(d));
  const std::size_t n = std::size_t{1} << d;
  std::gamma_distribution<double> concentration(0.2, 1.0);
  std::normal_distribution<double> reward(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> triplets;
  Vector R(static_cast<Eigen::Index>(n));
  std::vector<double> row(n);
  for (std::size_t s = 0; s < n; ++s) {
    double total = 0.0;
    for (auto& x : row) total += (x = concentration(rng));
    if (!(total > 0.0)) {
      row.assign(n, 0.0);
      row[s] = total = 1.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] > 0.0) triplets.emplace_back(static_cast<int>(s), static_cast<int>(j), row[j] / total);
    }
    R[static_cast<Eigen::Index>(s)] = reward(rng);
  }
  SparseMatrix P(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  P.setFromTriplets(triplets.begin(), triplets.end());
  return EnumeratedMdp(std::move(P), std::move(R), gamma, binary_states(d));
}

}  // namespace fdd
