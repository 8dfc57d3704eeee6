#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fdd/domains.hpp"
#include "fdd/error.hpp"

namespace fdd {

namespace {

double stay_up_probability(const MachineStatus& status, std::size_t i, const SysAdminParams& params,
                           const std::vector<std::vector<std::size_t>>& neighbors) {
  const auto& nb = neighbors[i];
  if (nb.empty()) return std::clamp(params.base_up, 0.0, 1.0);
  const auto down = static_cast<double>(std::count_if(nb.begin(), nb.end(), [&](std::size_t j) { return !status[j]; }));
  return std::clamp(params.base_up - params.neighbor_penalty * down / static_cast<double>(nb.size()), 0.0, 1.0);
}

MachineStatus status_from_state(const State& s) {
  MachineStatus st(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) st[i] = s[i] != 0.0 ? 1 : 0;
  return st;
}

State state_from_status(const MachineStatus& st) { return State(st.begin(), st.end()); }

}  // namespace

std::vector<Edge> parse_edge_list(const std::string& text) {
  std::vector<Edge> edges;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    long a = 0;
    long b = 0;
    if (!(ls >> a)) continue;
    std::string rest;
    if (!(ls >> b) || (ls >> rest) || a < 0 || b < 0) {
      throw ConfigError("edge list line " + std::to_string(lineno) + ": expected two non-negative indices");
    }
    edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
  return edges;
}

std::vector<Edge> load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str());
}

std::vector<std::vector<std::size_t>> sysadmin_neighbors(const SysAdminParams& params) {
  const std::size_t n = params.machines;
  std::vector<std::set<std::size_t>> adj(n);
  auto link = [&](std::size_t a, std::size_t b) {
    if (a >= n || b >= n) throw ConfigError("edge references a machine outside [0, " + std::to_string(n) + ")");
    if (a == b) return;
    adj[a].insert(b);
    adj[b].insert(a);
  };
  switch (params.topology) {
    case Topology::ring:
      for (std::size_t i = 0; n > 1 && i < n; ++i) link(i, (i + 1) % n);
      break;
    case Topology::star:
      for (std::size_t i = 1; i < n; ++i) link(0, i);
      break;
    case Topology::edge_list:
      for (const auto& [a, b] : params.edges) link(a, b);
      break;
  }
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i].assign(adj[i].begin(), adj[i].end());
  return out;
}

SysAdminStep sysadmin_step(const MachineStatus& status, int action, Rng& rng, const SysAdminParams& params,
                           const std::vector<std::vector<std::size_t>>& neighbors) {
  const std::size_t n = status.size();
  if (n != params.machines || neighbors.size() != n) throw DimensionError("sysadmin_step: status size mismatch");
  if (action < -1 || action >= static_cast<int>(n)) {
    throw DomainError("sysadmin_step: invalid machine index " + std::to_string(action));
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SysAdminStep out;
  out.status.assign(n, 0);
  std::size_t up = 0;
  for (std::size_t i = 0; i < n; ++i) {
    up += status[i] ? 1 : 0;
    if (static_cast<int>(i) == action) {
      out.status[i] = 1;
    } else if (status[i]) {
      out.status[i] = unif(rng) < stay_up_probability(status, i, params, neighbors) ? 1 : 0;
    }
  }
  out.reward = static_cast<double>(up) / static_cast<double>(n);
  return out;
}

SysAdminStep sysadmin_step(const MachineStatus& status, int action, Rng& rng, const SysAdminParams& params) {
  return sysadmin_step(status, action, rng, params, sysadmin_neighbors(params));
}

int sysadmin_policy(const MachineStatus& status, Rng& rng) {
  std::vector<int> down;
  for (std::size_t i = 0; i < status.size(); ++i) {
    if (!status[i]) down.push_back(static_cast<int>(i));
  }
  if (down.empty()) return -1;
  std::uniform_int_distribution<std::size_t> pick(0, down.size() - 1);
  return down[pick(rng)];
}

BaseBits sysadmin_encode(const MachineStatus& status) {
  BaseBits bits(2 * status.size());
  for (std::size_t i = 0; i < status.size(); ++i) bits.set(static_cast<Index>(2 * i + (status[i] ? 1 : 2)));
  return bits;
}

EnumeratedMdp sysadmin_enumerate(const SysAdminParams& params) {
  const std::size_t n = params.machines;
  if (n < 1 || n > 12) throw SizeGuardError("sysadmin_enumerate supports 1..12 machines; got " + std::to_string(n));
  const auto neighbors = sysadmin_neighbors(params);
  const std::size_t num_states = std::size_t{1} << n;

  auto status_of = [n](std::size_t code) {
    MachineStatus st(n);
    for (std::size_t i = 0; i < n; ++i) st[i] = (code >> i) & 1U;
    return st;
  };

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> row(num_states, 0.0);
  std::vector<std::size_t> touched;
  Vector R(static_cast<Eigen::Index>(num_states));
  std::vector<BaseBits> bits;
  bits.reserve(num_states);

  for (std::size_t code = 0; code < num_states; ++code) {
    const MachineStatus st = status_of(code);
    bits.push_back(sysadmin_encode(st));
    std::vector<int> actions;
    for (std::size_t i = 0; i < n; ++i) {
      if (!st[i]) actions.push_back(static_cast<int>(i));
    }
    if (actions.empty()) actions.push_back(-1);
    const double p_action = 1.0 / static_cast<double>(actions.size());
    R[static_cast<Eigen::Index>(code)] =
        static_cast<double>(std::count(st.begin(), st.end(), std::uint8_t{1})) / static_cast<double>(n);

    touched.clear();
    for (int a : actions) {
      // Machines whose next status is random: up and not rebooted.
      std::size_t fixed = a >= 0 ? (std::size_t{1} << a) : 0;
      std::vector<std::size_t> random;
      std::vector<double> p_up;
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(i) == a || !st[i]) continue;
        random.push_back(i);
        p_up.push_back(stay_up_probability(st, i, params, neighbors));
      }
      for (std::size_t mask = 0; mask < (std::size_t{1} << random.size()); ++mask) {
        double p = p_action;
        std::size_t next = fixed;
        for (std::size_t k = 0; k < random.size(); ++k) {
          if ((mask >> k) & 1U) {
            p *= p_up[k];
            next |= std::size_t{1} << random[k];
          } else {
            p *= 1.0 - p_up[k];
          }
        }
        if (p == 0.0) continue;
        if (row[next] == 0.0) touched.push_back(next);
        row[next] += p;
      }
    }
    std::sort(touched.begin(), touched.end());
    double total = 0.0;
    for (std::size_t t : touched) total += row[t];
    for (std::size_t t : touched) {
      triplets.emplace_back(static_cast<int>(code), static_cast<int>(t), row[t] / total);
      row[t] = 0.0;
    }
  }
  SparseMatrix P(static_cast<Eigen::Index>(num_states), static_cast<Eigen::Index>(num_states));
  P.setFromTriplets(triplets.begin(), triplets.end());
  return EnumeratedMdp(std::move(P), std::move(R), params.gamma, std::move(bits));
}

// ---------------------------------------------------------------------------

SysAdminDomain::SysAdminDomain(SysAdminParams params)
    : params_(std::move(params)), neighbors_(sysadmin_neighbors(params_)) {
  if (params_.machines < 1) throw DomainError("sysadmin needs at least one machine");
  spec_.name = "sysadmin";
  spec_.state_description = std::to_string(params_.machines) + " machines, each up or down";
  spec_.actions.push_back(-1);
  for (std::size_t i = 0; i < params_.machines; ++i) spec_.actions.push_back(static_cast<int>(i));
  spec_.policy = "reboot a uniformly random down machine";
  spec_.default_gamma = params_.gamma;
  spec_.horizon = params_.horizon;
  spec_.num_base_features = 2 * params_.machines;
}

State SysAdminDomain::initial_state(Rng& /*rng*/) const { return State(params_.machines, 1.0); }

int SysAdminDomain::policy(const State& s, Rng& rng) const { return sysadmin_policy(status_from_state(s), rng); }

StepResult SysAdminDomain::step(const State& s, int action, Rng& rng) const {
  auto r = sysadmin_step(status_from_state(s), action, rng, params_, neighbors_);
  return {state_from_status(r.status), r.reward, r.terminal};
}

BaseBits SysAdminDomain::encode(const State& s) const { return sysadmin_encode(status_from_state(s)); }

FeatureSet SysAdminDomain::initial_features() const { return FeatureSet::singletons(spec_.num_base_features); }

std::vector<std::vector<Index>> SysAdminDomain::exclusive_groups() const {
  std::vector<std::vector<Index>> groups;
  for (std::size_t i = 0; i < params_.machines; ++i) {
    groups.push_back({static_cast<Index>(2 * i + 1), static_cast<Index>(2 * i + 2)});
  }
  return groups;
}

std::shared_ptr<const EnumeratedMdp> SysAdminDomain::enumerated() const {
  if (params_.machines > 12) return nullptr;
  return std::make_shared<const EnumeratedMdp>(sysadmin_enumerate(params_));
}

}  // namespace fdd
