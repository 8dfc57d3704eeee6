#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fdd/domains.hpp"
#include "fdd/error.hpp"
#include "fdd/harness.hpp"

namespace fdd {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

const std::set<std::string>& domain_keys() {
  static const std::set<std::string> keys{
      "bins",     "horizon",  "machines",  "topology",       "topology_file",  "base_up",
      "neighbor_penalty",     "d",         "flip_prob",      "flip_down_prob", "reward_weights",
      "interaction",          "max_thdot", "noise",          "force",          "init_x_low",
      "init_x_high"};
  return keys;
}

const std::set<std::string>& keys_for(const std::string& domain) {
  static const std::map<std::string, std::set<std::string>> keys{
      {"mountain-car", {"bins", "horizon", "init_x_low", "init_x_high"}},
      {"pendulum", {"bins", "horizon", "max_thdot", "noise", "force"}},
      {"sysadmin", {"machines", "topology", "topology_file", "base_up", "neighbor_penalty", "horizon"}},
      {"bitchain", {"d", "flip_prob", "flip_down_prob", "reward_weights", "interaction", "horizon"}},
  };
  auto it = keys.find(domain);
  if (it == keys.end()) throw ConfigError("unknown domain '" + domain + "'");
  return it->second;
}

}  // namespace

MethodSpec MethodSpec::parse(std::string_view token) {
  const std::string t = trim(token);
  MethodSpec m;
  if (t == "ifdd+" || t == "ifdd-plus") {
    m.kind = MethodKind::ifdd_plus;
  } else if (t == "ifdd-icml11" || t == "ifdd") {
    m.kind = MethodKind::ifdd_icml11;
  } else if (t == "exact-eq2") {
    m.kind = MethodKind::exact_eq2;
  } else if (t == "omptd" || t.rfind("omptd:", 0) == 0) {
    m.kind = MethodKind::omp_td;
    if (t != "omptd") {
      m.pool_size = to_size("method", t.substr(6));
      if (m.pool_size == 0) throw ConfigError("method: omptd pool size must be positive");
    }
  } else {
    throw ConfigError("unknown method '" + t + "'");
  }
  return m;
}

std::vector<MethodSpec> MethodSpec::parse_list(std::string_view text) {
  std::vector<MethodSpec> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse(item));
  }
  if (out.empty()) throw ConfigError("method list is empty");
  return out;
}

std::string MethodSpec::token() const {
  switch (kind) {
    case MethodKind::ifdd_plus: return "ifdd+";
    case MethodKind::ifdd_icml11: return "ifdd-icml11";
    case MethodKind::exact_eq2: return "exact-eq2";
    case MethodKind::omp_td: return pool_size ? "omptd:" + std::to_string(pool_size) : "omptd";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  keys_for(domain);
  for (const auto& [k, v] : domain_params) {
    if (!keys_for(domain).count(k)) throw ConfigError("key '" + k + "' does not apply to domain " + domain);
  }
  if (methods.empty()) throw ConfigError("no methods configured");
  if (runs == 0) throw ConfigError("runs must be positive");
  if (samples == 0 && !expectation_model) throw ConfigError("samples must be positive");
  if (gamma && !(*gamma >= 0.0 && *gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(reg >= 0.0)) throw ConfigError("reg must be non-negative");
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

ExperimentConfig apply_config(ExperimentConfig cfg, const std::map<std::string, std::string>& entries) {
  std::optional<std::size_t> pool_size;
  for (const auto& [raw_key, v] : entries) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "domain") {
      cfg.domain = v;
    } else if (key == "method" || key == "methods") {
      cfg.methods = MethodSpec::parse_list(v);
    } else if (key == "iterations") {
      cfg.iterations = to_size(key, v);
    } else if (key == "samples") {
      cfg.samples = to_size(key, v);
    } else if (key == "runs") {
      cfg.runs = to_size(key, v);
    } else if (key == "gamma") {
      cfg.gamma = to_double(key, v);
    } else if (key == "reg") {
      cfg.reg = to_double(key, v);
    } else if (key == "seed") {
      cfg.seed = to_u64(key, v);
    } else if (key == "expectation_model") {
      cfg.expectation_model = to_bool(key, v);
    } else if (key == "out") {
      cfg.out = v;
    } else if (key == "threads") {
      cfg.threads = to_size(key, v);
    } else if (key == "pool_size") {
      pool_size = to_size(key, v);
      if (*pool_size == 0) throw ConfigError("pool_size must be positive");
    } else if (domain_keys().count(key)) {
      cfg.domain_params[key] = v;
    } else {
      throw ConfigError("unknown config key '" + raw_key + "'");
    }
  }
  // pool_size fills in omptd entries that did not name a size.
  if (pool_size) {
    for (auto& m : cfg.methods) {
      if (m.kind == MethodKind::omp_td && m.pool_size == 0) m.pool_size = *pool_size;
    }
  }
  return cfg;
}

std::unique_ptr<Domain> make_domain(const std::string& name, const std::map<std::string, std::string>& params) {
  const auto& allowed = keys_for(name);
  for (const auto& [k, v] : params) {
    if (!allowed.count(k)) throw ConfigError("key '" + k + "' does not apply to domain " + name);
  }
  auto get = [&](const char* key) -> const std::string* {
    auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  };

  try {
    if (name == "mountain-car") {
      MountainCarParams p;
      if (auto* v = get("bins")) p.bins_per_dim = to_size("bins", *v);
      if (auto* v = get("horizon")) p.horizon = to_size("horizon", *v);
      if (auto* v = get("init_x_low")) p.init_x_low = to_double("init_x_low", *v);
      if (auto* v = get("init_x_high")) p.init_x_high = to_double("init_x_high", *v);
      return std::make_unique<MountainCarDomain>(p);
    }
    if (name == "pendulum") {
      PendulumParams p;
      if (auto* v = get("bins")) p.bins_per_dim = to_size("bins", *v);
      if (auto* v = get("horizon")) p.horizon = to_size("horizon", *v);
      if (auto* v = get("max_thdot")) p.max_thdot = to_double("max_thdot", *v);
      if (auto* v = get("noise")) p.noise = to_double("noise", *v);
      if (auto* v = get("force")) p.force = to_double("force", *v);
      return std::make_unique<PendulumDomain>(p);
    }
    if (name == "sysadmin") {
      SysAdminParams p;
      if (auto* v = get("machines")) p.machines = to_size("machines", *v);
      if (auto* v = get("horizon")) p.horizon = to_size("horizon", *v);
      if (auto* v = get("base_up")) p.base_up = to_double("base_up", *v);
      if (auto* v = get("neighbor_penalty")) p.neighbor_penalty = to_double("neighbor_penalty", *v);
      const std::string topo = get("topology") ? *get("topology") : (get("topology_file") ? "file" : "ring");
      if (topo == "ring") {
        p.topology = Topology::ring;
      } else if (topo == "star") {
        p.topology = Topology::star;
      } else if (topo == "file") {
        if (!get("topology_file")) throw ConfigError("topology = file needs topology_file");
        p.topology = Topology::edge_list;
        p.edges = load_edge_list(*get("topology_file"));
      } else {
        throw ConfigError("topology must be ring, star or file; got '" + topo + "'");
      }
      return std::make_unique<SysAdminDomain>(p);
    }
    // bitchain
    BitChainParams p;
    std::size_t horizon = 500;
    if (auto* v = get("d")) p.d = to_size("d", *v);
    if (auto* v = get("flip_prob")) p.flip_prob = to_double("flip_prob", *v);
    if (auto* v = get("flip_down_prob")) p.flip_down_prob = to_double("flip_down_prob", *v);
    if (auto* v = get("reward_weights")) p.reward_weights = to_doubles("reward_weights", *v);
    if (auto* v = get("interaction")) p.interaction = to_double("interaction", *v);
    if (auto* v = get("horizon")) horizon = to_size("horizon", *v);
    auto mdp = std::make_shared<const EnumeratedMdp>(bitchain_build(p));
    return std::make_unique<EnumeratedDomain>("bitchain", std::move(mdp), horizon);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid ") + name + " parameters: " + e.what());
  }
}

}  // namespace fdd
