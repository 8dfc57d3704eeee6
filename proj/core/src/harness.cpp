#include "fdd/harness.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "fdd/error.hpp"
#include "fdd/lstd.hpp"
#include "fdd/rng.hpp"

namespace fdd {

namespace {

std::vector<DiscoveryMethod> make_methods(const ExperimentConfig& cfg, const Domain& domain, double gamma) {
  std::vector<DiscoveryMethod> out;
  std::shared_ptr<const EnumeratedMdp> mdp;
  SteadyStateDist d;
  for (const auto& spec : cfg.methods) {
    switch (spec.kind) {
      case MethodKind::ifdd_plus:
        out.push_back(DiscoveryMethod::ifdd_plus());
        break;
      case MethodKind::ifdd_icml11:
        out.push_back(DiscoveryMethod::ifdd_icml11());
        break;
      case MethodKind::omp_td: {
        const std::size_t cap = spec.pool_size ? spec.pool_size : std::numeric_limits<std::size_t>::max();
        out.push_back(DiscoveryMethod::omp_td(
            build_pool(domain.num_base_features(), domain.initial_features(), cap, domain.exclusive_groups())));
        break;
      }
      case MethodKind::exact_eq2: {
        if (!mdp) {
          auto base = domain.enumerated();
          if (!base) throw ConfigError("exact-eq2 needs an enumerable domain; " + domain.name() + " is not");
          mdp = std::make_shared<const EnumeratedMdp>(base->with_gamma(gamma));
          d = steady_state(*mdp);
        }
        out.push_back(DiscoveryMethod::exact_eq2(mdp, d));
        break;
      }
    }
  }
  return out;
}

std::vector<ExperimentRecord> run_one(std::size_t run_id, const ExperimentConfig& cfg, const Domain& domain,
                                      const std::vector<DiscoveryMethod>& methods, double gamma,
                                      const std::shared_ptr<const SampleSet>& shared_samples) {
  auto samples = shared_samples
                     ? shared_samples
                     : std::make_shared<const SampleSet>(simulate(domain, cfg.samples, derive_seed(cfg.seed, run_id)));
  std::vector<ExperimentRecord> out;
  for (const auto& method : methods) {
    const std::string label = method.label();
    ExpansionState st;
    st.chi = domain.initial_features();
    st.samples = samples;
    st.method = method;
    st.gamma = gamma;
    st.reg = cfg.reg;
    st.solution = lstd_fit(*samples, st.chi, gamma, cfg.reg);

    ExperimentRecord rec;
    rec.run_id = run_id;
    rec.method = label;
    rec.num_features = st.chi.size();
    rec.td_error_l2 = td_error_norm(*samples, *st.solution, st.chi, gamma);
    out.push_back(rec);

    double wall = 0.0;
    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
      auto res = expand_step(st);
      if (res.record.saturated) break;
      wall += res.record.wall_ms;
      rec.iteration = it;
      rec.num_features = res.chi.size();
      rec.td_error_l2 = res.record.td_error_l2;
      rec.wall_ms = wall;
      rec.candidates_scored = res.record.candidates_scored;
      rec.feature_added = res.record.added;
      out.push_back(rec);
      st.chi = std::move(res.chi);
      st.solution = std::move(res.solution);
    }
  }
  return out;
}

}  // namespace

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FDD_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto domain = make_domain(cfg.domain, cfg.domain_params);
  const double gamma = cfg.gamma.value_or(domain->default_gamma());
  const auto methods = make_methods(cfg, *domain, gamma);

  std::shared_ptr<const SampleSet> shared;
  if (cfg.expectation_model) {
    auto base = domain->enumerated();
    if (!base) throw ConfigError("expectation_model needs an enumerable domain; " + domain->name() + " is not");
    const auto mdp = base->with_gamma(gamma);
    shared = std::make_shared<const SampleSet>(expectation_samples(mdp, steady_state(mdp)));
  }

  std::vector<std::vector<ExperimentRecord>> per_run(cfg.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= cfg.runs) return;
      try {
        per_run[r] = run_one(r, cfg, *domain, methods, gamma, shared);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(cfg.runs);
        return;
      }
    }
  };
  const std::size_t workers = std::min(resolve_threads(cfg.threads), cfg.runs);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ExperimentRecord> out;
  for (auto& run : per_run) out.insert(out.end(), run.begin(), run.end());
  return out;
}

}  // namespace fdd
