#include "batchkb/harness.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "batchkb/errors.hpp"
#include "batchkb/instances.hpp"
#include "batchkb/rng.hpp"

namespace batchkb {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Domain build_domain(const DomainConfig& dc) {
  return Domain::grid(dc.low, dc.high, dc.points_per_dim);
}

// Per-trial truth values. GP instances redraw per trial unless the config
// pins a seed; the other instance types are fixed functions.
class InstanceProvider {
 public:
  InstanceProvider(const ExperimentConfig& cfg, const Domain& domain) : cfg_(cfg) {
    switch (cfg.instance.type) {
      case InstanceConfig::Type::kGpSample: {
        KernelSpec sk = cfg.kernel;
        sk.lengthscale = cfg.instance.sample_lengthscale;
        sampler_.emplace(domain, sk);
        break;
      }
      case InstanceConfig::Type::kHardFamily: {
        const HardInstanceFamily fam =
            make_hard_family(domain, cfg.instance.M, cfg.instance.epsilon);
        fixed_ = fam.values[cfg.instance.member];
        break;
      }
      case InstanceConfig::Type::kExplicit:
        fixed_ = cfg.instance.values;
        break;
    }
  }

  std::vector<double> values(std::uint64_t trial_seed) const {
    if (!sampler_) return fixed_;
    const std::uint64_t s = cfg_.instance.seed ? *cfg_.instance.seed : trial_seed;
    return sampler_->sample(s).values;
  }

 private:
  const ExperimentConfig& cfg_;
  std::optional<GPSampler> sampler_;
  std::vector<double> fixed_;
};

RunResult run_trial(const ExperimentConfig& cfg, const Domain& domain,
                    const BatchSchedule& schedule, std::vector<double> values,
                    std::uint64_t trial_seed) {
  Environment env(domain, std::move(values), cfg.noise_sigma, trial_seed, cfg.T);
  RunOptions opts;
  opts.lambda = cfg.effective_lambda();
  if (cfg.algorithm == ExperimentConfig::Algorithm::kBpe)
    return run_bpe(env, cfg.kernel, schedule, cfg.confidence, opts);
  RobustConfig rc;
  rc.perturbation.xi = cfg.robust->xi;
  rc.pruned_exploration = cfg.robust->pruned;
  return run_robust_bpe(env, cfg.kernel, schedule, cfg.confidence, rc, opts);
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

json describe(const ExperimentConfig& cfg, const ScheduleConfig& sc) {
  json j;
  j["T"] = cfg.T;
  j["n_trials"] = cfg.n_trials;
  j["base_seed"] = cfg.base_seed;
  j["noise_sigma"] = cfg.noise_sigma;
  j["lambda"] = cfg.effective_lambda();
  j["algorithm"] = cfg.algorithm == ExperimentConfig::Algorithm::kBpe ? "bpe" : "robust_bpe";
  j["kernel"]["family"] =
      cfg.kernel.family == KernelFamily::kSquaredExponential ? "se" : "matern";
  j["kernel"]["lengthscale"] = cfg.kernel.lengthscale;
  if (cfg.kernel.family == KernelFamily::kMatern) j["kernel"]["nu"] = cfg.kernel.nu;
  j["schedule"] = cfg.schedule_label(sc);
  if (cfg.robust) {
    j["robust"]["xi"] = cfg.robust->xi;
    j["robust"]["pruned"] = cfg.robust->pruned;
  }
  j["beta_mode"] = cfg.confidence.mode == ConfidenceParams::BetaMode::kFixed
                       ? "fixed" : "theoretical";
  switch (cfg.instance.type) {
    case InstanceConfig::Type::kGpSample:
      j["instance"] = {{"type", "gp_sample"},
                       {"sample_lengthscale", cfg.instance.sample_lengthscale}};
      break;
    case InstanceConfig::Type::kHardFamily:
      j["instance"] = {{"type", "hard_family"}, {"M", cfg.instance.M},
                       {"epsilon", cfg.instance.epsilon}, {"member", cfg.instance.member}};
      break;
    case InstanceConfig::Type::kExplicit:
      j["instance"] = {{"type", "explicit"}};
      break;
  }
  if (cfg.instance.seed) j["instance"]["seed"] = *cfg.instance.seed;
  return j;
}

}  // namespace

int thread_cap() {
  if (const char* env = std::getenv("BATCHKB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  const Domain domain = build_domain(cfg.domain);
  const BatchSchedule schedule =
      build_schedule(cfg.schedule, cfg.T, cfg.kernel, domain.dim);
  const InstanceProvider provider(cfg, domain);

  ExperimentOutput out;
  out.schedule = schedule;
  out.provenance = config_provenance(describe(cfg, cfg.schedule));
  out.runs.resize(cfg.n_trials);
  parallel_for(cfg.n_trials, [&](int i) {
    const std::uint64_t trial_seed = cfg.base_seed ^ static_cast<std::uint64_t>(i + 1);
    out.runs[i] = run_trial(cfg, domain, schedule, provider.values(trial_seed), trial_seed);
  });

  std::vector<RegretTrace> traces;
  traces.reserve(out.runs.size());
  for (const RunResult& r : out.runs) traces.push_back(r.trace);
  out.aggregate = aggregate_trials(traces, cfg.checkpoints);

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    write_trials_csv(cfg.output_dir + "/trials.csv", out.provenance, out.runs);
    write_aggregate_csv(cfg.output_dir + "/aggregate.csv", out.provenance, out.aggregate);
  }
  return out;
}

CompareOutput compare_schedules(const ExperimentConfig& cfg) {
  if (cfg.schedules.size() < 2)
    throw ConfigError("compare: config must list at least two schedules");
  const Domain domain = build_domain(cfg.domain);
  const InstanceProvider provider(cfg, domain);

  CompareOutput out;
  json prov = describe(cfg, cfg.schedule);
  prov.erase("schedule");
  json labels = json::array();
  for (const ScheduleConfig& sc : cfg.schedules) labels.push_back(cfg.schedule_label(sc));
  prov["schedules"] = labels;
  out.provenance = config_provenance(prov);

  // Instances are drawn once per trial and shared across schedules; noise is
  // keyed by t, so the pairing is exact.
  std::vector<std::vector<double>> values(cfg.n_trials);
  std::vector<std::uint64_t> seeds(cfg.n_trials);
  for (int i = 0; i < cfg.n_trials; ++i) {
    seeds[i] = cfg.base_seed ^ static_cast<std::uint64_t>(i + 1);
    values[i] = provider.values(seeds[i]);
  }

  const int S = static_cast<int>(cfg.schedules.size());
  out.columns.resize(S);
  for (int s = 0; s < S; ++s) {
    CompareColumn& col = out.columns[s];
    col.label = cfg.schedule_label(cfg.schedules[s]);
    col.schedule = build_schedule(cfg.schedules[s], cfg.T, cfg.kernel, domain.dim);
    col.B = col.schedule.batches();
    col.runs.resize(cfg.n_trials);
  }
  parallel_for(S * cfg.n_trials, [&](int k) {
    const int s = k / cfg.n_trials;
    const int i = k % cfg.n_trials;
    out.columns[s].runs[i] = run_trial(cfg, domain, out.columns[s].schedule,
                                       values[i], seeds[i]);
  });
  for (CompareColumn& col : out.columns) {
    std::vector<RegretTrace> traces;
    for (const RunResult& r : col.runs) traces.push_back(r.trace);
    col.aggregate = aggregate_trials(traces, cfg.checkpoints);
  }

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    write_compare_csv(cfg.output_dir + "/comparison.csv", out, cfg.checkpoints);
  }
  return out;
}

DiagnoseReport diagnose_batches(const BatchSchedule& schedule,
                                const KernelClassSpec& kc) {
  const ReferenceEndpoints refs =
      reference_endpoints(schedule.T, schedule.batches(), kc);
  DiagnoseReport rep;
  rep.realized = schedule.endpoints;
  rep.reference = refs.times;
  rep.bad_batches = classify_bad_batch(schedule.endpoints, refs);
  rep.flags.assign(schedule.batches(), false);
  for (int b : rep.bad_batches) rep.flags[b - 1] = true;
  return rep;
}

void write_trials_csv(const std::string& path, const std::string& provenance,
                      const std::vector<RunResult>& runs) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open for writing: " + path);
  f << "# config: " << provenance << "\n";
  f << "trial,t,batch_index,x_index,inst_regret,cum_regret\n";
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (const StepRecord& s : runs[i].trace.steps())
      f << (i + 1) << ',' << s.t << ',' << s.batch_index << ',' << s.x_index << ','
        << fmt(s.inst_regret) << ',' << fmt(s.cum_regret) << "\n";
}

void write_aggregate_csv(const std::string& path, const std::string& provenance,
                         const std::vector<AggregateRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open for writing: " + path);
  f << "# config: " << provenance << "\n";
  f << "checkpoint,mean,stderr,n_trials\n";
  for (const AggregateRow& r : rows)
    f << r.checkpoint << ',' << fmt(r.mean) << ',' << fmt(r.stderr_) << ','
      << r.n_trials << "\n";
}

void write_compare_csv(const std::string& path, const CompareOutput& out,
                       const std::vector<std::int64_t>& checkpoints) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open for writing: " + path);
  f << "# config: " << out.provenance << "\n";
  f << "schedule,B";
  for (std::int64_t cp : checkpoints) f << ",mean_" << cp << ",stderr_" << cp;
  f << "\n";
  for (const CompareColumn& col : out.columns) {
    f << col.label << ',' << col.B;
    for (const AggregateRow& r : col.aggregate)
      f << ',' << fmt(r.mean) << ',' << fmt(r.stderr_);
    f << "\n";
  }
}

}  // namespace batchkb
