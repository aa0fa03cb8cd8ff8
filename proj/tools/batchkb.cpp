// Benchmark CLI: config-driven experiment runs, paired schedule comparisons,
// batch diagnostics, schedule inspection, and hard-instance verification.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "batchkb/errors.hpp"
#include "batchkb/harness.hpp"
#include "batchkb/instances.hpp"

using nlohmann::json;
using namespace batchkb;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return j;
}

void print_schedule(const BatchSchedule& s) {
  std::printf("rule=%s T=%lld B=%d\n", rule_name(s.rule).c_str(),
              static_cast<long long>(s.T), s.batches());
  std::printf("sizes:");
  for (auto n : s.sizes) std::printf(" %lld", static_cast<long long>(n));
  std::printf("\nendpoints:");
  for (auto e : s.endpoints) std::printf(" %lld", static_cast<long long>(e));
  std::printf("\n");
}

void print_aggregate(const std::vector<AggregateRow>& rows) {
  std::printf("%10s %14s %12s %8s\n", "checkpoint", "mean", "stderr", "trials");
  for (const AggregateRow& r : rows)
    std::printf("%10lld %14.4f %12.4f %8d\n", static_cast<long long>(r.checkpoint),
                r.mean, r.stderr_, r.n_trials);
}

KernelSpec parse_kernel_args(const std::string& family, double lengthscale, double nu) {
  KernelSpec k;
  if (family == "se") {
    k.family = KernelFamily::kSquaredExponential;
  } else if (family == "matern") {
    k.family = KernelFamily::kMatern;
    k.nu = nu;
  } else {
    throw ConfigError("--kernel must be se or matern");
  }
  k.lengthscale = lengthscale;
  return k;
}

int cmd_run(const std::string& path) {
  const ExperimentConfig cfg = load_experiment_config(path);
  const ExperimentOutput out = run_experiment(cfg);
  std::printf("schedule %s, B=%d\n", cfg.schedule_label(cfg.schedule).c_str(),
              out.schedule.batches());
  print_aggregate(out.aggregate);
  if (!cfg.output_dir.empty())
    std::printf("wrote %s/trials.csv and %s/aggregate.csv\n", cfg.output_dir.c_str(),
                cfg.output_dir.c_str());
  return 0;
}

int cmd_compare(const std::string& path) {
  const ExperimentConfig cfg = load_experiment_config(path);
  const CompareOutput out = compare_schedules(cfg);
  std::printf("%-24s %4s", "schedule", "B");
  for (std::int64_t cp : cfg.checkpoints)
    std::printf(" %12s", ("T=" + std::to_string(cp)).c_str());
  std::printf("\n");
  for (const CompareColumn& col : out.columns) {
    std::printf("%-24s %4d", col.label.c_str(), col.B);
    for (const AggregateRow& r : col.aggregate) std::printf(" %12.2f", r.mean);
    std::printf("\n");
  }
  if (!cfg.output_dir.empty())
    std::printf("wrote %s/comparison.csv\n", cfg.output_dir.c_str());
  return 0;
}

ScheduleConfig schedule_from_json(const json& js) {
  ScheduleConfig sc;
  const std::string rule = js.at("rule").get<std::string>();
  if (rule == "growing_li") {
    sc.rule = ScheduleRule::kGrowingLi;
  } else if (rule == "growing_param") {
    sc.rule = ScheduleRule::kGrowingParam;
    sc.a = js.at("a").get<double>();
  } else if (rule == "fixed_li") {
    sc.rule = ScheduleRule::kFixedLi;
    sc.B = js.at("B").get<int>();
  } else if (rule == "fixed_refined") {
    sc.rule = ScheduleRule::kFixedRefined;
    sc.B = js.at("B").get<int>();
  } else {
    throw ConfigError("schedule.rule must be one of growing_li, growing_param, "
                      "fixed_li, fixed_refined");
  }
  if (js.contains("log_base") && js.at("log_base").get<std::string>() == "log2")
    sc.log_base = LogBase::kBase2;
  return sc;
}

int cmd_diagnose(const std::string& path) {
  const json j = load_json(path);
  if (!j.contains("T") || !j.contains("d") || !j.contains("kernel") ||
      !j.contains("schedule"))
    throw ConfigError("diagnose config needs T, d, kernel, schedule");
  const std::int64_t T = j.at("T").get<std::int64_t>();
  const int d = j.at("d").get<int>();

  KernelSpec k;
  const std::string fam = j.at("kernel").at("family").get<std::string>();
  if (fam == "matern") {
    k.family = KernelFamily::kMatern;
    k.nu = j.at("kernel").at("nu").get<double>();
  } else if (fam != "se") {
    throw ConfigError("diagnose: kernel.family must be se or matern");
  }
  if (j.at("kernel").contains("lengthscale"))
    k.lengthscale = j.at("kernel").at("lengthscale").get<double>();

  const ScheduleConfig sc = schedule_from_json(j.at("schedule"));
  const BatchSchedule schedule = build_schedule(sc, T, k, d);
  if (j.contains("B") && j.at("B").get<int>() != schedule.batches())
    throw ConfigError("diagnose: B=" + j.at("B").dump() + " does not match the realized " +
                      std::to_string(schedule.batches()) + " batches");

  const KernelClassSpec kc{k.family, d, k.nu};
  const DiagnoseReport rep = diagnose_batches(schedule, kc);
  print_schedule(schedule);
  std::printf("reference T_i:");
  for (auto v : rep.reference) std::printf(" %lld", static_cast<long long>(v));
  std::printf("\nbad events:");
  for (std::size_t i = 0; i < rep.flags.size(); ++i)
    std::printf(" A_%zu=%d", i + 1, rep.flags[i] ? 1 : 0);
  std::printf("\nbad batches:");
  for (int b : rep.bad_batches) std::printf(" %d", b);
  std::printf("\n");
  return 0;
}

int cmd_schedule(const std::string& rule, std::int64_t T, double a, int B,
                 const std::string& family, int d, double nu, double lengthscale,
                 const std::string& log_base) {
  const LogBase lb = log_base == "log2" ? LogBase::kBase2 : LogBase::kNatural;
  if (rule == "growing_li") {
    print_schedule(growing_schedule_li(T));
    return 0;
  }
  if (rule == "growing_param") {
    print_schedule(growing_schedule_param(T, a));
    return 0;
  }
  const KernelSpec k = parse_kernel_args(family, lengthscale, nu);
  const KernelClassSpec kc{k.family, d, k.nu};
  if (rule == "fixed_li") {
    const auto r = fixed_schedule_li(T, B, kc, lb);
    if (std::holds_alternative<OverflowReport>(r)) {
      const auto& o = std::get<OverflowReport>(r);
      std::printf("overflow: fixed_li T=%lld B=%d leaves the last batch short by %lld\n",
                  static_cast<long long>(o.T), o.B, static_cast<long long>(o.deficit));
      std::printf("leading sizes:");
      for (auto n : o.leading_sizes) std::printf(" %lld", static_cast<long long>(n));
      std::printf("\n");
      return 0;  // a reported outcome, not an error
    }
    print_schedule(std::get<BatchSchedule>(r));
    return 0;
  }
  if (rule == "fixed_refined") {
    print_schedule(fixed_schedule_refined(T, B, kc, lb));
    return 0;
  }
  throw ConfigError("schedule: unknown rule " + rule);
}

int cmd_instance_verify(const std::string& path) {
  const json j = load_json(path);
  const json& gj = j.at("domain").at("grid");
  const Domain domain = Domain::grid(gj.at("low").get<std::vector<double>>(),
                                     gj.at("high").get<std::vector<double>>(),
                                     gj.at("points_per_dim").get<int>());
  const json& ij = j.at("instance");
  if (ij.at("type").get<std::string>() != "hard_family")
    throw ConfigError("instance verify: expects an instance of type hard_family");
  const std::size_t M = ij.at("M").get<std::size_t>();
  const double eps = ij.at("epsilon").get<double>();
  const HardInstanceFamily fam = make_hard_family(domain, M, eps);
  const FamilyCheck c = verify_hard_family(domain, fam);
  std::printf("value range within [-2e, 2e]:    %s\n", c.value_range ? "pass" : "FAIL");
  std::printf("peak 2e at each cell center:     %s\n", c.peak_at_center ? "pass" : "FAIL");
  std::printf("eps-optimal for <= 1 member:     %s\n", c.eps_disjoint ? "pass" : "FAIL");
  if (!c.all()) {
    std::printf("detail: %s\n", c.detail.c_str());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batched kernelized bandit benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", config_path, "config JSON")->required();

  std::string cmp_path;
  auto* cmp = app.add_subcommand("compare", "run paired schedule comparison");
  cmp->add_option("config", cmp_path, "config JSON with a schedules list")->required();

  std::string diag_path;
  auto* diag = app.add_subcommand("diagnose", "reference endpoints and bad events");
  diag->add_option("config", diag_path, "diagnose JSON (T, d, kernel, schedule)")->required();

  std::string rule, family = "se", log_base = "natural";
  std::int64_t T = 0;
  double a = 0.5, nu = 1.5, lengthscale = 0.5;
  int B = 2, d = 2;
  auto* sch = app.add_subcommand("schedule", "print sizes/endpoints for a rule");
  sch->add_option("rule", rule, "growing_li|growing_param|fixed_li|fixed_refined")->required();
  sch->add_option("--T", T, "horizon")->required();
  sch->add_option("--a", a, "growing_param exponent");
  sch->add_option("--B", B, "batch count for fixed rules");
  sch->add_option("--kernel", family, "se|matern (fixed rules)");
  sch->add_option("--d", d, "dimension (fixed rules)");
  sch->add_option("--nu", nu, "Matern smoothness");
  sch->add_option("--lengthscale", lengthscale, "kernel lengthscale");
  sch->add_option("--log-base", log_base, "natural|log2");

  auto* inst = app.add_subcommand("instance", "instance utilities");
  std::string verify_path;
  auto* verify = inst->add_subcommand("verify", "check hard-family invariants");
  verify->add_option("config", verify_path, "config JSON with domain and instance")->required();
  inst->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path);
    if (*cmp) return cmd_compare(cmp_path);
    if (*diag) return cmd_diagnose(diag_path);
    if (*sch) return cmd_schedule(rule, T, a, B, family, d, nu, lengthscale, log_base);
    if (*verify) return cmd_instance_verify(verify_path);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
