#include "batchkb/config.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "batchkb/errors.hpp"

namespace batchkb {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config." + path + ": " + what);
}

const json& need(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  return j.at(key);
}

double need_number(const json& j, const std::string& path, const char* key) {
  const json& v = need(j, path, key);
  if (!v.is_number()) fail(path + "." + key, "must be a number");
  return v.get<double>();
}

std::string need_string(const json& j, const std::string& path, const char* key) {
  const json& v = need(j, path, key);
  if (!v.is_string()) fail(path + "." + key, "must be a string");
  return v.get<std::string>();
}

KernelSpec parse_kernel(const json& j, const std::string& path) {
  KernelSpec k;
  const std::string fam = need_string(j, path, "family");
  if (fam == "se") {
    k.family = KernelFamily::kSquaredExponential;
  } else if (fam == "matern") {
    k.family = KernelFamily::kMatern;
    k.nu = need_number(j, path, "nu");
  } else {
    fail(path + ".family", "must be \"se\" or \"matern\"");
  }
  k.lengthscale = need_number(j, path, "lengthscale");
  try {
    k.validate();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return k;
}

ScheduleConfig parse_schedule(const json& j, const std::string& path) {
  ScheduleConfig sc;
  const std::string rule = need_string(j, path, "rule");
  if (rule == "growing_li") sc.rule = ScheduleRule::kGrowingLi;
  else if (rule == "growing_param") sc.rule = ScheduleRule::kGrowingParam;
  else if (rule == "fixed_li") sc.rule = ScheduleRule::kFixedLi;
  else if (rule == "fixed_refined") sc.rule = ScheduleRule::kFixedRefined;
  else fail(path + ".rule", "must be one of growing_li, growing_param, fixed_li, fixed_refined");

  if (sc.rule == ScheduleRule::kGrowingParam) {
    sc.a = need_number(j, path, "a");
    if (!(sc.a > 0.0 && sc.a < 1.0)) fail(path + ".a", "must lie in (0, 1)");
  }
  if (sc.rule == ScheduleRule::kFixedLi || sc.rule == ScheduleRule::kFixedRefined) {
    sc.B = static_cast<int>(need_number(j, path, "B"));
    if (sc.B < 2) fail(path + ".B", "must be >= 2");
  }
  if (j.contains("log_base")) {
    const std::string lb = need_string(j, path, "log_base");
    if (lb == "natural") sc.log_base = LogBase::kNatural;
    else if (lb == "log2") sc.log_base = LogBase::kBase2;
    else fail(path + ".log_base", "must be \"natural\" or \"log2\"");
  }
  if (j.contains("label")) sc.label = need_string(j, path, "label");
  return sc;
}

}  // namespace

double ExperimentConfig::effective_lambda() const {
  return lambda ? *lambda : noise_sigma * noise_sigma;
}

std::string ExperimentConfig::schedule_label(const ScheduleConfig& sc) const {
  if (!sc.label.empty()) return sc.label;
  std::string s = rule_name(sc.rule);
  if (sc.rule == ScheduleRule::kGrowingParam) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "(a=%g)", sc.a);
    s += buf;
  } else if (sc.rule != ScheduleRule::kGrowingLi) {
    s += "(B=" + std::to_string(sc.B) + ")";
  }
  return s;
}

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig c;

  {
    const json& dj = need(j, "", "domain");
    const json& gj = need(dj, "domain", "grid");
    const json& low = need(gj, "domain.grid", "low");
    const json& high = need(gj, "domain.grid", "high");
    if (!low.is_array() || !high.is_array() || low.size() != high.size() || low.empty())
      fail("domain.grid", "low/high must be equal-length nonempty arrays");
    c.domain.low = low.get<std::vector<double>>();
    c.domain.high = high.get<std::vector<double>>();
    c.domain.points_per_dim = static_cast<int>(need_number(gj, "domain.grid", "points_per_dim"));
    if (c.domain.points_per_dim < 1) fail("domain.grid.points_per_dim", "must be >= 1");
  }

  c.kernel = parse_kernel(need(j, "", "kernel"), "kernel");

  {
    const json& ij = need(j, "", "instance");
    const std::string type = need_string(ij, "instance", "type");
    if (type == "gp_sample") {
      c.instance.type = InstanceConfig::Type::kGpSample;
      c.instance.sample_lengthscale = need_number(ij, "instance", "sample_lengthscale");
      if (!(c.instance.sample_lengthscale > 0.0))
        fail("instance.sample_lengthscale", "must be > 0");
    } else if (type == "hard_family") {
      c.instance.type = InstanceConfig::Type::kHardFamily;
      c.instance.M = static_cast<std::size_t>(need_number(ij, "instance", "M"));
      c.instance.epsilon = need_number(ij, "instance", "epsilon");
      if (ij.contains("member"))
        c.instance.member = static_cast<int>(need_number(ij, "instance", "member"));
      if (c.instance.member < 0 || static_cast<std::size_t>(c.instance.member) >= c.instance.M)
        fail("instance.member", "must index a family member");
    } else if (type == "explicit") {
      c.instance.type = InstanceConfig::Type::kExplicit;
      const json& v = need(ij, "instance", "values");
      if (!v.is_array() || v.empty()) fail("instance.values", "must be a nonempty array");
      c.instance.values = v.get<std::vector<double>>();
    } else {
      fail("instance.type", "must be gp_sample, hard_family, or explicit");
    }
    if (ij.contains("seed"))
      c.instance.seed = ij.at("seed").get<std::uint64_t>();
  }

  if (j.contains("schedule"))
    c.schedule = parse_schedule(j.at("schedule"), "schedule");
  if (j.contains("schedules")) {
    const json& arr = j.at("schedules");
    if (!arr.is_array() || arr.size() < 2)
      fail("schedules", "compare mode needs at least two schedules");
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.schedules.push_back(parse_schedule(arr[i], "schedules[" + std::to_string(i) + "]"));
  }
  if (!j.contains("schedule") && !j.contains("schedules"))
    fail("schedule", "missing");

  {
    const std::string algo = need_string(j, "", "algorithm");
    if (algo == "bpe") c.algorithm = ExperimentConfig::Algorithm::kBpe;
    else if (algo == "robust_bpe") c.algorithm = ExperimentConfig::Algorithm::kRobustBpe;
    else fail("algorithm", "must be \"bpe\" or \"robust_bpe\"");
  }

  if (j.contains("robust")) {
    const json& rj = j.at("robust");
    RobustSettings rs;
    rs.xi = need_number(rj, "robust", "xi");
    if (rs.xi < 0.0) fail("robust.xi", "must be >= 0");
    if (rj.contains("distance") && need_string(rj, "robust", "distance") != "euclidean")
      fail("robust.distance", "only \"euclidean\" is supported");
    if (rj.contains("pruned")) {
      if (!rj.at("pruned").is_boolean()) fail("robust.pruned", "must be a boolean");
      rs.pruned = rj.at("pruned").get<bool>();
    }
    c.robust = rs;
  }
  if (c.algorithm == ExperimentConfig::Algorithm::kRobustBpe && !c.robust)
    fail("robust", "required when algorithm is robust_bpe");

  {
    const json& cj = need(j, "", "confidence");
    c.confidence.psi = need_number(cj, "confidence", "psi");
    c.confidence.delta = need_number(cj, "confidence", "delta");
    const std::string mode = need_string(cj, "confidence", "beta_mode");
    if (mode == "theoretical") {
      c.confidence.mode = ConfidenceParams::BetaMode::kTheoretical;
      if (!(c.confidence.psi > 0.0)) fail("confidence.psi", "must be > 0");
      if (!(c.confidence.delta > 0.0 && c.confidence.delta < 1.0))
        fail("confidence.delta", "must lie in (0, 1)");
    } else if (mode == "fixed") {
      c.confidence.mode = ConfidenceParams::BetaMode::kFixed;
      c.confidence.fixed_beta = need_number(cj, "confidence", "beta_value");
      if (!(c.confidence.fixed_beta > 0.0)) fail("confidence.beta_value", "must be > 0");
    } else {
      fail("confidence.beta_mode", "must be \"theoretical\" or \"fixed\"");
    }
  }

  c.noise_sigma = need_number(j, "", "noise_sigma");
  if (c.noise_sigma < 0.0) fail("noise_sigma", "must be >= 0");
  if (c.confidence.mode == ConfidenceParams::BetaMode::kTheoretical && !(c.noise_sigma > 0.0))
    fail("noise_sigma", "must be > 0 for theoretical-beta runs");

  if (j.contains("lambda")) {
    c.lambda = j.at("lambda").get<double>();
    if (!(*c.lambda > 0.0)) fail("lambda", "must be > 0");
  } else if (!(c.noise_sigma > 0.0)) {
    fail("lambda", "required when noise_sigma is 0");
  }

  c.T = static_cast<std::int64_t>(need_number(j, "", "T"));
  if (c.T < 2) fail("T", "must be >= 2");
  c.n_trials = static_cast<int>(need_number(j, "", "n_trials"));
  if (c.n_trials < 1) fail("n_trials", "must be >= 1");
  c.base_seed = need(j, "", "base_seed").get<std::uint64_t>();

  if (j.contains("checkpoints")) {
    const json& cp = j.at("checkpoints");
    if (!cp.is_array() || cp.empty()) fail("checkpoints", "must be a nonempty array");
    c.checkpoints = cp.get<std::vector<std::int64_t>>();
  } else {
    for (std::int64_t v : {200, 400, 600, 800, 1000})
      if (v <= c.T) c.checkpoints.push_back(v);
    if (c.checkpoints.empty() || c.checkpoints.back() != c.T) c.checkpoints.push_back(c.T);
  }
  for (std::int64_t cp : c.checkpoints)
    if (cp < 1 || cp > c.T) fail("checkpoints", "entries must lie in [1, T]");

  if (j.contains("output_dir")) c.output_dir = need_string(j, "", "output_dir");

  if (c.instance.type == InstanceConfig::Type::kExplicit) {
    std::size_t n = 1;
    for (std::size_t k = 0; k < c.domain.low.size(); ++k)
      n *= static_cast<std::size_t>(c.domain.points_per_dim);
    if (c.instance.values.size() != n)
      fail("instance.values", "must give one value per domain point (" +
                                  std::to_string(n) + ")");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_experiment_config(j);
}

std::string config_provenance(const json& j) { return j.dump(); }

BatchSchedule build_schedule(const ScheduleConfig& sc, std::int64_t T,
                             const KernelSpec& kernel, int d) {
  switch (sc.rule) {
    case ScheduleRule::kGrowingLi:
      return growing_schedule_li(T);
    case ScheduleRule::kGrowingParam:
      return growing_schedule_param(T, sc.a);
    case ScheduleRule::kFixedLi: {
      const KernelClassSpec kc{kernel.family, d, kernel.nu};
      auto r = fixed_schedule_li(T, sc.B, kc, sc.log_base);
      if (std::holds_alternative<OverflowReport>(r)) {
        const auto& o = std::get<OverflowReport>(r);
        throw ConfigError("fixed_li schedule overflows at T=" + std::to_string(T) +
                          ", B=" + std::to_string(sc.B) + " (last batch short by " +
                          std::to_string(o.deficit) + "); see the schedule subcommand");
      }
      return std::get<BatchSchedule>(r);
    }
    case ScheduleRule::kFixedRefined: {
      const KernelClassSpec kc{kernel.family, d, kernel.nu};
      return fixed_schedule_refined(T, sc.B, kc, sc.log_base);
    }
  }
  throw ConfigError("unknown schedule rule");
}

}  // namespace batchkb
