#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "batchkb/bpe.hpp"
#include "batchkb/environment.hpp"
#include "batchkb/kernels.hpp"
#include "batchkb/schedules.hpp"

namespace batchkb {

struct DomainConfig {
  std::vector<double> low, high;
  int points_per_dim = 2;
};

struct InstanceConfig {
  enum class Type { kGpSample, kHardFamily, kExplicit };
  Type type = Type::kGpSample;
  // gp_sample: kernel family/nu follow the algorithm kernel.
  double sample_lengthscale = 2.0;
  std::optional<std::uint64_t> seed;  // fixed instance when set; fresh per trial otherwise
  // hard_family
  std::size_t M = 4;
  double epsilon = 0.1;
  int member = 0;
  // explicit
  std::vector<double> values;
};

struct ScheduleConfig {
  ScheduleRule rule = ScheduleRule::kGrowingLi;
  double a = 0.5;       // growing_param
  int B = 2;            // fixed rules
  LogBase log_base = LogBase::kNatural;
  std::string label;    // for tables; defaults to a rule/parameter string
};

struct RobustSettings {
  double xi = 0.0;
  bool pruned = false;
};

struct ExperimentConfig {
  enum class Algorithm { kBpe, kRobustBpe };

  DomainConfig domain;
  KernelSpec kernel;  // algorithm kernel
  InstanceConfig instance;
  ScheduleConfig schedule;
  std::vector<ScheduleConfig> schedules;  // compare mode
  Algorithm algorithm = Algorithm::kBpe;
  std::optional<RobustSettings> robust;
  ConfidenceParams confidence;
  double noise_sigma = 0.02;
  std::optional<double> lambda;  // defaults to noise_sigma^2
  std::int64_t T = 0;
  int n_trials = 1;
  std::uint64_t base_seed = 1;
  std::vector<std::int64_t> checkpoints;  // defaults to {200,...,1000} clipped to T
  std::string output_dir;

  double effective_lambda() const;
  std::string schedule_label(const ScheduleConfig& sc) const;
};

// Parses and validates; throws ConfigError with the offending field path.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// Canonical single-line form embedded in CSV headers as provenance.
std::string config_provenance(const nlohmann::json& j);

// Materializes a schedule config at horizon T (fixed rules take the kernel
// class from the algorithm kernel and the domain dimension). A fixed_li
// overflow is a ConfigError here: such a run cannot execute.
BatchSchedule build_schedule(const ScheduleConfig& sc, std::int64_t T,
                             const KernelSpec& kernel, int d);

}  // namespace batchkb
