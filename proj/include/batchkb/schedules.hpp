#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "batchkb/kernels.hpp"

namespace batchkb {

enum class ScheduleRule { kGrowingLi, kGrowingParam, kFixedLi, kFixedRefined };

// Logs in the fixed-B formulas default to natural log; base 2 is kept as an
// alternative because the source bound statements leave the base open and it
// only moves constants.
enum class LogBase { kNatural, kBase2 };

// Kernel class driving the exponent eta: 1/2 for SE, nu/(2nu+d) for Matern.
struct KernelClassSpec {
  KernelFamily family = KernelFamily::kSquaredExponential;
  int d = 1;
  double nu = 1.5;  // Matern only

  double eta() const;
  void validate() const;
};

// Partition of horizon T into batches: endpoints t_1 < ... < t_B = T with
// t_0 = 0 implicit, sizes N_i = t_i - t_{i-1}. B is always an output of the
// growing rules, never an input.
struct BatchSchedule {
  std::int64_t T = 0;
  ScheduleRule rule = ScheduleRule::kGrowingLi;
  std::vector<std::int64_t> sizes;
  std::vector<std::int64_t> endpoints;

  int batches() const { return static_cast<int>(sizes.size()); }
  static BatchSchedule from_sizes(std::int64_t T, ScheduleRule rule,
                                  std::vector<std::int64_t> sizes);
};

// N_i = min{ceil(sqrt(T*N_{i-1})), remaining} with N_0 = 1.
BatchSchedule growing_schedule_li(std::int64_t T);

// N_i = min{ceil(T^(1-a^i)), remaining} with a in (0,1).
BatchSchedule growing_schedule_param(std::int64_t T, double a);

// Bracketing bounds on the batch count of growing_schedule_param.
int param_batches_upper_bound(std::int64_t T, double a);  // ceil(log_{1/a} log2 T) + 1
int param_batches_lower_bound(std::int64_t T, double a);  // floor(log_{1/a}(ln T / ln ln T))

// The fixed-B rule that sets sizes N_1..N_{B-1} directly and gives the last
// batch the remainder. The remainder can be non-positive; that outcome is
// reported, not thrown.
struct OverflowReport {
  std::int64_t T = 0;
  int B = 0;
  std::vector<std::int64_t> leading_sizes;  // N_1..N_{B-1}
  std::int64_t deficit = 0;                 // -(T - sum), >= 0
};

std::variant<BatchSchedule, OverflowReport> fixed_schedule_li(
    std::int64_t T, int B, const KernelClassSpec& kc,
    LogBase base = LogBase::kNatural);

// The endpoint-first fixed-B rule; never overflows. Throws ConfigError when
// T is too small for B strictly increasing endpoints.
BatchSchedule fixed_schedule_refined(std::int64_t T, int B, const KernelClassSpec& kc,
                                     LogBase base = LogBase::kNatural);

// Reference times T_1..T_B used to classify realized batches; T_0 = 0
// implicit, T_B = T.
struct ReferenceEndpoints {
  std::int64_t T = 0;
  KernelClassSpec kernel_class;
  std::vector<std::int64_t> times;
};

ReferenceEndpoints reference_endpoints(std::int64_t T, int B, const KernelClassSpec& kc);

// Bad events over realized endpoints t_1..t_B against the references:
// A_1 = {t_1 >= T_1}, A_i = {t_{i-1} < T_{i-1} and t_i >= T_i}. Returns the
// 1-based indices where A_i holds; never empty for a valid endpoint list.
std::vector<int> classify_bad_batch(std::span<const std::int64_t> realized,
                                    const ReferenceEndpoints& refs);

std::string rule_name(ScheduleRule rule);

}  // namespace batchkb
