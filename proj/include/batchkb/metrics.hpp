#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace batchkb {

struct StepRecord {
  std::int64_t t = 0;
  int batch_index = 0;  // 1-based
  int x_index = 0;      // the regret-bearing point
  double inst_regret = 0.0;
  double cum_regret = 0.0;
};

// Per-step regret with per-batch and cumulative aggregates. Instantaneous
// regret must be nonnegative; values above -1e-9 are treated as round-off
// and clamped to zero.
class RegretTrace {
 public:
  RegretTrace() = default;
  explicit RegretTrace(std::vector<std::int64_t> batch_endpoints);

  void accumulate(std::int64_t t, int x_index, double r);

  const std::vector<StepRecord>& steps() const { return steps_; }
  const std::vector<std::int64_t>& endpoints() const { return endpoints_; }
  std::int64_t horizon() const { return endpoints_.empty() ? 0 : endpoints_.back(); }
  double total() const { return total_; }
  double batch_regret(int i) const { return per_batch_.at(i - 1); }  // 1-based
  double cumulative_at(std::int64_t t) const;

  void set_reported(int x_index, double simple_regret);
  int reported_index() const { return reported_index_; }
  double simple_regret() const { return simple_regret_; }

 private:
  std::vector<StepRecord> steps_;
  std::vector<std::int64_t> endpoints_;
  std::vector<double> per_batch_;
  double total_ = 0.0;
  int reported_index_ = -1;
  double simple_regret_ = 0.0;
};

struct AggregateRow {
  std::int64_t checkpoint = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  int n_trials = 0;
};

// Mean and standard error of cumulative regret at each checkpoint. All
// traces must share the horizon.
std::vector<AggregateRow> aggregate_trials(std::span<const RegretTrace> traces,
                                           std::span<const std::int64_t> checkpoints);

}  // namespace batchkb
