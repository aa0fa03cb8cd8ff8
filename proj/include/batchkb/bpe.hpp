#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "batchkb/environment.hpp"
#include "batchkb/gp.hpp"
#include "batchkb/metrics.hpp"
#include "batchkb/schedules.hpp"

namespace batchkb {

// Width multiplier for the confidence bounds. The theoretical value folds
// the union bound over all |X| points and B batches into one beta computed
// per run; the fixed mode is the practical constant.
struct ConfidenceParams {
  enum class BetaMode { kTheoretical, kFixed };

  double psi = 1.0;
  double delta = 0.1;
  BetaMode mode = BetaMode::kFixed;
  double fixed_beta = 2.0;

  double beta(std::size_t domain_size, int num_batches) const;
};

struct BatchStats {
  int index = 0;  // 1-based
  std::int64_t size = 0;
  double beta = 0.0;
  double gamma_hat = 0.0;           // info gain of this batch's samples (sigma^2 = lambda)
  double sum_step_variance = 0.0;   // sum of sigma^2_{j-1}(x_j) over the batch
  double max_survivor_sigma = 0.0;  // max posterior sigma over the next sampling pool
  bool bounds_valid = false;        // truth within [LCB, UCB] on the scanned set
  std::size_t active_before = 0;
  std::size_t active_after = 0;
};

struct RunResult {
  RegretTrace trace;
  std::vector<int> queried;                  // domain index queried at each step
  std::vector<int> charged;                  // regret-bearing index at each step
  std::vector<std::vector<int>> active_sets; // X_{i+1} after each batch
  std::vector<BatchStats> batches;
  bool all_bounds_valid = true;
  double beta = 0.0;
  int reported_index = -1;                   // last charged point
  double reported_simple_regret = 0.0;
};

struct RunOptions {
  double lambda = 1e-4;
  // Also compute/check confidence bounds over the whole domain, not just the
  // scanned set (diagnostic; changes no decision).
  bool whole_domain_bounds = false;
  // Keep per-batch UCB/LCB over the scanned set in the result.
  bool record_bounds = false;
};

// Survivors of the elimination rule: keep x with ucb(x) >= max lcb. Arrays
// are aligned with `active`; the result preserves order and is never empty.
std::vector<int> eliminate(std::span<const int> active, std::span<const double> ucb,
                           std::span<const double> lcb);

// Batched pure exploration: per batch, repeat max-variance sampling over the
// active set, observe everything at the batch close, then eliminate points
// whose UCB falls below the best LCB.
RunResult run_bpe(Environment& env, const KernelSpec& kernel,
                  const BatchSchedule& schedule, const ConfidenceParams& conf,
                  const RunOptions& opts);

// Per-batch bounds captured when RunOptions::record_bounds is set.
struct RecordedBounds {
  std::vector<std::vector<int>> points;   // scanned set per batch
  std::vector<std::vector<double>> ucb;
  std::vector<std::vector<double>> lcb;
};

RunResult run_bpe(Environment& env, const KernelSpec& kernel,
                  const BatchSchedule& schedule, const ConfidenceParams& conf,
                  const RunOptions& opts, RecordedBounds* recorded);

}  // namespace batchkb
