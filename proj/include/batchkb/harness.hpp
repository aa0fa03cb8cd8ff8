#pragma once

#include <string>
#include <vector>

#include "batchkb/config.hpp"
#include "batchkb/metrics.hpp"
#include "batchkb/robust.hpp"

namespace batchkb {

// Trial parallelism cap: BATCHKB_THREADS when set, hardware concurrency
// otherwise, never below 1.
int thread_cap();

struct ExperimentOutput {
  BatchSchedule schedule;
  std::vector<RunResult> runs;  // trial order
  std::vector<AggregateRow> aggregate;
  std::string provenance;  // single-line config JSON
};

// Runs n_trials seeded trials (trial j uses seed base_seed XOR j, j from 1),
// aggregates cumulative regret at the checkpoints, and writes trials.csv and
// aggregate.csv under output_dir when set. Deterministic end to end in
// (config, base_seed); the trial thread count never changes the output.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

struct CompareColumn {
  std::string label;
  int B = 0;
  BatchSchedule schedule;
  std::vector<AggregateRow> aggregate;
  std::vector<RunResult> runs;
};

struct CompareOutput {
  std::vector<CompareColumn> columns;
  std::string provenance;
};

// Runs every schedule in cfg.schedules on the same per-trial instances and
// noise streams (noise is keyed by t, so paired runs share draws), and
// writes comparison.csv mirroring the per-schedule table layout.
CompareOutput compare_schedules(const ExperimentConfig& cfg);

struct DiagnoseReport {
  std::vector<std::int64_t> realized;
  std::vector<std::int64_t> reference;
  std::vector<bool> flags;      // A_i per batch
  std::vector<int> bad_batches; // 1-based
};

// Evaluates the bad events of the realized endpoints against the reference
// endpoints for the same B.
DiagnoseReport diagnose_batches(const BatchSchedule& schedule,
                                const KernelClassSpec& kc);

// CSV helpers (also used by the CLI).
void write_trials_csv(const std::string& path, const std::string& provenance,
                      const std::vector<RunResult>& runs);
void write_aggregate_csv(const std::string& path, const std::string& provenance,
                         const std::vector<AggregateRow>& rows);
void write_compare_csv(const std::string& path, const CompareOutput& out,
                       const std::vector<std::int64_t>& checkpoints);

}  // namespace batchkb
