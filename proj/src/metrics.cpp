#include "batchkb/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "batchkb/errors.hpp"

namespace batchkb {

namespace {
constexpr double kRegretSlack = -1e-9;
}

RegretTrace::RegretTrace(std::vector<std::int64_t> batch_endpoints)
    : endpoints_(std::move(batch_endpoints)), per_batch_(endpoints_.size(), 0.0) {
  std::int64_t prev = 0;
  for (std::int64_t e : endpoints_) {
    if (e <= prev) throw InputError("regret trace: endpoints must be strictly increasing");
    prev = e;
  }
}

void RegretTrace::accumulate(std::int64_t t, int x_index, double r) {
  if (t != static_cast<std::int64_t>(steps_.size()) + 1)
    throw std::logic_error("regret trace: steps must arrive consecutively (got t=" +
                           std::to_string(t) + ")");
  if (t > horizon())
    throw std::logic_error("regret trace: step beyond the final endpoint");
  if (r < kRegretSlack)
    throw std::logic_error("regret trace: negative instantaneous regret " +
                           std::to_string(r));
  if (r < 0.0) r = 0.0;
  int batch = 0;
  while (endpoints_[batch] < t) ++batch;
  total_ += r;
  per_batch_[batch] += r;
  steps_.push_back({t, batch + 1, x_index, r, total_});
}

double RegretTrace::cumulative_at(std::int64_t t) const {
  if (t < 1 || t > static_cast<std::int64_t>(steps_.size()))
    throw InputError("regret trace: checkpoint outside the recorded range");
  return steps_[t - 1].cum_regret;
}

void RegretTrace::set_reported(int x_index, double simple_regret) {
  reported_index_ = x_index;
  simple_regret_ = simple_regret < 0.0 && simple_regret > kRegretSlack ? 0.0 : simple_regret;
}

std::vector<AggregateRow> aggregate_trials(std::span<const RegretTrace> traces,
                                           std::span<const std::int64_t> checkpoints) {
  if (traces.empty()) throw InputError("aggregate: need at least one trace");
  const std::int64_t T = traces.front().horizon();
  for (const RegretTrace& tr : traces)
    if (tr.horizon() != T) throw InputError("aggregate: traces must share the horizon");
  std::vector<AggregateRow> rows;
  rows.reserve(checkpoints.size());
  const int n = static_cast<int>(traces.size());
  for (std::int64_t cp : checkpoints) {
    double mean = 0.0;
    for (const RegretTrace& tr : traces) mean += tr.cumulative_at(cp);
    mean /= n;
    double ss = 0.0;
    for (const RegretTrace& tr : traces) {
      const double d = tr.cumulative_at(cp) - mean;
      ss += d * d;
    }
    const double se = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    rows.push_back({cp, mean, se, n});
  }
  return rows;
}

}  // namespace batchkb
