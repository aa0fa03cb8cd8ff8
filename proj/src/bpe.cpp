#include "batchkb/bpe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "batchkb/errors.hpp"

namespace batchkb {

double ConfidenceParams::beta(std::size_t domain_size, int num_batches) const {
  if (mode == BetaMode::kFixed) {
    if (!(fixed_beta > 0.0)) throw ConfigError("confidence: fixed beta must be > 0");
    return fixed_beta;
  }
  if (!(psi > 0.0)) throw ConfigError("confidence: psi must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("confidence: delta must lie in (0, 1)");
  const double root =
      psi + std::sqrt(2.0 * std::log(static_cast<double>(domain_size) * num_batches / delta));
  return root * root;
}

std::vector<int> eliminate(std::span<const int> active, std::span<const double> ucb,
                           std::span<const double> lcb) {
  if (active.empty()) throw std::logic_error("eliminate: empty active set");
  double best_lcb = lcb[0];
  for (std::size_t i = 1; i < active.size(); ++i) best_lcb = std::max(best_lcb, lcb[i]);
  std::vector<int> out;
  for (std::size_t i = 0; i < active.size(); ++i)
    if (ucb[i] >= best_lcb) out.push_back(active[i]);
  if (out.empty())
    throw std::logic_error("eliminate: survivor set empty; bounds are inconsistent");
  return out;
}

namespace {

int argmax_index(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

bool bounds_cover_truth(std::span<const int> points, std::span<const double> ucb,
                        std::span<const double> lcb, std::span<const double> truth) {
  constexpr double tol = 1e-12;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double f = truth[points[i]];
    if (f < lcb[i] - tol || f > ucb[i] + tol) return false;
  }
  return true;
}

}  // namespace

RunResult run_bpe(Environment& env, const KernelSpec& kernel,
                  const BatchSchedule& schedule, const ConfidenceParams& conf,
                  const RunOptions& opts) {
  return run_bpe(env, kernel, schedule, conf, opts, nullptr);
}

RunResult run_bpe(Environment& env, const KernelSpec& kernel,
                  const BatchSchedule& schedule, const ConfidenceParams& conf,
                  const RunOptions& opts, RecordedBounds* recorded) {
  const Domain& domain = env.domain();
  if (domain.size() == 0) throw ConfigError("run: empty domain");
  if (schedule.T != env.horizon())
    throw ConfigError("run: schedule horizon does not match the environment");
  if (!(opts.lambda > 0.0)) throw ConfigError("run: lambda must be > 0");

  const int B = schedule.batches();
  const std::span<const double> truth = env.truth();
  const double fstar = truth[argmax_index(truth)];
  const double beta = conf.beta(domain.size(), B);
  const double sqrt_beta = std::sqrt(beta);

  KernelOracle oracle(kernel, domain.dim, domain.pts);

  RunResult res;
  res.beta = beta;
  res.trace = RegretTrace(schedule.endpoints);
  res.queried.reserve(schedule.T);
  res.charged.reserve(schedule.T);

  std::vector<int> active(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) active[i] = static_cast<int>(i);

  std::int64_t t = 0;
  for (int i = 1; i <= B; ++i) {
    const std::int64_t N = schedule.sizes[i - 1];
    BatchPosterior batch(oracle, active, opts.lambda, static_cast<std::size_t>(N));

    for (std::int64_t j = 0; j < N; ++j) {
      const std::size_t pos = batch.argmax_variance();
      const int x = active[pos];
      ++t;
      env.query(t, x);
      batch.add(pos);
      res.queried.push_back(x);
      res.charged.push_back(x);
      res.trace.accumulate(t, x, fstar - truth[x]);
    }

    const std::vector<Observation> obs = env.close_batch();
    std::vector<double> y(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) y[k] = obs[k].y;
    const std::vector<double> mu = batch.posterior_mean(y);

    const std::size_t n_active = active.size();
    std::vector<double> ucb(n_active), lcb(n_active);
    for (std::size_t p = 0; p < n_active; ++p) {
      const double s = std::sqrt(batch.variance(p));
      ucb[p] = mu[p] + sqrt_beta * s;
      lcb[p] = mu[p] - sqrt_beta * s;
    }

    BatchStats stats;
    stats.index = i;
    stats.size = N;
    stats.beta = beta;
    stats.active_before = n_active;
    stats.sum_step_variance = batch.sum_selected_variance();
    {
      std::vector<double> sel_pts;
      sel_pts.reserve(batch.selected().size() * domain.dim);
      for (int q : batch.selected()) {
        const auto pt = domain.point(q);
        sel_pts.insert(sel_pts.end(), pt.begin(), pt.end());
      }
      stats.gamma_hat = empirical_info_gain(kernel, domain.dim, opts.lambda, sel_pts);
    }
    stats.bounds_valid = bounds_cover_truth(active, ucb, lcb, truth);
    if (opts.whole_domain_bounds && stats.bounds_valid) {
      // One full-domain scan; decisions never depend on it.
      std::vector<int> all(domain.size());
      for (std::size_t k = 0; k < domain.size(); ++k) all[k] = static_cast<int>(k);
      BatchPosterior wide(oracle, all, opts.lambda, static_cast<std::size_t>(N));
      for (int q : batch.selected()) wide.add(static_cast<std::size_t>(q));
      const std::vector<double> wmu = wide.posterior_mean(y);
      std::vector<double> wucb(all.size()), wlcb(all.size());
      for (std::size_t p = 0; p < all.size(); ++p) {
        const double s = std::sqrt(wide.variance(p));
        wucb[p] = wmu[p] + sqrt_beta * s;
        wlcb[p] = wmu[p] - sqrt_beta * s;
      }
      stats.bounds_valid = bounds_cover_truth(all, wucb, wlcb, truth);
    }
    res.all_bounds_valid = res.all_bounds_valid && stats.bounds_valid;

    if (recorded) {
      recorded->points.push_back(active);
      recorded->ucb.push_back(ucb);
      recorded->lcb.push_back(lcb);
    }

    std::vector<int> next = eliminate(active, ucb, lcb);
    stats.active_after = next.size();
    {
      std::vector<char> in_next(domain.size(), 0);
      for (int q : next) in_next[q] = 1;
      double max_var = 0.0;
      for (std::size_t p = 0; p < n_active; ++p)
        if (in_next[active[p]]) max_var = std::max(max_var, batch.variance(p));
      stats.max_survivor_sigma = std::sqrt(max_var);
    }
    res.batches.push_back(std::move(stats));
    res.active_sets.push_back(next);
    active = std::move(next);
  }

  res.reported_index = res.charged.back();
  res.reported_simple_regret = fstar - truth[res.reported_index];
  res.trace.set_reported(res.reported_index, res.reported_simple_regret);
  return res;
}

}  // namespace batchkb
