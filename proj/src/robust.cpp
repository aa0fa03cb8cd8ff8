#include "batchkb/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "batchkb/errors.hpp"

namespace batchkb {

NeighborhoodTable::NeighborhoodTable(const Domain& domain, const PerturbationSet& ps) {
  const std::size_t n = domain.size();
  fwd_.resize(n);
  rev_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    fwd_[x] = perturbation_neighborhood(ps, domain, static_cast<int>(x));
    for (int y : fwd_[x]) rev_[y].push_back(static_cast<int>(x));
  }
}

BoundsMap BoundsMap::from(std::size_t domain_size, std::span<const int> points,
                          std::span<const double> ucb, std::span<const double> lcb) {
  BoundsMap m;
  m.ucb.assign(domain_size, 0.0);
  m.lcb.assign(domain_size, 0.0);
  m.covered.assign(domain_size, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    m.ucb[points[i]] = ucb[i];
    m.lcb[points[i]] = lcb[i];
    m.covered[points[i]] = 1;
  }
  return m;
}

std::vector<int> build_exploration_set(std::span<const int> active,
                                       const NeighborhoodTable& nbt,
                                       const std::optional<BoundsMap>& prev,
                                       bool pruned) {
  if (active.empty()) throw std::logic_error("exploration set: empty active set");
  std::vector<char> keep(nbt.domain_size(), 0);
  if (!pruned || !prev) {
    if (pruned && !prev)
      throw std::logic_error("exploration set: pruning needs bounds from the previous batch");
    for (int x : active)
      for (int y : nbt.of(x)) keep[y] = 1;
  } else {
    for (int x : active) {
      double min_ucb = std::numeric_limits<double>::infinity();
      for (int y : nbt.of(x)) {
        if (!prev->covered[y])
          throw std::logic_error("exploration set: previous bounds do not cover the neighborhood");
        min_ucb = std::min(min_ucb, prev->ucb[y]);
      }
      for (int y : nbt.of(x))
        if (prev->lcb[y] <= min_ucb) keep[y] = 1;
    }
  }
  std::vector<int> out;
  for (std::size_t y = 0; y < keep.size(); ++y)
    if (keep[y]) out.push_back(static_cast<int>(y));
  return out;
}

double xi_regret(const Domain& domain, const PerturbationSet& ps,
                 std::span<const double> f, int x_star, int x) {
  const std::vector<double> rv = robust_values(domain, ps, f);
  const double best = *std::max_element(rv.begin(), rv.end());
  if (rv[x_star] < best)
    throw InputError("xi_regret: x_star is not a xi-robust maximizer");
  return rv[x_star] - rv[x];
}

int report_point(const RunResult& result) {
  if (result.charged.empty()) throw std::logic_error("report_point: empty trace");
  return result.charged.back();
}

namespace {

bool bounds_cover_truth(std::span<const int> points, std::span<const double> ucb,
                        std::span<const double> lcb, std::span<const double> truth) {
  constexpr double tol = 1e-12;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double f = truth[points[i]];
    if (f < lcb[i] - tol || f > ucb[i] + tol) return false;
  }
  return true;
}

// The first active point (domain order) whose neighborhood contains y.
int charge_for(int y, std::span<const char> active_mask, const NeighborhoodTable& nbt) {
  if (active_mask[y]) return y;
  for (int x : nbt.reverse_of(y))
    if (active_mask[x]) return x;
  throw std::logic_error("charge: queried point not covered by any active neighborhood");
}

}  // namespace

RunResult run_robust_bpe(Environment& env, const KernelSpec& kernel,
                         const BatchSchedule& schedule, const ConfidenceParams& conf,
                         const RobustConfig& robust, const RunOptions& opts) {
  return run_robust_bpe(env, kernel, schedule, conf, robust, opts, nullptr);
}

RunResult run_robust_bpe(Environment& env, const KernelSpec& kernel,
                         const BatchSchedule& schedule, const ConfidenceParams& conf,
                         const RobustConfig& robust, const RunOptions& opts,
                         RecordedBounds* recorded) {
  const Domain& domain = env.domain();
  if (domain.size() == 0) throw ConfigError("run: empty domain");
  if (schedule.T != env.horizon())
    throw ConfigError("run: schedule horizon does not match the environment");
  if (!(opts.lambda > 0.0)) throw ConfigError("run: lambda must be > 0");

  const int B = schedule.batches();
  const std::span<const double> truth = env.truth();
  const NeighborhoodTable nbt(domain, robust.perturbation);
  const std::vector<double> rvals = robust_values(domain, robust.perturbation, truth);
  const double rstar = *std::max_element(rvals.begin(), rvals.end());
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
  std::vector<char> active_mask(domain.size(), 1);
  std::optional<BoundsMap> prev_bounds;

  std::int64_t t = 0;
  for (int i = 1; i <= B; ++i) {
    const std::int64_t N = schedule.sizes[i - 1];
    // Bounds are computed over the full inflated set; pruning only narrows
    // the sampling pool.
    const std::vector<int> expl = build_exploration_set(active, nbt, std::nullopt, false);
    const bool prune = robust.pruned_exploration && i > 1;
    std::vector<char> pool;
    if (prune) {
      const std::vector<int> pruned = build_exploration_set(active, nbt, prev_bounds, true);
      pool.assign(domain.size(), 0);
      for (int y : pruned) pool[y] = 1;
    }
    BatchPosterior batch(oracle, expl, opts.lambda, static_cast<std::size_t>(N));
    std::vector<char> pool_pos;
    if (prune) {
      pool_pos.resize(expl.size());
      for (std::size_t p = 0; p < expl.size(); ++p) pool_pos[p] = pool[expl[p]];
    }

    for (std::int64_t j = 0; j < N; ++j) {
      const std::size_t pos =
          prune ? batch.argmax_variance(pool_pos) : batch.argmax_variance();
      const int x = expl[pos];
      ++t;
      env.query(t, x);
      batch.add(pos);
      const int ch = charge_for(x, active_mask, nbt);
      res.queried.push_back(x);
      res.charged.push_back(ch);
      res.trace.accumulate(t, ch, rstar - rvals[ch]);
    }

    const std::vector<Observation> obs = env.close_batch();
    std::vector<double> y(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) y[k] = obs[k].y;
    const std::vector<double> mu = batch.posterior_mean(y);

    std::vector<double> ucb(expl.size()), lcb(expl.size());
    for (std::size_t p = 0; p < expl.size(); ++p) {
      const double s = std::sqrt(batch.variance(p));
      ucb[p] = mu[p] + sqrt_beta * s;
      lcb[p] = mu[p] - sqrt_beta * s;
    }
    const BoundsMap bounds = BoundsMap::from(domain.size(), expl, ucb, lcb);

    // Worst-case bounds per active point, then the standard elimination rule
    // on those minima.
    std::vector<double> min_ucb(active.size()), min_lcb(active.size());
    for (std::size_t p = 0; p < active.size(); ++p) {
      double mu_ = std::numeric_limits<double>::infinity();
      double ml_ = std::numeric_limits<double>::infinity();
      for (int yix : nbt.of(active[p])) {
        if (!bounds.covered[yix])
          throw std::logic_error("robust elimination: bounds missing for a neighborhood point");
        mu_ = std::min(mu_, bounds.ucb[yix]);
        ml_ = std::min(ml_, bounds.lcb[yix]);
      }
      min_ucb[p] = mu_;
      min_lcb[p] = ml_;
    }

    BatchStats stats;
    stats.index = i;
    stats.size = N;
    stats.beta = beta;
    stats.active_before = active.size();
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
    stats.bounds_valid = bounds_cover_truth(expl, ucb, lcb, truth);
    res.all_bounds_valid = res.all_bounds_valid && stats.bounds_valid;

    if (recorded) {
      recorded->points.push_back(expl);
      recorded->ucb.push_back(ucb);
      recorded->lcb.push_back(lcb);
    }

    std::vector<int> next = eliminate(active, min_ucb, min_lcb);
    stats.active_after = next.size();
    std::fill(active_mask.begin(), active_mask.end(), 0);
    for (int x : next) active_mask[x] = 1;
    {
      // Variance diagnostic over the next sampling pool; the unpruned union
      // is the superset the uniform bound covers.
      const std::vector<int> next_expl =
          build_exploration_set(next, nbt, std::nullopt, false);
      std::vector<char> in_next(domain.size(), 0);
      for (int yix : next_expl) in_next[yix] = 1;
      double max_var = 0.0;
      for (std::size_t p = 0; p < expl.size(); ++p)
        if (in_next[expl[p]]) max_var = std::max(max_var, batch.variance(p));
      stats.max_survivor_sigma = std::sqrt(max_var);
    }
    res.batches.push_back(std::move(stats));
    res.active_sets.push_back(next);
    active = std::move(next);
    prev_bounds = bounds;
  }

  res.reported_index = res.charged.back();
  res.reported_simple_regret = rstar - rvals[res.reported_index];
  res.trace.set_reported(res.reported_index, res.reported_simple_regret);
  return res;
}

}  // namespace batchkb
