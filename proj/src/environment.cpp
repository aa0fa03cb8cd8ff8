#include "batchkb/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "batchkb/errors.hpp"
#include "batchkb/kernels.hpp"
#include "batchkb/rng.hpp"

namespace batchkb {

// ---------------------------------- Domain ----------------------------------

Domain Domain::grid(std::span<const double> low, std::span<const double> high,
                    int points_per_dim) {
  if (low.empty() || low.size() != high.size())
    throw ConfigError("domain grid: low/high must share a positive dimension");
  if (points_per_dim < 1) throw ConfigError("domain grid: points_per_dim must be >= 1");
  const int d = static_cast<int>(low.size());
  for (int j = 0; j < d; ++j)
    if (!(low[j] < high[j]) && points_per_dim > 1)
      throw ConfigError("domain grid: low must be strictly below high");
  std::size_t n = 1;
  for (int j = 0; j < d; ++j) n *= static_cast<std::size_t>(points_per_dim);
  Domain dom;
  dom.dim = d;
  dom.pts.resize(n * d);
  std::vector<int> idx(d, 0);
  for (std::size_t p = 0; p < n; ++p) {
    for (int j = 0; j < d; ++j) {
      const double frac = points_per_dim == 1
                              ? 0.5
                              : static_cast<double>(idx[j]) / (points_per_dim - 1);
      dom.pts[p * d + j] = low[j] + frac * (high[j] - low[j]);
    }
    for (int j = d - 1; j >= 0; --j) {  // axis 0 slowest
      if (++idx[j] < points_per_dim) break;
      idx[j] = 0;
    }
  }
  return dom;
}

Domain Domain::line(double low, double high, int n) {
  const double lo[1] = {low}, hi[1] = {high};
  return grid(lo, hi, n);
}

Domain Domain::from_points(int dim, std::vector<double> pts) {
  Domain dom;
  dom.dim = dim;
  dom.pts = std::move(pts);
  dom.validate();
  return dom;
}

int Domain::find(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim)) return -1;
  for (std::size_t i = 0; i < size(); ++i)
    if (std::equal(x.begin(), x.end(), point(i).begin())) return static_cast<int>(i);
  return -1;
}

void Domain::validate() const {
  if (dim < 1 || pts.empty() || pts.size() % static_cast<std::size_t>(dim) != 0)
    throw InputError("domain: need a nonempty point list of consistent dimension");
  std::vector<std::size_t> order(size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(point(a).begin(), point(a).end(),
                                        point(b).begin(), point(b).end());
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto a = point(order[i - 1]), b = point(order[i]);
    if (std::equal(a.begin(), a.end(), b.begin()))
      throw InputError("domain: duplicate points");
  }
}

// -------------------------------- Environment -------------------------------

Environment::Environment(const Domain& domain, std::vector<double> truth,
                         double sigma, std::uint64_t seed, std::int64_t horizon)
    : domain_(&domain), truth_(std::move(truth)), sigma_(sigma), seed_(seed),
      horizon_(horizon) {
  if (truth_.size() != domain.size())
    throw InputError("environment: truth must give one value per domain point");
  if (sigma < 0.0) throw ConfigError("environment: sigma must be >= 0");
  if (horizon < 1) throw ConfigError("environment: horizon must be >= 1");
}

double Environment::noise(std::int64_t t) const {
  if (hook_) return hook_(t);
  if (sigma_ == 0.0) return 0.0;
  return sigma_ * rng::gaussian(seed_, rng::kNoiseStream, static_cast<std::uint64_t>(t));
}

void Environment::query(std::int64_t t, int x_index) {
  if (x_index < 0 || static_cast<std::size_t>(x_index) >= domain_->size())
    throw InputError("query: point outside the domain");
  if (t < 1 || t > horizon_)
    throw InputError("query: time index " + std::to_string(t) + " outside [1, T]");
  if (!used_.insert(t).second)
    throw InputError("query: time index " + std::to_string(t) + " already used");
  pending_.push_back({t, x_index, truth_[x_index] + noise(t)});
}

std::vector<Observation> Environment::close_batch() {
  std::vector<Observation> out;
  out.swap(pending_);
  std::sort(out.begin(), out.end(),
            [](const Observation& a, const Observation& b) { return a.t < b.t; });
  return out;
}

// ------------------------------ PerturbationSet -----------------------------

double PerturbationSet::dist(std::span<const double> a,
                             std::span<const double> b) const {
  if (distance) return distance(a, b);
  return std::sqrt(squared_distance(a, b));
}

std::vector<int> perturbation_neighborhood(const PerturbationSet& ps,
                                           const Domain& domain, int x_index) {
  if (x_index < 0 || static_cast<std::size_t>(x_index) >= domain.size())
    throw InputError("perturbation_neighborhood: point outside the domain");
  if (ps.xi < 0.0) throw ConfigError("perturbation set: xi must be >= 0");
  std::vector<int> out;
  const auto x = domain.point(x_index);
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (ps.dist(x, domain.point(i)) <= ps.xi) out.push_back(static_cast<int>(i));
  return out;
}

double robust_value(const Domain& domain, const PerturbationSet& ps,
                    std::span<const double> f, int x_index) {
  double best = std::numeric_limits<double>::infinity();
  for (int i : perturbation_neighborhood(ps, domain, x_index))
    best = std::min(best, f[i]);
  return best;
}

std::vector<double> robust_values(const Domain& domain, const PerturbationSet& ps,
                                  std::span<const double> f) {
  std::vector<double> out(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i)
    out[i] = robust_value(domain, ps, f, static_cast<int>(i));
  return out;
}

}  // namespace batchkb
