#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_set>
#include <vector>

namespace batchkb {

// Finite ordered domain; points stored row-wise. Order is the tie-break
// order everywhere downstream.
struct Domain {
  int dim = 0;
  std::vector<double> pts;

  std::size_t size() const { return dim == 0 ? 0 : pts.size() / dim; }
  std::span<const double> point(std::size_t i) const {
    return {pts.data() + i * dim, static_cast<std::size_t>(dim)};
  }

  // Regular grid with points_per_dim samples per axis, endpoints included.
  // Axis 0 varies slowest.
  static Domain grid(std::span<const double> low, std::span<const double> high,
                     int points_per_dim);
  static Domain line(double low, double high, int n);
  static Domain from_points(int dim, std::vector<double> pts);

  // Index of an exactly matching point, -1 if absent.
  int find(std::span<const double> x) const;

  void validate() const;  // nonempty, consistent dim, no duplicates
};

struct Observation {
  std::int64_t t = 0;
  int x_index = 0;
  double y = 0.0;
};

// Black-box oracle with batched feedback: query() draws noise keyed by the
// time index and buffers the response; nothing is revealed until
// close_batch(). Keying noise by t makes replays and paired schedule
// comparisons share draws.
class Environment {
 public:
  using NoiseFn = std::function<double(std::int64_t)>;

  Environment(const Domain& domain, std::vector<double> truth, double sigma,
              std::uint64_t seed, std::int64_t horizon);

  const Domain& domain() const { return *domain_; }
  std::span<const double> truth() const { return truth_; }
  double sigma() const { return sigma_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t horizon() const { return horizon_; }

  // Test hook replacing the z_t draw.
  void set_noise_hook(NoiseFn fn) { hook_ = std::move(fn); }

  void query(std::int64_t t, int x_index);
  std::vector<Observation> close_batch();

 private:
  double noise(std::int64_t t) const;

  const Domain* domain_;
  std::vector<double> truth_;
  double sigma_;
  std::uint64_t seed_;
  std::int64_t horizon_;
  std::vector<Observation> pending_;
  std::unordered_set<std::int64_t> used_;
  NoiseFn hook_;
};

// Perturbation budget: the neighborhood of x is every domain point within
// distance xi of x. The default distance is Euclidean; any symmetric-or-not
// distance function can be plugged in.
struct PerturbationSet {
  double xi = 0.0;
  std::function<double(std::span<const double>, std::span<const double>)> distance;

  double dist(std::span<const double> a, std::span<const double> b) const;
};

// Ascending domain indices within distance xi of x; always contains x when
// distance(x,x) = 0.
std::vector<int> perturbation_neighborhood(const PerturbationSet& ps,
                                           const Domain& domain, int x_index);

// min over the neighborhood of x of f.
double robust_value(const Domain& domain, const PerturbationSet& ps,
                    std::span<const double> f, int x_index);

// robust_value at every domain point.
std::vector<double> robust_values(const Domain& domain, const PerturbationSet& ps,
                                  std::span<const double> f);

}  // namespace batchkb
