#pragma once

#include <optional>
#include <span>
#include <vector>

#include "batchkb/bpe.hpp"
#include "batchkb/environment.hpp"

namespace batchkb {

struct RobustConfig {
  PerturbationSet perturbation;
  bool pruned_exploration = false;  // drop provably non-minimizing perturbations
};

// Neighborhoods are consulted every sampling step and every elimination, so
// they are computed once per (domain, xi) and kept as index lists. The
// reverse lists support the regret charging rule under a possibly
// asymmetric distance.
class NeighborhoodTable {
 public:
  NeighborhoodTable(const Domain& domain, const PerturbationSet& ps);
  std::span<const int> of(int x) const { return fwd_[x]; }
  std::span<const int> reverse_of(int y) const { return rev_[y]; }
  std::size_t domain_size() const { return fwd_.size(); }

 private:
  std::vector<std::vector<int>> fwd_, rev_;
};

// UCB/LCB over the subset of the domain scanned in some batch.
struct BoundsMap {
  std::vector<double> ucb, lcb;  // domain-indexed
  std::vector<char> covered;

  static BoundsMap from(std::size_t domain_size, std::span<const int> points,
                        std::span<const double> ucb, std::span<const double> lcb);
};

// Sampling pool for one batch: the union of active-set neighborhoods, in
// domain order. With pruning, a perturbed point is dropped for a given x
// when its previous LCB already exceeds the smallest previous UCB over
// x's neighborhood (it then cannot be x's worst case); minimizers always
// survive. The first batch is always unpruned.
std::vector<int> build_exploration_set(std::span<const int> active,
                                       const NeighborhoodTable& nbt,
                                       const std::optional<BoundsMap>& prev,
                                       bool pruned);

// r_xi(x) = robust_value(x_star) - robust_value(x). Throws InputError when
// x_star is not a robust maximizer.
double xi_regret(const Domain& domain, const PerturbationSet& ps,
                 std::span<const double> f, int x_star, int x);

// The reported point after a completed run: the last regret-bearing choice.
int report_point(const RunResult& result);

// Robust-BPE: max-variance sampling over the inflated exploration set, and
// elimination by worst-case-over-neighborhood confidence bounds. The
// queried point is charged to itself when it is active, otherwise to the
// first active point whose neighborhood contains it.
RunResult run_robust_bpe(Environment& env, const KernelSpec& kernel,
                         const BatchSchedule& schedule, const ConfidenceParams& conf,
                         const RobustConfig& robust, const RunOptions& opts);

RunResult run_robust_bpe(Environment& env, const KernelSpec& kernel,
                         const BatchSchedule& schedule, const ConfidenceParams& conf,
                         const RobustConfig& robust, const RunOptions& opts,
                         RecordedBounds* recorded);

}  // namespace batchkb
