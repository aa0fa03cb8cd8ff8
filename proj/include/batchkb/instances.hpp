#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "batchkb/environment.hpp"
#include "batchkb/kernels.hpp"

namespace batchkb {

// One joint draw from N(0, K_domain + jitter*I), deterministic in the seed.
struct GPSampleInstance {
  KernelSpec kernel;
  std::uint64_t seed = 0;
  std::vector<double> values;
};

// Holds the domain factorization so repeated draws cost one mat-vec each.
class GPSampler {
 public:
  static constexpr double kJitter = 1e-8;

  GPSampler(const Domain& domain, const KernelSpec& kernel);
  GPSampleInstance sample(std::uint64_t seed) const;

 private:
  KernelSpec spec_;
  Eigen::MatrixXd chol_;  // lower factor
};

GPSampleInstance sample_gp_function(const Domain& domain, const KernelSpec& kernel,
                                    std::uint64_t seed);

// One compactly supported radial bump per cell of a regular tiling of the
// domain's bounding box, peak 2*epsilon at the cell center, support strictly
// inside the cell. Any point can then clear the epsilon-optimality bar
// (value > epsilon) for at most one member.
struct BumpCell {
  std::vector<double> center;
  double radius = 0.0;
};

struct HardInstanceFamily {
  std::size_t M = 0;
  double epsilon = 0.0;
  std::vector<BumpCell> cells;
  std::vector<std::vector<double>> values;  // per member, per domain point

  double peak() const { return 2.0 * epsilon; }
};

// Analytic bump evaluation (before restriction to the grid).
double bump_value(const BumpCell& cell, double epsilon, std::span<const double> x);

struct FamilyCheck {
  bool value_range = false;     // every value within [-2e, 2e]
  bool peak_at_center = false;  // analytic max 2e at the cell center
  bool eps_disjoint = false;    // each point eps-optimal for <= 1 member
  std::string detail;

  bool all() const { return value_range && peak_at_center && eps_disjoint; }
};

FamilyCheck verify_hard_family(const Domain& domain, const HardInstanceFamily& fam);

// Builds and brute-force-verifies the family; throws ConfigError naming the
// violated property on failure. M must be a perfect d-th power.
HardInstanceFamily make_hard_family(const Domain& domain, std::size_t M,
                                    double epsilon);

// B independent families, one per (epsilon, M) pair.
std::vector<HardInstanceFamily> make_family_sequence(
    const Domain& domain, std::span<const double> epsilons,
    std::span<const std::size_t> Ms);

}  // namespace batchkb
