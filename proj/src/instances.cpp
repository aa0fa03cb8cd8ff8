#include "batchkb/instances.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "batchkb/errors.hpp"
#include "batchkb/rng.hpp"

namespace batchkb {

// --------------------------------- GP draws ---------------------------------

GPSampler::GPSampler(const Domain& domain, const KernelSpec& kernel)
    : spec_(kernel) {
  spec_.validate();
  domain.validate();
  if (domain.size() > 10000)
    throw ConfigError("gp sampler: dense factorization capped at 10^4 points");
  Eigen::MatrixXd K = gram_matrix(spec_, domain.dim, domain.pts);
  K.diagonal().array() += kJitter;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gp sampler: domain covariance factorization failed; "
                         "a larger jitter may be needed");
  chol_ = llt.matrixL();
}

GPSampleInstance GPSampler::sample(std::uint64_t seed) const {
  const Eigen::Index n = chol_.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i)
    z[i] = rng::gaussian(seed, rng::kInstanceStream, static_cast<std::uint64_t>(i));
  Eigen::VectorXd v = chol_ * z;
  GPSampleInstance inst;
  inst.kernel = spec_;
  inst.seed = seed;
  inst.values.assign(v.data(), v.data() + n);
  return inst;
}

GPSampleInstance sample_gp_function(const Domain& domain, const KernelSpec& kernel,
                                    std::uint64_t seed) {
  return GPSampler(domain, kernel).sample(seed);
}

// -------------------------------- hard bumps --------------------------------

double bump_value(const BumpCell& cell, double epsilon, std::span<const double> x) {
  double r2 = 0.0;
  for (std::size_t j = 0; j < cell.center.size(); ++j) {
    const double d = x[j] - cell.center[j];
    r2 += d * d;
  }
  const double u2 = r2 / (cell.radius * cell.radius);
  if (u2 >= 1.0) return 0.0;
  return 2.0 * epsilon * std::exp(1.0 - 1.0 / (1.0 - u2));
}

FamilyCheck verify_hard_family(const Domain& domain, const HardInstanceFamily& fam) {
  FamilyCheck c;
  const double peak = fam.peak();
  const double tol = 1e-12;

  c.value_range = true;
  for (std::size_t m = 0; m < fam.M && c.value_range; ++m)
    for (double v : fam.values[m])
      if (v < -peak - tol || v > peak + tol) {
        c.value_range = false;
        c.detail = "value range: member " + std::to_string(m) + " leaves [-2e, 2e]";
        break;
      }

  c.peak_at_center = true;
  for (std::size_t m = 0; m < fam.M; ++m) {
    if (std::abs(bump_value(fam.cells[m], fam.epsilon, fam.cells[m].center) - peak) > tol) {
      c.peak_at_center = false;
      c.detail = "peak: member " + std::to_string(m) + " does not attain 2e at its center";
      break;
    }
    for (double v : fam.values[m])
      if (v > peak + tol) {
        c.peak_at_center = false;
        c.detail = "peak: member " + std::to_string(m) + " exceeds 2e on the grid";
        break;
      }
  }

  c.eps_disjoint = true;
  for (std::size_t p = 0; p < domain.size() && c.eps_disjoint; ++p) {
    int count = 0;
    for (std::size_t m = 0; m < fam.M; ++m)
      if (fam.values[m][p] > fam.epsilon) ++count;
    if (count > 1) {
      c.eps_disjoint = false;
      c.detail = "eps-optimality: point " + std::to_string(p) +
                 " clears the bar for " + std::to_string(count) + " members";
    }
  }
  return c;
}

HardInstanceFamily make_hard_family(const Domain& domain, std::size_t M,
                                    double epsilon) {
  domain.validate();
  if (M < 1) throw ConfigError("hard family: M must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("hard family: epsilon must be > 0");
  const int d = domain.dim;

  // m cells per axis with m^d = M.
  const std::size_t per_axis = static_cast<std::size_t>(
      std::llround(std::pow(static_cast<double>(M), 1.0 / d)));
  std::size_t check = 1;
  for (int j = 0; j < d; ++j) check *= per_axis;
  if (check != M)
    throw ConfigError("hard family: M=" + std::to_string(M) +
                      " is not a perfect power compatible with dimension " +
                      std::to_string(d));

  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < domain.size(); ++i)
    for (int j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], domain.point(i)[j]);
      hi[j] = std::max(hi[j], domain.point(i)[j]);
    }

  double min_halfwidth = std::numeric_limits<double>::infinity();
  std::vector<double> width(d);
  for (int j = 0; j < d; ++j) {
    width[j] = (hi[j] - lo[j]) / static_cast<double>(per_axis);
    min_halfwidth = std::min(min_halfwidth, width[j] / 2.0);
  }
  if (!(min_halfwidth > 0.0))
    throw ConfigError("hard family: degenerate bounding box");

  HardInstanceFamily fam;
  fam.M = M;
  fam.epsilon = epsilon;
  fam.cells.resize(M);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t m = 0; m < M; ++m) {
    BumpCell& cell = fam.cells[m];
    cell.center.resize(d);
    for (int j = 0; j < d; ++j)
      cell.center[j] = lo[j] + (static_cast<double>(idx[j]) + 0.5) * width[j];
    cell.radius = 0.9 * min_halfwidth;  // support strictly inside the cell
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < per_axis) break;
      idx[j] = 0;
    }
  }

  fam.values.assign(M, std::vector<double>(domain.size()));
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t p = 0; p < domain.size(); ++p)
      fam.values[m][p] = bump_value(fam.cells[m], epsilon, domain.point(p));

  const FamilyCheck c = verify_hard_family(domain, fam);
  if (!c.all()) throw ConfigError("hard family construction failed: " + c.detail);
  return fam;
}

std::vector<HardInstanceFamily> make_family_sequence(
    const Domain& domain, std::span<const double> epsilons,
    std::span<const std::size_t> Ms) {
  if (epsilons.size() != Ms.size() || epsilons.empty())
    throw ConfigError("family sequence: need matching nonempty epsilon and M lists");
  std::vector<HardInstanceFamily> out;
  out.reserve(epsilons.size());
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    try {
      out.push_back(make_hard_family(domain, Ms[i], epsilons[i]));
    } catch (const ConfigError& e) {
      throw ConfigError("family " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace batchkb
