#include "batchkb/kernels.hpp"

#include <cmath>
#include <string>

#include "batchkb/errors.hpp"

namespace batchkb {

namespace {
constexpr double kSqrt3 = 1.7320508075688772935274463415059;
constexpr double kSqrt5 = 2.2360679774997896964091736687313;
}  // namespace

void KernelSpec::validate() const {
  if (!(lengthscale > 0.0))
    throw ConfigError("kernel lengthscale must be > 0");
  if (family == KernelFamily::kMatern) {
    if (nu != 0.5 && nu != 1.5 && nu != 2.5)
      throw ConfigError("Matern nu=" + std::to_string(nu) +
                        " unsupported; closed forms exist for nu in {0.5, 1.5, 2.5}");
  }
}

double kernel_from_distance(const KernelSpec& spec, double r) {
  const double l = spec.lengthscale;
  if (spec.family == KernelFamily::kSquaredExponential)
    return std::exp(-(r * r) / (2.0 * l * l));
  if (spec.nu == 0.5) return std::exp(-r / l);
  if (spec.nu == 1.5) {
    const double s = kSqrt3 * r / l;
    return (1.0 + s) * std::exp(-s);
  }
  if (spec.nu == 2.5) {
    const double s = kSqrt5 * r / l;
    return (1.0 + s + 5.0 * r * r / (3.0 * l * l)) * std::exp(-s);
  }
  throw ConfigError("Matern nu=" + std::to_string(spec.nu) +
                    " unsupported; closed forms exist for nu in {0.5, 1.5, 2.5}");
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double eval_kernel(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y) {
  if (x.size() != y.size() || x.empty())
    throw InputError("eval_kernel: points must share dimension d >= 1");
  return kernel_from_distance(spec, std::sqrt(squared_distance(x, y)));
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, int dim,
                            std::span<const double> points) {
  if (dim < 1) throw InputError("gram_matrix: dimension must be >= 1");
  if (points.empty() || points.size() % static_cast<std::size_t>(dim) != 0)
    throw InputError("gram_matrix: need a nonempty list of points with equal dimension");
  const Eigen::Index n = static_cast<Eigen::Index>(points.size()) / dim;
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    const std::span<const double> xi = points.subspan(i * dim, dim);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const std::span<const double> xj = points.subspan(j * dim, dim);
      const double k = kernel_from_distance(spec, std::sqrt(squared_distance(xi, xj)));
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

}  // namespace batchkb
