#pragma once

#include <Eigen/Dense>
#include <span>

namespace batchkb {

enum class KernelFamily { kSquaredExponential, kMatern };

// Normalized stationary kernel: k(x,x) = 1, k(x,x') in (0,1]. Matern is
// restricted to the half-integer orders with closed forms.
struct KernelSpec {
  KernelFamily family = KernelFamily::kSquaredExponential;
  double lengthscale = 1.0;
  double nu = 1.5;  // Matern only; one of {0.5, 1.5, 2.5}

  void validate() const;  // throws ConfigError
};

// k as a function of the Euclidean distance r = ||x - x'||.
double kernel_from_distance(const KernelSpec& spec, double r);

double squared_distance(std::span<const double> x, std::span<const double> y);

// Throws InputError on dimension mismatch.
double eval_kernel(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y);

// n x n symmetric matrix with unit diagonal over n points stored row-wise in
// `points` (n*dim values). Throws InputError on an empty list or when the
// flat length is not a multiple of dim.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, int dim,
                            std::span<const double> points);

}  // namespace batchkb
