#pragma once

// Test-only reference implementations, deliberately independent of the
// incremental code paths they check: everything here is a from-scratch
// dense solve or a brute-force scan.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <span>
#include <vector>

#include "batchkb/kernels.hpp"

namespace batchkb::testing {

struct DenseGP {
  KernelSpec kernel;
  int dim;
  double lambda;
  std::vector<double> pts;  // flat

  std::size_t count() const { return dim == 0 ? 0 : pts.size() / dim; }

  void add(std::span<const double> x) { pts.insert(pts.end(), x.begin(), x.end()); }

  Eigen::VectorXd kvec(std::span<const double> x) const {
    const std::size_t n = count();
    Eigen::VectorXd k(n);
    for (std::size_t i = 0; i < n; ++i)
      k[i] = eval_kernel(kernel, {pts.data() + i * dim, static_cast<std::size_t>(dim)}, x);
    return k;
  }

  Eigen::MatrixXd system() const {
    Eigen::MatrixXd K = gram_matrix(kernel, dim, pts);
    K.diagonal().array() += lambda;
    return K;
  }

  double variance(std::span<const double> x) const {
    if (count() == 0) return 1.0;
    const Eigen::VectorXd k = kvec(x);
    const Eigen::VectorXd v = system().ldlt().solve(k);
    return 1.0 - k.dot(v);
  }

  double mean(std::span<const double> x, std::span<const double> y) const {
    if (count() == 0) return 0.0;
    const Eigen::VectorXd k = kvec(x);
    Eigen::VectorXd yv(count());
    for (std::size_t i = 0; i < count(); ++i) yv[i] = y[i];
    return k.dot(system().ldlt().solve(yv));
  }
};

inline double dense_info_gain(const KernelSpec& kernel, int dim, double sigma_sq,
                              std::span<const double> pts) {
  Eigen::MatrixXd M = gram_matrix(kernel, dim, pts) / sigma_sq;
  M.diagonal().array() += 1.0;
  return 0.5 * std::log(M.determinant());
}

}  // namespace batchkb::testing
