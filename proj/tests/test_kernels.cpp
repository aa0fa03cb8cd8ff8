#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "batchkb/errors.hpp"
#include "batchkb/kernels.hpp"
#include "batchkb/rng.hpp"
#include "doctest.h"

using namespace batchkb;

namespace {
const KernelSpec kSE{KernelFamily::kSquaredExponential, 0.5, 1.5};
const KernelSpec kMat15{KernelFamily::kMatern, 0.5, 1.5};
const KernelSpec kMat25{KernelFamily::kMatern, 0.5, 2.5};
}  // namespace

TEST_CASE("kernel point evaluations") {
  const double x[2] = {0.3, -0.4};
  CHECK(eval_kernel(kSE, x, x) == doctest::Approx(1.0));

  const double a[1] = {0.0}, b[1] = {0.5};
  CHECK(eval_kernel(kSE, a, b) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  // Matern 3/2 closed form (1 + sqrt(3) r/l) exp(-sqrt(3) r/l) at r = l
  const double s3 = std::sqrt(3.0);
  CHECK(eval_kernel(kMat15, a, b) == doctest::Approx((1 + s3) * std::exp(-s3)).epsilon(1e-9));
  const double s5 = std::sqrt(5.0);
  CHECK(eval_kernel(kMat25, a, b) ==
        doctest::Approx((1 + s5 + 5.0 / 3.0) * std::exp(-s5)).epsilon(1e-9));
  CHECK(eval_kernel({KernelFamily::kMatern, 0.5, 0.5}, a, b) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("unsupported nu is rejected with the supported set named") {
  const KernelSpec bad{KernelFamily::kMatern, 0.5, 2.0};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("{0.5, 1.5, 2.5}"), ConfigError);
  CHECK_THROWS_AS((KernelSpec{KernelFamily::kSquaredExponential, -1.0, 1.5}.validate()),
                  ConfigError);
}

TEST_CASE("eval_kernel rejects mismatched dimensions") {
  const double a[2] = {0, 0};
  const double b[1] = {0};
  CHECK_THROWS_AS(eval_kernel(kSE, a, b), InputError);
}

TEST_CASE("gram matrix basics") {
  const double one[1] = {0.7};
  auto g1 = gram_matrix(kSE, 1, one);
  CHECK(g1.rows() == 1);
  CHECK(g1(0, 0) == 1.0);

  const double dup[2] = {0.7, 0.7};
  auto g2 = gram_matrix(kSE, 1, dup);
  CHECK(g2(0, 1) == doctest::Approx(1.0));
  CHECK(g2(1, 0) == doctest::Approx(1.0));

  // three collinear points, spacing 0.5
  const double tri[3] = {0.0, 0.5, 1.0};
  auto g3 = gram_matrix(kSE, 1, tri);
  CHECK(g3(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  CHECK(g3(1, 2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  CHECK(g3(0, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
  for (int i = 0; i < 3; ++i) CHECK(g3(i, i) == 1.0);

  CHECK_THROWS_AS(gram_matrix(kSE, 2, std::span<const double>(tri, 3)), InputError);
}

TEST_CASE("symmetry is exact for random pairs") {
  for (int rep = 0; rep < 200; ++rep) {
    double x[3], y[3];
    for (int j = 0; j < 3; ++j) {
      x[j] = 5.0 * rng::gaussian(42, rng::kTestStream, rep * 6 + j);
      y[j] = 5.0 * rng::gaussian(42, rng::kTestStream, rep * 6 + 3 + j);
    }
    for (const KernelSpec& k : {kSE, kMat15, kMat25})
      CHECK(eval_kernel(k, x, y) == eval_kernel(k, y, x));
  }
}

TEST_CASE("gram matrices are PSD up to a 1e-10 jitter") {
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 2 + rep % 19;
    std::vector<double> pts(2 * n);
    for (int i = 0; i < 2 * n; ++i)
      pts[i] = 3.0 * rng::gaussian(7 + rep, rng::kTestStream, i);
    for (const KernelSpec& k : {kSE, kMat15, kMat25}) {
      Eigen::MatrixXd G = gram_matrix(k, 2, pts);
      G.diagonal().array() += 1e-10;
      Eigen::LLT<Eigen::MatrixXd> llt(G);
      CHECK(llt.info() == Eigen::Success);
    }
  }
}

TEST_CASE("kernels decay monotonically in distance") {
  std::vector<double> dists(60);
  for (std::size_t i = 0; i < dists.size(); ++i)
    dists[i] = std::abs(3.0 * rng::gaussian(3, rng::kTestStream, i));
  std::sort(dists.begin(), dists.end());
  for (const KernelSpec& k : {kSE, kMat15, kMat25}) {
    for (std::size_t i = 1; i < dists.size(); ++i) {
      CHECK(kernel_from_distance(k, dists[i]) <= kernel_from_distance(k, dists[i - 1]) + 1e-15);
    }
    CHECK(kernel_from_distance(k, 0.0) == 1.0);
    CHECK(kernel_from_distance(k, 100.0) >= 0.0);
    CHECK(kernel_from_distance(k, 0.1) <= 1.0);
  }
}
