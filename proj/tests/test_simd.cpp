#include <cmath>
#include <vector>

#include "batchkb/rng.hpp"
#include "batchkb/simd.hpp"
#include "doctest.h"

using namespace batchkb;

namespace {
std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng::gaussian(seed, rng::kTestStream, i);
  return v;
}
}  // namespace

TEST_CASE("every usable backend matches the scalar reference") {
  const auto& ref = simd::scalar_ops();
  for (const simd::Ops* ops : simd::usable_ops()) {
    CAPTURE(ops->name);
    for (std::size_t n : {1u, 3u, 7u, 16u, 33u, 257u}) {
      const auto a = random_vec(n, 11 * n);
      const auto b = random_vec(n, 13 * n + 1);
      const double got = ops->dot(a.data(), b.data(), n);
      const double want = ref.dot(a.data(), b.data(), n);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
    // mat_vec over a strided row-major block
    const std::size_t rows = 37, cols = 21, stride = 24;
    auto A = random_vec(rows * stride, 5);
    auto x = random_vec(cols, 6);
    std::vector<double> got(rows), want(rows);
    ops->mat_vec_rows(A.data(), rows, cols, stride, x.data(), got.data());
    ref.mat_vec_rows(A.data(), rows, cols, stride, x.data(), want.data());
    for (std::size_t r = 0; r < rows; ++r)
      CHECK(got[r] == doctest::Approx(want[r]).epsilon(1e-12));
    // fused append/downdate
    auto kcol = random_vec(rows, 7);
    auto w = random_vec(rows, 8);
    auto col_a = random_vec(rows * stride, 9);
    auto col_b = col_a;
    auto var_a = random_vec(rows, 10);
    auto var_b = var_a;
    ops->append_column(kcol.data(), w.data(), 0.37, col_a.data(), stride, var_a.data(), rows);
    ref.append_column(kcol.data(), w.data(), 0.37, col_b.data(), stride, var_b.data(), rows);
    for (std::size_t r = 0; r < rows; ++r) {
      CHECK(col_a[r * stride] == doctest::Approx(col_b[r * stride]).epsilon(1e-13));
      CHECK(var_a[r] == doctest::Approx(var_b[r]).epsilon(1e-12));
    }
  }
}

TEST_CASE("argmax picks the lowest index on ties in every backend") {
  for (const simd::Ops* ops : simd::usable_ops()) {
    CAPTURE(ops->name);
    std::vector<double> all_equal(19, 1.0);
    CHECK(ops->argmax(all_equal.data(), all_equal.size()) == 0);

    std::vector<double> v(33, 0.25);
    v[7] = 2.0;
    v[20] = 2.0;  // duplicate max later on
    CHECK(ops->argmax(v.data(), v.size()) == 7);

    v[2] = 3.0;
    CHECK(ops->argmax(v.data(), v.size()) == 2);

    for (std::size_t n : {1u, 2u, 5u, 8u, 64u, 100u}) {
      auto r = random_vec(n, 1000 + n);
      CHECK(ops->argmax(r.data(), n) == simd::scalar_ops().argmax(r.data(), n));
    }
  }
}

TEST_CASE("active backend is one of the usable ones") {
  const auto usable = simd::usable_ops();
  bool found = false;
  for (const simd::Ops* ops : usable)
    if (ops == &simd::active_ops()) found = true;
  CHECK(found);
}
