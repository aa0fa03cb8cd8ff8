#include <cmath>
#include <vector>

#include "batchkb/errors.hpp"
#include "batchkb/gp.hpp"
#include "batchkb/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace batchkb;

namespace {
const KernelSpec kSE{KernelFamily::kSquaredExponential, 0.5, 1.5};
constexpr double kLambda = 4e-4;  // sigma = 0.02

std::vector<double> random_points(int n, int dim, std::uint64_t seed) {
  std::vector<double> pts(n * dim);
  for (int i = 0; i < n * dim; ++i)
    pts[i] = 5.0 * rng::uniform01(rng::derive(seed, rng::kTestStream, i)) - 2.5;
  return pts;
}
}  // namespace

TEST_CASE("empty posterior is the prior") {
  PosteriorState gp(kSE, 2, kLambda);
  const double x[2] = {1.0, 2.0};
  const double y[2] = {-3.0, 0.5};
  CHECK(gp.posterior_variance(x) == 1.0);
  CHECK(gp.posterior_variance(y) == 1.0);
  CHECK(gp.posterior_mean(x) == 0.0);
  CHECK_THROWS_AS(PosteriorState(kSE, 2, 0.0), ConfigError);
  CHECK_THROWS_AS(PosteriorState(kSE, 2, -1.0), ConfigError);
}

TEST_CASE("single and repeated point closed forms") {
  PosteriorState gp(kSE, 1, kLambda);
  const double x[1] = {0.25};
  gp.add_point(x);
  CHECK(gp.posterior_variance(x) == doctest::Approx(1.0 - 1.0 / (1.0 + kLambda)).epsilon(1e-12));

  gp.add_point(x);  // same point twice: K is the all-ones 2x2
  CHECK(gp.posterior_variance(x) == doctest::Approx(1.0 - 2.0 / (2.0 + kLambda)).epsilon(1e-12));

  // a faraway point leaves local variances untouched
  PosteriorState gp2(kSE, 1, kLambda);
  gp2.add_point(x);
  const double before = gp2.posterior_variance(x);
  const double far[1] = {500.0};
  gp2.add_point(far);
  CHECK(std::abs(gp2.posterior_variance(x) - before) < 1e-12);
}

TEST_CASE("observations enable the mean") {
  PosteriorState gp(kSE, 1, kLambda);
  const double x[1] = {0.0};
  gp.add_point(x);
  CHECK_THROWS_AS(gp.posterior_mean(x), std::logic_error);
  CHECK_THROWS_AS(gp.set_observations(std::vector<double>{1.0, 2.0}), InputError);
  gp.set_observations(std::vector<double>{2.0});
  CHECK(gp.posterior_mean(x) == doctest::Approx(2.0 / (1.0 + kLambda)).epsilon(1e-12));

  // zero observations give the zero mean everywhere
  PosteriorState gp0(kSE, 1, kLambda);
  gp0.add_point(x);
  const double z[1] = {0.4};
  gp0.add_point(z);
  gp0.set_observations(std::vector<double>{0.0, 0.0});
  for (double q : {-1.0, 0.0, 0.3, 2.0}) {
    const double pt[1] = {q};
    CHECK(gp0.posterior_mean(pt) == 0.0);
  }
}

TEST_CASE("incremental posterior matches a dense solve") {
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + rep % 30;
    const auto pts = random_points(n, 2, 100 + rep);
    PosteriorState gp(kSE, 2, kLambda);
    testing::DenseGP dense{kSE, 2, kLambda, {}};
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      const std::span<const double> p(pts.data() + 2 * i, 2);
      gp.add_point(p);
      dense.add(p);
      y[i] = rng::gaussian(rep, rng::kTestStream, i);
    }
    gp.set_observations(y);
    const auto q = random_points(5, 2, 999 + rep);
    for (int k = 0; k < 5; ++k) {
      const std::span<const double> x(q.data() + 2 * k, 2);
      CHECK(gp.posterior_variance(x) == doctest::Approx(dense.variance(x)).epsilon(1e-8));
      CHECK(gp.posterior_mean(x) == doctest::Approx(dense.mean(x, y)).epsilon(1e-8));
    }
  }
}

TEST_CASE("variance never increases as points are added") {
  const auto queries = random_points(8, 2, 5);
  PosteriorState gp(kSE, 2, kLambda);
  std::vector<double> last(8, 1.0);
  const auto adds = random_points(25, 2, 6);
  for (int i = 0; i < 25; ++i) {
    gp.add_point(std::span<const double>(adds.data() + 2 * i, 2));
    for (int k = 0; k < 8; ++k) {
      const double v = gp.posterior_variance(std::span<const double>(queries.data() + 2 * k, 2));
      CHECK(v <= last[k] + 1e-10);
      CHECK(v >= 0.0);
      last[k] = v;
    }
  }
}

TEST_CASE("empirical info gain closed forms") {
  const double one[1] = {0.0};
  CHECK(empirical_info_gain(kSE, 1, 4e-4, one) ==
        doctest::Approx(0.5 * std::log(2501.0)).epsilon(1e-12));

  // duplicated point: det(I + K/s^2) = 2501^2 - 2500^2 = 5001
  const double dup[2] = {0.0, 0.0};
  CHECK(empirical_info_gain(kSE, 1, 4e-4, dup) ==
        doctest::Approx(0.5 * std::log(5001.0)).epsilon(1e-12));

  // far-apart points decompose into the sum of single-point gains
  const double far[3] = {0.0, 100.0, 200.0};
  CHECK(empirical_info_gain(kSE, 1, 4e-4, far) ==
        doctest::Approx(3 * 0.5 * std::log(2501.0)).epsilon(1e-9));

  CHECK_THROWS_AS(empirical_info_gain(kSE, 1, 0.0, one), ConfigError);
  CHECK_THROWS_AS(empirical_info_gain(kSE, 1, 4e-4, std::span<const double>{}), InputError);
}

TEST_CASE("empirical info gain matches the dense determinant") {
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + rep;
    const auto pts = random_points(n, 2, 33 + rep);
    CHECK(empirical_info_gain(kSE, 2, 4e-4, pts) ==
          doctest::Approx(testing::dense_info_gain(kSE, 2, 4e-4, pts)).epsilon(1e-7));
  }
}

TEST_CASE("batch posterior agrees with the exact incremental state") {
  const int n = 40;
  const auto pts = random_points(n, 2, 77);
  KernelOracle oracle(kSE, 2, pts);
  std::vector<int> cands(n);
  for (int i = 0; i < n; ++i) cands[i] = i;

  BatchPosterior batch(oracle, cands, kLambda, 15);
  PosteriorState gp(kSE, 2, kLambda);
  std::vector<double> y;
  for (int j = 0; j < 15; ++j) {
    const std::size_t pos = batch.argmax_variance();
    batch.add(pos);
    gp.add_point(oracle.point(cands[pos]));
    y.push_back(rng::gaussian(4, rng::kTestStream, j));
    for (int c = 0; c < n; c += 7)
      CHECK(batch.variance(c) ==
            doctest::Approx(gp.posterior_variance(oracle.point(c))).epsilon(1e-9));
  }
  gp.set_observations(y);
  const auto mu = batch.posterior_mean(y);
  for (int c = 0; c < n; ++c)
    CHECK(mu[c] == doctest::Approx(gp.posterior_mean(oracle.point(c))).epsilon(1e-9));
}

TEST_CASE("max-variance selections satisfy the info-gain inequality") {
  // sum of stepwise variances <= (2/log(1+1/lambda)) * info gain of the set
  const int n = 64;
  const auto pts = random_points(n, 2, 15);
  KernelOracle oracle(kSE, 2, pts);
  std::vector<int> cands(n);
  for (int i = 0; i < n; ++i) cands[i] = i;
  BatchPosterior batch(oracle, cands, kLambda, 50);
  for (int j = 0; j < 50; ++j) batch.add(batch.argmax_variance());
  std::vector<double> sel;
  for (int q : batch.selected()) {
    const auto p = oracle.point(q);
    sel.insert(sel.end(), p.begin(), p.end());
  }
  const double gamma = empirical_info_gain(kSE, 2, kLambda, sel);
  const double c = 2.0 / std::log(1.0 + 1.0 / kLambda);
  CHECK(batch.sum_selected_variance() <= c * gamma + 1e-9);
}
