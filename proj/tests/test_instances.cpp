#include <cmath>
#include <vector>

#include "batchkb/errors.hpp"
#include "batchkb/instances.hpp"
#include "doctest.h"

using namespace batchkb;

namespace {
const KernelSpec kWide{KernelFamily::kSquaredExponential, 2.0, 1.5};
}

TEST_CASE("gp samples are seed-deterministic and seed-sensitive") {
  const Domain d = Domain::line(0, 10, 40);
  const GPSampler sampler(d, kWide);
  const auto a = sampler.sample(7);
  const auto b = sampler.sample(7);
  CHECK(a.values == b.values);
  const auto c = sampler.sample(8);
  int differing = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (a.values[i] != c.values[i]) ++differing;
  CHECK(differing > static_cast<int>(0.99 * a.values.size()));
}

TEST_CASE("gp marginals have roughly unit variance") {
  const Domain d = Domain::line(0, 10, 30);
  const GPSampler sampler(d, kWide);
  double ss = 0.0;
  const int reps = 200;
  for (int s = 0; s < reps; ++s) {
    const double v = sampler.sample(1000 + s).values[11];
    ss += v * v;
  }
  const double var = ss / reps;
  CHECK(var > 0.8);
  CHECK(var < 1.2);
}

TEST_CASE("distant points decorrelate") {
  const Domain d = Domain::line(0, 10, 21);  // spacing 0.5, l = 2 -> use ends
  const GPSampler sampler(d, kWide);
  double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
  const int reps = 200;
  for (int s = 0; s < reps; ++s) {
    const auto v = sampler.sample(5000 + s).values;
    const double a = v.front(), b = v.back();  // distance 10 >> l
    sa += a; sb += b; saa += a * a; sbb += b * b; sab += a * b;
  }
  const double ma = sa / reps, mb = sb / reps;
  const double rho = (sab / reps - ma * mb) /
                     std::sqrt((saa / reps - ma * ma) * (sbb / reps - mb * mb));
  CHECK(std::abs(rho) < 0.2);
}

TEST_CASE("hard family construction and invariants") {
  const double lo[2] = {-5, -5}, hi[2] = {5, 5};
  const Domain grid = Domain::grid(lo, hi, 50);

  const auto one = make_hard_family(grid, 1, 0.1);
  CHECK(one.M == 1);
  CHECK(verify_hard_family(grid, one).all());

  const auto four = make_hard_family(grid, 4, 0.1);
  CHECK(four.cells.size() == 4);
  for (const BumpCell& c : four.cells)
    CHECK(bump_value(c, 0.1, c.center) == doctest::Approx(0.2));

  // disjoint support of the eps-optimal regions, checked directly
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const bool a = four.values[0][p] > 0.1;
    const bool b = four.values[1][p] > 0.1;
    CHECK(!(a && b));
  }

  CHECK_THROWS_AS(make_hard_family(grid, 5, 0.1), ConfigError);  // not a square
  CHECK_THROWS_AS(make_hard_family(grid, 4, 0.0), ConfigError);
}

TEST_CASE("family sequences build independently") {
  const double lo[2] = {-5, -5}, hi[2] = {5, 5};
  const Domain grid = Domain::grid(lo, hi, 30);
  const std::vector<double> eps{0.2, 0.1, 0.05};
  const std::vector<std::size_t> Ms{1, 4, 9};
  const auto fams = make_family_sequence(grid, eps, Ms);
  REQUIRE(fams.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(fams[i].M == Ms[i]);
    CHECK(fams[i].peak() == doctest::Approx(2 * eps[i]));
    CHECK(verify_hard_family(grid, fams[i]).all());
  }
  // strictly decreasing eps means strictly decreasing peaks
  CHECK(fams[0].peak() > fams[1].peak());
  CHECK(fams[1].peak() > fams[2].peak());

  CHECK_THROWS_AS(make_family_sequence(grid, eps, std::vector<std::size_t>{1, 4}), ConfigError);
}
