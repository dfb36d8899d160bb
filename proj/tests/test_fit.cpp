#include <doctest.h>

#include <cmath>
#include <vector>

#include "homlab/errors.hpp"
#include "homlab/fit.hpp"

using namespace homlab;

TEST_CASE("line fit recovers exact data") {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const auto fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("power law fit") {
  std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> err;
  for (double e : eps) err.push_back(3.0 * std::pow(e, 1.5));
  auto fit = fit_power_law(eps, err, true);
  CHECK(fit.rate == doctest::Approx(1.5));
  CHECK_FALSE(fit.excluded_largest);

  SUBCASE("pre-asymptotic largest point is excluded") {
    err[0] *= 4.0;
    auto f2 = fit_power_law(eps, err, true);
    CHECK(f2.excluded_largest);
    CHECK(f2.points_used == 3);
    CHECK(f2.rate == doctest::Approx(1.5));
  }

  SUBCASE("too few points") {
    CHECK_THROWS_AS(fit_power_law(std::vector<double>{0.5, 0.25}, std::vector<double>{1.0, 0.5}, false), Error);
  }
}

TEST_CASE("exponential decay fit respects its window") {
  std::vector<double> t, y;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    y.push_back(std::exp(-0.7 * t.back()) + (t.back() < 1.0 ? 1.0 : 0.0));
  }
  auto fit = fit_exponential_decay(t, y, 1.0, 10.0);
  CHECK(fit.rate == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
}
