#include <doctest.h>

#include <cmath>

#include "swcrt/numeric.hpp"

using swcrt::chisq_upper_tail;
using swcrt::golden_section_minimize;
using swcrt::normal_cdf;
using swcrt::normal_quantile;

TEST_CASE("normal quantiles at reference points") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-12));
  CHECK(normal_quantile(0.8) == doctest::Approx(0.8416212335729143).epsilon(1e-12));
  CHECK(normal_quantile(0.99) == doctest::Approx(2.3263478740408408).epsilon(1e-12));
  // far tails stay finite and symmetric
  double far = normal_quantile(1e-300);
  CHECK(std::isfinite(far));
  CHECK(far < -37.0);
  CHECK(normal_quantile(1.0 - 1e-16) > 8.0);
}

TEST_CASE("normal CDF at reference points") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-14));
  CHECK(normal_cdf(10.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("quantile and CDF invert each other") {
  for (double p = 0.001; p < 1.0; p += 0.013) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  for (double x = -6.0; x <= 6.0; x += 0.37) {
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-8));
  }
}

TEST_CASE("chi-square upper tails") {
  // df = 2 is exactly exp(-x/2)
  CHECK(chisq_upper_tail(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(chisq_upper_tail(7.5, 2) == doctest::Approx(std::exp(-3.75)).epsilon(1e-12));
  // df = 1 ties to the normal distribution: P(X > z^2) = 2 P(N > z)
  for (double z : {0.5, 1.0, 1.96, 3.0}) {
    CHECK(chisq_upper_tail(z * z, 1) ==
          doctest::Approx(2.0 * (1.0 - normal_cdf(z))).epsilon(1e-10));
  }
  // conventional critical values
  CHECK(chisq_upper_tail(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(chisq_upper_tail(11.070497693516351, 5) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(chisq_upper_tail(0.0, 3) == doctest::Approx(1.0));
}

TEST_CASE("golden-section minimization") {
  double x = golden_section_minimize([](double t) { return (t - 1.3) * (t - 1.3); },
                                     0.0, 2.0, 1e-10);
  CHECK(x == doctest::Approx(1.3).epsilon(1e-8));
  double pi_min = golden_section_minimize([](double t) { return std::cos(t); },
                                          2.0, 4.0, 1e-10);
  CHECK(pi_min == doctest::Approx(3.14159265358979).epsilon(1e-7));
  // minimum at an interval end
  double edge = golden_section_minimize([](double t) { return t; }, 0.5, 2.0, 1e-10);
  CHECK(edge == doctest::Approx(0.5).epsilon(1e-6));
}
