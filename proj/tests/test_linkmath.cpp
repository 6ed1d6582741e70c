#include <doctest.h>

#include <cmath>
#include <limits>

#include "ivnnt/linkmath.hpp"
#include "testutil.hpp"

using namespace ivnnt;

TEST_CASE("expit basics") {
  CHECK(expit(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(expit(logit(0.3)) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(std::fabs(expit(40.0) - 1.0) < 1e-15);
  CHECK(expit(-800.0) == 0.0);  // saturates, no overflow
  CHECK(expit(800.0) == 1.0);
}

TEST_CASE("expit/logit round trip") {
  for (int k = 0; k <= 1000; ++k) {
    const double p = 1e-6 + k * (1.0 - 2e-6) / 1000.0;
    CHECK(expit(logit(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  // inverse pair to 1e-12 across the wide probability range
  for (double p : {1e-10, 1e-6, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-6, 1.0 - 1e-10}) {
    CHECK(std::fabs(expit(logit(p)) - p) < 1e-12);
  }
}

TEST_CASE("logit values and domain") {
  CHECK(logit(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(logit(0.75) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS((void)logit(1.0), std::domain_error);
  CHECK_THROWS_AS((void)logit(0.0), std::domain_error);
  CHECK_THROWS_AS((void)logit(-0.2), std::domain_error);
}

TEST_CASE("norm_cdf against the erf oracle") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  const double phi1 = static_cast<double>(testutil::norm_cdf_oracle(1.0L));
  CHECK(phi1 == doctest::Approx(0.8413447461).epsilon(1e-9));  // frozen oracle value
  CHECK(norm_cdf(1.0) == doctest::Approx(phi1).epsilon(1e-13));
  for (double x : {-6.0, -3.2, -1.0, -0.1, 0.7, 2.5, 5.5}) {
    CHECK(std::fabs(norm_cdf(x) - static_cast<double>(testutil::norm_cdf_oracle(x))) < 1e-14);
  }
}

TEST_CASE("norm_cdf reflection symmetry") {
  for (double x = 0.0; x <= 8.0; x += 0.37) {
    CHECK(std::fabs(norm_cdf(-x) - (1.0 - norm_cdf(x))) < 1e-14);
  }
}

TEST_CASE("norm_quantile round trip and domain") {
  CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(norm_quantile(0.8413447461) == doctest::Approx(1.0).epsilon(1e-8));
  for (double p : {1e-8, 1e-4, 0.2, 0.5, 0.77, 1 - 1e-4, 1 - 1e-8}) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS((void)norm_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS((void)norm_quantile(1.0), std::domain_error);
}

TEST_CASE("g transform") {
  CHECK(g_transform(0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::isinf(g_transform(-0.1)));
  CHECK(std::isinf(g_transform(0.0)));
  CHECK(g_transform(0.215) == doctest::Approx(4.6512).epsilon(1e-4));

  // non-increasing on pb > 0, constant +inf on pb <= 0
  double prev = std::numeric_limits<double>::infinity();
  for (double pb = 1e-6; pb <= 1.0; pb += 1e-3) {
    const double g = g_transform(pb);
    CHECK(g <= prev);
    prev = g;
  }
  for (double pb : {-1.0, -0.5, -1e-12, 0.0}) {
    CHECK(g_transform(pb) == std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("link_eval dispatch") {
  CHECK(link_eval(LinkKind::logit, LinkDirection::inverse, 0.0) == doctest::Approx(0.5));
  CHECK(link_eval(LinkKind::probit, LinkDirection::forward, 0.5) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(link_eval(LinkKind::logit, LinkDirection::inverse_derivative, 0.0) ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS((void)link_eval(LinkKind::probit, LinkDirection::forward, 1.5),
                  std::domain_error);
}

TEST_CASE("link round trips") {
  for (auto kind : {LinkKind::logit, LinkKind::probit}) {
    for (int k = 0; k <= 1000; ++k) {
      const double p = 1e-6 + k * (1.0 - 2e-6) / 1000.0;
      CHECK(link_inverse(kind, link_forward(kind, p)) == doctest::Approx(p).epsilon(1e-9));
    }
  }
}

TEST_CASE("inverse link derivative matches central differences") {
  for (auto kind : {LinkKind::logit, LinkKind::probit}) {
    for (double x = -8.0; x <= 8.0; x += 0.25) {
      const double h = 1e-6;
      const double fd = (link_inverse(kind, x + h) - link_inverse(kind, x - h)) / (2 * h);
      const double an = link_inverse_deriv(kind, x);
      CHECK(an == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}
