#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvflow/numerics.hpp"

using namespace curvflow;

TEST_CASE("fixed-order quadrature is exact enough for smooth integrands") {
  CHECK(gauss15([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(1.7182818284590451).epsilon(1e-14));
  CHECK(integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0) ==
        doctest::Approx(0.78539816339744828).epsilon(1e-14));
  // high-frequency integrand needs the panel subdivision, not just one rule
  CHECK(integrate([](double x) { return std::cos(40.0 * x); }, 0.0, 1.0, 64) ==
        doctest::Approx(std::sin(40.0) / 40.0).epsilon(1e-12));
}

TEST_CASE("improper integral from zero: integrable endpoint singularity") {
  auto r = improper_from_zero([](double x) { return 1.0 / std::sqrt(x); }, 1.0);
  CHECK(r.convergent);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));

  // log divergence is flagged, not silently truncated
  auto d = improper_from_zero([](double x) { return 1.0 / x; }, 1.0);
  CHECK_FALSE(d.convergent);
}

TEST_CASE("improper integral to infinity") {
  auto r = improper_to_infinity([](double x) { return 1.0 / (x * x); }, 1.0);
  CHECK(r.convergent);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));

  auto d = improper_to_infinity([](double x) { return 1.0 / x; }, 1.0);
  CHECK_FALSE(d.convergent);
}

TEST_CASE("monotone inversion and bisection") {
  CHECK(invert_increasing([](double x) { return x * x * x; }, 8.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // inverse of a slowly growing function far from the initial guess
  CHECK(invert_increasing([](double x) { return std::log1p(x); }, 20.0) ==
        doctest::Approx(std::expm1(20.0)).epsilon(1e-10));
  CHECK(bisect([](double x) { return std::cos(x) - x; }, 0.0, 1.0) ==
        doctest::Approx(0.7390851332151607).epsilon(1e-12));
}

TEST_CASE("golden-section minimiser") {
  // localization of a smooth minimum is limited to ~sqrt(machine eps)
  CHECK(golden_min([](double x) { return (x - 2.0) * (x - 2.0) + 3.0; }, 0.0, 5.0) ==
        doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("splitmix64 stream is fixed for all time") {
  SplitMix64 rng(1);
  CHECK(rng.next() == UINT64_C(0x910a2dec89025cc1));
  CHECK(rng.next() == UINT64_C(0xbeeb8da1658eec67));
  CHECK(rng.next() == UINT64_C(0xf893a2eefb32555e));

  SplitMix64 rng2(1);
  CHECK(rng2.uniform() == doctest::Approx(0.5665615751722809).epsilon(1e-16));

  SplitMix64 rng42(42);
  CHECK(rng42.next() == UINT64_C(0xbdd732262feb6e95));
}

TEST_CASE("ray sampler stays inside the positive cone with bounded anisotropy") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = sample_ray(rng, 5);
    REQUIRE(x.size() == 5);
    for (double xi : x) {
      CHECK(xi >= 1e-2);
      CHECK(xi <= 1e2);
    }
  }
}

TEST_CASE("finite-difference gradient and hessian on a known polynomial") {
  auto f = [](const std::vector<double>& x) { return x[0] * x[0] * x[1]; };
  std::vector<double> at{1.0, 2.0};
  auto g = fd_gradient(f, at);
  CHECK(g[0] == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-7));
  auto h = fd_hessian(f, at);
  CHECK(h[0] == doctest::Approx(4.0).epsilon(1e-5));  // d2/dx0dx0
  CHECK(h[1] == doctest::Approx(2.0).epsilon(1e-5));  // d2/dx0dx1
  CHECK(h[2] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(h[3] == doctest::Approx(0.0).scale(1.0));
}
