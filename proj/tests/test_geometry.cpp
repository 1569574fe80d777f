#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvflow/geometry.hpp"
#include "curvflow/numerics.hpp"

using namespace curvflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Brute-force center scan: the independent oracle for the golden-section
// search inside radii_bounds. Mirrored hemisphere contributes |c| sin(theta).
double scan_inradius(const SupportProfile& p, int centers) {
  const double R = *std::max_element(p.values.begin(), p.values.end());
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= centers; ++i) {
    const double c = -R + 2.0 * R * i / centers;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p.grid.size(); ++j)
      m = std::min(m, p.values[j] - std::abs(c) * std::sin(p.grid[j]));
    best = std::max(best, m);
  }
  return best;
}

double scan_circumradius(const SupportProfile& p, int centers) {
  const double R = *std::max_element(p.values.begin(), p.values.end());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= centers; ++i) {
    const double c = -R + 2.0 * R * i / centers;
    double m = 0.0;
    for (std::size_t j = 0; j < p.grid.size(); ++j)
      m = std::max(m, p.values[j] + std::abs(c) * std::sin(p.grid[j]));
    best = std::min(best, m);
  }
  return best;
}

double point_to_curve(double px, double py, const PlanarCurve& c) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < c.x.size(); ++k) {
    const double ax = c.x[k], ay = c.y[k];
    const double dx = c.x[k + 1] - ax, dy = c.y[k + 1] - ay;
    const double L2 = dx * dx + dy * dy;
    double t = 0.0;
    if (L2 > 0.0) t = std::clamp(((px - ax) * dx + (py - ay) * dy) / L2, 0.0, 1.0);
    best = std::min(best, std::hypot(px - (ax + t * dx), py - (ay + t * dy)));
  }
  return best;
}

// Boundary-to-boundary Hausdorff distance of the embedded cross-sections,
// sampled vertex-to-polyline in both directions. For convex bodies this
// equals the body Hausdorff distance, hence sup |s1 - s2|, to grid accuracy.
double boundary_hausdorff(const SupportProfile& a, const SupportProfile& b) {
  const PlanarCurve ca = embed(a), cb = embed(b);
  double m = 0.0;
  for (std::size_t k = 0; k < ca.x.size(); ++k)
    m = std::max(m, point_to_curve(ca.x[k], ca.y[k], cb));
  for (std::size_t k = 0; k < cb.x.size(); ++k)
    m = std::max(m, point_to_curve(cb.x[k], cb.y[k], ca));
  return m;
}

}  // namespace

TEST_CASE("radii bounds: sphere and cos(2 theta) ellipsoid-type profiles") {
  auto sph = make_sphere(2, 65, 0.75);
  auto rb = radii_bounds(sph);
  CHECK(rb.inradius == 0.75);
  CHECK(rb.circumradius == 0.75);
  CHECK(rb.in_center == 0.0);
  CHECK(rb.out_center == 0.0);

  // Oblate body s = 1 + 0.1 cos(2 theta): widest across the equator. The
  // extremes sit on grid nodes, so min/max support are hit exactly.
  auto ob = make_fourier(2, 257, {1.0, 0.1});
  auto rbo = radii_bounds(ob);
  CHECK(rbo.inradius == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(rbo.circumradius == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(rbo.inradius == doctest::Approx(scan_inradius(ob, 4000)).epsilon(1e-6));
  CHECK(rbo.circumradius == doctest::Approx(scan_circumradius(ob, 4000)).epsilon(1e-6));
  CHECK(std::abs(rbo.in_center) < 1e-6);

  // Prolate body s = 1 - 0.1 cos(2 theta): tallest along the axis; the
  // inradius objective is quadratic around the symmetric center.
  auto pr = make_fourier(2, 257, {1.0, -0.1});
  auto rbp = radii_bounds(pr);
  CHECK(rbp.inradius == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(rbp.circumradius == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(rbp.inradius == doctest::Approx(scan_inradius(pr, 4000)).epsilon(1e-6));
  CHECK(rbp.circumradius == doctest::Approx(scan_circumradius(pr, 4000)).epsilon(1e-6));
  CHECK(std::abs(rbp.in_center) < 1e-6);
  CHECK(std::abs(rbp.out_center) < 1e-6);
}

TEST_CASE("radii bounds: convexity guard, flat data, chart discipline") {
  // r1 = 1 - 1.35 cos(2 theta) < 0 near the equator: rejected.
  SupportProfile bad;
  bad.n = 2;
  const int M = 128;
  for (int j = 0; j <= M; ++j) {
    const double th = (kPi / 2.0) * j / M;
    bad.grid.push_back(th);
    bad.values.push_back(1.0 + 0.45 * std::cos(2.0 * th));
  }
  CHECK_THROWS_AS(radii_bounds(bad), DomainError);

  // Flat-sided data is legitimately at the convexity boundary; the discrete
  // meridian radius dips a few 1e-7 negative there and must be admitted.
  auto cap = make_flat_cap(3, 129, 0.5, kPi / 5.0, 1.0);
  auto rb = radii_bounds(cap);
  const double smin = *std::min_element(cap.values.begin(), cap.values.end());
  const double smax = *std::max_element(cap.values.begin(), cap.values.end());
  CHECK(rb.inradius == doctest::Approx(smin).epsilon(1e-12));
  CHECK(rb.circumradius == doctest::Approx(smax).epsilon(1e-12));
  CHECK(rb.inradius > 0.0);

  CHECK_THROWS_AS(radii_bounds(make_cylinder_cap(2, 65, 1.0, 0.5, 2.0)),
                  HypothesisError);
}

TEST_CASE("radii bounds: both radii monotone under pointwise support inclusion") {
  SplitMix64 rng(0x9e3779b97f4a7c15ull);
  for (int trial = 0; trial < 8; ++trial) {
    const double c1 = rng.uniform(-0.08, 0.08);
    const double c2 = rng.uniform(-0.01, 0.01);
    const double grow = rng.uniform(0.01, 0.1);
    auto a = make_fourier(2, 129, {1.0, c1, c2});
    auto b = make_fourier(2, 129, {1.0 + grow, c1, c2});
    auto ra = radii_bounds(a);
    auto rbb = radii_bounds(b);
    CHECK(ra.inradius <= rbb.inradius + 1e-12);
    CHECK(ra.circumradius <= rbb.circumradius + 1e-12);
  }
}

TEST_CASE("hausdorff: dilates and grid discipline") {
  auto s1 = make_sphere(2, 65, 1.0);
  auto s2 = make_sphere(2, 65, 2.0);
  CHECK(hausdorff(s1, s2) == 1.0);
  CHECK(hausdorff(s2, s1) == 1.0);

  auto ob = make_fourier(2, 257, {1.0, 0.1});
  CHECK(hausdorff(ob, ob) == 0.0);

  // (1+a)-dilate of a body with max support R+: distance a * R+.
  SupportProfile dil = ob;
  for (auto& v : dil.values) v *= 1.07;
  CHECK(hausdorff(ob, dil) == doctest::Approx(0.07 * 1.1).epsilon(1e-12));

  CHECK_THROWS_AS(hausdorff(s1, make_sphere(2, 129, 1.0)), DomainError);
  CHECK_THROWS_AS(hausdorff(s1, make_sphere(3, 65, 1.0)), DomainError);
  CHECK_THROWS_AS(hausdorff(s1, make_cylinder_cap(2, 65, 1.0, 0.5, 2.0)),
                  DomainError);
  CHECK_THROWS_AS(hausdorff(make_cylinder_cap(2, 65, 1.0, 0.5, 2.0),
                            make_cylinder_cap(2, 65, 1.0, 0.5, 3.0)),
                  DomainError);
}

TEST_CASE("hausdorff agrees with sampled boundary-to-boundary distance") {
  // Two overlapping convex bodies, neither containing the other:
  // s_b - s_a = 0.02 - 0.17 cos(2 theta), sup at the pole = 0.19.
  auto a = make_fourier(2, 513, {1.0, 0.1});
  auto b = make_fourier(2, 513, {1.02, -0.07});
  const double d = hausdorff(a, b);
  CHECK(d == doctest::Approx(0.19).epsilon(1e-12));
  CHECK(boundary_hausdorff(a, b) == doctest::Approx(d).epsilon(2e-4));

  // Nested pair: a vs its 1.05-dilate.
  SupportProfile dil = a;
  for (auto& v : dil.values) v *= 1.05;
  CHECK(hausdorff(a, dil) == doctest::Approx(0.05 * 1.1).epsilon(1e-12));
  CHECK(boundary_hausdorff(a, dil) == doctest::Approx(0.05 * 1.1).epsilon(2e-4));
}

TEST_CASE("inclusion scaling control: dilate, identity, random pairs, guards") {
  auto ball = make_sphere(2, 129, 1.0);
  SupportProfile dil = ball;
  for (auto& v : dil.values) v *= 1.04;
  auto c = inclusion_scaling_check(ball, dil);
  CHECK(c.d == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(c.K == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(c.L == doctest::Approx(1.0).epsilon(1e-12));
  // Upper side binds: (1 + K d) - (1 + d) = 3 d.
  CHECK(c.scale_margin == doctest::Approx(0.12).epsilon(1e-12));
  // L * relative gap = d exactly on a unit ball.
  CHECK(std::abs(c.hausdorff_margin) < 1e-15);
  CHECK(c.passed);

  auto same = inclusion_scaling_check(ball, ball);
  CHECK(same.d == 0.0);
  CHECK(same.scale_margin == 0.0);
  CHECK(same.hausdorff_margin == 0.0);
  CHECK(same.passed);

  SplitMix64 rng(0x51ed2701ull);
  for (int trial = 0; trial < 6; ++trial) {
    const double c1 = rng.uniform(-0.08, 0.08);
    const double c2 = rng.uniform(-0.01, 0.01);
    auto base = make_fourier(2, 129, {1.0, c1, c2});
    auto other = make_fourier(2, 129,
                              {1.0 + rng.uniform(-0.05, 0.05),
                               c1 + rng.uniform(-0.02, 0.02),
                               c2 + rng.uniform(-0.005, 0.005)});
    auto chk = inclusion_scaling_check(base, other);
    CHECK(chk.scale_margin >= -1e-8);
    CHECK(chk.hausdorff_margin >= -1e-8);
    CHECK(chk.passed);
  }

  // d = 0.15 >= inradius/4 = 0.1: scaling control hypotheses fail.
  CHECK_THROWS_AS(inclusion_scaling_check(make_sphere(2, 65, 0.4),
                                          make_sphere(2, 65, 0.55)),
                  HypothesisError);

  SupportProfile bad;
  bad.n = 2;
  for (int j = 0; j <= 64; ++j) {
    const double th = (kPi / 2.0) * j / 64;
    bad.grid.push_back(th);
    bad.values.push_back(1.0 + 0.45 * std::cos(2.0 * th));
  }
  CHECK_THROWS_AS(inclusion_scaling_check(bad, bad), DomainError);
}

TEST_CASE("continuous dependence: exact sphere ladder") {
  auto spec = parse_speed("E(1)", 2, 1.0);
  auto base = make_sphere(2, 65, 1.0);
  const double t_end = 0.3;
  auto dc = continuous_dependence_check(base, spec, t_end);
  REQUIRE(dc.entries.size() == 7);

  // The d-perturbation is the outer parallel body, i.e. the sphere of radius
  // 1 + d; both flows stay exactly spherical, so the deviation at time t is
  // sqrt((1+d)^2 - 2t) - sqrt(1 - 2t), increasing in t.
  auto dev_exact = [&](double d) {
    return std::sqrt((1.0 + d) * (1.0 + d) - 2.0 * t_end) -
           std::sqrt(1.0 - 2.0 * t_end);
  };
  for (std::size_t k = 0; k < dc.entries.size(); ++k) {
    const double d = std::ldexp(1.0, -static_cast<int>(4 + k));
    const auto& e = dc.entries[k];
    CHECK(e.d == d);
    CHECK(e.sup_deviation == doctest::Approx(dev_exact(d)).epsilon(1e-6));
    CHECK(e.ratio ==
          doctest::Approx(dev_exact(d) / (std::sqrt(d) + d)).epsilon(1e-6));
    if (k > 0) CHECK(e.ratio < dc.entries[k - 1].ratio);
  }
  CHECK(dc.passed);
  CHECK(dc.ratio_bound == doctest::Approx(4.0 * dc.entries.front().ratio));

  CHECK_THROWS_AS(
      continuous_dependence_check(make_cylinder_cap(2, 65, 1.0, 0.5, 2.0), spec, 0.1),
      HypothesisError);
}

TEST_CASE("continuous dependence: bump data stays within the ladder bound") {
  auto spec = parse_speed("E(1)", 2, 1.0);
  auto base = make_fourier(2, 65, {1.0, 0.08, 0.01});
  auto dc = continuous_dependence_check(base, spec, 0.2);
  REQUIRE(dc.entries.size() == 7);
  for (const auto& e : dc.entries) {
    CHECK(e.sup_deviation > 0.0);
    CHECK(std::isfinite(e.ratio));
    CHECK(e.ratio <= dc.ratio_bound);
  }
  CHECK(dc.passed);

  // Zero perturbation: the solver is deterministic, so two runs of the same
  // data coincide bit for bit.
  EvolveOptions opt;
  opt.t_end = 0.05;
  opt.stored_steps = 4;
  auto t1 = evolve(base, spec, opt);
  auto t2 = evolve(base, spec, opt);
  REQUIRE(t1.profiles.size() == t2.profiles.size());
  CHECK(hausdorff(t1.profiles.back(), t2.profiles.back()) == 0.0);
}

TEST_CASE("displacement along the flow stays within the parabolic envelope") {
  auto spec = parse_speed("E(1)", 2, 1.0);
  EvolveOptions opt;
  opt.t_end = 0.3;
  opt.stored_steps = 8;
  auto traj = evolve(make_sphere(2, 65, 1.0), spec, opt);
  REQUIRE(traj.reached_t_end);
  auto d = displacement_metric_check(traj, 1.0);
  CHECK(d.constant == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));

  // Exact sphere radii at the stored times give the worst pair directly.
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    for (std::size_t j = i + 1; j < traj.times.size(); ++j) {
      const double num = std::sqrt(1.0 - 2.0 * traj.times[i]) -
                         std::sqrt(1.0 - 2.0 * traj.times[j]);
      const double den = 2.0 * std::sqrt(2.0) *
                         std::sqrt(traj.times[j] - traj.times[i]);
      worst = std::max(worst, num / den);
    }
  CHECK(d.worst_ratio == doctest::Approx(worst).epsilon(1e-6));
  CHECK(d.passed);

  EvolveOptions opt2;
  opt2.t_end = 0.2;
  opt2.stored_steps = 6;
  auto bumpy = evolve(make_fourier(2, 65, {1.0, 0.1}), spec, opt2);
  REQUIRE(bumpy.reached_t_end);
  auto db = displacement_metric_check(bumpy, 1.0);
  CHECK(db.worst_ratio > 0.0);
  CHECK(db.worst_ratio <= 1.0);
  CHECK(db.passed);

  // Flat-sided initial data, degree alpha = 1/2.
  auto spec3 = parse_speed("quot(3,2)", 3, 0.5);
  EvolveOptions opt3;
  opt3.t_end = 0.02;
  opt3.stored_steps = 4;
  auto cap = evolve(make_flat_cap(3, 129, 0.5, kPi / 5.0, 1.0), spec3, opt3);
  REQUIRE(cap.reached_t_end);
  auto dcap = displacement_metric_check(cap, 0.5);
  CHECK(dcap.passed);

  CHECK_THROWS_AS(displacement_metric_check(Trajectory{}, 1.0), HypothesisError);
  Trajectory cyl;
  cyl.times = {0.0, 0.1};
  cyl.profiles = {make_cylinder_cap(2, 65, 1.0, 0.5, 2.0),
                  make_cylinder_cap(2, 65, 1.0, 0.5, 2.0)};
  CHECK_THROWS_AS(displacement_metric_check(cyl, 1.0), HypothesisError);
}
