#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvflow/classifier.hpp"
#include "curvflow/speed.hpp"

using namespace curvflow;

namespace {
const ConditionResult& entry(const ConditionsReport& r, const std::string& name) {
  const auto* e = r.find(name);
  REQUIRE(e != nullptr);
  return *e;
}
}  // namespace

TEST_CASE("condition battery on the square-root ratio speed") {
  auto s = parse_speed("E(2)", 3, 1.0);
  auto rep = check_conditions(s, 400, 1);
  CHECK(entry(rep, "symmetric").verdict == Verdict::Holds);
  CHECK(entry(rep, "monotone").verdict == Verdict::Holds);
  CHECK(entry(rep, "homogeneous_degree_one").verdict == Verdict::Holds);
  CHECK(entry(rep, "normalized").verdict == Verdict::Holds);
  CHECK(entry(rep, "concave").verdict == Verdict::Holds);
  CHECK(entry(rep, "inverse_concave").verdict == Verdict::Holds);
  CHECK(entry(rep, "dual_vanishes_on_boundary").verdict == Verdict::Holds);
  CHECK(entry(rep, "restriction_inverse_concave").verdict == Verdict::Holds);
  // the dual vanishes on the boundary, so its face restriction is trivial
  CHECK(entry(rep, "dual_restriction_inverse_concave").verdict == Verdict::Inapplicable);
  CHECK(entry(rep, "boundary_gradient_positive").verdict == Verdict::Holds);
  CHECK(entry(rep, "dual_boundary_gradient_positive").verdict == Verdict::Holds);
  CHECK(entry(rep, "holder_estimates").verdict == Verdict::Inapplicable);
}

TEST_CASE("negative power mean below -1 fails inverse-concavity with a reusable witness") {
  auto s = parse_speed("pmean(-2)", 2, 1.0);
  auto rep = check_conditions(s, 400, 1);
  const auto& e = entry(rep, "inverse_concave");
  CHECK(e.verdict == Verdict::Fails);
  CHECK(e.margin < -1e-8);
  REQUIRE(e.witness.size() == 2);
  // the recorded witness reproduces the recorded margin independently
  auto q = q_matrix(s, e.witness);
  const double again = min_eigenvalue(q) / std::max(1.0, inf_norm(q));
  CHECK(again == doctest::Approx(e.margin).epsilon(1e-8).scale(1.0));
  // but concavity holds (power means with r <= 1 are concave)
  CHECK(entry(rep, "concave").verdict == Verdict::Holds);
}

TEST_CASE("the three-curvature named speed fails boundary inverse-concavity") {
  auto s = parse_speed("named(example1)", 3, 1.0);
  auto rep = check_conditions(s, 400, 1);
  const auto& e = entry(rep, "restriction_inverse_concave");
  CHECK(e.verdict == Verdict::Fails);
  CHECK(e.margin < -1e-8);
  CHECK(entry(rep, "monotone").verdict == Verdict::Holds);
}

TEST_CASE("flat-side dichotomy across the exponent ranges") {
  // below one: always moves, regardless of the speed
  CHECK(flat_side_dichotomy(parse_speed("quot(3,2)", 3, 0.5)).moves);
  // above one: always persists
  CHECK_FALSE(flat_side_dichotomy(parse_speed("E(1)", 3, 2.0)).moves);
  // at one: decided by the growth of f(x,1,..,1)
  auto mean = flat_side_dichotomy(parse_speed("E(1)", 3, 1.0));
  CHECK(mean.moves);
  CHECK(mean.fhat_unbounded);
  auto harm = flat_side_dichotomy(parse_speed("quot(3,2)", 3, 1.0));
  CHECK_FALSE(harm.moves);
  CHECK_FALSE(harm.fhat_unbounded);
  CHECK(harm.fhat_limit == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("cylinder persistence thresholds for root-Gauss speeds") {
  // S = K^(alpha/n): persists iff alpha > n (single flat direction)
  CHECK(cylinder_persistence(parse_speed("E(3)", 3, 3.25), 1).verdict == Verdict::Holds);
  CHECK(cylinder_persistence(parse_speed("E(3)", 3, 2.75), 1).verdict == Verdict::Fails);
  CHECK(cylinder_persistence(parse_speed("E(2)", 2, 2.25), 1).verdict == Verdict::Holds);
  CHECK(cylinder_persistence(parse_speed("E(2)", 2, 1.75), 1).verdict == Verdict::Fails);
}

TEST_CASE("cylinder persistence for the full-norm speed and two flat directions") {
  // S = |A|^alpha persists for every exponent
  for (double alpha : {0.7, 1.0, 2.0}) {
    auto r = cylinder_persistence(parse_speed("named(norm_A)", 3, alpha), 1);
    CHECK(r.verdict == Verdict::Holds);
    CHECK(r.integral_finite);
  }
  // S = E_2^(alpha/2) on n=3 with two flat directions: threshold at alpha = 2
  auto hi = cylinder_persistence(parse_speed("E(2)", 3, 2.5), 2);
  CHECK(hi.verdict == Verdict::Holds);
  CHECK(hi.v_doubling >= 0);
  auto lo = cylinder_persistence(parse_speed("E(2)", 3, 1.5), 2);
  CHECK(lo.verdict == Verdict::Fails);
  CHECK(lo.slope_exponent < -0.05);

  CHECK_THROWS_AS(cylinder_persistence(parse_speed("E(2)", 3, 1.0), 3), HypothesisError);
  CHECK_THROWS_AS(cylinder_persistence(parse_speed("E(2)", 3, 1.0), 0), HypothesisError);
}

TEST_CASE("ridge persistence needs a positive dual boundary value and unit exponent") {
  auto r = ridge_persistence(parse_speed("pmean(-2)", 2, 1.0));
  CHECK(r.verdict == Verdict::Holds);
  CHECK(r.integral_finite);
  CHECK(r.integral > 0.0);

  CHECK(ridge_persistence(parse_speed("E(1)", 3, 1.0)).verdict == Verdict::Inapplicable);
  CHECK(ridge_persistence(parse_speed("pmean(-2)", 2, 0.5)).verdict ==
        Verdict::Inapplicable);
}

TEST_CASE("singularity flags: corner persistence at non-unit exponents") {
  auto s = parse_speed("quot(3,2)", 3, 0.5);
  auto flags = singularity_flags(s, check_conditions(s, 300, 1));
  REQUIRE(flags.size() == 1);
  CHECK(flags[0].kind == "smoothness_loss");
}

TEST_CASE("singularity flags: curvature blow-up and convexity loss witnesses") {
  // dual of the named speed: its dual restriction is the euclidean norm,
  // which is not concave => radii of curvature hit zero in finite time
  auto d = dualize(parse_speed("named(example1)", 3, 1.0));
  auto dflags = singularity_flags(d, check_conditions(d, 300, 1));
  bool blowup = false;
  for (const auto& f : dflags)
    if (f.kind == "curvature_blowup") {
      blowup = true;
      CHECK(f.defect > 0.0);
      CHECK(f.rate < 0.0);
      REQUIRE(f.point.size() == 3);
      CHECK(f.point[0] == 0.0);
      REQUIRE(f.direction.size() == 2);
      // the direction is unit and orthogonal to the gradient at the witness
      CHECK(std::hypot(f.direction[0], f.direction[1]) == doctest::Approx(1.0));
    }
  CHECK(blowup);

  auto s = parse_speed("named(example1)", 3, 1.0);
  auto sflags = singularity_flags(s, check_conditions(s, 300, 1));
  bool loss = false;
  for (const auto& f : sflags)
    if (f.kind == "convexity_loss") {
      loss = true;
      CHECK(f.defect > 0.0);
      CHECK(f.rate < 0.0);
    }
  CHECK(loss);

  // concave speeds with vanishing dual raise nothing
  auto e2 = parse_speed("E(2)", 3, 1.0);
  CHECK(singularity_flags(e2, check_conditions(e2, 300, 1)).empty());
}

TEST_CASE("sigma functionals against closed-form minima of the mean-curvature speed") {
  // f = E1: dual trace reduces to min of (1/r^2 + (n - 1/r)^2/(n-1))/n
  auto s2 = parse_speed("E(1)", 2, 1.0);
  CHECK(sigma_dual_trace(s2, 2.0) == doctest::Approx(1.25).epsilon(1e-4));
  CHECK(sigma_weighted_square(s2, 1.5) == doctest::Approx(1.25).epsilon(1e-4));
  auto s3 = parse_speed("E(1)", 3, 1.0);
  CHECK(sigma_weighted_square(s3, 2.0) == doctest::Approx(1.5).epsilon(1e-4));
}

TEST_CASE("regularity entries: planar boundary integral and trace localization") {
  // n=2 root-Gauss: f_*(1,x) = sqrt(x), integral over (0,1] equals 2
  auto g2 = parse_speed("E(2)", 2, 1.0);
  auto entries = regularity_class(g2, check_conditions(g2, 300, 1));
  const RegularityEntry* planar = nullptr;
  const RegularityEntry* ctrace = nullptr;
  for (const auto& e : entries) {
    if (e.name == "planar_boundary_speed_integral") planar = &e;
    if (e.name == "curvature_trace_localization") ctrace = &e;
  }
  REQUIRE(planar != nullptr);
  CHECK(planar->verdict == Verdict::Holds);
  CHECK(planar->quantity == doctest::Approx(2.0).epsilon(1e-6));
  REQUIRE(ctrace != nullptr);
  CHECK(ctrace->verdict == Verdict::Holds);

  // three dimensions: no planar entry verdict, sigma >= c r still integrates
  auto g3 = parse_speed("E(2)", 3, 1.0);
  auto entries3 = regularity_class(g3, check_conditions(g3, 300, 1));
  for (const auto& e : entries3) {
    if (e.name == "planar_boundary_speed_integral")
      CHECK(e.verdict == Verdict::Inapplicable);
    if (e.name == "curvature_trace_localization") CHECK(e.verdict == Verdict::Holds);
  }
}

TEST_CASE("full report is deterministic and structurally complete") {
  auto s = parse_speed("E(2)", 3, 1.0);
  auto a = classify(s, 100, 7);
  auto b = classify(s, 100, 7);
  CHECK(a.dump() == b.dump());
  CHECK(a.contains("conditions"));
  CHECK(a.contains("predictions"));
  CHECK(a.contains("certificates"));
  CHECK(a["n"] == 3);
  CHECK(a["predictions"].contains("flat_sides"));
  CHECK(a["predictions"].contains("cylinders"));
  CHECK(a["predictions"].contains("ridge"));
  CHECK(a["predictions"].contains("closing_shape"));
  CHECK(a["predictions"]["closing_shape"]["shrinks_to_point"] == true);

  // different seed still yields the same verdicts for a clean speed
  auto c = classify(s, 100, 99);
  CHECK(c["predictions"]["closing_shape"]["shrinks_to_point"] == true);
}
