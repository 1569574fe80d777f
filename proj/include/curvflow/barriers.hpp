#pragma once

// Exact comparison solutions and machine-checkable sub/supersolution profiles,
// plus the trajectory-audit pass that checks flow output against them.

#include <string>
#include <vector>

#include "curvflow/axisym.hpp"
#include "curvflow/speed.hpp"

namespace curvflow {

// Shrinking sphere: s(t) = (s0^{1+a} - (1+a) t)^{1/(1+a)}.
double sphere_radius(double r0, double alpha, double t);
double sphere_extinction_time(double r0, double alpha);

// Displacement-of-the-boundary bounds between inradius r_minus and
// circumradius r_plus. `upper` always applies; `lower` requires alpha < 1 and
// holds for 0 <= t <= alpha^{-1} r_plus^{1+alpha}; `graph_lower` requires
// alpha = 1 with unbounded one-argument profile f(x,1,..,1).
struct DisplacementBounds {
  double upper = 0.0;
  double lower = 0.0;
  bool lower_valid = false;
  double graph_lower = 0.0;
  bool graph_lower_valid = false;
};
DisplacementBounds displacement_bounds(const SpeedSpec& spec, double r_minus,
                                       double r_plus, double t);

// A tabulated barrier profile with a pointwise inequality margin. Every
// sample's margin must be >= 0 (up to tolerance) for the certificate to hold.
struct BarrierProfile {
  std::string kind;
  std::vector<double> x;       // abscissa (chart-dependent)
  std::vector<double> value;   // profile value
  std::vector<double> margin;  // inequality slack at each sample
  double min_margin = 0.0;
  double rate = 0.0;           // homothetic shrinking rate parameter
  std::string note;
};

// alpha > 1: rotated graph of Y(x) = sqrt(1 + 2 x^p - 2 x), p = (alpha-1)/(2alpha-1),
// whose support/speed ratio beta = min s / max(kr, kp)^alpha is positive. The
// margin samples  s - beta * max(kr, kp)^alpha.
BarrierProfile build_flat_subsolution(double alpha, int samples = 400);

// One-argument profiles of the speed: fhat(x) = f(x, 1, .., 1) and its dual.
double fhat(const SpeedSpec& spec, double x);
double fhat_dual_at_zero(const SpeedSpec& spec);

// alpha = 1, unbounded fhat: radial graph w(r) with w''/(w'(1+w'^2)) = sigma/r
// exactly, sigma = fhat^{-1}(3 v r_plus). Margins sample that identity; the
// certificate also records drop(2 r_plus) <= -r_plus 3^{-sigma}.
BarrierProfile build_graph_supersolution(const SpeedSpec& spec, double r_plus,
                                         double v, int samples = 400);

// Any alpha with g(x) = fhat(x)^alpha - fhat(0)^alpha positive for x > 0 and
// integrable inverse: cross-section v(x) = 1 - int_0^x G^{-1}, built so that
// g(-v'') = -v' identically. Margins sample the full rotated inequality on the
// curved part.
BarrierProfile build_cylindrical_subsolution(const SpeedSpec& spec, double alpha,
                                             int samples = 400);

// alpha = 1 with fhat_*(0) > 0: cylinder-chart supersolution sigma_plus(u),
// flat ( = 1) on [0, u0], curved on [u0, 1.5 u0]. Margins sample
// (1 - sigma (sigma - u sigma')) / fhat_*(0) - g((1+u^2) sigma'' / (sigma - u sigma')).
BarrierProfile build_ridge_supersolution(const SpeedSpec& spec, double u0 = 1.0,
                                         int samples = 400);

// Trajectory audit -----------------------------------------------------------

struct BoundCheck {
  std::string name;
  bool applicable = false;
  bool passed = false;
  double worst = 0.0;  // signed margin or ratio, check-dependent
  std::string note;
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  bool all_passed() const;
  const BoundCheck* find(const std::string& name) const;
};

// Replays a stored trajectory against: the lower speed bound from consecutive
// stored profiles, boundedness of the speed ratio against the shrinking-sphere
// envelope, the Harnack-style monotonicity of psi * t^{alpha/(1+alpha)}
// (inverse-concave speeds, convex segment), and max r_i / f_*(r) pinching
// (alpha = 1, concave dual).
BoundReport verify_trajectory(const Trajectory& traj, const SpeedSpec& spec);

}  // namespace curvflow
