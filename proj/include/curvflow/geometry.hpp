#pragma once

// Geometric functionals of axisymmetric convex bodies given by a latitude-chart
// support profile, and the stability checks built on them.

#include <string>
#include <vector>

#include "curvflow/axisym.hpp"
#include "curvflow/speed.hpp"

namespace curvflow {

struct RadiiBounds {
  double inradius = 0.0;
  double circumradius = 0.0;
  double in_center = 0.0;   // axial offset of the largest inscribed sphere
  double out_center = 0.0;  // axial offset of the smallest enclosing sphere
};

// Centers restricted to the symmetry axis; s_c(theta) = s(theta) - c sin(theta).
RadiiBounds radii_bounds(const SupportProfile& p);

// sup_theta |s1 - s2| for profiles on the same grid.
double hausdorff(const SupportProfile& a, const SupportProfile& b);

// Inclusion/scaling control: if d = hausdorff(a, b), then
//   (1 - K d) s_a <= s_b <= (1 + K d) s_a with K = 4 / inradius(a),
// and conversely hausdorff <= L * relative gap with L = circumradius(a).
struct InclusionCheck {
  double d = 0.0;
  double K = 0.0, L = 0.0;
  double scale_margin = 0.0;    // min over theta of the two-sided inclusion slack
  double hausdorff_margin = 0.0;  // L * max|s_b - s_a|/s_a - d
  bool passed = false;
};
InclusionCheck inclusion_scaling_check(const SupportProfile& a,
                                       const SupportProfile& b);

// Continuous dependence on initial data: evolve a profile and a d-perturbation,
// track sup_t hausdorff / (d^{1/(1+alpha)} + d) over d = 2^{-4} .. 2^{-10};
// the ratio must stay within a factor 4 of its value at the coarsest d.
struct DependenceEntry {
  double d = 0.0;
  double sup_deviation = 0.0;
  double ratio = 0.0;
};
struct DependenceCheck {
  std::vector<DependenceEntry> entries;
  double ratio_bound = 0.0;  // 4 * ratio at d = 2^{-4}
  bool passed = false;
};
DependenceCheck continuous_dependence_check(const SupportProfile& base,
                                            const SpeedSpec& spec, double t_end);

// In-flow displacement control: hausdorff(Omega_t, Omega_a) <= C (t-a)^{1/(1+alpha)}
// with C from the initial inradius/circumradius.
struct DisplacementCheck {
  double constant = 0.0;
  double worst_ratio = 0.0;  // max over stored pairs of hausdorff / bound
  bool passed = false;
};
DisplacementCheck displacement_metric_check(const Trajectory& traj, double alpha);

}  // namespace curvflow
