#pragma once

// Axisymmetric support-function flow. Latitude chart: s(theta) on [0, pi/2]
// with even extension at both ends, radii r1 = s'' + s and r2 = s - tan(theta) s',
// evolution ds/dt = -f_*(r1, r2, .., r2)^-alpha. Cylinder chart (alpha = 1):
// sigma(u) on [0, U] with radii (1+u^2)^{3/2} sigma'' and
// sqrt(1+u^2)(sigma - u sigma').

#include <cstdint>
#include <string>
#include <vector>

#include "curvflow/speed.hpp"

namespace curvflow {

enum class Chart { Latitude, Cylinder };

struct SupportProfile {
  Chart chart = Chart::Latitude;
  int n = 2;                  // number of principal curvatures
  std::vector<double> grid;   // theta in [0, pi/2] or u in [0, U], uniform
  std::vector<double> values; // s(theta_j) or sigma(u_j)

  double h() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

struct RadiiResult {
  std::vector<double> r1;  // s'' + s (meridian radius)
  std::vector<double> r2;  // s - tan(theta) s' (rotational radius; pole: r2 := r1)
};

// Fourth-order central differences on the even extension.
RadiiResult radii(const SupportProfile& p);

// Initial data -------------------------------------------------------------

SupportProfile make_sphere(int n, int grid_points, double radius);

// Even cosine series s(theta) = c0 + sum_k c_k cos(2 k theta); rejects
// non-convex profiles.
SupportProfile make_fourier(int n, int grid_points, const std::vector<double>& coef);

// Flat-cap data for alpha < 1: meridian radius r0 = 0 on [0, theta0] and a
// smooth positive bump on (theta0, pi/2]; requires 1 - alpha tan^2(theta0) > 0.
SupportProfile make_flat_cap(int n, int grid_points, double alpha, double theta0,
                             double height);

// Annular flat band for alpha > 1: r0 = 0 on [theta1, theta2], positive bumps
// on [0, theta1) and (theta2, pi/2]; requires 1 - alpha tan^2(theta1) < 0.
SupportProfile make_flat_band(int n, int grid_points, double alpha, double theta1,
                              double theta2, double height1, double height2);

// Cylinder-chart cap: sigma(u) = radius for u <= u0, smoothly closed beyond.
SupportProfile make_cylinder_cap(int n, int grid_points, double radius, double u0,
                                 double u_max);

// The meridian radius the flat-cap/flat-band builders integrate; exposed so
// that construction can be cross-checked against radii().
std::vector<double> builder_r1(const SupportProfile& p, double alpha, double theta0,
                               double theta1, double theta2, double h1, double h2);

// Evolution -----------------------------------------------------------------

struct EventRecord {
  std::string kind;  // "r1_negative" | "domain_exit" | "extinction" | "step_collapse"
  double t = 0.0;
  double location = 0.0;  // grid coordinate where triggered (if applicable)
};

struct Diagnostics {
  double t = 0.0;
  double min_r1 = 0.0, min_r2 = 0.0;
  double max_S = 0.0, min_S = 0.0;
  double s0 = 0.0, s90 = 0.0;  // support at equator and pole
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SupportProfile> profiles;
  std::vector<Diagnostics> diagnostics;
  std::vector<EventRecord> events;
  bool reached_t_end = false;

  bool has_event(const std::string& kind) const;
  double event_time(const std::string& kind) const;  // NaN if absent
};

struct EvolveOptions {
  double t_end = 0.1;
  int stored_steps = 64;        // profiles stored at uniform output times
  bool extend_past_convexity = true;   // continue while the speed stays defined
  double extinction_support = 1e-3;    // stop when min s drops below this
  double cfl = 0.2;             // dt = cfl * h^2 / max |dpsi/dr1|
};

// Method of lines, classical RK4, adaptive dt with halving on rejection
// (non-finite values or >10% single-step jump of the diagnostics).
Trajectory evolve(const SupportProfile& initial, const SpeedSpec& spec,
                  const EvolveOptions& opt);

// Pointwise time-derivative of the support values (psi on the latitude chart,
// the sigma-equation right side on the cylinder chart).
std::vector<double> rhs(const SupportProfile& p, const SpeedSpec& spec);

// Rate of change of the meridian radius r1: second theta-derivative of rhs
// plus rhs. On a flat part this equals (1-alpha)(1-alpha tan^2 theta) psi.
std::vector<double> r1_rate(const SupportProfile& p, const SpeedSpec& spec);

// Profile-plane embedding (s cos - s' sin, s sin + s' cos) over a full period;
// closes up for smooth convex profiles.
struct PlanarCurve {
  std::vector<double> theta, x, y;
};
PlanarCurve embed(const SupportProfile& p);

// Number of sign changes of the polyline turning (cross products of successive
// segments); 0 for convex curves, >= 2 once an arc of negative meridian radius
// reverses the tangent orientation.
int turning_sign_changes(const PlanarCurve& c);

}  // namespace curvflow
