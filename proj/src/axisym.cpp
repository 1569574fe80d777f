#include "curvflow/axisym.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace curvflow {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegativeRadiusTol = 1e-9;

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Fold an extended index onto [0, M] for the even reflection at both ends.
inline int fold(int k, int M) {
  int m = k % (2 * M);
  if (m < 0) m += 2 * M;
  return m <= M ? m : 2 * M - m;
}

inline double ext(const std::vector<double>& v, int k) {
  return v[static_cast<std::size_t>(fold(k, static_cast<int>(v.size()) - 1))];
}

// Fourth-order central first/second derivatives on the even extension.
inline double deriv1(const std::vector<double>& v, int j, double h) {
  return (-ext(v, j + 2) + 8.0 * ext(v, j + 1) - 8.0 * ext(v, j - 1) + ext(v, j - 2)) /
         (12.0 * h);
}

inline double deriv2(const std::vector<double>& v, int j, double h) {
  return (-ext(v, j + 2) + 16.0 * ext(v, j + 1) - 30.0 * v[static_cast<std::size_t>(j)] +
          16.0 * ext(v, j - 1) - ext(v, j - 2)) /
         (12.0 * h * h);
}

void validate_profile(const SupportProfile& p) {
  if (p.n < 2 || p.n > kMaxDim) throw HypothesisError("profile dimension out of range");
  if (p.grid.size() < 16) throw HypothesisError("profile grid too coarse");
  if (p.grid.size() != p.values.size())
    throw HypothesisError("profile grid/value size mismatch");
  const double h = p.h();
  if (!(h > 0.0)) throw HypothesisError("profile grid must be increasing");
  for (std::size_t j = 1; j < p.grid.size(); ++j)
    if (std::abs(p.grid[j] - p.grid[j - 1] - h) > 1e-9 * (1.0 + std::abs(p.grid[j])))
      throw HypothesisError("profile grid must be uniform");
}

// Pointwise speed evaluation against the dual of the flow speed.
struct DualEval {
  const Expr* expr = nullptr;
  double norm = 1.0;
  int n = 2;
  double alpha = 1.0;

  // Latitude chart: psi = -f_*(r1, r2, .., r2)^-alpha.
  double latitude(double r1, double r2) const {
    double x[kMaxDim];
    x[0] = r1;
    for (int i = 1; i < n; ++i) x[i] = r2;
    const double f = raw_value(*expr, n, x) / norm;
    if (!(f > 0.0)) return quiet_nan();
    return -std::pow(f, -alpha);
  }

  // Cylinder chart (alpha = 1): d sigma/dt = -1/((sigma - u sigma') fhat_*(x))
  // with x = (1+u^2) sigma'' / (sigma - u sigma').
  double cylinder(double u, double sig, double dsig, double d2sig) const {
    const double rot = sig - u * dsig;
    if (!(rot > 0.0)) return quiet_nan();
    double x[kMaxDim];
    x[0] = (1.0 + u * u) * d2sig / rot;
    for (int i = 1; i < n; ++i) x[i] = 1.0;
    const double f = raw_value(*expr, n, x) / norm;
    if (!(f > 0.0)) return quiet_nan();
    return -1.0 / (rot * f);
  }
};

DualEval make_dual_eval(const SpeedSpec& spec, SpeedSpec& dual_store) {
  dual_store = dualize(spec);
  return DualEval{dual_store.expr.get(), dual_store.norm_factor, spec.n, spec.alpha};
}

RadiiResult radii_of(const SupportProfile& p) {
  RadiiResult r;
  const int N = static_cast<int>(p.grid.size());
  const double h = p.h();
  r.r1.resize(static_cast<std::size_t>(N));
  r.r2.resize(static_cast<std::size_t>(N));
  if (p.chart == Chart::Latitude) {
    for (int j = 0; j < N; ++j) {
      const std::size_t u = static_cast<std::size_t>(j);
      r.r1[u] = deriv2(p.values, j, h) + p.values[u];
      r.r2[u] = p.values[u] - std::tan(p.grid[u]) * deriv1(p.values, j, h);
    }
    r.r2[static_cast<std::size_t>(N - 1)] = r.r1[static_cast<std::size_t>(N - 1)];
  } else {
    for (int j = 0; j < N; ++j) {
      const std::size_t k = static_cast<std::size_t>(j);
      const double u = p.grid[k];
      const double w = 1.0 + u * u;
      r.r1[k] = w * std::sqrt(w) * deriv2(p.values, j, h);
      r.r2[k] = std::sqrt(w) * (p.values[k] - u * deriv1(p.values, j, h));
    }
  }
  return r;
}

void rhs_into(const SupportProfile& p, const DualEval& ev, std::vector<double>& out) {
  const int N = static_cast<int>(p.grid.size());
  const double h = p.h();
  out.resize(static_cast<std::size_t>(N));
  if (p.chart == Chart::Latitude) {
    const int last = N - 1;
    for (int j = 0; j < N; ++j) {
      const std::size_t u = static_cast<std::size_t>(j);
      const double r1 = deriv2(p.values, j, h) + p.values[u];
      const double r2 =
          j == last ? r1 : p.values[u] - std::tan(p.grid[u]) * deriv1(p.values, j, h);
      out[u] = ev.latitude(r1, r2);
    }
  } else {
    for (int j = 0; j < N; ++j) {
      const std::size_t k = static_cast<std::size_t>(j);
      out[k] = ev.cylinder(p.grid[k], p.values[k], deriv1(p.values, j, h),
                           deriv2(p.values, j, h));
    }
  }
}

// Largest |d rhs / d (second-derivative slot)|: the diffusion coefficient that
// controls the explicit step size.
double max_diffusion(const SupportProfile& p, const DualEval& ev) {
  const int N = static_cast<int>(p.grid.size());
  const double h = p.h();
  const int last = N - 1;
  double dmax = 0.0;
  for (int j = 0; j < N; ++j) {
    const std::size_t u = static_cast<std::size_t>(j);
    double base, bumped;
    double scale;
    if (p.chart == Chart::Latitude) {
      const double r1 = deriv2(p.values, j, h) + p.values[u];
      const double r2 =
          j == last ? r1 : p.values[u] - std::tan(p.grid[u]) * deriv1(p.values, j, h);
      scale = 1e-4 * (std::abs(r1) + std::abs(r2) + 1e-6);
      base = ev.latitude(r1, r2);
      bumped = ev.latitude(r1 + scale, r2);
    } else {
      const double sig = p.values[u];
      const double d1 = deriv1(p.values, j, h);
      const double d2 = deriv2(p.values, j, h);
      scale = 1e-4 * (std::abs(d2) + std::abs(sig) + 1e-6);
      base = ev.cylinder(p.grid[u], sig, d1, d2);
      bumped = ev.cylinder(p.grid[u], sig, d1, d2 + scale);
    }
    if (std::isfinite(base) && std::isfinite(bumped))
      dmax = std::max(dmax, std::abs(bumped - base) / scale);
  }
  return dmax;
}

Diagnostics diagnostics_of(const SupportProfile& p, const DualEval& ev, double t) {
  Diagnostics d;
  d.t = t;
  auto r = radii_of(p);
  d.min_r1 = *std::min_element(r.r1.begin(), r.r1.end());
  d.min_r2 = *std::min_element(r.r2.begin(), r.r2.end());
  std::vector<double> psi;
  rhs_into(p, ev, psi);
  double smax = -std::numeric_limits<double>::infinity();
  double smin = std::numeric_limits<double>::infinity();
  for (double v : psi) {
    if (!std::isfinite(v)) continue;
    smax = std::max(smax, -v);
    smin = std::min(smin, -v);
  }
  d.max_S = smax;
  d.min_S = smin;
  d.s0 = p.values.front();
  d.s90 = p.values.back();
  return d;
}

// --- bump construction ------------------------------------------------------

// Smooth bump exp(-1/(1-z^2)) on |z| < 1, extended by zero.
inline double mollifier(double z) {
  const double w = 1.0 - z * z;
  return w > 0.0 ? std::exp(-1.0 / w) : 0.0;
}

struct MeridianBump {
  // cap form: zero on [0, theta0], bump rising toward the pole
  // band form: bumps at both ends, zero on [theta1, theta2]
  bool cap = true;
  double theta0 = 0.0, theta1 = 0.0, theta2 = 0.0;
  double h1 = 1.0, h2 = 1.0;

  double operator()(double th) const {
    if (cap) {
      if (th <= theta0) return 0.0;
      return h1 * mollifier((kPi / 2 - th) / (kPi / 2 - theta0));
    }
    if (th < theta1) return h1 * mollifier(th / theta1);
    if (th > theta2) return h2 * mollifier((kPi / 2 - th) / (kPi / 2 - theta2));
    return 0.0;
  }
};

// 7-point Gauss-Legendre on [a, b].
template <typename F>
double gauss7(const F& f, double a, double b) {
  static const double xs[] = {0.0, 0.4058451513773971669066064,
                              0.7415311855993944398638648, 0.9491079123427585245261897};
  static const double ws[] = {0.4179591836734693877551020, 0.3818300505051189449503698,
                              0.2797053914892766679014678, 0.1294849661688696932706114};
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double sum = ws[0] * f(c);
  for (int i = 1; i < 4; ++i) sum += ws[i] * (f(c + r * xs[i]) + f(c - r * xs[i]));
  return sum * r;
}

// Support function with meridian radius r0: s(theta) =
// sin(theta) Int_0^theta r0 cos + cos(theta) Int_theta^{pi/2} r0 sin.
SupportProfile profile_from_meridian(int n, int grid_points, const MeridianBump& r0) {
  SupportProfile p;
  p.chart = Chart::Latitude;
  p.n = n;
  const int M = grid_points - 1;
  p.grid.resize(static_cast<std::size_t>(grid_points));
  for (int j = 0; j < grid_points; ++j)
    p.grid[static_cast<std::size_t>(j)] = 0.5 * kPi * j / M;

  std::vector<double> A(static_cast<std::size_t>(grid_points), 0.0);
  std::vector<double> B(static_cast<std::size_t>(grid_points), 0.0);
  for (int j = 0; j < M; ++j) {
    const double a = p.grid[static_cast<std::size_t>(j)];
    const double b = p.grid[static_cast<std::size_t>(j + 1)];
    A[static_cast<std::size_t>(j + 1)] =
        A[static_cast<std::size_t>(j)] +
        gauss7([&](double t) { return r0(t) * std::cos(t); }, a, b);
  }
  for (int j = M - 1; j >= 0; --j) {
    const double a = p.grid[static_cast<std::size_t>(j)];
    const double b = p.grid[static_cast<std::size_t>(j + 1)];
    B[static_cast<std::size_t>(j)] =
        B[static_cast<std::size_t>(j + 1)] +
        gauss7([&](double t) { return r0(t) * std::sin(t); }, a, b);
  }
  p.values.resize(static_cast<std::size_t>(grid_points));
  for (int j = 0; j < grid_points; ++j) {
    const std::size_t u = static_cast<std::size_t>(j);
    p.values[u] = std::sin(p.grid[u]) * A[u] + std::cos(p.grid[u]) * B[u];
  }
  if (p.values.front() <= 0.0)
    throw HypothesisError("meridian radius integrates to a degenerate body");
  return p;
}

}  // namespace

// --- public surface ---------------------------------------------------------

RadiiResult radii(const SupportProfile& p) {
  validate_profile(p);
  return radii_of(p);
}

SupportProfile make_sphere(int n, int grid_points, double radius) {
  if (!(radius > 0.0)) throw HypothesisError("sphere radius must be positive");
  SupportProfile p;
  p.chart = Chart::Latitude;
  p.n = n;
  const int M = grid_points - 1;
  for (int j = 0; j < grid_points; ++j) {
    p.grid.push_back(0.5 * kPi * j / M);
    p.values.push_back(radius);
  }
  validate_profile(p);
  return p;
}

SupportProfile make_fourier(int n, int grid_points, const std::vector<double>& coef) {
  if (coef.empty()) throw HypothesisError("empty coefficient list");
  SupportProfile p;
  p.chart = Chart::Latitude;
  p.n = n;
  const int M = grid_points - 1;
  for (int j = 0; j < grid_points; ++j) {
    const double th = 0.5 * kPi * j / M;
    double s = 0.0;
    for (std::size_t k = 0; k < coef.size(); ++k)
      s += coef[k] * std::cos(2.0 * static_cast<double>(k) * th);
    p.grid.push_back(th);
    p.values.push_back(s);
  }
  validate_profile(p);
  auto r = radii_of(p);
  for (std::size_t j = 0; j < p.grid.size(); ++j)
    if (!(p.values[j] > 0.0) || !(r.r1[j] > 0.0) || !(r.r2[j] > 0.0))
      throw HypothesisError("cosine profile is not convex");
  return p;
}

SupportProfile make_flat_cap(int n, int grid_points, double alpha, double theta0,
                             double height) {
  if (!(theta0 > 0.0) || !(theta0 < 0.5 * kPi))
    throw HypothesisError("cap angle must lie strictly inside (0, pi/2)");
  const double t = std::tan(theta0);
  if (!(1.0 - alpha * t * t > 0.0))
    throw HypothesisError("flat cap requires 1 - alpha tan^2(theta0) > 0");
  if (!(height > 0.0)) throw HypothesisError("bump height must be positive");
  MeridianBump r0;
  r0.cap = true;
  r0.theta0 = theta0;
  r0.h1 = height;
  return profile_from_meridian(n, grid_points, r0);
}

SupportProfile make_flat_band(int n, int grid_points, double alpha, double theta1,
                              double theta2, double height1, double height2) {
  if (!(0.0 < theta1) || !(theta1 < theta2) || !(theta2 < 0.5 * kPi))
    throw HypothesisError("band angles must satisfy 0 < theta1 < theta2 < pi/2");
  const double t = std::tan(theta1);
  if (!(1.0 - alpha * t * t < 0.0))
    throw HypothesisError("flat band requires 1 - alpha tan^2(theta1) < 0");
  if (!(height1 > 0.0) || !(height2 > 0.0))
    throw HypothesisError("bump heights must be positive");
  MeridianBump r0;
  r0.cap = false;
  r0.theta1 = theta1;
  r0.theta2 = theta2;
  r0.h1 = height1;
  r0.h2 = height2;
  return profile_from_meridian(n, grid_points, r0);
}

SupportProfile make_cylinder_cap(int n, int grid_points, double radius, double u0,
                                 double u_max) {
  if (!(radius > 0.0) || !(u_max > 0.0))
    throw HypothesisError("cylinder cap needs positive radius and extent");
  SupportProfile p;
  p.chart = Chart::Cylinder;
  p.n = n;
  const int M = grid_points - 1;
  for (int j = 0; j < grid_points; ++j) {
    const double u = u_max * j / M;
    double sig = radius;
    if (u > u0) sig = radius * (1.0 - 0.5 * mollifier((u_max - u) / (u_max - u0)));
    p.grid.push_back(u);
    p.values.push_back(sig);
  }
  validate_profile(p);
  return p;
}

std::vector<double> builder_r1(const SupportProfile& p, double /*alpha*/, double theta0,
                               double theta1, double theta2, double h1, double h2) {
  MeridianBump r0;
  if (theta0 > 0.0) {
    r0.cap = true;
    r0.theta0 = theta0;
    r0.h1 = h1;
  } else {
    r0.cap = false;
    r0.theta1 = theta1;
    r0.theta2 = theta2;
    r0.h1 = h1;
    r0.h2 = h2;
  }
  std::vector<double> out;
  out.reserve(p.grid.size());
  for (double th : p.grid) out.push_back(r0(th));
  return out;
}

std::vector<double> rhs(const SupportProfile& p, const SpeedSpec& spec) {
  validate_profile(p);
  if (spec.n != p.n) throw HypothesisError("speed dimension does not match profile");
  if (p.chart == Chart::Cylinder && spec.alpha != 1.0)
    throw HypothesisError("the cylinder-chart equation requires exponent one");
  SpeedSpec dual;
  const DualEval ev = make_dual_eval(spec, dual);
  std::vector<double> out;
  rhs_into(p, ev, out);
  return out;
}

std::vector<double> r1_rate(const SupportProfile& p, const SpeedSpec& spec) {
  if (p.chart != Chart::Latitude)
    throw HypothesisError("meridian-radius rate is a latitude-chart quantity");
  std::vector<double> psi = rhs(p, spec);
  const double h = p.h();
  std::vector<double> out(psi.size());
  for (int j = 0; j < static_cast<int>(psi.size()); ++j)
    out[static_cast<std::size_t>(j)] = deriv2(psi, j, h) + psi[static_cast<std::size_t>(j)];
  return out;
}

bool Trajectory::has_event(const std::string& kind) const {
  for (const auto& e : events)
    if (e.kind == kind) return true;
  return false;
}

double Trajectory::event_time(const std::string& kind) const {
  for (const auto& e : events)
    if (e.kind == kind) return e.t;
  return quiet_nan();
}

Trajectory evolve(const SupportProfile& initial, const SpeedSpec& spec,
                  const EvolveOptions& opt) {
  validate_profile(initial);
  if (spec.n != initial.n) throw HypothesisError("speed dimension does not match profile");
  if (initial.chart == Chart::Cylinder && spec.alpha != 1.0)
    throw HypothesisError("the cylinder-chart equation requires exponent one");
  if (!(opt.t_end > 0.0) || opt.stored_steps < 1)
    throw HypothesisError("evolution needs t_end > 0 and at least one output step");
  for (double v : initial.values)
    if (!(v > 0.0)) throw HypothesisError("initial support must be positive");

  SpeedSpec dual;
  const DualEval ev = make_dual_eval(spec, dual);

  Trajectory traj;
  SupportProfile state = initial;
  const int N = static_cast<int>(state.grid.size());
  const double h = state.h();
  const double dt_floor = 1e-14 * std::max(opt.t_end, 1.0);

  double t = 0.0;
  traj.times.push_back(0.0);
  traj.profiles.push_back(state);
  traj.diagnostics.push_back(diagnostics_of(state, ev, 0.0));

  bool r1_event_seen = false;
  // Flat initial data sits exactly at the convexity boundary and its finite
  // differences carry junction noise; trigger only below the initial floor.
  double r1_threshold;
  {
    auto r = radii_of(state);
    const double floor0 = *std::min_element(r.r1.begin(), r.r1.end());
    r1_threshold = std::min(-kNegativeRadiusTol,
                            floor0 - std::max(kNegativeRadiusTol, std::abs(floor0)));
  }

  std::vector<double> k1, k2, k3, k4, cand(static_cast<std::size_t>(N));
  SupportProfile work = state;
  auto stage = [&](const std::vector<double>& base, const std::vector<double>& slope,
                   double factor, std::vector<double>& out) {
    work.values.resize(base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
      work.values[i] = base[i] + factor * slope[i];
    rhs_into(work, ev, out);
  };

  int next_store = 1;
  double dt_pref = -1.0;  // persistent step preference (set after first CFL probe)
  bool halted = false;

  while (next_store <= opt.stored_steps && !halted) {
    const double t_goal = opt.t_end * next_store / opt.stored_steps;
    while (t < t_goal) {
      rhs_into(state, ev, k1);
      bool k1_bad = false;
      double bad_loc = 0.0;
      for (std::size_t i = 0; i < k1.size(); ++i)
        if (!std::isfinite(k1[i])) {
          k1_bad = true;
          bad_loc = state.grid[i];
          break;
        }
      if (k1_bad) {
        traj.events.push_back({"domain_exit", t, bad_loc});
        halted = true;
        break;
      }

      const double dmax = std::max(max_diffusion(state, ev), 1e-12);
      double psi_max = 0.0, s_min = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < k1.size(); ++i) {
        psi_max = std::max(psi_max, std::abs(k1[i]));
        s_min = std::min(s_min, state.values[i]);
      }
      const double dt_cfl = opt.cfl * h * h / dmax;
      const double dt_speed = 0.02 * std::max(s_min, opt.extinction_support) /
                              std::max(psi_max, 1e-12);
      double dt_cap = std::min(dt_cfl, dt_speed);
      if (dt_pref < 0.0) dt_pref = dt_cap;
      dt_pref = std::min(dt_pref * 1.5, dt_cap);

      bool accepted = false;
      while (!accepted) {
        const double dt = std::min(dt_pref, t_goal - t);
        stage(state.values, k1, 0.5 * dt, k2);
        stage(state.values, k2, 0.5 * dt, k3);
        stage(state.values, k3, dt, k4);
        bool ok = true;
        double jump = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < cand.size(); ++i) {
          const double d = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
          cand[i] = state.values[i] + d;
          if (!std::isfinite(cand[i])) ok = false;
          jump = std::max(jump, std::abs(d));
          scale = std::max(scale, std::abs(state.values[i]));
        }
        if (ok && jump > 0.1 * std::max(scale, 1e-6)) ok = false;
        if (ok) {
          state.values = cand;
          t += dt;
          if (t_goal - t < dt_floor) t = t_goal;
          accepted = true;
        } else {
          dt_pref *= 0.5;
          if (dt_pref < dt_floor) {
            traj.events.push_back({"step_collapse", t, 0.0});
            halted = true;
            break;
          }
        }
      }
      if (halted) break;

      // event checks on the accepted state
      auto r = radii_of(state);
      const auto it1 = std::min_element(r.r1.begin(), r.r1.end());
      if (!r1_event_seen && *it1 < r1_threshold) {
        r1_event_seen = true;
        traj.events.push_back(
            {"r1_negative", t,
             state.grid[static_cast<std::size_t>(it1 - r.r1.begin())]});
        if (!opt.extend_past_convexity) {
          halted = true;
          break;
        }
      }
      const auto its = std::min_element(state.values.begin(), state.values.end());
      if (*its < opt.extinction_support) {
        traj.events.push_back(
            {"extinction", t,
             state.grid[static_cast<std::size_t>(its - state.values.begin())]});
        halted = true;
        break;
      }
    }
    if (halted) {
      if (t > traj.times.back()) {
        traj.times.push_back(t);
        traj.profiles.push_back(state);
        traj.diagnostics.push_back(diagnostics_of(state, ev, t));
      }
      break;
    }
    traj.times.push_back(t);
    traj.profiles.push_back(state);
    traj.diagnostics.push_back(diagnostics_of(state, ev, t));
    ++next_store;
  }

  traj.reached_t_end = !halted && next_store > opt.stored_steps;
  return traj;
}

PlanarCurve embed(const SupportProfile& p) {
  if (p.chart != Chart::Latitude)
    throw HypothesisError("profile-plane embedding is a latitude-chart operation");
  validate_profile(p);
  const int M = static_cast<int>(p.grid.size()) - 1;
  const double h = p.h();
  PlanarCurve c;
  const int K = 4 * M;  // full period 2*pi, endpoint included for closure
  for (int k = 0; k <= K; ++k) {
    const double th = h * k;
    const double s = ext(p.values, k);
    // derivative of the reflected extension at extended index k
    const double ds =
        (-ext(p.values, k + 2) + 8.0 * ext(p.values, k + 1) - 8.0 * ext(p.values, k - 1) +
         ext(p.values, k - 2)) /
        (12.0 * h);
    c.theta.push_back(th);
    c.x.push_back(s * std::cos(th) - ds * std::sin(th));
    c.y.push_back(s * std::sin(th) + ds * std::cos(th));
  }
  return c;
}

int turning_sign_changes(const PlanarCurve& c) {
  const std::size_t m = c.x.size();
  if (m < 3) return 0;
  std::vector<double> cross;
  double seg_scale = 0.0;
  for (std::size_t k = 0; k + 2 < m; ++k) {
    const double ax = c.x[k + 1] - c.x[k], ay = c.y[k + 1] - c.y[k];
    const double bx = c.x[k + 2] - c.x[k + 1], by = c.y[k + 2] - c.y[k + 1];
    cross.push_back(ax * by - ay * bx);
    seg_scale = std::max(seg_scale, ax * ax + ay * ay);
  }
  const double tol = 1e-10 * seg_scale;
  int changes = 0;
  int prev = 0;
  for (double z : cross) {
    if (std::abs(z) <= tol) continue;
    const int sign = z > 0.0 ? 1 : -1;
    if (prev != 0 && sign != prev) ++changes;
    prev = sign;
  }
  return changes;
}

}  // namespace curvflow
