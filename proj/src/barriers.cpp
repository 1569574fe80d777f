#include "curvflow/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "curvflow/classifier.hpp"
#include "curvflow/numerics.hpp"

namespace curvflow {

namespace {

constexpr double kMarginTol = 1e-8;

void stamp(BarrierProfile& p) {
  p.min_margin =
      p.margin.empty() ? 0.0 : *std::min_element(p.margin.begin(), p.margin.end());
}

// fhat^{-1}(y), clamped to 0 when y is below the boundary value fhat(0).
double profile_inverse(const SpeedSpec& spec, double y) {
  if (y <= fhat(spec, 0.0)) return 0.0;
  double hi = 1.0;
  int guard = 0;
  while (fhat(spec, hi) < y) {
    hi *= 2.0;
    if (++guard > 1000) throw NumericError("one-argument profile never reaches the target");
  }
  return bisect([&](double x) { return fhat(spec, x) - y; }, 0.0, hi);
}

std::string format_note(const char* fmt, double a, double b) {
  char buf[192];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

}  // namespace

double fhat(const SpeedSpec& spec, double x) {
  if (x < 0.0) throw DomainError("one-argument profile needs x >= 0");
  Vec p(static_cast<std::size_t>(spec.n), 1.0);
  p[0] = x;
  if (x > 0.0) return value(spec, p);
  // Boundary limit. The barrier constructions subtract fhat(0) under a square
  // root, so the generic monotone limit (~1e-10) is refined by Richardson
  // extrapolation whenever the profile is smooth enough for it to agree.
  const double bv = boundary_value(spec, p);
  auto at = [&](double s) {
    Vec q(static_cast<std::size_t>(spec.n), 1.0);
    q[0] = s;
    return value(spec, q);
  };
  const double h = 3.814697265625e-06;  // 2^-18
  const double rich = (8.0 * at(h) - 6.0 * at(2.0 * h) + at(4.0 * h)) / 3.0;
  if (std::abs(rich - bv) <= 1e-7 * std::max(1.0, std::abs(bv)))
    return std::max(rich, 0.0);
  return bv;
}

double fhat_dual_at_zero(const SpeedSpec& spec) { return fhat(dualize(spec), 0.0); }

double sphere_extinction_time(double r0, double alpha) {
  if (r0 <= 0.0 || alpha <= 0.0) throw DomainError("sphere law needs r0 > 0, alpha > 0");
  return std::pow(r0, 1.0 + alpha) / (1.0 + alpha);
}

double sphere_radius(double r0, double alpha, double t) {
  if (r0 <= 0.0 || alpha <= 0.0) throw DomainError("sphere law needs r0 > 0, alpha > 0");
  if (t < 0.0) throw DomainError("negative time");
  const double base = std::pow(r0, 1.0 + alpha) - (1.0 + alpha) * t;
  if (base < 0.0) throw DomainError("time past the extinction of the sphere");
  return std::pow(base, 1.0 / (1.0 + alpha));
}

DisplacementBounds displacement_bounds(const SpeedSpec& spec, double r_minus,
                                       double r_plus, double t) {
  if (!(r_minus > 0.0) || r_plus < r_minus)
    throw DomainError("need 0 < r_minus <= r_plus");
  if (t < 0.0) throw DomainError("negative time");
  const double a = spec.alpha;
  DisplacementBounds b;
  b.upper = 2.0 * std::pow(1.0 + a, 1.0 / (1.0 + a)) * (r_plus / r_minus) *
            std::pow(t, 1.0 / (1.0 + a));
  if (a < 1.0 && t <= std::pow(r_plus, 1.0 + a) / a) {
    b.lower = (1.0 - a) * std::pow(a, a / (1.0 - a)) *
              std::pow(r_plus, -2.0 * a / (1.0 - a)) * std::pow(t, 1.0 / (1.0 - a));
    b.lower_valid = true;
  }
  if (a == 1.0 && flat_side_dichotomy(spec).fhat_unbounded) {
    b.graph_lower_valid = true;
    b.graph_lower =
        t == 0.0 ? 0.0
                 : r_plus * std::pow(3.0, -profile_inverse(spec, 3.0 * r_plus * r_plus / t));
  }
  return b;
}

BarrierProfile build_flat_subsolution(double alpha, int samples) {
  if (!(alpha > 1.0))
    throw HypothesisError("a persistent flat side needs alpha > 1");
  if (samples < 16) throw DomainError("need at least 16 samples");
  const double p = (alpha - 1.0) / (2.0 * alpha - 1.0);
  // right endpoint of {1 + 2 x^p - 2 x > 0} beyond x = 1
  const double x_end =
      bisect([&](double x) { return 1.0 + 2.0 * std::pow(x, p) - 2.0 * x; }, 1.0, 4.0);

  BarrierProfile prof;
  prof.kind = "flat_subsolution";
  std::vector<double> support, speed_pow;
  for (int i = 0; i < samples; ++i) {
    // clustered at both ends: the rim (x -> 0) carries the balancing exponents
    const double x = x_end * 0.5 * (1.0 - std::cos(M_PI * (i + 0.5) / samples));
    const double xp = std::pow(x, p);
    const double y = std::sqrt(1.0 + 2.0 * xp - 2.0 * x);
    const double yp = (p * xp / x - 1.0) / y;
    const double ypp = (p * (p - 1.0) * xp / (x * x) - yp * yp) / y;
    const double kr = -ypp / std::pow(1.0 + yp * yp, 1.5);
    const double kperp = 1.0 / (y * std::sqrt(1.0 + yp * yp));
    const double s = (1.0 + (2.0 - p) * xp - x) /
                     std::sqrt((1.0 - p * xp / x) * (1.0 - p * xp / x) + y * y);
    prof.x.push_back(x);
    prof.value.push_back(y);
    support.push_back(s);
    speed_pow.push_back(std::pow(std::max(kr, kperp), alpha));
  }
  double beta = support[0] / speed_pow[0];
  for (std::size_t i = 1; i < support.size(); ++i)
    beta = std::min(beta, support[i] / speed_pow[i]);
  for (std::size_t i = 0; i < support.size(); ++i)
    prof.margin.push_back(support[i] - beta * speed_pow[i]);
  prof.rate = beta;
  stamp(prof);
  prof.note = format_note(
      "support/speed ratio beta = %.9g; a cap of radius r stays behind the moving "
      "boundary for t <= beta/(1+alpha) (r/4)^(1+alpha), alpha = %g",
      beta, alpha);
  return prof;
}

BarrierProfile build_graph_supersolution(const SpeedSpec& spec, double r_plus,
                                         double v, int samples) {
  if (spec.alpha != 1.0)
    throw HypothesisError("the radial graph supersolution needs alpha = 1");
  if (!(r_plus > 0.0) || !(v > 0.0)) throw DomainError("need r_plus > 0 and v > 0");
  if (samples < 16) throw DomainError("need at least 16 samples");
  if (!flat_side_dichotomy(spec).fhat_unbounded)
    throw HypothesisError("one-argument profile is bounded: flat pieces persist");
  const double sg = profile_inverse(spec, 3.0 * v * r_plus);
  if (!(sg > 0.0)) throw DomainError("v r_plus too small for a nontrivial exponent");

  BarrierProfile prof;
  prof.kind = "graph_supersolution";
  // two uniform segments so that r = 2 r_plus is hit exactly
  const int m1 = (2 * samples) / 3;
  const int m2 = samples - m1;
  prof.x.push_back(r_plus);
  for (int j = 1; j <= m1; ++j)
    prof.x.push_back(r_plus * (1.0 + static_cast<double>(j) / m1));
  for (int k = 1; k <= m2; ++k)
    prof.x.push_back(r_plus * (2.0 + 0.5 * static_cast<double>(k) / m2));

  auto slope = [&](double r) {
    const double e = std::pow(r / (3.0 * r_plus), sg);
    return -e / std::sqrt(1.0 - e * e);
  };
  prof.value.push_back(0.0);
  for (std::size_t i = 1; i < prof.x.size(); ++i)
    prof.value.push_back(prof.value[i - 1] + gauss15(slope, prof.x[i - 1], prof.x[i]));

  for (double r : prof.x) {
    const double xi = r / (3.0 * r_plus);
    const double e = std::pow(xi, sg);
    const double wp = -e / std::sqrt(1.0 - e * e);
    const double wpp =
        -(sg / (3.0 * r_plus)) * std::pow(xi, sg - 1.0) / std::pow(1.0 - e * e, 1.5);
    prof.margin.push_back(sg / r - wpp / (wp * (1.0 + wp * wp)));
  }
  prof.rate = sg;
  stamp(prof);
  prof.note = format_note(
      "exponent sigma = %.9g; drop over [r_plus, 2 r_plus] = %.9g (certifies at "
      "least r_plus 3^-sigma of inward motion)",
      sg, prof.value[static_cast<std::size_t>(m1)]);
  return prof;
}

BarrierProfile build_cylindrical_subsolution(const SpeedSpec& spec, double alpha,
                                             int samples) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (alpha != spec.alpha) throw DomainError("alpha disagrees with the parsed speed");
  if (samples < 16) throw DomainError("need at least 16 samples");

  const double fh0 = fhat(spec, 0.0);
  const double fh0a = std::pow(fh0, alpha);
  const bool homothetic = fh0 > 1e-9;

  auto g = [&](double x) { return std::pow(fhat(spec, x), alpha) - fh0a; };
  double guess = 1.0;
  auto ginv = [&](double s) {
    guess = invert_increasing(g, s, guess);
    return guess;
  };
  auto recip = [&](double s) { return 1.0 / ginv(s); };
  auto v_int = [&](double s) { return s / ginv(s); };

  // cross-section in the slope variable w = -v': x(w) = int 1/g^{-1},
  // v(w) = 1 - int s/g^{-1}; then g(-v'') = -v' holds identically.
  const int mc = samples;
  std::vector<double> xs, vs, ws;
  const double w1 = 1.0 / (static_cast<double>(mc) * mc);
  // Head cell in the cone variable: int_0^w1 ds/g^{-1}(s) = int_0^{g^{-1}(w1)}
  // g'(xi)/xi dxi. The substituted form never subtracts fhat(0) near the
  // singularity (g' comes from exact gradients), so it both integrates the
  // head accurately and detects genuine divergence.
  auto gprime_over = [&](double xi) {
    Vec q(static_cast<std::size_t>(spec.n), 1.0);
    q[0] = xi;
    const auto d = derivatives(spec, q, 1);
    return alpha * std::pow(d.value, alpha - 1.0) * d.grad[0] / xi;
  };
  const auto head = improper_from_zero(gprime_over, ginv(w1), 48);
  if (!head.convergent)
    throw HypothesisError(
        "1/g^-1 not integrable near zero: the cross-section cannot close");
  const auto vhead = improper_from_zero(v_int, w1, 48);
  double x_acc = head.value;
  double v_acc = 1.0 - vhead.value;
  double w_prev = w1;
  xs.push_back(x_acc);
  vs.push_back(v_acc);
  ws.push_back(w1);
  for (int k = 2; k <= mc; ++k) {
    const double wk = static_cast<double>(k) * k / (static_cast<double>(mc) * mc);
    x_acc += gauss15(recip, w_prev, wk);
    v_acc -= gauss15(v_int, w_prev, wk);
    w_prev = wk;
    if (v_acc < 0.55) break;  // keep the validity window v > 1/2 with room
    xs.push_back(x_acc);
    vs.push_back(v_acc);
    ws.push_back(wk);
  }
  if (xs.size() < 8) throw HypothesisError("cross-section window too thin");

  // pointwise inequality data; the base part is independent of the offset r0
  std::vector<double> base(xs.size()), rhs_part(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = ws[i];
    const double arg = vs[i] * ginv(w) / (1.0 + w * w);
    rhs_part[i] = std::pow(vs[i], -alpha) *
                  std::pow(1.0 + w * w, 0.5 * (1.0 - alpha)) *
                  std::pow(fhat(spec, arg), alpha);
    base[i] = fh0a * (vs[i] + xs[i] * w) - rhs_part[i];
  }

  BarrierProfile prof;
  prof.kind = "cylindrical_subsolution";
  double r0;
  std::vector<double> margins(xs.size());
  if (homothetic) {
    double c1 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      c1 = std::max(c1, -base[i] / (fh0a * ws[i]));
    r0 = 1.05 * c1 + 0.1;
    for (std::size_t i = 0; i < xs.size(); ++i)
      margins[i] = base[i] + r0 * fh0a * ws[i];
    prof.rate = fh0a;
    prof.note = format_note(
        "homothetic: an interior tangent sphere keeps radius "
        "(1 - (1+alpha) %.9g t)^(1/(1+alpha)); cap offset r0 = %.9g",
        fh0a, r0);
  } else {
    double vstar = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      vstar = std::max(vstar, rhs_part[i] / ws[i]);
    const double speed = 1.05 * vstar + 0.1;
    r0 = 0.5;
    for (std::size_t i = 0; i < xs.size(); ++i)
      margins[i] = speed * ws[i] - rhs_part[i];
    prof.rate = speed;
    prof.note = format_note(
        "translating: the boundary profile slides along the axis at speed %.9g "
        "(zero boundary speed case); cap offset r0 = %.9g",
        speed, r0);
  }

  const int flat_m = std::max(4, samples / 10);
  for (int j = 0; j <= flat_m; ++j) {
    prof.x.push_back(r0 * j / flat_m);
    prof.value.push_back(1.0);
    prof.margin.push_back(0.0);  // equality on the flat cylindrical part
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    prof.x.push_back(r0 + xs[i]);
    prof.value.push_back(vs[i]);
    prof.margin.push_back(margins[i]);
  }
  stamp(prof);
  return prof;
}

BarrierProfile build_ridge_supersolution(const SpeedSpec& spec, double u0,
                                         int samples) {
  if (spec.alpha != 1.0) throw HypothesisError("the ridge supersolution needs alpha = 1");
  if (!(u0 > 0.0)) throw DomainError("u0 must be positive");
  if (samples < 32) throw DomainError("need at least 32 samples");
  const auto dual = dualize(spec);
  const double c = fhat(dual, 0.0);
  if (!(c > 1e-9))
    throw HypothesisError("dual profile vanishes on the boundary: ridges dissolve");

  auto g = [&](double x) { return 1.0 / c - 1.0 / fhat(dual, x); };
  const double g_cap = g(1e15);
  double guess = 1.0;
  auto ginv = [&](double y) {
    if (!(y < 0.999 * g_cap))
      throw NumericError("cross-section slope outside the invertible range");
    guess = invert_increasing(g, y, guess);
    return guess;
  };

  // integrability of dz / ((1-z) g^{-1}(z/(2c))) at z = 0, probed in the cone
  // variable (z = 2c g(xi)) where no subtraction of 1/c occurs
  auto dual_d1 = [&](double xi) {
    Vec q(static_cast<std::size_t>(dual.n), 1.0);
    q[0] = xi;
    return derivatives(dual, q, 1).grad[0];
  };
  const auto probe = improper_from_zero(
      [&](double xi) {
        const double fd = fhat(dual, xi);
        return dual_d1(xi) / (fd * fd * xi);
      },
      1e-3, 40);
  if (!probe.convergent)
    throw HypothesisError("cross-section equation not integrable at the ridge");

  // curvature relation in the variables v = u sigma' - sigma + 1, w = sqrt(v):
  // d Phi = dv / ((1-v) g^{-1}(v/(2c))) integrates to (1/2) log((1+u^2)/(1+u0^2)).
  auto phi_w = [&](double w) {
    const double z = w * w;
    return 2.0 * w / ((1.0 - z) * ginv(z / (2.0 * c)));
  };
  // int_0^a of an even smooth integrand: a * f(a/sqrt(3)) is exact through w^3
  auto even_head = [](const RealFn& f, double a) {
    return a * f(a / 1.7320508075688772);
  };
  const double w_seed = 9.5367431640625e-07;  // 2^-20
  const double t_end = 0.5 * std::log((1.0 + 2.25 * u0 * u0) / (1.0 + u0 * u0));

  // bracket the parameter value reaching u = 1.5 u0, then bisect inside
  double lo_w = w_seed, phi_acc = even_head(phi_w, w_seed), hi_w = 0.0;
  for (int j = 0; j < 60 && lo_w < 0.999; ++j) {
    const double nxt = std::min(2.0 * lo_w, 0.999);
    const double inc = gauss15(phi_w, lo_w, nxt);
    if (phi_acc + inc >= t_end) {
      hi_w = nxt;
      break;
    }
    phi_acc += inc;
    lo_w = nxt;
  }
  if (hi_w == 0.0) throw NumericError("ridge collar parameter out of range");
  const double w_end = bisect(
      [&](double w) { return phi_acc + gauss15(phi_w, lo_w, w) - t_end; }, lo_w, hi_w);

  const int flat_m = std::max(4, samples / 8);
  const int mc = samples - flat_m - 1;
  const int half = 2 * mc;

  // cumulative Phi on half-steps, then u; sigma/u by Simpson on full steps
  std::vector<double> phiv(half + 1, 0.0), uu(half + 1, u0);
  const double dw = w_end / half;
  double acc = even_head(phi_w, dw);
  phiv[1] = acc;
  for (int j = 2; j <= half; ++j) {
    acc += gauss15(phi_w, dw * (j - 1), dw * j);
    phiv[j] = acc;
  }
  for (int j = 1; j <= half; ++j)
    uu[j] = std::sqrt((1.0 + u0 * u0) * std::exp(2.0 * phiv[j]) - 1.0);

  auto sig_w = [&](int j) {
    const double w = dw * j;
    const double u = uu[j];
    return -(1.0 + u * u) / (u * u * u * ginv(w * w / (2.0 * c))) * 2.0 * w;
  };

  BarrierProfile prof;
  prof.kind = "ridge_supersolution";
  for (int j = 0; j <= flat_m; ++j) {
    prof.x.push_back(u0 * j / flat_m);
    prof.value.push_back(1.0);
    prof.margin.push_back(0.0);  // the flat disc meets the relation exactly
  }
  // first cell by the open midpoint rule: the integrand extends evenly to 0
  double ratio = 1.0 / u0 + 2.0 * dw * sig_w(1);
  double sigma = ratio * uu[2];
  auto push = [&](int k, double sig) {
    const double wk = dw * 2 * k;
    const double v = wk * wk;
    prof.x.push_back(uu[2 * k]);
    prof.value.push_back(sig);
    prof.margin.push_back((1.0 - sig * (1.0 - v)) / c - v / (2.0 * c));
  };
  push(1, sigma);
  for (int k = 2; k <= mc; ++k) {
    const double inc =
        (2.0 * dw / 6.0) * (sig_w(2 * k - 2) + 4.0 * sig_w(2 * k - 1) + sig_w(2 * k));
    ratio += inc;
    sigma = ratio * uu[2 * k];
    push(k, sigma);
  }
  prof.rate = c;
  stamp(prof);
  prof.note = format_note(
      "flat disc of radius %.9g shrinks by r(t)^2 = r(0)^2 - 2 t / %.9g while the "
      "collar stays outside the flow",
      u0, c);
  return prof;
}

// Trajectory audit ------------------------------------------------------------

bool BoundReport::all_passed() const {
  for (const auto& c : checks)
    if (c.applicable && !c.passed) return false;
  return true;
}

const BoundCheck* BoundReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

BoundReport verify_trajectory(const Trajectory& traj, const SpeedSpec& spec) {
  const std::size_t K = traj.profiles.size();
  if (K < 2 || traj.times.size() != K || traj.diagnostics.size() != K)
    throw HypothesisError("trajectory audit needs >= 2 stored profiles with diagnostics");

  BoundReport rep;
  if (traj.profiles.front().chart != Chart::Latitude) {
    for (const char* name : {"lower_speed", "speed_ratio", "harnack_monitor",
                             "pinching_ratio"}) {
      BoundCheck c;
      c.name = name;
      c.note = "audit is defined on the latitude chart";
      rep.checks.push_back(c);
    }
    return rep;
  }

  const double a = spec.alpha;
  const double expo = a / (1.0 + a);
  const auto conds = check_conditions(spec);
  const bool inv_concave = conds.holds("inverse_concave");

  std::vector<std::vector<double>> psi(K);
  for (std::size_t k = 0; k < K; ++k) psi[k] = rhs(traj.profiles[k], spec);

  // lower speed bound: S(t2) >= (s(t1) - s(t2)) / ((1+alpha)(t2 - t1))
  {
    BoundCheck c;
    c.name = "lower_speed";
    c.applicable = true;
    double worst = std::numeric_limits<double>::infinity();
    double at_t = 0.0, at_th = 0.0;
    for (std::size_t k = 1; k < K; ++k) {
      const double dt = traj.times[k] - traj.times[k - 1];
      const auto& prev = traj.profiles[k - 1].values;
      const auto& cur = traj.profiles[k].values;
      for (std::size_t j = 0; j < cur.size(); ++j) {
        const double speed = -psi[k][j];
        if (!std::isfinite(speed)) continue;
        const double m = speed - (prev[j] - cur[j]) / ((1.0 + a) * dt);
        if (m < worst) {
          worst = m;
          at_t = traj.times[k];
          at_th = traj.profiles[k].grid[j];
        }
      }
    }
    c.worst = worst;
    c.passed = worst >= -kMarginTol;
    c.note = format_note("tightest at t = %.6g, theta = %.6g", at_t, at_th);
    rep.checks.push_back(c);
  }

  // speed ratio against the shrinking-sphere envelope; no universal constant is
  // asserted, so only unbounded growth of the ratio is flagged
  {
    BoundCheck c;
    c.name = "speed_ratio";
    const auto& init = traj.profiles.front().values;
    const double r_min = *std::min_element(init.begin(), init.end());
    const double r_max = *std::max_element(init.begin(), init.end());
    std::vector<double> q;
    for (std::size_t k = 0; k < K; ++k) {
      if (!(traj.times[k] > 0.0) || !std::isfinite(traj.diagnostics[k].max_S)) continue;
      const double env = (r_max / r_min) *
                         (std::pow(r_min, -a) + std::pow(traj.times[k], -expo));
      q.push_back(traj.diagnostics[k].max_S / env);
    }
    if (!q.empty()) {
      c.applicable = true;
      c.worst = *std::max_element(q.begin(), q.end());
      const std::size_t mid = (q.size() + 1) / 2;
      double early = 0.0, late = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        double& slot = i < mid ? early : late;
        slot = std::max(slot, q[i]);
      }
      c.passed = q.size() < 2 || late <= 1000.0 * std::max(early, 1e-300);
      c.note = "empirical sup of max S over (R+/R-)(R-^-alpha + t^-alpha/(1+alpha))";
    } else {
      c.note = "no stored states at positive time";
    }
    rep.checks.push_back(c);
  }

  // indices of stored states that are strictly convex
  std::vector<std::size_t> convex;
  for (std::size_t k = 0; k < K; ++k)
    if (traj.diagnostics[k].min_r1 > 1e-9 && traj.diagnostics[k].min_r2 > 0.0)
      convex.push_back(k);

  // Harnack-style monitor: psi * t^{alpha/(1+alpha)} non-increasing per node
  {
    BoundCheck c;
    c.name = "harnack_monitor";
    if (!inv_concave) {
      c.note = "speed not verified inverse-concave";
    } else if (convex.size() < 2) {
      c.note = "fewer than two stored convex states";
    } else {
      c.applicable = true;
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < convex.size(); ++i) {
        const std::size_t k0 = convex[i - 1], k1 = convex[i];
        if (k1 != k0 + 1) continue;
        const double f0 = std::pow(traj.times[k0], expo);
        const double f1 = std::pow(traj.times[k1], expo);
        for (std::size_t j = 0; j < psi[k1].size(); ++j) {
          const double m = psi[k0][j] * f0 - psi[k1][j] * f1;
          if (std::isfinite(m)) worst = std::min(worst, m);
        }
      }
      c.worst = worst;
      c.passed = worst >= -kMarginTol;
    }
    rep.checks.push_back(c);
  }

  // pinching: max_i r_i / f_*(r) non-increasing (alpha = 1, concave dual)
  {
    BoundCheck c;
    c.name = "pinching_ratio";
    if (a != 1.0 || !inv_concave) {
      c.note = "needs alpha = 1 and an inverse-concave speed";
    } else if (convex.size() < 2) {
      c.note = "fewer than two stored convex states";
    } else {
      c.applicable = true;
      const auto dual = dualize(spec);
      const int n = spec.n;
      std::vector<double> pin(convex.size());
      for (std::size_t i = 0; i < convex.size(); ++i) {
        const auto rr = radii(traj.profiles[convex[i]]);
        double p = 0.0;
        Vec point(static_cast<std::size_t>(n));
        for (std::size_t j = 0; j < rr.r1.size(); ++j) {
          point[0] = rr.r1[j];
          for (int d = 1; d < n; ++d) point[static_cast<std::size_t>(d)] = rr.r2[j];
          p = std::max(p, std::max(rr.r1[j], rr.r2[j]) / value(dual, point));
        }
        pin[i] = p;
      }
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < pin.size(); ++i)
        if (convex[i] == convex[i - 1] + 1) worst = std::min(worst, pin[i - 1] - pin[i]);
      c.worst = worst;
      c.passed = worst >= -kMarginTol;
    }
    rep.checks.push_back(c);
  }

  return rep;
}

}  // namespace curvflow
