#include "curvflow/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "curvflow/numerics.hpp"

namespace curvflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEigTol = 1e-8;    // scaled eigenvalue tolerance for PSD/NSD tests
constexpr double kEqTol = 1e-10;    // relative tolerance for exact identities
constexpr double kZeroTol = 1e-8;   // "vanishes on the boundary" tolerance
constexpr double kSlopeTol = 0.05;  // decay-exponent threshold for dyadic tails

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double quad_form(const SymMat& m, const Vec& v) {
  double s = 0.0;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) s += m.at(i, j) * v[i] * v[j];
  return s;
}

double lsq_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

Vec with_leading_zero(const Vec& face) {
  Vec x(face.size() + 1, 0.0);
  std::copy(face.begin(), face.end(), x.begin() + 1);
  return x;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inapplicable: return "inapplicable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const ConditionResult* ConditionsReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

bool ConditionsReport::holds(const std::string& name) const {
  const auto* e = find(name);
  return e != nullptr && e->verdict == Verdict::Holds;
}

namespace {

// Inverse-concavity of a (possibly restricted) speed over sampled rays:
// worst scaled minimum eigenvalue of Q and the sample attaining it.
ConditionResult q_psd_over_samples(const SpeedSpec& spec, const char* name, int samples,
                                   std::uint64_t seed) {
  ConditionResult c;
  c.name = name;
  SplitMix64 rng(seed);
  double worst = kInf;
  Vec w;
  for (int i = 0; i < samples; ++i) {
    Vec p = sample_ray(rng, spec.n);
    SymMat q = q_matrix(spec, p);
    const double m = min_eigenvalue(q) / std::max(1.0, inf_norm(q));
    if (m < worst) {
      worst = m;
      w = p;
    }
  }
  c.margin = worst;
  c.witness = w;
  c.verdict = worst >= -kEigTol ? Verdict::Holds : Verdict::Fails;
  return c;
}

// Positivity of the first partial derivative approaching the face {x_1 = 0},
// with a two-shell decay test to catch gradients that vanish in the limit.
ConditionResult boundary_gradient_entry(const SpeedSpec& spec, const char* name,
                                        const std::vector<Vec>& faces) {
  ConditionResult c;
  c.name = name;
  const double s_near = 0x1p-10;
  const double s_far = 0x1p-20;
  double worst = kInf, min_ratio = kInf, max_ratio = 0.0;
  Vec w;
  for (const auto& face : faces) {
    Vec x = with_leading_zero(face);
    x[0] = s_far;
    const double g_far = derivatives(spec, x, 1).grad[0];
    Vec x2 = x;
    x2[0] = s_near;
    const double g_near = derivatives(spec, x2, 1).grad[0];
    const double ratio = g_far / std::max(g_near, 1e-300);
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
    if (g_far < worst) {
      worst = g_far;
      w = x;
    }
  }
  if (worst <= 0.0) {
    c.margin = worst;
    c.verdict = Verdict::Fails;
    c.witness = w;
    c.note = "first derivative non-positive near the face";
  } else if (min_ratio < 0.2) {
    c.margin = 0.0;
    c.verdict = Verdict::Fails;
    c.witness = w;
    c.note = "first derivative decays to zero approaching the face (shell ratio " +
             format_double(min_ratio) + ")";
  } else {
    c.margin = worst;
    c.verdict = Verdict::Holds;
    c.witness = w;
    if (max_ratio > 5.0)
      c.note = "derivative grows without bound approaching the face; treated as positive";
  }
  return c;
}

}  // namespace

ConditionsReport check_conditions(const SpeedSpec& spec, int samples, std::uint64_t seed) {
  ConditionsReport rep;
  rep.samples = samples;
  rep.seed = seed;
  const int n = spec.n;
  const SpeedSpec dual = dualize(spec);

  SplitMix64 rng(seed);
  std::vector<Vec> pts(static_cast<std::size_t>(samples));
  for (auto& p : pts) p = sample_ray(rng, n);

  // boundary faces: (n-1)-dim rays scaled to sup-norm one (degree-zero checks)
  SplitMix64 brng(seed ^ UINT64_C(0x9E3779B97F4A7C15));
  std::vector<Vec> faces(static_cast<std::size_t>(samples));
  for (auto& f : faces) {
    f = sample_ray(brng, n - 1);
    const double m = *std::max_element(f.begin(), f.end());
    for (double& v : f) v /= m;
  }
  // gradient entries only need a modest number of shells
  std::vector<Vec> grad_faces(faces.begin(),
                              faces.begin() + std::min<std::size_t>(faces.size(), 200));

  {  // invariance under coordinate permutations
    ConditionResult c;
    c.name = "symmetric";
    double worst = 0.0;
    Vec w;
    for (const auto& p : pts) {
      const double f0 = value(spec, p);
      Vec q = p;
      std::reverse(q.begin(), q.end());
      double dev = std::abs(value(spec, q) - f0);
      q = p;
      std::swap(q[0], q[n - 1]);
      dev = std::max(dev, std::abs(value(spec, q) - f0));
      dev /= std::max(1.0, std::abs(f0));
      if (dev > worst) {
        worst = dev;
        w = p;
      }
    }
    c.margin = -worst;
    c.witness = w;
    c.verdict = worst <= kEqTol ? Verdict::Holds : Verdict::Fails;
    rep.entries.push_back(std::move(c));
  }

  {  // strict monotonicity: scale-free margin min_i f^i x_i / f (Euler-summed to 1)
    ConditionResult c;
    c.name = "monotone";
    double worst = kInf;
    Vec w;
    for (const auto& p : pts) {
      const auto d = derivatives(spec, p, 1);
      for (int i = 0; i < n; ++i) {
        const double m = d.grad[i] * p[i] / d.value;
        if (m < worst) {
          worst = m;
          w = p;
        }
      }
    }
    c.margin = worst;
    c.witness = w;
    c.verdict = worst > 0.0 ? Verdict::Holds : Verdict::Fails;
    if (!spec.monotonicity_verified)
      c.note = "signed combination: monotonicity verified at samples only";
    rep.entries.push_back(std::move(c));
  }

  {  // degree-one homogeneity and the Euler identity
    ConditionResult c;
    c.name = "homogeneous_degree_one";
    double worst = 0.0;
    Vec w;
    for (const auto& p : pts) {
      const auto d = derivatives(spec, p, 1);
      double dev = std::abs(dot(d.grad, p) - d.value) / std::abs(d.value);
      for (double lam : {2.0, 1.0 / 3.0}) {
        Vec q = p;
        for (double& v : q) v *= lam;
        dev = std::max(dev, std::abs(value(spec, q) - lam * d.value) /
                                (lam * std::abs(d.value)));
      }
      if (dev > worst) {
        worst = dev;
        w = p;
      }
    }
    c.margin = -worst;
    c.witness = w;
    c.verdict = worst <= kEqTol ? Verdict::Holds : Verdict::Fails;
    rep.entries.push_back(std::move(c));
  }

  {  // value one on the diagonal
    ConditionResult c;
    c.name = "normalized";
    const Vec ones(static_cast<std::size_t>(n), 1.0);
    const double dev = std::abs(value(spec, ones) - 1.0);
    c.margin = -dev;
    c.witness = ones;
    c.verdict = dev <= kEqTol ? Verdict::Holds : Verdict::Fails;
    rep.entries.push_back(std::move(c));
  }

  {  // hessian definiteness both ways in one sampling pass
    ConditionResult cc, cv;
    cc.name = "concave";
    cv.name = "convex";
    double worst_cc = kInf, worst_cv = kInf;
    Vec wcc, wcv;
    for (const auto& p : pts) {
      const auto d = derivatives(spec, p, 2);
      const double scale = std::max(1.0, inf_norm(d.hess));
      const double mcc = -max_eigenvalue(d.hess) / scale;
      const double mcv = min_eigenvalue(d.hess) / scale;
      if (mcc < worst_cc) {
        worst_cc = mcc;
        wcc = p;
      }
      if (mcv < worst_cv) {
        worst_cv = mcv;
        wcv = p;
      }
    }
    cc.margin = worst_cc;
    cc.witness = wcc;
    cc.verdict = worst_cc >= -kEigTol ? Verdict::Holds : Verdict::Fails;
    cv.margin = worst_cv;
    cv.witness = wcv;
    cv.verdict = worst_cv >= -kEigTol ? Verdict::Holds : Verdict::Fails;
    rep.entries.push_back(std::move(cc));
    rep.entries.push_back(std::move(cv));
  }

  {  // inverse-concavity through Q[f]
    ConditionResult c;
    c.name = "inverse_concave";
    double worst = kInf;
    Vec w;
    for (const auto& p : pts) {
      SymMat q = q_matrix(spec, p);
      const double m = min_eigenvalue(q) / std::max(1.0, inf_norm(q));
      if (m < worst) {
        worst = m;
        w = p;
      }
    }
    c.margin = worst;
    c.witness = w;
    c.verdict = worst >= -kEigTol ? Verdict::Holds : Verdict::Fails;
    rep.entries.push_back(std::move(c));
  }

  // vanishing on the boundary for f and for its dual
  for (const auto& [name, sp] :
       {std::pair<const char*, const SpeedSpec*>{"vanishes_on_boundary", &spec},
        {"dual_vanishes_on_boundary", &dual}}) {
    ConditionResult c;
    c.name = name;
    double worst = 0.0;
    Vec w;
    for (const auto& face : faces) {
      Vec x = with_leading_zero(face);
      const double v = boundary_value(*sp, x);
      if (v > worst) {
        worst = v;
        w = x;
      }
    }
    c.margin = -worst;
    c.witness = w;
    c.verdict = worst <= kZeroTol ? Verdict::Holds : Verdict::Fails;
    rep.entries.push_back(std::move(c));
  }

  // inverse-concavity of the boundary restrictions of f and of the dual
  for (const auto& [name, sp] :
       {std::pair<const char*, const SpeedSpec*>{"restriction_inverse_concave", &spec},
        {"dual_restriction_inverse_concave", &dual}}) {
    Vec face_pt(static_cast<std::size_t>(n), 1.0);
    face_pt[static_cast<std::size_t>(n) - 1] = 0.0;
    const SpeedSpec rs = restrict_boundary(*sp, n - 1);
    if (is_identically_zero(rs) || boundary_value(*sp, face_pt) <= kZeroTol) {
      ConditionResult c;
      c.name = name;
      c.verdict = Verdict::Inapplicable;
      c.note = "the speed vanishes on boundary faces";
      rep.entries.push_back(std::move(c));
    } else {
      rep.entries.push_back(
          q_psd_over_samples(rs, name, samples, seed ^ UINT64_C(0xDA3E39CB94B95BDB)));
    }
  }

  rep.entries.push_back(
      boundary_gradient_entry(spec, "boundary_gradient_positive", grad_faces));
  rep.entries.push_back(
      boundary_gradient_entry(dual, "dual_boundary_gradient_positive", grad_faces));

  {
    ConditionResult c;
    c.name = "holder_estimates";
    c.verdict = Verdict::Inapplicable;
    c.note = "interior Holder continuity of second derivatives is assumed, not tested";
    rep.entries.push_back(std::move(c));
  }

  return rep;
}

FlatSideResult flat_side_dichotomy(const SpeedSpec& spec) {
  FlatSideResult r;
  if (spec.alpha < 1.0) {
    r.moves = true;
    r.reason = "exponent below one: flat pieces start moving immediately";
    return r;
  }
  if (spec.alpha > 1.0) {
    r.moves = false;
    r.reason = "exponent above one: flat pieces persist for a positive time";
    return r;
  }
  auto fhat = [&](double x) {
    Vec p(static_cast<std::size_t>(spec.n), 1.0);
    p[0] = x;
    return value(spec, p);
  };
  const double a = fhat(0x1p20);
  const double b = fhat(0x1p40);
  r.fhat_unbounded = b > 1.5 * a;
  r.moves = r.fhat_unbounded;
  if (r.fhat_unbounded) {
    r.reason = "unit exponent with unbounded f(x,1,..,1): flat pieces move";
  } else {
    r.fhat_limit = b;
    r.reason = "unit exponent with bounded f(x,1,..,1): flat pieces persist";
  }
  return r;
}

PersistenceResult cylinder_persistence(const SpeedSpec& spec, int k) {
  const int n = spec.n;
  if (k < 1 || k >= n)
    throw HypothesisError("flat directions k must satisfy 1 <= k < n");
  const double alpha = spec.alpha;
  PersistenceResult out;

  if (k == 1) {
    Vec edge(static_cast<std::size_t>(n), 1.0);
    edge[0] = 0.0;
    const double c0 = std::pow(boundary_value(spec, edge), alpha);
    auto g = [&](double x) {
      Vec p(static_cast<std::size_t>(n), 1.0);
      p[0] = x;
      return std::pow(value(spec, p), alpha) - c0;
    };
    if (!(g(0.25) < g(0.5) && g(0.5) < g(1.0)))
      throw HypothesisError("profile speed gap is not increasing");
    const double upper = std::min(1.0, g(1.0) * (1.0 - 1e-12));
    auto h = [&](double z) { return 1.0 / invert_increasing(g, z, 0.5); };
    const auto res = improper_from_zero(h, upper, 30);
    out.integral = res.value;
    out.integral_upper = upper;
    out.integral_finite = res.convergent;
    out.verdict = res.convergent ? Verdict::Holds : Verdict::Fails;
    out.note = res.convergent
                   ? "collapse requires infinite time: the flat region persists"
                   : "finite collapse time: the flat region vanishes instantly";
    return out;
  }

  // k >= 2: cross-section profile f_k(x, p) = f(x, p,..,p, 1,..,1)
  auto fk = [&](double x, double p) {
    Vec q(static_cast<std::size_t>(n), 1.0);
    q[0] = x;
    for (int i = 1; i < k; ++i) q[static_cast<std::size_t>(i)] = p;
    return value(spec, q);
  };
  auto fk0 = [&](double p) {
    Vec q(static_cast<std::size_t>(n), 1.0);
    q[0] = 0.0;
    for (int i = 1; i < k; ++i) q[static_cast<std::size_t>(i)] = p;
    return boundary_value(spec, q);
  };

  // growth of f_k(0,p)^alpha / p as p -> 0 (log-log slope)
  const bool cross_section_flat = fk0(0x1p-4) < 1e-280;
  if (cross_section_flat) {
    out.slope_exponent = 0.0;
    out.note = "the speed vanishes identically on the cylinder cross-section";
  } else {
    std::vector<double> xs, ys;
    for (int j = 4; j <= 24; ++j) {
      const double p = std::ldexp(1.0, -j);
      xs.push_back(std::log(p));
      ys.push_back(alpha * std::log(fk0(p)) - std::log(p));
    }
    out.slope_exponent = lsq_slope(xs, ys);
    if (out.slope_exponent < -kSlopeTol) {
      out.verdict = Verdict::Fails;
      out.note = "f(0,p,..,1)^alpha / p grows without bound: the region vanishes";
      return out;
    }
  }

  // collapse integral for a doubling constant V = 2^j
  const double x_cap = 0x1p60;
  ImproperResult last{};
  for (int j = 0; j <= 20; ++j) {
    const double V = std::ldexp(1.0, j);
    auto h = [&](double p) {
      const double base = std::pow(fk0(p), alpha);
      auto gp = [&](double x) { return std::pow(fk(x, p), alpha) - base; };
      const double y = V * p;
      if (gp(x_cap) < y) return 1.0 / x_cap;  // speed saturates: no deep collapse
      return 1.0 / invert_increasing(gp, y, 1.0);
    };
    last = improper_from_zero(h, 1.0, 24);
    if (last.convergent) {
      out.verdict = Verdict::Holds;
      out.integral = last.value;
      out.integral_finite = true;
      out.v_doubling = j;
      if (out.note.empty())
        out.note = "finite collapse integral: the flat region persists";
      return out;
    }
  }
  out.verdict = Verdict::Fails;
  out.integral = last.value;
  out.integral_finite = false;
  out.v_doubling = -1;
  out.note = "no doubling constant gives a finite collapse integral";
  return out;
}

PersistenceResult ridge_persistence(const SpeedSpec& spec) {
  PersistenceResult out;
  if (std::abs(spec.alpha - 1.0) > 1e-12) {
    out.verdict = Verdict::Inapplicable;
    out.note = "ridge test applies to the unit exponent only";
    return out;
  }
  const int n = spec.n;
  const SpeedSpec dual = dualize(spec);
  Vec edge(static_cast<std::size_t>(n), 1.0);
  edge[0] = 0.0;
  const double c = boundary_value(dual, edge);
  if (c <= kZeroTol) {
    out.verdict = Verdict::Inapplicable;
    out.note = "the dual speed vanishes at the ridge";
    return out;
  }
  auto g = [&](double x) {
    Vec p(static_cast<std::size_t>(n), 1.0);
    p[0] = x;
    return 1.0 / c - 1.0 / value(dual, p);
  };
  if (!(g(0.25) < g(0.5) && g(0.5) < g(1.0)))
    throw HypothesisError("ridge speed gap is not increasing");
  const double upper = std::min(1.0, 0.5 * g(0x1p20));
  auto h = [&](double z) { return 1.0 / invert_increasing(g, z, 0.5); };
  const auto res = improper_from_zero(h, upper, 30);
  out.integral = res.value;
  out.integral_upper = upper;
  out.integral_finite = res.convergent;
  out.verdict = res.convergent ? Verdict::Holds : Verdict::Fails;
  out.note = res.convergent ? "the ridge persists for a positive time"
                            : "the ridge smooths out instantly";
  return out;
}

namespace {

// Witness for a failing boundary Q: minimum-eigenvalue direction at the stored
// sample, projected onto { b : sum f^i b_i = 0 } and normalized. The projection
// can only lower Q(b,b), so the defect stays positive.
SingularityCertificate boundary_defect_certificate(const std::string& kind,
                                                   const SpeedSpec& restricted,
                                                   const Vec& witness, double alpha) {
  SingularityCertificate c;
  c.kind = kind;
  Vec a = witness.empty() ? Vec(static_cast<std::size_t>(restricted.n), 1.0) : witness;
  const auto d = derivatives(restricted, a, 1);
  SymMat q = q_matrix(restricted, a);
  Vec b;
  min_eigenvalue(q, &b);
  const double mu = dot(d.grad, b) / dot(d.grad, a);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] -= mu * a[i];
  double nb = std::sqrt(dot(b, b));
  for (double& v : b) v /= nb;
  const double defect = -quad_form(q, b);
  c.point = with_leading_zero(a);
  c.direction = b;
  c.defect = defect;
  if (kind == "curvature_blowup") {
    c.rate = -defect / (2.0 * d.value * d.value);
    c.detail =
        "a principal radius of curvature reaches zero along the marked boundary "
        "direction at the given initial rate";
  } else {
    c.rate = -alpha * std::pow(d.value, alpha - 1.0) * defect / 2.0;
    c.detail =
        "a principal curvature reaches zero along the marked boundary direction "
        "at the given initial rate";
  }
  return c;
}

}  // namespace

std::vector<SingularityCertificate> singularity_flags(const SpeedSpec& spec,
                                                      const ConditionsReport& conditions) {
  std::vector<SingularityCertificate> flags;
  const int n = spec.n;
  const double alpha = spec.alpha;
  const auto* dual_vanish = conditions.find("dual_vanishes_on_boundary");
  const auto* dual_grad = conditions.find("dual_boundary_gradient_positive");
  const auto* restr = conditions.find("restriction_inverse_concave");
  const auto* dual_restr = conditions.find("dual_restriction_inverse_concave");

  if (std::abs(alpha - 1.0) > 1e-12 && dual_vanish != nullptr &&
      dual_vanish->verdict == Verdict::Fails &&
      (dual_grad == nullptr || dual_grad->verdict != Verdict::Fails)) {
    SingularityCertificate c;
    c.kind = "smoothness_loss";
    Vec edge(static_cast<std::size_t>(n), 1.0);
    edge[0] = 0.0;
    const double v = boundary_value(dualize(spec), edge);
    c.point = edge;
    c.defect = v;
    c.rate = -std::pow(v, -alpha);
    c.detail =
        "flat faces translate inward at a finite speed, so edges between them "
        "cannot round off when the exponent differs from one";
    flags.push_back(std::move(c));
  }

  if (std::abs(alpha - 1.0) <= 1e-12 && dual_restr != nullptr &&
      dual_restr->verdict == Verdict::Fails) {
    flags.push_back(boundary_defect_certificate(
        "curvature_blowup", restrict_boundary(dualize(spec), n - 1), dual_restr->witness,
        alpha));
  }

  if (restr != nullptr && restr->verdict == Verdict::Fails) {
    flags.push_back(boundary_defect_certificate(
        "convexity_loss", restrict_boundary(spec, n - 1), restr->witness, alpha));
  }

  return flags;
}

namespace {

enum class TraceKind { PlainGradient, WeightedSquare };

// inf over { f(kappa) = 1, max kappa_i >= r } of the gradient trace (plain or
// kappa^2-weighted). Parametrization: largest coordinate q >= max(r,1), last
// coordinate s solved from the constraint by bisection, middle coordinates
// tau*s with tau swept on a dyadic grid and refined (exact for n <= 3; for
// larger n the equal-middle-coordinate family is a documented approximation).
double sigma_min_impl(const SpeedSpec& spec, double r, TraceKind kind) {
  const int n = spec.n;
  auto assemble = [&](double q, double tau, double s) {
    Vec kappa(static_cast<std::size_t>(n), tau * s);
    kappa[0] = q;
    kappa[static_cast<std::size_t>(n) - 1] = s;
    return kappa;
  };
  auto objective = [&](const Vec& kappa) {
    const auto d = derivatives(spec, kappa, 1);
    double t = 0.0;
    for (int i = 0; i < n; ++i)
      t += kind == TraceKind::PlainGradient ? d.grad[i]
                                            : d.grad[i] * kappa[i] * kappa[i];
    return t;
  };
  auto eval_q_tau = [&](double q, double tau) {
    // f is increasing in s; keep all coordinates <= q so q stays the max
    double lo = 1e-12 * q, hi = q;
    if (value(spec, assemble(q, tau, lo)) >= 1.0) return kInf;
    if (value(spec, assemble(q, tau, hi)) < 1.0) return kInf;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (value(spec, assemble(q, tau, mid)) < 1.0 ? lo : hi) = mid;
    }
    return objective(assemble(q, tau, 0.5 * (lo + hi)));
  };
  auto eval_q = [&](double q) {
    if (n == 2) return eval_q_tau(q, 1.0);
    double best = kInf, best_tau = 1.0;
    for (int i = 0; i <= 12; ++i) {
      const double tau = std::ldexp(1.0, -i);
      const double v = eval_q_tau(q, tau);
      if (v < best) {
        best = v;
        best_tau = tau;
      }
    }
    if (!std::isfinite(best)) return best;
    const double lo = std::log(best_tau / 2.0);
    const double hi = std::log(std::min(1.0, best_tau * 2.0));
    const double t = golden_min([&](double u) { return eval_q_tau(q, std::exp(u)); },
                                lo, hi, 16);
    return std::min(best, eval_q_tau(q, std::exp(t)));
  };

  const double q_lo = std::max(r, 1.0);
  double best = kInf;
  int best_i = -1;
  for (int i = 0; i <= 12; ++i) {
    const double v = eval_q(q_lo * std::ldexp(1.0, i));
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  if (best_i < 0) return kInf;
  const double lo = std::log(q_lo * std::ldexp(1.0, std::max(0, best_i - 1)));
  const double hi = std::log(q_lo * std::ldexp(1.0, std::min(12, best_i + 1)));
  const double u = golden_min([&](double t) { return eval_q(std::exp(t)); }, lo, hi, 16);
  return std::min(best, eval_q(std::exp(u)));
}

struct TraceIntegral {
  Verdict verdict = Verdict::Inconclusive;
  double value = 0.0;
  double gamma = 0.0;  // fitted decay exponent of the dyadic contributions
};

// integral_1^infty dr / (r sigma(r)) on dyadic knots r = 2^j (trapezoid in
// log r), with a geometric tail bound from the fitted decay exponent. An
// infeasible sigma (= infinity) truncates the integrand to zero.
TraceIntegral trace_integral(const std::function<double(double)>& sigma) {
  constexpr int kKnots = 22;
  const double ln2 = std::log(2.0);
  std::vector<double> inv(kKnots + 1, 0.0);
  for (int j = 0; j <= kKnots; ++j) {
    const double s = sigma(std::ldexp(1.0, j));
    inv[static_cast<std::size_t>(j)] = (std::isfinite(s) && s > 0.0) ? 1.0 / s : 0.0;
  }
  std::vector<double> term(kKnots);
  double partial = 0.0;
  for (int j = 0; j < kKnots; ++j) {
    term[static_cast<std::size_t>(j)] =
        0.5 * ln2 * (inv[static_cast<std::size_t>(j)] + inv[static_cast<std::size_t>(j) + 1]);
    partial += term[static_cast<std::size_t>(j)];
  }
  TraceIntegral out;
  out.value = partial;
  if (term.back() == 0.0) {
    // sigma became infeasible: the integrand is compactly supported
    out.verdict = Verdict::Holds;
    out.gamma = kInf;
    return out;
  }
  std::vector<double> xs, ys;
  for (int j = kKnots - 8; j < kKnots; ++j) {
    const double t = term[static_cast<std::size_t>(j)];
    if (t <= 0.0) {
      out.verdict = Verdict::Fails;  // irregular decay: do not certify
      return out;
    }
    xs.push_back(static_cast<double>(j));
    ys.push_back(std::log2(t));
  }
  out.gamma = -lsq_slope(xs, ys);
  if (out.gamma > kSlopeTol) {
    const double rho = std::pow(2.0, -out.gamma);
    out.value += term.back() * rho / (1.0 - rho);
    out.verdict = Verdict::Holds;
  } else {
    out.verdict = Verdict::Fails;
  }
  return out;
}

}  // namespace

double sigma_dual_trace(const SpeedSpec& spec, double r) {
  return sigma_min_impl(dualize(spec), r, TraceKind::PlainGradient);
}

double sigma_weighted_square(const SpeedSpec& spec, double r) {
  return sigma_min_impl(spec, r, TraceKind::WeightedSquare);
}

std::vector<RegularityEntry> regularity_class(const SpeedSpec& spec,
                                              const ConditionsReport& conditions) {
  std::vector<RegularityEntry> out;
  const int n = spec.n;
  const double alpha = spec.alpha;
  const SpeedSpec dual = dualize(spec);
  const bool dual_concave = conditions.holds("inverse_concave");
  const bool concave = conditions.holds("concave");
  const bool convex = conditions.holds("convex");
  const bool f_vanishes = conditions.holds("vanishes_on_boundary");
  const bool dual_vanishes = conditions.holds("dual_vanishes_on_boundary");
  const bool grad_pos = conditions.holds("boundary_gradient_positive");
  const auto* restr = conditions.find("restriction_inverse_concave");
  const bool restr_ok = restr != nullptr && restr->verdict != Verdict::Fails;
  const bool restr_holds = conditions.holds("restriction_inverse_concave");

  // n = 2 boundary integral of 1 / f_*(1, x)
  RegularityEntry planar;
  planar.name = "planar_boundary_speed_integral";
  bool planar_finite = false;
  if (n != 2) {
    planar.verdict = Verdict::Inapplicable;
    planar.note = "defined in two dimensions only";
  } else {
    auto h = [&](double x) { return 1.0 / value(dual, Vec{1.0, x}); };
    const auto res = improper_from_zero(h, 1.0, 30);
    planar.quantity = res.value;
    planar_finite = res.convergent;
    planar.verdict = res.convergent ? Verdict::Holds : Verdict::Fails;
    planar.note = "integral of 1/f_*(1,x) over (0,1]";
  }
  out.push_back(planar);

  // trace localization integrals on both sides
  RegularityEntry dual_trace;
  dual_trace.name = "dual_trace_localization";
  const auto dti = trace_integral([&](double r) { return sigma_dual_trace(spec, r); });
  dual_trace.verdict = dti.verdict;
  dual_trace.quantity = dti.value;
  dual_trace.note = "integral of 1/(r sigma(r)) for the radii-side trace";
  out.push_back(dual_trace);

  RegularityEntry curv_trace;
  curv_trace.name = "curvature_trace_localization";
  const auto cti =
      trace_integral([&](double r) { return sigma_weighted_square(spec, r); });
  curv_trace.verdict = cti.verdict;
  curv_trace.quantity = cti.value;
  curv_trace.note = "integral of 1/(r sigma(r)) for the curvature-side trace";
  out.push_back(curv_trace);

  {  // unit exponent, concave speed: smooth until the inradius vanishes
    RegularityEntry e;
    e.name = "concave_smooth_to_extinction";
    if (std::abs(alpha - 1.0) > 1e-12) {
      e.verdict = Verdict::Inapplicable;
      e.note = "unit exponent only";
    } else if (concave && restr_ok) {
      e.verdict = Verdict::Holds;
      e.note = "concave speed with an inverse-concave boundary restriction";
    } else {
      e.verdict = Verdict::Fails;
      e.note = concave ? "boundary restriction is not inverse-concave"
                       : "the speed is not concave";
    }
    out.push_back(e);
  }

  {  // planar flows: smooth until extinction when the speed dominates the mean
    RegularityEntry e;
    e.name = "planar_no_singularities";
    if (n != 2) {
      e.verdict = Verdict::Inapplicable;
      e.note = "defined in two dimensions only";
    } else if (alpha > 1.0 + 1e-12) {
      e.verdict = Verdict::Inapplicable;
      e.note = "exponent above one is not covered";
    } else if (std::abs(alpha - 1.0) <= 1e-12) {
      e.verdict = Verdict::Holds;
      e.note = "unit exponent: converges to a round point";
    } else {
      // speed bounded below by a multiple of the arithmetic mean
      SplitMix64 rng(conditions.seed ^ UINT64_C(0x2545F4914F6CDD1D));
      double c = kInf;
      for (int i = 0; i < std::max(64, conditions.samples / 4); ++i) {
        const Vec p = sample_ray(rng, 2);
        c = std::min(c, value(spec, p) / (0.5 * (p[0] + p[1])));
      }
      c = std::min(c, 2.0 * boundary_value(spec, Vec{0.0, 1.0}));
      e.quantity = c;
      e.verdict = c > kZeroTol ? Verdict::Holds : Verdict::Fails;
      e.note = e.verdict == Verdict::Holds
                   ? "the speed dominates a multiple of the mean of the curvatures"
                   : "the speed degenerates against the mean of the curvatures";
    }
    out.push_back(e);
  }

  {  // rough planar data smooth out instantly
    RegularityEntry e;
    e.name = "instant_smoothing_planar";
    if (n != 2 || alpha > 1.0 + 1e-12) {
      e.verdict = Verdict::Inapplicable;
      e.note = "two dimensions with exponent at most one";
    } else if (!dual_concave) {
      e.verdict = Verdict::Fails;
      e.note = "requires an inverse-concave speed";
    } else {
      const double f_edge = boundary_value(spec, Vec{0.0, 1.0});
      const bool positive_route = grad_pos && f_edge > kZeroTol;
      const bool vanishing_route = f_vanishes && dual_vanishes && planar_finite;
      e.quantity = planar.quantity;
      e.verdict = (positive_route || vanishing_route) ? Verdict::Holds : Verdict::Fails;
      e.note = positive_route
                   ? "positive boundary speed with positive boundary gradient"
                   : (vanishing_route
                          ? "speed and dual vanish on the boundary with a finite "
                            "boundary integral"
                          : "neither the positive-boundary nor the vanishing-boundary "
                            "route applies");
    }
    out.push_back(e);
  }

  {  // definite hessian sign with boundary gradient control
    RegularityEntry e;
    e.name = "instant_smoothing_two_sided";
    if (alpha > 1.0 + 1e-12) {
      e.verdict = Verdict::Inapplicable;
      e.note = "exponent at most one only";
    } else {
      const bool ok = (concave || convex) && grad_pos && restr_holds;
      e.verdict = ok ? Verdict::Holds : Verdict::Fails;
      e.note = ok ? "definite hessian sign, positive boundary gradient, "
                    "inverse-concave restriction"
                  : "requires a definite hessian sign, a positive boundary gradient, "
                    "and an inverse-concave restriction";
    }
    out.push_back(e);
  }

  {  // localization through the radii-side trace
    RegularityEntry e;
    e.name = "instant_smoothing_dual_trace";
    if (alpha > 1.0 + 1e-12) {
      e.verdict = Verdict::Inapplicable;
      e.note = "exponent at most one only";
    } else {
      const bool ok =
          f_vanishes && dual_vanishes && dual_concave && dti.verdict == Verdict::Holds;
      e.quantity = dti.value;
      e.verdict = ok ? Verdict::Holds : Verdict::Fails;
      e.note = ok ? "both speeds vanish on the boundary and the radii-side trace "
                    "localizes"
                  : "requires vanishing boundary speeds, an inverse-concave speed, "
                    "and a finite radii-side trace integral";
    }
    out.push_back(e);
  }

  {  // localization through the curvature-side trace
    RegularityEntry e;
    e.name = "instant_smoothing_curvature_trace";
    if (std::abs(alpha - 1.0) > 1e-12) {
      e.verdict = Verdict::Inapplicable;
      e.note = "unit exponent only";
    } else {
      const bool ok = concave && dual_vanishes && restr_holds && grad_pos &&
                      cti.verdict == Verdict::Holds;
      e.quantity = cti.value;
      e.verdict = ok ? Verdict::Holds : Verdict::Fails;
      e.note = ok ? "concave speed with vanishing dual and a localizing "
                    "curvature-side trace"
                  : "requires a concave speed, a vanishing dual, boundary control, "
                    "and a finite curvature-side trace integral";
    }
    out.push_back(e);
  }

  return out;
}

nlohmann::ordered_json classify(const SpeedSpec& spec, int samples, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["spec"] = spec.source;
  j["n"] = spec.n;
  j["alpha"] = spec.alpha;
  j["seed"] = seed;
  j["samples"] = samples;

  const auto rep = check_conditions(spec, samples, seed);
  nlohmann::ordered_json conds = nlohmann::ordered_json::object();
  for (const auto& e : rep.entries) {
    nlohmann::ordered_json c;
    c["verdict"] = to_string(e.verdict);
    c["margin"] = e.margin;
    c["witness"] = e.witness;
    if (!e.note.empty()) c["note"] = e.note;
    conds[e.name] = std::move(c);
  }
  j["conditions"] = std::move(conds);

  nlohmann::ordered_json pred;

  const auto fs = flat_side_dichotomy(spec);
  pred["flat_sides"] = {{"moves", fs.moves},
                        {"reason", fs.reason},
                        {"fhat_unbounded", fs.fhat_unbounded},
                        {"fhat_limit", fs.fhat_limit}};

  nlohmann::ordered_json cyls = nlohmann::ordered_json::array();
  for (int k = 1; k < spec.n; ++k) {
    nlohmann::ordered_json c;
    c["flat_directions"] = k;
    try {
      const auto r = cylinder_persistence(spec, k);
      c["persists"] = to_string(r.verdict);
      c["integral"] = r.integral;
      c["integral_finite"] = r.integral_finite;
      c["slope_exponent"] = r.slope_exponent;
      c["v_doubling"] = r.v_doubling;
      c["note"] = r.note;
    } catch (const std::exception& ex) {
      c["persists"] = to_string(Verdict::Inconclusive);
      c["note"] = ex.what();
    }
    cyls.push_back(std::move(c));
  }
  pred["cylinders"] = std::move(cyls);

  {
    nlohmann::ordered_json r;
    try {
      const auto rr = ridge_persistence(spec);
      r["persists"] = to_string(rr.verdict);
      r["integral"] = rr.integral;
      r["integral_finite"] = rr.integral_finite;
      r["note"] = rr.note;
    } catch (const std::exception& ex) {
      r["persists"] = to_string(Verdict::Inconclusive);
      r["note"] = ex.what();
    }
    pred["ridge"] = std::move(r);
  }

  {
    nlohmann::ordered_json regs = nlohmann::ordered_json::array();
    for (const auto& e : regularity_class(spec, rep)) {
      regs.push_back({{"name", e.name},
                      {"verdict", to_string(e.verdict)},
                      {"quantity", e.quantity},
                      {"note", e.note}});
    }
    pred["regularity"] = std::move(regs);
  }

  {
    const bool dual_concave = rep.holds("inverse_concave");
    const bool dual_vanishes = rep.holds("dual_vanishes_on_boundary");
    const bool concave = rep.holds("concave");
    const bool dual_grad = rep.holds("dual_boundary_gradient_positive");
    const bool dual_restr = rep.holds("dual_restriction_inverse_concave");
    std::vector<std::string> sets;
    bool round = false;
    const bool unit = std::abs(spec.alpha - 1.0) <= 1e-12;
    if (dual_concave && dual_vanishes) {
      sets.push_back("inverse_concave_with_vanishing_dual");
      round = round || unit;
    }
    if (unit && dual_concave && concave) {
      sets.push_back("inverse_concave_and_concave");
      round = true;
    }
    if (unit && dual_concave && spec.n == 2) {
      sets.push_back("planar_inverse_concave");
      round = true;
    }
    if (unit && dual_concave && dual_grad && dual_restr)
      sets.push_back("inverse_concave_with_dual_boundary_control");
    if (unit && spec.n == 2) {
      sets.push_back("planar_unit_exponent");
      round = true;
    }
    nlohmann::ordered_json cs;
    cs["shrinks_to_point"] = !sets.empty();
    cs["converges_to_round_point"] = round;
    cs["hypothesis_sets"] = sets;
    pred["closing_shape"] = std::move(cs);
  }

  j["predictions"] = std::move(pred);

  nlohmann::ordered_json certs = nlohmann::ordered_json::array();
  for (const auto& f : singularity_flags(spec, rep)) {
    certs.push_back({{"kind", f.kind},
                     {"point", f.point},
                     {"direction", f.direction},
                     {"defect", f.defect},
                     {"rate", f.rate},
                     {"detail", f.detail}});
  }
  j["certificates"] = std::move(certs);

  return j;
}

}  // namespace curvflow
