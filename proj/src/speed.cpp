#include "curvflow/speed.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace curvflow {

// Expression nodes. User-facing families come from the parser; Scale, DualWrap,
// FaceLimit and Zero arise from symbolic dualization/restriction.
struct Expr {
  enum class Kind {
    ElemSym,       // normalized elementary symmetric root (E_k/binom)^(1/k)
    PowerMean,     // ((1/n) sum x^r)^(1/r); r = 0 is the geometric mean
    Quotient,      // (Ehat_k / Ehat_l)^(1/(k-l))
    NormA,         // sqrt(sum x_i^2)
    Example1,      // n = 3: sum over pairs of x y / sqrt(x^2 + y^2)
    Example1Face,  // its two-variable boundary restriction, closed form
    Convex,        // sum w_i child_i, w >= 0, sum w = 1
    Geo,           // prod child_i^{w_i}, w >= 0, sum w = 1
    Linear,        // sum a_i child_i, arbitrary a
    Scale,         // w[0] * child
    DualWrap,      // x -> 1 / child(1/x_1, .., 1/x_n)
    FaceLimit,     // child lives in inner_n variables; missing ones tend to 0+
    Zero,
  };
  Kind kind;
  int k = 0, l = 0;
  double r = 0.0;
  std::vector<double> w;
  std::vector<ExprPtr> kids;
  int inner_n = 0;
};

namespace {

using Kind = Expr::Kind;

constexpr auto make_binom() {
  std::array<std::array<double, kMaxDim + 1>, kMaxDim + 1> b{};
  for (int i = 0; i <= kMaxDim; ++i) {
    b[i][0] = 1.0;
    for (int j = 1; j <= i; ++j) b[i][j] = b[i - 1][j - 1] + b[i - 1][j];
  }
  return b;
}
constexpr auto kBinom = make_binom();

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// u^(1/k) for integer k >= 1; negative radicands are out of domain.
inline double root_pow(double u, int k) {
  if (u < 0.0) return kNaN;
  switch (k) {
    case 1: return u;
    case 2: return std::sqrt(u);
    case 3: return std::cbrt(u);
    default: return std::pow(u, 1.0 / k);
  }
}

// e_k of the entries of x with indices skip1/skip2 removed (pass -1 to keep).
// e_0 = 1, e_{<0} = 0; fewer than k remaining entries gives 0 automatically.
inline double elem_excl(int n, const double* x, int k, int skip1, int skip2) {
  if (k < 0) return 0.0;
  if (k == 0) return 1.0;
  double e[kMaxDim + 1];
  e[0] = 1.0;
  for (int m = 1; m <= k; ++m) e[m] = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == skip1 || i == skip2) continue;
    for (int m = k; m >= 1; --m) e[m] += x[i] * e[m - 1];
  }
  return e[k];
}

inline double ex1_term(double a, double b) { return a * b / std::sqrt(a * a + b * b); }

double face_limit_value(const Expr& e, int m, const double* x);

}  // namespace

double raw_value(const Expr& e, int n, const double* x) {
  switch (e.kind) {
    case Kind::ElemSym: {
      const double u = elem_excl(n, x, e.k, -1, -1) / kBinom[n][e.k];
      return root_pow(u, e.k);
    }
    case Kind::PowerMean: {
      const double r = e.r;
      if (r == 0.0) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::log(x[i]);
        return std::exp(s / n);
      }
      double u = 0.0;
      if (r == 1.0) {
        for (int i = 0; i < n; ++i) u += x[i];
      } else if (r == 2.0) {
        for (int i = 0; i < n; ++i) u += x[i] * x[i];
      } else if (r == -1.0) {
        for (int i = 0; i < n; ++i) u += 1.0 / x[i];
      } else if (r == -2.0) {
        for (int i = 0; i < n; ++i) u += 1.0 / (x[i] * x[i]);
      } else {
        for (int i = 0; i < n; ++i) u += std::pow(x[i], r);
      }
      u /= n;
      if (r == 1.0) return u;
      if (r == 2.0) return u < 0.0 ? kNaN : std::sqrt(u);
      if (r == -1.0) return 1.0 / u;
      if (r == -2.0) return u < 0.0 ? kNaN : 1.0 / std::sqrt(u);
      return std::pow(u, 1.0 / r);
    }
    case Kind::Quotient: {
      const double p = elem_excl(n, x, e.k, -1, -1) / kBinom[n][e.k];
      const double q = elem_excl(n, x, e.l, -1, -1) / kBinom[n][e.l];
      return root_pow(p / q, e.k - e.l);
    }
    case Kind::NormA: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += x[i] * x[i];
      return std::sqrt(s);
    }
    case Kind::Example1:
      return ex1_term(x[0], x[1]) + ex1_term(x[0], x[2]) + ex1_term(x[1], x[2]);
    case Kind::Example1Face:
      return ex1_term(x[0], x[1]);
    case Kind::Convex:
    case Kind::Linear: {
      double s = 0.0;
      for (std::size_t i = 0; i < e.kids.size(); ++i)
        s += e.w[i] * raw_value(*e.kids[i], n, x);
      return s;
    }
    case Kind::Geo: {
      double s = 0.0;
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        const double c = raw_value(*e.kids[i], n, x);
        if (c < 0.0) return kNaN;
        s += e.w[i] * std::log(c);
      }
      return std::exp(s);
    }
    case Kind::Scale:
      return e.w[0] * raw_value(*e.kids[0], n, x);
    case Kind::DualWrap: {
      double y[kMaxDim] = {};
      for (int i = 0; i < n; ++i) y[i] = 1.0 / x[i];
      return 1.0 / raw_value(*e.kids[0], n, y);
    }
    case Kind::FaceLimit:
      return face_limit_value(e, n, x);
    case Kind::Zero:
      return 0.0;
  }
  return kNaN;
}

namespace {

// Dyadic limit s -> 0+ of a callable: accept on relative stabilization,
// otherwise extrapolate the last three values (exact for geometric tails, and
// the only route to limits that are themselves zero).
template <class F>
double limit_to_zero(F&& f) {
  double win[3] = {kNaN, kNaN, kNaN};
  double prev = kNaN;
  for (int j = 10; j <= 40; ++j) {
    const double v = f(std::ldexp(1.0, -j));
    if (std::isfinite(v) && std::isfinite(prev)) {
      const double scale = std::max({std::abs(v), std::abs(prev), 1e-300});
      if (std::abs(v - prev) / scale < 1e-10) return v;
    }
    win[0] = win[1];
    win[1] = win[2];
    win[2] = v;
    prev = v;
  }
  if (std::isfinite(win[0]) && std::isfinite(win[1]) && std::isfinite(win[2])) {
    const double d1 = win[1] - win[0];
    const double d2 = win[2] - win[1];
    const double den = d2 - d1;
    if (std::abs(den) > 1e-300) {
      const double ait = win[2] - d2 * d2 / den;
      if (std::isfinite(ait)) return ait;
    }
  }
  if (std::isfinite(win[2])) return win[2];
  throw NumericError("boundary limit did not stabilize");
}

double face_limit_value(const Expr& e, int m, const double* x) {
  const Expr& child = *e.kids[0];
  const int N = e.inner_n;
  double y[kMaxDim] = {};
  for (int i = 0; i < m; ++i) y[i] = x[i];
  return limit_to_zero([&](double s) {
    for (int i = m; i < N; ++i) y[i] = s;
    return raw_value(child, N, y);
  });
}

// ---- exact derivatives -----------------------------------------------------

struct DEval {
  double v = 0.0;
  std::array<double, kMaxDim> g{};
  std::array<std::array<double, kMaxDim>, kMaxDim> h{};
};

void deval(const Expr& e, int n, const double* x, int order, DEval& out);

// Ehat_k = e_k / binom(n,k) with partials: de_k/dx_i = e_{k-1}(x \ i),
// d2 e_k/dx_i dx_j = e_{k-2}(x \ {i,j}) off-diagonal, 0 on the diagonal.
void ehat_partials(int n, const double* x, int k, int order, DEval& out) {
  const double C = kBinom[n][k];
  out.v = elem_excl(n, x, k, -1, -1) / C;
  if (order >= 1)
    for (int i = 0; i < n; ++i) out.g[i] = elem_excl(n, x, k - 1, i, -1) / C;
  if (order >= 2) {
    for (int i = 0; i < n; ++i) {
      out.h[i][i] = 0.0;
      for (int j = i + 1; j < n; ++j) {
        const double v = elem_excl(n, x, k - 2, i, j) / C;
        out.h[i][j] = v;
        out.h[j][i] = v;
      }
    }
  }
}

// In-place chain rule v -> v^(1/m) for integer m.
void apply_root(DEval& d, int n, int m, int order) {
  const double u = d.v;
  const double v = root_pow(u, m);
  d.v = v;
  if (order < 1) return;
  const double a1 = v / (m * u);                  // (1/m) u^{1/m - 1}
  const double a2 = a1 * (1.0 / m - 1.0) / u;     // (1/m)(1/m - 1) u^{1/m - 2}
  if (order >= 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d.h[i][j] = a2 * d.g[i] * d.g[j] + a1 * d.h[i][j];
  }
  for (int i = 0; i < n; ++i) d.g[i] *= a1;
}

void deval_elem(const Expr& e, int n, const double* x, int order, DEval& out) {
  ehat_partials(n, x, e.k, order, out);
  apply_root(out, n, e.k, order);
}

void deval_pmean(const Expr& e, int n, const double* x, int order, DEval& out) {
  const double r = e.r;
  if (r == 0.0) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::log(x[i]);
    const double v = std::exp(s / n);
    out.v = v;
    if (order >= 1)
      for (int i = 0; i < n; ++i) out.g[i] = v / (n * x[i]);
    if (order >= 2) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          out.h[i][j] = v / (static_cast<double>(n) * n * x[i] * x[j]);
          if (i == j) out.h[i][i] -= v / (n * x[i] * x[i]);
        }
    }
    return;
  }
  double u = 0.0;
  for (int i = 0; i < n; ++i) u += std::pow(x[i], r);
  u /= n;
  const double v = std::pow(u, 1.0 / r);
  out.v = v;
  if (order < 1) return;
  const double b1 = v / (r * u);
  const double b2 = b1 * (1.0 / r - 1.0) / u;
  double ug[kMaxDim];
  for (int i = 0; i < n; ++i) ug[i] = (r / n) * std::pow(x[i], r - 1.0);
  if (order >= 2) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out.h[i][j] = b2 * ug[i] * ug[j];
      out.h[i][i] += b1 * (r * (r - 1.0) / n) * std::pow(x[i], r - 2.0);
    }
  }
  for (int i = 0; i < n; ++i) out.g[i] = b1 * ug[i];
}

void deval_quotient(const Expr& e, int n, const double* x, int order, DEval& out) {
  DEval p, q;
  ehat_partials(n, x, e.k, order, p);
  ehat_partials(n, x, e.l, order, q);
  const double w = p.v / q.v;
  out.v = w;
  if (order >= 1) {
    for (int i = 0; i < n; ++i) out.g[i] = (p.g[i] - w * q.g[i]) / q.v;
  }
  if (order >= 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.h[i][j] = (p.h[i][j] - out.g[i] * q.g[j] - out.g[j] * q.g[i] -
                       w * q.h[i][j]) /
                      q.v;
  }
  apply_root(out, n, e.k - e.l, order);
}

void deval_norm_a(int n, const double* x, int order, DEval& out) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i] * x[i];
  const double v = std::sqrt(s);
  out.v = v;
  if (order >= 1)
    for (int i = 0; i < n; ++i) out.g[i] = x[i] / v;
  if (order >= 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.h[i][j] = (i == j ? 1.0 / v : 0.0) - x[i] * x[j] / (v * s);
  }
}

// Accumulate the pair term t(a,b) = a b (a^2+b^2)^{-1/2} into slots i, j.
void ex1_accumulate(const double* x, int i, int j, int order, DEval& out) {
  const double a = x[i], b = x[j];
  const double m2 = a * a + b * b;
  const double im = 1.0 / std::sqrt(m2);
  const double im3 = im / m2;
  const double im5 = im3 / m2;
  out.v += a * b * im;
  if (order >= 1) {
    out.g[i] += b * b * b * im3;
    out.g[j] += a * a * a * im3;
  }
  if (order >= 2) {
    out.h[i][i] += -3.0 * a * b * b * b * im5;
    out.h[j][j] += -3.0 * b * a * a * a * im5;
    const double cross = 3.0 * a * a * b * b * im5;
    out.h[i][j] += cross;
    out.h[j][i] += cross;
  }
}

void deval_sum(const Expr& e, int n, const double* x, int order, DEval& out) {
  DEval kid;
  for (std::size_t c = 0; c < e.kids.size(); ++c) {
    deval(*e.kids[c], n, x, order, kid);
    const double w = e.w[c];
    out.v += w * kid.v;
    if (order >= 1)
      for (int i = 0; i < n; ++i) out.g[i] += w * kid.g[i];
    if (order >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.h[i][j] += w * kid.h[i][j];
  }
}

void deval_geo(const Expr& e, int n, const double* x, int order, DEval& out) {
  // v = exp(sum w_c log c); derivatives through the log-gradient L
  double logv = 0.0;
  double L[kMaxDim] = {};
  double LH[kMaxDim][kMaxDim] = {};
  DEval kid;
  for (std::size_t c = 0; c < e.kids.size(); ++c) {
    deval(*e.kids[c], n, x, order, kid);
    const double w = e.w[c];
    logv += w * std::log(kid.v);
    if (order >= 1)
      for (int i = 0; i < n; ++i) L[i] += w * kid.g[i] / kid.v;
    if (order >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          LH[i][j] += w * (kid.h[i][j] / kid.v - kid.g[i] * kid.g[j] / (kid.v * kid.v));
  }
  const double v = std::exp(logv);
  out.v = v;
  if (order >= 1)
    for (int i = 0; i < n; ++i) out.g[i] = v * L[i];
  if (order >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.h[i][j] = v * (L[i] * L[j] + LH[i][j]);
}

void deval_dualwrap(const Expr& e, int n, const double* x, int order, DEval& out) {
  double y[kMaxDim] = {};
  for (int i = 0; i < n; ++i) y[i] = 1.0 / x[i];
  DEval gd;
  deval(*e.kids[0], n, y, order, gd);
  const double g = gd.v;
  out.v = 1.0 / g;
  if (order < 1) return;
  const double ig2 = 1.0 / (g * g);
  for (int i = 0; i < n; ++i) out.g[i] = gd.g[i] * ig2 / (x[i] * x[i]);
  if (order >= 2) {
    const double ig3 = ig2 / g;
    for (int i = 0; i < n; ++i) {
      const double xi2 = x[i] * x[i];
      for (int j = 0; j < n; ++j) {
        const double xj2 = x[j] * x[j];
        out.h[i][j] = (2.0 * gd.g[i] * gd.g[j] * ig3 - gd.h[i][j] * ig2) / (xi2 * xj2);
      }
      out.h[i][i] -= 2.0 * gd.g[i] * ig2 / (xi2 * x[i]);
    }
  }
}

// Face limits have no closed-form derivatives: finite differences of the limit
// value, with steps balanced against the ~1e-10 relative limit accuracy.
void deval_facelimit(const Expr& e, int n, const double* x, int order, DEval& out) {
  out.v = face_limit_value(e, n, x);
  if (order < 1) return;
  double y[kMaxDim] = {};
  for (int i = 0; i < n; ++i) y[i] = x[i];
  for (int i = 0; i < n; ++i) {
    const double hg = 6e-6 * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + hg;
    const double fp = face_limit_value(e, n, y);
    y[i] = x[i] - hg;
    const double fm = face_limit_value(e, n, y);
    y[i] = x[i];
    out.g[i] = (fp - fm) / (2.0 * hg);
  }
  if (order < 2) return;
  double step[kMaxDim];
  for (int i = 0; i < n; ++i) step[i] = 1.2e-4 * std::max(1.0, std::abs(x[i]));
  for (int i = 0; i < n; ++i) {
    y[i] = x[i] + step[i];
    const double fp = face_limit_value(e, n, y);
    y[i] = x[i] - step[i];
    const double fm = face_limit_value(e, n, y);
    y[i] = x[i];
    out.h[i][i] = (fp - 2.0 * out.v + fm) / (step[i] * step[i]);
    for (int j = i + 1; j < n; ++j) {
      y[i] = x[i] + step[i];
      y[j] = x[j] + step[j];
      const double fpp = face_limit_value(e, n, y);
      y[j] = x[j] - step[j];
      const double fpm = face_limit_value(e, n, y);
      y[i] = x[i] - step[i];
      const double fmm = face_limit_value(e, n, y);
      y[j] = x[j] + step[j];
      const double fmp = face_limit_value(e, n, y);
      y[i] = x[i];
      y[j] = x[j];
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * step[i] * step[j]);
      out.h[i][j] = v;
      out.h[j][i] = v;
    }
  }
}

void deval(const Expr& e, int n, const double* x, int order, DEval& out) {
  out.v = 0.0;
  out.g.fill(0.0);
  if (order >= 2)
    for (auto& row : out.h) row.fill(0.0);
  switch (e.kind) {
    case Kind::ElemSym: deval_elem(e, n, x, order, out); break;
    case Kind::PowerMean: deval_pmean(e, n, x, order, out); break;
    case Kind::Quotient: deval_quotient(e, n, x, order, out); break;
    case Kind::NormA: deval_norm_a(n, x, order, out); break;
    case Kind::Example1:
      ex1_accumulate(x, 0, 1, order, out);
      ex1_accumulate(x, 0, 2, order, out);
      ex1_accumulate(x, 1, 2, order, out);
      break;
    case Kind::Example1Face: ex1_accumulate(x, 0, 1, order, out); break;
    case Kind::Convex:
    case Kind::Linear: deval_sum(e, n, x, order, out); break;
    case Kind::Geo: deval_geo(e, n, x, order, out); break;
    case Kind::Scale: {
      deval(*e.kids[0], n, x, order, out);
      const double c = e.w[0];
      out.v *= c;
      if (order >= 1)
        for (int i = 0; i < n; ++i) out.g[i] *= c;
      if (order >= 2)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) out.h[i][j] *= c;
      break;
    }
    case Kind::DualWrap: deval_dualwrap(e, n, x, order, out); break;
    case Kind::FaceLimit: deval_facelimit(e, n, x, order, out); break;
    case Kind::Zero: break;
  }
}

// ---- construction and validation -------------------------------------------

ExprPtr node(Kind kind) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  return e;
}

ExprPtr scale_node(double c, ExprPtr kid) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Scale;
  e->w = {c};
  e->kids = {std::move(kid)};
  return e;
}

void validate(const Expr& e, int n) {
  switch (e.kind) {
    case Kind::ElemSym:
      if (e.k < 1 || e.k > n)
        throw HypothesisError("symmetric-root index out of range for dimension " +
                              std::to_string(n));
      break;
    case Kind::PowerMean:
      if (!std::isfinite(e.r)) throw HypothesisError("power-mean exponent must be finite");
      break;
    case Kind::Quotient:
      if (e.l < 1 || e.l >= e.k || e.k > n)
        throw HypothesisError("quotient indices must satisfy 1 <= l < k <= dimension");
      break;
    case Kind::NormA:
      break;
    case Kind::Example1:
      if (n != 3) throw HypothesisError("named(example1) is a three-curvature speed");
      break;
    case Kind::Example1Face:
      if (n != 2) throw HypothesisError("example1 face term needs two variables");
      break;
    case Kind::Convex:
    case Kind::Geo: {
      double sum = 0.0;
      for (double w : e.w) {
        if (w < -1e-12) throw HypothesisError("combination weights must be nonnegative");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw HypothesisError("combination weights must sum to one");
      for (const auto& kid : e.kids) validate(*kid, n);
      break;
    }
    case Kind::Linear:
      for (const auto& kid : e.kids) validate(*kid, n);
      break;
    case Kind::Scale:
      validate(*e.kids[0], n);
      break;
    case Kind::DualWrap:
      validate(*e.kids[0], n);
      break;
    case Kind::FaceLimit:
      validate(*e.kids[0], e.inner_n);
      break;
    case Kind::Zero:
      break;
  }
}

bool monotone_by_construction(const Expr& e) {
  if (e.kind == Kind::Linear) {
    for (double w : e.w)
      if (w < 0.0) return false;
  }
  for (const auto& kid : e.kids)
    if (!monotone_by_construction(*kid)) return false;
  return true;
}

// ---- parser -----------------------------------------------------------------

struct Parser {
  std::string text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos, what); }
  void expect(char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c)
      fail(std::string("expected '") + c + "'");
    ++pos;
  }
  double number() {
    skip_ws();
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos += static_cast<std::size_t>(end - begin);
    return v;
  }
  int integer() {
    const std::size_t at = pos;
    const double v = number();
    if (std::abs(v - std::round(v)) > 1e-9)
      throw ParseError(at, "expected an integer");
    return static_cast<int>(std::llround(v));
  }
  std::string ident() {
    skip_ws();
    const std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected a name");
    return text.substr(start, pos - start);
  }

  ExprPtr expr() {
    skip_ws();
    const std::size_t at = pos;
    const std::string name = ident();
    expect('(');
    if (name == "E") {
      auto e = node(Kind::ElemSym);
      const_cast<Expr&>(*e).k = integer();
      expect(')');
      return e;
    }
    if (name == "pmean") {
      auto e = node(Kind::PowerMean);
      const_cast<Expr&>(*e).r = number();
      expect(')');
      return e;
    }
    if (name == "quot") {
      auto e = node(Kind::Quotient);
      auto& m = const_cast<Expr&>(*e);
      m.k = integer();
      expect(',');
      m.l = integer();
      expect(')');
      return e;
    }
    if (name == "named") {
      const std::size_t ident_at = pos;
      const std::string which = ident();
      expect(')');
      if (which == "norm_A") return node(Kind::NormA);
      if (which == "example1") return node(Kind::Example1);
      throw ParseError(ident_at, "unknown named speed '" + which + "'");
    }
    if (name == "convex" || name == "geo" || name == "lin") {
      auto e = node(name == "convex" ? Kind::Convex
                                     : name == "geo" ? Kind::Geo : Kind::Linear);
      auto& m = const_cast<Expr&>(*e);
      while (true) {
        m.w.push_back(number());
        expect(':');
        m.kids.push_back(expr());
        skip_ws();
        if (pos < text.size() && text[pos] == ',') {
          ++pos;
          continue;
        }
        break;
      }
      expect(')');
      return e;
    }
    throw ParseError(at, "unknown speed family '" + name + "'");
  }
};

void check_dimension(int n) {
  if (n < 1 || n > kMaxDim)
    throw HypothesisError("dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
}

std::vector<double> ones(int n) { return std::vector<double>(static_cast<std::size_t>(n), 1.0); }

}  // namespace

SpeedSpec make_speed(ExprPtr expr, int n, double alpha, std::string source) {
  check_dimension(n);
  if (n < 2) throw HypothesisError("a speed needs at least two curvatures");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw HypothesisError("speed exponent alpha must be positive");
  validate(*expr, n);
  const auto one = ones(n);
  const double norm = raw_value(*expr, n, one.data());
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw HypothesisError("speed does not normalize: value at the identity is " +
                          std::to_string(norm));
  SpeedSpec s;
  s.n = n;
  s.alpha = alpha;
  s.expr = std::move(expr);
  s.norm_factor = norm;
  s.monotonicity_verified = monotone_by_construction(*s.expr);
  s.source = std::move(source);
  return s;
}

SpeedSpec parse_speed(std::string_view text, int n, double alpha) {
  Parser p;
  p.text.assign(text);
  ExprPtr e = p.expr();
  p.skip_ws();
  if (p.pos != p.text.size()) p.fail("trailing characters after expression");
  return make_speed(std::move(e), n, alpha, std::string(text));
}

ExprPtr expr_elem_sym(int k) {
  auto e = node(Kind::ElemSym);
  const_cast<Expr&>(*e).k = k;
  return e;
}
ExprPtr expr_power_mean(double r) {
  auto e = node(Kind::PowerMean);
  const_cast<Expr&>(*e).r = r;
  return e;
}
ExprPtr expr_quotient(int k, int l) {
  auto e = node(Kind::Quotient);
  auto& m = const_cast<Expr&>(*e);
  m.k = k;
  m.l = l;
  return e;
}
ExprPtr expr_named(const std::string& ident) {
  if (ident == "norm_A") return node(Kind::NormA);
  if (ident == "example1") return node(Kind::Example1);
  throw ParseError(0, "unknown named speed '" + ident + "'");
}

ConeLocation classify_point(const Vec& kappa) {
  bool boundary = false;
  for (double k : kappa) {
    if (k < 0.0) return ConeLocation::Exterior;
    if (k == 0.0) boundary = true;
  }
  return boundary ? ConeLocation::Boundary : ConeLocation::Interior;
}

double value(const SpeedSpec& spec, const Vec& x) {
  if (static_cast<int>(x.size()) != spec.n)
    throw HypothesisError("point dimension does not match the speed");
  switch (classify_point(x)) {
    case ConeLocation::Exterior:
      throw DomainError("point has a negative entry");
    case ConeLocation::Boundary:
      return boundary_value(spec, x);
    case ConeLocation::Interior:
      break;
  }
  return raw_value(*spec.expr, spec.n, x.data()) / spec.norm_factor;
}

EvalResult derivatives(const SpeedSpec& spec, const Vec& x, int order) {
  if (static_cast<int>(x.size()) != spec.n)
    throw HypothesisError("point dimension does not match the speed");
  if (classify_point(x) != ConeLocation::Interior)
    throw DomainError("derivatives need an interior point of the cone");
  DEval d;
  deval(*spec.expr, spec.n, x.data(), order, d);
  EvalResult out;
  const double in = 1.0 / spec.norm_factor;
  out.value = d.v * in;
  if (order >= 1) {
    out.grad.resize(x.size());
    for (int i = 0; i < spec.n; ++i) out.grad[i] = d.g[i] * in;
  }
  if (order >= 2) {
    out.hess = SymMat(spec.n);
    for (int i = 0; i < spec.n; ++i)
      for (int j = 0; j < spec.n; ++j) out.hess.at(i, j) = d.h[i][j] * in;
  }
  return out;
}

double boundary_value(const SpeedSpec& spec, const Vec& x) {
  if (static_cast<int>(x.size()) != spec.n)
    throw HypothesisError("point dimension does not match the speed");
  for (double xi : x)
    if (xi < 0.0) throw DomainError("point has a negative entry");
  if (classify_point(x) == ConeLocation::Interior)
    return raw_value(*spec.expr, spec.n, x.data()) / spec.norm_factor;
  Vec y(x.size());
  return limit_to_zero([&](double s) {
           for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + s;
           return raw_value(*spec.expr, spec.n, y.data());
         }) /
         spec.norm_factor;
}

double extended_value(const SpeedSpec& spec, const Vec& x) {
  const double v = raw_value(*spec.expr, spec.n, x.data()) / spec.norm_factor;
  return std::isfinite(v) ? v : kNaN;
}

double speed_value(const SpeedSpec& spec, const Vec& x) {
  const double f = raw_value(*spec.expr, spec.n, x.data()) / spec.norm_factor;
  const double a = spec.alpha;
  if (a == 1.0) return f;
  if (a == 2.0) return f * f;
  if (a == 0.5) return std::sqrt(f);
  return std::pow(f, a);
}

namespace {

ExprPtr dual_expr(const ExprPtr& e, int n) {
  switch (e->kind) {
    case Kind::ElemSym:
      if (e->k == n) return e;
      return expr_quotient(n, n - e->k);
    case Kind::PowerMean:
      return expr_power_mean(-e->r);
    case Kind::Quotient:
      if (e->k == n) return expr_elem_sym(n - e->l);
      return expr_quotient(n - e->l, n - e->k);
    case Kind::Geo: {
      auto d = node(Kind::Geo);
      auto& m = const_cast<Expr&>(*d);
      m.w = e->w;
      for (const auto& kid : e->kids) m.kids.push_back(dual_expr(kid, n));
      return d;
    }
    case Kind::Scale:
      return scale_node(1.0 / e->w[0], dual_expr(e->kids[0], n));
    case Kind::DualWrap:
      return e->kids[0];
    case Kind::Zero:
      throw HypothesisError("a vanishing speed has no dual");
    default: {
      auto d = node(Kind::DualWrap);
      const_cast<Expr&>(*d).kids = {e};
      return d;
    }
  }
}

}  // namespace

SpeedSpec dualize(const SpeedSpec& spec) {
  SpeedSpec out;
  out.n = spec.n;
  out.alpha = spec.alpha;
  out.expr = dual_expr(spec.expr, spec.n);
  // f = raw/N  =>  f_*(x) = N / raw(1/x), i.e. the dual raw tree over norm 1/N
  out.norm_factor = 1.0 / spec.norm_factor;
  out.monotonicity_verified = spec.monotonicity_verified;
  out.source = "dual(" + spec.source + ")";
  return out;
}

namespace {

ExprPtr restrict_expr(const ExprPtr& e, int n, int m) {
  switch (e->kind) {
    case Kind::ElemSym: {
      if (e->k > m) return node(Kind::Zero);
      const double c = std::pow(kBinom[m][e->k] / kBinom[n][e->k], 1.0 / e->k);
      return scale_node(c, expr_elem_sym(e->k));
    }
    case Kind::PowerMean: {
      if (e->r <= 0.0) return node(Kind::Zero);
      const double c = std::pow(static_cast<double>(m) / n, 1.0 / e->r);
      return scale_node(c, expr_power_mean(e->r));
    }
    case Kind::Quotient: {
      if (e->k > m) return node(Kind::Zero);
      const double top = kBinom[m][e->k] / kBinom[n][e->k];
      const double bot = kBinom[m][e->l] / kBinom[n][e->l];
      const double c = std::pow(top / bot, 1.0 / (e->k - e->l));
      return scale_node(c, expr_quotient(e->k, e->l));
    }
    case Kind::NormA:
      return node(Kind::NormA);
    case Kind::Example1:
      return m >= 2 ? node(Kind::Example1Face) : node(Kind::Zero);
    case Kind::Example1Face:
      return node(Kind::Zero);
    case Kind::Convex:
    case Kind::Linear: {
      auto d = node(Kind::Linear);
      auto& out = const_cast<Expr&>(*d);
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        auto kid = restrict_expr(e->kids[i], n, m);
        if (kid->kind == Kind::Zero) continue;
        out.w.push_back(e->w[i]);
        out.kids.push_back(std::move(kid));
      }
      if (out.kids.empty()) return node(Kind::Zero);
      return d;
    }
    case Kind::Geo: {
      auto d = node(Kind::Geo);
      auto& out = const_cast<Expr&>(*d);
      out.w = e->w;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        auto kid = restrict_expr(e->kids[i], n, m);
        if (kid->kind == Kind::Zero && e->w[i] > 0.0) return node(Kind::Zero);
        out.kids.push_back(std::move(kid));
      }
      return d;
    }
    case Kind::Scale: {
      auto kid = restrict_expr(e->kids[0], n, m);
      if (kid->kind == Kind::Zero) return kid;
      return scale_node(e->w[0], std::move(kid));
    }
    case Kind::DualWrap:
    case Kind::FaceLimit: {
      auto d = node(Kind::FaceLimit);
      auto& out = const_cast<Expr&>(*d);
      out.kids = {e};
      out.inner_n = n;
      return d;
    }
    case Kind::Zero:
      return e;
  }
  return node(Kind::Zero);
}

}  // namespace

SpeedSpec restrict_boundary(const SpeedSpec& spec, int m) {
  if (m < 1 || m >= spec.n)
    throw HypothesisError("restriction dimension must satisfy 1 <= m < n");
  SpeedSpec out;
  out.n = m;
  out.alpha = spec.alpha;
  out.expr = restrict_expr(spec.expr, spec.n, m);
  out.norm_factor = spec.norm_factor;  // inherited: the face value of a
                                       // normalized speed stays comparable
  out.monotonicity_verified = spec.monotonicity_verified;
  out.source = "restrict(" + spec.source + "," + std::to_string(m) + ")";
  return out;
}

bool is_identically_zero(const SpeedSpec& spec) {
  return spec.expr->kind == Kind::Zero;
}

SymMat q_matrix(const SpeedSpec& spec, const Vec& x) {
  auto d = derivatives(spec, x, 2);
  SymMat q = d.hess;
  for (int i = 0; i < spec.n; ++i) q.at(i, i) += 2.0 / x[i] * d.grad[i];
  return q;
}

double min_eigenvalue(const SymMat& m, Vec* eigvec) {
  Eigen::MatrixXd a(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) a(i, j) = m.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      a, eigvec ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (eigvec) {
    eigvec->resize(m.n);
    for (int i = 0; i < m.n; ++i) (*eigvec)[i] = solver.eigenvectors()(i, 0);
  }
  return solver.eigenvalues()(0);
}

double max_eigenvalue(const SymMat& m) {
  Eigen::MatrixXd a(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) a(i, j) = m.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(m.n - 1);
}

double inf_norm(const SymMat& m) {
  double best = 0.0;
  for (int i = 0; i < m.n; ++i) {
    double row = 0.0;
    for (int j = 0; j < m.n; ++j) row += std::abs(m.at(i, j));
    best = std::max(best, row);
  }
  return best;
}

}  // namespace curvflow
