#include "curvflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace curvflow {

namespace {

// Abscissae/weights for 15-point Gauss-Legendre on [-1, 1] (symmetric half).
constexpr double kNodes[8] = {
    0.0000000000000000, 0.2011940939974345, 0.3941513470775634,
    0.5709721726085388, 0.7244177313601701, 0.8482065834104272,
    0.9372733924007060, 0.9879925180204854};
constexpr double kWeights[8] = {
    0.2025782419255613, 0.1984314853271116, 0.1861610000155622,
    0.1662692058169939, 0.1395706779261543, 0.1071592204671719,
    0.0703660474881081, 0.0307532419961173};

}  // namespace

double gauss15(const RealFn& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = kWeights[0] * f(mid);
  for (int i = 1; i < 8; ++i) {
    const double dx = half * kNodes[i];
    sum += kWeights[i] * (f(mid + dx) + f(mid - dx));
  }
  return sum * half;
}

double integrate(const RealFn& f, double a, double b, int panels) {
  if (panels < 1) panels = 1;
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    sum += gauss15(f, a + i * h, a + (i + 1) * h);
  }
  return sum;
}

namespace {

// Shared dyadic-panel classifier. `slice(j)` integrates f over the j-th panel;
// successive panels shrink toward the singular end (or grow toward infinity).
// Geometric decay of the increments => convergent with a geometric tail bound;
// increments leveling off or growing => divergent.
ImproperResult classify_dyadic(const std::function<double(int)>& slice, int j_max) {
  ImproperResult out;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double ratio = 1.0;
  for (int j = 0; j <= j_max; ++j) {
    const double inc = slice(j);
    if (!std::isfinite(inc)) {
      out.value = sum;
      out.ratio = std::numeric_limits<double>::infinity();
      return out;  // not convergent
    }
    sum += inc;
    if (j > 0 && prev > 0.0 && inc >= 0.0) {
      ratio = inc / prev;
    }
    prev = std::abs(inc);
    // early accept once increments are negligible relative to the sum
    if (j > 4 && prev < 1e-14 * std::max(1.0, std::abs(sum))) {
      out.value = sum;
      out.tail = 0.0;
      out.convergent = true;
      out.ratio = ratio;
      return out;
    }
  }
  out.value = sum;
  out.ratio = ratio;
  if (ratio < 0.95 && prev >= 0.0) {
    // geometric tail: remaining mass <= last * r / (1 - r)
    out.tail = prev * ratio / (1.0 - ratio);
    out.value = sum + out.tail;
    out.convergent = true;
  }
  return out;
}

}  // namespace

ImproperResult improper_from_zero(const RealFn& f, double upper, int j_max) {
  return classify_dyadic(
      [&](int j) {
        const double hi = upper * std::ldexp(1.0, -j);
        return gauss15(f, 0.5 * hi, hi);
      },
      j_max);
}

ImproperResult improper_to_infinity(const RealFn& f, double lower, int j_max) {
  return classify_dyadic(
      [&](int j) {
        const double lo = lower * std::ldexp(1.0, j);
        return gauss15(f, lo, 2.0 * lo);
      },
      j_max);
}

double invert_increasing(const RealFn& g, double y, double guess) {
  double hi = std::max(guess, 1e-300);
  for (int i = 0; i < 2100 && g(hi) < y; ++i) hi *= 2.0;
  double lo = hi * 0.5;
  // the bracket may still sit entirely above y: shrink the lower end
  while (lo > 1e-300 && g(lo) > y) {
    hi = lo;
    lo *= 0.5;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double bisect(const RealFn& h, double lo, double hi) {
  double flo = h(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = h(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double golden_min(const RealFn& f, double lo, double hi, int iters) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::uint64_t SplitMix64::next() {
  state_ += UINT64_C(0x9E3779B97F4A7C15);
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
  z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(double a, double b) { return a + (b - a) * uniform(); }

std::vector<double> sample_ray(SplitMix64& rng, int n) {
  const double span = 2.0 * std::log(10.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& xi : x) xi = std::exp(rng.uniform(-span, span));
  return x;
}

std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> g(n), y = x;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

std::vector<double> fd_hessian(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> h(n * n), y = x;
  const double f0 = f(x);
  std::vector<double> step(n);
  for (std::size_t i = 0; i < n; ++i)
    step[i] = 1e-4 * std::max(1.0, std::abs(x[i]));
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] + step[i];
    const double fp = f(y);
    y[i] = x[i] - step[i];
    const double fm = f(y);
    y[i] = x[i];
    h[i * n + i] = (fp - 2.0 * f0 + fm) / (step[i] * step[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      y[i] = x[i] + step[i];
      y[j] = x[j] + step[j];
      const double fpp = f(y);
      y[j] = x[j] - step[j];
      const double fpm = f(y);
      y[i] = x[i] - step[i];
      const double fmm = f(y);
      y[j] = x[j] + step[j];
      const double fmp = f(y);
      y[i] = x[i];
      y[j] = x[j];
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * step[i] * step[j]);
      h[i * n + j] = v;
      h[j * n + i] = v;
    }
  }
  return h;
}

}  // namespace curvflow
