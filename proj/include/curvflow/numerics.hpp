#pragma once

// Shared numerical toolbox: Gauss-Legendre panels, dyadic improper integrals
// with a geometric-decay convergence test, monotone-function inversion, a
// deterministic cone sampler, and finite-difference derivative helpers.

#include <cstdint>
#include <functional>
#include <vector>

namespace curvflow {

using Real = double;
using RealFn = std::function<double(double)>;

// 15-point Gauss-Legendre quadrature of f over [a, b].
double gauss15(const RealFn& f, double a, double b);

// Composite gauss15 over `panels` uniform subintervals of [a, b].
double integrate(const RealFn& f, double a, double b, int panels = 8);

// Convergence classification of an improper integral by dyadic panels.
// Increments I_j are integrals over consecutive dyadic slices; the integral is
// declared convergent when the I_j decay geometrically (tail ratio < 1) and
// divergent when they stay bounded below or grow.
struct ImproperResult {
  double value = 0.0;       // partial sum over the sampled range
  double tail = 0.0;        // geometric estimate of the unsampled mass (0 if divergent)
  bool convergent = false;
  double ratio = 0.0;       // representative ratio of successive increments
};

// integral of f over (0, upper] with a possible singularity at 0.
// Panels [upper*2^-(j+1), upper*2^-j], j = 0..j_max.
ImproperResult improper_from_zero(const RealFn& f, double upper, int j_max = 30);

// integral of f over [lower, infinity). Panels [lower*2^j, lower*2^(j+1)].
ImproperResult improper_to_infinity(const RealFn& f, double lower, int j_max = 25);

// Solve g(x) = y for strictly increasing g with g(0) = 0, y > 0.
// Bracket grown geometrically from `guess`, then fixed-count bisection.
double invert_increasing(const RealFn& g, double y, double guess = 1.0);

// Root of h on [lo, hi] where h(lo) and h(hi) have opposite signs.
double bisect(const RealFn& h, double lo, double hi);

// Golden-section minimizer of f on [lo, hi] (unimodal f), fixed iterations.
double golden_min(const RealFn& f, double lo, double hi, int iters = 60);

// Deterministic xorshift-based generator: identical streams on every platform,
// unlike distributions from <random> whose output is implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();                       // [0, 1)
  double uniform(double a, double b);     // [a, b)

 private:
  std::uint64_t state_;
};

// A sample point of the positive cone: coordinates exp(U[-2 ln 10, 2 ln 10]),
// so pairwise ratios range over [1e-4, 1e4]. Conditions are degree-0 in scale,
// hence only ratios matter.
std::vector<double> sample_ray(SplitMix64& rng, int n);

// Central finite differences (used by generic face nodes and test oracles).
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& x);
std::vector<double> fd_hessian(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x);  // row-major n*n

}  // namespace curvflow
