#pragma once

// Numerical classification of a speed: the structural conditions (monotonicity,
// homogeneity, concavity, inverse-concavity, boundary behavior), fate
// predictions (flat sides, cylinder and ridge collapse, loss of smoothness or
// convexity), and the regularity functionals.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curvflow/speed.hpp"

#include <json.hpp>

namespace curvflow {

enum class Verdict { Holds, Fails, Inapplicable, Inconclusive };
std::string to_string(Verdict v);

struct ConditionResult {
  std::string name;
  Verdict verdict = Verdict::Inconclusive;
  double margin = 0.0;   // worst signed margin over samples (>= 0 means holds)
  Vec witness;           // sample attaining the worst margin (empty if none)
  std::string note;
};

struct ConditionsReport {
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<ConditionResult> entries;

  const ConditionResult* find(const std::string& name) const;
  bool holds(const std::string& name) const;
};

// Sampled verification of the structural conditions. Gradient positivity,
// homogeneity, Euler identity, concavity (hessian NSD), inverse-concavity
// (Q[f] PSD), vanishing of the dual on the boundary, inverse-concavity of the
// boundary restrictions of f and f_*, and gradient positivity at boundary
// points where the value is positive. Holder estimates are assumed, never
// tested.
ConditionsReport check_conditions(const SpeedSpec& spec, int samples = 1000,
                                  std::uint64_t seed = 1);

struct FlatSideResult {
  bool moves = false;
  std::string reason;
  double fhat_limit = 0.0;   // limiting value of f(x,1,..,1) when bounded (alpha = 1)
  bool fhat_unbounded = false;
};

// alpha < 1: flat sides move; alpha > 1: they persist; alpha = 1: they move
// iff f(x,1,...,1) is unbounded as x -> infinity.
FlatSideResult flat_side_dichotomy(const SpeedSpec& spec);

struct PersistenceResult {
  Verdict verdict = Verdict::Inconclusive;  // Holds = persists, Fails = vanishes
  double integral = 0.0;                    // partial value of the deciding integral
  bool integral_finite = false;
  double integral_upper = 1.0;              // upper limit actually integrated
  double slope_exponent = 0.0;              // k>=2 only: fitted exponent of f_k(0,p)^alpha/p
  int v_doubling = -1;                      // k>=2 only: chosen V = 2^j, -1 if none worked
  std::string note;
};

// Persistence of a cylindrical region with k flat directions (1 <= k < n).
// k = 1: the segment-collapse integral test with g(x) = f^(x)^alpha - f^(0)^alpha,
// f^(x) = f(x,1,..,1); the region persists iff integral dz/g^-1(z) over (0,1]
// is finite. k >= 2: additionally requires the vanishing slope of
// f(0,p,..,p,1,..,1)^alpha/p and a finite integral dp/g_{k,p}^-1(V p) for some
// doubling V = 2^j, j <= 20.
PersistenceResult cylinder_persistence(const SpeedSpec& spec, int k);

// Persistence of a ridge (alpha = 1 only): requires f_*(0,1,..,1) > 0, then
// tests the integral of 1/g^-1 for g(x) = 1/f_*(0,1,..,1) - 1/f_*(x,1,..,1).
PersistenceResult ridge_persistence(const SpeedSpec& spec);

struct SingularityCertificate {
  std::string kind;   // "smoothness_loss" | "curvature_blowup" | "convexity_loss"
  Vec point;          // boundary witness (0, a_2, .., a_n)
  Vec direction;      // unit vector b with sum f^i b_i = 0
  double defect = 0.0;    // delta = -Q(b,b) > 0
  double rate = 0.0;      // signed initial rate of the degenerating quantity
  std::string detail;
};

// Flags raised from the condition report: smoothness loss (alpha != 1 with a
// positive boundary speed), curvature blow-up (alpha = 1 with a failing
// boundary restriction of the dual), convexity loss (failing boundary
// restriction of f itself). Witnesses are minimum-eigenvalue points of the
// boundary Q-matrix, projected so that sum f^i b_i = 0.
std::vector<SingularityCertificate> singularity_flags(const SpeedSpec& spec,
                                                      const ConditionsReport& conditions);

struct RegularityEntry {
  std::string name;
  Verdict verdict = Verdict::Inconclusive;
  double quantity = 0.0;  // deciding integral / functional value
  std::string note;
};

// Regularity functionals: the n=2 boundary integral of 1/f_*(1,x), and the two
// sigma(r) trace functionals (dual trace on the radii side, weighted square on
// the curvature side) with the dyadic test of integral dr/(r sigma(r)).
std::vector<RegularityEntry> regularity_class(const SpeedSpec& spec,
                                              const ConditionsReport& conditions);

// sigma(r) = inf{ trace of the dual gradient : f_*(rho) = 1, max rho_i >= r }
// and sigma(r) = inf{ sum f^i kappa_i^2 : f(kappa) = 1, max kappa_i >= r }.
double sigma_dual_trace(const SpeedSpec& spec, double r);
double sigma_weighted_square(const SpeedSpec& spec, double r);

// Full JSON report with stable key order: config, conditions, predictions,
// certificates. Deterministic for a fixed spec and seed.
nlohmann::ordered_json classify(const SpeedSpec& spec, int samples = 1000,
                                std::uint64_t seed = 1);

}  // namespace curvflow
