#pragma once

// Symmetric curvature speeds on the positive cone: expression trees over the
// primitive families (normalized elementary symmetric roots, power means,
// quotients, and two named speeds) with convex/geometric/linear combinators.
// Provides exact first and second derivatives, the dual f_*, boundary-face
// restrictions, and the inverse-concavity matrix Q[f].

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace curvflow {

inline constexpr int kMaxDim = 12;

struct ParseError : std::runtime_error {
  ParseError(std::size_t pos, const std::string& what)
      : std::runtime_error("parse error at position " + std::to_string(pos) + ": " + what),
        position(pos) {}
  std::size_t position;
};

// Evaluation requested outside the admissible domain (exterior point, vanishing
// denominator, non-finite boundary limit).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A structural hypothesis of an operation is violated (wrong alpha range,
// missing boundary positivity, ...).
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iteration failed to converge or produced non-finite values.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

// Dense symmetric matrix, row-major.
struct SymMat {
  int n = 0;
  std::vector<double> a;
  SymMat() = default;
  explicit SymMat(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// A normalized speed: f = raw(expr)/norm_factor is symmetric, degree-one
// homogeneous, and f(1,...,1) = 1. The flow speed is S = f^alpha.
struct SpeedSpec {
  int n = 0;
  double alpha = 1.0;
  ExprPtr expr;
  double norm_factor = 1.0;
  bool monotonicity_verified = true;  // false once a lin() with negative weight appears
  std::string source;                 // grammar text (or a derived description)
};

// Grammar (whitespace insignificant, reals in decimal or scientific form):
//   expr := prim | comb
//   prim := "E(" k ")" | "pmean(" r ")" | "quot(" k "," l ")" | "named(" ident ")"
//   comb := "convex(" w ":" expr {"," w ":" expr} ")"
//         | "geo(" w ":" expr {"," w ":" expr} ")"
//         | "lin(" a ":" expr {"," a ":" expr} ")"
SpeedSpec parse_speed(std::string_view text, int n, double alpha);

// Wrap an expression tree into a normalized spec (norm_factor = raw value at 1).
SpeedSpec make_speed(ExprPtr expr, int n, double alpha, std::string source);

// Expression constructors (k/l/r checked against n at make_speed/parse time).
ExprPtr expr_elem_sym(int k);
ExprPtr expr_power_mean(double r);
ExprPtr expr_quotient(int k, int l);
ExprPtr expr_named(const std::string& ident);

struct EvalResult {
  double value = 0.0;
  Vec grad;      // df/dx_i
  SymMat hess;   // d2f/dx_i dx_j
};

// Where a point sits relative to the closed positive cone.
enum class ConeLocation { Interior, Boundary, Exterior };
ConeLocation classify_point(const Vec& kappa);

// Normalized value f(x). Interior points evaluate directly; points with zero
// entries go through the monotone boundary limit; exterior points throw.
double value(const SpeedSpec& spec, const Vec& x);

// Value with gradient and (order >= 2) hessian at an interior point.
EvalResult derivatives(const SpeedSpec& spec, const Vec& x, int order = 2);

// Boundary limit lim_{s->0+} f(x + s*1): evaluated at s = 2^-j, j = 10..40,
// accepted on relative agreement 1e-10, otherwise extrapolated (the sequence
// is monotone in s).
double boundary_value(const SpeedSpec& spec, const Vec& x);

// Evaluation without the cone restriction; returns NaN where the expression is
// undefined (negative radicands, poles). Used to continue the flow past the
// loss of convexity.
double extended_value(const SpeedSpec& spec, const Vec& x);

// The dual f_*(x) = f(x_1^-1, ..., x_n^-1)^-1. Primitive families dualize
// symbolically (E_k^{1/k} -> quotients, H_r -> H_{-r}, geometric means
// component-wise); everything else through an exact chain-rule wrapper.
// dualize(dualize(spec)) evaluates back to spec pointwise.
SpeedSpec dualize(const SpeedSpec& spec);

// Restriction to the boundary face {x_{m+1} = ... = x_n = 0} as an m-variable
// spec: f~(x_1..x_m) = f(x_1..x_m, 0, .., 0). The normalization factor is
// inherited unchanged, so the restriction of a normalized speed may take
// values below 1 at the identity. Identically-zero restrictions are flagged.
SpeedSpec restrict_boundary(const SpeedSpec& spec, int m);
bool is_identically_zero(const SpeedSpec& spec);

// Q[f]_{ij} = d2f/dx_i dx_j + (2/x_i)(df/dx_i) delta_ij; f is inverse-concave
// iff Q[f] is positive semidefinite throughout the cone.
SymMat q_matrix(const SpeedSpec& spec, const Vec& x);

// Flow speed S = f^alpha (interior fast path, no validation).
double speed_value(const SpeedSpec& spec, const Vec& x);

// Raw (unnormalized) interior evaluation used by hot loops; no allocation.
double raw_value(const Expr& e, int n, const double* x);

// Smallest eigenvalue of a symmetric matrix and its eigenvector.
double min_eigenvalue(const SymMat& m, Vec* eigvec = nullptr);
double max_eigenvalue(const SymMat& m);
double inf_norm(const SymMat& m);

}  // namespace curvflow
