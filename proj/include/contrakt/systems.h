#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "contrakt/graph.h"
#include "contrakt/linalg.h"

namespace contrakt {

using VectorField = std::function<Vector(double t, const Vector& x)>;
using JacobianField = std::function<Matrix(double t, const Vector& x)>;

enum class EquilibriumKind { kUnknown, kNone, kPoint, kAffineSet };

struct PredictedRate {
  double value = 0.0;
  std::string provenance;
};

struct DynSystem {
  std::string name;
  int dim = 0;
  VectorField f;
  JacobianField jacobian;
  bool time_invariant = true;
  bool constant_jacobian = false;
  // Columns spanning a subspace the model keeps invariant (kernel of the
  // natural semi-norm), if any.
  std::optional<Matrix> known_kernel;
  EquilibriumKind equilibria = EquilibriumKind::kUnknown;
  std::optional<Vector> equilibrium_point;
  // Linear functionals c with c^T x(t) constant (rows).
  std::optional<Matrix> conserved;
  std::optional<PredictedRate> predicted_rate;
  // Predicted limit of the trajectory from x0, when the model knows it.
  std::function<Vector(const Vector& x0)> predicted_limit;
  // Trajectories expected to be unbounded.
  bool predicted_unbounded = false;
  // Piecewise real-analytic vector field; assumed, not checked.
  bool assumed_piecewise_analytic = true;

  Vector operator()(double t, const Vector& x) const { return f(t, x); }
};

// Central finite-difference Jacobian, step h (per coordinate, scaled).
Matrix finite_difference_jacobian(const DynSystem& sys, double t,
                                  const Vector& x, double h = 1e-6);

// x' = -L x + b. The limit from x0 when v^T b = 0 is
// L^+ b + (v^T x0 - v^T L^+ b) 1.
DynSystem affine_averaging(const WeightedDigraph& g, const Vector& b);

// x' = -L^T x + b. The limit from x0 when 1^T b = 0 is
// (L^T)^+ b + (1^T x0 - 1^T (L^T)^+ b) v.
DynSystem affine_flow(const WeightedDigraph& g, const Vector& b);

// The closed forms L^+ b + (v^T x0) 1 and (L^T)^+ b + (1^T x0) v. They agree
// with the exact limits above when v^T L^+ b = 0 (resp. 1^T (L^T)^+ b = 0),
// e.g. for undirected or weight-balanced graphs.
Vector averaging_limit_closed_form(const Matrix& l, const Vector& v,
                                   const Vector& b, const Vector& x0);
Vector flow_limit_closed_form(const Matrix& l, const Vector& v, const Vector& b,
                              const Vector& x0);

struct Cost {
  std::string name;
  int dim = 1;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

// s/2 ||x - a||^2
Cost quadratic_cost(const Vector& a, double s = 1.0);
// 1/4 sum_j (x_j - a_j)^4; Hessian vanishes at x = a.
Cost quartic_cost(const Vector& a);
// sum_j log(exp(x_j - a_j) + exp(a_j - x_j)).
Cost log_sum_exp_cost(const Vector& a);
Cost sum_of_costs(const std::vector<Cost>& parts);

// Minimizer of sum_i f_i by damped Newton. Throws NonConvergence.
Vector minimize_sum(const std::vector<Cost>& costs, const Vector& start);

struct PrimalDualInfo {
  Vector x_star;            // argmin of sum_i f_i
  Matrix saddle;            // [[-H, -L (x) I], [L (x) I, 0]] at 1 (x) x*
  double predicted_rate = 0.0;
};

// State (x, nu) in R^{2nk}: x' = -grad h(x) - (L (x) I) nu,
// nu' = (L (x) I) x.
DynSystem primal_dual(const WeightedDigraph& g, const std::vector<Cost>& costs,
                      int k, PrimalDualInfo* info = nullptr);

struct DualLimits {
  Vector sum_form;       // 1 (x) sum_i nu_i(0)
  Vector mean_form;      // 1 (x) mean_i nu_i(0)
  Vector exact;          // mean form corrected by -(L^+ (x) I) grad h(1 (x) x*)
};
DualLimits primal_dual_dual_limits(const WeightedDigraph& g,
                                   const std::vector<Cost>& costs, int k,
                                   const Vector& x_star, const Vector& nu0);

// x_i' = f(t, x_i) - sum_j a_ij (x_i - x_j).
DynSystem diffusive_network(const WeightedDigraph& g, const DynSystem& internal);

// Internal dynamics x' = A x.
DynSystem linear_system(const Matrix& a, const std::string& name = "linear");

// Hopf normal form x' = (sigma - |x|^2) x + omega J x in the plane;
// mu_2 of its Jacobian is sigma - |x|^2 <= sigma everywhere.
DynSystem hopf_oscillator(double sigma, double omega);

struct LotkaVolterra {
  Matrix a;
  Vector r;
  DynSystem system;      // x' = diag(x)(A x + r) on the positive orthant
  DynSystem log_system;  // y' = A exp(y) + r

  // -A^{-1} r; throws NotHurwitz unless A is Hurwitz.
  Vector equilibrium() const;
  // v = -(A^T)^{-1} 1, so v^T A = -1^T. Throws NotHurwitz.
  Vector weight() const;
};

LotkaVolterra lotka_volterra(const Matrix& a, const Vector& r);

// semi_only: (-x1, x1 x2^2); weak_only: (x2, -x1); linear_2x2: (-x1, x1 - 2 x2).
DynSystem toy_example(const std::string& name);

}  // namespace contrakt
