#pragma once

#include <optional>
#include <string>
#include <vector>

#include "contrakt/linalg.h"

namespace contrakt {

enum class PKind { kOne, kTwo, kInf, kGeneric };

// An l_p choice. Generic holds a value in (1, inf) other than 2.
class PNorm {
 public:
  static PNorm one() { return PNorm(PKind::kOne, 1.0); }
  static PNorm two() { return PNorm(PKind::kTwo, 2.0); }
  static PNorm inf() { return PNorm(PKind::kInf, 0.0); }
  static PNorm of(double p);
  // Accepts "1", "2", "inf" or a float.
  static PNorm parse(const std::string& text);

  PKind kind() const { return kind_; }
  double value() const { return value_; }
  bool closed_form() const { return kind_ != PKind::kGeneric; }
  std::string to_string() const;

 private:
  PNorm(PKind kind, double value) : kind_(kind), value_(value) {}
  PKind kind_;
  double value_;
};

double vector_norm(const CVector& x, PNorm p);
double vector_norm(const Vector& x, PNorm p);

// |x|_R = ||R x||_p, or the plain p-norm when no weight is given.
class SemiNormSpec {
 public:
  explicit SemiNormSpec(PNorm p) : p_(p) {}
  SemiNormSpec(PNorm p, const CMatrix& weight,
               std::optional<double> rank_tol = std::nullopt);
  SemiNormSpec(PNorm p, const Matrix& weight,
               std::optional<double> rank_tol = std::nullopt)
      : SemiNormSpec(p, CMatrix(weight.cast<Complex>()), rank_tol) {}

  PNorm p() const { return p_; }
  bool has_weight() const { return weight_.has_value(); }
  const CMatrix& weight() const { return *weight_; }
  const CMatrix& weight_pinv() const { return weight_pinv_; }
  // Orthonormal basis of Ker(R), n x (n - k); empty when unweighted.
  const CMatrix& kernel_basis() const { return kernel_; }
  std::string describe() const;

 private:
  PNorm p_;
  std::optional<CMatrix> weight_;
  CMatrix weight_pinv_;
  CMatrix kernel_;
};

double seminorm(const CVector& v, const SemiNormSpec& s);
double seminorm(const Vector& v, const SemiNormSpec& s);

// Induced norm for p in {1, 2, inf}.
double operator_norm(const CMatrix& a, PNorm p);
inline double operator_norm(const Matrix& a, PNorm p) {
  return operator_norm(CMatrix(a.cast<Complex>()), p);
}

// ||R A R^+||_p, the induced semi-norm of A.
double induced_seminorm(const CMatrix& a, const SemiNormSpec& s);
inline double induced_seminorm(const Matrix& a, const SemiNormSpec& s) {
  return induced_seminorm(CMatrix(a.cast<Complex>()), s);
}

double matrix_measure(const CMatrix& a, PNorm p);
inline double matrix_measure(const Matrix& a, PNorm p) {
  return matrix_measure(CMatrix(a.cast<Complex>()), p);
}

enum class MeasureMethod {
  kClosedForm,
  kReduced,
  kLmiBisection,
  kRestrictedAbscissa,
  kLimitOracle,
};
const char* to_string(MeasureMethod m);

struct MeasureResult {
  double value = 0.0;
  MeasureMethod method = MeasureMethod::kClosedForm;
  double residual = 0.0;
};

MeasureResult semi_measure(const CMatrix& a, const SemiNormSpec& s);
inline MeasureResult semi_measure(const Matrix& a, const SemiNormSpec& s) {
  return semi_measure(to_complex(a), s);
}

std::vector<double> default_h_list();

struct LimitOracleResult {
  double value = 0.0;  // Richardson-extrapolated
  std::vector<double> h;
  std::vector<double> quotients;  // (||R(I + hA)R^+|| - 1) / h per h
  bool monotone = true;           // quotients nonincreasing as h shrinks
  double residual = 0.0;          // |extrapolated - last quotient|
};

// Generic p is supported for real matrices and weights only.
LimitOracleResult measure_limit_oracle(
    const CMatrix& a, const SemiNormSpec& s,
    const std::vector<double>& h_list = default_h_list());
inline LimitOracleResult measure_limit_oracle(
    const Matrix& a, const SemiNormSpec& s,
    const std::vector<double>& h_list = default_h_list()) {
  return measure_limit_oracle(to_complex(a), s, h_list);
}

// mu_p of Q A Q^+ where Q keeps the nonzero rows of diag(xi). For p = 1 this
// is max over xi_j != 0 of a_jj + (1/xi_j) sum_{i != j, xi_i != 0} xi_i |a_ij|.
double weighted_diag_measure(const Matrix& a, const Vector& xi, PNorm p);

// The transposed-weight variant max_j a_jj + xi_j sum_{i != j} |a_ij| / xi_i
// (mirror for inf). Equals weighted_diag_measure with xi replaced by 1/xi on
// the support.
double weighted_diag_measure_inverse_form(const Matrix& a, const Vector& xi,
                                          PNorm p);

enum class LmiForm {
  kRestricted,    // x restricted to Ker(P)^perp
  kUnrestricted,  // full space; needs Ker(R) invariant under A
};

constexpr double kDefaultLmiTol = 1e-9;

// lambda_max(P A + A^H P - 2 c P) <= tol * ||P|| with P = R^H R.
bool lmi_semi_measure_check(const CMatrix& a, const CMatrix& r, double c,
                            LmiForm form = LmiForm::kUnrestricted,
                            double tol = kDefaultLmiTol);

// Smallest c accepted by lmi_semi_measure_check, by bisection.
MeasureResult lmi_bisection_measure(const CMatrix& a, const CMatrix& r,
                                    LmiForm form = LmiForm::kUnrestricted,
                                    double tol = kDefaultLmiTol);

// 1/2 alpha of (A^H + P A P^+) on Img(R^H). This is the abscissa form of
// mu_{2,R}(A); the adjoint is used because Img(R^H) is invariant under it
// whenever Ker(R) is invariant under A.
MeasureResult abscissa_semi_measure(const CMatrix& a, const CMatrix& r);

// True iff span(basis) is invariant under A, residual relative to 1 + ||A||.
double invariance_residual(const CMatrix& a, const CMatrix& basis);
bool is_invariant(const CMatrix& a, const CMatrix& basis, double tol = 1e-8);

// Largest real part of spec(A) restricted to span(basis). Throws
// NotInvariant if the span is not A-invariant. Empty basis gives -inf.
double restricted_abscissa(const CMatrix& a, const CMatrix& basis);
inline double restricted_abscissa(const Matrix& a, const Matrix& basis) {
  return restricted_abscissa(to_complex(a), to_complex(basis));
}

// Restriction of A to span(basis) in the orthonormal coordinates Q of that
// span: Q^H A Q.
CMatrix restrict_to(const CMatrix& a, const CMatrix& basis);

// alpha_{S^perp}(A^H) for S = span(s_basis) invariant under A.
double complement_adjoint_abscissa(const CMatrix& a, const CMatrix& s_basis);

// Max real part over the nonzero spectrum (|lambda| > 1e-9); -inf if none.
double alpha_ess(const CMatrix& a);
inline double alpha_ess(const Matrix& a) { return alpha_ess(to_complex(a)); }

struct OptimalWeight {
  CMatrix r;
  double measure = 0.0;
  double target = 0.0;  // alpha_{S^perp}(A^H)
  enum class Route { kDiagonalization, kPerturbed, kSchurScaled } route =
      Route::kDiagonalization;
};

// Weight R with Ker(R) = span(s_basis) and mu_{p,R}(A) <= alpha_{S^perp}(A^H)
// + epsilon. Throws EpsilonTooSmall if no route meets the bound.
OptimalWeight optimal_R_construction(const CMatrix& a, const CMatrix& s_basis,
                                     PNorm p, double epsilon);

}  // namespace contrakt
