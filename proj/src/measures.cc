#include "contrakt/measures.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "contrakt/error.h"

namespace contrakt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    fail(ErrorKind::kDimensionMismatch,
         std::string(what) + " needs a nonempty square matrix");
  }
}

void require_closed(PNorm p, const char* what) {
  if (!p.closed_form()) {
    fail(ErrorKind::kUnsupportedP,
         std::string(what) + " has no closed form for p = " + p.to_string() +
             "; use measure_limit_oracle");
  }
}

double hermitian_lambda_max(const CMatrix& h) {
  const CMatrix sym = 0.5 * (h + h.adjoint());
  return hermitian_eigen(sym).eigenvalues.maxCoeff();
}

// p-norm with the largest modulus factored out.
template <typename V>
double generic_norm(const V& x, double p) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x(i)));
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += std::pow(std::abs(x(i)) / m, p);
  }
  return m * std::pow(acc, 1.0 / p);
}

// Gradient of x -> ||x||_p at x != 0 (real case).
Vector norm_gradient(const Vector& x, double p, double nrm) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x(i));
    g(i) = ax == 0.0 ? 0.0
                     : std::copysign(std::pow(ax / nrm, p - 1.0), x(i));
  }
  return g;
}

// G(x) = (||(I + hM)x||_p / ||x||_p - 1) / h and its gradient.
double quotient_objective(const Matrix& m, double p, double h, const Vector& x,
                          Vector* grad) {
  const Vector y = x + h * (m * x);
  const double a = generic_norm(y, p);
  const double b = generic_norm(x, p);
  const double value = (a / b - 1.0) / h;
  if (grad != nullptr) {
    const Vector ga = norm_gradient(y, p, a) + h * (m.transpose() *
                                                    norm_gradient(y, p, a));
    const Vector gb = norm_gradient(x, p, b);
    *grad = (ga * b - a * gb) / (b * b * h);
  }
  return value;
}

// Multi-start projected gradient ascent of the quotient. starts is updated
// in place with the local maximizers so the next (smaller) h warm-starts.
double generic_quotient(const Matrix& m, double p, double h,
                        std::vector<Vector>* starts) {
  double best = -kInf;
  for (Vector& x : *starts) {
    x.normalize();
    Vector grad;
    double value = quotient_objective(m, p, h, x, &grad);
    double step = 0.1;
    int stalls = 0;
    for (int iter = 0; iter < 3000 && step > 1e-13; ++iter) {
      Vector trial = x + step * grad;
      const double tn = trial.norm();
      if (tn == 0.0) {
        step *= 0.5;
        continue;
      }
      trial /= tn;
      Vector trial_grad;
      const double trial_value = quotient_objective(m, p, h, trial, &trial_grad);
      if (trial_value > value) {
        stalls = trial_value - value <= 1e-15 * (1.0 + std::abs(value))
                     ? stalls + 1
                     : 0;
        x = trial;
        grad = trial_grad;
        value = trial_value;
        step *= 1.5;
        if (stalls >= 5) break;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, value);
  }
  return best;
}

std::vector<Vector> generic_starts(const Matrix& m) {
  const Eigen::Index n = m.rows();
  std::vector<Vector> starts;
  for (Eigen::Index i = 0; i < n; ++i) starts.push_back(Vector::Unit(n, i));
  if (n <= 4) {
    for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
      Vector s = Vector::Ones(n);
      for (Eigen::Index i = 1; i < n; ++i) {
        if (mask & (1 << (i - 1))) s(i) = -1.0;
      }
      starts.push_back(s);
    }
  }
  const SymmetricEigen sym = symmetric_eigen(0.5 * (m + m.transpose()));
  starts.push_back(sym.eigenvectors.col(n - 1));
  std::mt19937_64 gen(0x5eed);
  std::normal_distribution<double> normal;
  for (int r = 0; r < 8; ++r) {
    Vector s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = normal(gen);
    starts.push_back(s);
  }
  return starts;
}

}  // namespace

PNorm PNorm::of(double p) {
  if (std::isinf(p) && p > 0) return inf();
  if (p == 1.0) return one();
  if (p == 2.0) return two();
  if (!(p > 1.0) || !std::isfinite(p)) {
    fail(ErrorKind::kUnsupportedP, "p must lie in [1, inf]");
  }
  return PNorm(PKind::kGeneric, p);
}

PNorm PNorm::parse(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF") return inf();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::kUnsupportedP, "cannot parse p from '" + text + "'");
  }
  if (used != text.size()) {
    fail(ErrorKind::kUnsupportedP, "cannot parse p from '" + text + "'");
  }
  return of(value);
}

std::string PNorm::to_string() const {
  switch (kind_) {
    case PKind::kOne: return "1";
    case PKind::kTwo: return "2";
    case PKind::kInf: return "inf";
    case PKind::kGeneric: {
      std::ostringstream out;
      out.precision(17);
      out << value_;
      return out.str();
    }
  }
  return "?";
}

double vector_norm(const CVector& x, PNorm p) {
  switch (p.kind()) {
    case PKind::kOne: return x.cwiseAbs().sum();
    case PKind::kTwo: return x.norm();
    case PKind::kInf: return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    case PKind::kGeneric: return generic_norm(x, p.value());
  }
  return 0.0;
}

double vector_norm(const Vector& x, PNorm p) {
  switch (p.kind()) {
    case PKind::kOne: return x.cwiseAbs().sum();
    case PKind::kTwo: return x.norm();
    case PKind::kInf: return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    case PKind::kGeneric: return generic_norm(x, p.value());
  }
  return 0.0;
}

SemiNormSpec::SemiNormSpec(PNorm p, const CMatrix& weight,
                           std::optional<double> rank_tol)
    : p_(p) {
  if (weight.rows() == 0 || weight.cols() == 0 ||
      weight.rows() > weight.cols()) {
    fail(ErrorKind::kRankDeficient, "weight must be k x n with 1 <= k <= n");
  }
  const Svd s = svd(weight);
  const double tol = rank_tol ? *rank_tol : default_rank_tol(s.sigma);
  if (s.sigma(weight.rows() - 1) <= tol) {
    fail(ErrorKind::kRankDeficient, "weight does not have full row rank");
  }
  weight_ = weight;
  weight_pinv_ = pinv(weight, tol);
  kernel_ = s.v.rightCols(weight.cols() - weight.rows());
}

std::string SemiNormSpec::describe() const {
  std::ostringstream out;
  out << "p=" << p_.to_string();
  if (weight_) out << ", weight " << weight_->rows() << "x" << weight_->cols();
  return out.str();
}

double seminorm(const CVector& v, const SemiNormSpec& s) {
  if (!s.has_weight()) return vector_norm(v, s.p());
  if (v.size() != s.weight().cols()) {
    fail(ErrorKind::kDimensionMismatch, "vector length does not match weight");
  }
  return vector_norm(CVector(s.weight() * v), s.p());
}

double seminorm(const Vector& v, const SemiNormSpec& s) {
  return seminorm(CVector(v.cast<Complex>()), s);
}

double operator_norm(const CMatrix& a, PNorm p) {
  require_closed(p, "operator_norm");
  switch (p.kind()) {
    case PKind::kOne: return a.cwiseAbs().colwise().sum().maxCoeff();
    case PKind::kInf: return a.cwiseAbs().rowwise().sum().maxCoeff();
    default: return spectral_norm(a);
  }
}

double induced_seminorm(const CMatrix& a, const SemiNormSpec& s) {
  if (!s.has_weight()) return operator_norm(a, s.p());
  return operator_norm(CMatrix(s.weight() * a * s.weight_pinv()), s.p());
}

double matrix_measure(const CMatrix& a, PNorm p) {
  require_square(a, "matrix_measure");
  require_closed(p, "matrix_measure");
  const Eigen::Index n = a.rows();
  double best = -kInf;
  switch (p.kind()) {
    case PKind::kOne:
      for (Eigen::Index j = 0; j < n; ++j) {
        double v = a(j, j).real();
        for (Eigen::Index i = 0; i < n; ++i) {
          if (i != j) v += std::abs(a(i, j));
        }
        best = std::max(best, v);
      }
      return best;
    case PKind::kInf:
      for (Eigen::Index i = 0; i < n; ++i) {
        double v = a(i, i).real();
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i != j) v += std::abs(a(i, j));
        }
        best = std::max(best, v);
      }
      return best;
    default:
      return hermitian_lambda_max(a);
  }
}

const char* to_string(MeasureMethod m) {
  switch (m) {
    case MeasureMethod::kClosedForm: return "closed_form";
    case MeasureMethod::kReduced: return "reduced";
    case MeasureMethod::kLmiBisection: return "lmi_bisection";
    case MeasureMethod::kRestrictedAbscissa: return "restricted_abscissa";
    case MeasureMethod::kLimitOracle: return "limit_oracle";
  }
  return "?";
}

MeasureResult semi_measure(const CMatrix& a, const SemiNormSpec& s) {
  require_square(a, "semi_measure");
  require_closed(s.p(), "semi_measure");
  if (!s.has_weight()) {
    return {matrix_measure(a, s.p()), MeasureMethod::kClosedForm, 0.0};
  }
  const CMatrix& r = s.weight();
  if (r.cols() != a.rows()) {
    fail(ErrorKind::kDimensionMismatch, "weight columns do not match A");
  }
  const CMatrix reduced = r * a * s.weight_pinv();
  const double residual =
      (r * s.weight_pinv() - CMatrix::Identity(r.rows(), r.rows()))
          .cwiseAbs()
          .maxCoeff();
  return {matrix_measure(reduced, s.p()), MeasureMethod::kReduced, residual};
}

std::vector<double> default_h_list() { return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

LimitOracleResult measure_limit_oracle(const CMatrix& a, const SemiNormSpec& s,
                                       const std::vector<double>& h_list) {
  require_square(a, "measure_limit_oracle");
  if (h_list.empty()) fail(ErrorKind::kInvalidInput, "empty h list");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0) || (i > 0 && h_list[i] >= h_list[i - 1])) {
      fail(ErrorKind::kInvalidInput, "h list must be positive and decreasing");
    }
  }
  const Eigen::Index n = a.rows();
  CMatrix r = CMatrix::Identity(n, n);
  CMatrix r_pinv = r;
  if (s.has_weight()) {
    if (s.weight().cols() != n) {
      fail(ErrorKind::kDimensionMismatch, "weight columns do not match A");
    }
    r = s.weight();
    r_pinv = s.weight_pinv();
  }
  LimitOracleResult out;
  out.h = h_list;
  if (s.p().closed_form()) {
    for (double h : h_list) {
      const CMatrix step = r * (CMatrix::Identity(n, n) + h * a) * r_pinv;
      out.quotients.push_back((operator_norm(step, s.p()) - 1.0) / h);
    }
  } else {
    if (!is_real(a) || !is_real(r)) {
      fail(ErrorKind::kUnsupportedP,
           "generic p oracle supports real matrices only");
    }
    const Matrix m = (r * a * r_pinv).real();
    std::vector<Vector> starts = generic_starts(m);
    for (double h : h_list) {
      out.quotients.push_back(generic_quotient(m, s.p().value(), h, &starts));
    }
  }
  const std::size_t last = out.quotients.size() - 1;
  if (last == 0) {
    out.value = out.quotients[0];
  } else {
    const double ratio = h_list[last - 1] / h_list[last];
    out.value = (ratio * out.quotients[last] - out.quotients[last - 1]) /
                (ratio - 1.0);
  }
  out.residual = std::abs(out.value - out.quotients[last]);
  const double slack = 1e-8 * (1.0 + a.cwiseAbs().maxCoeff());
  for (std::size_t i = 1; i < out.quotients.size(); ++i) {
    if (out.quotients[i] > out.quotients[i - 1] + slack) out.monotone = false;
  }
  return out;
}

namespace {

template <bool kInverse>
double diag_measure(const Matrix& a, const Vector& xi, PNorm p) {
  if (a.rows() != a.cols() || a.rows() != xi.size()) {
    fail(ErrorKind::kDimensionMismatch, "xi length must match square A");
  }
  if (p.kind() != PKind::kOne && p.kind() != PKind::kInf) {
    fail(ErrorKind::kUnsupportedP, "diagonal weights need p in {1, inf}");
  }
  if ((xi.array() < 0.0).any()) {
    fail(ErrorKind::kInvalidInput, "xi must be nonnegative");
  }
  if (!(xi.array() > 0.0).any()) {
    fail(ErrorKind::kAllZeroWeights, "xi has no positive entry");
  }
  Vector w = xi;
  if (kInverse) {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w(i) > 0.0) w(i) = 1.0 / w(i);
    }
  }
  const Eigen::Index n = a.rows();
  double best = -kInf;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (w(j) == 0.0) continue;
    double v = a(j, j);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j || w(i) == 0.0) continue;
      // (Q A Q^+)_{ij} = w_i a_ij / w_j.
      if (p.kind() == PKind::kOne) {
        v += w(i) * std::abs(a(i, j)) / w(j);
      } else {
        v += w(j) * std::abs(a(j, i)) / w(i);
      }
    }
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

double weighted_diag_measure(const Matrix& a, const Vector& xi, PNorm p) {
  return diag_measure<false>(a, xi, p);
}

double weighted_diag_measure_inverse_form(const Matrix& a, const Vector& xi,
                                          PNorm p) {
  return diag_measure<true>(a, xi, p);
}

namespace {

void check_lmi_inputs(const CMatrix& a, const CMatrix& r) {
  require_square(a, "lmi_semi_measure_check");
  if (r.cols() != a.rows() || r.rows() == 0 || r.rows() > r.cols()) {
    fail(ErrorKind::kDimensionMismatch, "R must be k x n with k <= n");
  }
}

void require_kernel_invariant(const CMatrix& a, const CMatrix& r) {
  const CMatrix k = kernel_basis(r);
  if (k.cols() == 0) return;
  const double scale = spectral_norm(r) * (1.0 + spectral_norm(a));
  if (spectral_norm(CMatrix(r * a * k)) > 1e-8 * scale) {
    fail(ErrorKind::kKernelNotInvariant, "Ker(R) is not invariant under A");
  }
}

double lmi_margin(const CMatrix& a, const CMatrix& p_mat, const CMatrix* y,
                  double c) {
  CMatrix m = p_mat * a + a.adjoint() * p_mat - 2.0 * c * p_mat;
  if (y != nullptr) m = y->adjoint() * m * (*y);
  return hermitian_lambda_max(m);
}

}  // namespace

bool lmi_semi_measure_check(const CMatrix& a, const CMatrix& r, double c,
                            LmiForm form, double tol) {
  check_lmi_inputs(a, r);
  const CMatrix p_mat = r.adjoint() * r;
  const double p_norm = spectral_norm(p_mat);
  if (form == LmiForm::kUnrestricted) {
    require_kernel_invariant(a, r);
    return lmi_margin(a, p_mat, nullptr, c) <= tol * p_norm;
  }
  const CMatrix y = range_basis(CMatrix(r.adjoint()));
  return lmi_margin(a, p_mat, &y, c) <= tol * p_norm;
}

MeasureResult lmi_bisection_measure(const CMatrix& a, const CMatrix& r,
                                    LmiForm form, double tol) {
  check_lmi_inputs(a, r);
  const CMatrix p_mat = r.adjoint() * r;
  const double p_norm = spectral_norm(p_mat);
  if (form == LmiForm::kUnrestricted) require_kernel_invariant(a, r);
  const CMatrix y = range_basis(CMatrix(r.adjoint()));
  const CMatrix* restrict_to_y = form == LmiForm::kRestricted ? &y : nullptr;
  auto accepted = [&](double c) {
    return lmi_margin(a, p_mat, restrict_to_y, c) <= tol * p_norm;
  };
  const double bound =
      spectral_norm(CMatrix(r * a * pinv(r))) + 1.0;
  double lo = -bound;
  double hi = bound;
  while (!accepted(hi)) hi = 2.0 * hi + 1.0;
  while (accepted(lo)) lo = 2.0 * lo - 1.0;
  const double width_tol = 1e-14 * (1.0 + bound);
  for (int iter = 0; iter < 200 && hi - lo > width_tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (accepted(mid) ? hi : lo) = mid;
  }
  return {hi, MeasureMethod::kLmiBisection, hi - lo};
}

MeasureResult abscissa_semi_measure(const CMatrix& a, const CMatrix& r) {
  check_lmi_inputs(a, r);
  require_kernel_invariant(a, r);
  const CMatrix p_mat = r.adjoint() * r;
  const CMatrix adjoint_m = a.adjoint() + p_mat * a * pinv(p_mat);
  const CMatrix basis = range_basis(CMatrix(r.adjoint()));
  const double residual = invariance_residual(adjoint_m, basis);
  return {0.5 * restricted_abscissa(adjoint_m, basis),
          MeasureMethod::kRestrictedAbscissa, residual};
}

double invariance_residual(const CMatrix& a, const CMatrix& basis) {
  if (basis.cols() == 0) return 0.0;
  if (basis.rows() != a.rows()) {
    fail(ErrorKind::kDimensionMismatch, "basis rows do not match A");
  }
  const CMatrix q = range_basis(basis);
  const CMatrix aq = a * q;
  const CMatrix leak = aq - q * (q.adjoint() * aq);
  return spectral_norm(leak) / (1.0 + spectral_norm(a));
}

bool is_invariant(const CMatrix& a, const CMatrix& basis, double tol) {
  return invariance_residual(a, basis) <= tol;
}

CMatrix restrict_to(const CMatrix& a, const CMatrix& basis) {
  const CMatrix q = range_basis(basis);
  return q.adjoint() * a * q;
}

double restricted_abscissa(const CMatrix& a, const CMatrix& basis) {
  require_square(a, "restricted_abscissa");
  if (basis.cols() == 0) return -kInf;
  if (!is_invariant(a, basis)) {
    fail(ErrorKind::kNotInvariant, "subspace is not invariant under A");
  }
  return spectral_abscissa(restrict_to(a, basis));
}

namespace {

CMatrix complement_basis(const CMatrix& s_basis, Eigen::Index n) {
  if (s_basis.cols() == 0) return CMatrix::Identity(n, n);
  return kernel_basis(CMatrix(s_basis.adjoint()));
}

}  // namespace

double complement_adjoint_abscissa(const CMatrix& a, const CMatrix& s_basis) {
  require_square(a, "complement_adjoint_abscissa");
  if (s_basis.cols() > 0 && !is_invariant(a, s_basis)) {
    fail(ErrorKind::kNotInvariant, "S is not invariant under A");
  }
  const CMatrix b = complement_basis(s_basis, a.rows());
  if (b.cols() == 0) return -kInf;
  return spectral_abscissa(CMatrix(b.adjoint() * a * b));
}

double alpha_ess(const CMatrix& a) {
  require_square(a, "alpha_ess");
  const CVector lambda = eigenvalues(a);
  if (lambda(0).real() > 1e-9) {
    fail(ErrorKind::kPositiveSpectrum,
         "spectrum has an eigenvalue with positive real part");
  }
  double best = -kInf;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) > 1e-9) best = std::max(best, lambda(i).real());
  }
  return best;
}

OptimalWeight optimal_R_construction(const CMatrix& a, const CMatrix& s_basis,
                                     PNorm p, double epsilon) {
  require_square(a, "optimal_R_construction");
  require_closed(p, "optimal_R_construction");
  if (!(epsilon > 0.0)) fail(ErrorKind::kInvalidInput, "epsilon must be > 0");
  const Eigen::Index n = a.rows();
  if (s_basis.cols() > 0) {
    if (s_basis.rows() != n) {
      fail(ErrorKind::kDimensionMismatch, "S basis rows do not match A");
    }
    if (!is_invariant(a, s_basis)) {
      fail(ErrorKind::kNotInvariant, "S is not invariant under A");
    }
  }
  const CMatrix b = complement_basis(s_basis, n);
  if (b.cols() == 0) {
    fail(ErrorKind::kInvalidInput, "S must be a proper subspace");
  }
  const Eigen::Index k = b.cols();
  const CMatrix nmat = b.adjoint() * a * b;
  OptimalWeight out;
  out.target = spectral_abscissa(nmat);
  const double bound = out.target + epsilon;

  auto attempt = [&](const CMatrix& x, OptimalWeight::Route route) {
    const CMatrix r = x * b.adjoint();
    try {
      const SemiNormSpec spec(p, r);
      const double m = semi_measure(a, spec).value;
      if (m <= bound) {
        out.r = r;
        out.measure = m;
        out.route = route;
        return true;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kRankDeficient) throw;
    }
    return false;
  };

  const SpectralDecomposition dec = eigen(nmat);
  if (dec.right_eigenvectors &&
      attempt(dec.right_eigenvectors->partialPivLu().inverse(),
              OptimalWeight::Route::kDiagonalization)) {
    return out;
  }

  // Near-defective: diagonalize a nearby matrix. The similarity error is at
  // most delta * cond(W).
  std::mt19937_64 gen(0xC0FFEE);
  std::normal_distribution<double> normal;
  CMatrix e(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) e(i, j) = Complex(normal(gen), normal(gen));
  }
  e /= spectral_norm(e);
  const double n_scale = std::max(1.0, spectral_norm(nmat));
  double delta = epsilon / 4.0;
  for (int iter = 0; iter < 40 && delta > 1e-15 * n_scale; ++iter) {
    const SpectralDecomposition pd = eigen(CMatrix(nmat + delta * e));
    if (pd.right_eigenvectors) {
      const Eigen::JacobiSVD<CMatrix> ws(*pd.right_eigenvectors);
      const Vector& sv = ws.singularValues();
      const double cond = sv(0) / sv(k - 1);
      if (attempt(pd.right_eigenvectors->partialPivLu().inverse(),
                  OptimalWeight::Route::kPerturbed)) {
        return out;
      }
      delta = std::min(delta / 10.0, epsilon / (4.0 * cond));
    } else {
      delta /= 10.0;
    }
  }

  // Schur form with geometric diagonal scaling shrinks the strictly upper
  // part by t per superdiagonal.
  const Eigen::ComplexSchur<CMatrix> schur(nmat);
  const CMatrix q = schur.matrixU();
  for (double t = 0.5; t > 1e-6; t *= 0.5) {
    CMatrix x = q.adjoint();
    double scale = 1.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      x.row(i) /= scale;
      scale *= t;
    }
    if (attempt(x, OptimalWeight::Route::kSchurScaled)) return out;
  }
  fail(ErrorKind::kEpsilonTooSmall,
       "no weight met the epsilon bound within the iteration budget");
}

}  // namespace contrakt
