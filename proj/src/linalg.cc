#include "contrakt/linalg.h"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "contrakt/error.h"

namespace contrakt {
namespace {

void require_square(Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (rows != cols || rows == 0) {
    fail(ErrorKind::kDimensionMismatch,
         std::string(what) + " needs a nonempty square matrix");
  }
}

// Sorts eigenpairs by real part descending; near-equal real parts (relative
// 1e-12) are grouped and ordered by imaginary part descending.
std::vector<int> eigen_order(const CVector& lambda) {
  const int n = static_cast<int>(lambda.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return lambda(a).real() > lambda(b).real();
  });
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && lambda(idx[start]).real() - lambda(idx[end]).real() <=
                          1e-12 * scale) {
      ++end;
    }
    std::stable_sort(idx.begin() + start, idx.begin() + end, [&](int a, int b) {
      return lambda(a).imag() > lambda(b).imag();
    });
    start = end;
  }
  return idx;
}

SpectralDecomposition finish_eigen(const CMatrix& a, const CVector& raw_values,
                                   CMatrix raw_vectors) {
  const int n = static_cast<int>(raw_values.size());
  const std::vector<int> order = eigen_order(raw_values);
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  CMatrix vectors(n, n);
  for (int i = 0; i < n; ++i) {
    out.eigenvalues(i) = raw_values(order[i]);
    CVector col = raw_vectors.col(order[i]);
    const double nrm = col.norm();
    if (nrm > 0) col /= nrm;
    vectors.col(i) = col;
  }
  const double a_norm = spectral_norm(a);
  bool defective = false;
  for (int i = 0; i < n && !defective; ++i) {
    const double residual =
        (a * vectors.col(i) - out.eigenvalues(i) * vectors.col(i)).norm();
    if (residual > 1e-9 * std::max(a_norm, 1e-300)) defective = true;
  }
  if (!defective) {
    Eigen::JacobiSVD<CMatrix> s(vectors);
    const Vector& sv = s.singularValues();
    if (sv(n - 1) <= 1e-10 * sv(0)) defective = true;
  }
  out.is_defective = defective;
  if (!defective) out.right_eigenvectors = std::move(vectors);
  return out;
}

}  // namespace

bool is_real(const CMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j).imag() != 0.0) return false;
    }
  }
  return true;
}

SpectralDecomposition eigen(const Matrix& a) {
  require_square(a.rows(), a.cols(), "eigen");
  Eigen::EigenSolver<Matrix> solver(a, true);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNonConvergence, "real eigen iteration did not converge");
  }
  return finish_eigen(a.cast<Complex>(), solver.eigenvalues(),
                      solver.eigenvectors());
}

SpectralDecomposition eigen(const CMatrix& a) {
  require_square(a.rows(), a.cols(), "eigen");
  if (is_real(a)) return eigen(Matrix(a.real()));
  Eigen::ComplexEigenSolver<CMatrix> solver(a, true);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNonConvergence, "complex eigen iteration did not converge");
  }
  return finish_eigen(a, solver.eigenvalues(), solver.eigenvectors());
}

HermitianEigen hermitian_eigen(const CMatrix& h) {
  require_square(h.rows(), h.cols(), "hermitian_eigen");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNonConvergence, "hermitian eigen did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymmetricEigen symmetric_eigen(const Matrix& s) {
  require_square(s.rows(), s.cols(), "symmetric_eigen");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNonConvergence, "symmetric eigen did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Svd svd(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> s(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (s.info() != Eigen::Success) {
    fail(ErrorKind::kNonConvergence, "svd did not converge");
  }
  return {s.matrixU(), s.singularValues(), s.matrixV()};
}

RealSvd svd(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> s(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (s.info() != Eigen::Success) {
    fail(ErrorKind::kNonConvergence, "svd did not converge");
  }
  return {s.matrixU(), s.singularValues(), s.matrixV()};
}

double default_rank_tol(const Vector& sigma) {
  return sigma.size() == 0 ? 0.0 : 1e-12 * sigma(0);
}

namespace {

template <typename M, typename S>
M pinv_impl(const M& a, const S& s, std::optional<double> rank_tol) {
  const double tol = rank_tol ? *rank_tol : default_rank_tol(s.sigma);
  M out = M::Zero(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i) {
    if (s.sigma(i) > tol) {
      out += s.v.col(i) * (1.0 / s.sigma(i)) * s.u.col(i).adjoint();
    }
  }
  return out;
}

int count_rank(const Vector& sigma, std::optional<double> rank_tol) {
  const double tol = rank_tol ? *rank_tol : default_rank_tol(sigma);
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol) ++r;
  }
  return r;
}

}  // namespace

CMatrix pinv(const CMatrix& a, std::optional<double> rank_tol) {
  return pinv_impl(a, svd(a), rank_tol);
}

Matrix pinv(const Matrix& a, std::optional<double> rank_tol) {
  return pinv_impl(a, svd(a), rank_tol);
}

int rank(const CMatrix& a, std::optional<double> rank_tol) {
  return count_rank(svd(a).sigma, rank_tol);
}

CMatrix range_basis(const CMatrix& a, std::optional<double> rank_tol) {
  const Svd s = svd(a);
  return s.u.leftCols(count_rank(s.sigma, rank_tol));
}

CMatrix kernel_basis(const CMatrix& a, std::optional<double> rank_tol) {
  const Svd s = svd(a);
  const int r = count_rank(s.sigma, rank_tol);
  return s.v.rightCols(a.cols() - r);
}

Matrix range_basis(const Matrix& a, std::optional<double> rank_tol) {
  const RealSvd s = svd(a);
  return s.u.leftCols(count_rank(s.sigma, rank_tol));
}

Matrix kernel_basis(const Matrix& a, std::optional<double> rank_tol) {
  const RealSvd s = svd(a);
  const int r = count_rank(s.sigma, rank_tol);
  return s.v.rightCols(a.cols() - r);
}

namespace {

template <typename M>
M projection_impl(const M& basis) {
  const Eigen::Index n = basis.rows();
  if (basis.cols() == 0) return M::Zero(n, n);
  const auto s = svd(basis);
  const double smax = s.sigma(0);
  const double smin = s.sigma(s.sigma.size() - 1);
  if (basis.cols() > n || smin <= 1e-10 * smax) {
    fail(ErrorKind::kRankDeficient, "projection basis columns are dependent");
  }
  const M q = s.u.leftCols(basis.cols());
  return q * q.adjoint();
}

}  // namespace

CMatrix orth_projection(const CMatrix& basis) { return projection_impl(basis); }
Matrix orth_projection(const Matrix& basis) { return projection_impl(basis); }

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> s(a);
  return s.singularValues()(0);
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> s(a);
  return s.singularValues()(0);
}

CVector eigenvalues(const Matrix& a) {
  require_square(a.rows(), a.cols(), "eigenvalues");
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNonConvergence, "real eigen iteration did not converge");
  }
  const CVector raw = solver.eigenvalues();
  const std::vector<int> order = eigen_order(raw);
  CVector out(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) out(i) = raw(order[i]);
  return out;
}

CVector eigenvalues(const CMatrix& a) {
  require_square(a.rows(), a.cols(), "eigenvalues");
  if (is_real(a)) return eigenvalues(Matrix(a.real()));
  Eigen::ComplexEigenSolver<CMatrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNonConvergence, "complex eigen iteration did not converge");
  }
  const CVector raw = solver.eigenvalues();
  const std::vector<int> order = eigen_order(raw);
  CVector out(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) out(i) = raw(order[i]);
  return out;
}

double spectral_abscissa(const Matrix& a) { return eigenvalues(a)(0).real(); }

double spectral_abscissa(const CMatrix& a) { return eigenvalues(a)(0).real(); }

}  // namespace contrakt
