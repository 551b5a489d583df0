#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace contrakt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline CMatrix to_complex(const Matrix& a) { return a.cast<Complex>(); }
inline const CMatrix& to_complex(const CMatrix& a) { return a; }

// True iff every imaginary part is exactly zero.
bool is_real(const CMatrix& a);

struct SpectralDecomposition {
  // Descending real part, ties broken by descending imaginary part.
  CVector eigenvalues;
  // Unit-norm columns; absent when the matrix is numerically defective.
  std::optional<CMatrix> right_eigenvectors;
  bool is_defective = false;
};

SpectralDecomposition eigen(const Matrix& a);
SpectralDecomposition eigen(const CMatrix& a);

// Eigenvalues only, same ordering as eigen().
CVector eigenvalues(const Matrix& a);
CVector eigenvalues(const CMatrix& a);

struct HermitianEigen {
  Vector eigenvalues;  // ascending
  CMatrix eigenvectors;
};

// For Hermitian input only; the strictly lower triangle is ignored.
HermitianEigen hermitian_eigen(const CMatrix& h);

struct SymmetricEigen {
  Vector eigenvalues;  // ascending
  Matrix eigenvectors;
};
SymmetricEigen symmetric_eigen(const Matrix& s);

struct Svd {
  CMatrix u;      // rows x rows
  Vector sigma;   // min(rows, cols), nonincreasing
  CMatrix v;      // cols x cols
};
Svd svd(const CMatrix& a);

struct RealSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};
RealSvd svd(const Matrix& a);

// Default threshold: 1e-12 * sigma_max. Singular values at or below the
// threshold are treated as zero.
double default_rank_tol(const Vector& sigma);

CMatrix pinv(const CMatrix& a, std::optional<double> rank_tol = std::nullopt);
Matrix pinv(const Matrix& a, std::optional<double> rank_tol = std::nullopt);

int rank(const CMatrix& a, std::optional<double> rank_tol = std::nullopt);

// Orthonormal basis of the column space (columns) and of the right kernel.
CMatrix range_basis(const CMatrix& a, std::optional<double> rank_tol = std::nullopt);
CMatrix kernel_basis(const CMatrix& a, std::optional<double> rank_tol = std::nullopt);
Matrix range_basis(const Matrix& a, std::optional<double> rank_tol = std::nullopt);
Matrix kernel_basis(const Matrix& a, std::optional<double> rank_tol = std::nullopt);

// Orthogonal projector onto span(columns of basis). A basis with zero
// columns gives the zero projector of size basis.rows().
CMatrix orth_projection(const CMatrix& basis);
Matrix orth_projection(const Matrix& basis);

double spectral_norm(const CMatrix& a);
double spectral_norm(const Matrix& a);

// max Re(lambda) over spec(a).
double spectral_abscissa(const Matrix& a);
double spectral_abscissa(const CMatrix& a);

}  // namespace contrakt
