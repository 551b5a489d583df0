#include "contrakt/tensor_norm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "contrakt/error.h"
#include "contrakt/parallel.h"

namespace contrakt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dims(const Vector& u, int n, int k) {
  if (n < 1 || k < 1 || u.size() != static_cast<Eigen::Index>(n) * k) {
    fail(ErrorKind::kDimensionMismatch, "u must have length n * k");
  }
}

// splitmix64 step, used to derive independent restart seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Matrix unflatten(const Vector& u, int n, int k) {
  check_dims(u, n, k);
  Matrix out(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = u(i * k + j);
  return out;
}

Vector flatten(const Matrix& u) {
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) out(i * u.cols() + j) = u(i, j);
  return out;
}

Vector kron(const Vector& v, const Vector& w) {
  return flatten(v * w.transpose());
}

Vector TensorRepresentation::reconstruct() const {
  Matrix acc = Matrix::Zero(n, k);
  for (const TensorTerm& t : terms) {
    if (t.v.size() != n || t.w.size() != k) {
      fail(ErrorKind::kBadRepresentation, "term dimensions do not match");
    }
    acc += t.v * t.w.transpose();
  }
  return flatten(acc);
}

double tensor_norm_upper(const Vector& u, const TensorRepresentation& rep,
                         PNorm p) {
  check_dims(u, rep.n, rep.k);
  if ((rep.reconstruct() - u).norm() > 1e-9 * (1.0 + u.norm())) {
    fail(ErrorKind::kBadRepresentation, "representation does not reconstruct u");
  }
  double acc = 0.0;
  for (const TensorTerm& t : rep.terms) {
    const double a = t.v.norm() * vector_norm(t.w, p);
    acc += a * a;
  }
  return std::sqrt(acc);
}

TensorRepresentation svd_representation(const Vector& u, int n, int k) {
  const RealSvd s = svd(unflatten(u, n, k));
  TensorRepresentation rep{n, k, {}};
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i) {
    if (s.sigma(i) == 0.0) continue;
    rep.terms.push_back({s.sigma(i) * s.u.col(i), s.v.col(i)});
  }
  return rep;
}

TensorRepresentation row_representation(const Vector& u, int n, int k) {
  const Matrix m = unflatten(u, n, k);
  TensorRepresentation rep{n, k, {}};
  for (int i = 0; i < n; ++i) {
    if (m.row(i).norm() == 0.0) continue;
    rep.terms.push_back({Vector::Unit(n, i), m.row(i).transpose()});
  }
  return rep;
}

double representation_cost_for_factors(const Matrix& u_mat, const Matrix& w,
                                       PNorm p, TensorRepresentation* rep) {
  const Eigen::Index k = u_mat.cols();
  std::vector<Eigen::Index> live;
  Matrix scaled(k, w.cols());
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    const double nrm = vector_norm(Vector(w.col(i)), p);
    if (nrm > 1e-12 * (1.0 + w.col(i).norm())) {
      scaled.col(live.size()) = w.col(i) / nrm;
      live.push_back(i);
    }
  }
  if (live.empty()) return u_mat.norm() == 0.0 ? 0.0 : kInf;
  const Matrix wt = scaled.leftCols(live.size());
  // Minimum-norm V~ with V~ W~^T = U; cost ||V~||_F.
  const Matrix g = wt * wt.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  const Vector& lam = eig.eigenvalues();
  const double tol = 1e-12 * std::max(lam.maxCoeff(), 1e-300);
  Matrix g_pinv = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (lam(i) > tol) {
      const Vector q = eig.eigenvectors().col(i);
      g_pinv += q * q.transpose() / lam(i);
    }
  }
  // Score the representation actually produced, so an ill-conditioned G
  // cannot report a cost for a tensor it does not reconstruct.
  const Matrix vt = u_mat * g_pinv * wt;  // n x live
  if ((vt * wt.transpose() - u_mat).norm() > 1e-10 * (1.0 + u_mat.norm())) {
    return kInf;
  }
  if (rep != nullptr) {
    rep->n = static_cast<int>(u_mat.rows());
    rep->k = static_cast<int>(k);
    rep->terms.clear();
    for (std::size_t i = 0; i < live.size(); ++i) {
      const double nrm = vector_norm(Vector(w.col(live[i])), p);
      rep->terms.push_back({vt.col(i) / nrm, w.col(live[i])});
    }
  }
  return vt.norm();
}

namespace {

struct SearchSpace {
  Matrix u_mat;
  Matrix row_basis;  // k x r0
  int rank = 0;      // number of terms
  PNorm p = PNorm::two();

  int free_cols() const { return rank - static_cast<int>(row_basis.cols()); }
  int dim() const {
    return static_cast<int>(row_basis.rows()) * free_cols() + rank * rank;
  }

  // W = [B | D] T.
  Matrix factors(const Vector& theta) const {
    const Eigen::Index k = row_basis.rows();
    Matrix bd(k, rank);
    bd.leftCols(row_basis.cols()) = row_basis;
    const int f = free_cols();
    for (int c = 0; c < f; ++c)
      for (Eigen::Index i = 0; i < k; ++i)
        bd(i, row_basis.cols() + c) = theta(c * k + i);
    Matrix t(rank, rank);
    const Eigen::Index off = static_cast<Eigen::Index>(f) * k;
    for (int j = 0; j < rank; ++j)
      for (int i = 0; i < rank; ++i) t(i, j) = theta(off + j * rank + i);
    return bd * t;
  }

  double cost(const Vector& theta) const {
    return representation_cost_for_factors(u_mat, factors(theta), p);
  }
};

double compass_search(const SearchSpace& space, Vector* theta,
                      const TensorSearchOptions& options) {
  double best = space.cost(*theta);
  double step = 0.25;
  int evals = 1;
  while (step >= options.step_tol && evals < options.max_evaluations) {
    bool improved = false;
    for (Eigen::Index j = 0; j < theta->size(); ++j) {
      for (double sign : {1.0, -1.0}) {
        (*theta)(j) += sign * step;
        const double c = space.cost(*theta);
        ++evals;
        if (c < best) {
          best = c;
          improved = true;
          break;
        }
        (*theta)(j) -= sign * step;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

TensorSearchResult tensor_norm_bruteforce(const Vector& u, int n, int k, PNorm p,
                                          const TensorSearchOptions& options) {
  check_dims(u, n, k);
  TensorSearchResult out;
  out.rank_cap = options.rank_cap > 0 ? options.rank_cap : std::min(n, k) + 1;
  out.restarts = options.restarts;
  out.seed = options.seed;
  const Matrix u_mat = unflatten(u, n, k);
  if (u_mat.norm() == 0.0) {
    out.value = 0.0;
    out.representation = TensorRepresentation{n, k, {}};
    return out;
  }
  const Matrix row_basis = range_basis(Matrix(u_mat.transpose()));
  const int r0 = static_cast<int>(row_basis.cols());
  out.value = kInf;

  auto consider = [&](const TensorRepresentation& rep) {
    if (static_cast<int>(rep.terms.size()) > out.rank_cap) return;
    const double c = tensor_norm_upper(u, rep, p);
    if (c < out.value) {
      out.value = c;
      out.rank = static_cast<int>(rep.terms.size());
      out.representation = rep;
    }
  };
  consider(svd_representation(u, n, k));
  consider(row_representation(u, n, k));

  for (int r = r0; r <= out.rank_cap; ++r) {
    SearchSpace space{u_mat, row_basis, r, p};
    const int restarts = std::max(options.restarts, 0);
    std::vector<double> costs(restarts, kInf);
    std::vector<Vector> thetas(restarts);
    parallel_for(restarts, [&](std::size_t i) {
      std::mt19937_64 gen(mix(mix(options.seed) ^ mix(r * 1000003ULL + i)));
      std::normal_distribution<double> normal;
      Vector theta(space.dim());
      for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = normal(gen);
      if (i == 0) {
        // Identity mixing keeps the row-space basis as factors.
        const Eigen::Index off =
            static_cast<Eigen::Index>(space.free_cols()) * row_basis.rows();
        for (int c = 0; c < r; ++c)
          for (int d = 0; d < r; ++d)
            theta(off + c * r + d) = (c == d ? 1.0 : 0.0) + 0.1 * theta(off + c * r + d);
      }
      costs[i] = compass_search(space, &theta, options);
      thetas[i] = theta;
    });
    for (int i = 0; i < restarts; ++i) {
      if (costs[i] < out.value) {
        TensorRepresentation rep;
        const double c =
            representation_cost_for_factors(u_mat, space.factors(thetas[i]), p, &rep);
        if (c < out.value) {
          out.value = c;
          out.rank = static_cast<int>(rep.terms.size());
          out.representation = rep;
        }
      }
    }
  }
  return out;
}

double tensor_measure_bound(const std::vector<Matrix>& blocks, PNorm p) {
  if (blocks.empty()) fail(ErrorKind::kInvalidInput, "no blocks");
  double best = -kInf;
  for (const Matrix& b : blocks) best = std::max(best, matrix_measure(b, p));
  return best;
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const Matrix& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const Matrix& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace contrakt
