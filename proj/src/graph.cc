#include "contrakt/graph.h"

#include <cmath>
#include <string>

#include "contrakt/error.h"
#include "contrakt/measures.h"

namespace contrakt {

WeightedDigraph::WeightedDigraph(int n, std::vector<Edge> edges, bool directed)
    : n_(n), edges_(std::move(edges)), directed_(directed) {
  if (n < 1) fail(ErrorKind::kInvalidGraph, "graph needs at least one node");
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
      fail(ErrorKind::kInvalidGraph,
           "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
               ") out of range");
    }
    if (e.i == e.j) fail(ErrorKind::kInvalidGraph, "self loops are not allowed");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      fail(ErrorKind::kInvalidGraph, "edge weights must be positive");
    }
  }
}

Matrix WeightedDigraph::adjacency() const {
  Matrix a = Matrix::Zero(n_, n_);
  for (const Edge& e : edges_) {
    a(e.i, e.j) += e.weight;
    if (!directed_) a(e.j, e.i) += e.weight;
  }
  return a;
}

Matrix laplacian(const WeightedDigraph& g) {
  const Matrix a = g.adjacency();
  Matrix l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

namespace {

// Nodes that can reach target along edges i -> j with a_ij > 0.
std::vector<bool> reaches(const Matrix& a, int target) {
  const int n = static_cast<int>(a.rows());
  std::vector<bool> seen(n, false);
  std::vector<int> stack{target};
  seen[target] = true;
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    for (int i = 0; i < n; ++i) {
      if (!seen[i] && a(i, j) > 0.0) {
        seen[i] = true;
        stack.push_back(i);
      }
    }
  }
  return seen;
}

}  // namespace

bool globally_reachable(const WeightedDigraph& g) {
  const Matrix a = g.adjacency();
  for (int r = 0; r < g.n(); ++r) {
    const std::vector<bool> seen = reaches(a, r);
    bool all = true;
    for (bool s : seen) all = all && s;
    if (all) return true;
  }
  return false;
}

bool is_connected(const WeightedDigraph& g) {
  Matrix a = g.adjacency();
  a = a + a.transpose().eval();
  const std::vector<bool> seen = reaches(a, 0);
  for (bool s : seen) {
    if (!s) return false;
  }
  return true;
}

Vector dominant_left_eigenvector(const Matrix& l) {
  if (l.rows() != l.cols() || l.rows() == 0) {
    fail(ErrorKind::kDimensionMismatch, "Laplacian must be square");
  }
  const RealSvd s = svd(Matrix(l.transpose()));
  const Eigen::Index n = l.rows();
  const double tol = 1e-10 * std::max(1.0, s.sigma(0));
  int zero_count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.sigma(i) <= tol) ++zero_count;
  }
  if (zero_count != 1) {
    fail(ErrorKind::kNotReachable,
         "zero is not a simple Laplacian eigenvalue (no globally reachable "
         "node)");
  }
  Vector v = s.v.col(n - 1);
  v /= v.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (v(i) < 0.0) {
      if (v(i) < -1e-9) {
        fail(ErrorKind::kNotReachable, "left kernel vector is not nonnegative");
      }
      v(i) = 0.0;
    }
  }
  return v / v.sum();
}

double algebraic_connectivity(const Matrix& l) {
  if (l.rows() < 2) return 0.0;
  return symmetric_eigen(0.5 * (l + l.transpose())).eigenvalues(1);
}

Matrix build_RV(const Matrix& l) {
  const Eigen::Index n = l.rows();
  if (l.cols() != n || n < 2) {
    fail(ErrorKind::kDimensionMismatch, "R_V needs a square Laplacian, n >= 2");
  }
  if ((l - l.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, l.cwiseAbs().maxCoeff())) {
    fail(ErrorKind::kInvalidInput, "R_V needs a symmetric Laplacian");
  }
  const SymmetricEigen eig = symmetric_eigen(l);
  if (eig.eigenvalues(1) <= 1e-10) {
    fail(ErrorKind::kDisconnected, "lambda_2 is zero; graph is disconnected");
  }
  Matrix r(n - 1, n);
  for (Eigen::Index row = 0; row < n - 1; ++row) {
    Vector u = eig.eigenvectors.col(row + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(u(i)) > 1e-12) {
        if (u(i) < 0.0) u = -u;
        break;
      }
    }
    r.row(row) = u.transpose();
  }
  return r;
}

CMatrix build_R_epsilon(const Matrix& l, double epsilon) {
  const Eigen::Index n = l.rows();
  if (l.cols() != n || n < 2) {
    fail(ErrorKind::kDimensionMismatch, "R_epsilon needs n >= 2");
  }
  if (!(epsilon > 0.0)) fail(ErrorKind::kInvalidInput, "epsilon must be > 0");
  // Validates global reachability through the simple zero eigenvalue.
  dominant_left_eigenvector(l);
  const bool symmetric = (l - l.transpose()).cwiseAbs().maxCoeff() <=
                         1e-12 * std::max(1.0, l.cwiseAbs().maxCoeff());
  if (symmetric) return build_RV(l).cast<Complex>();
  const CMatrix ones = CMatrix::Ones(n, 1);
  return optimal_R_construction(CMatrix((-l).cast<Complex>()), ones,
                                PNorm::inf(), epsilon)
      .r;
}

LaplacianBundle laplacian_bundle(const WeightedDigraph& g) {
  LaplacianBundle b;
  b.l = laplacian(g);
  b.v = dominant_left_eigenvector(b.l);
  b.alpha_ess = alpha_ess(Matrix(-b.l));
  if (!g.directed() && g.n() >= 2) {
    b.lambda2 = algebraic_connectivity(b.l);
    b.r_v = build_RV(b.l);
  }
  return b;
}

}  // namespace contrakt
