#pragma once

#include <optional>
#include <vector>

#include "contrakt/linalg.h"

namespace contrakt {

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

// Edge (i, j, w) sets a_ij = w. Undirected graphs store each edge once and
// expand it to both orientations in adjacency().
class WeightedDigraph {
 public:
  WeightedDigraph(int n, std::vector<Edge> edges, bool directed);

  int n() const { return n_; }
  bool directed() const { return directed_; }
  const std::vector<Edge>& edges() const { return edges_; }

  Matrix adjacency() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  bool directed_;
};

// L = D - A with D the out-degree (row sum) matrix.
Matrix laplacian(const WeightedDigraph& g);

// Some node can be reached from every node along directed edges.
bool globally_reachable(const WeightedDigraph& g);

// Undirected graphs only: a single connected component.
bool is_connected(const WeightedDigraph& g);

// Left null vector of L with 1^T v = 1. Throws NotReachable unless zero is a
// simple eigenvalue.
Vector dominant_left_eigenvector(const Matrix& l);

// Second smallest eigenvalue of a symmetric Laplacian.
double algebraic_connectivity(const Matrix& l);

// Rows are the orthonormal eigenvectors of a symmetric L for eigenvalues
// lambda_2..lambda_n (ascending), first nonzero entry of each row positive.
Matrix build_RV(const Matrix& l);

// Complex (n-1) x n weight with kernel span(1) and mu_{inf,R}(-L) within
// epsilon of alpha_ess(-L).
CMatrix build_R_epsilon(const Matrix& l, double epsilon);

struct LaplacianBundle {
  Matrix l;
  Vector v;
  double alpha_ess = 0.0;                // of -L
  std::optional<double> lambda2;         // undirected only
  std::optional<Matrix> r_v;             // undirected only
};

LaplacianBundle laplacian_bundle(const WeightedDigraph& g);

}  // namespace contrakt
