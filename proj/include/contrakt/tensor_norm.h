#pragma once

#include <cstdint>
#include <vector>

#include "contrakt/linalg.h"
#include "contrakt/measures.h"

namespace contrakt {

// u in R^n (x) R^k is stored with u[i * k + j] = U_ij, so v (x) w has entries
// v_i w_j.
Matrix unflatten(const Vector& u, int n, int k);
Vector flatten(const Matrix& u);
Vector kron(const Vector& v, const Vector& w);

struct TensorTerm {
  Vector v;  // length n
  Vector w;  // length k
};

struct TensorRepresentation {
  int n = 0;
  int k = 0;
  std::vector<TensorTerm> terms;

  Vector reconstruct() const;
};

// (sum_i ||v_i||_2^2 ||w_i||_p^2)^(1/2). Throws BadRepresentation unless the
// representation reconstructs u to 1e-9 (relative to 1 + ||u||).
double tensor_norm_upper(const Vector& u, const TensorRepresentation& rep,
                         PNorm p);

// u = sum_i sigma_i a_i (x) b_i from the SVD of U.
TensorRepresentation svd_representation(const Vector& u, int n, int k);
// u = sum_i e_i (x) (row i of U).
TensorRepresentation row_representation(const Vector& u, int n, int k);

struct TensorSearchOptions {
  int rank_cap = 0;  // 0 selects min(n, k) + 1
  int restarts = 32;
  std::uint64_t seed = 0;
  double step_tol = 1e-8;
  int max_evaluations = 20000;  // per restart
};

struct TensorSearchResult {
  double value = 0.0;  // best representation cost found
  int rank = 0;        // number of terms of the best representation
  TensorRepresentation representation;
  int rank_cap = 0;
  int restarts = 0;
  std::uint64_t seed = 0;
};

// Multi-start compass search over representations with at most rank_cap
// terms. For fixed factors w_i the optimal v_i are closed form, so the
// search runs over the w_i only. The result is the minimum over ranks and
// restarts, which makes it nonincreasing in both rank_cap and restarts.
TensorSearchResult tensor_norm_bruteforce(const Vector& u, int n, int k, PNorm p,
                                          const TensorSearchOptions& options = {});

// Cost of the best representation whose k-side factors are the columns of w
// (zero columns ignored); +inf when their span misses the row space of U.
double representation_cost_for_factors(const Matrix& u_mat, const Matrix& w,
                                       PNorm p,
                                       TensorRepresentation* rep = nullptr);

// max_i mu_p(Lambda_i), the bound on the (2,p) measure of blkdiag(Lambda_i).
double tensor_measure_bound(const std::vector<Matrix>& blocks, PNorm p);

Matrix block_diagonal(const std::vector<Matrix>& blocks);

}  // namespace contrakt
