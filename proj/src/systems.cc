#include "contrakt/systems.h"

#include <cmath>
#include <random>

#include "contrakt/error.h"
#include "contrakt/measures.h"

namespace contrakt {
namespace {

void require_length(const Vector& b, int n, const char* what) {
  if (b.size() != n) {
    fail(ErrorKind::kDimensionMismatch, std::string(what) + " has wrong length");
  }
}

Matrix kron_identity(const Matrix& l, int k) {
  Matrix out = Matrix::Zero(l.rows() * k, l.cols() * k);
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    for (Eigen::Index j = 0; j < l.cols(); ++j)
      if (l(i, j) != 0.0)
        out.block(i * k, j * k, k, k) = l(i, j) * Matrix::Identity(k, k);
  return out;
}

// Columns 1_n (x) e_j / sqrt(n).
Matrix sync_basis(int n, int k) {
  Matrix out = Matrix::Zero(n * k, k);
  for (int i = 0; i < n; ++i)
    out.block(i * k, 0, k, k) = Matrix::Identity(k, k) / std::sqrt(double(n));
  return out;
}

bool nearly_zero(double x, double scale) { return std::abs(x) <= 1e-12 * (1.0 + scale); }

}  // namespace

Matrix finite_difference_jacobian(const DynSystem& sys, double t,
                                  const Vector& x, double h) {
  const Eigen::Index n = x.size();
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double step = h * std::max(1.0, std::abs(x(j)));
    Vector xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    out.col(j) = (sys.f(t, xp) - sys.f(t, xm)) / (2.0 * step);
  }
  return out;
}

DynSystem affine_averaging(const WeightedDigraph& g, const Vector& b) {
  const int n = g.n();
  require_length(b, n, "b");
  if (!globally_reachable(g)) {
    fail(ErrorKind::kNotReachable, "affine averaging needs a globally reachable node");
  }
  const Matrix l = laplacian(g);
  const Vector v = dominant_left_eigenvector(l);
  const Matrix l_pinv = pinv(l);
  DynSystem sys;
  sys.name = "affine_averaging";
  sys.dim = n;
  sys.f = [l, b](double, const Vector& x) -> Vector { return -l * x + b; };
  sys.jacobian = [l](double, const Vector&) -> Matrix { return -l; };
  sys.constant_jacobian = true;
  sys.known_kernel = Matrix(Matrix::Ones(n, 1));
  sys.conserved = Matrix(v.transpose());
  sys.predicted_rate = PredictedRate{-alpha_ess(Matrix(-l)),
                                     "-alpha_ess(-L), affine averaging"};
  if (nearly_zero(v.dot(b), b.cwiseAbs().sum())) {
    sys.equilibria = EquilibriumKind::kAffineSet;
    const Vector particular = l_pinv * b;
    sys.predicted_limit = [particular, v, n](const Vector& x0) -> Vector {
      return particular +
             Vector::Constant(n, v.dot(x0) - v.dot(particular));
    };
  } else {
    sys.equilibria = EquilibriumKind::kNone;
    sys.predicted_unbounded = true;
  }
  return sys;
}

DynSystem affine_flow(const WeightedDigraph& g, const Vector& b) {
  const int n = g.n();
  require_length(b, n, "b");
  if (!globally_reachable(g)) {
    fail(ErrorKind::kNotReachable, "affine flow needs a globally reachable node");
  }
  const Matrix l = laplacian(g);
  const Matrix lt = l.transpose();
  const Vector v = dominant_left_eigenvector(l);
  const Matrix lt_pinv = pinv(lt);
  DynSystem sys;
  sys.name = "affine_flow";
  sys.dim = n;
  sys.f = [lt, b](double, const Vector& x) -> Vector { return -lt * x + b; };
  sys.jacobian = [lt](double, const Vector&) -> Matrix { return -lt; };
  sys.constant_jacobian = true;
  sys.known_kernel = Matrix(v);
  sys.conserved = Matrix(Matrix::Ones(1, n));
  sys.predicted_rate = PredictedRate{-alpha_ess(Matrix(-l)),
                                     "-alpha_ess(-L), affine flow"};
  if (nearly_zero(b.sum(), b.cwiseAbs().sum())) {
    sys.equilibria = EquilibriumKind::kAffineSet;
    const Vector particular = lt_pinv * b;
    sys.predicted_limit = [particular, v](const Vector& x0) -> Vector {
      return particular + (x0.sum() - particular.sum()) * v;
    };
  } else {
    sys.equilibria = EquilibriumKind::kNone;
    sys.predicted_unbounded = true;
  }
  return sys;
}

Vector averaging_limit_closed_form(const Matrix& l, const Vector& v,
                                   const Vector& b, const Vector& x0) {
  return pinv(l) * b + Vector::Constant(l.rows(), v.dot(x0));
}

Vector flow_limit_closed_form(const Matrix& l, const Vector& v, const Vector& b,
                              const Vector& x0) {
  return pinv(Matrix(l.transpose())) * b + x0.sum() * v;
}

Cost quadratic_cost(const Vector& a, double s) {
  if (!(s > 0.0)) fail(ErrorKind::kNonConvexCost, "quadratic weight must be > 0");
  const int k = static_cast<int>(a.size());
  return Cost{
      "quadratic", k,
      [a, s](const Vector& x) { return 0.5 * s * (x - a).squaredNorm(); },
      [a, s](const Vector& x) -> Vector { return s * (x - a); },
      [s, k](const Vector&) -> Matrix { return s * Matrix::Identity(k, k); }};
}

Cost quartic_cost(const Vector& a) {
  const int k = static_cast<int>(a.size());
  return Cost{"quartic", k,
              [a](const Vector& x) { return 0.25 * (x - a).array().pow(4).sum(); },
              [a](const Vector& x) -> Vector { return (x - a).array().cube(); },
              [a](const Vector& x) -> Matrix {
                return Matrix((3.0 * (x - a).array().square()).matrix().asDiagonal());
              }};
}

Cost log_sum_exp_cost(const Vector& a) {
  const int k = static_cast<int>(a.size());
  // log(e^d + e^-d) = |d| + log(1 + e^{-2|d|}).
  return Cost{"log_sum_exp", k,
              [a](const Vector& x) {
                double acc = 0.0;
                for (Eigen::Index j = 0; j < x.size(); ++j) {
                  const double d = std::abs(x(j) - a(j));
                  acc += d + std::log1p(std::exp(-2.0 * d));
                }
                return acc;
              },
              [a](const Vector& x) -> Vector {
                return (x - a).array().tanh().matrix();
              },
              [a](const Vector& x) -> Matrix {
                const Eigen::ArrayXd th = (x - a).array().tanh();
                return Matrix((1.0 - th.square()).matrix().asDiagonal());
              }};
}

Cost sum_of_costs(const std::vector<Cost>& parts) {
  if (parts.empty()) fail(ErrorKind::kInvalidInput, "empty cost sum");
  const int k = parts.front().dim;
  std::string name;
  for (const Cost& c : parts) {
    if (c.dim != k) fail(ErrorKind::kDimensionMismatch, "cost dimensions differ");
    name += (name.empty() ? "" : "+") + c.name;
  }
  return Cost{name, k,
              [parts](const Vector& x) {
                double acc = 0.0;
                for (const Cost& c : parts) acc += c.value(x);
                return acc;
              },
              [parts, k](const Vector& x) -> Vector {
                Vector acc = Vector::Zero(k);
                for (const Cost& c : parts) acc += c.gradient(x);
                return acc;
              },
              [parts, k](const Vector& x) -> Matrix {
                Matrix acc = Matrix::Zero(k, k);
                for (const Cost& c : parts) acc += c.hessian(x);
                return acc;
              }};
}

Vector minimize_sum(const std::vector<Cost>& costs, const Vector& start) {
  const Cost total = sum_of_costs(costs);
  Vector x = start;
  double value = total.value(x);
  for (int iter = 0; iter < 500; ++iter) {
    const Vector grad = total.gradient(x);
    if (grad.norm() <= 1e-13 * (1.0 + std::abs(value))) return x;
    Matrix h = total.hessian(x);
    // Levenberg shift keeps the step a descent direction when H is singular.
    const double shift = 1e-10 + 1e-3 * grad.norm() *
                                     (h.diagonal().minCoeff() <= 1e-12 ? 1.0 : 0.0);
    h.diagonal().array() += shift;
    Vector step = -h.ldlt().solve(grad);
    if (!step.allFinite() || step.dot(grad) >= 0.0) step = -grad;
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector trial = x + alpha * step;
      const double tv = total.value(trial);
      if (tv <= value + 1e-4 * alpha * step.dot(grad)) {
        x = trial;
        value = tv;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      if (grad.norm() <= 1e-8 * (1.0 + std::abs(value))) return x;
      fail(ErrorKind::kNonConvergence, "Newton line search stalled");
    }
  }
  if (total.gradient(x).norm() <= 1e-8 * (1.0 + std::abs(value))) return x;
  fail(ErrorKind::kNonConvergence, "Newton iteration budget exhausted");
}

namespace {

void require_connected_undirected(const WeightedDigraph& g) {
  if (g.directed()) fail(ErrorKind::kInvalidGraph, "graph must be undirected");
  if (!is_connected(g)) fail(ErrorKind::kNotConnected, "graph is not connected");
}

void check_convex(const Cost& c, const Vector& center, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int s = 0; s < 20; ++s) {
    Vector x = center;
    if (s > 0)
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += unif(gen);
    const Matrix h = c.hessian(x);
    const double lo = symmetric_eigen(0.5 * (h + h.transpose())).eigenvalues(0);
    if (lo < -1e-9) {
      fail(ErrorKind::kNonConvexCost,
           "cost '" + c.name + "' has a Hessian eigenvalue " + std::to_string(lo));
    }
  }
}

}  // namespace

DynSystem primal_dual(const WeightedDigraph& g, const std::vector<Cost>& costs,
                      int k, PrimalDualInfo* info) {
  const int n = g.n();
  if (static_cast<int>(costs.size()) != n) {
    fail(ErrorKind::kDimensionMismatch, "need one cost per node");
  }
  for (const Cost& c : costs) {
    if (c.dim != k) fail(ErrorKind::kDimensionMismatch, "cost dimension != k");
  }
  if (n > 1) require_connected_undirected(g);
  const Vector x_star = minimize_sum(costs, Vector::Zero(k));
  for (int i = 0; i < n; ++i) check_convex(costs[i], x_star, 1000 + i);

  const Matrix lk = kron_identity(laplacian(g), k);
  const int nk = n * k;
  DynSystem sys;
  sys.name = "primal_dual";
  sys.dim = 2 * nk;
  sys.f = [costs, lk, n, k, nk](double, const Vector& s) -> Vector {
    Vector out(2 * nk);
    const Vector x = s.head(nk);
    const Vector nu = s.tail(nk);
    Vector grad(nk);
    for (int i = 0; i < n; ++i) grad.segment(i * k, k) = costs[i].gradient(x.segment(i * k, k));
    out.head(nk) = -grad - lk * nu;
    out.tail(nk) = lk * x;
    return out;
  };
  sys.jacobian = [costs, lk, n, k, nk](double, const Vector& s) -> Matrix {
    Matrix j = Matrix::Zero(2 * nk, 2 * nk);
    for (int i = 0; i < n; ++i)
      j.block(i * k, i * k, k, k) = -costs[i].hessian(s.segment(i * k, k));
    j.block(0, nk, nk, nk) = -lk;
    j.block(nk, 0, nk, nk) = lk;
    return j;
  };
  Matrix conserved = Matrix::Zero(k, 2 * nk);
  for (int i = 0; i < n; ++i) conserved.block(0, nk + i * k, k, k) = Matrix::Identity(k, k);
  sys.conserved = conserved;
  Matrix kernel = Matrix::Zero(2 * nk, k);
  kernel.bottomRows(nk) = sync_basis(n, k);
  sys.known_kernel = kernel;
  sys.equilibria = EquilibriumKind::kAffineSet;

  Vector x_rep(2 * nk);
  for (int i = 0; i < n; ++i) x_rep.segment(i * k, k) = x_star;
  x_rep.tail(nk).setZero();
  const Matrix saddle = sys.jacobian(0.0, x_rep);
  const double rate = -alpha_ess(saddle);
  sys.predicted_rate = PredictedRate{rate, "-alpha_ess of the saddle matrix at 1 (x) x*"};
  sys.predicted_limit = [g, costs, k, x_star, n, nk](const Vector& s0) -> Vector {
    Vector out(2 * nk);
    for (int i = 0; i < n; ++i) out.segment(i * k, k) = x_star;
    out.tail(nk) = primal_dual_dual_limits(g, costs, k, x_star, s0.tail(nk)).exact;
    return out;
  };
  if (info != nullptr) {
    info->x_star = x_star;
    info->saddle = saddle;
    info->predicted_rate = rate;
  }
  return sys;
}

DualLimits primal_dual_dual_limits(const WeightedDigraph& g,
                                   const std::vector<Cost>& costs, int k,
                                   const Vector& x_star, const Vector& nu0) {
  const int n = g.n();
  const int nk = n * k;
  require_length(nu0, nk, "nu0");
  Vector sum = Vector::Zero(k);
  for (int i = 0; i < n; ++i) sum += nu0.segment(i * k, k);
  DualLimits out;
  out.sum_form.resize(nk);
  out.mean_form.resize(nk);
  for (int i = 0; i < n; ++i) {
    out.sum_form.segment(i * k, k) = sum;
    out.mean_form.segment(i * k, k) = sum / n;
  }
  Vector grad(nk);
  for (int i = 0; i < n; ++i) grad.segment(i * k, k) = costs[i].gradient(x_star);
  const Matrix lk_pinv = kron_identity(pinv(laplacian(g)), k);
  out.exact = out.mean_form - lk_pinv * grad;
  return out;
}

DynSystem diffusive_network(const WeightedDigraph& g, const DynSystem& internal) {
  const int n = g.n();
  const int k = internal.dim;
  if (n > 1) require_connected_undirected(g);
  const Matrix l = laplacian(g);
  const Matrix lk = kron_identity(l, k);
  DynSystem sys;
  sys.name = "diffusive_network(" + internal.name + ")";
  sys.dim = n * k;
  const VectorField f = internal.f;
  const JacobianField df = internal.jacobian;
  sys.f = [f, lk, n, k](double t, const Vector& x) -> Vector {
    Vector out = -lk * x;
    for (int i = 0; i < n; ++i) out.segment(i * k, k) += f(t, x.segment(i * k, k));
    return out;
  };
  sys.jacobian = [df, lk, n, k](double t, const Vector& x) -> Matrix {
    Matrix out = -lk;
    for (int i = 0; i < n; ++i) out.block(i * k, i * k, k, k) += df(t, x.segment(i * k, k));
    return out;
  };
  sys.time_invariant = internal.time_invariant;
  sys.constant_jacobian = internal.constant_jacobian;
  sys.assumed_piecewise_analytic = internal.assumed_piecewise_analytic;
  sys.known_kernel = sync_basis(n, k);
  if (internal.constant_jacobian && internal.time_invariant && n > 1) {
    const Matrix a = internal.jacobian(0.0, Vector::Zero(k));
    sys.predicted_rate = PredictedRate{algebraic_connectivity(l) - spectral_abscissa(a),
                                       "lambda_2(L) - alpha(A), linear internal dynamics"};
  }
  return sys;
}

DynSystem linear_system(const Matrix& a, const std::string& name) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    fail(ErrorKind::kDimensionMismatch, "A must be square");
  }
  DynSystem sys;
  sys.name = name;
  sys.dim = static_cast<int>(a.rows());
  sys.f = [a](double, const Vector& x) -> Vector { return a * x; };
  sys.jacobian = [a](double, const Vector&) -> Matrix { return a; };
  sys.constant_jacobian = true;
  sys.equilibrium_point = Vector::Zero(a.rows());
  sys.equilibria = EquilibriumKind::kPoint;
  return sys;
}

DynSystem hopf_oscillator(double sigma, double omega) {
  DynSystem sys;
  sys.name = "hopf";
  sys.dim = 2;
  sys.f = [sigma, omega](double, const Vector& x) -> Vector {
    const double r2 = x.squaredNorm();
    Vector out(2);
    out(0) = (sigma - r2) * x(0) - omega * x(1);
    out(1) = (sigma - r2) * x(1) + omega * x(0);
    return out;
  };
  sys.jacobian = [sigma, omega](double, const Vector& x) -> Matrix {
    const double r2 = x.squaredNorm();
    Matrix j(2, 2);
    j << sigma - r2 - 2 * x(0) * x(0), -omega - 2 * x(0) * x(1),
        omega - 2 * x(0) * x(1), sigma - r2 - 2 * x(1) * x(1);
    return j;
  };
  sys.equilibrium_point = Vector::Zero(2);
  sys.equilibria = EquilibriumKind::kPoint;
  return sys;
}

Vector LotkaVolterra::equilibrium() const {
  if (spectral_abscissa(a) >= 0.0) fail(ErrorKind::kNotHurwitz, "A is not Hurwitz");
  return -a.lu().solve(r);
}

Vector LotkaVolterra::weight() const {
  if (spectral_abscissa(a) >= 0.0) fail(ErrorKind::kNotHurwitz, "A is not Hurwitz");
  const Vector v = -Matrix(a.transpose()).lu().solve(Vector::Ones(a.rows()));
  if (!(v.array() > 0.0).all()) {
    fail(ErrorKind::kNotHurwitz, "weight vector is not positive");
  }
  return v;
}

LotkaVolterra lotka_volterra(const Matrix& a, const Vector& r) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || r.size() != n || n == 0) {
    fail(ErrorKind::kDimensionMismatch, "A must be n x n and r length n");
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && a(i, j) < -1e-12) fail(ErrorKind::kNotMetzler, "A is not Metzler");
  if (!(r.array() > 0.0).all()) fail(ErrorKind::kInvalidInput, "r must be positive");
  LotkaVolterra lv{a, r, {}, {}};
  lv.system.name = "lotka_volterra";
  lv.system.dim = static_cast<int>(n);
  lv.system.f = [a, r](double, const Vector& x) -> Vector {
    return x.cwiseProduct(a * x + r);
  };
  lv.system.jacobian = [a, r](double, const Vector& x) -> Matrix {
    Matrix j = x.asDiagonal() * a;
    j.diagonal() += a * x + r;
    return j;
  };
  lv.log_system.name = "lotka_volterra_log";
  lv.log_system.dim = static_cast<int>(n);
  lv.log_system.f = [a, r](double, const Vector& y) -> Vector {
    return a * y.array().exp().matrix() + r;
  };
  lv.log_system.jacobian = [a](double, const Vector& y) -> Matrix {
    return a * y.array().exp().matrix().asDiagonal();
  };
  if (spectral_abscissa(a) < 0.0) {
    const Vector x_star = lv.equilibrium();
    lv.system.equilibria = EquilibriumKind::kPoint;
    lv.system.equilibrium_point = x_star;
    lv.log_system.equilibria = EquilibriumKind::kPoint;
    lv.log_system.equilibrium_point = x_star.array().log().matrix();
  }
  return lv;
}

DynSystem toy_example(const std::string& name) {
  DynSystem sys;
  sys.name = name;
  sys.dim = 2;
  if (name == "semi_only") {
    sys.f = [](double, const Vector& x) -> Vector {
      return Eigen::Vector2d(-x(0), x(0) * x(1) * x(1));
    };
    sys.jacobian = [](double, const Vector& x) -> Matrix {
      Matrix j(2, 2);
      j << -1, 0, x(1) * x(1), 2 * x(0) * x(1);
      return j;
    };
    sys.known_kernel = Matrix(Eigen::Vector2d(0, 1));
    sys.equilibria = EquilibriumKind::kAffineSet;
  } else if (name == "weak_only") {
    sys.f = [](double, const Vector& x) -> Vector {
      return Eigen::Vector2d(x(1), -x(0));
    };
    sys.jacobian = [](double, const Vector&) -> Matrix {
      Matrix j(2, 2);
      j << 0, 1, -1, 0;
      return j;
    };
    sys.constant_jacobian = true;
    sys.equilibria = EquilibriumKind::kPoint;
    sys.equilibrium_point = Vector::Zero(2);
  } else if (name == "linear_2x2") {
    sys.f = [](double, const Vector& x) -> Vector {
      return Eigen::Vector2d(-x(0), x(0) - 2 * x(1));
    };
    sys.jacobian = [](double, const Vector&) -> Matrix {
      Matrix j(2, 2);
      j << -1, 0, 1, -2;
      return j;
    };
    sys.constant_jacobian = true;
    sys.known_kernel = Matrix(Eigen::Vector2d(0, 1));
    sys.equilibria = EquilibriumKind::kPoint;
    sys.equilibrium_point = Vector::Zero(2);
  } else {
    fail(ErrorKind::kUnknownName, "unknown toy example '" + name + "'");
  }
  return sys;
}

}  // namespace contrakt
