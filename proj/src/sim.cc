#include "contrakt/sim.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "contrakt/error.h"
#include "contrakt/parallel.h"

namespace contrakt {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;
using Dopri = odeint::runge_kutta_dopri5<State>;

Vector to_vector(const State& s) {
  return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
}

bool finite_and_bounded(const State& s, double limit) {
  double sq = 0.0;
  for (double v : s) {
    if (!std::isfinite(v)) return false;
    sq += v * v;
  }
  return std::sqrt(sq) <= limit;
}

void validate(const IntegrateOptions& o, double t_final) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    fail(ErrorKind::kInvalidInput, "t_final must be positive and finite");
  }
  if (!(o.rtol >= 1e-12 && o.rtol <= 1e-3)) {
    fail(ErrorKind::kInvalidInput, "rtol must lie in [1e-12, 1e-3]");
  }
  if (!(o.atol > 0.0)) fail(ErrorKind::kInvalidInput, "atol must be positive");
  if (o.min_samples < 1) fail(ErrorKind::kInvalidInput, "min_samples must be >= 1");
}

}  // namespace

const char* to_string(TrajectoryStatus s) {
  return s == TrajectoryStatus::kOk ? "ok" : "diverged";
}

std::vector<double> output_grid(double t_final, const IntegrateOptions& o) {
  if (!o.output_times.empty()) {
    std::vector<double> grid;
    grid.reserve(o.output_times.size() + 1);
    grid.push_back(0.0);
    for (double t : o.output_times) {
      if (!(t > grid.back()) || t > t_final * (1.0 + 1e-15)) {
        fail(ErrorKind::kInvalidInput,
             "output times must be increasing and inside (0, t_final]");
      }
      grid.push_back(t);
    }
    return grid;
  }
  const int m = o.min_samples;
  std::vector<double> grid(1, 0.0);
  if (o.log_uniform) {
    const double lo = std::log(1e-6 * t_final), hi = std::log(t_final);
    for (int i = 0; i < m; ++i) grid.push_back(std::exp(lo + (hi - lo) * i / (m - 1.0 + (m == 1))));
    grid.back() = t_final;
  } else {
    for (int i = 1; i <= m; ++i) grid.push_back(t_final * i / m);
    grid.back() = t_final;
  }
  return grid;
}

Trajectory integrate(const DynSystem& sys, const Vector& x0, double t_final,
                     const IntegrateOptions& options) {
  validate(options, t_final);
  if (x0.size() != sys.dim) {
    fail(ErrorKind::kDimensionMismatch, "x0 does not match the system dimension");
  }
  const std::vector<double> grid = output_grid(t_final, options);

  Trajectory traj;
  traj.stats.rtol = options.rtol;
  traj.stats.atol = options.atol;
  traj.times.reserve(grid.size());
  traj.states.reserve(grid.size());

  State x(x0.data(), x0.data() + x0.size());
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  if (!finite_and_bounded(x, options.divergence_norm)) {
    traj.status = TrajectoryStatus::kDiverged;
    return traj;
  }

  const VectorField& f = sys.f;
  auto rhs = [&f](const State& s, State& ds, double t) {
    const Vector out = f(t, to_vector(s));
    std::copy(out.data(), out.data() + out.size(), ds.begin());
  };

  // Error per unit step: accept when max_i |err_i| / (atol + rtol |x_i|) <= dt.
  // This makes the global error scale like tol^{5/4} rather than tol.
  Dopri stepper;
  const std::size_t n = x.size();
  State dxdt(n), x_new(n), dxdt_new(n), x_err(n), x_out(n);
  rhs(x, dxdt, 0.0);
  double t = 0.0;
  double dt = std::min(grid[1], 1e-6 * std::max(1.0, t_final));
  std::size_t next = 1;
  while (next < grid.size()) {
    if (traj.stats.steps + traj.stats.rejected_steps >= options.max_steps) {
      fail(ErrorKind::kStepUnderflow, "step budget exhausted at t = " + std::to_string(t));
    }
    // Stretch onto t_final rather than leave a sliver; a tiny step makes the
    // per-unit-step error estimate pure roundoff.
    const bool last = t + 1.001 * dt >= t_final;
    if (last) dt = t_final - t;
    stepper.do_step(rhs, x, dxdt, t, x_new, dxdt_new, dt, x_err);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = options.atol + options.rtol * std::max(std::abs(x[i]), std::abs(x_new[i]));
      err = std::max(err, std::abs(x_err[i]) / scale);
    }
    err /= dt;
    if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    if (err <= 1.0) {
      ++traj.stats.steps;
      const double t_new = last ? t_final : t + dt;
      const bool escaped = !finite_and_bounded(x_new, options.divergence_norm);
      while (next < grid.size() && (grid[next] <= t_new || last) && !escaped) {
        if (grid[next] >= t_new) {
          traj.states.push_back(to_vector(x_new));
        } else {
          stepper.calc_state(grid[next], x_out, x, dxdt, t, x_new, dxdt_new, t_new);
          traj.states.push_back(to_vector(x_out));
        }
        traj.times.push_back(grid[next]);
        ++next;
      }
      if (escaped) {
        traj.status = TrajectoryStatus::kDiverged;
        traj.diverged_at = t_new;
        if (std::all_of(x_new.begin(), x_new.end(), [](double v) { return std::isfinite(v); })) {
          traj.times.push_back(t_new);
          traj.states.push_back(to_vector(x_new));
        }
        return traj;
      }
      t = t_new;
      x.swap(x_new);
      dxdt.swap(dxdt_new);
      dt *= err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.25)) : 5.0;
    } else {
      ++traj.stats.rejected_steps;
      dt *= std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.25)) : 0.2;
      if (dt < 1e-14 * std::max(1.0, std::abs(t))) {
        fail(ErrorKind::kStepUnderflow, "step size underflow at t = " + std::to_string(t));
      }
    }
  }
  return traj;
}

std::vector<Trajectory> integrate_many(const DynSystem& sys,
                                       const std::vector<Vector>& x0s,
                                       double t_final,
                                       const IntegrateOptions& options) {
  std::vector<Trajectory> out(x0s.size());
  parallel_for(x0s.size(), [&](std::size_t i) {
    out[i] = integrate(sys, x0s[i], t_final, options);
  });
  return out;
}

CoppelReport coppel_verify(const MatrixPath& a, const SemiNormSpec& s,
                           const Vector& x0, const std::vector<double>& t_grid,
                           const IntegrateOptions& options) {
  if (t_grid.empty()) fail(ErrorKind::kInvalidInput, "empty time grid");
  const Matrix a0 = a(0.0);
  const int n = static_cast<int>(a0.rows());
  if (x0.size() != n) fail(ErrorKind::kDimensionMismatch, "x0 does not match A");
  if (s.has_weight()) {
    for (double t : t_grid) {
      if (!is_invariant(to_complex(a(t)), s.kernel_basis())) {
        fail(ErrorKind::kKernelNotInvariant,
             "Ker(R) is not invariant under A(t) at t = " + std::to_string(t));
      }
    }
  }

  DynSystem aug;
  aug.name = "coppel";
  aug.dim = n + 2;
  aug.f = [a, s, n](double t, const Vector& z) -> Vector {
    const Matrix at = a(t);
    Vector out(n + 2);
    out.head(n) = at * z.head(n);
    out(n) = semi_measure(at, s).value;
    out(n + 1) = semi_measure(Matrix(-at), s).value;
    return out;
  };
  Vector z0 = Vector::Zero(n + 2);
  z0.head(n) = x0;
  IntegrateOptions opts = options;
  opts.output_times.clear();
  for (double t : t_grid)
    if (t > 0.0) opts.output_times.push_back(t);
  const double t_final = opts.output_times.empty() ? 0.0 : opts.output_times.back();

  CoppelReport rep;
  const double s0 = seminorm(x0, s);
  auto record = [&](double t, const Vector& z) {
    const double norm = seminorm(Vector(z.head(n)), s);
    const double up = std::exp(z(n)) * s0;
    const double lo = std::exp(-z(n + 1)) * s0;
    rep.times.push_back(t);
    rep.seminorm.push_back(norm);
    rep.upper.push_back(up);
    rep.lower.push_back(lo);
    rep.integral_mu.push_back(z(n));
    rep.integral_mu_neg.push_back(z(n + 1));
    rep.max_upper_gap = std::max(rep.max_upper_gap, std::abs(up - norm));
    rep.max_lower_gap = std::max(rep.max_lower_gap, std::abs(norm - lo));
    const double excess = std::max(norm - up - 1e-6 * (1.0 + up),
                                   lo - norm - 1e-6 * (1.0 + lo));
    if (rep.times.size() == 1) {
      rep.worst_violation = excess;
    } else {
      rep.worst_violation = std::max(rep.worst_violation, excess);
    }
    if (excess > 0.0) rep.holds = false;
  };
  if (t_final <= 0.0) {
    record(0.0, z0);
    return rep;
  }
  const Trajectory traj = integrate(aug, z0, t_final, opts);
  if (traj.status != TrajectoryStatus::kOk) {
    fail(ErrorKind::kDiverged, "Coppel integration diverged");
  }
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] == 0.0 && t_grid.front() > 0.0) continue;
    record(traj.times[i], traj.states[i]);
  }
  return rep;
}

PairwiseReport contraction_pairwise_check(const DynSystem& sys, const Vector& x0,
                                          const Vector& y0, const SemiNormSpec& s,
                                          double c, const std::vector<double>& t_grid,
                                          const IntegrateOptions& options) {
  const PNorm p = s.p();
  return contraction_pairwise_check(
      sys, x0, y0, [s](const Vector& d) { return seminorm(d, s); },
      [p](const Vector& d) { return vector_norm(d, p); }, c, t_grid, options);
}

PairwiseReport contraction_pairwise_check(const DynSystem& sys, const Vector& x0,
                                          const Vector& y0, const Metric& distance,
                                          const Metric& weak_distance, double c,
                                          const std::vector<double>& t_grid,
                                          const IntegrateOptions& options) {
  IntegrateOptions opts = options;
  opts.output_times.clear();
  for (double t : t_grid)
    if (t > 0.0) opts.output_times.push_back(t);
  if (opts.output_times.empty()) fail(ErrorKind::kInvalidInput, "empty time grid");
  const std::vector<Trajectory> trajs =
      integrate_many(sys, {x0, y0}, opts.output_times.back(), opts);
  const Trajectory& tx = trajs[0];
  const Trajectory& ty = trajs[1];
  PairwiseReport rep;
  rep.c = c;
  const double d0 = distance(x0 - y0);
  const double w0 = weak_distance(x0 - y0);
  const std::size_t m = std::min(tx.size(), ty.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double t = tx.times[i];
    const Vector diff = tx.states[i] - ty.states[i];
    const double d = distance(diff);
    const double b = std::exp(-c * t) * d0;
    const double w = weak_distance(diff);
    rep.times.push_back(t);
    rep.distance.push_back(d);
    rep.bound.push_back(b);
    rep.weak_distance.push_back(w);
    if (b > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, d / b);
    if (d > b * (1.0 + 1e-6) + 1e-12) rep.holds = false;
    if (w > w0 * (1.0 + 1e-6) + 1e-12) rep.weak_holds = false;
  }
  if (tx.status != TrajectoryStatus::kOk || ty.status != TrajectoryStatus::kOk) {
    rep.holds = false;
    rep.weak_holds = false;
  }
  return rep;
}

RateFit estimate_decay_rate(const std::vector<double>& times,
                            const std::vector<double>& metric,
                            const RateFitOptions& options) {
  if (times.size() != metric.size() || times.empty()) {
    fail(ErrorKind::kDimensionMismatch, "times and metric differ in length");
  }
  std::vector<double> m = metric;
  if (options.envelope) {
    for (std::size_t i = m.size() - 1; i-- > 0;) m[i] = std::max(m[i], m[i + 1]);
  }
  const double initial = m.front();
  if (!(initial > 0.0)) {
    fail(ErrorKind::kInsufficientDecay, "metric is not positive at t = 0");
  }
  // Skip the first decade, or the first 20% of the decades the metric
  // spans above the floor if that is more.
  double lowest = initial;
  for (double v : m) {
    if (!(v >= options.floor)) break;
    lowest = std::min(lowest, v);
  }
  const double decades = std::log10(initial / lowest);
  const double ceiling = initial * std::min(0.1, std::pow(10.0, -0.2 * decades));
  std::size_t begin = m.size();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] <= ceiling) {
      begin = i;
      break;
    }
  }
  std::vector<double> ts, ls;
  for (std::size_t i = begin; i < m.size(); ++i) {
    if (!(m[i] >= options.floor)) break;
    if (m[i] <= ceiling) {
      ts.push_back(times[i]);
      ls.push_back(std::log(m[i]));
    }
  }
  if (ts.size() < 10) {
    fail(ErrorKind::kInsufficientDecay,
         "only " + std::to_string(ts.size()) + " samples inside the fit window");
  }
  const double k = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += ls[i];
  }
  mt /= k;
  ml /= k;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (ls[i] - ml);
    sll += (ls[i] - ml) * (ls[i] - ml);
  }
  if (!(stt > 0.0)) fail(ErrorKind::kInsufficientDecay, "fit window has zero width");
  RateFit fit;
  fit.rate = -stl / stt;
  fit.r_squared = sll > 0.0 ? std::clamp(stl * stl / (stt * sll), 0.0, 1.0) : 1.0;
  fit.t_lo = ts.front();
  fit.t_hi = ts.back();
  fit.floor = options.floor;
  fit.samples = static_cast<int>(ts.size());
  return fit;
}

RateFit estimate_decay_rate(const Trajectory& traj, const Metric& metric,
                            const RateFitOptions& options) {
  std::vector<double> values;
  values.reserve(traj.size());
  for (const Vector& x : traj.states) values.push_back(metric(x));
  return estimate_decay_rate(traj.times, values, options);
}

SyncSeries sync_metrics(const Trajectory& traj, int n, int k) {
  if (n < 1 || k < 1) fail(ErrorKind::kInvalidInput, "n and k must be positive");
  SyncSeries out;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const Vector& x = traj.states[s];
    if (x.size() != static_cast<Eigen::Index>(n) * k) {
      fail(ErrorKind::kDimensionMismatch, "state dimension is not n k");
    }
    Vector ave = Vector::Zero(k);
    for (int i = 0; i < n; ++i) ave += x.segment(i * k, k);
    ave /= n;
    double dis = 0.0;
    for (int i = 0; i < n; ++i) dis += (x.segment(i * k, k) - ave).squaredNorm();
    std::vector<double> pairs;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d = (x.segment(i * k, k) - x.segment(j * k, k)).norm();
        pairs.push_back(d);
        worst = std::max(worst, d);
      }
    out.times.push_back(traj.times[s]);
    out.average.push_back(ave);
    out.disagreement.push_back(std::sqrt(dis));
    out.pairwise.push_back(std::move(pairs));
    out.max_pairwise.push_back(worst);
  }
  return out;
}

LyapunovReport lyapunov_monitor(const std::vector<double>& times,
                                const std::vector<double>& values) {
  if (times.size() != values.size()) {
    fail(ErrorKind::kDimensionMismatch, "times and values differ in length");
  }
  LyapunovReport rep;
  rep.times = times;
  rep.values = values;
  rep.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(values[i + 1])) {
      fail(ErrorKind::kInvalidInput, "Lyapunov function is not finite along the trajectory");
    }
    const double excess =
        values[i + 1] - values[i] - 1e-8 * (1.0 + std::abs(values[i]));
    rep.max_increase = std::max(rep.max_increase, excess);
    if (excess > 0.0 && rep.first_violation < 0) {
      rep.first_violation = static_cast<long>(i + 1);
      rep.nonincreasing = false;
    }
  }
  if (values.size() < 2) rep.max_increase = 0.0;
  return rep;
}

LyapunovReport lyapunov_monitor(const Trajectory& traj, const Metric& v) {
  std::vector<double> values;
  values.reserve(traj.size());
  for (const Vector& x : traj.states) values.push_back(v(x));
  return lyapunov_monitor(traj.times, values);
}

LyapunovReport lyapunov_monitor(
    const Trajectory& x, const Trajectory& z,
    const std::function<double(const Vector&, const Vector&)>& d) {
  if (x.times != z.times) {
    fail(ErrorKind::kDimensionMismatch, "trajectories use different time grids");
  }
  std::vector<double> values;
  values.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) values.push_back(d(x.states[i], z.states[i]));
  return lyapunov_monitor(x.times, values);
}

namespace {

void require_positive(const Vector& x) {
  if (!(x.array() > 0.0).all()) {
    fail(ErrorKind::kNonPositiveState, "state has a non-positive entry");
  }
}

}  // namespace

double lv_distance(const Vector& v, const Vector& x, const Vector& z) {
  require_positive(x);
  require_positive(z);
  return (v.array() * (x.array() / z.array()).log().abs()).sum();
}

Metric lv_v1(const Vector& v, const Vector& x_star) {
  require_positive(x_star);
  return [v, x_star](const Vector& x) { return lv_distance(v, x, x_star); };
}

Metric lv_v2(const Vector& v, const Matrix& a, const Vector& r) {
  return [v, a, r](const Vector& x) {
    return (v.array() * (a * x + r).array().abs()).sum();
  };
}

Trajectory integrate_lotka_volterra(const LotkaVolterra& lv, const Vector& x0,
                                    double t_final, const IntegrateOptions& options) {
  require_positive(x0);
  Trajectory traj = integrate(lv.log_system, x0.array().log().matrix(), t_final, options);
  for (Vector& y : traj.states) y = y.array().exp().matrix();
  return traj;
}

DichotomyReport dichotomy_probe(const DynSystem& sys, const std::vector<Vector>& x0s,
                                double t_final, const IntegrateOptions& options) {
  IntegrateOptions opts = options;
  if (opts.output_times.empty()) {
    opts.output_times = {0.9 * t_final, t_final};
  }
  const std::vector<Trajectory> trajs = integrate_many(sys, x0s, t_final, opts);
  DichotomyReport rep;
  rep.caveat =
      "unboundedness is a finite-horizon heuristic: final norm above 100x the "
      "initial norm and still growing";
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const Trajectory& tr = trajs[i];
    DichotomyEntry e;
    e.initial_norm = x0s[i].norm();
    e.final_norm = tr.final_state().norm();
    e.diverged = tr.status == TrajectoryStatus::kDiverged;
    double before = e.initial_norm;
    for (std::size_t s = 0; s < tr.size(); ++s)
      if (tr.times[s] <= 0.9 * t_final) before = tr.states[s].norm();
    e.growing = e.final_norm > before;
    const double base = e.initial_norm > 0.0 ? e.initial_norm : 1.0;
    e.unbounded = e.diverged || (e.final_norm > 100.0 * base && e.growing);
    rep.all_bounded = rep.all_bounded && !e.unbounded;
    rep.all_unbounded = rep.all_unbounded && e.unbounded;
    rep.entries.push_back(e);
  }
  if (sys.predicted_unbounded || sys.equilibria == EquilibriumKind::kNone) {
    rep.consistent_with_model = rep.all_unbounded;
  } else if (sys.equilibria == EquilibriumKind::kPoint ||
             sys.equilibria == EquilibriumKind::kAffineSet) {
    rep.consistent_with_model = rep.all_bounded;
  }
  return rep;
}

FieldDecayReport vector_field_decay_check(const DynSystem& sys,
                                          const Trajectory& traj,
                                          const SemiNormSpec& s, double c) {
  FieldDecayReport rep;
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  const double f0 = seminorm(sys.f(0.0, traj.states.front()), s);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    const double ft = seminorm(sys.f(t, traj.states[i]), s);
    const double excess = ft - std::exp(-c * t) * f0 - 1e-6;
    rep.worst_excess = std::max(rep.worst_excess, excess);
    if (excess > 0.0) rep.holds = false;
  }
  return rep;
}

double conservation_drift(const DynSystem& sys, const Trajectory& traj) {
  if (!sys.conserved.has_value() || traj.size() == 0) return 0.0;
  const Matrix& c = *sys.conserved;
  const Vector c0 = c * traj.states.front();
  double worst = 0.0;
  for (const Vector& x : traj.states)
    worst = std::max(worst, (c * x - c0).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace contrakt
