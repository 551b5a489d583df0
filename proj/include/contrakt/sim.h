#pragma once

#include <functional>
#include <string>
#include <vector>

#include "contrakt/linalg.h"
#include "contrakt/measures.h"
#include "contrakt/systems.h"

namespace contrakt {

struct IntegrateOptions {
  double rtol = 1e-9;  // must lie in [1e-12, 1e-3]
  double atol = 1e-11;
  int min_samples = 200;
  bool log_uniform = false;
  // Explicit output times in (0, t_final]; overrides the default grid.
  std::vector<double> output_times;
  double divergence_norm = 1e12;
  long max_steps = 5'000'000;
};

enum class TrajectoryStatus { kOk, kDiverged };
const char* to_string(TrajectoryStatus s);

struct IntegratorStats {
  long steps = 0;
  long rejected_steps = 0;
  double rtol = 0.0;
  double atol = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  IntegratorStats stats;
  TrajectoryStatus status = TrajectoryStatus::kOk;
  // Time at which the state left the divergence ball (status kDiverged).
  double diverged_at = 0.0;

  std::size_t size() const { return times.size(); }
  const Vector& final_state() const { return states.back(); }
};

// Adaptive Dormand-Prince 5(4). The integrator lands exactly on every output
// time. A state that leaves the divergence ball or turns non-finite ends the
// trajectory with status kDiverged. Throws InvalidInput, StepUnderflow.
Trajectory integrate(const DynSystem& sys, const Vector& x0, double t_final,
                     const IntegrateOptions& options = {});

// Default output grid: uniform with min_samples intervals, or 0 followed by
// min_samples log-spaced points over [1e-6 t_final, t_final].
std::vector<double> output_grid(double t_final, const IntegrateOptions& options);

// Trajectories integrated concurrently, returned in input order.
std::vector<Trajectory> integrate_many(const DynSystem& sys,
                                       const std::vector<Vector>& x0s,
                                       double t_final,
                                       const IntegrateOptions& options = {});

using MatrixPath = std::function<Matrix(double t)>;

struct CoppelReport {
  std::vector<double> times;
  std::vector<double> seminorm;       // |x(t)|
  std::vector<double> lower;          // exp(-int mu(-A)) |x0|
  std::vector<double> upper;          // exp(int mu(A)) |x0|
  std::vector<double> integral_mu;    // int_0^t mu(A)
  std::vector<double> integral_mu_neg;  // int_0^t mu(-A)
  double max_upper_gap = 0.0;         // max |upper - |x||
  double max_lower_gap = 0.0;         // max ||x| - lower|
  double worst_violation = 0.0;       // max excess over a bound, minus slack
  bool holds = true;
};

// Integrates x' = A(t) x together with both measure integrals and checks
// exp(-int mu(-A)) |x0| <= |x(t)| <= exp(int mu(A)) |x0| at every grid time,
// slack 1e-6 (1 + bound). Throws KernelNotInvariant if Ker(s) is not
// A(t)-invariant at some grid time.
CoppelReport coppel_verify(const MatrixPath& a, const SemiNormSpec& s,
                           const Vector& x0, const std::vector<double>& t_grid,
                           const IntegrateOptions& options = {});

using Metric = std::function<double(const Vector&)>;

struct PairwiseReport {
  std::vector<double> times;
  std::vector<double> distance;       // |x(t) - y(t)|
  std::vector<double> bound;          // e^{-ct} |x0 - y0|
  std::vector<double> weak_distance;  // ||x(t) - y(t)|| in the plain norm
  double worst_ratio = 0.0;           // max distance / bound
  bool holds = true;
  bool weak_holds = true;
  double c = 0.0;
};

// |phi(t,x0) - phi(t,y0)| <= e^{-ct} |x0 - y0| (1 + 1e-6) at all grid times,
// plus the weak form in the plain p-norm of s.
PairwiseReport contraction_pairwise_check(const DynSystem& sys, const Vector& x0,
                                          const Vector& y0, const SemiNormSpec& s,
                                          double c, const std::vector<double>& t_grid,
                                          const IntegrateOptions& options = {});
// Same check with caller-supplied distance functionals.
PairwiseReport contraction_pairwise_check(const DynSystem& sys, const Vector& x0,
                                          const Vector& y0, const Metric& distance,
                                          const Metric& weak_distance, double c,
                                          const std::vector<double>& t_grid,
                                          const IntegrateOptions& options = {});

struct RateFitOptions {
  double floor = 1e-10;
  // Fit the running tail maximum max_{s >= t} m(s) instead of m, which
  // removes the zero crossings of oscillatory decays.
  bool envelope = false;
};

struct RateFit {
  double rate = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double floor = 0.0;
  int samples = 0;
};

// Least-squares slope of -log m(t) over the samples with m in
// [floor, ceiling], from the first time m reaches the ceiling until it first
// drops below floor. The ceiling is 0.1 m(0), lowered so that the first 20%
// of the decades spanned above the floor are skipped. Throws InsufficientDecay with fewer than 10 samples.
RateFit estimate_decay_rate(const std::vector<double>& times,
                            const std::vector<double>& metric,
                            const RateFitOptions& options = {});
RateFit estimate_decay_rate(const Trajectory& traj, const Metric& metric,
                            const RateFitOptions& options = {});

struct SyncSeries {
  std::vector<double> times;
  std::vector<Vector> average;          // x_ave(t)
  std::vector<double> disagreement;     // ||x - 1 (x) x_ave||_2
  std::vector<std::vector<double>> pairwise;  // ||x_i - x_j||_2, i < j
  std::vector<double> max_pairwise;
};

// Throws DimensionMismatch unless the state dimension is n k.
SyncSeries sync_metrics(const Trajectory& traj, int n, int k);

struct LyapunovReport {
  std::vector<double> times;
  std::vector<double> values;
  double max_increase = 0.0;  // largest V(t_{m+1}) - V(t_m) - slack
  long first_violation = -1;  // sample index, -1 if none
  bool nonincreasing = true;
};

// V(x(t_{m+1})) <= V(x(t_m)) + 1e-8 (1 + V) along consecutive samples.
LyapunovReport lyapunov_monitor(const std::vector<double>& times,
                                const std::vector<double>& values);
LyapunovReport lyapunov_monitor(const Trajectory& traj, const Metric& v);
// Two trajectories on the same grid and a distance d(x, z).
LyapunovReport lyapunov_monitor(
    const Trajectory& x, const Trajectory& z,
    const std::function<double(const Vector&, const Vector&)>& d);

// Built-in Lotka-Volterra monitors. Throw NonPositiveState on entries <= 0.
double lv_distance(const Vector& v, const Vector& x, const Vector& z);
Metric lv_v1(const Vector& v, const Vector& x_star);
Metric lv_v2(const Vector& v, const Matrix& a, const Vector& r);

// Integrates in log coordinates and maps back, so states stay positive.
// Throws NonPositiveState for a non-positive x0.
Trajectory integrate_lotka_volterra(const LotkaVolterra& lv, const Vector& x0,
                                    double t_final,
                                    const IntegrateOptions& options = {});

struct DichotomyEntry {
  double initial_norm = 0.0;
  double final_norm = 0.0;
  bool growing = false;    // final norm above the norm at 0.9 t_final
  bool unbounded = false;  // final > 100 x initial and growing (or diverged)
  bool diverged = false;
};

struct DichotomyReport {
  std::vector<DichotomyEntry> entries;
  bool all_bounded = true;
  bool all_unbounded = true;
  // Agreement with the model's equilibrium metadata: no equilibrium means
  // every trajectory unbounded, an equilibrium means every one bounded.
  bool consistent_with_model = true;
  std::string caveat;
};

DichotomyReport dichotomy_probe(const DynSystem& sys,
                                const std::vector<Vector>& x0s, double t_final,
                                const IntegrateOptions& options = {});

struct FieldDecayReport {
  double worst_excess = 0.0;  // max |f(x(t))| - e^{-ct} |f(x0)| - 1e-6
  bool holds = true;
};

// |f(x(t))|_s <= e^{-ct} |f(x0)|_s + 1e-6 along the stored samples.
FieldDecayReport vector_field_decay_check(const DynSystem& sys,
                                          const Trajectory& traj,
                                          const SemiNormSpec& s, double c);

// max_t ||C x(t) - C x0||_inf for the model's conserved functionals; 0 if
// the model declares none.
double conservation_drift(const DynSystem& sys, const Trajectory& traj);

}  // namespace contrakt
