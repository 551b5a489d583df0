#include "commands.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "contrakt/certify.h"
#include "contrakt/error.h"
#include "contrakt/graph.h"
#include "contrakt/measures.h"
#include "contrakt/sim.h"

namespace contrakt::cli {
namespace {

LoadedSystem load_system(const RunConfig& c) {
  return parse_system(read_json_file(c.inputs.at("system")));
}

std::vector<Vector> load_vectors(const RunConfig& c, const std::string& name, int dim) {
  const std::vector<Vector> out = parse_vectors(read_json_file(c.inputs.at(name)));
  for (const Vector& v : out) {
    if (v.size() != dim) {
      fail(ErrorKind::kDimensionMismatch, name + " has length " + std::to_string(v.size()) +
                                              ", system dimension is " + std::to_string(dim));
    }
  }
  return out;
}

Vector load_vector(const RunConfig& c, const std::string& name, int dim) {
  const std::vector<Vector> all = load_vectors(c, name, dim);
  if (all.size() != 1) fail(ErrorKind::kInvalidInput, name + " must hold a single vector here");
  return all.front();
}

PNorm norm_param(const RunConfig& c) { return PNorm::parse(param_string(c, "p")); }

DomainSampler sampler(const RunConfig& c, int dim) {
  DomainSampler d = DomainSampler::cube(dim, param_number(c, "box"), c.seed);
  d.grid_per_dim = param_int(c, "grid");
  d.random_count = param_int(c, "random");
  if (d.grid_per_dim < 1 || d.random_count < 0) fail(ErrorKind::kInvalidInput, "grid must be >= 1 and random >= 0");
  return d;
}

IntegrateOptions integrate_options(const RunConfig& c) {
  IntegrateOptions o;
  o.rtol = param_number(c, "tol");
  o.atol = 1e-2 * o.rtol;
  o.min_samples = param_int(c, "samples");
  if (o.min_samples < 1) fail(ErrorKind::kInvalidInput, "samples must be >= 1");
  return o;
}

// Semi-norm from weight_mode: file, none, kernel (orthonormal rows spanning
// Ker^perp) or optimal (optimal weight for the constant Jacobian). auto picks
// file, then optimal, then kernel, then none.
SemiNormSpec semi_spec(RunConfig& c, const DynSystem& sys, PNorm p) {
  std::string mode = param_string(c, "weight_mode");
  if (mode == "auto") {
    if (c.inputs.count("weight")) {
      mode = "file";
    } else if (sys.known_kernel && sys.constant_jacobian && sys.time_invariant) {
      mode = "optimal";
    } else if (sys.known_kernel) {
      mode = "kernel";
    } else {
      mode = "none";
    }
    c.params["weight_mode"] = mode;
  }
  if (mode == "file") {
    if (!c.inputs.count("weight")) fail(ErrorKind::kInvalidInput, "weight_mode file needs a weight input");
    return SemiNormSpec(p, parse_matrix(read_json_file(c.inputs.at("weight"))));
  }
  if (mode == "none") return SemiNormSpec(p);
  if (!sys.known_kernel) fail(ErrorKind::kInvalidInput, "weight_mode " + mode + " needs a model with a known kernel");
  const Matrix& kernel = *sys.known_kernel;
  if (mode == "kernel") return SemiNormSpec(p, Matrix(kernel_basis(Matrix(kernel.transpose())).transpose()));
  if (mode == "optimal") {
    if (!sys.constant_jacobian || !sys.time_invariant) {
      fail(ErrorKind::kInvalidInput, "weight_mode optimal needs a constant Jacobian");
    }
    const Matrix j = sys.jacobian(0.0, Vector::Zero(sys.dim));
    return SemiNormSpec(p, optimal_R_construction(to_complex(j), to_complex(kernel), p,
                                                  param_number(c, "epsilon"))
                               .r);
  }
  fail(ErrorKind::kInvalidInput, "unknown weight_mode '" + mode + "'");
}

Json certificate_json(const Certificate& cert) {
  Json j = {{"kind", to_string(cert.kind)},
            {"status", to_string(cert.status)},
            {"certified", cert.certified()},
            {"norm", cert.norm},
            {"threshold", cert.threshold},
            {"max_measure", cert.max_measure},
            {"rate_c", cert.rate_c},
            {"worst", {{"t", cert.worst.t}, {"x", to_json(cert.worst.x)}}},
            {"sample_count", cert.sample_count},
            {"global", cert.global},
            {"assumed_piecewise_analytic", cert.assumed_piecewise_analytic},
            {"seed", cert.seed},
            {"scope", cert.scope},
            {"weak_tolerance", kWeakTolerance}};
  if (!cert.second_norm.empty()) j["second_norm"] = cert.second_norm;
  if (cert.predicted_rate) j["predicted_rate"] = *cert.predicted_rate;
  if (cert.condition_number) j["condition_number"] = *cert.condition_number;
  return j;
}

Json trajectory_json(const Trajectory& traj, double t_final) {
  Json j = {{"status", to_string(traj.status)},
            {"t_final", t_final},
            {"samples", traj.size()},
            {"steps", traj.stats.steps},
            {"rejected_steps", traj.stats.rejected_steps},
            {"rtol", traj.stats.rtol},
            {"atol", traj.stats.atol},
            {"final_state", to_json(traj.final_state())}};
  if (traj.status == TrajectoryStatus::kDiverged) j["diverged_at"] = traj.diverged_at;
  return j;
}

Json fit_json(const RateFit& f) {
  return {{"rate", f.rate}, {"r_squared", f.r_squared}, {"t_lo", f.t_lo},
          {"t_hi", f.t_hi}, {"floor", f.floor},         {"samples", f.samples}};
}

RateFitOptions fit_options(const RunConfig& c) {
  RateFitOptions o;
  o.floor = param_number(c, "floor");
  o.envelope = param_bool(c, "envelope");
  return o;
}

// Fit, or the reason there is none.
struct FitAttempt {
  std::optional<RateFit> fit;
  std::string error;
};

FitAttempt try_fit(const std::vector<double>& t, const std::vector<double>& m, const RateFitOptions& o) {
  try {
    return {estimate_decay_rate(t, m, o), ""};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kInsufficientDecay) throw;
    return {std::nullopt, e.what()};
  }
}

// Compares a fit with a predicted rate; returns true when within tolerance.
bool add_rate_comparison(Json& out, const FitAttempt& fit, const DynSystem& sys, double tolerance) {
  if (!fit.fit) {
    out["fit"] = nullptr;
    out["fit_error"] = fit.error;
    return false;
  }
  out["fit"] = fit_json(*fit.fit);
  if (!sys.predicted_rate) return fit.fit->rate > 0.0;
  const double predicted = sys.predicted_rate->value;
  const double rel = std::abs(fit.fit->rate - predicted) / std::abs(predicted);
  out["predicted_rate"] = predicted;
  out["predicted_rate_provenance"] = sys.predicted_rate->provenance;
  out["relative_error"] = rel;
  out["rate_tolerance"] = tolerance;
  out["within_tolerance"] = rel <= tolerance;
  return rel <= tolerance;
}

double resolve_t_final(RunConfig& c, const DynSystem& sys, std::optional<double> certified_rate) {
  if (!param_is_auto(c, "t_final")) return param_number(c, "t_final");
  double rate = 0.0;
  if (sys.predicted_rate && sys.predicted_rate->value > 0.0) {
    rate = sys.predicted_rate->value;
  } else if (certified_rate && *certified_rate > 0.0) {
    rate = *certified_rate;
  } else if (sys.constant_jacobian && sys.time_invariant) {
    const Matrix j = sys.jacobian(0.0, Vector::Zero(sys.dim));
    rate = -(sys.known_kernel ? alpha_ess(j) : spectral_abscissa(j));
  }
  if (rate <= 0.0) {
    fail(ErrorKind::kInvalidInput, "t_final is needed: the model predicts no positive rate");
  }
  const double t = 30.0 / rate;
  c.params["t_final"] = t;
  return t;
}

struct MetricChoice {
  std::string name;
  Metric metric;
};

MetricChoice choose_metric(RunConfig& c, const LoadedSystem& ls, const Vector& x0) {
  const DynSystem& sys = ls.system;
  std::string name = param_string(c, "metric");
  if (name == "auto") {
    if (sys.predicted_limit && !sys.predicted_unbounded) {
      name = "limit";
    } else if (sys.equilibrium_point) {
      name = "equilibrium";
    } else if (ls.internal) {
      name = "disagreement";
    } else {
      name = "norm";
    }
    c.params["metric"] = name;
  }
  if (name == "limit") {
    if (!sys.predicted_limit || sys.predicted_unbounded) fail(ErrorKind::kInvalidInput, "model predicts no limit");
    const Vector lim = sys.predicted_limit(x0);
    return {name, [lim](const Vector& x) { return (x - lim).cwiseAbs().maxCoeff(); }};
  }
  if (name == "equilibrium") {
    if (!sys.equilibrium_point) fail(ErrorKind::kInvalidInput, "model has no equilibrium point");
    const Vector eq = *sys.equilibrium_point;
    return {name, [eq](const Vector& x) { return (x - eq).cwiseAbs().maxCoeff(); }};
  }
  if (name == "disagreement") {
    if (!ls.internal) fail(ErrorKind::kInvalidInput, "disagreement needs a diffusive_network model");
    const int k = ls.internal->dim;
    const int n = sys.dim / k;
    return {name, [n, k](const Vector& x) {
              Vector ave = Vector::Zero(k);
              for (int i = 0; i < n; ++i) ave += x.segment(i * k, k);
              ave /= n;
              double d = 0.0;
              for (int i = 0; i < n; ++i) d += (x.segment(i * k, k) - ave).squaredNorm();
              return std::sqrt(d);
            }};
  }
  if (name == "norm") return {name, [](const Vector& x) { return x.cwiseAbs().maxCoeff(); }};
  fail(ErrorKind::kInvalidInput, "unknown metric '" + name + "'");
}

// Sidecar artifact path: <out stem>_<name>.csv.
std::optional<std::string> artifact_path(const RunConfig& c, const std::string& name) {
  if (c.out.empty()) return std::nullopt;
  std::string stem = c.out;
  if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json") stem.resize(stem.size() - 5);
  return stem + "_" + name + ".csv";
}

void emit_csv(const RunConfig& c, Json& result, const std::string& path,
              const std::vector<std::string>& header, const std::vector<double>& times,
              const std::vector<std::vector<double>>& cols, bool log_y) {
  write_csv(path, header, times, cols);
  result["artifacts"].push_back(path);
  if (c.emit_gnuplot) {
    write_gnuplot(path, static_cast<int>(cols.size()), log_y);
    result["artifacts"].push_back(path + ".gp");
  }
}

void emit_trajectory_csv(const RunConfig& c, Json& result, const std::string& path, const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols(n);
  for (int i = 0; i < n; ++i) {
    header.push_back("x_" + std::to_string(i));
    for (const Vector& s : traj.states) cols[i].push_back(s(i));
  }
  emit_csv(c, result, path, header, traj.times, cols, false);
}

std::vector<double> uniform_times(double t_final, int m) {
  std::vector<double> g;
  for (int i = 0; i <= m; ++i) g.push_back(t_final * i / m);
  g.back() = t_final;
  return g;
}

// ---------------------------------------------------------------------------

CommandResult run_measure(RunConfig& c) {
  const CMatrix a = parse_matrix(read_json_file(c.inputs.at("matrix")));
  const PNorm p = norm_param(c);
  const SemiNormSpec spec = c.inputs.count("weight")
                                ? SemiNormSpec(p, parse_matrix(read_json_file(c.inputs.at("weight"))))
                                : SemiNormSpec(p);
  const MeasureResult r = semi_measure(a, spec);
  Json out = {{"value", r.value},
              {"method", to_string(r.method)},
              {"residual", r.residual},
              {"norm", spec.describe()}};
  if (param_bool(c, "oracle")) {
    const LimitOracleResult o = measure_limit_oracle(a, spec);
    out["oracle"] = {{"value", o.value},
                     {"h", o.h},
                     {"quotients", o.quotients},
                     {"monotone", o.monotone},
                     {"residual", o.residual}};
  }
  return {out, kExitOk};
}

Certificate sync_certificate(RunConfig& c, const LoadedSystem& ls, double* lambda2_out) {
  if (!ls.internal || !ls.graph) fail(ErrorKind::kInvalidInput, "sync needs a diffusive_network model");
  if (ls.graph->directed()) fail(ErrorKind::kInvalidGraph, "sync needs an undirected graph");
  const double lambda2 = algebraic_connectivity(laplacian(*ls.graph));
  const int k = ls.internal->dim;
  const CMatrix q = c.inputs.count("q") ? parse_matrix(read_json_file(c.inputs.at("q")))
                                        : CMatrix(CMatrix::Identity(k, k));
  *lambda2_out = lambda2;
  return sync_condition(ls.internal->jacobian, q, norm_param(c), lambda2, sampler(c, k));
}

CommandResult run_certify(RunConfig& c) {
  const LoadedSystem ls = load_system(c);
  const DynSystem& sys = ls.system;
  const std::string kind = param_string(c, "kind");
  const PNorm p = norm_param(c);
  Json out;
  Certificate cert;
  if (kind == "semi") {
    cert = certify_semi_contraction(sys, semi_spec(c, sys, p), sampler(c, sys.dim));
  } else if (kind == "weak") {
    cert = certify_weak_contraction(sys, SemiNormSpec(p), sampler(c, sys.dim));
  } else if (kind == "doubly") {
    if (!sys.known_kernel) fail(ErrorKind::kInvalidInput, "doubly needs a model with a known kernel");
    std::optional<Vector> x_star = sys.equilibrium_point;
    if (!x_star && sys.predicted_limit && !sys.predicted_unbounded) {
      x_star = sys.predicted_limit(Vector::Zero(sys.dim));
    }
    const DoublyReport rep = analyze_doubly_contracting(sys, p, semi_spec(c, sys, p), *sys.known_kernel,
                                                        sampler(c, sys.dim), x_star);
    cert = rep.certificate;
    out["weak"] = certificate_json(rep.weak);
    out["semi"] = certificate_json(rep.semi);
    out["equilibrium_residual"] = rep.equilibrium_residual;
  } else if (kind == "sync") {
    double lambda2 = 0.0;
    cert = sync_certificate(c, ls, &lambda2);
    out["lambda2"] = lambda2;
  } else {
    fail(ErrorKind::kInvalidInput, "unknown certificate kind '" + kind + "'");
  }
  out["certificate"] = certificate_json(cert);
  out["system"] = sys.name;
  return {out, cert.certified() ? kExitOk : kExitRefuted};
}

CommandResult run_simulate(RunConfig& c) {
  const LoadedSystem ls = load_system(c);
  const Vector x0 = load_vector(c, "x0", ls.system.dim);
  IntegrateOptions o = integrate_options(c);
  o.log_uniform = param_bool(c, "log_uniform");
  const double t_final = param_number(c, "t_final");
  const Trajectory traj = integrate(ls.system, x0, t_final, o);
  Json out = {{"system", ls.system.name}, {"trajectory", trajectory_json(traj, t_final)}};
  out["artifacts"] = Json::array();
  if (!c.out.empty()) emit_trajectory_csv(c, out, c.out, traj);
  return {out, kExitOk};
}

CommandResult verify_coppel(RunConfig& c, const LoadedSystem& ls, Json& out) {
  const DynSystem& sys = ls.system;
  if (!sys.constant_jacobian) {
    fail(ErrorKind::kInvalidInput, "coppel needs a linear model (constant Jacobian)");
  }
  const SemiNormSpec spec = semi_spec(c, sys, norm_param(c));
  const Vector x0 = load_vector(c, "x0", sys.dim);
  const double t_final = resolve_t_final(c, sys, std::nullopt);
  const Matrix a = sys.jacobian(0.0, Vector::Zero(sys.dim));
  const CoppelReport rep = coppel_verify([a](double) -> Matrix { return a; }, spec, x0,
                                         uniform_times(t_final, param_int(c, "samples")),
                                         integrate_options(c));
  out["coppel"] = {{"holds", rep.holds},
                   {"worst_violation", rep.worst_violation},
                   {"max_upper_gap", rep.max_upper_gap},
                   {"max_lower_gap", rep.max_lower_gap},
                   {"slack", "1e-6 (1 + bound)"},
                   {"final", {{"seminorm", rep.seminorm.back()},
                              {"lower", rep.lower.back()},
                              {"upper", rep.upper.back()}}}};
  if (auto path = artifact_path(c, "coppel")) {
    emit_csv(c, out, *path, {"seminorm", "lower", "upper"}, rep.times,
             {rep.seminorm, rep.lower, rep.upper}, true);
  }
  return {out, rep.holds ? kExitOk : kExitRefuted};
}

CommandResult verify_pairwise(RunConfig& c, const LoadedSystem& ls, Json& out) {
  const DynSystem& sys = ls.system;
  if (!c.inputs.count("y0")) fail(ErrorKind::kInvalidInput, "pairwise needs input y0");
  const SemiNormSpec spec = semi_spec(c, sys, norm_param(c));
  const Vector x0 = load_vector(c, "x0", sys.dim);
  const Vector y0 = load_vector(c, "y0", sys.dim);
  double rate;
  if (param_is_auto(c, "c")) {
    if (!sys.constant_jacobian) fail(ErrorKind::kInvalidInput, "c is needed for a nonlinear model");
    rate = -semi_measure(sys.jacobian(0.0, Vector::Zero(sys.dim)), spec).value;
    c.params["c"] = rate;
  } else {
    rate = param_number(c, "c");
  }
  const double t_final = resolve_t_final(c, sys, rate);
  const PairwiseReport rep = contraction_pairwise_check(
      sys, x0, y0, spec, rate, uniform_times(t_final, param_int(c, "samples")), integrate_options(c));
  out["pairwise"] = {{"holds", rep.holds},
                     {"weak_holds", rep.weak_holds},
                     {"worst_ratio", rep.worst_ratio},
                     {"c", rep.c},
                     {"slack", "distance <= bound (1 + 1e-6) + 1e-12"}};
  if (auto path = artifact_path(c, "pairwise")) {
    emit_csv(c, out, *path, {"distance", "bound", "weak_distance"}, rep.times,
             {rep.distance, rep.bound, rep.weak_distance}, true);
  }
  return {out, rep.holds ? kExitOk : kExitRefuted};
}

CommandResult verify_rate(RunConfig& c, const LoadedSystem& ls, Json& out) {
  const DynSystem& sys = ls.system;
  const Vector x0 = load_vector(c, "x0", sys.dim);
  const MetricChoice metric = choose_metric(c, ls, x0);
  const double t_final = resolve_t_final(c, sys, std::nullopt);
  const Trajectory traj = integrate(sys, x0, t_final, integrate_options(c));
  std::vector<double> values;
  for (const Vector& x : traj.states) values.push_back(metric.metric(x));
  Json rate = {{"metric", metric.name}};
  const bool ok = add_rate_comparison(rate, try_fit(traj.times, values, fit_options(c)), sys,
                                      param_number(c, "rate_tolerance"));
  out["rate"] = rate;
  out["trajectory"] = trajectory_json(traj, t_final);
  if (auto path = artifact_path(c, "rate")) emit_csv(c, out, *path, {metric.name}, traj.times, {values}, true);
  return {out, ok ? kExitOk : kExitRefuted};
}

CommandResult verify_sync(RunConfig& c, const LoadedSystem& ls, Json& out) {
  if (!ls.internal) fail(ErrorKind::kInvalidInput, "sync needs a diffusive_network model");
  const DynSystem& sys = ls.system;
  const int k = ls.internal->dim;
  const Vector x0 = load_vector(c, "x0", sys.dim);
  const double t_final = resolve_t_final(c, sys, std::nullopt);
  const Trajectory traj = integrate(sys, x0, t_final, integrate_options(c));
  const SyncSeries ss = sync_metrics(traj, sys.dim / k, k);
  Json sync = {{"initial_disagreement", ss.disagreement.front()},
               {"final_disagreement", ss.disagreement.back()}};
  const bool ok = add_rate_comparison(sync, try_fit(ss.times, ss.disagreement, fit_options(c)), sys,
                                      param_number(c, "rate_tolerance"));
  out["sync"] = sync;
  if (auto path = artifact_path(c, "sync")) {
    emit_csv(c, out, *path, {"disagreement", "max_pairwise"}, ss.times, {ss.disagreement, ss.max_pairwise},
             true);
  }
  return {out, ok ? kExitOk : kExitRefuted};
}

CommandResult verify_lyapunov(RunConfig& c, const LoadedSystem& ls, Json& out) {
  if (!ls.lotka_volterra) fail(ErrorKind::kInvalidInput, "lyapunov needs a lotka_volterra model");
  const LotkaVolterra& lv = *ls.lotka_volterra;
  const int n = lv.system.dim;
  const Vector x_star = lv.equilibrium();
  const Vector v = lv.weight();
  const Vector x0 = load_vector(c, "x0", n);
  double t_final;
  if (param_is_auto(c, "t_final")) {
    const double rate = -spectral_abscissa(Matrix(x_star.asDiagonal() * lv.a));
    t_final = 30.0 / rate;
    c.params["t_final"] = t_final;
  } else {
    t_final = param_number(c, "t_final");
  }
  const IntegrateOptions o = integrate_options(c);
  const Trajectory x = integrate_lotka_volterra(lv, x0, t_final, o);
  const LyapunovReport v1 = lyapunov_monitor(x, lv_v1(v, x_star));
  const LyapunovReport v2 = lyapunov_monitor(x, lv_v2(v, lv.a, lv.r));
  auto report = [](const LyapunovReport& r) {
    return Json{{"nonincreasing", r.nonincreasing},
                {"max_increase", r.max_increase},
                {"first_violation", r.first_violation}};
  };
  bool ok = v1.nonincreasing && v2.nonincreasing;
  Json lyap = {{"v1", report(v1)},
               {"v2", report(v2)},
               {"weight", to_json(v)},
               {"equilibrium", to_json(x_star)},
               {"slack", "1e-8 (1 + V)"},
               {"convergence_error", (x.final_state() - x_star).cwiseAbs().maxCoeff()}};
  std::vector<std::string> header = {"v1", "v2"};
  std::vector<std::vector<double>> cols = {v1.values, v2.values};
  if (c.inputs.count("y0")) {
    const Trajectory z = integrate_lotka_volterra(lv, load_vector(c, "y0", n), t_final, o);
    const LyapunovReport d = lyapunov_monitor(
        x, z, [&](const Vector& p, const Vector& q) { return lv_distance(v, p, q); });
    lyap["d_lv"] = report(d);
    ok = ok && d.nonincreasing;
    header.push_back("d_lv");
    cols.push_back(d.values);
  }
  out["lyapunov"] = lyap;
  if (auto path = artifact_path(c, "lyapunov")) emit_csv(c, out, *path, header, x.times, cols, false);
  return {out, ok ? kExitOk : kExitRefuted};
}

CommandResult verify_dichotomy(RunConfig& c, const LoadedSystem& ls, Json& out) {
  const DynSystem& sys = ls.system;
  const std::vector<Vector> x0s = load_vectors(c, "x0", sys.dim);
  if (param_is_auto(c, "t_final")) fail(ErrorKind::kInvalidInput, "dichotomy needs t_final");
  IntegrateOptions o = integrate_options(c);
  const DichotomyReport rep = dichotomy_probe(sys, x0s, param_number(c, "t_final"), o);
  Json entries = Json::array();
  for (const DichotomyEntry& e : rep.entries) {
    entries.push_back({{"initial_norm", e.initial_norm},
                       {"final_norm", e.final_norm},
                       {"growing", e.growing},
                       {"unbounded", e.unbounded},
                       {"diverged", e.diverged}});
  }
  out["dichotomy"] = {{"entries", entries},
                      {"all_bounded", rep.all_bounded},
                      {"all_unbounded", rep.all_unbounded},
                      {"consistent_with_model", rep.consistent_with_model},
                      {"caveat", rep.caveat}};
  return {out, rep.consistent_with_model ? kExitOk : kExitRefuted};
}

CommandResult run_verify(RunConfig& c) {
  const LoadedSystem ls = load_system(c);
  const std::string kind = param_string(c, "kind");
  Json out = {{"system", ls.system.name}, {"kind", kind}};
  out["artifacts"] = Json::array();
  if (kind == "coppel") return verify_coppel(c, ls, out);
  if (kind == "pairwise") return verify_pairwise(c, ls, out);
  if (kind == "rate") return verify_rate(c, ls, out);
  if (kind == "sync") return verify_sync(c, ls, out);
  if (kind == "lyapunov") return verify_lyapunov(c, ls, out);
  if (kind == "dichotomy") return verify_dichotomy(c, ls, out);
  fail(ErrorKind::kInvalidInput, "unknown verify kind '" + kind + "'");
}

CommandResult run_sync(RunConfig& c) {
  const LoadedSystem ls = load_system(c);
  double lambda2 = 0.0;
  const Certificate cert = sync_certificate(c, ls, &lambda2);
  Json out = {{"system", ls.system.name}, {"lambda2", lambda2}, {"certificate", certificate_json(cert)}};
  out["artifacts"] = Json::array();
  bool ok = cert.certified();
  if (!ok) {
    out["witness"] = {{"t", cert.worst.t}, {"x", to_json(cert.worst.x)}, {"measure", cert.max_measure}};
  }
  if (c.inputs.count("x0")) {
    const Vector x0 = load_vector(c, "x0", ls.system.dim);
    const double t_final =
        resolve_t_final(c, ls.system, cert.certified() ? std::optional<double>(cert.rate_c) : std::nullopt);
    const Trajectory traj = integrate(ls.system, x0, t_final, integrate_options(c));
    const int k = ls.internal->dim;
    const SyncSeries ss = sync_metrics(traj, ls.system.dim / k, k);
    const FitAttempt fit = try_fit(ss.times, ss.max_pairwise, fit_options(c));
    Json sim = {{"initial_max_pairwise", ss.max_pairwise.front()},
                {"final_max_pairwise", ss.max_pairwise.back()}};
    if (fit.fit) {
      sim["fit"] = fit_json(*fit.fit);
      if (cert.certified()) sim["rate_over_certified_c"] = fit.fit->rate / cert.rate_c;
    } else {
      sim["fit"] = nullptr;
      sim["fit_error"] = fit.error;
    }
    sim["decays"] = fit.fit && fit.fit->rate > 0.0;
    ok = ok && fit.fit && fit.fit->rate > 0.0;
    out["simulation"] = sim;
    if (auto path = artifact_path(c, "sync")) {
      emit_csv(c, out, *path, {"disagreement", "max_pairwise"}, ss.times,
               {ss.disagreement, ss.max_pairwise}, true);
    }
  }
  return {out, ok ? kExitOk : kExitRefuted};
}

CommandResult run_report(RunConfig& c) {
  const LoadedSystem ls = load_system(c);
  const DynSystem& sys = ls.system;
  const PNorm p = norm_param(c);
  const Certificate cert = certify_semi_contraction(sys, semi_spec(c, sys, p), sampler(c, sys.dim));
  Json out = {{"system", sys.name}, {"certificate", certificate_json(cert)}};
  out["artifacts"] = Json::array();
  const Vector x0 = load_vector(c, "x0", sys.dim);
  const double t_final =
      resolve_t_final(c, sys, cert.certified() ? std::optional<double>(cert.rate_c) : std::nullopt);
  bool ok = cert.certified();
  if (sys.predicted_unbounded) {
    const DichotomyReport rep = dichotomy_probe(sys, {x0}, t_final, integrate_options(c));
    out["dichotomy"] = {{"unbounded", rep.all_unbounded},
                        {"final_norm", rep.entries.front().final_norm},
                        {"consistent_with_model", rep.consistent_with_model},
                        {"caveat", rep.caveat}};
    ok = ok && rep.consistent_with_model;
    return {out, ok ? kExitOk : kExitRefuted};
  }
  const MetricChoice metric = choose_metric(c, ls, x0);
  const Trajectory traj = integrate(sys, x0, t_final, integrate_options(c));
  std::vector<double> values;
  for (const Vector& x : traj.states) values.push_back(metric.metric(x));
  Json rate = {{"metric", metric.name}};
  ok = add_rate_comparison(rate, try_fit(traj.times, values, fit_options(c)), sys,
                           param_number(c, "rate_tolerance")) &&
       ok;
  out["rate"] = rate;
  out["trajectory"] = trajectory_json(traj, t_final);
  if (sys.predicted_limit) {
    const Vector lim = sys.predicted_limit(x0);
    out["limit"] = {{"predicted", to_json(lim)},
                    {"error", (traj.final_state() - lim).cwiseAbs().maxCoeff()}};
  }
  if (auto path = artifact_path(c, "trajectory")) emit_trajectory_csv(c, out, *path, traj);
  if (auto path = artifact_path(c, "rate")) emit_csv(c, out, *path, {metric.name}, traj.times, {values}, true);
  return {out, ok ? kExitOk : kExitRefuted};
}

}  // namespace

CommandResult run_command(RunConfig& config) {
  resolve(config);
  const std::string& cmd = config.command;
  if (cmd == "measure") return run_measure(config);
  if (cmd == "certify") return run_certify(config);
  if (cmd == "simulate") return run_simulate(config);
  if (cmd == "verify") return run_verify(config);
  if (cmd == "sync") return run_sync(config);
  return run_report(config);
}

}  // namespace contrakt::cli
