#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "commands.h"
#include "contrakt/error.h"

namespace {

using contrakt::cli::Json;
using contrakt::cli::RunConfig;

struct Flags {
  std::string matrix, weight, system, q, x0, y0, kind, norm, out, config;
  std::optional<double> box, t_final, tol;
  std::optional<std::uint64_t> seed;
  bool oracle = false;
  bool emit_gnuplot = false;
  std::vector<std::string> params;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--seed", f.seed, "Sampler seed");
  sub->add_option("--out", f.out, "Output path (JSON result, or CSV for simulate)");
  sub->add_flag("--emit-gnuplot", f.emit_gnuplot, "Write .gp plot scripts next to CSVs");
  sub->add_option("--param", f.params, "Extra param as key=value (repeatable)");
}

RunConfig from_flags(const std::string& command, const Flags& f) {
  RunConfig c;
  c.command = command;
  auto input = [&](const char* name, const std::string& path) {
    if (!path.empty()) c.inputs[name] = path;
  };
  input("matrix", f.matrix);
  input("weight", f.weight);
  input("system", f.system);
  input("q", f.q);
  input("x0", f.x0);
  input("y0", f.y0);
  for (const std::string& kv : f.params) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      contrakt::fail(contrakt::ErrorKind::kInvalidInput, "--param expects key=value, got '" + kv + "'");
    }
    c.params[kv.substr(0, eq)] = contrakt::cli::parse_param_value(kv.substr(eq + 1));
  }
  if (!f.norm.empty()) c.params["p"] = f.norm;
  if (!f.kind.empty()) c.params["kind"] = f.kind;
  if (f.oracle) c.params["oracle"] = true;
  if (f.box) c.params["box"] = *f.box;
  if (f.t_final) c.params["t_final"] = *f.t_final;
  if (f.tol) c.params["tol"] = *f.tol;
  if (f.seed) c.seed = *f.seed;
  c.out = f.out;
  c.emit_gnuplot = f.emit_gnuplot;
  return c;
}

int execute(RunConfig& config) {
  const contrakt::cli::CommandResult r = contrakt::cli::run_command(config);
  Json doc = {{"manifest", contrakt::cli::manifest(config)}, {"result", r.result}};
  const std::string text = doc.dump(2) + "\n";
  // simulate writes its trajectory to --out; the JSON always goes to stdout there.
  if (config.out.empty() || config.command == "simulate") {
    std::cout << text;
  } else {
    std::ofstream out(config.out);
    if (!out) contrakt::fail(contrakt::ErrorKind::kInvalidInput, "cannot write " + config.out);
    out << text;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrakt: semi-measures, contraction certificates and trajectory checks"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* measure = app.add_subcommand("measure", "Semi-measure of a matrix");
  measure->add_option("--matrix", f.matrix, "Matrix JSON")->required();
  measure->add_option("--weight", f.weight, "Weight matrix R JSON");
  measure->add_option("-p,--norm", f.norm, "1, 2, inf or a number > 1");
  measure->add_flag("--oracle", f.oracle, "Also evaluate the one-sided limit oracle");
  add_common(measure, f);

  CLI::App* certify = app.add_subcommand("certify", "Sampled contraction certificate");
  certify->add_option("--system", f.system, "System JSON")->required();
  certify->add_option("--kind", f.kind, "semi, weak, doubly or sync");
  certify->add_option("-p,--norm", f.norm, "1, 2, inf or a number > 1");
  certify->add_option("--weight", f.weight, "Weight matrix R JSON");
  certify->add_option("--q", f.q, "Sync transform Q JSON");
  certify->add_option("--box", f.box, "Half width of the sampled cube");
  add_common(certify, f);

  CLI::App* simulate = app.add_subcommand("simulate", "Integrate a trajectory");
  simulate->add_option("--system", f.system, "System JSON")->required();
  simulate->add_option("--x0", f.x0, "Initial state JSON")->required();
  simulate->add_option("--t-final", f.t_final, "Final time");
  simulate->add_option("--tol", f.tol, "Relative tolerance");
  add_common(simulate, f);

  CLI::App* verify = app.add_subcommand("verify", "Trajectory-level checks");
  verify->add_option("--system", f.system, "System JSON")->required();
  verify->add_option("--kind", f.kind, "coppel, pairwise, rate, sync, lyapunov or dichotomy");
  verify->add_option("--x0", f.x0, "Initial state JSON (an array of states for dichotomy)");
  verify->add_option("--y0", f.y0, "Second initial state JSON");
  verify->add_option("--weight", f.weight, "Weight matrix R JSON");
  verify->add_option("-p,--norm", f.norm, "1, 2, inf or a number > 1");
  verify->add_option("--t-final", f.t_final, "Final time");
  verify->add_option("--tol", f.tol, "Relative tolerance");
  add_common(verify, f);

  CLI::App* sync = app.add_subcommand("sync", "Synchronization condition for a diffusive network");
  sync->add_option("--system", f.system, "diffusive_network system JSON")->required();
  sync->add_option("--q", f.q, "Transform Q JSON");
  sync->add_option("--x0", f.x0, "Initial state JSON; adds a simulation");
  sync->add_option("-p,--norm", f.norm, "1, 2, inf or a number > 1");
  sync->add_option("--box", f.box, "Half width of the sampled cube");
  sync->add_option("--t-final", f.t_final, "Final time");
  sync->add_option("--tol", f.tol, "Relative tolerance");
  add_common(sync, f);

  CLI::App* report = app.add_subcommand("report", "Certificate, trajectory and rate fit in one run");
  report->add_option("--system", f.system, "System JSON")->required();
  report->add_option("--x0", f.x0, "Initial state JSON")->required();
  report->add_option("--weight", f.weight, "Weight matrix R JSON");
  report->add_option("-p,--norm", f.norm, "1, 2, inf or a number > 1");
  report->add_option("--box", f.box, "Half width of the sampled cube");
  report->add_option("--t-final", f.t_final, "Final time");
  report->add_option("--tol", f.tol, "Relative tolerance");
  add_common(report, f);

  CLI::App* run = app.add_subcommand("run", "Run a config file");
  run->add_option("--config", f.config, "RunConfig JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return contrakt::cli::kExitInputError;
  }

  try {
    RunConfig config;
    if (run->parsed()) {
      config = contrakt::cli::parse_run_config(contrakt::cli::read_json_file(f.config));
    } else {
      config = from_flags(app.get_subcommands().front()->get_name(), f);
    }
    return execute(config);
  } catch (const contrakt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return contrakt::cli::kExitInputError;
}
