#include "run_config.h"

#include <cmath>
#include <set>
#include <vector>

#include "contrakt/error.h"
#include "contrakt/measures.h"

namespace contrakt::cli {
namespace {

enum class Type { kNumber, kInteger, kBool, kString, kNumberOrAuto, kNorm };

struct ParamSpec {
  Type type;
  Json fallback;  // null: required
};

struct CommandSpec {
  std::map<std::string, bool> inputs;  // name -> required
  std::map<std::string, ParamSpec> params;
};

const Json kRequired = nullptr;

std::map<std::string, ParamSpec> sampler_params() {
  return {{"box", {Type::kNumber, 1.0}},
          {"grid", {Type::kInteger, 5}},
          {"random", {Type::kInteger, 200}}};
}

std::map<std::string, ParamSpec> weight_params() {
  return {{"weight_mode", {Type::kString, "auto"}}, {"epsilon", {Type::kNumber, 1e-4}}};
}

std::map<std::string, ParamSpec> fit_params() {
  return {{"t_final", {Type::kNumberOrAuto, "auto"}}, {"tol", {Type::kNumber, 1e-11}},
          {"samples", {Type::kInteger, 400}},          {"floor", {Type::kNumber, 1e-10}},
          {"envelope", {Type::kBool, true}},           {"rate_tolerance", {Type::kNumber, 0.05}}};
}

std::map<std::string, ParamSpec> merge(std::initializer_list<std::map<std::string, ParamSpec>> parts) {
  std::map<std::string, ParamSpec> out;
  for (const auto& p : parts) out.insert(p.begin(), p.end());
  return out;
}

const std::map<std::string, CommandSpec>& specs() {
  static const std::map<std::string, CommandSpec> table = {
      {"measure",
       {{{"matrix", true}, {"weight", false}},
        {{"p", {Type::kNorm, "2"}}, {"oracle", {Type::kBool, false}}}}},
      {"certify",
       {{{"system", true}, {"weight", false}, {"q", false}},
        merge({sampler_params(), weight_params(),
               {{"kind", {Type::kString, "semi"}}, {"p", {Type::kNorm, "2"}}}})}},
      {"simulate",
       {{{"system", true}, {"x0", true}},
        {{"t_final", {Type::kNumber, kRequired}},
         {"tol", {Type::kNumber, 1e-9}},
         {"samples", {Type::kInteger, 200}},
         {"log_uniform", {Type::kBool, false}}}}},
      {"verify",
       {{{"system", true}, {"x0", true}, {"y0", false}, {"weight", false}},
        merge({fit_params(), weight_params(),
               {{"kind", {Type::kString, kRequired}},
                {"p", {Type::kNorm, "2"}},
                {"c", {Type::kNumberOrAuto, "auto"}},
                {"metric", {Type::kString, "auto"}}}})}},
      {"sync",
       {{{"system", true}, {"q", false}, {"x0", false}},
        merge({sampler_params(), fit_params(), {{"p", {Type::kNorm, "2"}}}})}},
      {"report",
       {{{"system", true}, {"x0", true}, {"weight", false}},
        merge({sampler_params(), fit_params(), weight_params(),
               {{"p", {Type::kNorm, "2"}}, {"metric", {Type::kString, "auto"}}}})}},
  };
  return table;
}

const CommandSpec& spec_for(const std::string& command) {
  const auto it = specs().find(command);
  if (it == specs().end()) fail(ErrorKind::kInvalidInput, "unknown command '" + command + "'");
  return it->second;
}

Json normalize(const std::string& key, const ParamSpec& spec, const Json& v) {
  auto bad = [&](const char* what) -> Json {
    fail(ErrorKind::kInvalidInput, "param '" + key + "' must be " + what);
  };
  switch (spec.type) {
    case Type::kNumber:
      if (!v.is_number() || !std::isfinite(v.get<double>())) return bad("a finite number");
      return v.get<double>();
    case Type::kInteger:
      if (!v.is_number_integer()) return bad("an integer");
      return v;
    case Type::kBool:
      if (!v.is_boolean()) return bad("true or false");
      return v;
    case Type::kString:
      if (!v.is_string()) return bad("a string");
      return v;
    case Type::kNumberOrAuto:
      if (v.is_string() && v.get<std::string>() == "auto") return v;
      if (!v.is_number() || !std::isfinite(v.get<double>())) return bad("a number or \"auto\"");
      return v.get<double>();
    case Type::kNorm: {
      std::string text;
      if (v.is_string()) {
        text = v.get<std::string>();
      } else if (v.is_number()) {
        text = v.is_number_integer() ? std::to_string(v.get<long>()) : format_double(v.get<double>());
      } else {
        return bad("1, 2, inf or a number > 1");
      }
      return PNorm::parse(text).to_string();
    }
  }
  return v;
}

}  // namespace

Json parse_param_value(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    std::size_t used = 0;
    const long as_int = std::stol(text, &used);
    if (used == text.size()) return as_int;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double as_double = std::stod(text, &used);
    if (used == text.size()) return as_double;
  } catch (const std::exception&) {
  }
  return text;
}

RunConfig parse_run_config(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::kInvalidInput, "run config must be a JSON object");
  static const std::set<std::string> allowed = {"command", "inputs", "params", "seed", "out", "emit_gnuplot"};
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(ErrorKind::kInvalidInput, "unknown key '" + key + "' in run config");
  }
  RunConfig c;
  if (!j.contains("command") || !j.at("command").is_string()) {
    fail(ErrorKind::kInvalidInput, "run config needs a 'command' string");
  }
  c.command = j.at("command").get<std::string>();
  if (j.contains("inputs")) {
    if (!j.at("inputs").is_object()) fail(ErrorKind::kInvalidInput, "'inputs' must be an object");
    for (const auto& [key, value] : j.at("inputs").items()) {
      if (!value.is_string()) fail(ErrorKind::kInvalidInput, "input '" + key + "' must be a path string");
      c.inputs[key] = value.get<std::string>();
    }
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) fail(ErrorKind::kInvalidInput, "'params' must be an object");
    for (const auto& [key, value] : j.at("params").items()) {
      if (value.is_object() || value.is_array()) {
        fail(ErrorKind::kInvalidInput, "param '" + key + "' must be a scalar");
      }
      c.params[key] = value;
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail(ErrorKind::kInvalidInput, "'seed' must be a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  if (j.contains("emit_gnuplot")) c.emit_gnuplot = j.at("emit_gnuplot").get<bool>();
  return c;
}

void resolve(RunConfig& config) {
  const CommandSpec& spec = spec_for(config.command);
  for (const auto& [name, path] : config.inputs) {
    if (!spec.inputs.count(name)) {
      fail(ErrorKind::kInvalidInput, "unknown input '" + name + "' for " + config.command);
    }
  }
  for (const auto& [name, required] : spec.inputs) {
    if (required && !config.inputs.count(name)) {
      fail(ErrorKind::kInvalidInput, config.command + " needs input '" + name + "'");
    }
  }
  Json resolved = Json::object();
  for (const auto& [key, value] : config.params.items()) {
    const auto it = spec.params.find(key);
    if (it == spec.params.end()) {
      fail(ErrorKind::kInvalidInput, "unknown param '" + key + "' for " + config.command);
    }
    resolved[key] = normalize(key, it->second, value);
  }
  for (const auto& [key, p] : spec.params) {
    if (resolved.contains(key)) continue;
    if (p.fallback.is_null()) fail(ErrorKind::kInvalidInput, config.command + " needs param '" + key + "'");
    resolved[key] = p.fallback;
  }
  config.params = resolved;
}

Json manifest(const RunConfig& c) {
  Json inputs = Json::object();
  for (const auto& [k, v] : c.inputs) inputs[k] = v;
  return {{"tool", "contrakt"},
          {"command", c.command},
          {"inputs", inputs},
          {"params", c.params},
          {"seed", c.seed},
          {"out", c.out},
          {"emit_gnuplot", c.emit_gnuplot}};
}

double param_number(const RunConfig& c, const std::string& key) { return c.params.at(key).get<double>(); }
int param_int(const RunConfig& c, const std::string& key) { return c.params.at(key).get<int>(); }
bool param_bool(const RunConfig& c, const std::string& key) { return c.params.at(key).get<bool>(); }
std::string param_string(const RunConfig& c, const std::string& key) {
  return c.params.at(key).get<std::string>();
}
bool param_is_auto(const RunConfig& c, const std::string& key) {
  const Json& v = c.params.at(key);
  return v.is_string() && v.get<std::string>() == "auto";
}

}  // namespace contrakt::cli
