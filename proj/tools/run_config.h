#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "io.h"

namespace contrakt::cli {

struct RunConfig {
  std::string command;
  std::map<std::string, std::string> inputs;  // name -> file path
  Json params = Json::object();               // flat key -> scalar
  std::uint64_t seed = 0;
  std::string out;
  bool emit_gnuplot = false;
};

// {"command", "inputs", "params", "seed", "out", "emit_gnuplot"}.
RunConfig parse_run_config(const Json& j);

// "true"/"false", then a number, else the string itself.
Json parse_param_value(const std::string& text);

// Fills defaults, rejects unknown inputs and params, checks required ones
// and value types. Throws InvalidInput.
void resolve(RunConfig& config);

Json manifest(const RunConfig& config);

// Typed access to resolved params.
double param_number(const RunConfig& c, const std::string& key);
int param_int(const RunConfig& c, const std::string& key);
bool param_bool(const RunConfig& c, const std::string& key);
std::string param_string(const RunConfig& c, const std::string& key);
bool param_is_auto(const RunConfig& c, const std::string& key);

}  // namespace contrakt::cli
