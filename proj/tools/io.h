#pragma once

#include <optional>
#include <string>
#include <vector>

#include "contrakt/graph.h"
#include "contrakt/linalg.h"
#include "contrakt/systems.h"
#include "json.hpp"

namespace contrakt::cli {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);

// {"re": [[...]], "im": [[...]]}, row-major.
CMatrix parse_matrix(const Json& j);
// Same, rejecting a nonzero imaginary part.
Matrix parse_real_matrix(const Json& j);
Vector parse_vector(const Json& j);
// A single vector or an array of vectors.
std::vector<Vector> parse_vectors(const Json& j);
// {"n": int, "directed": bool, "edges": [[i, j, w], ...]}
WeightedDigraph parse_graph(const Json& j);

struct LoadedSystem {
  std::string model;
  DynSystem system;
  std::optional<WeightedDigraph> graph;
  std::optional<DynSystem> internal;       // diffusive_network only
  std::optional<LotkaVolterra> lotka_volterra;
};

// {"model": name, "graph": {...}, "params": {...}}; unknown keys rejected.
LoadedSystem parse_system(const Json& j);

Json to_json(const Vector& v);
Json to_json(const CMatrix& m);

// Columns t, names...; one row per time. Doubles in %.17g.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<double>& times,
               const std::vector<std::vector<double>>& columns);
// gnuplot script next to the CSV, plotting every column against t.
void write_gnuplot(const std::string& csv_path, int columns, bool log_y);

std::string format_double(double v);

}  // namespace contrakt::cli
