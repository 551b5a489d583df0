#include "io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "contrakt/error.h"

namespace contrakt::cli {
namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::kInvalidInput, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(ErrorKind::kInvalidInput, "unknown key '" + key + "' in " + where);
  }
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) fail(ErrorKind::kInvalidInput, what + " must be a number");
  return j.get<double>();
}

Matrix rows_of(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::kInvalidInput, what + " must be a nonempty array of rows");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  Matrix m;
  for (int i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array()) fail(ErrorKind::kInvalidInput, what + " rows must be arrays");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<int>(row.size()) != cols) fail(ErrorKind::kDimensionMismatch, what + " rows differ in length");
    for (int c = 0; c < cols; ++c) m(i, c) = number(row[c], what + " entry");
  }
  return m;
}

template <typename T>
T param_or(const Json& params, const std::string& key, T fallback) {
  if (!params.contains(key)) return fallback;
  return params.at(key).get<T>();
}

Cost parse_cost(const Json& j) {
  reject_unknown(j, {"type", "a", "s"}, "cost");
  if (!j.contains("type") || !j.contains("a")) fail(ErrorKind::kInvalidInput, "cost needs 'type' and 'a'");
  const std::string type = j.at("type").get<std::string>();
  const Vector a = parse_vector(j.at("a"));
  if (type == "quadratic") return quadratic_cost(a, j.contains("s") ? number(j.at("s"), "s") : 1.0);
  if (j.contains("s")) fail(ErrorKind::kInvalidInput, "'s' only applies to quadratic costs");
  if (type == "quartic") return quartic_cost(a);
  if (type == "log_sum_exp") return log_sum_exp_cost(a);
  fail(ErrorKind::kUnknownName, "unknown cost type '" + type + "'");
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kInvalidInput, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidInput, path + ": " + e.what());
  }
}

CMatrix parse_matrix(const Json& j) {
  reject_unknown(j, {"re", "im"}, "matrix");
  if (!j.contains("re")) fail(ErrorKind::kInvalidInput, "matrix needs 're'");
  const Matrix re = rows_of(j.at("re"), "matrix 're'");
  CMatrix out = re.cast<Complex>();
  if (j.contains("im")) {
    const Matrix im = rows_of(j.at("im"), "matrix 'im'");
    if (im.rows() != re.rows() || im.cols() != re.cols()) {
      fail(ErrorKind::kDimensionMismatch, "matrix 're' and 'im' differ in shape");
    }
    out.imag() = im;
  }
  return out;
}

Matrix parse_real_matrix(const Json& j) {
  const CMatrix m = parse_matrix(j);
  if (!is_real(m)) fail(ErrorKind::kInvalidInput, "matrix must be real here");
  return m.real();
}

Vector parse_vector(const Json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::kInvalidInput, "vector must be a nonempty array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], "vector entry");
  return v;
}

std::vector<Vector> parse_vectors(const Json& j) {
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    std::vector<Vector> out;
    for (const Json& item : j) out.push_back(parse_vector(item));
    return out;
  }
  return {parse_vector(j)};
}

WeightedDigraph parse_graph(const Json& j) {
  reject_unknown(j, {"n", "directed", "edges"}, "graph");
  if (!j.contains("n") || !j.at("n").is_number_integer()) fail(ErrorKind::kInvalidGraph, "graph needs integer 'n'");
  const bool directed = j.contains("directed") ? j.at("directed").get<bool>() : false;
  std::vector<Edge> edges;
  if (j.contains("edges")) {
    for (const Json& e : j.at("edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer() ||
          !e[1].is_number_integer()) {
        fail(ErrorKind::kInvalidGraph, "edges must be [i, j] or [i, j, w] with integer indices");
      }
      edges.push_back({e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? number(e[2], "edge weight") : 1.0});
    }
  }
  return WeightedDigraph(j.at("n").get<int>(), edges, directed);
}

LoadedSystem parse_system(const Json& j) {
  reject_unknown(j, {"model", "graph", "params"}, "system");
  if (!j.contains("model")) fail(ErrorKind::kInvalidInput, "system needs 'model'");
  LoadedSystem out;
  out.model = j.at("model").get<std::string>();
  const Json params = j.contains("params") ? j.at("params") : Json::object();
  const std::string& m = out.model;
  auto need_graph = [&]() {
    if (!j.contains("graph")) fail(ErrorKind::kInvalidInput, "model '" + m + "' needs a graph");
    out.graph = parse_graph(j.at("graph"));
    return *out.graph;
  };
  auto no_graph = [&]() {
    if (j.contains("graph")) fail(ErrorKind::kInvalidInput, "model '" + m + "' takes no graph");
  };

  if (m == "affine_averaging" || m == "affine_flow") {
    reject_unknown(params, {"b"}, m + " params");
    const WeightedDigraph g = need_graph();
    const Vector b = params.contains("b") ? parse_vector(params.at("b")) : Vector(Vector::Zero(g.n()));
    out.system = m == "affine_averaging" ? affine_averaging(g, b) : affine_flow(g, b);
  } else if (m == "primal_dual") {
    reject_unknown(params, {"k", "costs"}, m + " params");
    const WeightedDigraph g = need_graph();
    if (!params.contains("costs") || !params.at("costs").is_array()) {
      fail(ErrorKind::kInvalidInput, "primal_dual needs a 'costs' array");
    }
    std::vector<Cost> costs;
    for (const Json& c : params.at("costs")) costs.push_back(parse_cost(c));
    out.system = primal_dual(g, costs, param_or<int>(params, "k", 1));
  } else if (m == "diffusive_network") {
    reject_unknown(params, {"internal"}, m + " params");
    const WeightedDigraph g = need_graph();
    if (!params.contains("internal")) fail(ErrorKind::kInvalidInput, "diffusive_network needs 'internal'");
    const LoadedSystem inner = parse_system(params.at("internal"));
    out.internal = inner.system;
    out.system = diffusive_network(g, inner.system);
  } else if (m == "linear") {
    reject_unknown(params, {"a"}, m + " params");
    no_graph();
    if (!params.contains("a")) fail(ErrorKind::kInvalidInput, "linear needs 'a'");
    out.system = linear_system(parse_real_matrix(params.at("a")));
  } else if (m == "hopf") {
    reject_unknown(params, {"sigma", "omega"}, m + " params");
    no_graph();
    out.system = hopf_oscillator(param_or<double>(params, "sigma", 1.0),
                                 param_or<double>(params, "omega", 1.0));
  } else if (m == "lotka_volterra") {
    reject_unknown(params, {"a", "r"}, m + " params");
    no_graph();
    if (!params.contains("a") || !params.contains("r")) fail(ErrorKind::kInvalidInput, "lotka_volterra needs 'a' and 'r'");
    out.lotka_volterra = lotka_volterra(parse_real_matrix(params.at("a")), parse_vector(params.at("r")));
    out.system = out.lotka_volterra->system;
  } else {
    reject_unknown(params, {}, m + " params");
    no_graph();
    out.system = toy_example(m);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const CMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array(), c = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  Json out = {{"re", re}};
  if (!is_real(m)) out["im"] = im;
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<double>& times,
               const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kInvalidInput, "cannot write " + path);
  out << "t";
  for (const std::string& h : header) out << ',' << h;
  out << '\n';
  for (std::size_t r = 0; r < times.size(); ++r) {
    out << format_double(times[r]);
    for (const auto& col : columns) out << ',' << format_double(col[r]);
    out << '\n';
  }
}

void write_gnuplot(const std::string& csv_path, int columns, bool log_y) {
  const std::size_t slash = csv_path.find_last_of('/');
  const std::string name = slash == std::string::npos ? csv_path : csv_path.substr(slash + 1);
  std::ofstream out(csv_path + ".gp");
  if (!out) fail(ErrorKind::kInvalidInput, "cannot write " + csv_path + ".gp");
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set xlabel 't'\n";
  if (log_y) out << "set logscale y\n";
  out << "plot for [i=2:" << columns + 1 << "] '" << name << "' using 1:i with lines\n";
}

}  // namespace contrakt::cli
