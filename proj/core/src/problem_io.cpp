#include "jumplq/problem_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "jumplq/errors.hpp"

namespace jumplq {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(fmt::format("{}: {}", path.empty() ? "<root>" : path, what));
}

const json& field(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "expected object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected non-negative integer");
  const auto x = v.get<long long>();
  if (x < 0) fail(path, "expected non-negative integer");
  return static_cast<std::size_t>(x);
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected array");
  return v;
}

Matrix matrix(const json& v, const std::string& path, std::size_t rows, std::size_t cols) {
  const auto R = static_cast<Eigen::Index>(rows), C = static_cast<Eigen::Index>(cols);
  if (v.is_number() && rows == 1 && cols == 1) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.size() != rows) fail(path, fmt::format("expected {}x{} matrix", rows, cols));
  Matrix a(R, C);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row_path = index(path, i);
    const json& row = v[i];
    if (!row.is_array() || row.size() != cols) fail(row_path, fmt::format("expected {} numbers", cols));
    for (std::size_t j = 0; j < cols; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(row[j], index(row_path, j));
    }
  }
  return a;
}

Vector vector(const json& v, const std::string& path, std::size_t n) {
  if (!v.is_array() || v.size() != n) fail(path, fmt::format("expected {} numbers", n));
  Vector x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = number(v[i], index(path, i));
  return x;
}

std::vector<Matrix> matrix_list(const json& slice, const std::string& path, const char* key,
                                std::size_t len, std::size_t rows, std::size_t cols) {
  const auto it = slice.find(key);
  if (it == slice.end()) {
    return std::vector<Matrix>(len, Matrix::Zero(static_cast<Eigen::Index>(rows),
                                                 static_cast<Eigen::Index>(cols)));
  }
  const auto p = join(path, key);
  if (!it->is_array() || it->size() != len) fail(p, fmt::format("expected list of {} matrices", len));
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(matrix((*it)[i], index(p, i), rows, cols));
  return out;
}

CoefficientSlice slice(const json& v, const std::string& path, const LqProblem& p) {
  if (!v.is_object()) fail(path, "expected object");
  CoefficientSlice s;
  s.A = matrix(field(v, path, "A"), join(path, "A"), p.n, p.n);
  s.B = matrix(field(v, path, "B"), join(path, "B"), p.n, p.m);
  s.C = matrix_list(v, path, "C", p.d, p.n, p.n);
  s.D = matrix_list(v, path, "D", p.d, p.n, p.m);
  s.E = matrix_list(v, path, "E", p.marks.size(), p.n, p.n);
  s.F = matrix_list(v, path, "F", p.marks.size(), p.n, p.m);
  s.Q = SymMat(matrix(field(v, path, "Q"), join(path, "Q"), p.n, p.n));
  s.N = SymMat(matrix(field(v, path, "N"), join(path, "N"), p.m, p.m));
  return s;
}

SliceTable table(const json& slices, const std::string& path, const std::vector<double>& grid,
                 const LqProblem& p) {
  array(slices, path);
  SliceTable t{grid, {}};
  for (std::size_t j = 0; j < slices.size(); ++j) t.slices.push_back(slice(slices[j], index(path, j), p));
  return t;
}

json to_json(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const std::vector<Matrix>& list) {
  json out = json::array();
  for (const auto& a : list) out.push_back(to_json(a));
  return out;
}

json to_json(const CoefficientSlice& s) {
  return json{{"A", to_json(s.A)}, {"B", to_json(s.B)}, {"C", to_json(s.C)},
              {"D", to_json(s.D)}, {"E", to_json(s.E)}, {"F", to_json(s.F)},
              {"Q", to_json(s.Q.matrix())}, {"N", to_json(s.N.matrix())}};
}

json to_json(const SliceTable& t) {
  json out = json::array();
  for (const auto& s : t.slices) out.push_back(to_json(s));
  return out;
}

}  // namespace

LqProblem parse_problem(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("<root>: invalid JSON ({})", e.what()));
  }
  LqProblem p;
  p.n = count(field(doc, "", "n"), "n");
  p.m = count(field(doc, "", "m"), "m");
  p.d = count(field(doc, "", "d"), "d");
  p.T = number(field(doc, "", "T"), "T");
  p.x0 = vector(field(doc, "", "x0"), "x0", p.n);
  if (doc.contains("delta")) p.delta = number(doc["delta"], "delta");
  if (doc.contains("r0")) p.r0 = count(doc["r0"], "r0");
  const json& marks = array(field(doc, "", "marks"), "marks");
  for (std::size_t k = 0; k < marks.size(); ++k) {
    const auto mp = index("marks", k);
    const json& label = field(marks[k], mp, "label");
    if (!label.is_string()) fail(mp + ".label", "expected string");
    p.marks.labels.push_back(label.get<std::string>());
    p.marks.weights.push_back(number(field(marks[k], mp, "weight"), mp + ".weight"));
  }
  p.M = SymMat(matrix(field(doc, "", "M"), "M", p.n, p.n));

  const json& env = field(doc, "", "env");
  const json& type = field(env, "env", "type");
  const json& grid_json = array(field(env, "env", "grid"), "env.grid");
  std::vector<double> grid;
  for (std::size_t i = 0; i < grid_json.size(); ++i) grid.push_back(number(grid_json[i], index("env.grid", i)));

  if (type == "deterministic") {
    p.env = DeterministicCoefficients{table(field(env, "env", "slices"), "env.slices", grid, p)};
  } else if (type == "regime") {
    const json& regimes = array(field(env, "env", "regimes"), "env.regimes");
    RegimeCoefficients rc;
    for (std::size_t r = 0; r < regimes.size(); ++r) {
      rc.regimes.push_back(table(regimes[r], index("env.regimes", r), grid, p));
    }
    const json& jm = array(field(env, "env", "jump_map"), "env.jump_map");
    for (std::size_t r = 0; r < jm.size(); ++r) {
      const auto rp = index("env.jump_map", r);
      array(jm[r], rp);
      std::vector<std::size_t> row;
      for (std::size_t k = 0; k < jm[r].size(); ++k) row.push_back(count(jm[r][k], index(rp, k)));
      rc.jump_map.push_back(std::move(row));
    }
    p.env = std::move(rc);
  } else {
    fail("env.type", "expected \"deterministic\" or \"regime\"");
  }
  return p;
}

LqProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("<file>: cannot open {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string problem_to_json(const LqProblem& p) {
  json doc;
  doc["n"] = p.n;
  doc["m"] = p.m;
  doc["d"] = p.d;
  doc["T"] = p.T;
  doc["x0"] = std::vector<double>(p.x0.data(), p.x0.data() + p.x0.size());
  doc["delta"] = p.delta;
  doc["r0"] = p.r0;
  json marks = json::array();
  for (std::size_t k = 0; k < p.marks.size(); ++k) {
    marks.push_back({{"label", p.marks.labels[k]}, {"weight", p.marks.weights[k]}});
  }
  doc["marks"] = std::move(marks);
  doc["M"] = to_json(p.M.matrix());
  json env;
  env["grid"] = p.table_grid();
  if (const auto* det = std::get_if<DeterministicCoefficients>(&p.env)) {
    env["type"] = "deterministic";
    env["slices"] = to_json(det->table);
  } else {
    const auto& rc = std::get<RegimeCoefficients>(p.env);
    env["type"] = "regime";
    json regimes = json::array();
    for (const auto& t : rc.regimes) regimes.push_back(to_json(t));
    env["regimes"] = std::move(regimes);
    env["jump_map"] = rc.jump_map;
  }
  doc["env"] = std::move(env);
  return doc.dump(2) + "\n";
}

void save_problem(const std::filesystem::path& path, const LqProblem& p) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << problem_to_json(p);
}

}  // namespace jumplq
