#include "shmm/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace shmm {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, int nrows, int ncols, const std::string& name) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != nrows)
    throw std::runtime_error(name + ": expected " + std::to_string(nrows) + " rows");
  Matrix m(nrows, ncols);
  for (int i = 0; i < nrows; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != ncols)
      throw std::runtime_error(name + ": expected " + std::to_string(ncols) + " columns");
    for (int j = 0; j < ncols; ++j) m(i, j) = row[j].get<double>();
  }
  return m;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

HmmModel make_model(int k, int d, std::initializer_list<double> t_rows,
                    std::initializer_list<double> o_rows,
                    std::initializer_list<double> pi) {
  HmmModel m;
  m.k = k;
  m.d = d;
  m.T.resize(k, k);
  auto it = t_rows.begin();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m.T(i, j) = *it++;
  m.O.resize(d, k);
  it = o_rows.begin();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) m.O(i, j) = *it++;
  m.pi.resize(k);
  it = pi.begin();
  for (int i = 0; i < k; ++i) m.pi[i] = *it++;
  return m;
}

}  // namespace

HmmModel load_model(const std::string& path) {
  const json j = load_json_file(path);
  HmmModel m;
  m.k = j.at("k").get<int>();
  m.d = j.at("d").get<int>();
  if (m.k < 1 || m.d < 1) throw std::runtime_error("model has non-positive dimensions");
  m.T = matrix_from_json(j.at("T"), m.k, m.k, "T");
  m.O = matrix_from_json(j.at("O"), m.d, m.k, "O");
  const auto& pi = j.at("pi");
  if (!pi.is_array() || static_cast<int>(pi.size()) != m.k)
    throw std::runtime_error("pi: expected length k");
  m.pi.resize(m.k);
  for (int i = 0; i < m.k; ++i) m.pi[i] = pi[i].get<double>();

  const auto report = validate_model(m);
  if (!report.ok())
    throw std::runtime_error("model file " + path + " invalid: " + report.to_string());
  return m;
}

void save_model(const HmmModel& model, const std::string& path) {
  json j;
  j["k"] = model.k;
  j["d"] = model.d;
  j["T"] = matrix_to_json(model.T);
  j["O"] = matrix_to_json(model.O);
  json pi = json::array();
  for (int i = 0; i < model.k; ++i) pi.push_back(model.pi[i]);
  j["pi"] = pi;
  write_json_file(j, path);
}

std::vector<std::string> builtin_model_names() {
  return {"k2d3", "k2d6", "k3d8", "k3d10"};
}

bool is_builtin_model(const std::string& name) {
  for (const auto& n : builtin_model_names())
    if (n == name) return true;
  return false;
}

HmmModel builtin_model(const std::string& name) {
  if (name == "k2d3") {
    return make_model(2, 3,
                      {9.0 / 10, 3.0 / 10,
                       1.0 / 10, 7.0 / 10},
                      {1.0 / 4, 8.0 / 10,
                       1.0 / 2, 1.0 / 10,
                       1.0 / 4, 1.0 / 10},
                      {4.0 / 5, 1.0 / 5});
  }
  if (name == "k2d6") {
    return make_model(2, 6,
                      {9.0 / 10, 1.0 / 20,
                       1.0 / 10, 19.0 / 20},
                      {1.0 / 6, 7.0 / 12,
                       1.0 / 6, 1.0 / 12,
                       1.0 / 6, 1.0 / 12,
                       1.0 / 6, 1.0 / 12,
                       1.0 / 6, 1.0 / 12,
                       1.0 / 6, 1.0 / 12},
                      {3.0 / 4, 1.0 / 4});
  }
  if (name == "k3d8") {
    return make_model(3, 8,
                      {8.0 / 10, 1.0 / 15, 1.0 / 8,
                       1.0 / 10, 13.0 / 15, 1.0 / 8,
                       1.0 / 10, 1.0 / 15, 3.0 / 4},
                      {3.0 / 10, 1.0 / 20, 1.0 / 50,
                       1.0 / 10, 13.0 / 20, 1.0 / 50,
                       1.0 / 10, 1.0 / 20, 22.0 / 50,
                       1.0 / 10, 1.0 / 20, 22.0 / 50,
                       1.0 / 10, 1.0 / 20, 1.0 / 50,
                       1.0 / 10, 1.0 / 20, 1.0 / 50,
                       1.0 / 10, 1.0 / 20, 1.0 / 50,
                       1.0 / 10, 1.0 / 20, 1.0 / 50},
                      {1.0 / 3, 1.0 / 3, 1.0 / 3});
  }
  if (name == "k3d10") {
    return make_model(3, 10,
                      {8.0 / 10, 1.0 / 15, 1.0 / 6,
                       1.0 / 10, 13.0 / 15, 1.0 / 6,
                       1.0 / 10, 1.0 / 15, 2.0 / 3},
                      {6.0 / 15, 1.0 / 20, 1.0 / 50,
                       1.0 / 15, 11.0 / 20, 1.0 / 50,
                       1.0 / 15, 1.0 / 20, 21.0 / 50,
                       1.0 / 15, 1.0 / 20, 21.0 / 50,
                       1.0 / 15, 1.0 / 20, 1.0 / 50,
                       1.0 / 15, 1.0 / 20, 1.0 / 50,
                       1.0 / 15, 1.0 / 20, 1.0 / 50,
                       1.0 / 15, 1.0 / 20, 1.0 / 50,
                       1.0 / 15, 1.0 / 20, 1.0 / 50,
                       1.0 / 15, 1.0 / 20, 1.0 / 50},
                      {1.0 / 3, 1.0 / 3, 1.0 / 3});
  }
  throw std::invalid_argument("unknown builtin model: " + name);
}

void save_triples(const TripleSet& triples, const std::string& path) {
  if (triples.mode != TripleMode::categorical)
    throw std::invalid_argument("save_triples: categorical triples only");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& t : triples.symbols)
    out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

TripleSet load_triples(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  TripleSet out;
  out.mode = TripleMode::categorical;
  out.d = d;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    int a, b, c;
    if (!(is >> a >> b >> c))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected three symbols");
    for (int s : {a, b, c})
      if (s < 1 || s > d)
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": symbol out of range 1.." +
                                 std::to_string(d));
    out.symbols.push_back({a - 1, b - 1, c - 1});
  }
  if (out.symbols.empty()) throw std::runtime_error(path + ": no triples");
  return out;
}

void save_reals(const RealSequence& values, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (double v : values) out << v << '\n';
}

RealSequence load_reals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  RealSequence out;
  double v;
  while (in >> v) out.push_back(v);
  if (out.empty()) throw std::runtime_error(path + ": no values");
  return out;
}

void save_symbols(const ObservationSequence& seq, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (int s : seq) out << s + 1 << '\n';
}

ObservationSequence load_symbols(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ObservationSequence out;
  int s;
  while (in >> s) {
    if (s < 1 || s > d)
      throw std::runtime_error(path + ": symbol out of range 1.." + std::to_string(d));
    out.push_back(s - 1);
  }
  if (out.empty()) throw std::runtime_error(path + ": no symbols");
  return out;
}

void save_binspec(const BinSpec& spec, const std::string& path) {
  json j;
  j["bins"] = spec.bins();
  j["bounds"] = spec.bounds;
  j["convention"] = spec.convention;
  write_json_file(j, path);
}

BinSpec load_binspec(const std::string& path) {
  const json j = load_json_file(path);
  BinSpec spec;
  spec.bounds = j.at("bounds").get<std::vector<double>>();
  spec.convention = j.at("convention").get<std::string>();
  return spec;
}

namespace {

void write_matrix_block(std::ofstream& out, const std::string& name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

Matrix read_matrix_block(std::ifstream& in, const std::string& expected) {
  std::string name;
  int rows, cols;
  if (!(in >> name >> rows >> cols) || name != expected)
    throw std::runtime_error("moment dump: expected block " + expected);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (!(in >> m(i, j))) throw std::runtime_error("moment dump: truncated " + expected);
  return m;
}

}  // namespace

void save_moments(const MomentSet& moments, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "moments d " << moments.d << " source "
      << (moments.analytic ? "analytic" : "empirical") << " N " << moments.sample_count
      << '\n';
  out << "P1 " << moments.d << '\n';
  for (int i = 0; i < moments.d; ++i) out << (i ? " " : "") << moments.P1[i];
  out << '\n';
  write_matrix_block(out, "P21", moments.P21);
  write_matrix_block(out, "P31", moments.P31);
  write_matrix_block(out, "P32", moments.P32);
  out << "P312 " << moments.d << ' ' << moments.d << ' ' << moments.d << '\n';
  for (int a = 0; a < moments.d; ++a) write_matrix_block(out, "slice", moments.P312[a]);
}

MomentSet load_moments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, dtag, srctag, ntag, source;
  MomentSet m;
  if (!(in >> tag >> dtag >> m.d >> srctag >> source >> ntag >> m.sample_count) ||
      tag != "moments")
    throw std::runtime_error("moment dump: bad header in " + path);
  m.analytic = source == "analytic";
  int p1_len;
  if (!(in >> tag >> p1_len) || tag != "P1")
    throw std::runtime_error("moment dump: expected block P1");
  m.P1.resize(p1_len);
  for (int i = 0; i < p1_len; ++i)
    if (!(in >> m.P1[i])) throw std::runtime_error("moment dump: truncated P1");
  m.P21 = read_matrix_block(in, "P21");
  m.P31 = read_matrix_block(in, "P31");
  m.P32 = read_matrix_block(in, "P32");
  int da, db, dc;
  if (!(in >> tag >> da >> db >> dc) || tag != "P312")
    throw std::runtime_error("moment dump: expected block P312");
  m.P312.resize(da);
  for (int a = 0; a < da; ++a) m.P312[a] = read_matrix_block(in, "slice");
  return m;
}

}  // namespace shmm

