// Scenario configuration, execution and trajectory I/O.
//
// A scenario is a JSON document naming a harmonic Hamiltonian (AC Stark,
// Raman or explicit matrices), a time grid and an initial state. Running it
// propagates the exact von Neumann dynamics and the averaged effective
// dynamics on the same grid and summarizes how they compare.
//
// Trajectory CSV layout (header row, one row per grid point, LF endings,
// values printed with 17 significant digits):
//
//   t, re_rho_i_j, im_rho_i_j (i <= j, 1-based),
//   Bloch components (bloch_x, bloch_y, bloch_z for d = 2;
//                     r_x, r_y, r_z, r_w, r_xa, r_ya, r_xb, r_yb for d = 3),
//   purity, min_eig
//
// Groups not listed in the config's "outputs" are omitted. For AC Stark the
// time column (and every frequency in the report) is in units of 1/Delta.

#pragma once

#include "timeavg/averaging.hpp"
#include "timeavg/gellmann.hpp"
#include "timeavg/hamiltonian.hpp"
#include "timeavg/harmonic.hpp"
#include "timeavg/linalg.hpp"
#include "timeavg/propagate.hpp"
#include "timeavg/raman.hpp"
#include "timeavg/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace timeavg {

using json = nlohmann::json;

class ScenarioError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { ac_stark, raman, custom_harmonic };

inline std::string to_string(ScenarioKind k) {
  switch (k) {
  case ScenarioKind::ac_stark:
    return "ac_stark";
  case ScenarioKind::raman:
    return "raman";
  case ScenarioKind::custom_harmonic:
    return "custom_harmonic";
  }
  return "unknown";
}

inline const std::vector<std::string> &all_output_groups() {
  static const std::vector<std::string> groups{"rho", "bloch", "purity", "min_eig"};
  return groups;
}

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::ac_stark;
  std::string name;

  // AC Stark: Omega = b * Delta.
  double b = 0.0;
  double delta = 1.0;
  RamanParams raman;
  std::optional<HarmonicHamiltonian> custom;

  // Grid and cutoff in scenario time units (1/Delta for AC Stark).
  double t0 = 0.0;
  double t_max = 0.0;
  double dt = 0.0;
  std::optional<double> cutoff;

  Operator initial_state;
  std::vector<std::string> outputs = all_output_groups();

  /// Physical time per scenario time unit.
  double time_unit() const { return kind == ScenarioKind::ac_stark ? 1.0 / delta : 1.0; }

  HarmonicHamiltonian hamiltonian() const {
    switch (kind) {
    case ScenarioKind::ac_stark:
      return ac_stark_hamiltonian(b * delta, delta);
    case ScenarioKind::raman:
      return raman.hamiltonian();
    case ScenarioKind::custom_harmonic:
      return *custom;
    }
    throw std::logic_error("unknown scenario kind");
  }

  /// Grid in physical time.
  TimeGrid grid() const { return TimeGrid(t0 * time_unit(), t_max * time_unit(), dt * time_unit()); }

  /// Averaging filter in physical frequency units.
  AveragingFilter filter() const {
    if (cutoff)
      return AveragingFilter(*cutoff / time_unit());
    return hamiltonian().default_filter();
  }

  bool wants(const std::string &group) const {
    return std::find(outputs.begin(), outputs.end(), group) != outputs.end();
  }
};

// --------------------------------------------------------------------------
// JSON helpers
// --------------------------------------------------------------------------

namespace detail {

inline std::string line_col(const std::string &text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class Problems {
public:
  void add(std::string msg) { list_.push_back(std::move(msg)); }
  bool empty() const { return list_.empty(); }
  [[noreturn]] void raise(const std::string &context) const {
    std::string msg = context + ":";
    for (const auto &p : list_)
      msg += "\n  - " + p;
    throw ValidationError(msg);
  }

private:
  std::vector<std::string> list_;
};

inline void reject_unknown_keys(const json &obj, const std::set<std::string> &allowed, const std::string &where,
                                Problems &problems) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      problems.add("unknown key '" + it.key() + "' in " + where);
}

inline std::optional<double> get_number(const json &obj, const std::string &key, Problems &problems,
                                        bool required) {
  if (!obj.contains(key)) {
    if (required)
      problems.add("missing required key '" + key + "'");
    return std::nullopt;
  }
  const json &v = obj.at(key);
  if (!v.is_number()) {
    problems.add("key '" + key + "' must be a number");
    return std::nullopt;
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    problems.add("key '" + key + "' must be finite");
    return std::nullopt;
  }
  return x;
}

inline Eigen::MatrixXd real_matrix(const json &j, const std::string &key) {
  if (!j.is_array() || j.empty())
    throw ValidationError("'" + key + "' must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json &row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array())
      throw ValidationError("'" + key + "' row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError("'" + key + "' rows have unequal lengths");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json &v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number())
        throw ValidationError("'" + key + "' entry (" + std::to_string(i) + "," + std::to_string(c) +
                              ") is not a number");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

/// A matrix is either [[...]] (real) or {"re": [[...]], "im": [[...]]}.
inline Operator complex_matrix(const json &j, const std::string &key) {
  if (j.is_array())
    return real_matrix(j, key).cast<Complex>();
  if (!j.is_object() || !j.contains("re"))
    throw ValidationError("'" + key + "' must be a matrix or an object with 're' (and optional 'im')");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "re" && it.key() != "im")
      throw ValidationError("unknown key '" + it.key() + "' in matrix '" + key + "'");
  const Eigen::MatrixXd re = real_matrix(j.at("re"), key + ".re");
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = real_matrix(j.at("im"), key + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols())
      throw ValidationError("'" + key + "': re and im shapes differ");
  }
  Operator m(re.rows(), re.cols());
  for (Eigen::Index i = 0; i < re.rows(); ++i)
    for (Eigen::Index c = 0; c < re.cols(); ++c)
      m(i, c) = Complex(re(i, c), im(i, c));
  return m;
}

inline Vector complex_vector(const json &j, const std::string &key) {
  auto read = [&key](const json &arr, const std::string &part) {
    if (!arr.is_array() || arr.empty())
      throw ValidationError("'" + key + part + "' must be a non-empty array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number())
        throw ValidationError("'" + key + part + "' entry " + std::to_string(i) + " is not a number");
      v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
  };
  if (j.is_array())
    return read(j, "").cast<Complex>();
  if (!j.is_object() || !j.contains("re"))
    throw ValidationError("'" + key + "' must be an array or an object with 're' (and optional 'im')");
  const Eigen::VectorXd re = read(j.at("re"), ".re");
  Eigen::VectorXd im = Eigen::VectorXd::Zero(re.size());
  if (j.contains("im")) {
    im = read(j.at("im"), ".im");
    if (im.size() != re.size())
      throw ValidationError("'" + key + "': re and im lengths differ");
  }
  Vector v(re.size());
  for (Eigen::Index i = 0; i < re.size(); ++i)
    v(i) = Complex(re(i), im(i));
  return v;
}

/// Equal superposition of levels 1 and 2 (|1> alone when d = 1).
inline Operator plus_state(Eigen::Index dim) {
  Vector psi = Vector::Zero(dim);
  psi(0) = 1.0;
  if (dim > 1)
    psi(1) = 1.0;
  psi.normalize();
  return psi * psi.adjoint();
}

inline Operator initial_state_from_json(const json &j, Eigen::Index dim) {
  if (j.is_string()) {
    const std::string preset = j.get<std::string>();
    if (preset == "plus")
      return plus_state(dim);
    if (preset == "ground")
      return ket_bra(dim, 0, 0);
    if (preset == "maximally_mixed")
      return Operator::Identity(dim, dim) / static_cast<double>(dim);
    throw ValidationError("unknown initial_state preset '" + preset + "' (plus, ground, maximally_mixed)");
  }
  if (!j.is_object() || j.size() != 1)
    throw ValidationError("initial_state must be a preset name, {\"matrix\": ...} or {\"pure\": ...}");
  if (j.contains("matrix"))
    return complex_matrix(j.at("matrix"), "initial_state.matrix");
  if (j.contains("pure")) {
    const Vector psi = complex_vector(j.at("pure"), "initial_state.pure");
    if (psi.norm() == 0.0)
      throw ValidationError("initial_state.pure has zero norm");
    const Vector v = psi.normalized();
    return v * v.adjoint();
  }
  throw ValidationError("initial_state object needs a 'matrix' or 'pure' key");
}

inline json matrix_to_json(const Operator &m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(i, c).real());
      ii.push_back(m(i, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"re", re}, {"im", im}};
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

} // namespace detail

/// Builds a validated config from parsed JSON. Every violated constraint is
/// reported in one ValidationError.
inline ScenarioConfig scenario_from_json(const json &doc) {
  detail::Problems problems;
  if (!doc.is_object())
    throw ValidationError("scenario must be a JSON object");

  ScenarioConfig cfg;
  if (!doc.contains("kind") || !doc.at("kind").is_string())
    throw ValidationError("scenario needs a string 'kind' (ac_stark, raman, custom_harmonic)");
  const std::string kind = doc.at("kind").get<std::string>();

  std::set<std::string> allowed{"kind", "name", "t0", "t_max", "dt", "initial_state", "cutoff", "outputs"};
  if (kind == "ac_stark") {
    cfg.kind = ScenarioKind::ac_stark;
    allowed.insert({"b", "delta"});
  } else if (kind == "raman") {
    cfg.kind = ScenarioKind::raman;
    allowed.insert({"Omega1", "Omega2", "omega1", "omega2"});
  } else if (kind == "custom_harmonic") {
    cfg.kind = ScenarioKind::custom_harmonic;
    allowed.insert({"H0", "terms"});
  } else {
    throw ValidationError("unknown scenario kind '" + kind + "'");
  }
  detail::reject_unknown_keys(doc, allowed, "scenario", problems);

  if (doc.contains("name")) {
    if (doc.at("name").is_string())
      cfg.name = doc.at("name").get<std::string>();
    else
      problems.add("key 'name' must be a string");
  }

  bool have_hamiltonian = true;
  switch (cfg.kind) {
  case ScenarioKind::ac_stark: {
    const auto b = detail::get_number(doc, "b", problems, true);
    const auto delta = detail::get_number(doc, "delta", problems, false);
    if (b && !(*b > 0.0))
      problems.add("b must be positive");
    if (delta && !(*delta > 0.0))
      problems.add("delta must be positive");
    cfg.b = b.value_or(0.0);
    cfg.delta = delta.value_or(1.0);
    have_hamiltonian = b && *b > 0.0 && cfg.delta > 0.0;
    break;
  }
  case ScenarioKind::raman: {
    const auto r1 = detail::get_number(doc, "Omega1", problems, true);
    const auto r2 = detail::get_number(doc, "Omega2", problems, true);
    const auto w1 = detail::get_number(doc, "omega1", problems, true);
    const auto w2 = detail::get_number(doc, "omega2", problems, true);
    if (r1 && *r1 < 0.0)
      problems.add("Omega1 must be non-negative");
    if (r2 && *r2 < 0.0)
      problems.add("Omega2 must be non-negative");
    if (w1 && !(*w1 > 0.0))
      problems.add("omega1 must be positive");
    if (w2 && !(*w2 > 0.0))
      problems.add("omega2 must be positive");
    cfg.raman = {r1.value_or(0.0), r2.value_or(0.0), w1.value_or(1.0), w2.value_or(1.0)};
    have_hamiltonian = r1 && r2 && w1 && w2 && *w1 > 0.0 && *w2 > 0.0;
    break;
  }
  case ScenarioKind::custom_harmonic: {
    try {
      if (!doc.contains("H0"))
        throw ValidationError("missing required key 'H0'");
      Operator h0 = detail::complex_matrix(doc.at("H0"), "H0");
      std::vector<HarmonicTerm> terms;
      if (doc.contains("terms")) {
        const json &arr = doc.at("terms");
        if (!arr.is_array())
          throw ValidationError("'terms' must be an array");
        for (std::size_t n = 0; n < arr.size(); ++n) {
          const json &t = arr[n];
          const std::string where = "terms[" + std::to_string(n) + "]";
          if (!t.is_object() || !t.contains("h") || !t.contains("omega"))
            throw ValidationError(where + " needs 'h' and 'omega'");
          for (auto it = t.begin(); it != t.end(); ++it)
            if (it.key() != "h" && it.key() != "omega")
              throw ValidationError("unknown key '" + it.key() + "' in " + where);
          if (!t.at("omega").is_number())
            throw ValidationError(where + ".omega must be a number");
          terms.push_back({detail::complex_matrix(t.at("h"), where + ".h"), t.at("omega").get<double>()});
        }
      }
      cfg.custom.emplace(std::move(h0), std::move(terms));
    } catch (const std::invalid_argument &e) {
      problems.add(e.what());
      have_hamiltonian = false;
    }
    break;
  }
  }

  const auto t0 = detail::get_number(doc, "t0", problems, false);
  const auto t_max = detail::get_number(doc, "t_max", problems, true);
  const auto dt = detail::get_number(doc, "dt", problems, false);
  cfg.t0 = t0.value_or(0.0);
  cfg.t_max = t_max.value_or(0.0);
  if (t_max && !(cfg.t_max > cfg.t0))
    problems.add("t_max must exceed t0");
  if (dt) {
    if (!(*dt > 0.0))
      problems.add("dt must be positive");
    cfg.dt = *dt;
  } else if (have_hamiltonian) {
    cfg.dt = default_step(cfg.hamiltonian()) / cfg.time_unit();
  }
  if (t_max && cfg.dt > 0.0 && cfg.t_max > cfg.t0 && (cfg.t_max - cfg.t0) / cfg.dt > TimeGrid::kMaxSteps)
    problems.add("grid has more than 1e7 steps");

  if (doc.contains("cutoff")) {
    const auto c = detail::get_number(doc, "cutoff", problems, false);
    if (c && !(*c > 0.0))
      problems.add("cutoff must be positive");
    else if (c)
      cfg.cutoff = *c;
  }

  if (doc.contains("outputs")) {
    const json &o = doc.at("outputs");
    if (!o.is_array()) {
      problems.add("'outputs' must be an array of strings");
    } else {
      cfg.outputs.clear();
      for (const auto &g : o) {
        const auto &groups = all_output_groups();
        if (!g.is_string() || std::find(groups.begin(), groups.end(), g.get<std::string>()) == groups.end())
          problems.add("unknown output group " + g.dump() + " (rho, bloch, purity, min_eig)");
        else
          cfg.outputs.push_back(g.get<std::string>());
      }
    }
  }

  if (have_hamiltonian) {
    const Eigen::Index dim = cfg.hamiltonian().dim();
    try {
      cfg.initial_state = doc.contains("initial_state") ? detail::initial_state_from_json(doc.at("initial_state"), dim)
                                                        : detail::plus_state(dim);
      if (cfg.initial_state.rows() != dim || cfg.initial_state.cols() != dim) {
        problems.add("initial_state has dimension " + std::to_string(cfg.initial_state.rows()) +
                     ", Hamiltonian has " + std::to_string(dim));
      } else {
        const DensityReport r = validate_density(cfg.initial_state);
        if (!r.ok())
          problems.add("initial_state is not a density matrix: " + r.failures());
      }
    } catch (const ValidationError &e) {
      problems.add(e.what());
    }
  }

  if (!problems.empty())
    problems.raise("invalid scenario");
  return cfg;
}

inline ScenarioConfig parse_scenario(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ValidationError("scenario is not valid JSON at " + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) +
                          ": " + e.what());
  }
  return scenario_from_json(doc);
}

inline ScenarioConfig load_scenario(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ValidationError &e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// --------------------------------------------------------------------------
// Trajectory tables and CSV
// --------------------------------------------------------------------------

struct TrajectoryTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string &name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
      throw ScenarioError("no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }

  bool has_column(const std::string &name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  }

  std::vector<double> column(const std::string &name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto &r : rows)
      out.push_back(r[c]);
    return out;
  }
};

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_csv(const TrajectoryTable &table, std::ostream &out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << '\n';
  std::string line;
  for (const auto &row : table.rows) {
    line.clear();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c)
        line += ',';
      line += format_double(row[c]);
    }
    line += '\n';
    out << line;
  }
}

inline void emit_csv(const TrajectoryTable &table, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ScenarioError("cannot write '" + path + "'");
  write_csv(table, out);
  if (!out)
    throw ScenarioError("write to '" + path + "' failed");
}

inline TrajectoryTable read_csv(std::istream &in, const std::string &source = "<stream>") {
  TrajectoryTable table;
  std::string line;
  if (!std::getline(in, line))
    throw ScenarioError(source + ": empty CSV");
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ','))
      table.columns.push_back(col);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::vector<double> row;
    row.reserve(table.columns.size());
    const char *p = line.c_str();
    while (true) {
      char *end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p)
        throw ScenarioError(source + ": bad number on line " + std::to_string(lineno));
      row.push_back(v);
      if (*end == '\0')
        break;
      if (*end != ',')
        throw ScenarioError(source + ": bad separator on line " + std::to_string(lineno));
      p = end + 1;
    }
    if (row.size() != table.columns.size())
      throw ScenarioError(source + ": line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                          " fields, header has " + std::to_string(table.columns.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline TrajectoryTable read_csv(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ScenarioError("cannot open '" + path + "'");
  return read_csv(in, path);
}

/// Collects trajectory rows as the propagator produces them.
class TrajectoryRecorder {
public:
  TrajectoryRecorder(Eigen::Index dim, const ScenarioConfig &cfg) : dim_(dim), time_unit_(cfg.time_unit()) {
    rho_ = cfg.wants("rho");
    bloch_ = cfg.wants("bloch") && (dim == 2 || dim == 3);
    purity_ = cfg.wants("purity");
    min_eig_ = cfg.wants("min_eig");
    table_.columns.push_back("t");
    if (rho_)
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = i; j < dim; ++j) {
          const std::string ij = std::to_string(i + 1) + "_" + std::to_string(j + 1);
          table_.columns.push_back("re_rho_" + ij);
          table_.columns.push_back("im_rho_" + ij);
        }
    if (bloch_ && dim == 2)
      table_.columns.insert(table_.columns.end(), {"bloch_x", "bloch_y", "bloch_z"});
    if (bloch_ && dim == 3)
      table_.columns.insert(table_.columns.end(), {"r_x", "r_y", "r_z", "r_w", "r_xa", "r_ya", "r_xb", "r_yb"});
    if (purity_)
      table_.columns.push_back("purity");
    if (min_eig_)
      table_.columns.push_back("min_eig");
  }

  void operator()(const Operator &rho, const StepMonitor &m) {
    std::vector<double> row;
    row.reserve(table_.columns.size());
    row.push_back(m.time / time_unit_);
    if (rho_)
      for (Eigen::Index i = 0; i < dim_; ++i)
        for (Eigen::Index j = i; j < dim_; ++j) {
          row.push_back(rho(i, j).real());
          row.push_back(rho(i, j).imag());
        }
    if (bloch_ && dim_ == 2) {
      row.push_back(2.0 * rho(0, 1).real());
      row.push_back(-2.0 * rho(0, 1).imag());
      row.push_back((rho(0, 0) - rho(1, 1)).real());
    }
    if (bloch_ && dim_ == 3)
      for (double r : bloch_decompose(rho))
        row.push_back(r);
    if (purity_)
      row.push_back(m.purity);
    if (min_eig_)
      row.push_back(m.min_eigenvalue);
    table_.rows.push_back(std::move(row));
    purity_first_ = std::isnan(purity_first_) ? m.purity : purity_first_;
    purity_drift_ = std::max(purity_drift_, std::abs(m.purity - purity_first_));
    coherence_.push_back(dim_ > 1 ? rho(0, 1).real() : 0.0);
  }

  const TrajectoryTable &table() const { return table_; }
  TrajectoryTable release() { return std::move(table_); }
  double purity_drift() const { return purity_drift_; }
  /// Re rho_12 at every grid point.
  const std::vector<double> &coherence() const { return coherence_; }

private:
  Eigen::Index dim_;
  double time_unit_;
  bool rho_ = false, bloch_ = false, purity_ = false, min_eig_ = false;
  TrajectoryTable table_;
  double purity_first_ = std::numeric_limits<double>::quiet_NaN();
  double purity_drift_ = 0.0;
  std::vector<double> coherence_;
};

// --------------------------------------------------------------------------
// Comparison
// --------------------------------------------------------------------------

struct ComparisonMetrics {
  double frequency_a = std::numeric_limits<double>::quiet_NaN();
  double frequency_b = std::numeric_limits<double>::quiet_NaN();
  double frequency_difference = std::numeric_limits<double>::quiet_NaN();
  double frequency_resolution = std::numeric_limits<double>::quiet_NaN();
  double amplitude_a = 0.0;
  double amplitude_b = 0.0;
  /// amplitude_b / amplitude_a after filtering.
  double amplitude_ratio = 1.0;
  double max_deviation = 0.0;
};

inline double half_range(const std::vector<double> &x) {
  if (x.empty())
    return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return 0.5 * (*hi - *lo);
}

/// Compares two sampled signals on the same uniform grid. Both are passed
/// through the ideal low-pass at `cutoff` (rad per unit time) first, so the
/// comparison is between averaged quantities; identical inputs give zero
/// deviation and unit amplitude ratio.
inline ComparisonMetrics compare_signals(const std::vector<double> &a, const std::vector<double> &b, double dt,
                                         double cutoff) {
  if (a.size() != b.size())
    throw ScenarioError("compare: signals have different lengths");
  ComparisonMetrics m;
  const auto fa = std::isfinite(cutoff) ? lowpass_signal(a, dt, cutoff) : a;
  const auto fb = std::isfinite(cutoff) ? lowpass_signal(b, dt, cutoff) : b;
  m.amplitude_a = half_range(fa);
  m.amplitude_b = half_range(fb);
  m.amplitude_ratio = m.amplitude_a > 0.0 ? m.amplitude_b / m.amplitude_a
                                          : (m.amplitude_b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < fa.size(); ++i)
    m.max_deviation = std::max(m.max_deviation, std::abs(fa[i] - fb[i]));
  if (a.size() >= kMinSpectralSamples) {
    const SpectralOptions opts{Window::hann, cutoff};
    m.frequency_a = dominant_frequency(fa, dt, opts);
    m.frequency_b = dominant_frequency(fb, dt, opts);
    m.frequency_difference = std::abs(m.frequency_a - m.frequency_b);
    m.frequency_resolution = frequency_resolution(a.size(), dt);
  }
  return m;
}

inline ComparisonMetrics compare_trajectories(const TrajectoryTable &a, const TrajectoryTable &b, double cutoff,
                                              const std::string &column = "re_rho_1_2") {
  const auto ta = a.column("t");
  const auto tb = b.column("t");
  if (ta.size() != tb.size())
    throw ScenarioError("compare: grids differ in length (" + std::to_string(ta.size()) + " vs " +
                        std::to_string(tb.size()) + ")");
  for (std::size_t i = 0; i < ta.size(); ++i)
    if (std::abs(ta[i] - tb[i]) > 1e-9 * std::max(1.0, std::abs(ta[i])))
      throw ScenarioError("compare: grids differ at row " + std::to_string(i + 1));
  if (ta.size() < 2)
    throw ScenarioError("compare: need at least two rows");
  const double dt = (ta.back() - ta.front()) / static_cast<double>(ta.size() - 1);
  return compare_signals(a.column(column), b.column(column), dt, cutoff);
}

inline json to_json(const ComparisonMetrics &m) {
  using detail::number_or_null;
  return {{"frequency_a", number_or_null(m.frequency_a)},
          {"frequency_b", number_or_null(m.frequency_b)},
          {"frequency_difference", number_or_null(m.frequency_difference)},
          {"frequency_resolution", number_or_null(m.frequency_resolution)},
          {"amplitude_a", m.amplitude_a},
          {"amplitude_b", m.amplitude_b},
          {"amplitude_ratio", number_or_null(m.amplitude_ratio)},
          {"max_deviation", m.max_deviation}};
}

// --------------------------------------------------------------------------
// Running
// --------------------------------------------------------------------------

struct ScenarioReport {
  std::string kind;
  std::string name;
  std::size_t grid_points = 0;
  double validity_ratio = 0.0;
  bool validity_condition_met = true;
  /// Averaging cutoff in scenario frequency units.
  double cutoff = 0.0;
  double decoherence_norm = 0.0;
  double exact_purity_drift = 0.0;
  double effective_purity_drift = 0.0;
  double effective_min_eigenvalue = 0.0;
  std::size_t positivity_warnings = 0;
  std::size_t trace_renormalizations = 0;
  /// a = exact, b = effective, on Re rho_12.
  ComparisonMetrics comparison;
};

inline json to_json(const ScenarioReport &r) {
  using detail::number_or_null;
  return {{"kind", r.kind},
          {"name", r.name},
          {"grid_points", r.grid_points},
          {"validity_ratio", r.validity_ratio},
          {"validity_condition_met", r.validity_condition_met},
          {"cutoff", number_or_null(r.cutoff)},
          {"decoherence_norm", r.decoherence_norm},
          {"exact_purity_drift", r.exact_purity_drift},
          {"effective_purity_drift", r.effective_purity_drift},
          {"effective_min_eigenvalue", r.effective_min_eigenvalue},
          {"positivity_warnings", r.positivity_warnings},
          {"trace_renormalizations", r.trace_renormalizations},
          {"exact_frequency", number_or_null(r.comparison.frequency_a)},
          {"effective_frequency", number_or_null(r.comparison.frequency_b)},
          {"comparison", to_json(r.comparison)}};
}

struct ScenarioResult {
  TrajectoryTable exact;
  TrajectoryTable effective;
  ScenarioReport report;
};

inline ScenarioResult run_scenario(const ScenarioConfig &cfg) {
  const HarmonicHamiltonian h = cfg.hamiltonian();
  const EffectiveGenerator gen(h);
  const TimeGrid grid = cfg.grid();
  const DensityMatrix rho0(cfg.initial_state);
  const AveragingFilter filter = cfg.filter();

  ScenarioReport report;
  report.kind = to_string(cfg.kind);
  report.name = cfg.name;
  report.grid_points = grid.points();
  report.validity_ratio = validity_ratio(h);
  report.validity_condition_met = report.validity_ratio < 1.0;
  report.cutoff = filter.cutoff() * cfg.time_unit();
  for (std::int64_t k = 0; k <= std::min<std::int64_t>(grid.steps(), 16); ++k)
    report.decoherence_norm =
        std::max(report.decoherence_norm, gen.decoherence_superop(grid.time(k * grid.steps() / 16)).norm());

  TrajectoryRecorder exact_rec(h.dim(), cfg);
  TrajectoryRecorder eff_rec(h.dim(), cfg);
  try {
    propagate(von_neumann_rhs(h.to_fourier()), rho0, grid, std::ref(exact_rec));
  } catch (const std::exception &e) {
    throw PropagationError("exact propagation failed: " + std::string(e.what()));
  }
  PropagationStats stats;
  try {
    stats = propagate(effective_rhs(gen), rho0, grid, std::ref(eff_rec));
  } catch (const std::exception &e) {
    throw PropagationError("effective propagation failed: " + std::string(e.what()));
  }
  report.exact_purity_drift = exact_rec.purity_drift();
  report.effective_purity_drift = eff_rec.purity_drift();
  report.effective_min_eigenvalue = stats.min_eigenvalue;
  report.positivity_warnings = stats.positivity_warnings;
  report.trace_renormalizations = stats.trace_renormalizations;
  report.comparison = compare_signals(exact_rec.coherence(), eff_rec.coherence(), cfg.dt, report.cutoff);

  return {exact_rec.release(), eff_rec.release(), std::move(report)};
}

/// Writes exact.csv, effective.csv and report.json into `dir` (which must exist).
inline ScenarioReport run_scenario_to(const ScenarioConfig &cfg, const std::string &dir) {
  ScenarioResult res = run_scenario(cfg);
  emit_csv(res.exact, dir + "/exact.csv");
  emit_csv(res.effective, dir + "/effective.csv");
  std::ofstream out(dir + "/report.json", std::ios::binary);
  if (!out)
    throw ScenarioError("cannot write '" + dir + "/report.json'");
  out << to_json(res.report).dump(2) << '\n';
  return res.report;
}

// --------------------------------------------------------------------------
// Inspection
// --------------------------------------------------------------------------

inline json series_to_json(const FourierSuperoperator &s, double prune_tol) {
  json terms = json::array();
  const FourierSuperoperator kept = s.pruned(prune_tol);
  for (const auto &t : kept.terms())
    terms.push_back({{"nu", t.nu}, {"power", t.power}, {"matrix", detail::matrix_to_json(t.coeff)}});
  return terms;
}

/// Generators L_1..L_order, the harmonic H_eff and the first-order H_eff, all
/// at t0 of the scenario (physical units; hbar = 1).
inline json derive_report(const ScenarioConfig &cfg, int order, double prune_tol = 1e-14) {
  const HarmonicHamiltonian h = cfg.hamiltonian();
  const FourierOperator hf = h.to_fourier();
  const AveragingFilter filter = cfg.filter();
  const double t0 = cfg.t0 * cfg.time_unit();
  const auto l = build_L(hf, filter, t0, order);
  const EffectiveGenerator gen(h);
  const auto first = operator_A(hf, filter, t0);

  json out;
  out["kind"] = to_string(cfg.kind);
  out["order"] = order;
  out["t0"] = t0;
  out["cutoff"] = detail::number_or_null(filter.cutoff());
  out["vectorization"] = "column-stacking";
  out["H_eff"] = detail::matrix_to_json(gen.effective_hamiltonian(t0));
  out["H_eff_first_order"] = detail::matrix_to_json(first.effective_hamiltonian(t0));
  out["L"] = json::array();
  for (int k = 1; k <= order; ++k)
    out["L"].push_back({{"k", k}, {"at_t0", detail::matrix_to_json(l[k](t0))}, {"terms", series_to_json(l[k], prune_tol)}});
  return out;
}

} // namespace timeavg
