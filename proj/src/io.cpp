// Copyright 2026 The flolearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "flo/matlin.hpp"

namespace flo {
namespace io {

namespace {

Json json_real(Real value) {
  if (std::isnan(value)) return nullptr;
  return value;
}

int int_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw InvalidInput(std::string("matrix JSON: missing integer field '") +
                       key + "'");
  }
  return j.at(key).get<int>();
}

std::vector<Real> array_field(const Json& j, const char* key,
                              std::size_t want) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw InvalidInput(std::string("matrix JSON: missing array field '") +
                       key + "'");
  }
  const Json& arr = j.at(key);
  if (arr.size() != want) {
    throw InvalidInput(std::string("matrix JSON: field '") + key +
                       "' has the wrong length");
  }
  std::vector<Real> out;
  out.reserve(want);
  for (const Json& entry : arr) {
    if (!entry.is_number()) {
      throw InvalidInput(std::string("matrix JSON: non-numeric entry in '") +
                         key + "'");
    }
    out.push_back(entry.get<Real>());
  }
  return out;
}

std::pair<int, int> matrix_shape(const Json& j) {
  const int rows = int_field(j, "rows");
  const int cols = int_field(j, "cols");
  if (rows < 0 || cols < 0) {
    throw InvalidInput("matrix JSON: negative dimensions");
  }
  return {rows, cols};
}

const char* gate_kind_name(florep::Gate::Kind kind) {
  switch (kind) {
    case florep::Gate::Kind::kPassiveGivens:
      return "passive_givens";
    case florep::Gate::Kind::kMajoranaRotation:
      return "majorana_rotation";
    case florep::Gate::Kind::kModePhase:
      return "mode_phase";
    case florep::Gate::Kind::kReflection:
      return "reflection";
  }
  throw InvalidInput("gate JSON: unknown gate kind");
}

florep::Gate gate_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string() ||
      !j.contains("indices") || !j.at("indices").is_array()) {
    throw InvalidInput("gate JSON: expected {kind, indices, angle}");
  }
  const std::string kind = j.at("kind").get<std::string>();
  const Json& indices = j.at("indices");
  florep::Gate gate;
  gate.angle = j.value("angle", 0.0);
  const auto index_at = [&indices](std::size_t i) {
    if (!indices.at(i).is_number_integer()) {
      throw InvalidInput("gate JSON: non-integer index");
    }
    return indices.at(i).get<int>();
  };
  if (kind == "passive_givens") {
    gate.kind = florep::Gate::Kind::kPassiveGivens;
    if (indices.size() != 1) {
      throw InvalidInput("gate JSON: passive_givens takes one index");
    }
    gate.q = index_at(0);
  } else if (kind == "majorana_rotation") {
    gate.kind = florep::Gate::Kind::kMajoranaRotation;
    if (indices.size() != 2) {
      throw InvalidInput("gate JSON: majorana_rotation takes two indices");
    }
    gate.p = index_at(0);
    gate.q = index_at(1);
  } else if (kind == "mode_phase") {
    gate.kind = florep::Gate::Kind::kModePhase;
    if (indices.size() != 1) {
      throw InvalidInput("gate JSON: mode_phase takes one index");
    }
    gate.q = index_at(0);
  } else if (kind == "reflection") {
    gate.kind = florep::Gate::Kind::kReflection;
    if (!indices.empty()) {
      throw InvalidInput("gate JSON: reflection takes no indices");
    }
  } else {
    throw InvalidInput("gate JSON: unknown kind '" + kind + "'");
  }
  return gate;
}

}  // namespace

Json matrix_to_json(const RealMatrix& m) {
  Json j;
  j["rows"] = static_cast<int>(m.rows());
  j["cols"] = static_cast<int>(m.cols());
  Json real = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) real.push_back(m(r, c));
  }
  j["real"] = std::move(real);
  return j;
}

Json matrix_to_json(const ComplexMatrix& m) {
  Json j;
  j["rows"] = static_cast<int>(m.rows());
  j["cols"] = static_cast<int>(m.cols());
  Json real = Json::array();
  Json imag = Json::array();
  bool any_imag = false;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      real.push_back(m(r, c).real());
      imag.push_back(m(r, c).imag());
      any_imag = any_imag || m(r, c).imag() != 0.0;
    }
  }
  j["real"] = std::move(real);
  if (any_imag) j["imag"] = std::move(imag);
  return j;
}

RealMatrix real_matrix_from_json(const Json& j) {
  const auto [rows, cols] = matrix_shape(j);
  const std::size_t count = static_cast<std::size_t>(rows) *
                            static_cast<std::size_t>(cols);
  const std::vector<Real> real = array_field(j, "real", count);
  if (j.contains("imag")) {
    const std::vector<Real> imag = array_field(j, "imag", count);
    for (Real v : imag) {
      if (v != 0.0) {
        throw InvalidInput("matrix JSON: expected a real matrix");
      }
    }
  }
  RealMatrix m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = real[k++];
  }
  return m;
}

ComplexMatrix complex_matrix_from_json(const Json& j) {
  const auto [rows, cols] = matrix_shape(j);
  const std::size_t count = static_cast<std::size_t>(rows) *
                            static_cast<std::size_t>(cols);
  const std::vector<Real> real = array_field(j, "real", count);
  std::vector<Real> imag(count, 0.0);
  if (j.contains("imag")) imag = array_field(j, "imag", count);
  ComplexMatrix m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = Complex(real[k], imag[k]);
      ++k;
    }
  }
  return m;
}

Json state_to_json(const gsim::GaussianState& s) {
  Json j;
  j["n"] = s.n;
  j["gamma"] = matrix_to_json(s.gamma);
  return j;
}

gsim::GaussianState state_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("gamma")) {
    throw InvalidInput("state JSON: expected {n, gamma}");
  }
  const int n = int_field(j, "n");
  return gsim::make_state(n, real_matrix_from_json(j.at("gamma")));
}

std::string gates_to_json_lines(const florep::GateList& gates) {
  std::string out;
  for (const florep::Gate& gate : gates) {
    Json j;
    j["kind"] = gate_kind_name(gate.kind);
    Json indices = Json::array();
    switch (gate.kind) {
      case florep::Gate::Kind::kPassiveGivens:
      case florep::Gate::Kind::kModePhase:
        indices.push_back(gate.q);
        break;
      case florep::Gate::Kind::kMajoranaRotation:
        indices.push_back(gate.p);
        indices.push_back(gate.q);
        break;
      case florep::Gate::Kind::kReflection:
        break;
    }
    j["indices"] = std::move(indices);
    j["angle"] = gate.angle;
    out += j.dump();
    out += '\n';
  }
  return out;
}

florep::GateList gates_from_json_lines(const std::string& text) {
  florep::GateList gates;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw InvalidInput(std::string("gate JSON: parse error: ") + e.what());
    }
    gates.push_back(gate_from_json(j));
  }
  return gates;
}

std::string format_real(Real value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf),
                                                 value);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.good()) throw InvalidInput("write failed: " + path);
}

Json ledger_to_json(const learn::QueryLedger& ledger) {
  Json j;
  j["total_queries"] = ledger.total_queries;
  Json per_stage = Json::object();
  for (const auto& [stage, count] : ledger.per_stage) per_stage[stage] = count;
  j["per_stage"] = std::move(per_stage);
  j["experiments"] = ledger.experiments;
  j["choi_experiments"] = ledger.choi_experiments;
  j["gates_per_experiment_max"] = ledger.gates_per_experiment_max;
  return j;
}

Json trace_row_to_json(const learn::BootstrapTraceRow& row) {
  Json j;
  j["t"] = row.t;
  j["p"] = row.p;
  j["delta_t"] = row.delta_t;
  j["base_error"] = json_real(row.base_error);
  j["cumulative_queries"] = row.cumulative_queries;
  return j;
}

Json report_to_json(const learn::LearnerReport& report) {
  Json j;
  j["scenario"] = report.scenario;
  j["n"] = report.n;
  j["eta"] = report.eta;
  j["eps"] = report.eps;
  j["delta"] = report.delta;
  j["seed"] = report.seed;
  j["constant_scale"] = report.constant_scale;
  Json estimate;
  if (report.passive_estimate) {
    estimate["kind"] = "passive";
    estimate["matrix"] = matrix_to_json(report.passive.U);
  } else {
    estimate["kind"] = "active";
    estimate["matrix"] = matrix_to_json(report.active.Q);
  }
  j["estimate"] = std::move(estimate);
  j["queries"] = ledger_to_json(report.queries);
  j["op_error"] = json_real(report.op_error);
  j["phase_error"] = json_real(report.phase_error);
  j["diamond_error"] = json_real(report.diamond_error);
  j["wall_ms"] = report.wall_ms;
  Json trace = Json::array();
  for (const learn::BootstrapTraceRow& row : report.trace) {
    trace.push_back(trace_row_to_json(row));
  }
  j["trace"] = std::move(trace);
  return j;
}

std::string results_csv_header() {
  return "scenario,n,eta,eps,delta,seed,trial,queries,op_err,ph_err,"
         "diamond_err,wall_ms,constant_scale\n";
}

std::string results_csv_row(const learn::LearnerReport& report, int trial) {
  const auto error_field = [](Real value) {
    return std::isnan(value) ? std::string() : format_real(value);
  };
  std::ostringstream row;
  row << report.scenario << ',' << report.n << ',' << report.eta << ','
      << format_real(report.eps) << ',' << format_real(report.delta) << ','
      << report.seed << ',' << trial << ',' << report.queries.total_queries
      << ',' << error_field(report.op_error) << ','
      << error_field(report.phase_error) << ','
      << error_field(report.diamond_error) << ','
      << format_real(report.wall_ms) << ','
      << format_real(report.constant_scale) << '\n';
  return row.str();
}

std::string trace_csv_header() {
  return "t,p,delta_t,base_error,cumulative_queries\n";
}

std::string trace_csv_row(const learn::BootstrapTraceRow& row) {
  std::ostringstream out;
  out << row.t << ',' << row.p << ',' << format_real(row.delta_t) << ','
      << (std::isnan(row.base_error) ? std::string()
                                     : format_real(row.base_error))
      << ',' << row.cumulative_queries << '\n';
  return out.str();
}

void export_ground_truth(const std::string& path,
                         const florep::ActiveFlo& q) {
  write_file(path, matrix_to_json(q.Q).dump(2) + "\n");
}

florep::ActiveFlo import_ground_truth(const std::string& path,
                                      std::ostream* warnings) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw InvalidInput("ground truth " + path + ": " + e.what());
  }
  const RealMatrix q = real_matrix_from_json(j);
  if (q.rows() != q.cols() || q.rows() < 2 || q.rows() % 2 != 0) {
    throw InvalidInput("ground truth " + path +
                       ": expected a square matrix of even dimension");
  }
  try {
    return florep::make_active(q);
  } catch (const InvalidInput&) {
    const Real deviation = operator_norm(
        RealMatrix(q.transpose() * q - RealMatrix::Identity(q.rows(),
                                                            q.cols())));
    if (warnings != nullptr) {
      *warnings << "warning: ground truth " << path
                << " failed the orthogonality check (deviation "
                << format_real(deviation)
                << "); rounded to the nearest rotation\n";
    }
    return florep::make_active(matlin::svd_round_orthogonal(q));
  }
}

void validate_config(const ScenarioConfig& config) {
  static const std::set<std::string> kScenarios = {
      "slater", "gauss", "passive",         "active",
      "choi",   "phase", "bootstrap-sweep", "verify"};
  if (kScenarios.count(config.scenario) == 0) {
    throw InvalidInput("config: unknown scenario '" + config.scenario + "'");
  }
  if (config.n < 1 || config.n > 4096) {
    throw InvalidInput("config: n must be in [1, 4096]");
  }
  if (config.eta < 0 || config.eta > config.n) {
    throw InvalidInput("config: eta must be in [0, n]");
  }
  if (config.eps.empty()) {
    throw InvalidInput("config: eps list must not be empty");
  }
  for (Real eps : config.eps) {
    if (!(eps > 0.0) || !(eps <= 4.0)) {
      throw InvalidInput("config: every eps must lie in (0, 4]");
    }
  }
  if (!(config.delta > 0.0) || !(config.delta < 1.0)) {
    throw InvalidInput("config: delta must lie in (0, 1)");
  }
  if (config.trials < 1 || config.trials > 1000000) {
    throw InvalidInput("config: trials must be in [1, 1e6]");
  }
  if (!(config.constant_scale > 0.0)) {
    throw InvalidInput("config: constant_scale must be positive");
  }
  if (config.min_samples < 1) {
    throw InvalidInput("config: min_samples must be at least 1");
  }
  if (config.oracle_cap < 1) {
    throw InvalidInput("config: oracle_cap must be at least 1");
  }
  if (config.sweep_base != "passive" && config.sweep_base != "active" &&
      config.sweep_base != "choi") {
    throw InvalidInput("config: sweep_base must be passive, active, or choi");
  }
}

Json config_to_json(const ScenarioConfig& config) {
  Json j;
  j["scenario"] = config.scenario;
  j["n"] = config.n;
  j["eta"] = config.eta;
  j["eps"] = config.eps;
  j["delta"] = config.delta;
  j["seed"] = config.seed;
  j["trials"] = config.trials;
  j["constant_scale"] = config.constant_scale;
  j["min_samples"] = config.min_samples;
  j["out_dir"] = config.out_dir;
  j["oracle_cap"] = config.oracle_cap;
  j["sweep_base"] = config.sweep_base;
  j["ground_truth"] = config.ground_truth;
  j["export_truth"] = config.export_truth;
  j["wall_clock"] = config.wall_clock;
  return j;
}

ScenarioConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
  ScenarioConfig config;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "scenario") {
        config.scenario = value.get<std::string>();
      } else if (key == "n") {
        config.n = value.get<int>();
      } else if (key == "eta") {
        config.eta = value.get<int>();
      } else if (key == "eps") {
        if (value.is_number()) {
          config.eps = {value.get<Real>()};
        } else {
          config.eps = value.get<std::vector<Real>>();
        }
      } else if (key == "delta") {
        config.delta = value.get<Real>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "trials") {
        config.trials = value.get<int>();
      } else if (key == "constant_scale") {
        config.constant_scale = value.get<Real>();
      } else if (key == "min_samples") {
        config.min_samples = value.get<std::int64_t>();
      } else if (key == "out_dir") {
        config.out_dir = value.get<std::string>();
      } else if (key == "oracle_cap") {
        config.oracle_cap = value.get<int>();
      } else if (key == "sweep_base") {
        config.sweep_base = value.get<std::string>();
      } else if (key == "ground_truth") {
        config.ground_truth = value.get<std::string>();
      } else if (key == "export_truth") {
        config.export_truth = value.get<std::string>();
      } else if (key == "wall_clock") {
        config.wall_clock = value.get<bool>();
      } else {
        throw InvalidInput("config: unknown key '" + key + "'");
      }
    } catch (const Json::exception&) {
      throw InvalidInput("config: bad value for key '" + key + "'");
    }
  }
  return config;
}

ScenarioConfig load_config_file(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw InvalidInput("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace io
}  // namespace flo
