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

// Serialization and batch-run plumbing: the matrix JSON format, gate-list
// JSON lines, learner-report JSON, the fixed results/trace CSV schemas,
// ground-truth import/export, and the scenario configuration record shared
// by the command line driver and its tests. Everything here is deliberately
// deterministic: numbers are printed in their shortest round-trip form so a
// rerun with the same configuration and seed produces byte-identical files.

#ifndef FLO_IO_HPP_
#define FLO_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "flo/common.hpp"
#include "flo/florep.hpp"
#include "flo/foracle.hpp"
#include "flo/gsim.hpp"
#include "flo/learn.hpp"

namespace flo {
namespace io {

using Json = nlohmann::json;

// --- Matrix JSON -------------------------------------------------------------

// {rows, cols, real: [...], imag: [...]} with entries listed row-major; the
// imag array is omitted when every imaginary part is exactly zero. Doubles
// round-trip exactly through this representation.
Json matrix_to_json(const RealMatrix& m);
Json matrix_to_json(const ComplexMatrix& m);

// Parsers validate shape and array lengths and throw InvalidInput on any
// mismatch; the real-valued parser additionally rejects a nonzero imag part.
RealMatrix real_matrix_from_json(const Json& j);
ComplexMatrix complex_matrix_from_json(const Json& j);

// --- Gaussian state JSON -----------------------------------------------------

// {n, gamma: <matrix JSON>}; parsing revalidates through gsim::make_state.
Json state_to_json(const gsim::GaussianState& s);
gsim::GaussianState state_from_json(const Json& j);

// --- Gate list JSON lines ----------------------------------------------------

// One {kind, indices, angle} object per line. kind is one of
// "passive_givens", "majorana_rotation", "mode_phase", "reflection";
// indices carries the stored gate indices ([q], [p, q], [q], []).
std::string gates_to_json_lines(const florep::GateList& gates);
florep::GateList gates_from_json_lines(const std::string& text);

// --- Deterministic text helpers ----------------------------------------------

// Shortest decimal string that parses back to exactly `value` (std::to_chars);
// NaN prints as "nan".
std::string format_real(Real value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// --- Learner report JSON -----------------------------------------------------

Json ledger_to_json(const learn::QueryLedger& ledger);
Json trace_row_to_json(const learn::BootstrapTraceRow& row);

// Full report record: identification fields, the estimate (tagged passive or
// active), the query ledger, achieved errors (null when not computed), wall
// time, and the bootstrap trace when present.
Json report_to_json(const learn::LearnerReport& report);

// --- CSV schemas ---------------------------------------------------------------

// scenario,n,eta,eps,delta,seed,trial,queries,op_err,ph_err,diamond_err,
// wall_ms,constant_scale -- error fields are left empty when the value was
// not computed (NaN), in particular diamond_err above the oracle cap.
std::string results_csv_header();
std::string results_csv_row(const learn::LearnerReport& report, int trial);

// t,p,delta_t,base_error,cumulative_queries (base_error empty when NaN).
std::string trace_csv_header();
std::string trace_csv_row(const learn::BootstrapTraceRow& row);

// --- Ground truth files --------------------------------------------------------

// Writes q.Q as matrix JSON. The exported file reimports bit for bit.
void export_ground_truth(const std::string& path, const florep::ActiveFlo& q);

// Reads a real 2n x 2n matrix-JSON file. A matrix that already passes the
// structural orthogonality check is used unchanged; anything else is rounded
// to the nearest rotation and a warning is written to `warnings` (when
// non-null). Unreadable files, malformed JSON, and wrong dimensions throw
// InvalidInput.
florep::ActiveFlo import_ground_truth(const std::string& path,
                                      std::ostream* warnings = nullptr);

// --- Scenario configuration -----------------------------------------------------

// One batch-run request. `eps` is a list only to serve the bootstrap-sweep
// scenario; every other scenario reads eps.front(). Wall-clock timing is off
// by default so identical (config, seed) reruns produce byte-identical CSV;
// pass wall_clock = true to record real timings instead of zeros.
struct ScenarioConfig {
  std::string scenario;  // slater|gauss|passive|active|choi|phase|
                         // bootstrap-sweep|verify
  int n = 4;
  int eta = 1;
  std::vector<Real> eps = {0.25};
  Real delta = 0.1;
  std::uint64_t seed = 1;
  int trials = 1;
  Real constant_scale = 1.0;
  std::int64_t min_samples = 1;  // floor applied to every derived count
  std::string out_dir = "out";
  int oracle_cap = foracle::kDefaultModeCap;
  std::string sweep_base = "passive";  // bootstrap-sweep only: which base
                                       // learner to lift (passive|active|choi)
  std::string ground_truth;  // optional: path to an exported rotation to use
  std::string export_truth;  // optional: path to write the hidden rotation
  bool wall_clock = false;
};

// Throws InvalidInput with a human-readable message on any out-of-range
// field or unknown scenario name.
void validate_config(const ScenarioConfig& config);

Json config_to_json(const ScenarioConfig& config);

// Strict parser: unknown keys are rejected, eps accepts a number or an
// array of numbers. Values absent from the JSON keep their defaults.
ScenarioConfig config_from_json(const Json& j);

ScenarioConfig load_config_file(const std::string& path);

}  // namespace io
}  // namespace flo

#endif  // FLO_IO_HPP_
