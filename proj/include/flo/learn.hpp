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
//
// Learners for fermionic linear optics unitaries hidden behind a query-only
// black box.
//
// The access model: a learner may run prepare-apply-measure experiments. One
// experiment starts from a Fock basis state (optionally with one ancilla
// mode appended last, or from the fermionic EPR state when the box grants
// the Choi resource model), applies an ordered list of channel items - each
// either a known controllable FLO or a query to the hidden unitary - and
// measures either the full Fock basis or a two-mode quadrature. The box
// keeps an exact ledger of query usage; the hidden one-body matrix is
// readable only for post-hoc report generation, never by the learners.
//
// Built on top of the box are the estimation routines: Slater-determinant
// and Gaussian-state tomography from randomized measurements, passive-
// unitary learning up to column phases, the median-based column-phase
// fixup, interferometric estimation of the leftover U(1) phase, the three
// constant-precision base learners (passive, active, Choi), and the
// bootstrap driver that lifts any base learner to Heisenberg scaling by
// adaptively powering the residual channel.

#ifndef FLO_LEARN_HPP_
#define FLO_LEARN_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "flo/common.hpp"
#include "flo/florep.hpp"
#include "flo/gsim.hpp"
#include "flo/rng.hpp"

namespace flo {
namespace learn {

// --- Experiments and accounting ---------------------------------------------

// Placeholder for one application of the hidden unitary inside an item list.
struct QueryTag {};

using ChannelItem = std::variant<florep::ActiveFlo, QueryTag>;
using ChannelItems = std::vector<ChannelItem>;

// The trivial channel: a single query to the hidden unitary.
ChannelItems single_query();

enum class Measurement { kFock, kQuadratureX, kQuadratureY };

// One prepare-apply-measure run. Items apply in list order (the first item
// acts on the prepared state first). Known items must act on the full mode
// set of the experiment, except in fEPR experiments where n-mode items are
// embedded on the system register automatically. Quadrature measurements
// pair the first mode with the last mode and yield a value in {-1, 0, +1}.
struct ExperimentSpec {
  std::vector<int> initial_bits;  // one 0/1 entry per mode; n or n+1 modes
  bool fepr_initial = false;      // Choi resource: start from the fEPR state
                                  // on 2n modes (initial_bits must be empty)
  ChannelItems items;
  Measurement measurement = Measurement::kFock;
  std::string stage = "unlabeled";  // ledger bucket for the queries
};

struct ExperimentOutcome {
  std::vector<int> bits;  // Fock outcome (post-rotation bits for quadrature)
  int value = 0;          // quadrature value bits.front() + bits.back() - 1
};

// Exact query accounting. Only query-consuming experiments touch the ledger:
// an experiment with p >= 1 interleaved queries adds p to total_queries and
// to its stage bucket and increments the experiment counters; a query-free
// experiment leaves the ledger untouched. The gate column records the
// documented per-experiment budget: every controllable item (known FLOs and
// the quadrature rotation) on m modes is charged the compilation worst case
// (2m choose 2) + m + 1 = 2m^2 + 1 elementary gates; queries are not charged
// (they are uses of the unknown device, not gates we implement).
struct QueryLedger {
  std::int64_t total_queries = 0;
  std::map<std::string, std::int64_t> per_stage;
  std::int64_t experiments = 0;
  std::int64_t choi_experiments = 0;  // subset run in the Choi resource model
  std::int64_t gates_per_experiment_max = 0;

  void merge(const QueryLedger& other);
};

// Worst-case elementary-gate count of one m-mode controllable FLO,
// (2m choose 2) + m + 1 = 2m^2 + 1.
std::int64_t gate_budget(int modes);

// The hidden unitary plus its ledger. Value-semantic: clone_fresh() copies
// the hidden unitary with a zeroed ledger so worker copies can run in
// parallel and be absorbed back deterministically.
class FloBlackBox {
 public:
  explicit FloBlackBox(const florep::ActiveFlo& hidden);

  int n() const { return hidden_.n(); }

  // Simulates one experiment. `stream` drives the measurement sampling (and
  // nothing else). Throws InvalidInput on malformed specs.
  ExperimentOutcome run(const ExperimentSpec& spec, rng::Stream& stream);

  FloBlackBox clone_fresh() const;
  void absorb(const QueryLedger& worker_ledger);

  const QueryLedger& ledger() const { return ledger_; }

  // Post-hoc error evaluation only. Learners must not call this.
  const florep::ActiveFlo& reveal_for_report() const { return hidden_; }

 private:
  florep::ActiveFlo hidden_;
  florep::ActiveFlo hidden_ancilla_;  // embedded on n + 1 modes
  florep::ActiveFlo hidden_choi_;     // system-register embedding, interleaved
  QueryLedger ledger_;
};

// Free-function form of FloBlackBox::run.
ExperimentOutcome run_experiment(FloBlackBox& box, const ExperimentSpec& spec,
                                 rng::Stream& stream);

// --- Building blocks used by the experiments --------------------------------

// Q acting on the first q.n() modes of an m-mode system, identity elsewhere.
florep::ActiveFlo embed_identity_modes(const florep::ActiveFlo& q, int m);

// exp((pi/4)(a_1^dag a_m^dag - a_m a_1)) on m modes: maps the vacuum to the
// pair superposition (|0..0> + |1 0..0 1>)/sqrt(2) across the first and last
// mode.
florep::ActiveFlo pair_preparation_gate(int m);

// Bogoliubov rotation diagonalizing the phi-quadrature of the (first, last)
// mode pair, X(phi) = e^{i phi} a_1^dag a_m^dag + e^{-i phi} a_m a_1: after
// applying it, the Fock readout value b_1 + b_m - 1 measures X(phi). phi = 0
// is the X quadrature, phi = pi/2 the Y quadrature.
florep::ActiveFlo quadrature_rotation(int m, Real phi);

// Exact <X(phi)> of the (first, last) pair on a simulated state; the model
// check used by the phase-estimation tests.
Real quadrature_expectation(const gsim::GaussianState& state, Real phi);

// argmin over theta of ||e^{i theta} u_star - u|| in operator norm (the
// minimizer of the phase-distance objective), accurate to ~1e-7.
Real aligned_phase(const ComplexMatrix& u_star, const ComplexMatrix& u);

// --- Tomography from randomized measurements --------------------------------

struct SlaterEstimate {
  ComplexMatrix mean;       // raw shadow mean of the 1-RDM
  ComplexMatrix projector;  // rank-eta rounding of the Hermitized mean
};

// Runs `samples` U(n)-shadow experiments against the state prepared by
// `source` (its items plus a fresh Haar rotation per sample, Fock readout)
// and rounds the mean to the top-eta eigenprojector. source.measurement must
// be kFock; sample i uses the stream (seed, i).
SlaterEstimate slater_tomo(FloBlackBox& box, const ExperimentSpec& source,
                           std::int64_t samples, int eta, std::uint64_t seed,
                           bool parallel = true);

struct GaussianEstimate {
  RealMatrix mean;              // skew-symmetrized shadow mean of Gamma
  gsim::GaussianState rounded;  // W J W^T, the nearest-pure rounding
  florep::ActiveFlo rotation;   // W from the skew normal form of the mean
};

// SO(2m)-shadow analogue of slater_tomo: mean of (2m-1) R^T J(b) R over
// `samples` draws, skew normal form, eigenvalue rounding to J.
GaussianEstimate gaussian_tomo(FloBlackBox& box, const ExperimentSpec& source,
                               std::int64_t samples, std::uint64_t seed,
                               bool parallel = true);

// --- Passive learning chain --------------------------------------------------

struct PhaselessOptions {
  ChannelItems channel;  // defaults to single_query()
  std::string stage = "phaseless";
  bool parallel = true;
  Real constant_scale = 1.0;
  Real single_particle_constant = 5.6e6;
  // Lower bound applied to every derived sample count. The stage formulas
  // have very different leading constants, so a small constant_scale chosen
  // to tame the dominant stage can drive a cheap stage to a handful of
  // samples; the floor keeps those stages statistically meaningful.
  std::int64_t min_samples = 1;
};

// Learns the passive one-body matrix up to a diagonal of column phases: for
// each mode j the channel is run on |1_j>, the single-particle orbital is
// read off as the top eigenvector of a shadow-mean RDM, and the assembled
// columns are rounded to the nearest unitary. The per-column sample count is
// ceil(C (11 n + 5 ln(4n/delta)) / eps^2) in the (eps, delta) form, or given
// explicitly in the counted form.
florep::PassiveFlo phaseless_tomo(FloBlackBox& box, Real eps, Real delta,
                                  std::uint64_t seed,
                                  const PhaselessOptions& options = {});
florep::PassiveFlo phaseless_tomo_counted(FloBlackBox& box,
                                          std::int64_t samples_per_column,
                                          std::uint64_t seed,
                                          const PhaselessOptions& options = {});

// Fixes the column phases of `v` against the reference run `g` (an estimate
// of the same unitary right-composed with the inverse discrete Fourier
// transform): entrywise ratio P = (G^dag V) ./ F, rows referenced to their
// first entry, per-column medians of the real and imaginary parts, and the
// diagonal correction W = V Psi^dag. Throws NumericalDegeneracy when a
// reference entry |P_j1| falls below 1e-12.
florep::PassiveFlo column_phases(const florep::PassiveFlo& v,
                                 const florep::PassiveFlo& g);

// Interferometric estimate of the leftover global phase of a near-identity
// passive channel: appends one ancilla mode, prepares the pair superposition
// across (first system mode, ancilla), sends the first mode through the
// channel, and reads the X and Y quadratures `samples_per_quadrature` times
// each; returns atan2(mean_Y, mean_X) in (-pi, pi]. The channel items are
// n-mode and are embedded on the system modes automatically. Precondition
// (not checkable here): the channel's passive part is within 1/2 of a pure
// phase in phase distance.
Real phase_est(FloBlackBox& box, const ChannelItems& channel,
               std::int64_t samples_per_quadrature, std::uint64_t seed,
               bool parallel = true, const std::string& stage = "phase");

// Ancilla-free stretch-goal variant: pairs the first and last system mode,
// so the channel imprints e^{2 i theta} and only theta mod pi is
// identifiable. Returns a value in (-pi/2, pi/2].
Real phase_est_parity_pair(FloBlackBox& box, const ChannelItems& channel,
                           std::int64_t samples_per_quadrature,
                           std::uint64_t seed, bool parallel = true,
                           const std::string& stage = "phase-parity");

// --- Base learners ------------------------------------------------------------

enum class PassiveMode {
  kDiamond,  // learn the matrix including its global phase (uses the ancilla)
  kSector,   // learn up to a global phase only (no phase stage, no ancilla)
};

struct PassiveBaseOptions {
  PassiveMode mode = PassiveMode::kDiamond;
  ChannelItems channel;  // defaults to single_query()
  bool parallel = true;
  Real constant_scale = 1.0;
  Real single_particle_constant = 5.6e6;
  std::int64_t min_samples = 1;  // floor on every derived sample count
};

// Constant-precision passive learner: two phaseless runs (plain, and right-
// composed with the inverse DFT) at precision eps/175 and failure rate
// delta/4 each, the column-phase fixup, and - in diamond mode - a phase
// estimation with ceil(572 ln(8/delta)/eps^2) samples per quadrature whose
// result multiplies the estimate. Ledger: 2n * N_column + 2 * N_phase
// queries. The counted form takes both sample counts explicitly.
florep::PassiveFlo passive_tomo_base(FloBlackBox& box, Real eps, Real delta,
                                     std::uint64_t seed,
                                     const PassiveBaseOptions& options = {});
florep::PassiveFlo passive_tomo_counted(FloBlackBox& box,
                                        std::int64_t samples_per_column,
                                        std::int64_t samples_per_quadrature,
                                        std::uint64_t seed,
                                        const PassiveBaseOptions& options = {});

struct ActiveBaseOptions {
  ChannelItems channel;  // defaults to single_query()
  bool parallel = true;
  Real constant_scale = 1.0;
  std::int64_t min_samples = 1;  // floor on every derived sample count
};

// Constant-precision active learner. Stage 1 estimates the covariance of the
// channel acting on the vacuum to precision c/sqrt(n) (c = eps/2600) and
// extracts an active factor from its skew normal form; stage 2 runs the
// passive base learner on the channel left-composed with that factor's
// transpose, using the perturbed-state per-column counts and a phase stage
// at precision 200 sqrt(2) c. The output is the stage-1 factor times the
// embedded stage-2 passive estimate.
florep::ActiveFlo active_tomo_base(FloBlackBox& box, Real eps, Real delta,
                                   std::uint64_t seed,
                                   const ActiveBaseOptions& options = {});

struct ChoiBaseOptions {
  ChannelItems channel;  // defaults to single_query()
  bool parallel = true;
  Real constant_scale = 1.0;
  std::int64_t min_samples = 1;  // floor on every derived sample count
};

// Choi-state learner (requires the 2n-mode fEPR resource): queries the
// channel once per copy on the fEPR state, collects ceil(128 n^2 ln(8n/
// delta)/eps^2) SO(4n)-shadow samples of the Choi covariance, and reads the
// one-body matrix off the top-right register block by orthogonal rounding.
florep::ActiveFlo choi_tomo_base(FloBlackBox& box, Real eps, Real delta,
                                 std::uint64_t seed,
                                 const ChoiBaseOptions& options = {});

// --- Bootstrap to Heisenberg scaling -----------------------------------------

struct BootstrapTraceRow {
  int t = 0;                    // iteration index, 0-based
  std::int64_t p = 1;           // channel power 2^t
  Real delta_t = 0.0;           // failure budget of the base call
  Real base_error = std::numeric_limits<Real>::quiet_NaN();
  std::int64_t cumulative_queries = 0;  // ledger total after the iteration
};

enum class BootstrapMetric {
  kOperatorNorm,    // estimates carry their global phase (diamond-mode bases)
  kPhaseInvariant,  // estimates defined up to phase: the spectral cluster is
                    // re-gauged to +1 before each principal root
};

struct BootstrapOptions {
  // Per-iteration base precision. The default 1/50 is always safe; values up
  // to (but excluding) 1/(3 pi) are accepted when allow_relaxed_eps0 is set.
  Real eps0 = 0.02;
  bool allow_relaxed_eps0 = false;
  BootstrapMetric metric = BootstrapMetric::kOperatorNorm;
};

// Base-learner callbacks: (box, eps, delta, seed, channel) -> estimate of
// the one-body matrix realized by `channel` (with every QueryTag standing
// for the hidden unitary).
using PassiveBaseFn = std::function<florep::PassiveFlo(
    FloBlackBox&, Real, Real, std::uint64_t, const ChannelItems&)>;
using ActiveBaseFn = std::function<florep::ActiveFlo(
    FloBlackBox&, Real, Real, std::uint64_t, const ChannelItems&)>;

// Adaptors binding the built-in base learners (with the given options) to
// the callback shape; the channel argument overrides options.channel.
PassiveBaseFn make_passive_base(const PassiveBaseOptions& options = {});
ActiveBaseFn make_active_base(const ActiveBaseOptions& options = {});
ActiveBaseFn make_choi_base(const ChoiBaseOptions& options = {});

struct PassiveBootstrapResult {
  florep::PassiveFlo estimate;
  std::vector<BootstrapTraceRow> trace;
};

struct ActiveBootstrapResult {
  florep::ActiveFlo estimate;
  std::vector<BootstrapTraceRow> trace;
};

// Heisenberg-scaling driver. T = ceil(log2(1/eps)); iteration t = 0..T calls
// the base learner at precision eps0 and failure budget delta / 2^{T+1-t} on
// the channel ((hidden o V_t^dag))^{2^t}, expressed as 2^t repetitions of
// (inverse-estimate item, base channel items); the estimate is updated by
// the principal 2^t-th root. A principal-root branch violation (the base
// estimate wandered outside the root's domain) is rethrown as
// PreconditionViolation mentioning bootstrap divergence. When
// `truth_for_trace` is supplied, each trace row records the base estimate's
// distance to the true powered channel.
PassiveBootstrapResult bootstrap_passive(
    FloBlackBox& box, Real eps, Real delta, std::uint64_t seed,
    const PassiveBaseFn& base, const BootstrapOptions& options = {},
    const florep::PassiveFlo* truth_for_trace = nullptr);

ActiveBootstrapResult bootstrap_active(
    FloBlackBox& box, Real eps, Real delta, std::uint64_t seed,
    const ActiveBaseFn& base, const BootstrapOptions& options = {},
    const florep::ActiveFlo* truth_for_trace = nullptr);

// --- Reporting ----------------------------------------------------------------

// Plain-data record of one learner run; serialized by the io module and
// filled in by the report generator (the only consumer of
// reveal_for_report).
struct LearnerReport {
  std::string scenario;
  int n = 0;
  int eta = 0;
  Real eps = 0.0;
  Real delta = 0.0;
  std::uint64_t seed = 0;
  Real constant_scale = 1.0;
  bool passive_estimate = false;  // selects which estimate field is set
  florep::PassiveFlo passive;
  florep::ActiveFlo active;
  QueryLedger queries;
  Real op_error = std::numeric_limits<Real>::quiet_NaN();
  Real phase_error = std::numeric_limits<Real>::quiet_NaN();
  Real diamond_error = std::numeric_limits<Real>::quiet_NaN();
  Real wall_ms = 0.0;
  std::vector<BootstrapTraceRow> trace;
};

}  // namespace learn
}  // namespace flo

#endif  // FLO_LEARN_HPP_
