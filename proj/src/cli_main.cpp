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

// flolearn: batch experiment harness. One subcommand per scenario (slater,
// gauss, passive, active, choi, phase, bootstrap-sweep, verify), seeded and
// reproducible; writes report.json and results.csv into the output
// directory, plus per-epsilon bootstrap traces and a queries-vs-epsilon
// table for the sweep scenario.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>

#include "flo/foracle.hpp"
#include "flo/io.hpp"
#include "flo/learn.hpp"
#include "flo/matlin.hpp"
#include "flo/shadows.hpp"

namespace flo {
namespace climain {
namespace {

using learn::FloBlackBox;
using learn::LearnerReport;

// Rows of results.csv: a report plus its trial index within its epsilon.
using ResultRows = std::vector<std::pair<LearnerReport, int>>;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  Real elapsed_ms() const {
    return std::chrono::duration<Real, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

ComplexMatrix random_hermitian_unit(int n, rng::Stream& stream) {
  ComplexMatrix g(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      g(r, c) = Complex(stream.gaussian(), stream.gaussian());
    }
  }
  ComplexMatrix h = 0.5 * (g + g.adjoint());
  return h / operator_norm(h);
}

ComplexMatrix near_identity_unitary(int n, Real angle, rng::Stream& stream) {
  const ComplexMatrix h = random_hermitian_unit(n, stream);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  ComplexMatrix phases = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    phases(j, j) = std::polar(1.0, angle * eig.eigenvalues()(j));
  }
  return eig.eigenvectors() * phases * eig.eigenvectors().adjoint();
}

florep::ActiveFlo embed_unitary(const ComplexMatrix& u) {
  return florep::embed_passive(florep::make_passive(u));
}

// Exact trace distance between the eta-particle Slater states with the given
// occupied-orbital projectors (in the simulator's RDM convention):
// sqrt(1 - |det(B1^dag B2)|^2) over orthonormal range bases.
Real slater_trace_distance(const ComplexMatrix& truth_projector,
                           const ComplexMatrix& estimate_projector, int eta) {
  if (eta == 0) {
    return 0.5 * operator_norm(
                     ComplexMatrix(truth_projector - estimate_projector));
  }
  const auto top_basis = [eta](const ComplexMatrix& projector) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(projector);
    return ComplexMatrix(eig.eigenvectors().rightCols(eta));
  };
  const ComplexMatrix b1 = top_basis(truth_projector);
  const ComplexMatrix b2 = top_basis(estimate_projector);
  const Real overlap = std::abs(ComplexMatrix(b1.adjoint() * b2)
                                    .determinant());
  return std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
}

struct TruthSource {
  bool imported = false;
  florep::ActiveFlo fixed;  // used for every trial when imported
};

TruthSource load_truth(const io::ScenarioConfig& config) {
  TruthSource source;
  if (!config.ground_truth.empty()) {
    source.imported = true;
    source.fixed = io::import_ground_truth(config.ground_truth, &std::cerr);
    if (source.fixed.n() != config.n) {
      throw InvalidInput("ground truth mode count does not match --n");
    }
  }
  return source;
}

florep::ActiveFlo passive_truth(const TruthSource& source, int n,
                                rng::Stream& stream) {
  if (source.imported) return source.fixed;
  return embed_unitary(matlin::haar_unitary(n, stream));
}

florep::ActiveFlo active_truth(const TruthSource& source, int n,
                               rng::Stream& stream, bool allow_reflection) {
  if (source.imported) return source.fixed;
  RealMatrix q = matlin::haar_special_orthogonal(2 * n, stream);
  if (allow_reflection && stream.bernoulli(0.5)) q.row(0) = -q.row(0);
  return florep::make_active(q);
}

LearnerReport blank_report(const io::ScenarioConfig& config, Real eps) {
  LearnerReport report;
  report.scenario = config.scenario;
  report.n = config.n;
  report.eta = config.eta;
  report.eps = eps;
  report.delta = config.delta;
  report.seed = config.seed;
  report.constant_scale = config.constant_scale;
  return report;
}

// Diamond distance against the dense oracle when the mode count allows it;
// otherwise leaves NaN and warns once per run.
Real maybe_diamond(const florep::ActiveFlo& estimate,
                   const florep::ActiveFlo& truth,
                   const io::ScenarioConfig& config, bool* warned) {
  if (estimate.n() <= config.oracle_cap) {
    return foracle::diamond_distance(estimate, truth, config.oracle_cap);
  }
  if (warned != nullptr && !*warned) {
    std::cerr << "warning: n = " << estimate.n() << " exceeds oracle_cap = "
              << config.oracle_cap
              << "; diamond_err downgraded to the operator-norm column\n";
    *warned = true;
  }
  return std::numeric_limits<Real>::quiet_NaN();
}

rng::Stream truth_stream(const io::ScenarioConfig& config, int trial) {
  return rng::Stream(rng::derive(config.seed, 0x7275u),
                     static_cast<std::uint64_t>(trial));
}

std::uint64_t learner_seed(const io::ScenarioConfig& config, int trial) {
  return rng::derive(config.seed, static_cast<std::uint64_t>(trial));
}

ResultRows run_slater(const io::ScenarioConfig& config,
                      florep::ActiveFlo* first_truth) {
  const TruthSource source = load_truth(config);
  shadows::SampleParams params;
  params.n = config.n;
  params.eta = config.eta;
  params.eps = config.eps.front();
  params.delta = config.delta;
  params.constant_scale = config.constant_scale;
  const std::int64_t samples =
      shadows::sample_size(shadows::SampleKind::kSlaterTomo, params);
  ResultRows rows;
  for (int trial = 0; trial < config.trials; ++trial) {
    rng::Stream stream = truth_stream(config, trial);
    const florep::ActiveFlo truth = passive_truth(source, config.n, stream);
    if (trial == 0) *first_truth = truth;
    const ComplexMatrix u = florep::extract_passive(truth).U;
    FloBlackBox box(truth);
    learn::ExperimentSpec spec;
    spec.initial_bits.assign(static_cast<std::size_t>(config.n), 0);
    for (int j = 0; j < config.eta; ++j) spec.initial_bits[j] = 1;
    spec.items = learn::single_query();
    spec.stage = "slater";
    const Timer timer;
    const learn::SlaterEstimate est =
        learn::slater_tomo(box, spec, samples, config.eta,
                           learner_seed(config, trial));
    LearnerReport report = blank_report(config, params.eps);
    report.wall_ms = config.wall_clock ? timer.elapsed_ms() : 0.0;
    ComplexMatrix truth_projector = ComplexMatrix::Zero(config.n, config.n);
    for (int j = 0; j < config.eta; ++j) {
      truth_projector += (u.col(j) * u.col(j).adjoint()).conjugate();
    }
    report.op_error = slater_trace_distance(truth_projector, est.projector,
                                            config.eta);
    report.passive_estimate = true;
    report.passive = florep::make_passive(ComplexMatrix::Identity(config.n,
                                                                  config.n));
    report.queries = box.ledger();
    rows.emplace_back(std::move(report), trial);
  }
  return rows;
}

ResultRows run_gauss(const io::ScenarioConfig& config,
                     florep::ActiveFlo* first_truth) {
  const TruthSource source = load_truth(config);
  shadows::SampleParams params;
  params.n = config.n;
  params.eps = config.eps.front();
  params.delta = config.delta;
  params.constant_scale = config.constant_scale;
  const std::int64_t samples =
      shadows::sample_size(shadows::SampleKind::kCovariance, params);
  ResultRows rows;
  for (int trial = 0; trial < config.trials; ++trial) {
    rng::Stream stream = truth_stream(config, trial);
    const florep::ActiveFlo truth =
        active_truth(source, config.n, stream, false);
    if (trial == 0) *first_truth = truth;
    const RealMatrix gamma =
        gsim::apply_flo(gsim::vacuum_state(config.n), truth).gamma;
    FloBlackBox box(truth);
    learn::ExperimentSpec spec;
    spec.initial_bits.assign(static_cast<std::size_t>(config.n), 0);
    spec.items = learn::single_query();
    spec.stage = "gauss";
    const Timer timer;
    const learn::GaussianEstimate est =
        learn::gaussian_tomo(box, spec, samples, learner_seed(config, trial));
    LearnerReport report = blank_report(config, params.eps);
    report.wall_ms = config.wall_clock ? timer.elapsed_ms() : 0.0;
    report.op_error = operator_norm(RealMatrix(est.mean - gamma));
    report.active = est.rotation;
    report.queries = box.ledger();
    rows.emplace_back(std::move(report), trial);
  }
  return rows;
}

ResultRows run_passive(const io::ScenarioConfig& config,
                       florep::ActiveFlo* first_truth) {
  const TruthSource source = load_truth(config);
  bool warned = false;
  ResultRows rows;
  for (int trial = 0; trial < config.trials; ++trial) {
    rng::Stream stream = truth_stream(config, trial);
    const florep::ActiveFlo truth = passive_truth(source, config.n, stream);
    if (trial == 0) *first_truth = truth;
    const ComplexMatrix u = florep::extract_passive(truth).U;
    FloBlackBox box(truth);
    learn::PassiveBaseOptions options;
    options.constant_scale = config.constant_scale;
    options.min_samples = config.min_samples;
    const Timer timer;
    const florep::PassiveFlo est =
        learn::passive_tomo_base(box, config.eps.front(), config.delta,
                                 learner_seed(config, trial), options);
    LearnerReport report = blank_report(config, config.eps.front());
    report.wall_ms = config.wall_clock ? timer.elapsed_ms() : 0.0;
    report.op_error = operator_norm(ComplexMatrix(est.U - u));
    report.phase_error = matlin::phase_distance(est.U, u);
    report.diamond_error =
        maybe_diamond(florep::embed_passive(est), truth, config, &warned);
    report.passive_estimate = true;
    report.passive = est;
    report.queries = box.ledger();
    rows.emplace_back(std::move(report), trial);
  }
  return rows;
}

ResultRows run_active(const io::ScenarioConfig& config,
                      florep::ActiveFlo* first_truth) {
  const TruthSource source = load_truth(config);
  bool warned = false;
  ResultRows rows;
  for (int trial = 0; trial < config.trials; ++trial) {
    rng::Stream stream = truth_stream(config, trial);
    const florep::ActiveFlo truth =
        active_truth(source, config.n, stream, false);
    if (trial == 0) *first_truth = truth;
    FloBlackBox box(truth);
    learn::ActiveBaseOptions options;
    options.constant_scale = config.constant_scale;
    options.min_samples = config.min_samples;
    const Timer timer;
    const florep::ActiveFlo est =
        learn::active_tomo_base(box, config.eps.front(), config.delta,
                                learner_seed(config, trial), options);
    LearnerReport report = blank_report(config, config.eps.front());
    report.wall_ms = config.wall_clock ? timer.elapsed_ms() : 0.0;
    report.op_error = operator_norm(RealMatrix(est.Q - truth.Q));
    report.diamond_error = maybe_diamond(est, truth, config, &warned);
    report.active = est;
    report.queries = box.ledger();
    rows.emplace_back(std::move(report), trial);
  }
  return rows;
}

ResultRows run_choi(const io::ScenarioConfig& config,
                    florep::ActiveFlo* first_truth) {
  const TruthSource source = load_truth(config);
  bool warned = false;
  ResultRows rows;
  for (int trial = 0; trial < config.trials; ++trial) {
    rng::Stream stream = truth_stream(config, trial);
    const florep::ActiveFlo truth =
        active_truth(source, config.n, stream, true);
    if (trial == 0) *first_truth = truth;
    FloBlackBox box(truth);
    learn::ChoiBaseOptions options;
    options.constant_scale = config.constant_scale;
    options.min_samples = config.min_samples;
    const Timer timer;
    const florep::ActiveFlo est =
        learn::choi_tomo_base(box, config.eps.front(), config.delta,
                              learner_seed(config, trial), options);
    LearnerReport report = blank_report(config, config.eps.front());
    report.wall_ms = config.wall_clock ? timer.elapsed_ms() : 0.0;
    report.op_error = operator_norm(RealMatrix(est.Q - truth.Q));
    report.diamond_error = maybe_diamond(est, truth, config, &warned);
    report.active = est;
    report.queries = box.ledger();
    rows.emplace_back(std::move(report), trial);
  }
  return rows;
}

ResultRows run_phase(const io::ScenarioConfig& config,
                     florep::ActiveFlo* first_truth) {
  shadows::SampleParams params;
  params.eps = config.eps.front();
  params.delta = config.delta;
  params.constant_scale = config.constant_scale;
  const std::int64_t samples =
      shadows::sample_size(shadows::SampleKind::kPhase, params);
  ResultRows rows;
  for (int trial = 0; trial < config.trials; ++trial) {
    rng::Stream stream = truth_stream(config, trial);
    const Real theta = (2.0 * stream.uniform() - 1.0) * kPi;
    const ComplexMatrix w =
        near_identity_unitary(config.n, 0.1, stream);
    const florep::ActiveFlo truth =
        embed_unitary(ComplexMatrix(std::polar(1.0, theta) * w));
    if (trial == 0) *first_truth = truth;
    FloBlackBox box(truth);
    const Timer timer;
    const Real estimate =
        learn::phase_est(box, learn::single_query(), samples,
                         learner_seed(config, trial));
    LearnerReport report = blank_report(config, params.eps);
    report.wall_ms = config.wall_clock ? timer.elapsed_ms() : 0.0;
    report.op_error =
        std::abs(std::polar(1.0, estimate) - std::polar(1.0, theta));
    report.passive_estimate = true;
    report.passive = florep::make_passive(ComplexMatrix(
        std::polar(1.0, estimate) *
        ComplexMatrix::Identity(config.n, config.n)));
    report.queries = box.ledger();
    rows.emplace_back(std::move(report), trial);
  }
  return rows;
}

ResultRows run_bootstrap_sweep(const io::ScenarioConfig& config,
                               const std::filesystem::path& out_dir,
                               florep::ActiveFlo* first_truth) {
  const TruthSource source = load_truth(config);
  bool warned = false;
  ResultRows rows;
  std::string sweep_csv = "eps,trials,mean_queries,ratio_to_prev\n";
  Real prev_mean = std::numeric_limits<Real>::quiet_NaN();
  for (std::size_t i = 0; i < config.eps.size(); ++i) {
    const Real eps = config.eps[i];
    std::int64_t query_sum = 0;
    for (int trial = 0; trial < config.trials; ++trial) {
      rng::Stream stream = truth_stream(config, static_cast<int>(
                                                    1000 * i) + trial);
      LearnerReport report = blank_report(config, eps);
      const std::uint64_t seed =
          rng::derive(config.seed, 1000 * i + static_cast<std::uint64_t>(
                                                  trial) + 1);
      const Timer timer;
      if (config.sweep_base == "passive") {
        const florep::ActiveFlo truth =
            passive_truth(source, config.n, stream);
        if (i == 0 && trial == 0) *first_truth = truth;
        const ComplexMatrix u = florep::extract_passive(truth).U;
        const florep::PassiveFlo truth_passive = florep::make_passive(u);
        FloBlackBox box(truth);
        learn::PassiveBaseOptions options;
        options.constant_scale = config.constant_scale;
        options.min_samples = config.min_samples;
        const learn::PassiveBootstrapResult result = learn::bootstrap_passive(
            box, eps, config.delta, seed,
            learn::make_passive_base(options), {}, &truth_passive);
        report.op_error = operator_norm(ComplexMatrix(result.estimate.U - u));
        report.phase_error = matlin::phase_distance(result.estimate.U, u);
        report.diamond_error =
            maybe_diamond(florep::embed_passive(result.estimate), truth,
                          config, &warned);
        report.passive_estimate = true;
        report.passive = result.estimate;
        report.trace = result.trace;
        report.queries = box.ledger();
      } else {
        const florep::ActiveFlo truth =
            active_truth(source, config.n, stream, false);
        if (i == 0 && trial == 0) *first_truth = truth;
        FloBlackBox box(truth);
        learn::ActiveBaseFn base;
        if (config.sweep_base == "active") {
          learn::ActiveBaseOptions options;
          options.constant_scale = config.constant_scale;
          options.min_samples = config.min_samples;
          base = learn::make_active_base(options);
        } else {
          learn::ChoiBaseOptions options;
          options.constant_scale = config.constant_scale;
          options.min_samples = config.min_samples;
          base = learn::make_choi_base(options);
        }
        const learn::ActiveBootstrapResult result = learn::bootstrap_active(
            box, eps, config.delta, seed, base, {}, &truth);
        report.op_error =
            operator_norm(RealMatrix(result.estimate.Q - truth.Q));
        report.diamond_error =
            maybe_diamond(result.estimate, truth, config, &warned);
        report.active = result.estimate;
        report.trace = result.trace;
        report.queries = box.ledger();
      }
      report.wall_ms = config.wall_clock ? timer.elapsed_ms() : 0.0;
      query_sum += report.queries.total_queries;
      if (trial == 0) {
        std::string trace_csv = io::trace_csv_header();
        for (const learn::BootstrapTraceRow& row : report.trace) {
          trace_csv += io::trace_csv_row(row);
        }
        io::write_file((out_dir / ("trace_" + std::to_string(i) + ".csv"))
                           .string(),
                       trace_csv);
      }
      rows.emplace_back(std::move(report), trial);
    }
    const Real mean = static_cast<Real>(query_sum) / config.trials;
    sweep_csv += io::format_real(eps);
    sweep_csv += ',';
    sweep_csv += std::to_string(config.trials);
    sweep_csv += ',';
    sweep_csv += io::format_real(mean);
    sweep_csv += ',';
    if (!std::isnan(prev_mean)) sweep_csv += io::format_real(mean / prev_mean);
    sweep_csv += '\n';
    prev_mean = mean;
  }
  io::write_file((out_dir / "sweep.csv").string(), sweep_csv);
  return rows;
}

// ---------------------------------------------------------------------------
// verify: self-contained deterministic invariant suite
// ---------------------------------------------------------------------------

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

void check(std::vector<VerifyCheck>& checks, const std::string& name,
           bool passed, const std::string& detail = "") {
  checks.push_back({name, passed, detail});
}

std::vector<VerifyCheck> run_verify_suite() {
  std::vector<VerifyCheck> checks;
  constexpr std::uint64_t kSeed = 0x76657269;

  {  // Covariance conventions.
    const RealMatrix j4 = florep::symplectic_form(4);
    bool ok = operator_norm(RealMatrix(gsim::vacuum_state(4).gamma - j4)) <
              1e-14;
    rng::Stream stream(kSeed, 1);
    for (int rep = 0; rep < 10 && ok; ++rep) {
      const florep::ActiveFlo q = florep::make_active(
          matlin::haar_special_orthogonal(8, stream));
      const RealMatrix gamma = gsim::apply_flo(gsim::vacuum_state(4), q).gamma;
      ok = ok &&
           operator_norm(RealMatrix(gamma.transpose() * gamma -
                                    RealMatrix::Identity(8, 8))) < 1e-12 &&
           operator_norm(RealMatrix(gamma + gamma.transpose())) < 1e-12;
    }
    check(checks, "pure covariances are orthogonal, skew, vacuum = J", ok);
  }

  {  // Composition is a homomorphism on covariances.
    rng::Stream stream(kSeed, 2);
    bool ok = true;
    for (int rep = 0; rep < 10 && ok; ++rep) {
      const florep::ActiveFlo q1 = florep::make_active(
          matlin::haar_special_orthogonal(6, stream));
      const florep::ActiveFlo q2 = florep::make_active(
          matlin::haar_special_orthogonal(6, stream));
      std::vector<int> bits = {1, 0, 1};
      const gsim::GaussianState s = gsim::fock_basis_state(bits);
      const RealMatrix twice =
          gsim::apply_flo(gsim::apply_flo(s, q1), q2).gamma;
      const RealMatrix once =
          gsim::apply_flo(s, florep::make_active(RealMatrix(q2.Q * q1.Q)))
              .gamma;
      ok = operator_norm(RealMatrix(twice - once)) < 1e-12;
    }
    check(checks, "rotation composition acts as a homomorphism", ok);
  }

  {  // Dense-oracle equivalence at n = 3.
    rng::Stream stream(kSeed, 3);
    bool ok = true;
    Real worst = 0.0;
    for (int rep = 0; rep < 10 && ok; ++rep) {
      const florep::ActiveFlo q = florep::make_active(
          matlin::haar_special_orthogonal(6, stream));
      std::vector<int> bits = {rep % 2, (rep / 2) % 2, 1};
      const gsim::GaussianState s =
          gsim::apply_flo(gsim::fock_basis_state(bits), q);
      const foracle::ExactQuantities exact = foracle::exact_quantities(
          foracle::dense_apply_flo(q, foracle::dense_fock_state(bits)));
      for (int index = 0; index < 8; ++index) {
        // Mode j corresponds to bit n - 1 - j of the amplitude index.
        std::vector<int> outcome = {(index >> 2) & 1, (index >> 1) & 1,
                                    index & 1};
        worst = std::max(worst,
                         std::abs(gsim::fock_probability(s, outcome) -
                                  exact.fock_probabilities(index)));
      }
      worst = std::max(worst, operator_norm(ComplexMatrix(
                                  gsim::rdm_from_covariance(s).D -
                                  exact.rdm)));
      worst = std::max(
          worst, operator_norm(RealMatrix(s.gamma - exact.covariance)));
      ok = worst < 1e-9;
    }
    check(checks, "simulator matches the dense oracle (probabilities, RDM, "
                  "covariance)",
          ok, "worst " + io::format_real(worst));
  }

  {  // Bogoliubov blocks: round trip and unitarity.
    rng::Stream stream(kSeed, 4);
    bool ok = true;
    for (int rep = 0; rep < 10 && ok; ++rep) {
      const florep::ActiveFlo q = florep::make_active(
          matlin::haar_special_orthogonal(8, stream));
      const florep::BogoliubovForm b = florep::to_bogoliubov(q);
      ok = operator_norm(RealMatrix(florep::from_bogoliubov(b).Q - q.Q)) <
           1e-12;
      ComplexMatrix block(8, 8);
      block.topLeftCorner(4, 4) = b.alpha;
      block.topRightCorner(4, 4) = b.beta.conjugate();
      block.bottomLeftCorner(4, 4) = b.beta;
      block.bottomRightCorner(4, 4) = b.alpha.conjugate();
      ok = ok && operator_norm(ComplexMatrix(
                     block.adjoint() * block -
                     ComplexMatrix::Identity(8, 8))) < 1e-12;
    }
    check(checks, "Bogoliubov blocks round-trip and are unitary", ok);
  }

  {  // Gate compilation recomposes to the source rotation.
    rng::Stream stream(kSeed, 5);
    bool ok = true;
    for (int rep = 0; rep < 5 && ok; ++rep) {
      const florep::PassiveFlo p =
          florep::make_passive(matlin::haar_unitary(3, stream));
      const florep::ActiveFlo q = florep::make_active(
          matlin::haar_special_orthogonal(6, stream));
      ok = operator_norm(RealMatrix(
               florep::recompose_gates(florep::compile_to_gates(p), 3).Q -
               florep::embed_passive(p).Q)) < 1e-8 &&
           operator_norm(RealMatrix(
               florep::recompose_gates(florep::compile_to_gates(q), 3).Q -
               q.Q)) < 1e-8;
    }
    check(checks, "gate compilation recomposes to the source rotation", ok);
  }

  {  // Choi covariance exposes the one-body block.
    rng::Stream stream(kSeed, 6);
    bool ok = true;
    for (int rep = 0; rep < 5 && ok; ++rep) {
      RealMatrix q = matlin::haar_special_orthogonal(6, stream);
      if (rep % 2 == 1) q.row(0) = -q.row(0);
      RealMatrix s = RealMatrix::Zero(6, 6);
      for (int j = 0; j < 6; ++j) s(j, j) = (j % 2 == 0) ? -1.0 : 1.0;
      const RealMatrix block = gsim::fepr_covariance_of(florep::make_active(q))
                                   .gamma.topRightCorner(6, 6);
      ok = operator_norm(RealMatrix(block - q * s)) < 1e-12;
    }
    check(checks, "Choi covariance block equals Q S", ok);
  }

  {  // Interferometric signal.
    bool ok = true;
    Real worst = 0.0;
    for (Real theta : {0.0, 0.9, -2.1}) {
      gsim::GaussianState state = gsim::vacuum_state(2);
      state = gsim::apply_flo(state, learn::pair_preparation_gate(2));
      ComplexMatrix phase = ComplexMatrix::Identity(2, 2);
      phase(0, 0) = std::polar(1.0, theta);
      state = gsim::apply_flo(state, embed_unitary(phase));
      for (Real phi : {0.0, kPi / 2, 1.3}) {
        worst = std::max(worst,
                         std::abs(learn::quadrature_expectation(state, phi) -
                                  std::cos(theta - phi)));
      }
    }
    ok = worst < 1e-12;
    check(checks, "interferometric signal follows cos(theta - phi)", ok,
          "worst " + io::format_real(worst));
  }

  {  // Shadow estimators (fixed-seed statistical smoke checks).
    rng::Stream stream(kSeed, 7);
    const ComplexMatrix u = matlin::haar_unitary(3, stream);
    const florep::ActiveFlo truth = embed_unitary(u);
    FloBlackBox box(truth);
    learn::ExperimentSpec spec;
    spec.initial_bits = {1, 0, 0};
    spec.items = learn::single_query();
    const learn::SlaterEstimate slater =
        learn::slater_tomo(box, spec, 20000, 1, rng::derive(kSeed, 8));
    const ComplexMatrix d =
        gsim::rdm_from_covariance(
            gsim::apply_flo(gsim::fock_basis_state({1, 0, 0}), truth))
            .D;
    const Real slater_err = operator_norm(ComplexMatrix(
        0.5 * (slater.mean + slater.mean.adjoint()) - d));
    bool ok = slater_err < 0.1 && box.ledger().total_queries == 20000;

    FloBlackBox so_box(truth);
    spec.initial_bits = {0, 0, 0};
    const learn::GaussianEstimate gauss =
        learn::gaussian_tomo(so_box, spec, 20000, rng::derive(kSeed, 9));
    const RealMatrix gamma =
        gsim::apply_flo(gsim::vacuum_state(3), truth).gamma;
    const Real gauss_err = operator_norm(RealMatrix(gauss.mean - gamma));
    ok = ok && gauss_err < 0.25 && so_box.ledger().total_queries == 20000;
    check(checks, "shadow means converge on fixed seeds", ok,
          "slater " + io::format_real(slater_err) + ", gauss " +
              io::format_real(gauss_err));
  }

  {  // Sample schedules.
    shadows::SampleParams slater;
    slater.n = 6;
    slater.eta = 2;
    slater.eps = 0.25;
    slater.delta = 0.1;
    shadows::SampleParams cov;
    cov.n = 4;
    cov.eps = 0.5;
    cov.delta = 0.1;
    shadows::SampleParams phase;
    phase.eps = 0.1;
    phase.delta = 0.05;
    const bool ok =
        shadows::sample_size(shadows::SampleKind::kSlaterTomo, slater) ==
            88244 &&
        shadows::sample_size(shadows::SampleKind::kCovariance, cov) == 2599 &&
        shadows::sample_size(shadows::SampleKind::kPhase, phase) == 4301;
    check(checks, "sample schedules match their closed forms", ok);
  }

  {  // Ledger accounting and bit-for-bit reproducibility.
    rng::Stream stream(kSeed, 10);
    const ComplexMatrix u = matlin::haar_unitary(2, stream);
    FloBlackBox first(embed_unitary(u));
    FloBlackBox second(embed_unitary(u));
    const florep::PassiveFlo a =
        learn::passive_tomo_counted(first, 2000, 500, rng::derive(kSeed, 11),
                                    {});
    const florep::PassiveFlo b =
        learn::passive_tomo_counted(second, 2000, 500, rng::derive(kSeed, 11),
                                    {});
    const bool ok =
        (a.U - b.U).cwiseAbs().maxCoeff() == 0.0 &&
        first.ledger().total_queries == 2 * 2 * 2000 + 2 * 500 &&
        first.ledger().total_queries == second.ledger().total_queries;
    check(checks, "learners reproduce bit for bit with exact ledgers", ok);
  }

  {  // Synthetic bootstrap follows the doubling schedule.
    rng::Stream stream(kSeed, 12);
    const ComplexMatrix truth = matlin::haar_unitary(3, stream);
    const learn::PassiveBaseFn base =
        [&truth](FloBlackBox& box, Real eps0, Real, std::uint64_t seed,
                 const learn::ChannelItems& channel) {
          learn::ExperimentSpec spec;
          spec.initial_bits.assign(3, 0);
          spec.items = channel;
          spec.stage = "synthetic";
          rng::Stream run_stream(seed, 1);
          box.run(spec, run_stream);
          ComplexMatrix acc = ComplexMatrix::Identity(3, 3);
          for (const learn::ChannelItem& item : channel) {
            if (std::holds_alternative<learn::QueryTag>(item)) {
              acc = truth * acc;
            } else {
              acc = florep::extract_passive(
                        std::get<florep::ActiveFlo>(item))
                        .U *
                    acc;
            }
          }
          rng::Stream perturb(seed, 0);
          return florep::make_passive(matlin::svd_round_unitary(
              acc * near_identity_unitary(3, 0.8 * eps0, perturb)));
        };
    FloBlackBox box(embed_unitary(truth));
    const learn::PassiveBootstrapResult result =
        learn::bootstrap_passive(box, 0.01, 0.1, rng::derive(kSeed, 13),
                                 base);
    bool ok = result.trace.size() == 8;
    for (std::size_t t = 0; ok && t < result.trace.size(); ++t) {
      ok = result.trace[t].p == (std::int64_t{1} << t);
    }
    const Real err =
        operator_norm(ComplexMatrix(result.estimate.U - truth));
    ok = ok && err <= 0.01;
    check(checks, "synthetic bootstrap reaches eps on the doubling schedule",
          ok, "err " + io::format_real(err));
  }

  {  // Diamond distance: faithful, bounded, Lipschitz in the rotation.
    rng::Stream stream(kSeed, 14);
    bool ok = true;
    for (int rep = 0; rep < 5 && ok; ++rep) {
      const RealMatrix q = matlin::haar_special_orthogonal(6, stream);
      RealMatrix g(6, 6);
      for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) g(r, c) = stream.gaussian();
      }
      const RealMatrix a = 0.02 * (g - g.transpose());
      const RealMatrix r = matlin::svd_round_orthogonal(
          RealMatrix(q + q * a));
      const florep::ActiveFlo q1 = florep::make_active(q);
      const florep::ActiveFlo q2 = florep::make_active(r);
      const Real d = foracle::diamond_distance(q1, q2);
      ok = foracle::diamond_distance(q1, q1) < 1e-12 && d >= 0.0 &&
           d <= 1.0 &&
           d <= 3.0 * operator_norm(RealMatrix(q - r)) + 1e-9;
    }
    check(checks, "diamond distance is faithful, bounded, and Lipschitz", ok);
  }

  return checks;
}

int run_verify() {
  const std::vector<VerifyCheck> checks = run_verify_suite();
  bool all = true;
  for (const VerifyCheck& c : checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    all = all && c.passed;
  }
  std::cout << (all ? "verify: all checks passed\n"
                    : "verify: FAILURES detected\n");
  return all ? 0 : 1;
}

int run(const io::ScenarioConfig& config) {
  io::validate_config(config);
  if (config.scenario == "verify") return run_verify();

  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);

  florep::ActiveFlo first_truth;
  ResultRows rows;
  if (config.scenario == "slater") {
    rows = run_slater(config, &first_truth);
  } else if (config.scenario == "gauss") {
    rows = run_gauss(config, &first_truth);
  } else if (config.scenario == "passive") {
    rows = run_passive(config, &first_truth);
  } else if (config.scenario == "active") {
    rows = run_active(config, &first_truth);
  } else if (config.scenario == "choi") {
    rows = run_choi(config, &first_truth);
  } else if (config.scenario == "phase") {
    rows = run_phase(config, &first_truth);
  } else {
    rows = run_bootstrap_sweep(config, out_dir, &first_truth);
  }

  std::string csv = io::results_csv_header();
  io::Json reports = io::Json::array();
  for (const auto& [report, trial] : rows) {
    csv += io::results_csv_row(report, trial);
    reports.push_back(io::report_to_json(report));
  }
  io::write_file((out_dir / "results.csv").string(), csv);
  io::Json top;
  top["config"] = io::config_to_json(config);
  top["reports"] = std::move(reports);
  io::write_file((out_dir / "report.json").string(), top.dump(2) + "\n");

  if (!config.export_truth.empty() && first_truth.n() > 0) {
    io::export_ground_truth(config.export_truth, first_truth);
  }
  std::cout << "wrote " << (out_dir / "results.csv").string() << " ("
            << rows.size() << " rows)\n";
  return 0;
}

}  // namespace
}  // namespace climain
}  // namespace flo

int main(int argc, char** argv) {
  using flo::io::ScenarioConfig;
  ScenarioConfig config;
  bool out_dir_explicit = false;

  // First pass: load --config before binding flags so flags override it.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      config_path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    }
  }
  if (!config_path.empty()) {
    try {
      const flo::io::Json j = flo::io::Json::parse(
          flo::io::read_file(config_path));
      config = flo::io::config_from_json(j);
      out_dir_explicit = j.contains("out_dir");
    } catch (const flo::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const flo::io::Json::parse_error& e) {
      std::cerr << "error: config " << config_path << ": " << e.what()
                << "\n";
      return 1;
    }
  }

  CLI::App app{"flolearn: simulate and statistically validate learners for "
               "fermionic-linear-optics unitaries"};
  app.require_subcommand(0, 1);
  std::string config_path_dummy;
  app.add_option("--config", config_path_dummy,
                 "JSON configuration file (explicit flags override it)");

  std::vector<CLI::Option*> out_dir_options;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--n", config.n, "mode count");
    cmd->add_option("--eta", config.eta, "particle number (slater scenario)");
    cmd->add_option("--eps", config.eps,
                    "target precision; comma-separated list for "
                    "bootstrap-sweep")
        ->delimiter(',');
    cmd->add_option("--delta", config.delta, "failure probability");
    cmd->add_option("--seed", config.seed, "master seed");
    cmd->add_option("--trials", config.trials, "independent trials");
    cmd->add_option("--constant-scale", config.constant_scale,
                    "multiplier on the theoretical sample-count constants");
    cmd->add_option("--min-samples", config.min_samples,
                    "floor applied to every derived sample count");
    out_dir_options.push_back(
        cmd->add_option("--out-dir", config.out_dir, "artifact directory"));
    cmd->add_option("--oracle-cap", config.oracle_cap,
                    "mode limit for dense-oracle diamond distances");
    cmd->add_option("--ground-truth", config.ground_truth,
                    "matrix-JSON file with the hidden rotation to use");
    cmd->add_option("--export-truth", config.export_truth,
                    "write the trial-0 hidden rotation to this file");
    cmd->add_flag("--wall-clock", config.wall_clock,
                  "record real wall times (reruns stop being byte-identical)");
  };

  // The same options are accepted at the top level so that a run driven by
  // --config can still override individual values without repeating the
  // scenario name.
  add_common(&app);

  static const char* kScenarios[] = {"slater", "gauss",  "passive",
                                     "active", "choi",   "phase",
                                     "bootstrap-sweep", "verify"};
  static const char* kDescriptions[] = {
      "Slater-determinant tomography from U(n) shadows",
      "Gaussian covariance tomography from SO(2n) shadows",
      "constant-precision passive base learner",
      "constant-precision active base learner",
      "Choi-state base learner (fEPR resource)",
      "interferometric global-phase estimation",
      "Heisenberg-scaling bootstrap, sweeping over eps values",
      "run the built-in invariant suite and exit"};
  for (int i = 0; i < 8; ++i) {
    CLI::App* sub = app.add_subcommand(kScenarios[i], kDescriptions[i]);
    add_common(sub);
    if (std::string(kScenarios[i]) == "bootstrap-sweep") {
      sub->add_option("--scenario", config.sweep_base,
                      "base learner to lift (passive|active|choi)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::vector<CLI::App*> chosen = app.get_subcommands();
  if (!chosen.empty()) config.scenario = chosen.front()->get_name();
  if (config.scenario.empty()) {
    std::cerr << "error: no scenario selected (pass a subcommand or a "
                 "--config file with a scenario field)\n"
              << app.help();
    return 1;
  }
  for (const CLI::Option* option : out_dir_options) {
    out_dir_explicit = out_dir_explicit || option->count() > 0;
  }
  if (!out_dir_explicit) {
    if (const char* env = std::getenv("FLOLEARN_OUT_DIR")) {
      config.out_dir = env;
    }
  }

  try {
    return flo::climain::run(config);
  } catch (const flo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
