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

#include "flo/learn.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <utility>

#include <Eigen/Eigenvalues>

#include "flo/matlin.hpp"
#include "flo/shadows.hpp"

namespace flo {
namespace learn {

namespace {

constexpr std::int64_t kBlockSize = 1024;

int modes_of(const ExperimentSpec& spec, int box_n) {
  return spec.fepr_initial ? 2 * box_n
                           : static_cast<int>(spec.initial_bits.size());
}

ChannelItems channel_or_default(const ChannelItems& channel) {
  return channel.empty() ? single_query() : channel;
}

// Median of the values, averaging the middle pair for even counts. Mutates
// its argument.
Real median_in_place(std::vector<Real>& values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const Real upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const Real lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

// Deterministic blocked mean of per-index estimates run through worker
// copies of the box. Mirrors the shadows collector exactly (1024-item
// blocks, per-index streams (seed, i), block partials merged in order) so
// that a box wrapping a plain state preparation reproduces the shadows
// module bit for bit. Worker ledgers are absorbed in block order.
template <typename Matrix, typename ItemFn>
Matrix box_blocked_mean(FloBlackBox& box, const ExperimentSpec& proto,
                        std::int64_t count, std::uint64_t seed, int rows,
                        int cols, bool parallel, const ItemFn& item) {
  if (count < 1) throw InvalidInput("learn: sample count must be >= 1");
  const std::int64_t blocks = (count + kBlockSize - 1) / kBlockSize;
  std::vector<Matrix> partial(static_cast<std::size_t>(blocks));
  std::vector<QueryLedger> ledgers(static_cast<std::size_t>(blocks));
  std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t block = 0; block < blocks; ++block) {
    try {
      FloBlackBox worker = box.clone_fresh();
      ExperimentSpec spec = proto;
      Matrix local = Matrix::Zero(rows, cols);
      const std::int64_t begin = block * kBlockSize;
      const std::int64_t end = std::min(count, begin + kBlockSize);
      for (std::int64_t i = begin; i < end; ++i) {
        rng::Stream stream(seed, static_cast<std::uint64_t>(i));
        local += item(worker, spec, i, stream);
      }
      partial[static_cast<std::size_t>(block)] = std::move(local);
      ledgers[static_cast<std::size_t>(block)] = worker.ledger();
    } catch (...) {
#pragma omp critical(flo_learn_failure)
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  Matrix total = Matrix::Zero(rows, cols);
  for (const Matrix& p : partial) total += p;
  for (const QueryLedger& l : ledgers) box.absorb(l);
  return total / static_cast<Real>(count);
}

// U(m)-shadow mean of the state prepared by `source` (plus a fresh Haar
// rotation per sample). Draw order per index matches
// shadows::draw_un_sample.
ComplexMatrix collect_un_box_mean(FloBlackBox& box,
                                  const ExperimentSpec& source,
                                  std::int64_t count, std::uint64_t seed,
                                  bool parallel) {
  const int m = modes_of(source, box.n());
  ExperimentSpec proto = source;
  proto.measurement = Measurement::kFock;
  proto.items.emplace_back(
      florep::make_active(RealMatrix::Identity(2 * m, 2 * m)));
  return box_blocked_mean<ComplexMatrix>(
      box, proto, count, seed, m, m, parallel,
      [m](FloBlackBox& worker, ExperimentSpec& spec, std::int64_t,
          rng::Stream& stream) {
        ComplexMatrix v = matlin::haar_unitary(m, stream);
        spec.items.back() =
            florep::embed_passive(florep::make_passive(v.conjugate()));
        const ExperimentOutcome out = worker.run(spec, stream);
        return shadows::un_estimate(
            shadows::UnShadowSample{std::move(v), out.bits});
      });
}

// SO(2m)-shadow mean; draw order matches shadows::draw_so_sample.
RealMatrix collect_so_box_mean(FloBlackBox& box, const ExperimentSpec& source,
                               std::int64_t count, std::uint64_t seed,
                               bool parallel) {
  const int m = modes_of(source, box.n());
  ExperimentSpec proto = source;
  proto.measurement = Measurement::kFock;
  proto.items.emplace_back(
      florep::make_active(RealMatrix::Identity(2 * m, 2 * m)));
  return box_blocked_mean<RealMatrix>(
      box, proto, count, seed, 2 * m, 2 * m, parallel,
      [m](FloBlackBox& worker, ExperimentSpec& spec, std::int64_t,
          rng::Stream& stream) {
        RealMatrix r = matlin::haar_special_orthogonal(2 * m, stream);
        spec.items.back() = florep::make_active(r);
        const ExperimentOutcome out = worker.run(spec, stream);
        return shadows::so_estimate(
            shadows::SoShadowSample{std::move(r), out.bits});
      });
}

// Mean quadrature value of the fixed experiment `proto`.
Real collect_quadrature_mean(FloBlackBox& box, const ExperimentSpec& proto,
                             std::int64_t count, std::uint64_t seed,
                             bool parallel) {
  const RealMatrix mean = box_blocked_mean<RealMatrix>(
      box, proto, count, seed, 1, 1, parallel,
      [](FloBlackBox& worker, ExperimentSpec& spec, std::int64_t,
         rng::Stream& stream) {
        RealMatrix cell(1, 1);
        cell(0, 0) = static_cast<Real>(worker.run(spec, stream).value);
        return cell;
      });
  return mean(0, 0);
}

// Top eigenvector of a Hermitian matrix (largest eigenvalue).
ComplexVector top_eigenvector(const ComplexMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian);
  if (solver.info() != Eigen::Success) {
    throw NumericalDegeneracy("learn: eigensolver failed to converge");
  }
  return solver.eigenvectors().col(hermitian.rows() - 1);
}

// w^p by binary exponentiation.
template <typename Matrix>
Matrix matrix_power(Matrix w, std::int64_t p) {
  Matrix result = Matrix::Identity(w.rows(), w.cols());
  while (p > 0) {
    if (p & 1) result = w * result;
    w = Matrix(w * w);
    p >>= 1;
  }
  return result;
}

void validate_bootstrap_inputs(Real eps, Real delta,
                               const BootstrapOptions& options) {
  if (!(eps > 0.0) || !(eps <= 1.0)) {
    throw InvalidInput("bootstrap: eps must lie in (0, 1]");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw InvalidInput("bootstrap: delta must lie in (0, 1)");
  }
  if (!(options.eps0 > 0.0)) {
    throw InvalidInput("bootstrap: eps0 must be positive");
  }
  if (options.allow_relaxed_eps0) {
    if (!(options.eps0 < 1.0 / (3.0 * kPi))) {
      throw InvalidInput("bootstrap: relaxed eps0 must stay below 1/(3 pi)");
    }
  } else if (options.eps0 > 0.02 + 1e-15) {
    throw InvalidInput(
        "bootstrap: eps0 above 1/50 requires allow_relaxed_eps0");
  }
}

int bootstrap_rounds(Real eps) {
  const int t_max =
      eps >= 1.0 ? 0 : static_cast<int>(std::ceil(std::log2(1.0 / eps)));
  if (t_max > 30) {
    throw InvalidInput("bootstrap: target precision below 2^-30 unsupported");
  }
  return t_max;
}

}  // namespace

ChannelItems single_query() { return ChannelItems{QueryTag{}}; }

void QueryLedger::merge(const QueryLedger& other) {
  total_queries += other.total_queries;
  for (const auto& [stage, count] : other.per_stage) per_stage[stage] += count;
  experiments += other.experiments;
  choi_experiments += other.choi_experiments;
  gates_per_experiment_max =
      std::max(gates_per_experiment_max, other.gates_per_experiment_max);
}

std::int64_t gate_budget(int modes) {
  if (modes < 1) throw InvalidInput("gate_budget: modes must be >= 1");
  const std::int64_t m = modes;
  return 2 * m * m + 1;
}

FloBlackBox::FloBlackBox(const florep::ActiveFlo& hidden) : hidden_(hidden) {
  if (hidden_.n() < 1) {
    throw InvalidInput("FloBlackBox: hidden unitary needs at least one mode");
  }
  hidden_ancilla_ = embed_identity_modes(hidden_, hidden_.n() + 1);
  hidden_choi_ = gsim::choi_system_embedding_interleaved(hidden_);
}

FloBlackBox FloBlackBox::clone_fresh() const {
  FloBlackBox copy(*this);
  copy.ledger_ = QueryLedger{};
  return copy;
}

void FloBlackBox::absorb(const QueryLedger& worker_ledger) {
  ledger_.merge(worker_ledger);
}

ExperimentOutcome FloBlackBox::run(const ExperimentSpec& spec,
                                   rng::Stream& stream) {
  const int n = hidden_.n();
  gsim::GaussianState state;
  int m = 0;
  if (spec.fepr_initial) {
    if (!spec.initial_bits.empty()) {
      throw InvalidInput("run_experiment: fEPR experiments take no bits");
    }
    if (spec.measurement != Measurement::kFock) {
      throw InvalidInput("run_experiment: fEPR experiments are Fock-measured");
    }
    m = 2 * n;
    state = gsim::choi_register_to_interleaved(gsim::fepr_state(n));
  } else {
    m = static_cast<int>(spec.initial_bits.size());
    if (m != n && m != n + 1) {
      throw InvalidInput(
          "run_experiment: initial bits must cover n or n + 1 modes");
    }
    state = gsim::fock_basis_state(spec.initial_bits);
  }
  if (spec.measurement != Measurement::kFock && m < 2) {
    throw InvalidInput("run_experiment: quadrature needs at least two modes");
  }

  std::int64_t queries = 0;
  std::int64_t gates = 0;
  for (const ChannelItem& item : spec.items) {
    if (std::holds_alternative<QueryTag>(item)) {
      if (spec.fepr_initial) {
        state = gsim::apply_flo(state, hidden_choi_);
      } else if (m == n) {
        state = gsim::apply_flo(state, hidden_);
      } else {
        state = gsim::apply_flo(state, hidden_ancilla_);
      }
      ++queries;
    } else {
      const florep::ActiveFlo& known = std::get<florep::ActiveFlo>(item);
      if (spec.fepr_initial && known.n() == n) {
        state = gsim::apply_flo(state,
                                gsim::choi_system_embedding_interleaved(known));
      } else if (known.n() == m) {
        state = gsim::apply_flo(state, known);
      } else {
        throw InvalidInput("run_experiment: known item mode count mismatch");
      }
      gates += gate_budget(known.n() == m ? m : n);
    }
  }

  ExperimentOutcome outcome;
  if (spec.measurement == Measurement::kFock) {
    outcome.bits = gsim::measure_fock(state, stream);
  } else {
    const Real phi =
        spec.measurement == Measurement::kQuadratureX ? 0.0 : kPi / 2.0;
    state = gsim::apply_flo(state, quadrature_rotation(m, phi));
    gates += gate_budget(m);
    outcome.bits = gsim::measure_fock(state, stream);
    outcome.value = outcome.bits.front() + outcome.bits.back() - 1;
  }

  if (queries > 0) {
    ledger_.total_queries += queries;
    ledger_.per_stage[spec.stage] += queries;
    ledger_.experiments += 1;
    if (spec.fepr_initial) ledger_.choi_experiments += 1;
    ledger_.gates_per_experiment_max =
        std::max(ledger_.gates_per_experiment_max, gates);
  }
  return outcome;
}

ExperimentOutcome run_experiment(FloBlackBox& box, const ExperimentSpec& spec,
                                 rng::Stream& stream) {
  return box.run(spec, stream);
}

florep::ActiveFlo embed_identity_modes(const florep::ActiveFlo& q, int m) {
  const int n = q.n();
  if (m < n) {
    throw InvalidInput("embed_identity_modes: target mode count too small");
  }
  if (m == n) return q;
  RealMatrix big = RealMatrix::Identity(2 * m, 2 * m);
  big.block(0, 0, n, n) = q.Q.topLeftCorner(n, n);
  big.block(0, m, n, n) = q.Q.topRightCorner(n, n);
  big.block(m, 0, n, n) = q.Q.bottomLeftCorner(n, n);
  big.block(m, m, n, n) = q.Q.bottomRightCorner(n, n);
  return florep::make_active(big);
}

florep::ActiveFlo pair_preparation_gate(int m) {
  if (m < 2) {
    throw InvalidInput("pair_preparation_gate: needs at least two modes");
  }
  const Real s = 1.0 / std::sqrt(2.0);
  ComplexMatrix alpha = ComplexMatrix::Identity(m, m);
  ComplexMatrix beta = ComplexMatrix::Zero(m, m);
  alpha(0, 0) = s;
  alpha(m - 1, m - 1) = s;
  beta(0, m - 1) = s;
  beta(m - 1, 0) = -s;
  return florep::from_bogoliubov(florep::make_bogoliubov(alpha, beta));
}

florep::ActiveFlo quadrature_rotation(int m, Real phi) {
  if (m < 2) {
    throw InvalidInput("quadrature_rotation: needs at least two modes");
  }
  const Real s = 1.0 / std::sqrt(2.0);
  const Complex twist = std::polar(s, -phi);
  ComplexMatrix alpha = ComplexMatrix::Identity(m, m);
  ComplexMatrix beta = ComplexMatrix::Zero(m, m);
  alpha(0, 0) = s;
  alpha(m - 1, m - 1) = s;
  beta(0, m - 1) = twist;
  beta(m - 1, 0) = -twist;
  return florep::from_bogoliubov(florep::make_bogoliubov(alpha, beta));
}

Real quadrature_expectation(const gsim::GaussianState& state, Real phi) {
  const int m = state.n;
  if (m < 2) {
    throw InvalidInput("quadrature_expectation: needs at least two modes");
  }
  const Real c = std::cos(phi);
  const Real s = std::sin(phi);
  const gsim::QuadraticObservable observable = {
      {0, 2 * m - 1, -0.5 * c},
      {m - 1, m, 0.5 * c},
      {0, m - 1, 0.5 * s},
      {m, 2 * m - 1, -0.5 * s},
  };
  return gsim::quadratic_expectation(state, observable);
}

Real aligned_phase(const ComplexMatrix& u_star, const ComplexMatrix& u) {
  if (u_star.rows() != u_star.cols() || u.rows() != u.cols() ||
      u_star.rows() != u.rows() || u_star.rows() < 1) {
    throw InvalidInput("aligned_phase: square matrices of equal size needed");
  }
  const auto objective = [&](Real theta) {
    return operator_norm(
        ComplexMatrix(std::polar(1.0, theta) * u_star - u));
  };
  constexpr int kGrid = 1024;
  Real best_theta = 0.0;
  Real best_value = objective(best_theta);
  for (int k = 0; k < kGrid; ++k) {
    const Real theta = -kPi + (2.0 * kPi * (k + 1)) / kGrid;
    const Real value = objective(theta);
    if (value < best_value) {
      best_value = value;
      best_theta = theta;
    }
  }
  const Real golden = (std::sqrt(5.0) - 1.0) / 2.0;
  Real lo = best_theta - 2.0 * kPi / kGrid;
  Real hi = best_theta + 2.0 * kPi / kGrid;
  Real x1 = hi - golden * (hi - lo);
  Real x2 = lo + golden * (hi - lo);
  Real f1 = objective(x1);
  Real f2 = objective(x2);
  for (int iter = 0; iter < 60; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = objective(x2);
    }
  }
  return 0.5 * (lo + hi);
}

SlaterEstimate slater_tomo(FloBlackBox& box, const ExperimentSpec& source,
                           std::int64_t samples, int eta, std::uint64_t seed,
                           bool parallel) {
  if (source.measurement != Measurement::kFock) {
    throw InvalidInput("slater_tomo: source must be Fock-measured");
  }
  const int m = modes_of(source, box.n());
  if (eta < 0 || eta > m) {
    throw InvalidInput("slater_tomo: eta must lie in [0, n]");
  }
  SlaterEstimate estimate;
  estimate.mean = collect_un_box_mean(box, source, samples, seed, parallel);
  const ComplexMatrix hermitized =
      0.5 * (estimate.mean + estimate.mean.adjoint());
  estimate.projector = eta == 0
                           ? ComplexMatrix::Zero(m, m)
                           : matlin::svd_round_rank_projector(hermitized, eta);
  return estimate;
}

GaussianEstimate gaussian_tomo(FloBlackBox& box, const ExperimentSpec& source,
                               std::int64_t samples, std::uint64_t seed,
                               bool parallel) {
  if (source.measurement != Measurement::kFock) {
    throw InvalidInput("gaussian_tomo: source must be Fock-measured");
  }
  const int m = modes_of(source, box.n());
  const RealMatrix raw =
      collect_so_box_mean(box, source, samples, seed, parallel);
  GaussianEstimate estimate;
  estimate.mean = 0.5 * (raw - raw.transpose());
  const matlin::SkewNormalForm form = matlin::skew_normal_form(estimate.mean);
  const RealMatrix gamma_star = form.W * florep::symplectic_form(m) *
                                form.W.transpose();
  estimate.rounded = gsim::make_state(m, gamma_star);
  estimate.rotation = florep::make_active(form.W);
  return estimate;
}

florep::PassiveFlo phaseless_tomo_counted(FloBlackBox& box,
                                          std::int64_t samples_per_column,
                                          std::uint64_t seed,
                                          const PhaselessOptions& options) {
  const int n = box.n();
  const ChannelItems channel = channel_or_default(options.channel);
  ComplexMatrix assembled(n, n);
  for (int j = 0; j < n; ++j) {
    ExperimentSpec source;
    source.initial_bits.assign(n, 0);
    source.initial_bits[static_cast<std::size_t>(j)] = 1;
    source.items = channel;
    source.stage = options.stage;
    const ComplexMatrix mean =
        collect_un_box_mean(box, source, samples_per_column,
                            rng::derive(seed, static_cast<std::uint64_t>(j)),
                            options.parallel);
    const ComplexMatrix hermitized = 0.5 * (mean + mean.adjoint());
    // The shadow mean estimates the conjugated orbital; conjugating back
    // aligns the assembled column with the channel's one-body matrix.
    assembled.col(j) = top_eigenvector(hermitized).conjugate();
  }
  return florep::make_passive(matlin::svd_round_unitary(assembled));
}

florep::PassiveFlo phaseless_tomo(FloBlackBox& box, Real eps, Real delta,
                                  std::uint64_t seed,
                                  const PhaselessOptions& options) {
  shadows::SampleParams params;
  params.n = box.n();
  params.eps = eps;
  params.delta = delta;
  params.constant_scale = options.constant_scale;
  params.single_particle_constant = options.single_particle_constant;
  const std::int64_t per_column = std::max(
      options.min_samples,
      shadows::sample_size(shadows::SampleKind::kSingleParticle, params));
  return phaseless_tomo_counted(box, per_column, seed, options);
}

florep::PassiveFlo column_phases(const florep::PassiveFlo& v,
                                 const florep::PassiveFlo& g) {
  const int n = v.n();
  if (g.n() != n) throw InvalidInput("column_phases: dimension mismatch");
  const ComplexMatrix f = florep::dft_matrix(n).U;
  const ComplexMatrix p = (g.U.adjoint() * v.U).cwiseQuotient(f);
  ComplexMatrix ratios(n, n);
  for (int j = 0; j < n; ++j) {
    if (std::abs(p(j, 0)) < 1e-12) {
      throw NumericalDegeneracy("column_phases: degenerate reference entry");
    }
    ratios.row(j) = p.row(j) / p(j, 0);
  }
  ComplexMatrix psi_dag = ComplexMatrix::Zero(n, n);
  std::vector<Real> re(static_cast<std::size_t>(n));
  std::vector<Real> im(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      re[static_cast<std::size_t>(j)] = ratios(j, k).real();
      im[static_cast<std::size_t>(j)] = ratios(j, k).imag();
    }
    const Real alpha = std::atan2(median_in_place(im), median_in_place(re));
    psi_dag(k, k) = std::polar(1.0, -alpha);
  }
  return florep::make_passive(ComplexMatrix(v.U * psi_dag));
}

Real phase_est(FloBlackBox& box, const ChannelItems& channel,
               std::int64_t samples_per_quadrature, std::uint64_t seed,
               bool parallel, const std::string& stage) {
  const int m = box.n() + 1;
  ExperimentSpec proto;
  proto.initial_bits.assign(static_cast<std::size_t>(m), 0);
  proto.items.emplace_back(pair_preparation_gate(m));
  for (const ChannelItem& item : channel_or_default(channel)) {
    if (std::holds_alternative<QueryTag>(item)) {
      proto.items.emplace_back(QueryTag{});
    } else {
      proto.items.emplace_back(
          embed_identity_modes(std::get<florep::ActiveFlo>(item), m));
    }
  }
  proto.stage = stage;
  proto.measurement = Measurement::kQuadratureX;
  const Real mean_x = collect_quadrature_mean(
      box, proto, samples_per_quadrature, rng::derive(seed, 0), parallel);
  proto.measurement = Measurement::kQuadratureY;
  const Real mean_y = collect_quadrature_mean(
      box, proto, samples_per_quadrature, rng::derive(seed, 1), parallel);
  return std::atan2(mean_y, mean_x);
}

Real phase_est_parity_pair(FloBlackBox& box, const ChannelItems& channel,
                           std::int64_t samples_per_quadrature,
                           std::uint64_t seed, bool parallel,
                           const std::string& stage) {
  const int n = box.n();
  if (n < 2) {
    throw InvalidInput("phase_est_parity_pair: needs at least two modes");
  }
  ExperimentSpec proto;
  proto.initial_bits.assign(static_cast<std::size_t>(n), 0);
  proto.items.emplace_back(pair_preparation_gate(n));
  for (const ChannelItem& item : channel_or_default(channel)) {
    proto.items.push_back(item);
  }
  proto.stage = stage;
  proto.measurement = Measurement::kQuadratureX;
  const Real mean_x = collect_quadrature_mean(
      box, proto, samples_per_quadrature, rng::derive(seed, 0), parallel);
  proto.measurement = Measurement::kQuadratureY;
  const Real mean_y = collect_quadrature_mean(
      box, proto, samples_per_quadrature, rng::derive(seed, 1), parallel);
  return 0.5 * std::atan2(mean_y, mean_x);
}

florep::PassiveFlo passive_tomo_counted(FloBlackBox& box,
                                        std::int64_t samples_per_column,
                                        std::int64_t samples_per_quadrature,
                                        std::uint64_t seed,
                                        const PassiveBaseOptions& options) {
  const int n = box.n();
  const ChannelItems channel = channel_or_default(options.channel);

  PhaselessOptions plain;
  plain.channel = channel;
  plain.stage = "phaseless";
  plain.parallel = options.parallel;
  const florep::PassiveFlo v = phaseless_tomo_counted(
      box, samples_per_column, rng::derive(seed, 10), plain);

  PhaselessOptions referenced = plain;
  referenced.channel.clear();
  referenced.channel.emplace_back(florep::embed_passive(
      florep::make_passive(florep::dft_matrix(n).U.adjoint())));
  referenced.channel.insert(referenced.channel.end(), channel.begin(),
                            channel.end());
  referenced.stage = "phaseless-dft";
  const florep::PassiveFlo g = phaseless_tomo_counted(
      box, samples_per_column, rng::derive(seed, 11), referenced);

  const florep::PassiveFlo u_star = column_phases(v, g);
  if (options.mode == PassiveMode::kSector) return u_star;

  ChannelItems phase_channel;
  phase_channel.emplace_back(
      florep::embed_passive(florep::make_passive(u_star.U.adjoint())));
  phase_channel.insert(phase_channel.end(), channel.begin(), channel.end());
  const Real theta =
      phase_est(box, phase_channel, samples_per_quadrature,
                rng::derive(seed, 12), options.parallel, "phase");
  return florep::make_passive(
      ComplexMatrix(std::polar(1.0, theta) * u_star.U));
}

florep::PassiveFlo passive_tomo_base(FloBlackBox& box, Real eps, Real delta,
                                     std::uint64_t seed,
                                     const PassiveBaseOptions& options) {
  shadows::SampleParams column;
  column.n = box.n();
  column.eps = eps / 175.0;
  column.delta = delta / 4.0;
  column.constant_scale = options.constant_scale;
  column.single_particle_constant = options.single_particle_constant;
  const std::int64_t per_column = std::max(
      options.min_samples,
      shadows::sample_size(shadows::SampleKind::kSingleParticle, column));

  std::int64_t per_quadrature = 1;
  if (options.mode == PassiveMode::kDiamond) {
    shadows::SampleParams phase;
    phase.n = box.n();
    phase.eps = eps;
    phase.delta = delta;
    phase.constant_scale = options.constant_scale;
    per_quadrature = std::max(
        options.min_samples,
        shadows::sample_size(shadows::SampleKind::kPhaseAlg5, phase));
  }
  return passive_tomo_counted(box, per_column, per_quadrature, seed, options);
}

florep::ActiveFlo active_tomo_base(FloBlackBox& box, Real eps, Real delta,
                                   std::uint64_t seed,
                                   const ActiveBaseOptions& options) {
  const int n = box.n();
  const Real c = eps / 2600.0;
  const Real stage_precision = c / std::sqrt(static_cast<Real>(n));
  const ChannelItems channel = channel_or_default(options.channel);

  shadows::SampleParams vacuum;
  vacuum.n = n;
  vacuum.eps = stage_precision;
  vacuum.delta = delta / 3.0;
  vacuum.constant_scale = options.constant_scale;
  const std::int64_t covariance_samples = std::max(
      options.min_samples,
      shadows::sample_size(shadows::SampleKind::kVacuumStage, vacuum));

  ExperimentSpec vacuum_source;
  vacuum_source.initial_bits.assign(static_cast<std::size_t>(n), 0);
  vacuum_source.items = channel;
  vacuum_source.stage = "vacuum";
  const GaussianEstimate stage1 =
      gaussian_tomo(box, vacuum_source, covariance_samples,
                    rng::derive(seed, 20), options.parallel);

  shadows::SampleParams column;
  column.n = n;
  column.eps = stage_precision;
  column.delta = delta / (6.0 * n);
  column.c = c;
  column.constant_scale = options.constant_scale;
  const std::int64_t per_column = std::max(
      options.min_samples,
      shadows::sample_size(shadows::SampleKind::kPerturbedRdm, column));

  shadows::SampleParams phase;
  phase.n = n;
  phase.eps = 200.0 * std::sqrt(2.0) * c;
  phase.delta = delta / 6.0;
  phase.constant_scale = options.constant_scale;
  const std::int64_t per_quadrature = std::max(
      options.min_samples,
      shadows::sample_size(shadows::SampleKind::kPhase, phase));

  PassiveBaseOptions residual;
  residual.mode = PassiveMode::kDiamond;
  residual.channel = channel;
  residual.channel.emplace_back(
      florep::make_active(RealMatrix(stage1.rotation.Q.transpose())));
  residual.parallel = options.parallel;
  const florep::PassiveFlo u_sharp = passive_tomo_counted(
      box, per_column, per_quadrature, rng::derive(seed, 21), residual);

  return florep::make_active(
      RealMatrix(stage1.rotation.Q * florep::embed_passive(u_sharp).Q));
}

florep::ActiveFlo choi_tomo_base(FloBlackBox& box, Real eps, Real delta,
                                 std::uint64_t seed,
                                 const ChoiBaseOptions& options) {
  const int n = box.n();
  shadows::SampleParams params;
  params.n = n;
  params.eps = eps;
  params.delta = delta;
  params.constant_scale = options.constant_scale;
  const std::int64_t samples = std::max(
      options.min_samples,
      shadows::sample_size(shadows::SampleKind::kChoi, params));

  ExperimentSpec source;
  source.fepr_initial = true;
  source.stage = "choi";
  for (const ChannelItem& item : channel_or_default(options.channel)) {
    if (std::holds_alternative<QueryTag>(item)) {
      source.items.emplace_back(QueryTag{});
    } else {
      const florep::ActiveFlo& known = std::get<florep::ActiveFlo>(item);
      source.items.emplace_back(
          known.n() == n ? gsim::choi_system_embedding_interleaved(known)
                         : known);
    }
  }

  const RealMatrix raw = collect_so_box_mean(
      box, source, samples, rng::derive(seed, 30), options.parallel);
  const RealMatrix skew = 0.5 * (raw - raw.transpose());
  const gsim::GaussianState as_register =
      gsim::choi_interleaved_to_register(gsim::GaussianState{2 * n, skew});
  const RealMatrix block = as_register.gamma.topRightCorner(2 * n, 2 * n);
  RealMatrix signs = RealMatrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < 2 * n; ++j) signs(j, j) = (j % 2 == 0) ? -1.0 : 1.0;
  return florep::make_active(
      RealMatrix(matlin::svd_round_orthogonal(block) * signs));
}

PassiveBaseFn make_passive_base(const PassiveBaseOptions& options) {
  return [options](FloBlackBox& box, Real eps, Real delta, std::uint64_t seed,
                   const ChannelItems& channel) {
    PassiveBaseOptions local = options;
    local.channel = channel;
    return passive_tomo_base(box, eps, delta, seed, local);
  };
}

ActiveBaseFn make_active_base(const ActiveBaseOptions& options) {
  return [options](FloBlackBox& box, Real eps, Real delta, std::uint64_t seed,
                   const ChannelItems& channel) {
    ActiveBaseOptions local = options;
    local.channel = channel;
    return active_tomo_base(box, eps, delta, seed, local);
  };
}

ActiveBaseFn make_choi_base(const ChoiBaseOptions& options) {
  return [options](FloBlackBox& box, Real eps, Real delta, std::uint64_t seed,
                   const ChannelItems& channel) {
    ChoiBaseOptions local = options;
    local.channel = channel;
    return choi_tomo_base(box, eps, delta, seed, local);
  };
}

PassiveBootstrapResult bootstrap_passive(
    FloBlackBox& box, Real eps, Real delta, std::uint64_t seed,
    const PassiveBaseFn& base, const BootstrapOptions& options,
    const florep::PassiveFlo* truth_for_trace) {
  if (!base) throw InvalidInput("bootstrap_passive: base learner required");
  validate_bootstrap_inputs(eps, delta, options);
  const int n = box.n();
  const int t_max = bootstrap_rounds(eps);

  florep::PassiveFlo v = florep::make_passive(ComplexMatrix::Identity(n, n));
  PassiveBootstrapResult result;
  for (int t = 0; t <= t_max; ++t) {
    const std::int64_t p = std::int64_t{1} << t;
    const Real delta_t =
        delta / std::pow(2.0, static_cast<Real>(t_max + 1 - t));
    const florep::ActiveFlo inverse_item = florep::embed_passive(
        florep::make_passive(ComplexMatrix(v.U.adjoint())));
    ChannelItems channel;
    channel.reserve(static_cast<std::size_t>(2 * p));
    for (std::int64_t k = 0; k < p; ++k) {
      channel.emplace_back(inverse_item);
      channel.emplace_back(QueryTag{});
    }
    const florep::PassiveFlo q_t =
        base(box, options.eps0, delta_t,
             rng::derive(seed, 100 + static_cast<std::uint64_t>(t)), channel);

    BootstrapTraceRow row;
    row.t = t;
    row.p = p;
    row.delta_t = delta_t;
    if (truth_for_trace != nullptr) {
      const ComplexMatrix target = matrix_power(
          ComplexMatrix(truth_for_trace->U * v.U.adjoint()), p);
      row.base_error = options.metric == BootstrapMetric::kPhaseInvariant
                           ? matlin::phase_distance(q_t.U, target)
                           : operator_norm(ComplexMatrix(q_t.U - target));
    }

    ComplexMatrix root_input = q_t.U;
    if (options.metric == BootstrapMetric::kPhaseInvariant) {
      root_input *= std::polar(1.0, -std::arg(root_input.trace()));
    }
    ComplexMatrix root;
    try {
      root = matlin::principal_root(root_input, static_cast<int>(p));
    } catch (const PreconditionViolation&) {
      throw PreconditionViolation(
          "bootstrap divergence: base estimate escaped the root branch");
    }
    v = florep::make_passive(
        matlin::svd_round_unitary(ComplexMatrix(root * v.U)));

    row.cumulative_queries = box.ledger().total_queries;
    result.trace.push_back(row);
  }
  result.estimate = v;
  return result;
}

ActiveBootstrapResult bootstrap_active(
    FloBlackBox& box, Real eps, Real delta, std::uint64_t seed,
    const ActiveBaseFn& base, const BootstrapOptions& options,
    const florep::ActiveFlo* truth_for_trace) {
  if (!base) throw InvalidInput("bootstrap_active: base learner required");
  if (options.metric == BootstrapMetric::kPhaseInvariant) {
    throw InvalidInput(
        "bootstrap_active: phase-invariant metric applies to passive "
        "estimates");
  }
  validate_bootstrap_inputs(eps, delta, options);
  const int n = box.n();
  const int t_max = bootstrap_rounds(eps);

  florep::ActiveFlo v =
      florep::make_active(RealMatrix::Identity(2 * n, 2 * n));
  ActiveBootstrapResult result;
  for (int t = 0; t <= t_max; ++t) {
    const std::int64_t p = std::int64_t{1} << t;
    const Real delta_t =
        delta / std::pow(2.0, static_cast<Real>(t_max + 1 - t));
    const florep::ActiveFlo inverse_item =
        florep::make_active(RealMatrix(v.Q.transpose()));
    ChannelItems channel;
    channel.reserve(static_cast<std::size_t>(2 * p));
    for (std::int64_t k = 0; k < p; ++k) {
      channel.emplace_back(inverse_item);
      channel.emplace_back(QueryTag{});
    }
    const florep::ActiveFlo q_t =
        base(box, options.eps0, delta_t,
             rng::derive(seed, 200 + static_cast<std::uint64_t>(t)), channel);

    BootstrapTraceRow row;
    row.t = t;
    row.p = p;
    row.delta_t = delta_t;
    if (truth_for_trace != nullptr) {
      const RealMatrix target = matrix_power(
          RealMatrix(truth_for_trace->Q * v.Q.transpose()), p);
      row.base_error = operator_norm(RealMatrix(q_t.Q - target));
    }

    RealMatrix root;
    try {
      root = matlin::principal_root(q_t.Q, static_cast<int>(p));
    } catch (const PreconditionViolation&) {
      throw PreconditionViolation(
          "bootstrap divergence: base estimate escaped the root branch");
    }
    v = florep::make_active(
        matlin::svd_round_orthogonal(RealMatrix(root * v.Q)));

    row.cumulative_queries = box.ledger().total_queries;
    result.trace.push_back(row);
  }
  result.estimate = v;
  return result;
}

}  // namespace learn
}  // namespace flo
