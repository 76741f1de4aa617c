#include "qndcount/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "qndcount/errors.hpp"

namespace qndcount {
namespace {

// Stream layout of trajectory i: 2i for outcomes and initial sampling,
// 2i + 1 for the schedule.
std::uint64_t outcome_stream(std::uint64_t index) { return 2 * index; }
std::uint64_t schedule_stream(std::uint64_t index) { return 2 * index + 1; }

// Conditions the jump-free amplitudes on `outcome`, which the full state
// reports with probability `prob`. They stay unnormalized.
PureCollectiveState condition_coherent(PureCollectiveState c, Outcome outcome, double prob) {
  auto& zeroed = outcome == Outcome::Rydberg ? c.s_amp : c.r_amp;
  std::fill(zeroed.begin(), zeroed.end(), Complex(0.0));
  const double scale = 1.0 / std::sqrt(prob);
  for (auto& a : c.s_amp) a *= scale;
  for (auto& b : c.r_amp) b *= scale;
  return c;
}

// Collapse of the noise-free reference onto `outcome`. If the reference gives
// the outcome zero weight, it restarts from that sector's basis state.
PureCollectiveState condition_reference(const PureCollectiveState& ref, int n, Outcome outcome) {
  const SectorPopulations p = ref.sectors();
  const double prob = outcome == Outcome::Rydberg ? p.rydberg : p.no_rydberg;
  if (prob > 1e-300) return project_pure(ref, outcome).state;
  PureCollectiveState out = PureCollectiveState::fock(n, ref.n_max());
  if (outcome == Outcome::Rydberg) std::swap(out.s_amp[n], out.r_amp[n]);
  return out;
}

// b_n |R_n> -> b_n |S_{n-1}> without renormalizing.
PureCollectiveState eject_coherent(const PureCollectiveState& c) {
  PureCollectiveState out;
  out.s_amp.assign(c.r_amp.begin() + 1, c.r_amp.end());
  out.r_amp.assign(out.s_amp.size(), Complex(0.0));
  return out;
}

void push_sample(std::vector<TimeSample>* samples, const ProtocolState& s, double time, int cycle,
                 bool driving) {
  if (samples == nullptr) return;
  const SectorPopulations p = sector_populations(s);
  samples->push_back(TimeSample{time, cycle, driving, p.no_rydberg, p.rydberg,
                               retrieval_fidelity(s), reference_overlap(s)});
}

// Drive (or free dephasing) for `duration` in `steps` equal pieces.
void advance(ProtocolState& s, double duration, bool drive_on, const ProtocolParams& params,
             int steps, std::vector<TimeSample>* samples, double* clock, int cycle) {
  const int pieces = std::max(1, steps);
  const double dt = duration / pieces;
  for (int k = 0; k < pieces; ++k) {
    if (s.mode == SimulationMode::NoiselessPure) {
      if (drive_on) s.pure = evolve_pure(s.pure, dt, params.omega);
    } else {
      s.density = evolve_density(s.density, dt, params.omega, params.gamma, drive_on);
      s.pure = evolve_no_jump(s.pure, dt, params.omega, params.gamma, drive_on);
      if (drive_on) s.reference = evolve_pure(s.reference, dt, params.omega);
    }
    if (clock != nullptr) *clock += dt;
    if (steps > 0) push_sample(samples, s, clock != nullptr ? *clock : 0.0, cycle, drive_on);
  }
}

}  // namespace

std::string_view to_string(SimulationMode m) {
  switch (m) {
    case SimulationMode::Auto:
      return "auto";
    case SimulationMode::NoiselessPure:
      return "noiseless-pure";
    case SimulationMode::NoisyFixedN:
      return "noisy-fixed-n";
  }
  return "unknown";
}

std::string_view to_string(Schedule::Kind k) {
  switch (k) {
    case Schedule::Kind::Fixed:
      return "fixed";
    case Schedule::Kind::UniformRandom:
      return "uniform-random";
    case Schedule::Kind::Precomputed:
      return "precomputed";
    case Schedule::Kind::AdaptiveGreedy:
      return "adaptive-greedy";
  }
  return "unknown";
}

Schedule::Kind schedule_kind_from_string(std::string_view s) {
  if (s == "fixed") return Schedule::Kind::Fixed;
  if (s == "uniform-random" || s == "uniform") return Schedule::Kind::UniformRandom;
  if (s == "precomputed" || s == "list") return Schedule::Kind::Precomputed;
  if (s == "adaptive-greedy" || s == "greedy") return Schedule::Kind::AdaptiveGreedy;
  throw DomainError("unknown schedule '" + std::string(s) + "'");
}

Schedule Schedule::fixed(double tau) {
  Schedule s;
  s.kind = Kind::Fixed;
  s.tau = tau;
  return s;
}

Schedule Schedule::uniform(double tau_min, double tau_max) {
  Schedule s;
  s.kind = Kind::UniformRandom;
  s.tau_min = tau_min;
  s.tau_max = tau_max;
  return s;
}

Schedule Schedule::precomputed(std::vector<double> taus) {
  Schedule s;
  s.kind = Kind::Precomputed;
  s.list = std::move(taus);
  return s;
}

Schedule Schedule::greedy(TauGrid grid) {
  Schedule s;
  s.kind = Kind::AdaptiveGreedy;
  s.grid = grid;
  return s;
}

void Schedule::validate() const {
  switch (kind) {
    case Kind::Fixed:
      if (!(tau >= 0.0)) throw DomainError("fixed schedule needs tau >= 0");
      break;
    case Kind::UniformRandom:
      if (!(tau_min >= 0.0 && tau_max >= tau_min)) {
        throw DomainError("uniform schedule needs 0 <= tau_min <= tau_max");
      }
      break;
    case Kind::Precomputed:
      for (double t : list) {
        if (!(t >= 0.0)) throw DomainError("precomputed schedule has a negative tau");
      }
      break;
    case Kind::AdaptiveGreedy:
      if (grid.points < 1 || !(grid.max_phase > 0.0)) {
        throw DomainError("greedy schedule needs a non-empty grid");
      }
      break;
  }
}

void ProtocolParams::validate() const {
  if (!(omega > 0.0)) throw DomainError("omega must be > 0");
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  if (!(tau_eit >= 0.0)) throw DomainError("tau_eit must be >= 0");
  if (atoms < 1) throw DomainError("atom count N must be >= 1");
  if (n_max < 1 || n_max > atoms) throw DomainError("n_max must satisfy 1 <= n_max <= N");
  if (max_cycles < 1) throw DomainError("max_cycles must be >= 1");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("threshold must lie in (0, 1]");
  if (samples_per_window < 0) throw DomainError("samples_per_window must be >= 0");
  if (mode == SimulationMode::NoiselessPure && gamma > 0.0) {
    throw DomainError("noiseless-pure mode requires gamma = 0");
  }
  schedule.validate();
  for (const auto& c : resolved_candidates()) {
    c.validate();
    if (c.n_max() > atoms) {
      for (int n = atoms + 1; n <= c.n_max(); ++n) {
        if (c.p[n] > 0.0) throw DomainError("candidate photon number exceeds atom count N");
      }
    }
  }
  const Posterior p = resolved_prior();
  if (p.size() != resolved_candidates().size()) {
    throw DomainError("prior size does not match the number of candidates");
  }
  p.validate();
}

SimulationMode ProtocolParams::resolved_mode() const {
  if (mode != SimulationMode::Auto) return mode;
  return gamma > 0.0 ? SimulationMode::NoisyFixedN : SimulationMode::NoiselessPure;
}

NoiseConfig ProtocolParams::noise() const { return NoiseConfig{gamma, tau_eit, atoms, ejection}; }

std::vector<FockDistribution> ProtocolParams::resolved_candidates() const {
  if (!candidates.empty()) return candidates;
  std::vector<FockDistribution> out;
  for (int n = 1; n <= n_max; ++n) out.push_back(FockDistribution::delta(n));
  return out;
}

Posterior ProtocolParams::resolved_prior() const {
  return prior ? *prior : Posterior::uniform(resolved_candidates().size());
}

InitialCondition InitialCondition::fock(int n) { return InitialCondition{FockDistribution::delta(n), {}}; }

ProtocolState sample_initial(const InitialCondition& initial, SimulationMode mode, int atoms, Rng& rng) {
  if (mode == SimulationMode::Auto) throw DomainError("sample_initial needs a resolved mode");
  ProtocolState s;
  s.mode = mode;
  s.atoms = atoms;

  if (mode == SimulationMode::NoiselessPure) {
    if (!initial.amplitudes.empty()) {
      s.pure = PureCollectiveState::from_amplitudes(initial.amplitudes);
    } else {
      initial.populations.validate();
      std::vector<Complex> c;
      for (double p : initial.populations.p) c.emplace_back(std::sqrt(p));
      // Rounding in the square roots must not trip the unit-norm check.
      double norm = 0.0;
      for (const auto& a : c) norm += std::norm(a);
      for (auto& a : c) a /= std::sqrt(norm);
      s.pure = PureCollectiveState::from_amplitudes(std::move(c));
    }
    if (s.pure.n_max() > atoms) {
      for (int n = atoms + 1; n <= s.pure.n_max(); ++n) {
        if (s.pure.population(n) > 0.0) throw DomainError("initial photon number exceeds N");
      }
    }
    return s;
  }

  FockDistribution dist = initial.populations;
  if (!initial.amplitudes.empty()) {
    dist.p.clear();
    for (const auto& a : initial.amplitudes) dist.p.push_back(std::norm(a));
    double total = 0.0;
    for (double p : dist.p) total += p;
    for (double& p : dist.p) p /= total;
  }
  dist.validate();
  const double u = rng.uniform();
  double acc = 0.0;
  int n = -1;
  for (int k = 0; k <= dist.n_max(); ++k) {
    if (dist.p[k] <= 0.0) continue;
    acc += dist.p[k];
    n = k;
    if (u < acc) break;
  }
  if (n > atoms) throw DomainError("sampled photon number exceeds atom count N");
  s.initial_n = n;
  s.density = fock_density(n, atoms);
  s.pure = PureCollectiveState::fock(n, n);
  s.reference = s.pure;
  return s;
}

double reference_overlap(const ProtocolState& state) {
  if (state.mode == SimulationMode::NoiselessPure) return 1.0;
  return retrieval_fidelity(state.density, state.reference);
}

SectorPopulations sector_populations(const ProtocolState& state) {
  if (state.mode == SimulationMode::NoiselessPure) return state.pure.sectors();
  return block_populations(state.density.populations_block());
}

double retrieval_fidelity(const ProtocolState& state) {
  if (state.mode == SimulationMode::NoiselessPure) return 1.0;
  return std::clamp(state.pure.norm_squared(), 0.0, 1.0);
}

CycleResult run_observation_cycle(const ProtocolState& state, double tau,
                                  const ProtocolParams& params, Rng& rng,
                                  std::vector<TimeSample>* samples, double* clock, int cycle) {
  if (!(tau >= 0.0)) throw DomainError("drive time must be >= 0");
  CycleResult out;
  out.state = state;
  ProtocolState& s = out.state;
  const int steps = samples != nullptr ? params.samples_per_window : 0;

  advance(s, tau, true, params, steps, samples, clock, cycle);
  if (s.mode == SimulationMode::NoisyFixedN) {
    advance(s, params.tau_eit, false, params, steps, samples, clock, cycle);
  } else if (clock != nullptr) {
    // The window leaves a noiseless state untouched; only the clock moves.
    for (int k = 0; k < steps; ++k) {
      *clock += params.tau_eit / steps;
      push_sample(samples, s, *clock, cycle, false);
    }
    if (steps == 0) *clock += params.tau_eit;
  }

  const double draw = rng.uniform();
  if (s.mode == SimulationMode::NoiselessPure) {
    auto m = measure_pure(s.pure, draw);
    out.outcome = m.outcome;
    out.probability = m.probability;
    s.pure = std::move(m.state);
  } else {
    const double pr = block_populations(s.density.populations_block()).rydberg;
    out.outcome = draw < pr ? Outcome::Rydberg : Outcome::NoRydberg;
    auto projected = project_density(s.density, out.outcome);
    out.probability = projected.probability;
    s.density = std::move(projected.state);
    s.pure = condition_coherent(std::move(s.pure), out.outcome, out.probability);
    s.reference = condition_reference(s.reference, s.density.n, out.outcome);
  }

  if (params.ejection && out.outcome == Outcome::Rydberg) {
    if (s.mode == SimulationMode::NoiselessPure) {
      s.pure = eject_pure(s.pure);
    } else {
      // With one atom left the array empties; the all-g state of a single
      // site stands in for it.
      s.density = s.density.atoms > 1 ? eject_density(s.density) : fock_density(0, 1);
      s.pure = eject_coherent(s.pure);
      s.reference = eject_pure(s.reference);
    }
    s.atoms -= 1;
    s.ejected += 1;
    out.ejected = true;
  }
  return out;
}

double schedule_next_tau(const Schedule& schedule, std::size_t cycle,
                         const SequentialPosterior& filter, double omega, Rng& rng) {
  switch (schedule.kind) {
    case Schedule::Kind::Fixed:
      return schedule.tau;
    case Schedule::Kind::UniformRandom:
      return schedule.tau_min + (schedule.tau_max - schedule.tau_min) * rng.uniform();
    case Schedule::Kind::Precomputed:
      if (cycle >= schedule.list.size()) {
        throw ScheduleExhaustedError("precomputed schedule has " +
                                     std::to_string(schedule.list.size()) +
                                     " drive times; cycle " + std::to_string(cycle + 1) +
                                     " needs another");
      }
      return schedule.list[cycle];
    case Schedule::Kind::AdaptiveGreedy:
      return greedy_next_tau(filter, schedule.grid.taus(omega));
  }
  return 0.0;
}

TrajectoryLog run_protocol(const InitialCondition& initial, const ProtocolParams& params,
                           std::uint64_t index) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  const SimulationMode mode = params.resolved_mode();
  Rng outcomes(params.seed, outcome_stream(index));
  Rng scheduler(params.seed, schedule_stream(index));

  TrajectoryLog log;
  log.index = index;
  log.seed = params.seed;
  log.mode = mode;

  ProtocolState state = sample_initial(initial, mode, params.atoms, outcomes);
  log.initial_n = state.initial_n;
  SequentialPosterior filter(params.resolved_candidates(), params.resolved_prior(), params.omega,
                             params.noise());

  const bool sampling = params.samples_per_window > 0;
  double clock = 0.0;
  if (sampling) push_sample(&log.samples, state, 0.0, 0, false);

  for (int i = 0; i < params.max_cycles; ++i) {
    const double tau = schedule_next_tau(params.schedule, static_cast<std::size_t>(i), filter,
                                         params.omega, scheduler);
    CycleResult r = run_observation_cycle(state, tau, params, outcomes,
                                          sampling ? &log.samples : nullptr, &clock, i + 1);
    state = std::move(r.state);
    filter.update(RecordEntry{tau, r.outcome});
    log.outcome_probabilities.push_back(r.probability);
    log.posteriors.push_back(filter.current());
    log.fidelity.push_back(retrieval_fidelity(state));
    log.overlap.push_back(reference_overlap(state));
    const auto& w = filter.current().weights;
    if (*std::max_element(w.begin(), w.end()) >= params.threshold) {
      log.converged = true;
      break;
    }
  }
  log.record = filter.record();
  log.ejected = state.ejected;
  log.inferred = mle(filter.current());
  log.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

std::vector<TrajectoryLog> run_batch(const InitialCondition& initial, const ProtocolParams& params,
                                     std::size_t count, std::uint64_t first_index) {
  std::vector<TrajectoryLog> logs;
  logs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) logs.push_back(run_protocol(initial, params, first_index + i));
  return logs;
}

BatchSummary summarize(const std::vector<TrajectoryLog>& logs, std::size_t n_candidates) {
  BatchSummary s;
  s.trajectories = logs.size();
  s.inferred_counts.assign(n_candidates, 0);
  double cycles = 0.0;
  for (const auto& log : logs) {
    cycles += static_cast<double>(log.cycles());
    s.wall_time_s += log.wall_time_s;
    if (!log.converged) continue;
    ++s.converged;
    if (log.inferred < n_candidates) ++s.inferred_counts[log.inferred];
  }
  if (!logs.empty()) s.mean_cycles = cycles / static_cast<double>(logs.size());
  return s;
}

}  // namespace qndcount
