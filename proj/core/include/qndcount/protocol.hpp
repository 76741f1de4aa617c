#pragma once

// Seeded Monte Carlo of complete observation sequences.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "qndcount/analysis.hpp"
#include "qndcount/dynamics.hpp"
#include "qndcount/inference.hpp"
#include "qndcount/random.hpp"

namespace qndcount {

enum class SimulationMode { Auto, NoiselessPure, NoisyFixedN };

std::string_view to_string(SimulationMode m);

struct Schedule {
  enum class Kind { Fixed, UniformRandom, Precomputed, AdaptiveGreedy };

  Kind kind = Kind::UniformRandom;
  double tau = 0.0;      // Fixed
  double tau_min = 0.0;  // UniformRandom
  double tau_max = 0.0;
  std::vector<double> list;  // Precomputed
  TauGrid grid{400, 4.0 * kPi};  // AdaptiveGreedy

  static Schedule fixed(double tau);
  static Schedule uniform(double tau_min, double tau_max);
  static Schedule precomputed(std::vector<double> taus);
  static Schedule greedy(TauGrid grid = {400, 4.0 * kPi});

  void validate() const;
};

std::string_view to_string(Schedule::Kind k);
Schedule::Kind schedule_kind_from_string(std::string_view s);

struct ProtocolParams {
  double omega = kTwoPi * 2.5e6;  // rad/s
  double gamma = kTwoPi * 0.3e6;  // rad/s
  double tau_eit = 0.3e-6;        // s
  int atoms = 10;
  int n_max = 4;
  bool ejection = false;
  Schedule schedule = Schedule::greedy({200, 2.0 * kPi});
  std::uint64_t seed = 1;
  int max_cycles = 25;
  double threshold = 0.99;
  int samples_per_window = 0;  // time-series samples per drive/measure window
  SimulationMode mode = SimulationMode::Auto;
  std::vector<FockDistribution> candidates;  // default: delta_1 .. delta_nmax
  std::optional<Posterior> prior;            // default: uniform

  void validate() const;
  SimulationMode resolved_mode() const;
  NoiseConfig noise() const;
  std::vector<FockDistribution> resolved_candidates() const;
  Posterior resolved_prior() const;
};

// Either photon-number populations or explicit pure amplitudes c_n.
struct InitialCondition {
  FockDistribution populations;
  std::vector<Complex> amplitudes;

  static InitialCondition fock(int n);
};

struct ProtocolState {
  SimulationMode mode = SimulationMode::NoiselessPure;
  // Noiseless state; in noisy mode the unnormalized jump-free amplitudes,
  // whose squared norm is the retrieval fidelity.
  PureCollectiveState pure;
  PureCollectiveState reference;  // noisy mode: noise-free trajectory under the same record
  BlockDensity density;           // noisy state
  int initial_n = -1;         // sampled photon number; -1 in noiseless-pure mode
  int atoms = 0;
  int ejected = 0;
};

ProtocolState sample_initial(const InitialCondition& initial, SimulationMode mode, int atoms, Rng& rng);

struct TimeSample {
  double time = 0.0;  // s since the start of the run
  int cycle = 0;      // 1-based; 0 for the initial sample
  bool driving = false;
  double p_no_rydberg = 1.0;
  double p_rydberg = 0.0;
  double fidelity = 1.0;
  double overlap = 1.0;  // <psi_ref|rho|psi_ref>
};

struct CycleResult {
  Outcome outcome = Outcome::NoRydberg;
  double probability = 0.0;
  bool ejected = false;
  ProtocolState state;
};

// One drive of length tau followed by the measurement window and projection,
// plus ejection when enabled. Appends `samples_per_window` samples of each
// window to `samples` when given.
CycleResult run_observation_cycle(const ProtocolState& state, double tau,
                                  const ProtocolParams& params, Rng& rng,
                                  std::vector<TimeSample>* samples = nullptr,
                                  double* clock = nullptr, int cycle = 0);

// Next drive time. Uniform-random draws from `rng`; adaptive-greedy maximizes
// the one-step expected fidelity under the filter's current weights.
double schedule_next_tau(const Schedule& schedule, std::size_t cycle,
                         const SequentialPosterior& filter, double omega, Rng& rng);

// Weight of the stored excitation that never scattered: 1 in noiseless mode.
double retrieval_fidelity(const ProtocolState& state);
// Overlap with the noise-free reference trajectory; 1 in noiseless mode.
double reference_overlap(const ProtocolState& state);
SectorPopulations sector_populations(const ProtocolState& state);

struct TrajectoryLog {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  SimulationMode mode = SimulationMode::NoiselessPure;
  int initial_n = -1;
  MeasurementRecord record;
  std::vector<double> outcome_probabilities;
  std::vector<Posterior> posteriors;  // after each cycle
  std::vector<double> fidelity;       // after each cycle
  std::vector<double> overlap;        // after each cycle
  int ejected = 0;
  std::size_t inferred = 0;  // candidate index of the final MLE
  bool converged = false;
  std::vector<TimeSample> samples;
  double wall_time_s = 0.0;  // not part of the serialized log

  std::size_t cycles() const { return record.size(); }
};

TrajectoryLog run_protocol(const InitialCondition& initial, const ProtocolParams& params,
                           std::uint64_t index = 0);

struct BatchSummary {
  std::size_t trajectories = 0;
  std::size_t converged = 0;
  std::vector<std::size_t> inferred_counts;  // per candidate, converged runs only
  double mean_cycles = 0.0;
  double wall_time_s = 0.0;
};

std::vector<TrajectoryLog> run_batch(const InitialCondition& initial, const ProtocolParams& params,
                                     std::size_t count, std::uint64_t first_index = 0);
BatchSummary summarize(const std::vector<TrajectoryLog>& logs, std::size_t n_candidates);

}  // namespace qndcount
