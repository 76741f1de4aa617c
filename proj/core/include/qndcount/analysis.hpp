#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "qndcount/inference.hpp"

namespace qndcount {

enum class Regime { Noiseless, NoisyFrequency, SteadyState };

std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view s);

struct RegimeParams {
  Regime regime = Regime::Noiseless;
  double n = 1.0;  // continuous for derivatives
  double omega = 1.0;
  double gamma = 0.0;

  void validate() const;
};

double fisher_closed_form(const RegimeParams& p, double t);
double detection_time(const RegimeParams& p);

using SignalFn = std::function<double(double t, double n)>;

// Two-outcome Fisher information from Richardson-extrapolated central
// differences of the outcome probabilities in n, with step
// h = rel_step * n.
double fisher_numeric(const SignalFn& f_same, const SignalFn& f_diff, double n, double t,
                      double rel_step = 1e-4);

// Fisher information of the regime's physical signal accumulated over t.
// Noisy regimes repeat independent measurements of duration 1/gamma, so the
// single-shot information is multiplied by t * gamma.
double fisher_numeric(const RegimeParams& p, double t, double rel_step = 1e-4);

// (1/(n+1), n/(n+1)).
std::pair<double, double> steady_state_populations(int n);

// Spacing alpha / gamma between steady-state measurements.
double steady_state_dwell(double gamma, double alpha = 3.0);

// Uniform drive-time grid tau_k = k * max_phase / (points * omega), k = 1..points.
struct TauGrid {
  int points = 4000;
  double max_phase = 4.0 * kPi;

  std::vector<double> taus(double omega) const;
};

struct FidelityProblem {
  std::vector<FockDistribution> candidates;
  Posterior prior;
  double omega = 1.0;
  NoiseConfig noise;
};

inline constexpr int kMaxFidelityCycles = 20;

// Probability that the maximum-likelihood candidate after `taus` is the true
// one, averaged over candidates and outcome sequences.
double expected_fidelity(const std::vector<double>& taus, const FidelityProblem& problem);

// Total joint probability over all outcome sequences and candidates; 1 up to
// rounding. Exposed for completeness checks.
double outcome_sequence_mass(const std::vector<double>& taus, const FidelityProblem& problem);

enum class ScheduleStrategy { Local, Global };

std::string_view to_string(ScheduleStrategy s);

struct ScheduleResult {
  std::vector<double> taus;
  std::vector<double> fidelity_trace;  // F_1 ... F_T
  ScheduleStrategy strategy = ScheduleStrategy::Local;
  TauGrid grid;
};

ScheduleResult optimize_schedule_local(int cycles, const FidelityProblem& problem,
                                       const TauGrid& grid = {});

// Exhaustive search over grid^T. Ties in F_T go to the larger fidelity trace
// compared lexicographically, then to the smaller tuple.
ScheduleResult optimize_schedule_global(int cycles, const FidelityProblem& problem,
                                        const TauGrid& grid = {},
                                        double max_tuples = 2.0e7);

// One-step greedy choice from the filter's current conditional weights:
// the tau maximizing next-cycle expected fidelity. Ties go to the larger
// outcome/candidate mutual information, then to the smaller tau.
double greedy_next_tau(const SequentialPosterior& filter, const std::vector<double>& taus);

// Two-candidate benchmark problem: P1 = (0, 1/3, 1/3, 0, 1/3, 0) against
// P2 = delta_3, uniform prior, omega = 1, no noise.
FidelityProblem two_candidate_toy();

}  // namespace qndcount
