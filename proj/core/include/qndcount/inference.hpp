#pragma once

#include <cstddef>
#include <vector>

#include "qndcount/cycle_model.hpp"
#include "qndcount/types.hpp"

namespace qndcount {

struct RecordEntry {
  double tau = 0.0;  // s
  Outcome outcome = Outcome::NoRydberg;
};

// Outcomes of successive observation cycles. The implicit outcome before the
// first cycle is NoRydberg.
struct MeasurementRecord {
  std::vector<RecordEntry> entries;

  std::size_t size() const { return entries.size(); }
  void validate() const;
};

// Candidate initial photon-number distribution (p_0, ..., p_nmax).
struct FockDistribution {
  std::vector<double> p;

  static FockDistribution delta(int n);
  static FockDistribution uniform(int n_lo, int n_hi);
  int n_max() const { return static_cast<int>(p.size()) - 1; }
  double operator[](int n) const { return n < static_cast<int>(p.size()) ? p[n] : 0.0; }
  void validate() const;
};

struct Posterior {
  std::vector<double> weights;

  static Posterior uniform(std::size_t k);
  std::size_t size() const { return weights.size(); }
  void validate() const;
};

// Noiseless record likelihood: cos^2 for repeated outcomes, sin^2 for flips.
double log_likelihood_noiseless(const MeasurementRecord& record, int n, double omega);
double likelihood_noiseless(const MeasurementRecord& record, int n, double omega);

// Sequential j = 0 block propagation with dephasing during drives and the
// tau_eit windows. Reduces to the noiseless product at gamma = tau_eit = 0.
double likelihood_noisy(const MeasurementRecord& record, int n, double omega, double gamma,
                        double tau_eit, int atoms);

// Dispatches on noise.noiseless(); honours ejection.
double log_likelihood(const MeasurementRecord& record, int n, double omega,
                      const NoiseConfig& noise);
double likelihood(const MeasurementRecord& record, int n, double omega, const NoiseConfig& noise);

double marginal_likelihood(const MeasurementRecord& record, const FockDistribution& dist,
                           double omega, const NoiseConfig& noise);

// Throws InconsistentRecordError when every candidate has zero likelihood.
Posterior posterior(const MeasurementRecord& record, const std::vector<FockDistribution>& candidates,
                    const Posterior& prior, double omega, const NoiseConfig& noise);

// Index of the largest weight, lowest index on ties.
std::size_t mle(const Posterior& post);

// Incremental Bayesian filter. Each distinct photon number keeps its
// conditional state and log-likelihood, so an update costs one cycle of
// propagation per photon number.
class SequentialPosterior {
 public:
  struct Track {
    int n = 0;  // initial photon number
    CycleState state;
    double log_likelihood = 0.0;
    bool alive = true;
  };

  SequentialPosterior(std::vector<FockDistribution> candidates, Posterior prior, double omega,
                      NoiseConfig noise);

  // Throws InconsistentRecordError if the entry leaves every candidate at
  // zero likelihood; the filter is unchanged in that case.
  void update(const RecordEntry& entry);

  const Posterior& current() const { return current_; }
  const MeasurementRecord& record() const { return record_; }
  const std::vector<FockDistribution>& candidates() const { return candidates_; }
  const Posterior& prior() const { return prior_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  const CycleModel& model() const { return model_; }

  // Joint weight of (candidate, track) given the record so far, normalized
  // over all pairs. Row-major: [alpha * tracks().size() + k].
  std::vector<double> joint_weights() const;

 private:
  Posterior recompute(const std::vector<Track>& tracks) const;

  std::vector<FockDistribution> candidates_;
  Posterior prior_;
  CycleModel model_;
  std::vector<Track> tracks_;
  MeasurementRecord record_;
  Posterior current_;
};

// Posterior after each prefix of the record: element i conditions on the
// first i entries, so the result has record.size() + 1 snapshots.
std::vector<Posterior> posterior_trace(const MeasurementRecord& record,
                                       const std::vector<FockDistribution>& candidates,
                                       const Posterior& prior, double omega,
                                       const NoiseConfig& noise);

}  // namespace qndcount
