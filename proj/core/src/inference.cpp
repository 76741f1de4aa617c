#include "qndcount/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qndcount/errors.hpp"

namespace qndcount {
namespace {

constexpr double kNormTol = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double checked_sum(const std::vector<double>& v, const char* what) {
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw DomainError(std::string(what) + " entries must be finite and non-negative");
    }
    total += x;
  }
  return total;
}

int max_photon_number(const std::vector<FockDistribution>& candidates) {
  int n = 0;
  for (const auto& c : candidates) {
    for (int k = c.n_max(); k > n; --k) {
      if (c.p[k] > 0.0) {
        n = k;
        break;
      }
    }
  }
  return n;
}

}  // namespace

void MeasurementRecord::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i].tau >= 0.0) || !std::isfinite(entries[i].tau)) {
      throw DomainError("record entry " + std::to_string(i) + " has tau < 0 or non-finite");
    }
  }
}

FockDistribution FockDistribution::delta(int n) {
  if (n < 0) throw DomainError("photon number must be non-negative");
  FockDistribution d;
  d.p.assign(n + 1, 0.0);
  d.p[n] = 1.0;
  return d;
}

FockDistribution FockDistribution::uniform(int n_lo, int n_hi) {
  if (n_lo < 0 || n_hi < n_lo) throw DomainError("uniform distribution needs 0 <= n_lo <= n_hi");
  FockDistribution d;
  d.p.assign(n_hi + 1, 0.0);
  for (int n = n_lo; n <= n_hi; ++n) d.p[n] = 1.0 / (n_hi - n_lo + 1);
  return d;
}

void FockDistribution::validate() const {
  if (p.empty()) throw DomainError("Fock distribution is empty");
  const double total = checked_sum(p, "Fock distribution");
  if (std::abs(total - 1.0) > kNormTol) {
    throw DomainError("Fock distribution sums to " + std::to_string(total) + ", not 1");
  }
}

Posterior Posterior::uniform(std::size_t k) {
  if (k == 0) throw DomainError("posterior needs at least one candidate");
  return Posterior{std::vector<double>(k, 1.0 / static_cast<double>(k))};
}

void Posterior::validate() const {
  if (weights.empty()) throw DomainError("posterior has no candidates");
  const double total = checked_sum(weights, "posterior");
  if (std::abs(total - 1.0) > kNormTol) {
    throw DomainError("posterior weights sum to " + std::to_string(total) + ", not 1");
  }
}

double log_likelihood_noiseless(const MeasurementRecord& record, int n, double omega) {
  record.validate();
  if (n < 0) throw DomainError("photon number must be non-negative");
  const double wn = collective_frequency(n, omega);
  double acc = 0.0;
  Outcome previous = Outcome::NoRydberg;
  for (const auto& e : record.entries) {
    const double phase = wn * e.tau;
    const double f = e.outcome == previous ? std::cos(phase) : std::sin(phase);
    const double f2 = f * f;
    if (f2 == 0.0) return kNegInf;
    acc += std::log(f2);
    previous = e.outcome;
  }
  return acc;
}

double likelihood_noiseless(const MeasurementRecord& record, int n, double omega) {
  return std::exp(log_likelihood_noiseless(record, n, omega));
}

double log_likelihood(const MeasurementRecord& record, int n, double omega,
                      const NoiseConfig& noise) {
  record.validate();
  if (noise.noiseless() && !noise.ejection) return log_likelihood_noiseless(record, n, omega);
  const CycleModel model(omega, noise);
  CycleState state = model.initial(n);
  double acc = 0.0;
  for (const auto& e : record.entries) {
    const double p = model.advance(state, e.tau, e.outcome);
    if (!(p > 0.0)) return kNegInf;
    acc += std::log(p);
  }
  return acc;
}

double likelihood(const MeasurementRecord& record, int n, double omega, const NoiseConfig& noise) {
  return std::exp(log_likelihood(record, n, omega, noise));
}

double likelihood_noisy(const MeasurementRecord& record, int n, double omega, double gamma,
                        double tau_eit, int atoms) {
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  if (gamma == 0.0) return likelihood_noiseless(record, n, omega);
  return likelihood(record, n, omega, NoiseConfig{gamma, tau_eit, atoms, false});
}

double marginal_likelihood(const MeasurementRecord& record, const FockDistribution& dist,
                           double omega, const NoiseConfig& noise) {
  double total = 0.0;
  for (int n = 0; n <= dist.n_max(); ++n) {
    if (dist.p[n] > 0.0) total += dist.p[n] * likelihood(record, n, omega, noise);
  }
  return total;
}

Posterior posterior(const MeasurementRecord& record, const std::vector<FockDistribution>& candidates,
                    const Posterior& prior, double omega, const NoiseConfig& noise) {
  SequentialPosterior filter(candidates, prior, omega, noise);
  for (const auto& e : record.entries) filter.update(e);
  return filter.current();
}

std::vector<Posterior> posterior_trace(const MeasurementRecord& record,
                                       const std::vector<FockDistribution>& candidates,
                                       const Posterior& prior, double omega,
                                       const NoiseConfig& noise) {
  SequentialPosterior filter(candidates, prior, omega, noise);
  std::vector<Posterior> trace{filter.current()};
  for (const auto& e : record.entries) {
    filter.update(e);
    trace.push_back(filter.current());
  }
  return trace;
}

std::size_t mle(const Posterior& post) {
  if (post.weights.empty()) throw DomainError("posterior has no candidates");
  return static_cast<std::size_t>(
      std::distance(post.weights.begin(), std::max_element(post.weights.begin(), post.weights.end())));
}

SequentialPosterior::SequentialPosterior(std::vector<FockDistribution> candidates, Posterior prior,
                                         double omega, NoiseConfig noise)
    : candidates_(std::move(candidates)), prior_(std::move(prior)), model_(omega, noise) {
  if (candidates_.empty()) throw DomainError("posterior needs at least one candidate");
  if (prior_.size() != candidates_.size()) {
    throw DomainError("prior has " + std::to_string(prior_.size()) + " weights for " +
                      std::to_string(candidates_.size()) + " candidates");
  }
  prior_.validate();
  for (const auto& c : candidates_) c.validate();
  const int n_top = max_photon_number(candidates_);
  if (noise.atoms > 0 && n_top > noise.atoms) {
    throw DomainError("candidate photon number " + std::to_string(n_top) +
                      " exceeds atom count N=" + std::to_string(noise.atoms));
  }
  for (int n = 0; n <= n_top; ++n) {
    const bool used = std::any_of(candidates_.begin(), candidates_.end(),
                                  [n](const FockDistribution& c) { return c[n] > 0.0; });
    if (used) tracks_.push_back(Track{n, model_.initial(n), 0.0, true});
  }
  current_ = recompute(tracks_);
}

void SequentialPosterior::update(const RecordEntry& entry) {
  if (!(entry.tau >= 0.0) || !std::isfinite(entry.tau)) {
    throw DomainError("record entry has tau < 0 or non-finite");
  }
  std::vector<Track> next = tracks_;
  for (auto& t : next) {
    if (!t.alive) continue;
    const double p = model_.advance(t.state, entry.tau, entry.outcome);
    if (p > 0.0) {
      t.log_likelihood += std::log(p);
    } else {
      t.alive = false;
      t.log_likelihood = kNegInf;
    }
  }
  Posterior post = recompute(next);
  tracks_ = std::move(next);
  current_ = std::move(post);
  record_.entries.push_back(entry);
}

std::vector<double> SequentialPosterior::joint_weights() const {
  const std::size_t k = tracks_.size();
  std::vector<double> w(candidates_.size() * k, 0.0);
  double top = kNegInf;
  for (const auto& t : tracks_) top = std::max(top, t.log_likelihood);
  if (top == kNegInf) return w;
  double total = 0.0;
  for (std::size_t a = 0; a < candidates_.size(); ++a) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto& t = tracks_[i];
      if (!t.alive) continue;
      const double v = prior_.weights[a] * candidates_[a][t.n] * std::exp(t.log_likelihood - top);
      w[a * k + i] = v;
      total += v;
    }
  }
  if (total > 0.0) {
    for (double& v : w) v /= total;
  }
  return w;
}

Posterior SequentialPosterior::recompute(const std::vector<Track>& tracks) const {
  double top = kNegInf;
  for (const auto& t : tracks) top = std::max(top, t.log_likelihood);
  std::vector<double> w(candidates_.size(), 0.0);
  double total = 0.0;
  if (top != kNegInf) {
    for (std::size_t a = 0; a < candidates_.size(); ++a) {
      double marginal = 0.0;
      for (const auto& t : tracks) {
        if (t.alive) marginal += candidates_[a][t.n] * std::exp(t.log_likelihood - top);
      }
      w[a] = prior_.weights[a] * marginal;
      total += w[a];
    }
  }
  if (!(total > 0.0)) {
    throw InconsistentRecordError("measurement record has zero likelihood under every candidate");
  }
  for (double& v : w) v /= total;
  return Posterior{std::move(w)};
}

}  // namespace qndcount
