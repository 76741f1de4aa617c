#pragma once

// Conditional state of a single initial photon number through a sequence of
// observation cycles. This is the propagation substrate of the likelihoods:
// noiseless cycles track the two amplitudes (a_n, b_n); dephased cycles track
// the j = 0 block coefficients, which carry every population.

#include <array>
#include <cstdint>
#include <unordered_map>

#include "qndcount/types.hpp"

namespace qndcount {

struct NoiseConfig {
  double gamma = 0.0;    // rad/s
  double tau_eit = 0.0;  // s, drive-off dephasing window before each projection
  int atoms = 0;         // N; required when gamma > 0 or ejection is on
  bool ejection = false; // remove the Rydberg atom after every Rydberg outcome

  bool noiseless() const { return gamma == 0.0; }
};

struct CycleState {
  int n = 0;      // current photon number (drops by one per ejection)
  int atoms = 0;  // current atom count
  VectorXc x;     // (a, b) when noiseless, j = 0 block coefficients otherwise
};

// Not thread-safe: propagators are memoized per (n, N, tau).
class CycleModel {
 public:
  CycleModel(double omega, NoiseConfig noise);

  double omega() const { return omega_; }
  const NoiseConfig& noise() const { return noise_; }

  CycleState initial(int n) const;

  // Outcome probabilities {NoRydberg, Rydberg} after driving for tau and the
  // measurement window.
  std::array<double, 2> probabilities(const CycleState& state, double tau) const;
  // One drive plus measurement window, conditioned on `outcome`. Returns the
  // outcome probability; the state is left untouched when it is zero.
  // probability; the state is left untouched when it is zero.
  double advance(CycleState& state, double tau, Outcome outcome) const;

  std::size_t cached_propagators() const { return cache_.size(); }

 private:
  struct Key {
    int n;
    int atoms;
    std::uint64_t tau_bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  struct BlockData {
    Eigen::VectorXd trace;       // trace functional
    Eigen::VectorXd wait_decay;  // exp(gamma * D * tau_eit)
    int ss = -1;
    int rr = -1;
    std::vector<int> rydberg_labels;
  };

  VectorXc drive(const CycleState& state, double tau) const;
  const BlockData& block_data(int n, int atoms) const;
  const MatrixXc& propagator(int n, int atoms, double tau) const;

  double omega_;
  NoiseConfig noise_;
  mutable std::unordered_map<Key, MatrixXc, KeyHash> cache_;
  mutable std::unordered_map<std::uint64_t, BlockData> block_cache_;
};

}  // namespace qndcount
