#include "qndcount/cycle_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qndcount/errors.hpp"
#include "qndcount/symbasis.hpp"

namespace qndcount {
namespace {

constexpr std::size_t kMaxCachedPropagators = 1 << 18;

std::uint64_t block_key(int n, int atoms) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n)) << 32) |
         static_cast<std::uint32_t>(atoms);
}

bool in_rydberg_sector(Family f) {
  return f == Family::rr || f == Family::rs_gr || f == Family::sr_rg || f == Family::rs_sr ||
         f == Family::rg_gr;
}

}  // namespace

std::size_t CycleModel::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = std::hash<std::uint64_t>{}(k.tau_bits);
  h ^= std::hash<std::uint64_t>{}(block_key(k.n, k.atoms)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

CycleModel::CycleModel(double omega, NoiseConfig noise) : omega_(omega), noise_(noise) {
  if (!(omega > 0.0)) throw DomainError("cycle model requires omega > 0");
  if (!(noise.gamma >= 0.0)) throw DomainError("cycle model requires gamma >= 0");
  if (!(noise.tau_eit >= 0.0)) throw DomainError("cycle model requires tau_eit >= 0");
  if (!noise.noiseless() && noise.atoms < 1) {
    throw DomainError("dephased likelihoods require the atom count N >= 1");
  }
}

CycleState CycleModel::initial(int n) const {
  if (n < 0) throw DomainError("photon number must be non-negative");
  if (noise_.atoms > 0 && n > noise_.atoms) {
    throw DomainError("photon number n=" + std::to_string(n) + " exceeds atom count N=" +
                      std::to_string(noise_.atoms));
  }
  CycleState s{n, noise_.atoms, {}};
  if (noise_.noiseless()) {
    s.x = VectorXc::Zero(2);
    s.x[0] = 1.0;
    return s;
  }
  const BlockData& data = block_data(n, noise_.atoms);
  s.x = VectorXc::Zero(data.trace.size());
  s.x[data.ss] = 1.0 / data.trace[data.ss];
  return s;
}

const CycleModel::BlockData& CycleModel::block_data(int n, int atoms) const {
  const auto key = block_key(n, atoms);
  if (auto it = block_cache_.find(key); it != block_cache_.end()) return it->second;
  const BlockOperators ops = build_block(n, atoms, 0, omega_, noise_.gamma);
  BlockData data;
  data.trace = trace_vector(ops);
  data.wait_decay = (noise_.gamma * noise_.tau_eit * ops.dephasing).array().exp();
  data.ss = ops.index_of(Family::ss);
  data.rr = ops.index_of(Family::rr);
  for (int i = 0; i < ops.dimension(); ++i) {
    if (in_rydberg_sector(ops.labels[i].family)) data.rydberg_labels.push_back(i);
  }
  return block_cache_.emplace(key, std::move(data)).first->second;
}

const MatrixXc& CycleModel::propagator(int n, int atoms, double tau) const {
  const Key key{n, atoms, std::bit_cast<std::uint64_t>(tau)};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (cache_.size() >= kMaxCachedPropagators) cache_.clear();
  const BlockOperators ops = build_block(n, atoms, 0, omega_, noise_.gamma);
  MatrixXc u = (ops.generator(true) * tau).exp();
  return cache_.emplace(key, std::move(u)).first->second;
}

VectorXc CycleModel::drive(const CycleState& state, double tau) const {
  if (!(tau >= 0.0)) throw DomainError("drive time must satisfy tau >= 0");
  if (noise_.noiseless()) {
    const double phase = collective_frequency(state.n, omega_) * tau;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const Complex minus_i(0.0, -1.0);
    VectorXc out(2);
    out[0] = state.x[0] * c + minus_i * s * state.x[1];
    out[1] = state.x[1] * c + minus_i * s * state.x[0];
    return out;
  }
  VectorXc out = propagator(state.n, state.atoms, tau) * state.x;
  return out.cwiseProduct(block_data(state.n, state.atoms).wait_decay.cast<Complex>());
}

std::array<double, 2> CycleModel::probabilities(const CycleState& state, double tau) const {
  if (state.n == 0) return {1.0, 0.0};
  const VectorXc y = drive(state, tau);
  double pr = 0.0;
  double ps = 0.0;
  if (noise_.noiseless()) {
    ps = std::norm(y[0]);
    pr = std::norm(y[1]);
  } else {
    const BlockData& data = block_data(state.n, state.atoms);
    ps = data.trace[data.ss] * y[data.ss].real();
    pr = data.rr >= 0 ? data.trace[data.rr] * y[data.rr].real() : 0.0;
  }
  pr = std::clamp(pr / (pr + ps), 0.0, 1.0);
  return {1.0 - pr, pr};
}

double CycleModel::advance(CycleState& state, double tau, Outcome outcome) const {
  if (state.n == 0) return outcome == Outcome::NoRydberg ? 1.0 : 0.0;
  VectorXc y = drive(state, tau);
  const bool rydberg = outcome == Outcome::Rydberg;

  if (noise_.noiseless()) {
    const double ps = std::norm(y[0]);
    const double pr = std::norm(y[1]);
    const double p = (rydberg ? pr : ps) / (ps + pr);
    if (!(p > 0.0)) return 0.0;
    if (rydberg) {
      y[0] = 0.0;
    } else {
      y[1] = 0.0;
    }
    y /= y.norm();
    state.x = y;
    if (rydberg && noise_.ejection) {
      state.x[0] = state.x[1];
      state.x[1] = 0.0;
      state.n -= 1;
      if (state.atoms > 0) state.atoms -= 1;
    }
    return p;
  }

  const BlockData& data = block_data(state.n, state.atoms);
  const double ps = data.trace[data.ss] * y[data.ss].real();
  const double pr = data.rr >= 0 ? data.trace[data.rr] * y[data.rr].real() : 0.0;
  const double p = std::clamp((rydberg ? pr : ps) / (ps + pr), 0.0, 1.0);
  if (!(p > 0.0)) return 0.0;
  VectorXc projected = VectorXc::Zero(y.size());
  if (rydberg) {
    for (int i : data.rydberg_labels) projected[i] = y[i];
    projected /= data.trace[data.rr] * y[data.rr].real();
  } else {
    projected[data.ss] = 1.0 / data.trace[data.ss];
  }

  if (rydberg && noise_.ejection) {
    if (state.atoms == 1) {
      // The last atom leaves: an empty array never clicks again.
      state = CycleState{0, 0, VectorXc()};
      return p;
    }
    // Only rr survives the partial trace; the result is |S_{n-1}><S_{n-1}|'s
    // population part on N-1 atoms, fixed by unit trace.
    state.n -= 1;
    state.atoms -= 1;
    const BlockData& next = block_data(state.n, state.atoms);
    state.x = VectorXc::Zero(next.trace.size());
    state.x[next.ss] = 1.0 / next.trace[next.ss];
    return p;
  }
  state.x = std::move(projected);
  return p;
}

}  // namespace qndcount
