#include "qndcount/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qndcount/errors.hpp"

namespace qndcount {
namespace {

enum class Sector { NoRydberg, Cross, Rydberg };

Sector sector_of(Family f) {
  switch (f) {
    case Family::ss:
      return Sector::NoRydberg;
    case Family::rs:
    case Family::sr:
    case Family::rg:
    case Family::gr:
      return Sector::Cross;
    default:
      return Sector::Rydberg;
  }
}

constexpr double kTraceTol = 1e-9;

void require_j0(const SymmetricBlockState& sigma, const char* op) {
  if (sigma.j != 0) {
    throw PreconditionError(std::string(op) + " requires the j = 0 block, got j=" +
                            std::to_string(sigma.j));
  }
}

void require_dimension(const SymmetricBlockState& sigma, const BlockOperators& ops) {
  if (sigma.n != ops.n || sigma.atoms != ops.atoms || sigma.j != ops.j ||
      sigma.x.size() != ops.dimension()) {
    throw DomainError("block state does not match block operators");
  }
}

// Zero every label outside the kept sector.
void keep_sector(SymmetricBlockState& sigma, const std::vector<BasisLabel>& labels, Sector keep) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (sector_of(labels[i].family) != keep) sigma.x[static_cast<Eigen::Index>(i)] = 0.0;
  }
}

}  // namespace

// ---- pure states -----------------------------------------------------------

PureCollectiveState PureCollectiveState::from_amplitudes(std::vector<Complex> c) {
  if (c.empty()) throw DomainError("amplitude vector must be non-empty");
  PureCollectiveState psi;
  psi.s_amp = std::move(c);
  psi.r_amp.assign(psi.s_amp.size(), Complex(0.0));
  const double norm2 = psi.norm_squared();
  if (!(norm2 > 0.0)) throw DomainError("amplitude vector has zero norm");
  if (std::abs(norm2 - 1.0) > 1e-12) {
    throw DomainError("amplitudes must be normalized, |c|^2 = " + std::to_string(norm2));
  }
  return psi;
}

PureCollectiveState PureCollectiveState::fock(int n, int n_max) {
  if (n < 0 || n > n_max) throw DomainError("fock state requires 0 <= n <= n_max");
  std::vector<Complex> c(static_cast<std::size_t>(n_max) + 1, Complex(0.0));
  c[static_cast<std::size_t>(n)] = 1.0;
  return from_amplitudes(std::move(c));
}

double PureCollectiveState::norm_squared() const {
  double s = 0.0;
  for (const auto& a : s_amp) s += std::norm(a);
  for (const auto& b : r_amp) s += std::norm(b);
  return s;
}

double PureCollectiveState::population(int n) const {
  if (n < 0 || n > n_max()) return 0.0;
  return std::norm(s_amp[static_cast<std::size_t>(n)]) + std::norm(r_amp[static_cast<std::size_t>(n)]);
}

SectorPopulations PureCollectiveState::sectors() const {
  double pr = 0.0;
  for (const auto& b : r_amp) pr += std::norm(b);
  const double total = norm_squared();
  return {1.0 - pr / total, pr / total};
}

PureCollectiveState evolve_pure(const PureCollectiveState& psi, double tau, double omega) {
  if (!(tau >= 0.0)) throw DomainError("evolve_pure requires tau >= 0");
  PureCollectiveState out = psi;
  const Complex minus_i(0.0, -1.0);
  for (int n = 1; n <= psi.n_max(); ++n) {
    const double phase = collective_frequency(n, omega) * tau;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const Complex a = psi.s_amp[n];
    const Complex b = psi.r_amp[n];
    out.s_amp[n] = a * c + minus_i * s * b;
    out.r_amp[n] = b * c + minus_i * s * a;
  }
  return out;
}

Projected<PureCollectiveState> project_pure(const PureCollectiveState& psi, Outcome outcome) {
  const SectorPopulations p = psi.sectors();
  const double prob = outcome == Outcome::Rydberg ? p.rydberg : p.no_rydberg;
  if (!(prob > 0.0)) {
    throw ImpossibleOutcomeError("outcome " + std::string(to_string(outcome)) +
                                 " has zero probability");
  }
  Projected<PureCollectiveState> out{prob, psi};
  auto& zeroed = outcome == Outcome::Rydberg ? out.state.s_amp : out.state.r_amp;
  std::fill(zeroed.begin(), zeroed.end(), Complex(0.0));
  const double scale = 1.0 / std::sqrt(out.state.norm_squared());
  for (auto& a : out.state.s_amp) a *= scale;
  for (auto& b : out.state.r_amp) b *= scale;
  return out;
}

Measured<PureCollectiveState> measure_pure(const PureCollectiveState& psi, double draw) {
  const Outcome m = draw < psi.sectors().rydberg ? Outcome::Rydberg : Outcome::NoRydberg;
  auto projected = project_pure(psi, m);
  return {m, std::move(projected.state), projected.probability};
}

PureCollectiveState eject_pure(const PureCollectiveState& psi) {
  for (const auto& a : psi.s_amp) {
    if (std::norm(a) > 1e-24) throw PreconditionError("ejection requires a state in the Rydberg sector");
  }
  if (psi.n_max() < 1) throw PreconditionError("ejection requires n_max >= 1");
  PureCollectiveState out;
  out.s_amp.assign(psi.r_amp.begin() + 1, psi.r_amp.end());
  out.r_amp.assign(out.s_amp.size(), Complex(0.0));
  const double scale = 1.0 / std::sqrt(out.norm_squared());
  for (auto& a : out.s_amp) a *= scale;
  return out;
}

PureCollectiveState evolve_no_jump(const PureCollectiveState& psi, double tau, double omega,
                                   double gamma, bool drive_on) {
  if (!(tau >= 0.0)) throw DomainError("evolution time must satisfy tau >= 0");
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  PureCollectiveState out = psi;
  const Complex minus_i(0.0, -1.0);
  for (int n = 0; n <= psi.n_max(); ++n) {
    const double wn = drive_on ? collective_frequency(n, omega) : 0.0;
    Eigen::Matrix2cd g;
    g << 0.0, minus_i * wn, minus_i * wn, -0.5 * gamma;
    const Eigen::Matrix2cd u = (g * tau).exp();
    const Complex a = psi.s_amp[n];
    const Complex b = psi.r_amp[n];
    out.s_amp[n] = u(0, 0) * a + u(0, 1) * b;
    out.r_amp[n] = u(1, 0) * a + u(1, 1) * b;
  }
  return out;
}

PureCollectiveState realign_for_retrieval(const PureCollectiveState& psi, double omega,
                                          double resolution_tol) {
  int dominant = 0;
  for (int n = 1; n <= psi.n_max(); ++n) {
    if (psi.population(n) > psi.population(dominant)) dominant = n;
  }
  const double total = psi.norm_squared();
  if (psi.population(dominant) / total < 1.0 - resolution_tol) {
    throw PreconditionError(
        "photon number not resolved (largest population " +
        std::to_string(psi.population(dominant) / total) + "); continue observation");
  }
  const SectorPopulations p = psi.sectors();
  if (p.rydberg <= resolution_tol) return psi;
  if (p.no_rydberg > resolution_tol) {
    throw PreconditionError("realignment requires a state projected onto one sector");
  }
  if (dominant == 0) return psi;
  return evolve_pure(psi, kPi / (2.0 * collective_frequency(dominant, omega)), omega);
}

// ---- symmetric block states ------------------------------------------------

SymmetricBlockState fock_block_state(int n, int atoms, int j) {
  validate_block_index(n, atoms, j);
  const auto labels = enumerate_basis(n, atoms, j);
  SymmetricBlockState sigma{n, atoms, j, VectorXc::Zero(static_cast<Eigen::Index>(labels.size()))};
  // |S_n><S_n| = C(N,n)^-1 sum over all pairs of placements; the pairs with j
  // s/g mismatches form the ss_j family.
  const double binom = placement_count({Family::ss, 0, n, atoms});
  sigma.x[0] = std::sqrt(placement_count(labels[0])) / binom;
  return sigma;
}

BlockDensity fock_density(int n, int atoms) {
  BlockDensity rho{n, atoms, {}};
  validate_block_index(n, atoms, 0);
  for (int j = 0; j <= max_block_index(n, atoms); ++j) rho.blocks.push_back(fock_block_state(n, atoms, j));
  return rho;
}

double block_trace(const SymmetricBlockState& sigma) {
  if (sigma.j != 0) return 0.0;
  const auto ops = build_block(sigma.n, sigma.atoms, sigma.j, 0.0, 0.0);
  require_dimension(sigma, ops);
  return trace_vector(ops).cast<Complex>().dot(sigma.x).real();
}

SectorPopulations block_populations(const SymmetricBlockState& sigma) {
  require_j0(sigma, "block_populations");
  const auto ops = build_block(sigma.n, sigma.atoms, 0, 0.0, 0.0);
  require_dimension(sigma, ops);
  const Eigen::VectorXd v = trace_vector(ops);
  double ps = 0.0;
  double pr = 0.0;
  for (int i = 0; i < ops.dimension(); ++i) {
    const double w = v[i] * sigma.x[i].real();
    if (ops.labels[i].family == Family::ss) ps += w;
    if (ops.labels[i].family == Family::rr) pr += w;
  }
  const double total = ps + pr;
  pr = std::clamp(pr / total, 0.0, 1.0);
  return {1.0 - pr, pr};
}

MatrixXc block_propagator(const BlockOperators& ops, double tau, bool drive_on) {
  if (!(tau >= 0.0)) throw DomainError("propagation time must satisfy tau >= 0");
  const MatrixXc g = ops.generator(drive_on) * tau;
  return g.exp();
}

SymmetricBlockState evolve_block(const SymmetricBlockState& sigma, const BlockOperators& ops,
                                 double tau, bool drive_on) {
  require_dimension(sigma, ops);
  SymmetricBlockState out = sigma;
  if (tau == 0.0) return out;
  out.x = block_propagator(ops, tau, drive_on) * sigma.x;
  if (sigma.j == 0) {
    const Eigen::VectorXcd v = trace_vector(ops).cast<Complex>();
    const double before = v.dot(sigma.x).real();
    const double after = v.dot(out.x).real();
    const double residual = std::abs(after - before);
    if (residual > kTraceTol * std::max(1.0, std::abs(before))) {
      throw IntegratorError("block propagation did not conserve trace", residual);
    }
  }
  return out;
}

SymmetricBlockState evolve_block(const SymmetricBlockState& sigma, double tau, double omega,
                                 double gamma, bool drive_on) {
  return evolve_block(sigma, build_block(sigma.n, sigma.atoms, sigma.j, omega, gamma), tau, drive_on);
}

Projected<SymmetricBlockState> project_block(const SymmetricBlockState& sigma, Outcome outcome) {
  require_j0(sigma, "project_block");
  const auto ops = build_block(sigma.n, sigma.atoms, 0, 0.0, 0.0);
  require_dimension(sigma, ops);
  const SectorPopulations p = block_populations(sigma);
  const double prob = outcome == Outcome::Rydberg ? p.rydberg : p.no_rydberg;
  if (!(prob > 0.0)) {
    throw ImpossibleOutcomeError("outcome " + std::string(to_string(outcome)) +
                                 " has zero probability");
  }
  Projected<SymmetricBlockState> out{prob, sigma};
  keep_sector(out.state, ops.labels, outcome == Outcome::Rydberg ? Sector::Rydberg : Sector::NoRydberg);
  const double tr = trace_vector(ops).cast<Complex>().dot(out.state.x).real();
  out.state.x /= tr;
  return out;
}

Measured<SymmetricBlockState> measure_block(const SymmetricBlockState& sigma, double tau_eit,
                                            double gamma, double draw) {
  require_j0(sigma, "measure_block");
  if (!(tau_eit >= 0.0)) throw DomainError("measurement window must satisfy tau_eit >= 0");
  const SymmetricBlockState waited = evolve_block(sigma, tau_eit, 0.0, gamma, false);
  const Outcome m = draw < block_populations(waited).rydberg ? Outcome::Rydberg : Outcome::NoRydberg;
  auto projected = project_block(waited, m);
  return {m, std::move(projected.state), projected.probability};
}

SymmetricBlockState eject_block(const SymmetricBlockState& sigma) {
  if (sigma.n < 1) throw PreconditionError("ejection requires n >= 1");
  if (sigma.atoms < 2) throw PreconditionError("ejection requires at least two atoms");
  const auto ops = build_block(sigma.n, sigma.atoms, sigma.j, 0.0, 0.0);
  require_dimension(sigma, ops);
  const double scale = std::max(1.0, sigma.x.cwiseAbs().maxCoeff());
  for (int i = 0; i < ops.dimension(); ++i) {
    if (sector_of(ops.labels[i].family) != Sector::Rydberg && std::abs(sigma.x[i]) > 1e-12 * scale) {
      throw PreconditionError("ejection requires a state in the Rydberg sector");
    }
  }
  if (sigma.j > max_block_index(sigma.n - 1, sigma.atoms - 1)) {
    throw PreconditionError("block j=" + std::to_string(sigma.j) + " has no Rydberg population to eject");
  }
  SymmetricBlockState out{sigma.n - 1, sigma.atoms - 1, sigma.j, VectorXc::Zero(1)};
  const auto target = enumerate_basis(out.n, out.atoms, out.j);
  out.x = VectorXc::Zero(static_cast<Eigen::Index>(target.size()));
  const int rr = ops.index_of(Family::rr);
  // Every placement of rr_j on N sites leaves one placement of ss_j on the
  // remaining N-1 sites, and each of those arises from N positions of the
  // ejected atom: N * N_rr / N_ss' = sqrt(N).
  if (rr >= 0) out.x[0] = std::sqrt(static_cast<double>(sigma.atoms)) * sigma.x[rr];
  return out;
}

BlockDensity evolve_density(const BlockDensity& rho, double tau, double omega, double gamma,
                            bool drive_on) {
  BlockDensity out = rho;
  for (auto& b : out.blocks) b = evolve_block(b, tau, omega, gamma, drive_on);
  return out;
}

Projected<BlockDensity> project_density(const BlockDensity& rho, Outcome outcome) {
  auto head = project_block(rho.populations_block(), outcome);
  const double tr = block_trace(rho.populations_block());
  const Sector keep = outcome == Outcome::Rydberg ? Sector::Rydberg : Sector::NoRydberg;
  Projected<BlockDensity> out{head.probability, rho};
  for (auto& b : out.state.blocks) {
    keep_sector(b, enumerate_basis(b.n, b.atoms, b.j), keep);
    b.x /= head.probability * tr;
  }
  out.state.blocks.front() = std::move(head.state);
  return out;
}

Measured<BlockDensity> measure_density(const BlockDensity& rho, double tau_eit, double gamma,
                                       double draw) {
  if (!(tau_eit >= 0.0)) throw DomainError("measurement window must satisfy tau_eit >= 0");
  const BlockDensity waited = evolve_density(rho, tau_eit, 0.0, gamma, false);
  const Outcome m =
      draw < block_populations(waited.populations_block()).rydberg ? Outcome::Rydberg : Outcome::NoRydberg;
  auto projected = project_density(waited, m);
  return {m, std::move(projected.state), projected.probability};
}

BlockDensity eject_density(const BlockDensity& rho) {
  BlockDensity out{rho.n - 1, rho.atoms - 1, {}};
  if (rho.n < 1 || rho.atoms < 2) throw PreconditionError("ejection requires n >= 1 and N >= 2");
  const int jmax = max_block_index(out.n, out.atoms);
  for (const auto& b : rho.blocks) {
    if (b.j <= jmax) {
      out.blocks.push_back(eject_block(b));
    } else {
      // Only coherences between different Rydberg sites can live here; the
      // partial trace annihilates them.
      const auto labels = enumerate_basis(b.n, b.atoms, b.j);
      const double scale = std::max(1.0, b.x.cwiseAbs().maxCoeff());
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (sector_of(labels[i].family) != Sector::Rydberg &&
            std::abs(b.x[static_cast<Eigen::Index>(i)]) > 1e-12 * scale) {
          throw PreconditionError("ejection requires a state in the Rydberg sector");
        }
      }
    }
  }
  const double tr = block_trace(out.blocks.front());
  if (!(tr > 0.0)) throw PreconditionError("ejection of a zero-trace state");
  for (auto& b : out.blocks) b.x /= tr;
  return out;
}

BlockDensity realign_for_retrieval(const BlockDensity& rho, double omega, double gamma,
                                   double sector_tol) {
  if (rho.n < 1) return rho;
  const SectorPopulations p = block_populations(rho.populations_block());
  if (p.rydberg <= sector_tol) return rho;
  if (p.no_rydberg > sector_tol) {
    throw PreconditionError("realignment requires a state projected onto one sector");
  }
  return evolve_density(rho, kPi / (2.0 * collective_frequency(rho.n, omega)), omega, gamma, true);
}

VectorXc ideal_block_coefficients(const BlockOperators& ops, Complex a, Complex b) {
  const int n = ops.n;
  const double binom = placement_count({Family::ss, 0, n, ops.atoms});
  VectorXc y = VectorXc::Zero(ops.dimension());
  const double sqrt_n = std::sqrt(static_cast<double>(std::max(n, 1)));
  for (int i = 0; i < ops.dimension(); ++i) {
    const double inv_norm = 1.0 / ops.norms[i];
    switch (ops.labels[i].family) {
      case Family::ss:
        y[i] = std::norm(a) * inv_norm / binom;
        break;
      case Family::rs:
      case Family::rg:
        y[i] = b * std::conj(a) * inv_norm / (binom * sqrt_n);
        break;
      case Family::sr:
      case Family::gr:
        y[i] = a * std::conj(b) * inv_norm / (binom * sqrt_n);
        break;
      default:
        y[i] = std::norm(b) * inv_norm / (binom * n);
        break;
    }
  }
  return y;
}

double retrieval_fidelity(const BlockDensity& rho, const PureCollectiveState& ideal) {
  const int n = rho.n;
  if (n > ideal.n_max()) throw DomainError("ideal state does not cover the photon number of rho");
  for (int k = 0; k <= ideal.n_max(); ++k) {
    if (k != n && ideal.population(k) > 1e-12) {
      throw DomainError("ideal state must be supported on n=" + std::to_string(n) + " only");
    }
  }
  const double norm = ideal.norm_squared();
  const Complex a = ideal.s_amp[n] / std::sqrt(norm);
  const Complex b = ideal.r_amp[n] / std::sqrt(norm);
  double f = 0.0;
  for (const auto& block : rho.blocks) {
    if (block.n != n || block.atoms != rho.atoms) throw DomainError("block/ideal (n, N) mismatch");
    const auto ops = build_block(block.n, block.atoms, block.j, 0.0, 0.0);
    require_dimension(block, ops);
    f += ideal_block_coefficients(ops, a, b).dot(block.x).real();
  }
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace qndcount
