#pragma once

// Protocol-level evolution of the stored excitations: exact pure-state Rabi
// dynamics over a photon-number superposition, and dephased fixed-n dynamics
// in the symmetric block basis.

#include <vector>

#include "qndcount/symbasis.hpp"
#include "qndcount/types.hpp"

namespace qndcount {

// sum_n a_n |S_n> + b_n |R_n>. b_0 is always zero.
struct PureCollectiveState {
  std::vector<Complex> s_amp;  // a_n, n = 0..n_max
  std::vector<Complex> r_amp;  // b_n, n = 0..n_max

  static PureCollectiveState from_amplitudes(std::vector<Complex> c);
  static PureCollectiveState fock(int n, int n_max);

  int n_max() const { return static_cast<int>(s_amp.size()) - 1; }
  double norm_squared() const;
  double population(int n) const;
  SectorPopulations sectors() const;
};

// Coefficients of a density matrix in one (n, N, j) block.
struct SymmetricBlockState {
  int n = 0;
  int atoms = 0;
  int j = 0;
  VectorXc x;
};

// All j blocks of a fixed-n density matrix, blocks[j] for j = 0..jmax.
// Only blocks[0] carries populations; the others hold s/g coherences that
// matter for state fidelity.
struct BlockDensity {
  int n = 0;
  int atoms = 0;
  std::vector<SymmetricBlockState> blocks;

  const SymmetricBlockState& populations_block() const { return blocks.front(); }
};

template <class State>
struct Measured {
  Outcome outcome = Outcome::NoRydberg;
  State state;
  double probability = 0.0;
};

template <class State>
struct Projected {
  double probability = 0.0;
  State state;
};

// ---- pure states -----------------------------------------------------------

PureCollectiveState evolve_pure(const PureCollectiveState& psi, double tau, double omega);

// Rydberg is selected when draw < p_R. The collapsed state has unit norm.
Measured<PureCollectiveState> measure_pure(const PureCollectiveState& psi, double draw);

Projected<PureCollectiveState> project_pure(const PureCollectiveState& psi, Outcome outcome);

// Removes the Rydberg atom: b_n |R_n> -> b_n |S_{n-1}>.
PureCollectiveState eject_pure(const PureCollectiveState& psi);

// Drives for pi / (2 Omega_n) to move |R_n> back to |S_n>. A state already in
// the NoRydberg sector is returned unchanged.
PureCollectiveState realign_for_retrieval(const PureCollectiveState& psi, double omega,
                                          double resolution_tol = 1e-6);

// Jump-free part of a dephased evolution: amplitudes under
// H - i (gamma/2) n_r, left unnormalized. The squared norm is the weight that
// has not scattered.
PureCollectiveState evolve_no_jump(const PureCollectiveState& psi, double tau, double omega,
                                   double gamma, bool drive_on = true);

// ---- symmetric block states ------------------------------------------------

// Block-j coefficients of |S_n><S_n| on N atoms.
SymmetricBlockState fock_block_state(int n, int atoms, int j = 0);
BlockDensity fock_density(int n, int atoms);

double block_trace(const SymmetricBlockState& sigma);
// Sector weights of a j = 0 block, normalized by its trace.
SectorPopulations block_populations(const SymmetricBlockState& sigma);

// exp(G tau) of the block generator.
MatrixXc block_propagator(const BlockOperators& ops, double tau, bool drive_on);

SymmetricBlockState evolve_block(const SymmetricBlockState& sigma, double tau, double omega,
                                 double gamma, bool drive_on = true);
SymmetricBlockState evolve_block(const SymmetricBlockState& sigma, const BlockOperators& ops,
                                 double tau, bool drive_on = true);

// Dephasing-only window of length tau_eit, then projection. Requires j = 0.
Measured<SymmetricBlockState> measure_block(const SymmetricBlockState& sigma, double tau_eit,
                                            double gamma, double draw);

// Sector projection renormalized to unit trace. Requires j = 0.
Projected<SymmetricBlockState> project_block(const SymmetricBlockState& sigma, Outcome outcome);

// Partial trace over the Rydberg site: rr of (n, N, j) -> ss of (n-1, N-1, j).
SymmetricBlockState eject_block(const SymmetricBlockState& sigma);

// The same operations applied to every block, with probabilities and trace
// taken from the j = 0 block.
BlockDensity evolve_density(const BlockDensity& rho, double tau, double omega, double gamma,
                            bool drive_on = true);
Measured<BlockDensity> measure_density(const BlockDensity& rho, double tau_eit, double gamma,
                                       double draw);
Projected<BlockDensity> project_density(const BlockDensity& rho, Outcome outcome);
BlockDensity eject_density(const BlockDensity& rho);
BlockDensity realign_for_retrieval(const BlockDensity& rho, double omega, double gamma,
                                   double sector_tol = 1e-9);

// Block-j coefficients of |psi><psi| for psi = a |S_n> + b |R_n>.
VectorXc ideal_block_coefficients(const BlockOperators& ops, Complex a, Complex b);

// <psi|rho|psi>, with psi supported on the photon number of rho.
double retrieval_fidelity(const BlockDensity& rho, const PureCollectiveState& ideal);

}  // namespace qndcount
