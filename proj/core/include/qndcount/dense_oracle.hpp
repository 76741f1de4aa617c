#pragma once

// Brute-force density-matrix simulation of N three-level atoms. Serves as the
// reference for the symmetric-block solver; not meant to scale past N = 6.
//
// Product-basis index convention: site 0 is the most significant base-3
// digit, with g = 0, s = 1, r = 2.

#include <span>
#include <vector>

#include "qndcount/symbasis.hpp"
#include "qndcount/types.hpp"

namespace qndcount {

inline constexpr int kMaxDenseAtoms = 6;

struct DenseState {
  int atoms = 0;
  MatrixXc rho;  // 3^N x 3^N
};

struct DenseOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
};

int dense_dimension(int atoms);
Level level_at(int index, int site, int atoms);
int rydberg_count(int index, int atoms);
int excitation_count(int index, int atoms);

// |S_n>: equal superposition of all C(N, n) placements of s among g.
VectorXc build_symmetric_ket(int n, int atoms);
// |R_n>: one r and n-1 s excitations, symmetrized.
VectorXc build_rydberg_ket(int n, int atoms);

DenseState dense_from_ket(const VectorXc& psi, int atoms);

// Integrates d rho/dt = -i[H, rho] + gamma sum_i (n_i rho n_i - {n_i, rho}/2)
// with H = omega sum_i (sigma_rs + h.c.) projected onto at most one Rydberg
// excitation. Only the excitation-number sectors present in rho are evolved.
DenseState evolve_dense(const DenseState& state, double t, double omega, double gamma,
                        const DenseOptions& options = {});

// States at each of the (non-decreasing, non-negative) times.
std::vector<DenseState> evolve_dense_series(const DenseState& state, std::span<const double> times,
                                            double omega, double gamma,
                                            const DenseOptions& options = {});

SectorPopulations sector_populations_dense(const DenseState& state);

struct DenseProjection {
  double probability = 0.0;
  DenseState state;
};

// Sector projection P rho P / p. Throws ImpossibleOutcomeError when p == 0.
DenseProjection project_dense(const DenseState& state, Outcome outcome);

// Partial trace over the site carrying the Rydberg excitation; the remaining
// N - 1 sites keep their relative order.
DenseState eject_dense(const DenseState& state);

// Dense matrix of sum_k coeffs[k] * |rho_label_k>>.
MatrixXc expand_superket(std::span<const BasisLabel> labels, const VectorXc& coeffs);

// Unit-norm dense matrix of a single basis label.
MatrixXc expand_label(const BasisLabel& label);

// Hermiticity, unit trace and positivity checks. Returns the largest violation.
double dense_validity_residual(const DenseState& state);

}  // namespace qndcount
