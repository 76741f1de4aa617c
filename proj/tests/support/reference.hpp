#pragma once

// Test-only reference constructions that avoid the library's own block
// formulas: a dense Lindbladian built site by site, and its projection onto
// expanded basis labels.

#include <cmath>
#include <vector>

#include <qndcount/dense_oracle.hpp>
#include <qndcount/symbasis.hpp>

namespace qndcount::testing {

inline int site_level(int index, int site, int atoms) {
  for (int k = atoms - 1; k > site; --k) index /= 3;
  return index % 3;
}

inline int count_r(int index, int atoms) {
  int c = 0;
  for (int i = 0; i < atoms; ++i) c += site_level(index, i, atoms) == 2;
  return c;
}

// omega * sum_i (|r_i><s_i| + h.c.), kept inside the <= 1 Rydberg subspace.
inline MatrixXc blockaded_hamiltonian(int atoms, double omega) {
  int dim = 1;
  for (int i = 0; i < atoms; ++i) dim *= 3;
  MatrixXc h = MatrixXc::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    if (count_r(a, atoms) != 0) continue;
    int weight = 1;
    for (int site = atoms - 1; site >= 0; --site) {
      if (site_level(a, site, atoms) == 1) {
        const int b = a + weight;  // s -> r on this site
        h(b, a) += omega;
        h(a, b) += omega;
      }
      weight *= 3;
    }
  }
  return h;
}

inline MatrixXc apply_lindbladian(const MatrixXc& rho, const MatrixXc& h, int atoms, double gamma) {
  const Complex i(0.0, 1.0);
  MatrixXc out = -i * (h * rho - rho * h);
  const int dim = static_cast<int>(rho.rows());
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      if (rho(a, b) == Complex(0.0)) continue;
      double shared = 0.0;
      for (int s = 0; s < atoms; ++s) {
        shared += (site_level(a, s, atoms) == 2 && site_level(b, s, atoms) == 2) ? 1.0 : 0.0;
      }
      out(a, b) += gamma * rho(a, b) *
                   (shared - 0.5 * count_r(a, atoms) - 0.5 * count_r(b, atoms));
    }
  }
  return out;
}

struct ProjectedGenerator {
  MatrixXc g;
  double closure_residual = 0.0;  // part of L(E_l) outside the block span
};

inline ProjectedGenerator project_generator(const BlockOperators& ops) {
  const int d = ops.dimension();
  const MatrixXc h = blockaded_hamiltonian(ops.atoms, ops.omega);
  std::vector<MatrixXc> e;
  for (const auto& l : ops.labels) e.push_back(expand_label(l));
  ProjectedGenerator out;
  out.g = MatrixXc::Zero(d, d);
  for (int l = 0; l < d; ++l) {
    const MatrixXc le = apply_lindbladian(e[l], h, ops.atoms, ops.gamma);
    MatrixXc rest = le;
    for (int k = 0; k < d; ++k) {
      out.g(k, l) = (e[k].adjoint() * le).trace();
      rest -= out.g(k, l) * e[k];
    }
    out.closure_residual = std::max(out.closure_residual, rest.cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace qndcount::testing
