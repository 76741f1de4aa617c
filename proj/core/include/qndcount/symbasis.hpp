#pragma once

// Permutation-symmetric superket basis for the dephased, Rydberg-blockaded
// g/s/r atom array, and the block generators acting on it.
//
// A density matrix with n shelved excitations on N atoms decomposes into
// blocks labelled by j, the number of sites carrying an s/g coherence on each
// side. Within a block every basis element is a normalized sum over all
// distinct site placements of a fixed multiset of single-site operators
// |a><b|. There are ten such families; small (n, N, j) prune some of them.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "qndcount/types.hpp"

namespace qndcount {

// Listing order is the serialization order of every block vector and matrix.
enum class Family : std::uint8_t { ss, rs, sr, rg, gr, rr, rs_gr, sr_rg, rs_sr, rg_gr };

inline constexpr std::array<Family, 10> kAllFamilies = {
    Family::ss, Family::rs,    Family::sr,    Family::rg,    Family::gr,
    Family::rr, Family::rs_gr, Family::sr_rg, Family::rs_sr, Family::rg_gr};

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

// Single-site level.
enum class Level : std::uint8_t { g = 0, s = 1, r = 2 };

// Single-site operator |ket><bra|.
struct SiteOp {
  Level ket;
  Level bra;
  friend bool operator==(const SiteOp&, const SiteOp&) = default;
};

// Multiplicity of each of the nine site operators, indexed 3*ket + bra.
using SiteMultiset = std::array<int, 9>;

struct BasisLabel {
  Family family;
  int j;
  int n;
  int atoms;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

// Site-operator multiplicities of a family; entries may be negative when the
// label does not exist for (n, N, j).
SiteMultiset site_multiset(Family family, int n, int atoms, int j);

bool label_exists(Family family, int n, int atoms, int j);

// Throws DomainError naming the violated inequality.
void validate_block_index(int n, int atoms, int j);

// Existing labels of block (n, N, j) in family listing order.
std::vector<BasisLabel> enumerate_basis(int n, int atoms, int j);

// Number of distinct placements of the label's site operators over N sites.
// Exact integer arithmetic, converted to double at the end.
double placement_count(const BasisLabel& label);

// 1/sqrt(placement_count): the label is a unit vector under Tr[A^dagger B].
double normalization(const BasisLabel& label);

// Generator pieces of one j-block. The time derivative of the coefficient
// vector x is (i*H + gamma*D) x; H already carries the drive amplitude.
struct BlockOperators {
  int n = 0;
  int atoms = 0;
  int j = 0;
  double omega = 0.0;
  double gamma = 0.0;
  std::vector<BasisLabel> labels;
  std::vector<double> norms;
  MatrixXc hamiltonian;      // includes the factor omega
  Eigen::VectorXd dephasing; // diagonal of D, entries in {0, -1/2, -1}

  int dimension() const { return static_cast<int>(labels.size()); }
  // Index of a family in this block, or -1 if pruned.
  int index_of(Family f) const;
  // i*H + gamma*D, with the drive term dropped when drive_on is false.
  MatrixXc generator(bool drive_on = true) const;
};

BlockOperators build_block(int n, int atoms, int j, double omega, double gamma);

// Row vector v with Tr[rho] = v . x for a state with coefficients x. Only the
// population families (ss and rr at j = 0) have non-zero trace.
Eigen::VectorXd trace_vector(const BlockOperators& ops);

// Largest block index for (n, N).
inline int max_block_index(int n, int atoms) { return n < atoms - n ? n : atoms - n; }

}  // namespace qndcount
