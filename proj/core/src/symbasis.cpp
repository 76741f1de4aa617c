#include "qndcount/symbasis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "qndcount/errors.hpp"

namespace qndcount {
namespace {

constexpr int slot(Level ket, Level bra) {
  return 3 * static_cast<int>(ket) + static_cast<int>(bra);
}

constexpr int GG = slot(Level::g, Level::g);
constexpr int GS = slot(Level::g, Level::s);
constexpr int GR = slot(Level::g, Level::r);
constexpr int SG = slot(Level::s, Level::g);
constexpr int SS = slot(Level::s, Level::s);
constexpr int SR = slot(Level::s, Level::r);
constexpr int RG = slot(Level::r, Level::g);
constexpr int RS = slot(Level::r, Level::s);
constexpr int RR = slot(Level::r, Level::r);

constexpr std::array<std::string_view, 10> kFamilyNames = {
    "ss", "rs", "sr", "rg", "gr", "rr", "rs_gr", "sr_rg", "rs_sr", "rg_gr"};

boost::multiprecision::cpp_int factorial(int k) {
  boost::multiprecision::cpp_int f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

std::string_view to_string(Family f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

Family family_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == s) return static_cast<Family>(i);
  }
  throw DomainError("unknown basis family '" + std::string(s) + "'");
}

SiteMultiset site_multiset(Family family, int n, int atoms, int j) {
  SiteMultiset m{};
  m[GG] = atoms - n - j;
  switch (family) {
    case Family::ss:
      m[SS] = n - j; m[SG] = j; m[GS] = j;
      break;
    case Family::rs:
      m[RS] = 1; m[SG] = j; m[GS] = j; m[SS] = n - j - 1;
      break;
    case Family::sr:
      m[SR] = 1; m[SG] = j; m[GS] = j; m[SS] = n - j - 1;
      break;
    case Family::rg:
      m[RG] = 1; m[SG] = j - 1; m[GS] = j; m[SS] = n - j;
      break;
    case Family::gr:
      m[GR] = 1; m[GS] = j - 1; m[SG] = j; m[SS] = n - j;
      break;
    case Family::rr:
      m[RR] = 1; m[SG] = j; m[GS] = j; m[SS] = n - j - 1;
      break;
    case Family::rs_gr:
      m[RS] = 1; m[GR] = 1; m[SG] = j; m[GS] = j - 1; m[SS] = n - j - 1;
      break;
    case Family::sr_rg:
      m[SR] = 1; m[RG] = 1; m[GS] = j; m[SG] = j - 1; m[SS] = n - j - 1;
      break;
    case Family::rs_sr:
      m[RS] = 1; m[SR] = 1; m[SG] = j; m[GS] = j; m[SS] = n - j - 2;
      break;
    case Family::rg_gr:
      m[RG] = 1; m[GR] = 1; m[SG] = j - 1; m[GS] = j - 1; m[SS] = n - j;
      break;
  }
  return m;
}

bool label_exists(Family family, int n, int atoms, int j) {
  for (int c : site_multiset(family, n, atoms, j)) {
    if (c < 0) return false;
  }
  return true;
}

void validate_block_index(int n, int atoms, int j) {
  auto fail = [&](const std::string& rule) {
    throw DomainError("invalid block (n=" + std::to_string(n) + ", N=" + std::to_string(atoms) +
                      ", j=" + std::to_string(j) + "): requires " + rule);
  };
  if (atoms < 1) fail("N >= 1");
  if (n < 0) fail("n >= 0");
  if (n > atoms) fail("n <= N");
  if (j < 0) fail("j >= 0");
  if (j > n) fail("j <= n");
  if (j > atoms - n) fail("j <= N - n");
}

std::vector<BasisLabel> enumerate_basis(int n, int atoms, int j) {
  validate_block_index(n, atoms, j);
  std::vector<BasisLabel> out;
  for (Family f : kAllFamilies) {
    if (label_exists(f, n, atoms, j)) out.push_back({f, j, n, atoms});
  }
  return out;
}

double placement_count(const BasisLabel& label) {
  if (!label_exists(label.family, label.n, label.atoms, label.j)) {
    throw DomainError("label " + std::string(to_string(label.family)) +
                      " does not exist for this block");
  }
  const SiteMultiset m = site_multiset(label.family, label.n, label.atoms, label.j);
  boost::multiprecision::cpp_int count = factorial(label.atoms);
  for (int c : m) count /= factorial(c);
  const double value = count.convert_to<double>();
  if (!std::isfinite(value)) {
    throw ResourceError("placement count overflows double for N=" + std::to_string(label.atoms));
  }
  return value;
}

double normalization(const BasisLabel& label) { return 1.0 / std::sqrt(placement_count(label)); }

int BlockOperators::index_of(Family f) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].family == f) return static_cast<int>(i);
  }
  return -1;
}

MatrixXc BlockOperators::generator(bool drive_on) const {
  MatrixXc g = MatrixXc::Zero(dimension(), dimension());
  if (drive_on) g = Complex(0.0, 1.0) * hamiltonian;
  g.diagonal() += (gamma * dephasing).cast<Complex>();
  return g;
}

BlockOperators build_block(int n, int atoms, int j, double omega, double gamma) {
  if (!(omega >= 0.0)) throw DomainError("drive amplitude must satisfy omega >= 0");
  if (!(gamma >= 0.0)) throw DomainError("dephasing rate must satisfy gamma >= 0");

  BlockOperators ops;
  ops.n = n;
  ops.atoms = atoms;
  ops.j = j;
  ops.omega = omega;
  ops.gamma = gamma;
  ops.labels = enumerate_basis(n, atoms, j);
  const int dim = ops.dimension();
  ops.norms.reserve(ops.labels.size());
  for (const auto& l : ops.labels) ops.norms.push_back(normalization(l));

  ops.hamiltonian = MatrixXc::Zero(dim, dim);
  ops.dephasing = Eigen::VectorXd::Zero(dim);

  // Norm ratios N_a / N_b. Placement counts are exact, so the ratio only
  // carries rounding from the final division.
  auto ratio = [&](Family a, Family b) {
    return ops.norms[ops.index_of(a)] / ops.norms[ops.index_of(b)];
  };
  auto set = [&](Family row, Family col, double coeff) {
    const int r = ops.index_of(row);
    const int c = ops.index_of(col);
    if (r < 0 || c < 0) return;
    ops.hamiltonian(r, c) = omega * coeff * ratio(row, col);
  };

  using F = Family;
  const double nj = n - j;
  const double jj = j;

  set(F::ss, F::rs, -1.0);
  set(F::ss, F::sr, 1.0);
  set(F::ss, F::rg, -1.0);
  set(F::ss, F::gr, 1.0);

  set(F::rs, F::ss, -nj);
  set(F::rs, F::rr, 1.0);
  set(F::rs, F::rs_gr, 1.0);
  set(F::rs, F::rs_sr, 1.0);

  set(F::sr, F::ss, nj);
  set(F::sr, F::rr, -1.0);
  set(F::sr, F::sr_rg, -1.0);
  set(F::sr, F::rs_sr, -1.0);

  set(F::rg, F::ss, -jj);
  set(F::rg, F::sr_rg, 1.0);
  set(F::rg, F::rg_gr, 1.0);

  set(F::gr, F::ss, jj);
  set(F::gr, F::rs_gr, -1.0);
  set(F::gr, F::rg_gr, -1.0);

  set(F::rr, F::rs, 1.0);
  set(F::rr, F::sr, -1.0);

  set(F::rs_gr, F::rs, jj);
  set(F::rs_gr, F::gr, -nj);

  set(F::sr_rg, F::sr, -jj);
  set(F::sr_rg, F::rg, nj);

  set(F::rs_sr, F::rs, nj - 1.0);
  set(F::rs_sr, F::sr, -(nj - 1.0));

  set(F::rg_gr, F::rg, jj);
  set(F::rg_gr, F::gr, -jj);

  // Each site whose ket and bra disagree on occupying |r> contributes -1/2.
  for (int i = 0; i < dim; ++i) {
    switch (ops.labels[i].family) {
      case F::ss:
      case F::rr:
        break;
      case F::rs:
      case F::sr:
      case F::rg:
      case F::gr:
        ops.dephasing[i] = -0.5;
        break;
      default:
        ops.dephasing[i] = -1.0;
        break;
    }
  }
  return ops;
}

Eigen::VectorXd trace_vector(const BlockOperators& ops) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ops.dimension());
  if (ops.j != 0) return v;
  for (int i = 0; i < ops.dimension(); ++i) {
    const Family f = ops.labels[i].family;
    if (f == Family::ss || f == Family::rr) {
      v[i] = placement_count(ops.labels[i]) * ops.norms[i];
    }
  }
  return v;
}

}  // namespace qndcount
