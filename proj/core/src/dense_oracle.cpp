#include "qndcount/dense_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "qndcount/errors.hpp"

namespace qndcount {
namespace {

namespace odeint = boost::numeric::odeint;
using OdeState = std::vector<Complex>;

void check_atoms(int atoms) {
  if (atoms < 1) throw DomainError("dense oracle requires N >= 1");
  if (atoms > kMaxDenseAtoms) {
    throw ResourceError("dense oracle supports N <= " + std::to_string(kMaxDenseAtoms) +
                        ", got N=" + std::to_string(atoms));
  }
}

int pow3(int k) {
  int p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

int with_level(int index, int site, int atoms, Level level) {
  const int w = pow3(atoms - 1 - site);
  const int current = (index / w) % 3;
  return index + (static_cast<int>(level) - current) * w;
}

int rydberg_site(int index, int atoms) {
  for (int i = 0; i < atoms; ++i) {
    if (level_at(index, i, atoms) == Level::r) return i;
  }
  return -1;
}

// Drops `site` from a product-basis index of `atoms` sites.
int remove_site(int index, int site, int atoms) {
  int out = 0;
  for (int i = 0; i < atoms; ++i) {
    if (i == site) continue;
    out = 3 * out + static_cast<int>(level_at(index, i, atoms));
  }
  return out;
}

// Reduced problem on the conserved subspace touched by rho.
struct Subspace {
  std::vector<int> basis;  // product-basis indices
  MatrixXc hamiltonian;
  Eigen::MatrixXd dephasing;  // elementwise rates multiplying rho_ab
};

Subspace conserved_subspace(const DenseState& state, double omega) {
  const int atoms = state.atoms;
  const int dim = dense_dimension(atoms);
  std::set<int> sectors;
  for (int a = 0; a < dim; ++a) {
    const bool touched = state.rho.row(a).cwiseAbs().maxCoeff() > 0.0 ||
                         state.rho.col(a).cwiseAbs().maxCoeff() > 0.0;
    if (!touched) continue;
    if (rydberg_count(a, atoms) > 1) {
      throw PreconditionError("dense state has support outside the single-Rydberg subspace");
    }
    sectors.insert(excitation_count(a, atoms));
  }

  Subspace sub;
  for (int a = 0; a < dim; ++a) {
    if (rydberg_count(a, atoms) <= 1 && sectors.count(excitation_count(a, atoms))) {
      sub.basis.push_back(a);
    }
  }
  const int d = static_cast<int>(sub.basis.size());
  std::vector<int> position(dim, -1);
  for (int k = 0; k < d; ++k) position[sub.basis[k]] = k;

  sub.hamiltonian = MatrixXc::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const int a = sub.basis[k];
    const bool has_r = rydberg_count(a, atoms) == 1;
    for (int site = 0; site < atoms; ++site) {
      const Level l = level_at(a, site, atoms);
      int b = -1;
      if (l == Level::s && !has_r) b = with_level(a, site, atoms, Level::r);
      if (l == Level::r) b = with_level(a, site, atoms, Level::s);
      if (b >= 0 && position[b] >= 0) sub.hamiltonian(position[b], k) += omega;
    }
  }

  sub.dephasing = Eigen::MatrixXd::Zero(d, d);
  for (int p = 0; p < d; ++p) {
    const int ra = rydberg_site(sub.basis[p], atoms);
    for (int q = 0; q < d; ++q) {
      const int rb = rydberg_site(sub.basis[q], atoms);
      double rate = 0.0;
      if (ra >= 0) rate -= 0.5;
      if (rb >= 0) rate -= 0.5;
      if (ra >= 0 && ra == rb) rate += 1.0;
      sub.dephasing(p, q) = rate;
    }
  }
  return sub;
}

}  // namespace

int dense_dimension(int atoms) { return pow3(atoms); }

Level level_at(int index, int site, int atoms) {
  return static_cast<Level>((index / pow3(atoms - 1 - site)) % 3);
}

int rydberg_count(int index, int atoms) {
  int c = 0;
  for (int i = 0; i < atoms; ++i) c += level_at(index, i, atoms) == Level::r;
  return c;
}

int excitation_count(int index, int atoms) {
  int c = 0;
  for (int i = 0; i < atoms; ++i) c += level_at(index, i, atoms) != Level::g;
  return c;
}

VectorXc build_symmetric_ket(int n, int atoms) {
  check_atoms(atoms);
  if (n < 0 || n > atoms) throw DomainError("|S_n> requires 0 <= n <= N");
  const int dim = dense_dimension(atoms);
  VectorXc psi = VectorXc::Zero(dim);
  for (int a = 0; a < dim; ++a) {
    bool only_gs = true;
    int s_count = 0;
    for (int i = 0; i < atoms; ++i) {
      const Level l = level_at(a, i, atoms);
      if (l == Level::r) only_gs = false;
      s_count += l == Level::s;
    }
    if (only_gs && s_count == n) psi[a] = 1.0;
  }
  return psi / psi.norm();
}

VectorXc build_rydberg_ket(int n, int atoms) {
  check_atoms(atoms);
  if (n < 1 || n > atoms) throw DomainError("|R_n> requires 1 <= n <= N");
  const int dim = dense_dimension(atoms);
  VectorXc psi = VectorXc::Zero(dim);
  for (int a = 0; a < dim; ++a) {
    if (rydberg_count(a, atoms) == 1 && excitation_count(a, atoms) == n) psi[a] = 1.0;
  }
  return psi / psi.norm();
}

DenseState dense_from_ket(const VectorXc& psi, int atoms) {
  check_atoms(atoms);
  if (psi.size() != dense_dimension(atoms)) throw DomainError("ket dimension does not match 3^N");
  return {atoms, psi * psi.adjoint()};
}

std::vector<DenseState> evolve_dense_series(const DenseState& state, std::span<const double> times,
                                            double omega, double gamma,
                                            const DenseOptions& options) {
  check_atoms(state.atoms);
  if (!(omega >= 0.0) || !(gamma >= 0.0)) throw DomainError("evolve_dense requires omega, gamma >= 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || (k > 0 && times[k] < times[k - 1])) {
      throw DomainError("evolve_dense requires non-negative, non-decreasing times");
    }
  }

  const Subspace sub = conserved_subspace(state, omega);
  const int d = static_cast<int>(sub.basis.size());

  OdeState x(static_cast<std::size_t>(d) * d);
  Eigen::Map<MatrixXc> xm(x.data(), d, d);
  for (int q = 0; q < d; ++q) {
    for (int p = 0; p < d; ++p) xm(p, q) = state.rho(sub.basis[p], sub.basis[q]);
  }
  const Complex trace0 = xm.trace();

  const Complex minus_i(0.0, -1.0);
  auto rhs = [&](const OdeState& y, OdeState& dydt, double) {
    Eigen::Map<const MatrixXc> rho(y.data(), d, d);
    Eigen::Map<MatrixXc> out(dydt.data(), d, d);
    out.noalias() = minus_i * (sub.hamiltonian * rho);
    out.noalias() -= minus_i * (rho * sub.hamiltonian);
    if (gamma > 0.0) out += gamma * sub.dephasing.cast<Complex>().cwiseProduct(rho);
  };

  std::vector<DenseState> out;
  out.reserve(times.size());
  auto emit = [&](const OdeState& y) {
    DenseState s{state.atoms, MatrixXc::Zero(state.rho.rows(), state.rho.cols())};
    Eigen::Map<const MatrixXc> rho(y.data(), d, d);
    for (int q = 0; q < d; ++q) {
      for (int p = 0; p < d; ++p) s.rho(sub.basis[p], sub.basis[q]) = rho(p, q);
    }
    out.push_back(std::move(s));
  };

  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol,
                                         odeint::runge_kutta_dopri5<OdeState>());
  double t = 0.0;
  for (double target : times) {
    if (target > t) {
      try {
        const double dt0 = std::min(target - t, 1e-3 / std::max(omega + gamma, 1e-300));
        odeint::integrate_adaptive(stepper, rhs, x, t, target, dt0);
      } catch (const std::exception& e) {
        throw IntegratorError(std::string("dense integration failed: ") + e.what(),
                              std::abs(xm.trace() - trace0));
      }
      t = target;
    }
    const double residual = std::abs(xm.trace() - trace0);
    if (residual > 1e-8) throw IntegratorError("dense integration lost trace", residual);
    emit(x);
  }
  return out;
}

DenseState evolve_dense(const DenseState& state, double t, double omega, double gamma,
                        const DenseOptions& options) {
  const double times[] = {t};
  return std::move(evolve_dense_series(state, times, omega, gamma, options).front());
}

SectorPopulations sector_populations_dense(const DenseState& state) {
  double pr = 0.0;
  double total = 0.0;
  for (int a = 0; a < state.rho.rows(); ++a) {
    const double w = state.rho(a, a).real();
    total += w;
    if (rydberg_count(a, state.atoms) >= 1) pr += w;
  }
  pr = std::clamp(pr / total, 0.0, 1.0);
  return {1.0 - pr, pr};
}

DenseProjection project_dense(const DenseState& state, Outcome outcome) {
  const int dim = static_cast<int>(state.rho.rows());
  const bool want_r = outcome == Outcome::Rydberg;
  std::vector<char> keep(dim);
  for (int a = 0; a < dim; ++a) keep[a] = (rydberg_count(a, state.atoms) >= 1) == want_r;

  DenseProjection result{0.0, {state.atoms, MatrixXc::Zero(dim, dim)}};
  double total = 0.0;
  for (int a = 0; a < dim; ++a) {
    total += state.rho(a, a).real();
    if (keep[a]) result.probability += state.rho(a, a).real();
  }
  result.probability /= total;
  if (!(result.probability > 0.0)) {
    throw ImpossibleOutcomeError("projection onto " + std::string(to_string(outcome)) +
                                 " sector has zero probability");
  }
  for (int b = 0; b < dim; ++b) {
    if (!keep[b]) continue;
    for (int a = 0; a < dim; ++a) {
      if (keep[a]) result.state.rho(a, b) = state.rho(a, b);
    }
  }
  result.state.rho /= result.state.rho.trace().real();
  return result;
}

DenseState eject_dense(const DenseState& state) {
  const int atoms = state.atoms;
  if (atoms < 2) throw PreconditionError("ejection requires at least two atoms");
  const int dim = static_cast<int>(state.rho.rows());
  const double scale = state.rho.cwiseAbs().maxCoeff();
  DenseState out{atoms - 1, MatrixXc::Zero(dense_dimension(atoms - 1), dense_dimension(atoms - 1))};
  for (int b = 0; b < dim; ++b) {
    const int rb = rydberg_site(b, atoms);
    for (int a = 0; a < dim; ++a) {
      const Complex v = state.rho(a, b);
      if (v == Complex(0.0)) continue;
      const int ra = rydberg_site(a, atoms);
      if (ra < 0 || rb < 0) {
        if (std::abs(v) > 1e-12 * std::max(scale, 1.0)) {
          throw PreconditionError("ejection requires a state in the Rydberg sector");
        }
        continue;
      }
      if (ra != rb) continue;
      out.rho(remove_site(a, ra, atoms), remove_site(b, rb, atoms)) += v;
    }
  }
  const double tr = out.rho.trace().real();
  if (!(tr > 0.0)) throw PreconditionError("ejection of a zero-trace state");
  out.rho /= tr;
  return out;
}

MatrixXc expand_superket(std::span<const BasisLabel> labels, const VectorXc& coeffs) {
  if (labels.empty()) throw DomainError("expand_superket requires at least one label");
  if (static_cast<std::size_t>(coeffs.size()) != labels.size()) {
    throw DomainError("coefficient count does not match label count");
  }
  const int atoms = labels.front().atoms;
  check_atoms(atoms);
  const int dim = dense_dimension(atoms);
  MatrixXc out = MatrixXc::Zero(dim, dim);

  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (coeffs[k] == Complex(0.0)) continue;
    const BasisLabel& label = labels[k];
    if (label.atoms != atoms) throw DomainError("labels span different atom counts");
    const SiteMultiset m = site_multiset(label.family, label.n, label.atoms, label.j);
    std::vector<int> sites;
    for (int slot = 0; slot < 9; ++slot) {
      if (m[slot] < 0) throw DomainError("label does not exist for this block");
      sites.insert(sites.end(), m[slot], slot);
    }
    const Complex amp = coeffs[k] * normalization(label);
    do {
      int ket = 0;
      int bra = 0;
      for (int slot : sites) {
        ket = 3 * ket + slot / 3;
        bra = 3 * bra + slot % 3;
      }
      out(ket, bra) += amp;
    } while (std::next_permutation(sites.begin(), sites.end()));
  }
  return out;
}

MatrixXc expand_label(const BasisLabel& label) {
  VectorXc one(1);
  one[0] = 1.0;
  return expand_superket(std::span<const BasisLabel>(&label, 1), one);
}

double dense_validity_residual(const DenseState& state) {
  const MatrixXc& rho = state.rho;
  double residual = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  residual = std::max(residual, std::abs(rho.trace() - Complex(1.0)));
  Eigen::SelfAdjointEigenSolver<MatrixXc> eig(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  residual = std::max(residual, std::max(0.0, -eig.eigenvalues().minCoeff()));
  return residual;
}

}  // namespace qndcount
