#include <gtest/gtest.h>

#include <cmath>

#include <qndcount/dense_oracle.hpp>
#include <qndcount/errors.hpp>

#include "reference.hpp"

namespace qndcount {
namespace {

TEST(DenseOracle, SymmetricKetsAreNormalizedAndCountExcitations) {
  for (int atoms = 1; atoms <= 4; ++atoms) {
    for (int n = 0; n <= atoms; ++n) {
      const VectorXc s = build_symmetric_ket(n, atoms);
      EXPECT_NEAR(s.norm(), 1.0, 1e-14);
      for (int i = 0; i < s.size(); ++i) {
        if (std::abs(s(i)) == 0.0) continue;
        EXPECT_EQ(excitation_count(i, atoms), n);
        EXPECT_EQ(rydberg_count(i, atoms), 0);
      }
      if (n == 0) continue;
      const VectorXc r = build_rydberg_ket(n, atoms);
      EXPECT_NEAR(r.norm(), 1.0, 1e-14);
      for (int i = 0; i < r.size(); ++i) {
        if (std::abs(r(i)) != 0.0) EXPECT_EQ(rydberg_count(i, atoms), 1);
      }
    }
  }
}

TEST(DenseOracle, CollectiveCouplingIsEnhanced) {
  const double omega = 0.8;
  for (int atoms = 2; atoms <= 4; ++atoms) {
    const MatrixXc h = testing::blockaded_hamiltonian(atoms, omega);
    for (int n = 1; n <= atoms; ++n) {
      const VectorXc hs = h * build_symmetric_ket(n, atoms);
      const VectorXc expect = std::sqrt(static_cast<double>(n)) * omega * build_rydberg_ket(n, atoms);
      EXPECT_LT((hs - expect).norm(), 1e-12) << "n=" << n << " N=" << atoms;
    }
  }
}

TEST(DenseOracle, SiteOrderingConvention) {
  // Site 0 is the most significant base-3 digit.
  EXPECT_EQ(level_at(2 * 9, 0, 3), Level::r);
  EXPECT_EQ(level_at(1, 2, 3), Level::s);
  EXPECT_EQ(dense_dimension(4), 81);
  EXPECT_THROW(build_symmetric_ket(1, kMaxDenseAtoms + 1), ResourceError);
}

TEST(DenseOracle, NoiselessRabiOscillation) {
  const double omega = 1.0;
  const DenseState rho0 = dense_from_ket(build_symmetric_ket(2, 3), 3);
  std::vector<double> times;
  for (int k = 0; k < 20; ++k) times.push_back(0.25 * k);
  const auto series = evolve_dense_series(rho0, times, omega, 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double expect = std::pow(std::sin(std::sqrt(2.0) * omega * times[k]), 2);
    EXPECT_NEAR(sector_populations_dense(series[k]).rydberg, expect, 1e-8);
  }
}

TEST(DenseOracle, DephasedEvolutionStaysPhysical) {
  const DenseState rho0 = dense_from_ket(build_symmetric_ket(2, 4), 4);
  const DenseState rho = evolve_dense(rho0, 3.0, 1.0, 0.6);
  EXPECT_LT(dense_validity_residual(rho), 1e-8);
  const auto p = sector_populations_dense(rho);
  EXPECT_NEAR(p.no_rydberg + p.rydberg, 1.0, 1e-9);
}

TEST(DenseOracle, ProjectionProbabilityAndImpossibleOutcome) {
  const DenseState rho0 = dense_from_ket(build_symmetric_ket(1, 2), 2);
  EXPECT_THROW(project_dense(rho0, Outcome::Rydberg), ImpossibleOutcomeError);
  const DenseState rho = evolve_dense(rho0, 0.4, 1.0, 0.2);
  const auto pr = project_dense(rho, Outcome::Rydberg);
  EXPECT_NEAR(pr.probability, sector_populations_dense(rho).rydberg, 1e-14);
  EXPECT_NEAR(pr.state.rho.trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(sector_populations_dense(pr.state).rydberg, 1.0, 1e-12);
}

TEST(DenseOracle, EjectingRydbergKetLeavesSymmetricState) {
  for (int atoms = 2; atoms <= 4; ++atoms) {
    for (int n = 1; n <= atoms; ++n) {
      const DenseState out = eject_dense(dense_from_ket(build_rydberg_ket(n, atoms), atoms));
      ASSERT_EQ(out.atoms, atoms - 1);
      const DenseState expect = dense_from_ket(build_symmetric_ket(n - 1, atoms - 1), atoms - 1);
      EXPECT_LT((out.rho - expect.rho).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(DenseOracle, EjectionRequiresRydbergSector) {
  EXPECT_THROW(eject_dense(dense_from_ket(build_symmetric_ket(1, 3), 3)), PreconditionError);
}

TEST(DenseOracle, SuperketExpansionIsLinear) {
  const auto labels = enumerate_basis(1, 3, 0);
  VectorXc x = VectorXc::Zero(static_cast<Eigen::Index>(labels.size()));
  x(0) = 0.3;
  x(3) = Complex(0.0, 2.0);
  const MatrixXc m = expand_superket(labels, x);
  const MatrixXc expect = 0.3 * expand_label(labels[0]) + Complex(0.0, 2.0) * expand_label(labels[3]);
  EXPECT_LT((m - expect).norm(), 1e-14);
}

}  // namespace
}  // namespace qndcount
