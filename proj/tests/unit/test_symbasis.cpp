#include <gtest/gtest.h>

#include <qndcount/dense_oracle.hpp>
#include <qndcount/errors.hpp>
#include <qndcount/symbasis.hpp>

#include "reference.hpp"

namespace qndcount {
namespace {

std::vector<std::string> names(const std::vector<BasisLabel>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.emplace_back(to_string(l.family));
  return out;
}

TEST(Symbasis, LabelCountsOfLargeBlocks) {
  EXPECT_EQ(enumerate_basis(2, 6, 1).size(), 9u);
  EXPECT_EQ(enumerate_basis(3, 6, 1).size(), 10u);
}

TEST(Symbasis, PopulationBlockOfTwoExcitations) {
  const auto ops = build_block(2, 6, 0, 1.0, 1.0);
  EXPECT_EQ(names(ops.labels), (std::vector<std::string>{"ss", "rs", "sr", "rr", "rs_sr"}));
  const std::vector<double> d{0.0, -0.5, -0.5, 0.0, -1.0};
  for (int k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(ops.dephasing(k), d[k]) << k;
}

TEST(Symbasis, SingleExcitationHasNoDoubleCoherence) {
  const auto labels = enumerate_basis(1, 3, 0);
  EXPECT_EQ(names(labels), (std::vector<std::string>{"ss", "rs", "sr", "rr"}));
}

TEST(Symbasis, BlockIndexOutOfRangeThrows) {
  EXPECT_THROW(validate_block_index(2, 3, 2), DomainError);
  EXPECT_THROW(validate_block_index(4, 3, 0), DomainError);
  EXPECT_THROW(validate_block_index(1, 3, -1), DomainError);
  EXPECT_NO_THROW(validate_block_index(0, 3, 0));
}

TEST(Symbasis, FamilyNamesRoundTrip) {
  for (Family f : kAllFamilies) EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_THROW(family_from_string("xx"), Error);
}

// Brute force: assign one of the nine site operators to every site and count
// the assignments whose multiset matches.
double brute_placements(const BasisLabel& l) {
  const SiteMultiset want = site_multiset(l.family, l.n, l.atoms, l.j);
  int total = 1;
  for (int i = 0; i < l.atoms; ++i) total *= 9;
  double count = 0.0;
  for (int code = 0; code < total; ++code) {
    SiteMultiset have{};
    int c = code;
    for (int i = 0; i < l.atoms; ++i) {
      ++have[c % 9];
      c /= 9;
    }
    count += have == want;
  }
  return count;
}

TEST(Symbasis, PlacementCountsMatchEnumeration) {
  for (int atoms = 1; atoms <= 4; ++atoms) {
    for (int n = 0; n <= atoms; ++n) {
      for (int j = 0; j <= max_block_index(n, atoms); ++j) {
        for (const auto& l : enumerate_basis(n, atoms, j)) {
          EXPECT_DOUBLE_EQ(placement_count(l), brute_placements(l))
              << to_string(l.family) << " n=" << n << " N=" << atoms << " j=" << j;
        }
      }
    }
  }
}

TEST(Symbasis, ExpandedLabelsAreOrthonormal) {
  for (int atoms = 2; atoms <= 4; ++atoms) {
    for (int n = 1; n <= atoms; ++n) {
      for (int j = 0; j <= max_block_index(n, atoms); ++j) {
        const auto labels = enumerate_basis(n, atoms, j);
        for (std::size_t a = 0; a < labels.size(); ++a) {
          const MatrixXc ea = expand_label(labels[a]);
          for (std::size_t b = 0; b < labels.size(); ++b) {
            const Complex ip = (ea.adjoint() * expand_label(labels[b])).trace();
            EXPECT_NEAR(std::abs(ip - Complex(a == b ? 1.0 : 0.0)), 0.0, 1e-12);
          }
        }
      }
    }
  }
}

// The block generator must equal the dense Lindbladian restricted to the
// span of the labels, and that span must be invariant.
class GeneratorProjection : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(GeneratorProjection, MatchesDenseLindbladian) {
  const auto [n, atoms, j] = GetParam();
  const auto ops = build_block(n, atoms, j, 1.3, 0.7);
  const auto ref = testing::project_generator(ops);
  EXPECT_LT(ref.closure_residual, 1e-12);
  EXPECT_LT((ref.g - ops.generator(true)).cwiseAbs().maxCoeff(), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Blocks, GeneratorProjection,
                         ::testing::Values(std::tuple{1, 2, 0}, std::tuple{1, 2, 1},
                                           std::tuple{1, 3, 0}, std::tuple{1, 3, 1},
                                           std::tuple{2, 3, 0}, std::tuple{2, 3, 1},
                                           std::tuple{2, 4, 0}, std::tuple{2, 4, 1},
                                           std::tuple{2, 4, 2}, std::tuple{3, 4, 0},
                                           std::tuple{3, 4, 1}, std::tuple{4, 4, 0},
                                           std::tuple{2, 5, 2}, std::tuple{3, 5, 1}));

TEST(Symbasis, TraceVectorMeasuresPopulations) {
  const auto ops = build_block(2, 4, 0, 1.0, 0.0);
  const auto v = trace_vector(ops);
  for (int k = 0; k < ops.dimension(); ++k) {
    const double tr = expand_label(ops.labels[k]).trace().real();
    EXPECT_NEAR(v(k), tr, 1e-12) << to_string(ops.labels[k].family);
  }
}

TEST(Symbasis, DriveOffLeavesOnlyDephasing) {
  const auto ops = build_block(3, 5, 1, 2.0, 0.5);
  const MatrixXc g = ops.generator(false);
  EXPECT_LT((g - MatrixXc((0.5 * ops.dephasing).cast<Complex>().asDiagonal())).norm(), 1e-15);
  EXPECT_LT((ops.hamiltonian - ops.hamiltonian.adjoint()).norm(), 1e-12);
}

}  // namespace
}  // namespace qndcount
