#include <gtest/gtest.h>

#include <cmath>

#include "bdfl/definetti_q.hpp"
#include "bdfl/locfock.hpp"

using namespace bdfl;

namespace {

CMatrix e1_projector(int d) {
  CMatrix p = CMatrix::Zero(d, d);
  p(0, 0) = 1.0;
  return p;
}

SectorOperator product_example(int d, int N, double a2) {
  OneBodyVector u = OneBodyVector::Zero(d);
  u[0] = std::sqrt(a2);
  u[1] = cplx(0.0, std::sqrt(1.0 - a2));
  return pure_state(product_state(u, N), d, N);
}

}  // namespace

TEST(Localize, FullyLocalized) {
  OneBodyVector e = OneBodyVector::Zero(2);
  e[0] = 1.0;
  const SectorOperator g = pure_state(product_state(e, 4), 2, 4);
  const DiagonalFockState loc = localize(g, e1_projector(2));
  for (int k = 0; k < 4; ++k) EXPECT_LE(loc.sectors[static_cast<std::size_t>(k)].matrix.cwiseAbs().maxCoeff(), kExactTol);
  EXPECT_LE((loc.sectors[4].matrix - g.matrix).cwiseAbs().maxCoeff(), kExactTol);
}

TEST(Localize, BinomialLaw) {
  const int N = 6;
  const double a2 = 0.3;
  const DiagonalFockState loc = localize(product_example(3, N, a2), e1_projector(3));
  for (int k = 0; k <= N; ++k) {
    const auto& gk = loc.sectors[static_cast<std::size_t>(k)].matrix;
    const double expect = static_cast<double>(binomial(N, k)) * std::pow(a2, k) * std::pow(1.0 - a2, N - k);
    EXPECT_NEAR(gk.trace().real(), expect, kChainedTol);
    // G_k ∝ |e_1^k><e_1^k|
    OneBodyVector e = OneBodyVector::Zero(3);
    e[0] = 1.0;
    const CVector ek = product_state(e, k);
    EXPECT_LE((gk - expect * ek * ek.adjoint()).cwiseAbs().maxCoeff(), kChainedTol);
  }
  EXPECT_NEAR(loc.total_trace(), 1.0, kChainedTol);
}

TEST(Localize, RejectsNonProjector) {
  const SectorOperator g = random_density(2, 2, 2, 42, 0);
  EXPECT_THROW(localize(g, 0.5 * CMatrix::Identity(2, 2)), Error);
}

TEST(Localize, IdentityProjector) {
  const SectorOperator g = random_density(3, 3, 4, 42, 1);
  const auto tp = localize(g, CMatrix::Identity(3, 3)).traces();
  const auto tq = localize(g, CMatrix::Zero(3, 3)).traces();
  EXPECT_NEAR(tp[3], 1.0, kChainedTol);
  EXPECT_NEAR(tq[0], 1.0, kChainedTol);
  EXPECT_TRUE(verify_duality(g, CMatrix::Identity(3, 3)).pass);
}

TEST(Localize, PositiveSectorsAndUnitTrace) {
  for (std::uint64_t i = 0; i < 10; ++i) {
    const SectorOperator g = random_density(3, 3, 10, 42, 10 + i);
    const DiagonalFockState loc = localize(g, random_projector(3, 1 + static_cast<int>(i % 2), 42, i));
    EXPECT_NEAR(loc.total_trace(), 1.0, kChainedTol);
    for (const auto& s : loc.sectors) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(s.matrix, Eigen::EigenvaluesOnly);
      EXPECT_GE(es.eigenvalues().minCoeff(), -kChainedTol);
    }
  }
}

TEST(FockReduced, PureInputIsPartialTrace) {
  const SectorOperator g = random_density(3, 3, 4, 42, 2);
  DiagonalFockState s;
  s.d = 3;
  s.N = 3;
  for (int k = 0; k < 3; ++k) {
    const Index D = sym_dimension(3, k);
    s.sectors.emplace_back(3, k, CMatrix::Zero(D, D));
  }
  s.sectors.push_back(g);
  for (int n = 1; n <= 3; ++n)
    EXPECT_LE((fock_reduced_matrix(s, n).matrix - partial_trace(g, n).matrix).cwiseAbs().maxCoeff(), kExactTol);
}

TEST(FockReduced, LocalizedProductTrace) {
  const DiagonalFockState loc = localize(product_example(2, 5, 0.35), e1_projector(2));
  EXPECT_NEAR(fock_reduced_matrix(loc, 1).matrix.trace().real(), 0.35, kChainedTol);
}

TEST(FockReduced, MatchesCompressedMarginal) {
  int checked = 0;
  for (int d = 2; d <= 3; ++d)
    for (int N = 3; N <= 4; ++N)
      for (std::uint64_t i = 0; i < 5; ++i) {
        const SectorOperator g = random_density(d, N, 3, 42, 40 + i);
        const CMatrix p = random_projector(d, 1 + static_cast<int>(i % (d - 1)), 42, 50 + i);
        const DiagonalFockState loc = localize(g, p);
        for (int n = 1; n <= 2; ++n) {
          const CMatrix pn = sector_representation(p, n);
          const CMatrix rhs = pn * partial_trace(g, n).matrix * pn.adjoint();
          EXPECT_LE((fock_reduced_matrix(loc, n).matrix - rhs).cwiseAbs().maxCoeff(), kChainedTol);
        }
        ++checked;
      }
  EXPECT_EQ(checked, 20);
}

TEST(Duality, ProductAndRandom) {
  EXPECT_TRUE(verify_duality(product_example(2, 7, 0.6), e1_projector(2)).pass);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const SectorOperator g = random_density(3, 3, 10, 42, 100 + i);
    EXPECT_TRUE(verify_duality(g, random_projector(3, 1 + static_cast<int>(i % 2), 42, 200 + i)).pass);
  }
}

TEST(MassDistribution, Moments) {
  const double a2 = 0.4;
  double prev = INFINITY;
  for (int N : {5, 10, 20, 40}) {
    const DiagonalFockState loc = localize(product_example(2, N, a2), e1_projector(2));
    EXPECT_NEAR(mass_distribution(loc, [](double) { return 1.0; }), 1.0, kChainedTol);
    EXPECT_NEAR(mass_distribution(loc, [](double x) { return x; }), a2, kChainedTol);
    const double dev = std::abs(mass_distribution(loc, [](double x) { return x * x; }) - a2 * a2);
    EXPECT_NEAR(dev, a2 * (1.0 - a2) / N, kChainedTol);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
}

TEST(RandomProjector, IsProjectorOfRank) {
  for (int r = 0; r <= 3; ++r) {
    const CMatrix p = random_projector(3, r, 42, static_cast<std::uint64_t>(r));
    EXPECT_TRUE(is_orthogonal_projector(p));
    EXPECT_NEAR(p.trace().real(), r, kExactTol);
  }
  const CMatrix u = random_unitary(4, 42, 9);
  EXPECT_LE((u.adjoint() * u - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), kExactTol);
}
