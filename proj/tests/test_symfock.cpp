#include <gtest/gtest.h>

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "bdfl/definetti_q.hpp"
#include "bdfl/sampling.hpp"
#include "bdfl/symfock.hpp"

using namespace bdfl;

namespace {

OneBodyVector unit(int d, std::uint64_t i) { return SphereSampler(d, 7, 99).sample(i); }

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(Dimension, SmallCases) {
  EXPECT_EQ(sym_dimension(2, 3), 4);
  EXPECT_EQ(sym_dimension(5, 0), 1);
  EXPECT_EQ(sym_dimension(3, 4), 15);
  EXPECT_THROW(binomial(200, 100), OverflowError);
}

TEST(Basis, LexicographicOrder) {
  EXPECT_EQ(enumerate_basis(2, 2), (std::vector<OccupationVector>{{0, 2}, {1, 1}, {2, 0}}));
  EXPECT_EQ(enumerate_basis(1, 5), (std::vector<OccupationVector>{{5}}));
  EXPECT_EQ(enumerate_basis(3, 1), (std::vector<OccupationVector>{{0, 0, 1}, {0, 1, 0}, {1, 0, 0}}));
  const auto& b = *OccupationBasis::get(3, 4);
  for (Index i = 0; i < b.size(); ++i) EXPECT_EQ(*b.index_of(b[i]), i);
  EXPECT_FALSE(b.index_of({1, 1, 1}).has_value());
}

TEST(Creation, VacuumToOneParticle) {
  OneBodyVector e1(1);
  e1 << 1.0;
  const CMatrix a = CMatrix(creation_matrix(e1, 0));
  ASSERT_EQ(a.rows(), 1);
  ASSERT_EQ(a.cols(), 1);
  EXPECT_NEAR(std::abs(a(0, 0) - cplx(1.0)), 0.0, 1e-15);
}

TEST(Creation, CanonicalCommutationRelations) {
  for (int N = 0; N <= 6; ++N) {
    for (int t = 0; t < 100; ++t) {
      const OneBodyVector f = unit(3, 2 * t), g = unit(3, 2 * t + 1);
      const CMatrix comm = CMatrix(annihilation_matrix(f, N + 1)) * CMatrix(creation_matrix(g, N)) -
                           (N == 0 ? CMatrix::Zero(1, 1)
                                   : CMatrix(CMatrix(creation_matrix(g, N - 1)) * CMatrix(annihilation_matrix(f, N))));
      const Index D = sym_dimension(3, N);
      EXPECT_LE(max_abs(comm - f.dot(g) * CMatrix::Identity(D, D)), kExactTol) << "N=" << N;
    }
  }
}

TEST(Creation, CoherentPowerIsProductState) {
  const OneBodyVector u = unit(2, 5);
  CVector vac(1);
  vac << 1.0;
  const CVector psi = CMatrix(creation_power(u, 0, 4)) * vac / std::sqrt(24.0);
  EXPECT_LE((psi - product_state(u, 4)).cwiseAbs().maxCoeff(), kExactTol);
}

TEST(Annihilation, SingleMode) {
  OneBodyVector e1(2);
  e1 << 1.0, 0.0;
  // |1,0> is index 1 in [(0,1),(1,0)], vacuum is the only state of sector 0
  CVector in = CVector::Zero(2);
  in[sector_one_index(2, 0)] = 1.0;
  const CVector out = CMatrix(annihilation_matrix(e1, 1)) * in;
  ASSERT_EQ(out.size(), 1);
  EXPECT_NEAR(std::abs(out[0] - cplx(1.0)), 0.0, 1e-15);
}

TEST(Annihilation, CoherentAction) {
  const OneBodyVector u = unit(3, 11), f = unit(3, 12);
  const CVector lhs = CMatrix(annihilation_matrix(f, 3)) * product_state(u, 3);
  const CVector rhs = std::sqrt(3.0) * f.dot(u) * product_state(u, 2);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), kExactTol);
  const CVector one = CMatrix(annihilation_matrix(f, 1)) * product_state(u, 1);
  EXPECT_LE(std::abs(one[0] - f.dot(u)), kExactTol);
}

TEST(ProductState, Coefficients) {
  OneBodyVector e1 = OneBodyVector::Zero(3);
  e1[0] = 1.0;
  const CVector p = product_state(e1, 4);
  const Index at = *OccupationBasis::get(3, 4)->index_of({4, 0, 0});
  EXPECT_NEAR(std::abs(p[at] - cplx(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(p.norm(), 1.0, 1e-15);

  OneBodyVector h(2);
  h << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const CVector q = product_state(h, 2);
  EXPECT_NEAR(q[0].real(), 0.5, 1e-15);
  EXPECT_NEAR(q[1].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(q[2].real(), 0.5, 1e-15);

  const OneBodyVector u = unit(3, 20), v = unit(3, 21);
  EXPECT_LE(std::abs(product_state(u, 5).dot(product_state(v, 5)) - std::pow(u.dot(v), 5)), kExactTol);
  OneBodyVector bad = u * 1.1;
  EXPECT_THROW(product_state(bad, 2), Error);
}

TEST(PartialTrace, ProductStateFactorizes) {
  const OneBodyVector u = unit(2, 30);
  const SectorOperator gamma = pure_state(product_state(u, 4), 2, 4);
  const SectorOperator g2 = partial_trace(gamma, 2);
  const CVector u2 = product_state(u, 2);
  EXPECT_LE(max_abs(g2.matrix - u2 * u2.adjoint()), kExactTol);
  EXPECT_LE(max_abs(partial_trace(gamma, 4).matrix - gamma.matrix), kExactTol);
}

TEST(PartialTrace, MatchesWickElements) {
  const SectorOperator gamma = random_density(2, 3, 4, 42, 0);
  const SectorOperator g2 = partial_trace(gamma, 2);
  for (int t = 0; t < 20; ++t) {
    const OneBodyVector v = unit(2, 40 + t);
    const CVector v2 = product_state(v, 2);
    EXPECT_LE(std::abs(v2.dot(g2.matrix * v2).real() - wick_reduced_element(gamma, v, 2)), kChainedTol);
  }
}

TEST(PartialTrace, DensityPropertiesAndNesting) {
  const SectorOperator gamma = random_density(3, 5, 6, 42, 3);
  for (int n = 0; n <= 5; ++n) {
    const SectorOperator gn = partial_trace(gamma, n);
    EXPECT_NO_THROW(require_density(gn));
    for (int m = 0; m <= n; ++m)
      EXPECT_LE(max_abs(partial_trace(gn, m).matrix - partial_trace(gamma, m).matrix), kExactTol);
  }
}

TEST(WickElement, Examples) {
  const OneBodyVector u = unit(2, 50), v = unit(2, 51);
  const SectorOperator pure = pure_state(product_state(u, 4), 2, 4);
  EXPECT_LE(std::abs(wick_reduced_element(pure, v, 2) - std::pow(std::abs(v.dot(u)), 4)), kChainedTol);
  EXPECT_LE(std::abs(wick_reduced_element(random_density(2, 3, 2, 42, 5), v, 0) - 1.0), kChainedTol);
  const SectorOperator mixed = random_density(2, 3, 4, 42, 6);
  const CMatrix g1 = partial_trace(mixed, 1).matrix;
  const CVector v1 = product_state(v, 1);
  EXPECT_LE(std::abs(wick_reduced_element(mixed, v, 1) - v1.dot(g1 * v1).real()), kChainedTol);
}

TEST(TraceNorm, Examples) {
  const SectorOperator a = random_density(2, 2, 3, 42, 7);
  EXPECT_LE(trace_norm_distance(a, a), kExactTol);
  CVector p = CVector::Zero(3), q = CVector::Zero(3);
  p[0] = 1.0;
  q[2] = 1.0;
  EXPECT_NEAR(trace_norm_distance(pure_state(p, 2, 2), pure_state(q, 2, 2)), 2.0, kExactTol);
  CMatrix x = CMatrix::Zero(2, 2), y = CMatrix::Zero(2, 2);
  x.diagonal() << 0.6, 0.4;
  y.diagonal() << 0.5, 0.5;
  EXPECT_NEAR(trace_norm_distance(SectorOperator(2, 1, x), SectorOperator(2, 1, y)), 0.2, kExactTol);
}

TEST(SectorOperatorJson, RoundTrip) {
  const SectorOperator a = random_density(2, 3, 2, 42, 8);
  const SectorOperator b = sector_operator_from_json(to_json(a));
  EXPECT_EQ(b.d, 2);
  EXPECT_EQ(b.N, 3);
  EXPECT_EQ(max_abs(a.matrix - b.matrix), 0.0);
}

TEST(SymmetricEmbedding, IsometryAndSymmetric) {
  const CMatrix v = symmetric_embedding(2, 3);
  EXPECT_LE(max_abs(v.adjoint() * v - CMatrix::Identity(4, 4)), kExactTol);
  const OneBodyVector u = unit(2, 60);
  CVector full = u;
  for (int k = 1; k < 3; ++k) full = Eigen::kroneckerProduct(u, full).eval();
  // full = u ⊗ u ⊗ u; slot 0 is least significant, any ordering gives the same vector here
  EXPECT_LE((v * product_state(u, 3) - full).cwiseAbs().maxCoeff(), kExactTol);
}
