#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bdfl/definetti_q.hpp"
#include "bdfl/hartree.hpp"
#include "bdfl/manybody.hpp"
#include "bdfl/sampling.hpp"

using namespace bdfl;

namespace {

// random Hermitian h and swap-symmetric Hermitian w
ModelSpec random_model(int d, std::uint64_t index, bool real = false) {
  const CounterRng rng(11, 77);
  std::uint64_t lane = 0;
  auto draw = [&](Index r, Index c) {
    CMatrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = real ? cplx(rng.normal(index, lane++)) : rng.complex_normal(index, lane++);
    return m;
  };
  ModelSpec model;
  model.d = d;
  const CMatrix a = draw(d, d);
  model.h = 0.5 * (a + a.adjoint());
  const CMatrix b = draw(d * d, d * d);
  const CMatrix s = swap_operator(d);
  CMatrix w = 0.5 * (b + b.adjoint());
  w = 0.5 * (w + s * w * s);
  model.w = 0.5 * (w + w.adjoint());
  model.validate();
  return model;
}

ModelSpec free_model(const CMatrix& h) {
  ModelSpec m;
  m.d = static_cast<int>(h.rows());
  m.h = h;
  m.w = CMatrix::Zero(m.d * m.d, m.d * m.d);
  return m;
}

}  // namespace

TEST(Hamiltonian, NonInteractingSpectrum) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 0.3;
  h(1, 1) = 1.1;
  const SpectralData s = spectrum(assemble_hamiltonian(free_model(h), 3));
  std::vector<double> expect;
  for (int k = 0; k <= 3; ++k) expect.push_back(0.3 * k + 1.1 * (3 - k));
  std::sort(expect.begin(), expect.end());
  ASSERT_EQ(s.eigenvalues.size(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(s.eigenvalues[i], expect[static_cast<std::size_t>(i)], kChainedTol);
}

TEST(Hamiltonian, ProductExpectationIsHartree) {
  const ModelSpec model = random_model(2, 1);
  const OneBodyVector u = SphereSampler(2, 5, 1).sample(0);
  const CVector psi = product_state(u, 5);
  const double lhs = psi.dot(assemble_hamiltonian(model, 5).matrix * psi).real();
  EXPECT_NEAR(lhs, 5.0 * hartree_energy(u, model), kChainedTol);

  const ModelSpec m3 = random_model(3, 2);
  const OneBodyVector v = SphereSampler(3, 5, 1).sample(1);
  const CVector phi = product_state(v, 6);
  EXPECT_NEAR(phi.dot(assemble_hamiltonian(m3, 6).matrix * phi).real() / 6.0, hartree_energy(v, m3), kChainedTol);
}

TEST(Hamiltonian, BenchmarkTwoParticles) {
  const double g = 1.7;
  const CMatrix h2 = assemble_hamiltonian(ModelSpec::benchmark(g), 2).matrix;
  CMatrix expect = CMatrix::Zero(3, 3);
  expect.diagonal() << 2.0, 1.0, g;
  EXPECT_LE((h2 - expect).cwiseAbs().maxCoeff(), kExactTol);
}

TEST(Hamiltonian, OneParticleIsH) {
  const ModelSpec model = random_model(3, 3);
  EXPECT_LE((one_body_matrix(assemble_hamiltonian(model, 1)) - model.h).cwiseAbs().maxCoeff(), kExactTol);
}

TEST(Hamiltonian, RealModelGivesRealSymmetric) {
  const ModelSpec model = random_model(3, 4, true);
  const CMatrix h = assemble_hamiltonian(model, 4).matrix;
  EXPECT_EQ(h.imag().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((h - h.transpose()).cwiseAbs().maxCoeff(), kExactTol);
}

TEST(Hamiltonian, CommutesWithModeRotation) {
  // density-density models are invariant under a phase rotation of one mode
  RMatrix g(3, 3);
  g << 1.0, 0.2, 0.4, 0.2, -0.3, 0.1, 0.4, 0.1, 0.7;
  ModelSpec model;
  model.d = 3;
  model.h = CMatrix::Zero(3, 3);
  model.h.diagonal() << 0.1, 0.5, -0.2;
  model.w = ModelSpec::density_density(g);
  CMatrix u = CMatrix::Identity(3, 3);
  u(1, 1) = std::polar(1.0, 0.77);
  const CMatrix h = assemble_hamiltonian(model, 4).matrix;
  const CMatrix s = sector_representation(u, 4);
  EXPECT_LE((h * s - s * h).cwiseAbs().maxCoeff(), kChainedTol);
}

TEST(Hamiltonian, RejectsNonSymmetricW) {
  ModelSpec model = ModelSpec::benchmark(1.0);
  model.w(1, 2) = 0.3;
  model.w(2, 1) = 0.3;
  model.w(1, 1) = 0.5;
  EXPECT_THROW(model.validate(), Error);
}

TEST(GroundState, NonInteracting) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(1, 1) = 1.0;
  const GroundState gs = ground_state(assemble_hamiltonian(free_model(h), 3));
  EXPECT_NEAR(gs.energy, 0.0, kChainedTol);
  const Index at = *OccupationBasis::get(2, 3)->index_of({3, 0});
  EXPECT_NEAR(std::abs(gs.vector[at]), 1.0, kChainedTol);
  EXPECT_EQ(gs.degeneracy, 1);
}

TEST(GroundState, EnergyPerParticleMonotoneAndBelowHartree) {
  for (std::uint64_t idx = 0; idx < 4; ++idx) {
    const ModelSpec model = random_model(2, 10 + idx);
    const HartreeResult hr = minimize_hartree(model);
    double prev = -INFINITY;
    for (int N = 2; N <= 12; ++N) {
      const double epp = ground_state(assemble_hamiltonian(model, N)).energy / N;
      EXPECT_GE(epp, prev - kChainedTol) << "model " << idx << " N=" << N;
      EXPECT_LE(epp, hr.e_H + kChainedTol) << "model " << idx << " N=" << N;
      prev = epp;
    }
  }
}

TEST(GroundState, LanczosMatchesDense) {
  const ModelSpec model = random_model(3, 20);
  const SectorOperator h = assemble_hamiltonian(model, 6);
  const GroundState dense = ground_state(h);
  const GroundState krylov = ground_state_iterative(assemble_hamiltonian_sparse(model, 6));
  EXPECT_NEAR(dense.energy, krylov.energy, 1e-9);
  EXPECT_NEAR(std::abs(dense.vector.dot(krylov.vector)), 1.0, 1e-8);
}

TEST(GroundState, LanczosAboveDenseThreshold) {
  // D = C(18, 3) = 816 at d = 4, N = 15; force the iterative path by lowering the threshold
  const ModelSpec model = random_model(4, 21, true);
  const SectorOperator h = assemble_hamiltonian(model, 15);
  const GroundState dense = ground_state(h);
  const GroundState krylov = ground_state(h, 100);
  EXPECT_NEAR(dense.energy, krylov.energy, 1e-8 * std::max(1.0, std::abs(dense.energy)));
  EXPECT_LE(krylov.residual, 1e-8);
}

TEST(Gibbs, HighTemperatureLimit) {
  const SectorOperator h = assemble_hamiltonian(random_model(2, 30), 3);
  const double T = 1e6;
  const GibbsState g = gibbs_state(h, T);
  const RVector lam = spectrum(h).eigenvalues;
  const double expect = -T * std::log(4.0) + lam.mean();
  EXPECT_LE(std::abs(g.free_energy - expect) / std::abs(expect), 1e-4);
  EXPECT_LE((g.state.matrix - CMatrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Gibbs, LowTemperatureLimit) {
  const SectorOperator h = assemble_hamiltonian(random_model(2, 31), 3);
  const GibbsState g = gibbs_state(h, 1e-4);
  EXPECT_NEAR(g.free_energy, ground_state(h).energy, 1e-3);
}

TEST(Gibbs, FreeEnergyMatchesDirectSum) {
  const SectorOperator h = assemble_hamiltonian(random_model(2, 32), 5);
  const RVector lam = spectrum(h).eigenvalues;
  long double z = 0.0L;
  for (Index i = 0; i < lam.size(); ++i) z += std::exp(-static_cast<long double>(lam[i]));
  const double F = static_cast<double>(-std::log(z));
  const GibbsState g = gibbs_state(h, 1.0);
  EXPECT_LE(std::abs(g.free_energy - F), 1e-12 * std::abs(F));
  EXPECT_NEAR(free_energy_functional(h, g.state, 1.0), g.free_energy, kChainedTol);
}

TEST(Gibbs, VariationalPrinciple) {
  const SectorOperator h = assemble_hamiltonian(random_model(2, 33), 4);
  const GibbsState g = gibbs_state(h, 0.7);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const SectorOperator other = random_density(2, 4, 5, 42, 500 + i);
    const double eps = 0.05 * static_cast<double>(i % 10 + 1);
    SectorOperator mix(2, 4, (1.0 - eps) * g.state.matrix + eps * other.matrix);
    EXPECT_GE(free_energy_functional(h, mix, 0.7) - g.free_energy, -kChainedTol);
  }
}

TEST(Gibbs, EntropyOfPureAndMixed) {
  CVector e = CVector::Zero(3);
  e[1] = 1.0;
  EXPECT_NEAR(entropy_term(pure_state(e, 2, 2)), 0.0, kExactTol);
  EXPECT_NEAR(entropy_term(SectorOperator(2, 2, CMatrix::Identity(3, 3) / 3.0)), -std::log(3.0), kExactTol);
}

TEST(Phase, LargestComponentPositive) {
  CVector v(3);
  v << cplx(0.1, 0.2), cplx(0.0, -0.9), cplx(0.3, 0.0);
  v.normalize();
  fix_phase(v);
  EXPECT_GT(v[1].real(), 0.0);
  EXPECT_EQ(v[1].imag(), 0.0);
}
