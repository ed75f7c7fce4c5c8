#include <gtest/gtest.h>

#include <cmath>

#include "bdfl/hartree.hpp"
#include "bdfl/manybody.hpp"
#include "bdfl/sampling.hpp"

using namespace bdfl;

namespace {

ModelSpec random_model(int d, std::uint64_t index) {
  const CounterRng rng(13, 5);
  std::uint64_t lane = 0;
  ModelSpec model;
  model.d = d;
  CMatrix a(d, d), b(d * d, d * d);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.complex_normal(index, lane++);
  for (Index i = 0; i < b.size(); ++i) b.data()[i] = rng.complex_normal(index, lane++);
  model.h = 0.5 * (a + a.adjoint());
  const CMatrix s = swap_operator(d);
  CMatrix w = 0.5 * (b + b.adjoint());
  model.w = 0.5 * (w + s * w * s);
  model.validate();
  return model;
}

OneBodyVector reduced_point(double p, double phase) {
  OneBodyVector u(2);
  u << std::sqrt(p), std::polar(std::sqrt(1.0 - p), phase);
  return u;
}

}  // namespace

TEST(HartreeEnergy, FreeModelIsRayleighQuotient) {
  ModelSpec m = random_model(3, 0);
  m.w.setZero();
  const OneBodyVector u = SphereSampler(3, 1, 1).sample(0);
  EXPECT_NEAR(hartree_energy(u, m), u.dot(m.h * u).real(), kExactTol);
}

TEST(HartreeEnergy, BenchmarkReducesToOneVariable) {
  const double g = 1.3;
  const ModelSpec m = ModelSpec::benchmark(g);
  for (double p : {0.0, 0.2, 0.5, 0.9, 1.0})
    EXPECT_NEAR(hartree_energy(reduced_point(p, 0.4), m), (1.0 - p) + 0.5 * g * p * p, kExactTol);
}

TEST(HartreeEnergy, RejectsNonUnitVectors) {
  OneBodyVector u(2);
  u << 1.0, 1.0;
  EXPECT_THROW(hartree_energy(u, ModelSpec::benchmark(1.0)), Error);
}

TEST(HartreeGradient, CriticalPointOfBenchmark) {
  const double g = 2.0;
  EXPECT_LE(hartree_gradient(reduced_point(1.0 / g, 0.3), ModelSpec::benchmark(g)).norm(), 1e-10);
}

TEST(HartreeGradient, EigenvectorOfFreeModel) {
  ModelSpec m = random_model(3, 1);
  m.w.setZero();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.h);
  EXPECT_LE(hartree_gradient(es.eigenvectors().col(1), m).norm(), 1e-12);
}

TEST(HartreeGradient, FiniteDifferences) {
  const ModelSpec m = random_model(3, 2);
  const SphereSampler s(3, 1, 2);
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const OneBodyVector u = s.sample(static_cast<std::uint64_t>(2 * i));
    const OneBodyVector g = hartree_gradient(u, m);
    // tangent direction
    OneBodyVector xi = s.sample(static_cast<std::uint64_t>(2 * i + 1));
    xi -= u * u.dot(xi);
    const auto at = [&](double t) {
      OneBodyVector v = u + t * xi;
      v.normalize();
      return hartree_energy(v, m);
    };
    const double fd = (at(h) - at(-h)) / (2.0 * h);
    EXPECT_NEAR(fd, xi.dot(g).real(), 1e-6) << "point " << i;
  }
}

TEST(Hartree, BenchmarkMinimum) {
  const HartreeResult r = minimize_hartree(ModelSpec::benchmark(2.0));
  EXPECT_NEAR(r.e_H, 0.75, 1e-10);
  EXPECT_NEAR(std::norm(r.u_H[0]), 0.5, 1e-6);
  EXPECT_LE(r.grad_norm, 1e-10);
  EXPECT_TRUE(r.restarts_agree);
  EXPECT_GE(r.distinct_minimizers.size(), 1u);
}

TEST(Hartree, BenchmarkBoundaryMinimum) {
  const HartreeResult r = minimize_hartree(ModelSpec::benchmark(0.5));
  EXPECT_NEAR(r.e_H, 0.25, 1e-10);
  EXPECT_NEAR(std::norm(r.u_H[0]), 1.0, 1e-8);
  EXPECT_EQ(r.distinct_minimizers.size(), 1u);
}

TEST(Hartree, FreeModelGivesLowestEigenvalue) {
  ModelSpec m = random_model(4, 3);
  m.w.setZero();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.h);
  EXPECT_NEAR(minimize_hartree(m).e_H, es.eigenvalues()[0], 1e-10);
}

TEST(Hartree, PhaseGauge) {
  const HartreeResult r = minimize_hartree(random_model(3, 4));
  Index k = 0;
  r.u_H.cwiseAbs().maxCoeff(&k);
  EXPECT_GT(r.u_H[k].real(), 0.0);
  EXPECT_EQ(r.u_H[k].imag(), 0.0);
}

TEST(Hartree, SerialEqualsParallel) {
  const ModelSpec m = random_model(3, 5);
  HartreeOptions a, b;
  a.exec = Execution::serial;
  b.exec = Execution::parallel;
  const auto x = minimize_hartree(m, a), y = minimize_hartree(m, b);
  EXPECT_EQ(x.e_H, y.e_H);
  EXPECT_TRUE(x.u_H == y.u_H);
}

TEST(Convergence, BenchmarkGapShrinks) {
  const ModelSpec m = ModelSpec::benchmark(2.0);
  const HartreeResult hr = minimize_hartree(m);
  const auto rows = convergence_report(m, {10, 20, 40, 80}, hr);
  EXPECT_LT(rows[2].gap, rows[0].gap);
  std::vector<double> x, y;
  for (const auto& r : rows) {
    EXPECT_GE(r.gap, -kChainedTol);
    EXPECT_LE(r.lower_bound, r.energy_per_particle);
    x.push_back(r.N);
    y.push_back(r.gap);
  }
  const double slope = loglog_slope(x, y);
  EXPECT_GE(slope, -1.5);
  EXPECT_LE(slope, -0.5);
}

TEST(Convergence, FreeModelHasNoGap) {
  ModelSpec m = random_model(2, 6);
  m.w.setZero();
  const auto rows = convergence_report(m, {2, 5, 9}, minimize_hartree(m));
  for (const auto& r : rows) EXPECT_LE(std::abs(r.gap), 1e-10);
}

TEST(Convergence, OneBodyMatrixApproachesHartreeProjector) {
  ModelSpec m = ModelSpec::benchmark(2.0);
  m.h(0, 1) = -0.5;
  m.h(1, 0) = -0.5;
  const HartreeResult hr = minimize_hartree(m);
  ASSERT_EQ(hr.distinct_minimizers.size(), 1u);
  const auto rows = convergence_report(m, {15, 60}, hr);
  EXPECT_LE(rows[1].one_body_distance, rows[0].one_body_distance);
}

TEST(LogLogSlope, ExactPowerLaw) {
  EXPECT_NEAR(loglog_slope({1, 2, 4, 8}, {3, 1.5, 0.75, 0.375}), -1.0, 1e-14);
  EXPECT_THROW(loglog_slope({1}, {1}), Error);
}
