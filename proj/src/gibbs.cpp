#include "bdfl/gibbs.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bdfl/hartree.hpp"

namespace bdfl {

const char* to_string(FreeEnergyMethod m) { return m == FreeEnergyMethod::mc ? "mc" : "quadrature2d"; }

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double min_sampled_energy(const ModelSpec& model, std::int64_t samples, const SphereSampler& sampler,
                          std::uint64_t first, Execution exec) {
  auto block = [&](std::int64_t b, std::int64_t e) {
    double m = std::numeric_limits<double>::infinity();
    for (std::int64_t i = b; i < e; ++i)
      m = std::min(m, hartree_energy(sampler.sample(first + static_cast<std::uint64_t>(i)), model));
    return m;
  };
  auto merge = [](double& a, const double& b) { a = std::min(a, b); };
  return block_reduce<double>(samples, kDefaultBlock, block, merge, exec);
}

// Point on the sphere of C^2 at polar angle θ ∈ [0, π/2] (p = sin^2 θ) and phase φ.
OneBodyVector sphere2_point(double theta, double phi) {
  OneBodyVector u(2);
  u[0] = std::sin(theta);
  u[1] = std::cos(theta) * std::polar(1.0, phi);
  return u;
}

// Trapezoid approximation of (1/2π) ∫_0^{2π} ∫_0^1 F(u(p, φ)) dp dφ at the given
// level, written in θ with dp = sin 2θ dθ so the integrand is smooth in θ.
template <class Acc, class F>
Acc sphere2_trapezoid(int level, const Acc& zero, F&& f) {
  const int n_theta = 1 << level;
  const int n_phi = std::max(16, 1 << level);
  const double h = 0.5 * std::numbers::pi / n_theta;
  Acc acc = zero;
  for (int i = 0; i <= n_theta; ++i) {
    const double theta = i * h;
    const double jac = std::sin(2.0 * theta);
    if (jac == 0.0) continue;  // endpoints carry zero Jacobian
    const double wt = (i == 0 || i == n_theta ? 0.5 : 1.0) * h * jac / n_phi;
    Acc row = zero;
    for (int j = 0; j < n_phi; ++j) row += f(sphere2_point(theta, 2.0 * std::numbers::pi * j / n_phi));
    acc += wt * row;
  }
  return acc;
}

double coarse_min_energy(const ModelSpec& model) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 64; ++i)
    for (int j = 0; j < 64; ++j)
      m = std::min(m, hartree_energy(sphere2_point(0.5 * std::numbers::pi * i / 64, 2.0 * std::numbers::pi * j / 64), model));
  return m;
}

void require_d2(const ModelSpec& model, const char* who) {
  if (model.d != 2) throw Error(std::string(who) + ": the (p, φ) quadrature needs d = 2");
}

}  // namespace

ClassicalFreeEnergy classical_free_energy_mc(const ModelSpec& model, double t, std::int64_t samples,
                                             SphereSampler& sampler, Execution exec) {
  model.validate();
  if (!(t > 0.0)) throw Error("classical_free_energy: t must be > 0");
  if (samples < 2) throw Error("classical_free_energy: need at least 2 samples");
  if (sampler.dim() != model.d) throw Error("classical_free_energy: sampler dimension mismatch");
  const std::uint64_t first = sampler.advance(static_cast<std::uint64_t>(samples));
  const double eref = min_sampled_energy(model, samples, sampler, first, exec);

  struct Moments {
    double s = 0.0, s2 = 0.0;
  };
  auto block = [&](std::int64_t b, std::int64_t e) {
    Moments m;
    for (std::int64_t i = b; i < e; ++i) {
      const double x = std::exp(-(hartree_energy(sampler.sample(first + static_cast<std::uint64_t>(i)), model) - eref) / t);
      m.s += x;
      m.s2 += x * x;
    }
    return m;
  };
  auto merge = [](Moments& a, const Moments& b) {
    a.s += b.s;
    a.s2 += b.s2;
  };
  const Moments tot = block_reduce<Moments>(samples, kDefaultBlock, block, merge, exec);
  const double M = static_cast<double>(samples);
  const double mean = tot.s / M;
  const double var = std::max(0.0, tot.s2 / M - mean * mean) * M / (M - 1.0);

  ClassicalFreeEnergy out;
  out.t = t;
  out.method = FreeEnergyMethod::mc;
  out.F_cl = eref - t * std::log(mean);
  out.stderr = t * std::sqrt(var / M) / mean;
  out.samples = samples;
  return out;
}

ClassicalFreeEnergy classical_free_energy_quadrature(const ModelSpec& model, double t) {
  model.validate();
  require_d2(model, "classical_free_energy");
  if (!(t > 0.0)) throw Error("classical_free_energy: t must be > 0");
  constexpr int kMinLevel = 3;
  constexpr int kMaxLevel = 11;
  const double eref = coarse_min_energy(model);
  auto integrand = [&](const OneBodyVector& u) { return std::exp(-(hartree_energy(u, model) - eref) / t); };

  // Romberg table over θ-levels
  std::vector<std::vector<double>> r;
  double prev_f = 0.0;
  ClassicalFreeEnergy out;
  out.t = t;
  out.method = FreeEnergyMethod::quadrature2d;
  for (int level = kMinLevel; level <= kMaxLevel; ++level) {
    std::vector<double> row{sphere2_trapezoid(level, 0.0, integrand)};
    const std::size_t k = r.size();
    for (std::size_t j = 1; j <= k; ++j) {
      const double factor = std::pow(4.0, static_cast<double>(j)) - 1.0;
      row.push_back(row[j - 1] + (row[j - 1] - r[k - 1][j - 1]) / factor);
    }
    r.push_back(row);
    const double z = row.back();
    if (!(z > 0.0)) throw Error("classical_free_energy: quadrature produced a non-positive partition function");
    const double f = eref - t * std::log(z);
    out.F_cl = f;
    out.grid_level = level;
    if (level > kMinLevel) {
      out.stability = std::abs(f - prev_f) / std::max(1.0, std::abs(f));
      if (level >= kMinLevel + 2 && out.stability <= 1e-12) break;
    }
    prev_f = f;
  }
  return out;
}

ClassicalFreeEnergy classical_free_energy(const ModelSpec& model, double t, FreeEnergyMethod method,
                                          std::int64_t samples, SphereSampler& sampler, Execution exec) {
  if (method == FreeEnergyMethod::quadrature2d) return classical_free_energy_quadrature(model, t);
  return classical_free_energy_mc(model, t, samples, sampler, exec);
}

SectorOperator classical_gibbs_marginal_quadrature(const ModelSpec& model, double t, int n, int level) {
  model.validate();
  require_d2(model, "classical_gibbs_marginal_quadrature");
  if (!(t > 0.0)) throw Error("classical_gibbs_marginal_quadrature: t must be > 0");
  const auto basis = OccupationBasis::get(2, n);
  const Index dn = basis->size();
  const double eref = coarse_min_energy(model);
  // column 0..dn-1: weighted outer products, plus the normalization in an extra slot
  const CMatrix zero = CMatrix::Zero(dn, dn + 1);
  auto fn = [&](const OneBodyVector& u) {
    const double w = std::exp(-(hartree_energy(u, model) - eref) / t);
    const CVector psi = product_state_unchecked(u, *basis);
    CMatrix out(dn, dn + 1);
    out.leftCols(dn) = w * psi * psi.adjoint();
    out.col(dn).setZero();
    out(0, dn) = w;
    return out;
  };
  // one Richardson step on two trapezoid levels
  const CMatrix coarse = sphere2_trapezoid(level - 1, zero, fn);
  const CMatrix fine = sphere2_trapezoid(level, zero, fn);
  const CMatrix rich = fine + (fine - coarse) / 3.0;
  CMatrix m = rich.leftCols(dn) / rich(0, dn).real();
  m = 0.5 * (m + m.adjoint()).eval();
  return SectorOperator(2, n, std::move(m));
}

ImportanceEstimate classical_gibbs_marginal_is(const ModelSpec& model, double t, int n, std::int64_t samples,
                                               SphereSampler& sampler, Execution exec) {
  model.validate();
  if (!(t > 0.0)) throw Error("classical_gibbs_marginal_is: t must be > 0");
  if (samples < 2) throw Error("classical_gibbs_marginal_is: need at least 2 samples");
  if (sampler.dim() != model.d) throw Error("classical_gibbs_marginal_is: sampler dimension mismatch");
  const auto basis = OccupationBasis::get(model.d, n);
  const Index dn = basis->size();
  const std::uint64_t first = sampler.advance(static_cast<std::uint64_t>(samples));
  const double eref = min_sampled_energy(model, samples, sampler, first, exec);

  struct Acc {
    double sw = 0.0, sw2 = 0.0;
    CMatrix swp, sw2p;
    RMatrix sw2p2;
  };
  auto block = [&](std::int64_t b, std::int64_t e) {
    Acc a{0.0, 0.0, CMatrix::Zero(dn, dn), CMatrix::Zero(dn, dn), RMatrix::Zero(dn, dn)};
    for (std::int64_t i = b; i < e; ++i) {
      const OneBodyVector u = sampler.sample(first + static_cast<std::uint64_t>(i));
      const double w = std::exp(-(hartree_energy(u, model) - eref) / t);
      const CVector psi = product_state_unchecked(u, *basis);
      const CMatrix p = psi * psi.adjoint();
      a.sw += w;
      a.sw2 += w * w;
      a.swp += w * p;
      a.sw2p += (w * w) * p;
      a.sw2p2 += (w * w) * p.cwiseAbs2();
    }
    return a;
  };
  auto merge = [](Acc& a, const Acc& b) {
    a.sw += b.sw;
    a.sw2 += b.sw2;
    a.swp += b.swp;
    a.sw2p += b.sw2p;
    a.sw2p2 += b.sw2p2;
  };
  const Acc tot = block_reduce<Acc>(samples, kDefaultBlock, block, merge, exec);

  CMatrix est = tot.swp / tot.sw;
  // ratio-estimator variance: sum w^2 |P - L|^2 / (sum w)^2
  const RMatrix num = (tot.sw2p2 - 2.0 * (est.conjugate().cwiseProduct(tot.sw2p)).real() + tot.sw2 * est.cwiseAbs2())
                          .cwiseMax(0.0);
  const RMatrix se = num.cwiseSqrt() / tot.sw;
  ImportanceEstimate out;
  est = 0.5 * (est + est.adjoint()).eval();
  out.estimate = SectorOperator(model.d, n, std::move(est));
  out.trace_norm_error = std::sqrt(static_cast<double>(dn)) * se.norm();
  out.effective_samples = tot.sw * tot.sw / tot.sw2;
  out.samples = samples;
  return out;
}

double UpperSymbol::operator()(const OneBodyVector& u) const {
  double s = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double overlap = std::norm(centers[j].dot(u));
    s += weights[j] * static_cast<double>(sym_dimension(static_cast<int>(u.size()), powers[j])) *
         std::pow(overlap, powers[j]);
  }
  return s;
}

UpperSymbol random_upper_symbol(int d, int terms, int max_power, std::uint64_t seed, std::uint64_t index) {
  if (terms < 1 || max_power < 0) throw Error("random_upper_symbol: need terms >= 1, max_power >= 0");
  const SphereSampler centers(d, seed, stream::kUpperSymbols);
  const CounterRng rng(seed, stream::kUpperSymbols);
  UpperSymbol mu;
  double total = 0.0;
  for (int j = 0; j < terms; ++j) {
    const std::uint64_t c = index * 64 + static_cast<std::uint64_t>(j);
    mu.centers.push_back(centers.sample(c));
    const double w = -std::log(rng.uniform(c, 1000));
    mu.weights.push_back(w);
    total += w;
    mu.powers.push_back(static_cast<int>(rng.bits(c, 1001) % static_cast<std::uint64_t>(max_power + 1)));
  }
  for (double& w : mu.weights) w /= total;
  return mu;
}

SectorOperator upper_symbol_state(const UpperSymbol& mu, int d, int N) {
  const Index dim = static_cast<Index>(sym_dimension(d, N));
  CMatrix g = CMatrix::Zero(dim, dim);
  for (std::size_t j = 0; j < mu.weights.size(); ++j) {
    const int M = mu.powers[j];
    const OneBodyVector& v = mu.centers[j];
    if (v.size() != d) throw Error("upper_symbol_state: center dimension mismatch");
    double pref = mu.weights[j] * static_cast<double>(sym_dimension(d, M)) / static_cast<double>(sym_dimension(d, N + M));
    for (int i = 1; i <= M; ++i) pref /= static_cast<double>(N + i);
    if (M == 0) {
      g += pref * CMatrix::Identity(dim, dim);
      continue;
    }
    const SparseCMatrix up = creation_power(v, N, M);
    const CMatrix dense_up(up);
    g += pref * (dense_up.adjoint() * dense_up);
  }
  g = 0.5 * (g + g.adjoint()).eval();
  return SectorOperator(d, N, std::move(g));
}

namespace {

BerezinLiebReport berezin_lieb_impl(const SectorOperator& gamma, const UpperSymbol* upper, std::int64_t samples,
                                    SphereSampler& sampler, Execution exec) {
  if (samples < 2) throw Error("berezin_lieb_check: need at least 2 samples");
  if (sampler.dim() != gamma.d) throw Error("berezin_lieb_check: sampler dimension mismatch");
  const auto basis = OccupationBasis::get(gamma.d, gamma.N);
  const double dim = static_cast<double>(basis->size());
  const std::uint64_t first = sampler.advance(static_cast<std::uint64_t>(samples));

  struct Acc {
    double s = 0.0, s2 = 0.0, us = 0.0, us2 = 0.0, clamp = 0.0;
  };
  auto block = [&](std::int64_t b, std::int64_t e) {
    Acc a;
    for (std::int64_t i = b; i < e; ++i) {
      const OneBodyVector u = sampler.sample(first + static_cast<std::uint64_t>(i));
      const CVector psi = product_state_unchecked(u, *basis);
      double q = psi.dot(gamma.matrix * psi).real();
      if (q < 0.0) {
        a.clamp = std::max(a.clamp, -q);
        q = 0.0;
      }
      const double x = dim * xlogx(q);
      a.s += x;
      a.s2 += x * x;
      if (upper) {
        const double y = dim * xlogx((*upper)(u) / dim);
        a.us += y;
        a.us2 += y * y;
      }
    }
    return a;
  };
  auto merge = [](Acc& a, const Acc& b) {
    a.s += b.s;
    a.s2 += b.s2;
    a.us += b.us;
    a.us2 += b.us2;
    a.clamp = std::max(a.clamp, b.clamp);
  };
  const Acc tot = block_reduce<Acc>(samples, kDefaultBlock, block, merge, exec);
  const double M = static_cast<double>(samples);
  auto stderr_of = [M](double s, double s2) {
    const double mean = s / M;
    return std::sqrt(std::max(0.0, s2 / M - mean * mean) / (M - 1.0));
  };

  BerezinLiebReport r;
  r.samples = samples;
  r.s_exact = entropy_term(gamma);
  r.lower_side = tot.s / M;
  r.lower_stderr = stderr_of(tot.s, tot.s2);
  r.clamp_max = tot.clamp;
  const double slack = kChainedTol * std::max(1.0, std::abs(r.s_exact));
  r.first_ok = r.s_exact >= r.lower_side - kSigmaFactor * r.lower_stderr - slack;
  if (upper) {
    r.has_upper = true;
    r.upper_side = tot.us / M;
    r.upper_stderr = stderr_of(tot.us, tot.us2);
    r.second_ok = r.s_exact <= r.upper_side + kSigmaFactor * r.upper_stderr + slack;
  }
  return r;
}

}  // namespace

BerezinLiebReport berezin_lieb_check(const SectorOperator& gamma, std::int64_t samples, SphereSampler& sampler,
                                     Execution exec) {
  return berezin_lieb_impl(gamma, nullptr, samples, sampler, exec);
}

BerezinLiebReport berezin_lieb_check(const SectorOperator& gamma, const UpperSymbol& upper, std::int64_t samples,
                                     SphereSampler& sampler, Execution exec) {
  return berezin_lieb_impl(gamma, &upper, samples, sampler, exec);
}

std::vector<AppendixBRow> appendixB_experiment(const ModelSpec& model, double t, const std::vector<int>& N_list,
                                               double F_cl, Execution exec) {
  if (!(t > 0.0)) throw Error("appendixB_experiment: t must be > 0");
  return ordered_map<AppendixBRow>(
      static_cast<std::int64_t>(N_list.size()),
      [&](std::int64_t i) {
        const int N = N_list[static_cast<std::size_t>(i)];
        AppendixBRow row;
        row.N = N;
        row.T = t * N;
        const GibbsState g = gibbs_state(assemble_hamiltonian(model, N), row.T);
        row.F_N = g.free_energy;
        row.log_dim = std::log(static_cast<double>(sym_dimension(model.d, N)));
        row.F_cl = F_cl;
        row.delta = row.F_N + row.T * row.log_dim - N * F_cl;
        row.delta_over_N = row.delta / N;
        return row;
      },
      exec);
}

std::vector<MarginalConvergenceRow> gibbs_marginal_convergence(const ModelSpec& model, double t,
                                                               const std::vector<int>& N_list, int n,
                                                               const ImportanceEstimate& limit, Execution exec) {
  if (n < 1 || n > 2) throw Error("gibbs_marginal_convergence: n must be 1 or 2");
  if (limit.estimate.N != n || limit.estimate.d != model.d) throw Error("gibbs_marginal_convergence: limit sector mismatch");
  return ordered_map<MarginalConvergenceRow>(
      static_cast<std::int64_t>(N_list.size()),
      [&](std::int64_t i) {
        const int N = N_list[static_cast<std::size_t>(i)];
        const GibbsState g = gibbs_state(assemble_hamiltonian(model, N), t * N);
        MarginalConvergenceRow row;
        row.N = N;
        row.distance = trace_norm_distance(partial_trace(g.state, n), limit.estimate);
        row.mc_error = limit.trace_norm_error;
        return row;
      },
      exec);
}

}  // namespace bdfl
