#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdfl/manybody.hpp"
#include "bdfl/parallel.hpp"
#include "bdfl/sampling.hpp"

namespace bdfl {

enum class FreeEnergyMethod { mc, quadrature2d };

const char* to_string(FreeEnergyMethod m);

struct ClassicalFreeEnergy {
  double t = 0.0;
  double F_cl = 0.0;
  FreeEnergyMethod method = FreeEnergyMethod::mc;
  double stderr = 0.0;         // mc only
  std::int64_t samples = 0;    // mc only
  int grid_level = 0;          // quadrature2d: 2^level intervals in p
  double stability = 0.0;      // quadrature2d: |F(level) - F(level-1)| / max(1, |F|)
};

/// F_cl = -t log ∫ exp(-E_H[u]/t) du by uniform sphere sampling (exp-shifted by
/// the smallest sampled energy; delta-method standard error).
ClassicalFreeEnergy classical_free_energy_mc(const ModelSpec& model, double t, std::int64_t samples,
                                             SphereSampler& sampler, Execution exec = Execution::parallel);

/// d = 2 only: u = (√p, √(1-p) e^{iφ}) with (p, φ) uniform on [0,1] x [0,2π).
/// Romberg in θ with p = sin²θ, periodic trapezoid in φ, refined until the relative change
/// drops below 1e-12 (or the grid cap is reached).
ClassicalFreeEnergy classical_free_energy_quadrature(const ModelSpec& model, double t);

ClassicalFreeEnergy classical_free_energy(const ModelSpec& model, double t, FreeEnergyMethod method,
                                          std::int64_t samples, SphereSampler& sampler,
                                          Execution exec = Execution::parallel);

/// ∫ |u^{⊗n}><u^{⊗n}| μ_cl(u) du on the (p, φ) grid at a fixed level (d = 2).
SectorOperator classical_gibbs_marginal_quadrature(const ModelSpec& model, double t, int n, int level = 9);

struct ImportanceEstimate {
  SectorOperator estimate;
  double trace_norm_error = 0.0;  // sqrt(D_n) ‖stderr‖_F, a 1σ scale for ‖estimate - exact‖_1
  double effective_samples = 0.0;
  std::int64_t samples = 0;
};

/// Self-normalized importance sampling of ∫ |u^{⊗n}><u^{⊗n}| μ_cl(u) du from
/// uniform sphere samples.
ImportanceEstimate classical_gibbs_marginal_is(const ModelSpec& model, double t, int n, std::int64_t samples,
                                               SphereSampler& sampler, Execution exec = Execution::parallel);

// Berezin-Lieb with f(x) = x log x.

/// Positive upper symbol μ(u) = sum_j w_j dim(d, M_j) |<v_j, u>|^{2 M_j}, a
/// probability density for the normalized sphere measure.
struct UpperSymbol {
  std::vector<double> weights;
  std::vector<OneBodyVector> centers;
  std::vector<int> powers;

  double operator()(const OneBodyVector& u) const;
};

UpperSymbol random_upper_symbol(int d, int terms, int max_power, std::uint64_t seed, std::uint64_t index);

/// Γ = ∫ |u^{⊗N}><u^{⊗N}| μ(u) du, exact:
/// term j contributes w_j dim_M/dim_{N+M} N!/(N+M)! a(v_j)^M a*(v_j)^M.
SectorOperator upper_symbol_state(const UpperSymbol& mu, int d, int N);

struct BerezinLiebReport {
  double s_exact = 0.0;       // tr Γ log Γ
  double lower_side = 0.0;    // dim ∫ f(μ_lower/dim) du
  double lower_stderr = 0.0;
  bool first_ok = false;      // s_exact >= lower_side - 3σ
  bool has_upper = false;
  double upper_side = 0.0;    // dim ∫ f(μ_upper/dim) du
  double upper_stderr = 0.0;
  bool second_ok = false;     // s_exact <= upper_side + 3σ
  double clamp_max = 0.0;     // largest negative lower-symbol value clamped to 0
  std::int64_t samples = 0;
};

BerezinLiebReport berezin_lieb_check(const SectorOperator& gamma, std::int64_t samples, SphereSampler& sampler,
                                     Execution exec = Execution::parallel);
BerezinLiebReport berezin_lieb_check(const SectorOperator& gamma, const UpperSymbol& upper, std::int64_t samples,
                                     SphereSampler& sampler, Execution exec = Execution::parallel);

struct AppendixBRow {
  int N = 0;
  double T = 0.0;
  double F_N = 0.0;
  double log_dim = 0.0;
  double F_cl = 0.0;
  double delta = 0.0;
  double delta_over_N = 0.0;
};

/// F_N at T = tN against -T log dim + N F_cl.
std::vector<AppendixBRow> appendixB_experiment(const ModelSpec& model, double t, const std::vector<int>& N_list,
                                               double F_cl, Execution exec = Execution::parallel);

struct MarginalConvergenceRow {
  int N = 0;
  double distance = 0.0;
  double mc_error = 0.0;
};

/// ‖γ_N^(n) - ∫ |u^{⊗n}><u^{⊗n}| μ_cl du‖_1 for the Gibbs state at T = tN,
/// with the limit from one shared importance-sampling estimate.
std::vector<MarginalConvergenceRow> gibbs_marginal_convergence(const ModelSpec& model, double t,
                                                               const std::vector<int>& N_list, int n,
                                                               const ImportanceEstimate& limit,
                                                               Execution exec = Execution::parallel);

}  // namespace bdfl
