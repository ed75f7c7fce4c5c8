#pragma once

#include <cstdint>
#include <vector>

#include "bdfl/common.hpp"
#include "bdfl/parallel.hpp"
#include "bdfl/sampling.hpp"
#include "bdfl/symfock.hpp"

namespace bdfl {

/// dim(sector N) * <u^{⊗N}, Γ u^{⊗N}>, clamped at 0. `clamped` receives the
/// magnitude removed by the clamp (0 when none).
double lower_symbol(const SectorOperator& gamma, const OneBodyVector& u, double* clamped = nullptr);

/// Reduced matrices γ^(0), ..., γ^(n) of Γ.
std::vector<SectorOperator> reduced_hierarchy(const SectorOperator& gamma, int n);

/// Marginal of the CKMR state in closed form:
///   C(N+n+d-1, n)^{-1} sum_l C(N, l) γ^(l) ⊗_s 1^{n-l},
/// where γ^(l) ⊗_s 1 = (l!(n-l)!)^{-1} sum_{σ ∈ S_n} P_σ (γ^(l) ⊗ 1) P_σ^{-1}
/// is formed on the full tensor space and then compressed to the sector.
SectorOperator chiribella_reduced(const std::vector<SectorOperator>& gammas, int N, int d, int n);

/// Compression V_n^† (γ^(l) ⊗ 1^{n-l}) V_n, before symmetrization.
CMatrix compressed_tensor_identity(const SectorOperator& gamma_l, int n);

struct McMatrixEstimate {
  SectorOperator estimate;
  RMatrix stderr_matrix;  // per entry, sqrt(var re + var im) / sqrt(M)
  double stderr = 0.0;    // largest entry of stderr_matrix
  std::int64_t samples = 0;
  std::uint64_t first_counter = 0;
};

/// Monte-Carlo marginal of the CKMR state:
///   dim * E_u[ <u^{⊗N}, Γ u^{⊗N}> |u^{⊗n}><u^{⊗n}| ].
/// Consumes `samples` consecutive indices from the sampler.
McMatrixEstimate ckmr_reduced_mc(const SectorOperator& gamma, int n, std::int64_t samples, SphereSampler& sampler,
                                 Execution exec = Execution::parallel);

/// Monte-Carlo estimate of dim * E_u[|u^{⊗N}><u^{⊗N}|] (identity by Schur's lemma).
McMatrixEstimate schur_resolution_mc(int d, int N, std::int64_t samples, SphereSampler& sampler,
                                     Execution exec = Execution::parallel);

/// c_{n,k} = C(n,k) n!/k!, so a(v)^n a*(v)^n = sum_k c_{n,k} a*(v)^k a(v)^k for |v| = 1.
std::vector<std::int64_t> wick_to_antiwick_coeffs(int n);

inline constexpr int kAntiWickMaxOrder = 4;

/// <v^{⊗n}, γ̃^(n) v^{⊗n}> = (N+d-1)!/(N+n+d-1)! tr[a(v)^n a*(v)^n Γ], n <= 4.
double antiwick_reduced_element(const SectorOperator& gamma, const OneBodyVector& v, int n);

struct DeFinettiReport {
  int N = 0;
  int d = 0;
  int n = 0;
  double distance = 0.0;
  double bound = 0.0;
  double sharper_bound = 0.0;  // 2nd/N, reported only
  bool pass = false;
  bool sharper_holds = false;
};

DeFinettiReport verify_definetti_bound(const SectorOperator& gamma, int n);

/// Random mixed state of the given rank: G G^† / tr with G a D x rank complex
/// Gaussian matrix drawn from stream kRandomStates at position `index`.
SectorOperator random_density(int d, int N, int rank, std::uint64_t seed, std::uint64_t index);

}  // namespace bdfl
