#pragma once

#include <cstdint>
#include <vector>

#include "bdfl/common.hpp"
#include "bdfl/model_io.hpp"
#include "bdfl/symfock.hpp"

namespace bdfl {

// Exchangeable law on Ω^N with Ω = {0, ..., m-1}, stored as one weight per
// occupation orbit (ordered as OccupationBasis(m, N)). A single configuration
// with counts n has probability weight(n) / multinomial(N; n).
struct SymmetricClassicalState {
  int m = 1;
  int N = 0;
  std::vector<double> weights;

  SymmetricClassicalState() = default;
  SymmetricClassicalState(int m_, int N_, std::vector<double> w);

  const OccupationBasis& basis() const { return *OccupationBasis::get(m, N); }
  void validate(double tol = kExactTol) const;
};

/// Probability arrays on Ω^n are indexed by x_1 + x_2 m + ... + x_n m^{n-1}.
using ClassicalMarginal = std::vector<double>;

inline constexpr std::int64_t kMaxOrbitEnumeration = 1000000;

/// All weight on the orbit with the given counts.
SymmetricClassicalState orbit_state(const OccupationVector& counts);
/// ρ^{⊗N} compressed to orbits.
SymmetricClassicalState product_classical_state(const RVector& rho, int N);
/// Orbit weights drawn i.i.d. exponential then normalized, from stream kRandomStates.
SymmetricClassicalState random_symmetric_state(int m, int N, std::uint64_t seed, std::uint64_t index);

/// Per-configuration probabilities on Ω^N (small m^N only).
ClassicalMarginal configuration_probabilities(const SymmetricClassicalState& mu);

/// Exact n-th marginal (draws without replacement from the orbit urn).
ClassicalMarginal marginal(const SymmetricClassicalState& mu, int n);

/// Diaconis-Freedman state: mixture over orbits of (empirical measure)^{⊗N}.
SymmetricClassicalState df_state(const SymmetricClassicalState& mu);

/// n-th marginal of the Diaconis-Freedman state without building it
/// (draws with replacement from each orbit urn).
ClassicalMarginal df_marginal(const SymmetricClassicalState& mu, int n);

/// Closed forms for n ∈ {1, 2}: μ̃^(1) = μ^(1),
/// μ̃^(2) = (N-1)/N μ^(2) + 1/N μ^(1) δ_{x1 = x2}.
ClassicalMarginal df_marginal_closed_form(const SymmetricClassicalState& mu, int n);

/// Total variation as the full mass of |p - q| (not halved).
double tv_distance(const ClassicalMarginal& p, const ClassicalMarginal& q);

/// ρ^{⊗n} as an array on Ω^n.
ClassicalMarginal product_marginal(const RVector& rho, int n);

struct DfBoundReport {
  int m = 0;
  int N = 0;
  int n = 0;
  double tv = 0.0;
  double bound_general = 0.0;  // 2n(n-1)/N
  double bound_finite = 0.0;   // 2 min(m n, n^2)/N, reported only
  double finite_ratio = 0.0;   // tv N / min(m n, n^2)
  bool pass = false;
};

DfBoundReport verify_df_bound(const SymmetricClassicalState& mu, int n);

struct ClassicalGibbs {
  SymmetricClassicalState state;
  double free_energy = 0.0;  // -T log Z_N
};

/// H(n) = sum_a n_a V_a + (sum_{a<b} n_a n_b w_ab + sum_a C(n_a,2) w_aa)/(N-1).
double classical_orbit_energy(const ClassicalModel& model, const OccupationVector& counts);
ClassicalGibbs classical_gibbs(const ClassicalModel& model, int N, double T);

struct MeanField {
  double free_energy = 0.0;
  RVector rho;
  int iterations = 0;
};

/// F[ρ] = V·ρ + ½ ρ·wρ + T sum ρ log ρ.
double mf_functional(const ClassicalModel& model, const RVector& rho, double T);
/// Damped fixed point ρ <- softmax(-(V + wρ)/T) from 5 starts; best start wins.
MeanField mf_free_energy(const ClassicalModel& model, double T, std::uint64_t seed = 42);

}  // namespace bdfl
