#pragma once

#include <vector>

#include "bdfl/common.hpp"
#include "bdfl/symfock.hpp"

namespace bdfl {

/// Mean-field model: one-body h (d x d) and two-body w (d^2 x d^2), with
/// w indexed row-major by (a*d + b, c*d + e).
struct ModelSpec {
  int d = 1;
  CMatrix h;
  CMatrix w;

  /// Throws unless h, w are Hermitian, correctly sized, and w commutes with the swap.
  void validate() const;

  /// w = g |e_1 ⊗ e_1><e_1 ⊗ e_1|
  static CMatrix rank_one_pair(int d, double g);
  /// w diagonal with entries g(a, b) on |e_a ⊗ e_b>
  static CMatrix density_density(const RMatrix& g);
  /// h = diag(0, 1), w = g |e_1 ⊗ e_1><e_1 ⊗ e_1| on C^2.
  static ModelSpec benchmark(double g);
};

/// Two-particle swap on C^d ⊗ C^d.
CMatrix swap_operator(int d);

/// H_N = sum_ab h_ab a*_a a_b + 1/(2(N-1)) sum w_{ab,cd} a*_a a*_b a_d a_c (H_1 = h).
SparseCMatrix assemble_hamiltonian_sparse(const ModelSpec& model, int N);
SectorOperator assemble_hamiltonian(const ModelSpec& model, int N);

struct GroundState {
  double energy = 0.0;
  CVector vector;
  int degeneracy = 1;
  double residual = 0.0;
};

struct SpectralData {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns, dense path only
};

SpectralData spectrum(const SectorOperator& hamiltonian);

/// Largest-|coefficient| entry (smallest index on ties) made real positive.
void fix_phase(CVector& v);

inline constexpr Index kDenseThreshold = 2000;

struct LanczosOptions {
  int krylov_dim = 60;
  int max_restarts = 200;
  double tol = 1e-10;
};

GroundState ground_state(const SectorOperator& hamiltonian, Index dense_threshold = kDenseThreshold);
/// Restarted Lanczos on a sparse operator; deterministic start vector.
GroundState ground_state_iterative(const SparseCMatrix& hamiltonian, const LanczosOptions& opts = {});

struct GibbsState {
  SectorOperator state;
  double free_energy = 0.0;
  RVector eigenvalues;
};

GibbsState gibbs_state(const SectorOperator& hamiltonian, double temperature);

/// tr[H Γ] + T tr[Γ log Γ] with the convention 0 log 0 = 0.
double free_energy_functional(const SectorOperator& hamiltonian, const SectorOperator& gamma, double temperature);

/// tr[Γ log Γ] from the eigenvalues of Γ.
double entropy_term(const SectorOperator& gamma);

}  // namespace bdfl
