#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bdfl/symfock.hpp"

namespace bdfl {

/// G_0 ⊕ ... ⊕ G_N with G_k a positive operator on sector k of the full
/// one-body space; sectors[k] holds G_k.
struct DiagonalFockState {
  int d = 1;
  int N = 0;
  std::vector<SectorOperator> sectors;

  std::vector<double> traces() const;
  double total_trace() const;
};

bool is_orthogonal_projector(const CMatrix& p, double tol = kExactTol);

/// Localization of Γ by the projector P:
///   G_k = C(N,k) tr_{k+1 -> N}[P^{⊗k} ⊗ P_⊥^{⊗(N-k)} Γ P^{⊗k} ⊗ P_⊥^{⊗(N-k)}].
DiagonalFockState localize(const SectorOperator& gamma, const CMatrix& projector);

/// C(N,n)^{-1} sum_{k >= n} C(k,n) tr_{n+1 -> k} G_k.
SectorOperator fock_reduced_matrix(const DiagonalFockState& g, int n);

struct DualityReport {
  double max_deviation = 0.0;
  bool pass = false;
};

/// tr G_n^P = tr G_{N-n}^{P_⊥} for every n.
DualityReport verify_duality(const SectorOperator& gamma, const CMatrix& projector);

/// sum_k f(k/N) tr G_k.
double mass_distribution(const DiagonalFockState& g, const std::function<double(double)>& f);

/// Haar-random unitary from QR of a complex Gaussian matrix (stream kRandomStates).
CMatrix random_unitary(int d, std::uint64_t seed, std::uint64_t index);
/// Projector onto the span of the first `rank` columns of random_unitary.
CMatrix random_projector(int d, int rank, std::uint64_t seed, std::uint64_t index);

}  // namespace bdfl
