#pragma once

// Symmetric tensor algebra on bosonic N-particle sectors of a d-dimensional
// one-body space. Sector vectors and operators are expressed in the
// orthonormal occupation-number basis, ordered lexicographically ascending
// on the count vector (n_1, ..., n_d).

#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "bdfl/common.hpp"

namespace bdfl {

using OccupationVector = std::vector<int>;

/// Binomial coefficient C(n, k) with overflow detection.
std::int64_t binomial(std::int64_t n, std::int64_t k);

/// dim of the symmetric sector: C(N + d - 1, d - 1).
std::int64_t sym_dimension(int d, int N);

/// log of the multinomial coefficient N! / prod(n_i!).
double log_multinomial(const OccupationVector& counts);

struct OccupationVectorHash {
  std::size_t operator()(const OccupationVector& v) const noexcept;
};

class OccupationBasis {
 public:
  OccupationBasis(int d, int N);

  /// Shared immutable basis for (d, N); built once per process.
  static std::shared_ptr<const OccupationBasis> get(int d, int N);

  int dim_one_body() const { return d_; }
  int particles() const { return n_; }
  Index size() const { return static_cast<Index>(states_.size()); }

  const OccupationVector& operator[](Index i) const { return states_[static_cast<std::size_t>(i)]; }
  const std::vector<OccupationVector>& states() const { return states_; }

  /// Position of `counts` in the basis, or nullopt when it is not a member.
  std::optional<Index> index_of(const OccupationVector& counts) const;

  /// log(N! / prod n_i!) for basis element i.
  double log_multinomial_at(Index i) const { return log_mult_[static_cast<std::size_t>(i)]; }

 private:
  int d_;
  int n_;
  std::vector<OccupationVector> states_;
  std::vector<double> log_mult_;
  std::unordered_map<OccupationVector, Index, OccupationVectorHash> lookup_;
};

std::vector<OccupationVector> enumerate_basis(int d, int N);

/// Sector index of the one-particle occupation e_mode (sector order is
/// reversed with respect to mode order).
inline Index sector_one_index(int d, int mode) { return d - 1 - mode; }

struct SectorOperator {
  int d = 1;
  int N = 0;
  CMatrix matrix;

  SectorOperator() = default;
  SectorOperator(int d_, int N_, CMatrix m);

  Index dim() const { return matrix.rows(); }
};

bool is_hermitian(const CMatrix& m, double tol = kExactTol);

/// Throws unless `op` is Hermitian, PSD (min eigenvalue >= -tol) and has unit trace.
void require_density(const SectorOperator& op, double tol = kChainedTol);

SectorOperator pure_state(const CVector& psi, int d, int N);

// Second quantization. a*(f) = sum_i f_i a_i^*, a_i^*|n> = sqrt(n_i + 1)|n + e_i>.
SparseCMatrix creation_matrix(const OneBodyVector& f, int N);
SparseCMatrix annihilation_matrix(const OneBodyVector& f, int N);

/// Product of k creation operators a*(f)^k mapping sector N to sector N + k.
SparseCMatrix creation_power(const OneBodyVector& f, int N, int k);
/// a(f)^k mapping sector N to sector N - k (zero matrix when k > N).
SparseCMatrix annihilation_power(const OneBodyVector& f, int N, int k);

/// u^{⊗N} in the occupation basis. Requires |u| = 1 within 1e-12.
CVector product_state(const OneBodyVector& u, int N);
/// Same coefficients without the normalization check (used by hot loops on
/// already-normalized samples).
CVector product_state_unchecked(const OneBodyVector& u, const OccupationBasis& basis);

/// Matrix of A^{⊗N} restricted to the symmetric sector, for any d x d matrix A.
CMatrix sector_representation(const CMatrix& one_body, int N);

/// tr_{n+1 -> N} of a sector operator; trace is preserved.
SectorOperator partial_trace(const SectorOperator& op, int n);

/// <v^{⊗n}, γ^{(n)} v^{⊗n}> computed from (N-n)!/N! tr[a*(v)^n a(v)^n Γ].
double wick_reduced_element(const SectorOperator& gamma, const OneBodyVector& v, int n);

/// Sum of singular values of A - B.
double trace_norm_distance(const SectorOperator& a, const SectorOperator& b);

/// d x d matrix in mode order from a sector-1 operator, and back.
CMatrix one_body_matrix(const SectorOperator& gamma1);
SectorOperator from_one_body_matrix(const CMatrix& m);

/// Embedding of the sector into the full tensor space (d^N x D isometry whose
/// columns are the normalized symmetric basis states).
CMatrix symmetric_embedding(int d, int N);

nlohmann::json to_json(const SectorOperator& op);
SectorOperator sector_operator_from_json(const nlohmann::json& j);

}  // namespace bdfl
