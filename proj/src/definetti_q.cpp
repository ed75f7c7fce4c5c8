#include "bdfl/definetti_q.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bdfl {

double lower_symbol(const SectorOperator& gamma, const OneBodyVector& u, double* clamped) {
  const auto& basis = *OccupationBasis::get(gamma.d, gamma.N);
  const CVector psi = product_state(u, gamma.N);
  const double value = static_cast<double>(basis.size()) * psi.dot(gamma.matrix * psi).real();
  if (clamped) *clamped = value < 0.0 ? -value : 0.0;
  return std::max(0.0, value);
}

std::vector<SectorOperator> reduced_hierarchy(const SectorOperator& gamma, int n) {
  if (n < 0 || n > gamma.N) throw Error("reduced_hierarchy: need 0 <= n <= N");
  std::vector<SectorOperator> out(static_cast<std::size_t>(n + 1));
  // descend from the top so each step is a single partial trace
  SectorOperator current = partial_trace(gamma, n);
  out[static_cast<std::size_t>(n)] = current;
  for (int l = n - 1; l >= 0; --l) {
    current = partial_trace(current, l);
    out[static_cast<std::size_t>(l)] = current;
  }
  return out;
}

namespace {

Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// γ lifted to the full l-particle space, tensored with identity on slots l..n-1.
// Slot k of a full index is digit k in base d (slot 0 least significant).
CMatrix lift_tensor_identity(const SectorOperator& gamma_l, int n) {
  const int d = gamma_l.d;
  const int l = gamma_l.N;
  const CMatrix vl = symmetric_embedding(d, l);
  const CMatrix full_l = vl * gamma_l.matrix * vl.adjoint();
  const Index dl = ipow(d, l);
  const Index rest = ipow(d, n - l);
  CMatrix out = CMatrix::Zero(dl * rest, dl * rest);
  for (Index r = 0; r < rest; ++r) out.block(r * dl, r * dl, dl, dl) = full_l;
  return out;
}

}  // namespace

CMatrix compressed_tensor_identity(const SectorOperator& gamma_l, int n) {
  if (gamma_l.N > n) throw Error("compressed_tensor_identity: l must be <= n");
  const CMatrix vn = symmetric_embedding(gamma_l.d, n);
  return vn.adjoint() * lift_tensor_identity(gamma_l, n) * vn;
}

SectorOperator chiribella_reduced(const std::vector<SectorOperator>& gammas, int N, int d, int n) {
  if (n < 0 || n > N) throw Error("chiribella_reduced: need 0 <= n <= N");
  if (static_cast<int>(gammas.size()) < n + 1) throw Error("chiribella_reduced: need marginals 0..n");
  for (int l = 0; l <= n; ++l) {
    const auto& g = gammas[static_cast<std::size_t>(l)];
    if (g.d != d || g.N != l) throw Error("chiribella_reduced: marginal l must live on sector l");
  }
  for (int l = 0; l < n; ++l) {
    const SectorOperator down = partial_trace(gammas[static_cast<std::size_t>(l + 1)], l);
    const double err = (down.matrix - gammas[static_cast<std::size_t>(l)].matrix).cwiseAbs().maxCoeff();
    if (err > 1e-8) {
      std::ostringstream os;
      os << "chiribella_reduced: inconsistent marginals at l=" << l << " (deviation " << err << ")";
      throw Error(os.str());
    }
  }

  const Index full = ipow(d, n);
  // slot permutations as index maps on the full space
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<Index>> maps;
  do {
    std::vector<Index> map(static_cast<std::size_t>(full));
    for (Index w = 0; w < full; ++w) {
      Index rem = w, out = 0;
      for (int k = 0; k < n; ++k) {
        const Index digit = rem % d;
        rem /= d;
        out += digit * ipow(d, perm[static_cast<std::size_t>(k)]);
      }
      map[static_cast<std::size_t>(w)] = out;
    }
    maps.push_back(std::move(map));
  } while (std::next_permutation(perm.begin(), perm.end()));

  const CMatrix vn = symmetric_embedding(d, n);
  const double norm = static_cast<double>(binomial(N + n + d - 1, n));
  CMatrix acc = CMatrix::Zero(vn.cols(), vn.cols());
  for (int l = 0; l <= n; ++l) {
    const CMatrix x = lift_tensor_identity(gammas[static_cast<std::size_t>(l)], n);
    CMatrix sym = CMatrix::Zero(full, full);
    for (const auto& map : maps)
      for (Index c = 0; c < full; ++c)
        for (Index r = 0; r < full; ++r)
          sym(map[static_cast<std::size_t>(r)], map[static_cast<std::size_t>(c)]) += x(r, c);
    double fl = 1.0, fr = 1.0;
    for (int i = 2; i <= l; ++i) fl *= i;
    for (int i = 2; i <= n - l; ++i) fr *= i;
    sym /= fl * fr;
    acc += (static_cast<double>(binomial(N, l)) / norm) * (vn.adjoint() * sym * vn);
  }
  acc = 0.5 * (acc + acc.adjoint()).eval();
  return SectorOperator(d, n, std::move(acc));
}

namespace {

struct MatrixMoments {
  CMatrix sum;
  RMatrix sumsq;

  void merge(const MatrixMoments& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
};

template <class Weight>
McMatrixEstimate mc_outer_average(int d, int n, std::int64_t samples, SphereSampler& sampler, Execution exec,
                                  Weight&& weight) {
  if (samples < 1) throw Error("Monte-Carlo estimate: samples must be >= 1");
  if (sampler.dim() != d) throw Error("Monte-Carlo estimate: sampler dimension mismatch");
  const auto basis_n = OccupationBasis::get(d, n);
  const Index dn = basis_n->size();
  const std::uint64_t first = sampler.advance(static_cast<std::uint64_t>(samples));

  auto block = [&](std::int64_t begin, std::int64_t end) {
    MatrixMoments m{CMatrix::Zero(dn, dn), RMatrix::Zero(dn, dn)};
    for (std::int64_t i = begin; i < end; ++i) {
      const OneBodyVector u = sampler.sample(first + static_cast<std::uint64_t>(i));
      const double f = weight(u);
      const CVector psi = product_state_unchecked(u, *basis_n);
      const CMatrix x = f * (psi * psi.adjoint());
      m.sum += x;
      m.sumsq += x.cwiseAbs2();
    }
    return m;
  };
  auto merge = [](MatrixMoments& a, const MatrixMoments& b) { a.merge(b); };
  const MatrixMoments tot = block_reduce<MatrixMoments>(samples, kDefaultBlock, block, merge, exec);

  const double m = static_cast<double>(samples);
  McMatrixEstimate out;
  CMatrix mean = tot.sum / m;
  RMatrix var = (tot.sumsq / m - mean.cwiseAbs2()).cwiseMax(0.0);
  if (samples > 1) var *= m / (m - 1.0);
  out.stderr_matrix = (var / m).cwiseSqrt();
  out.stderr = out.stderr_matrix.maxCoeff();
  out.estimate = SectorOperator(d, n, std::move(mean));
  out.samples = samples;
  out.first_counter = first;
  return out;
}

}  // namespace

McMatrixEstimate ckmr_reduced_mc(const SectorOperator& gamma, int n, std::int64_t samples, SphereSampler& sampler,
                                 Execution exec) {
  if (n < 0 || n > gamma.N) throw Error("ckmr_reduced_mc: need 0 <= n <= N");
  const auto basis_big = OccupationBasis::get(gamma.d, gamma.N);
  const double dim = static_cast<double>(basis_big->size());
  const CMatrix& g = gamma.matrix;
  return mc_outer_average(gamma.d, n, samples, sampler, exec, [&](const OneBodyVector& u) {
    const CVector psi = product_state_unchecked(u, *basis_big);
    return std::max(0.0, dim * psi.dot(g * psi).real());
  });
}

McMatrixEstimate schur_resolution_mc(int d, int N, std::int64_t samples, SphereSampler& sampler, Execution exec) {
  const double dim = static_cast<double>(sym_dimension(d, N));
  return mc_outer_average(d, N, samples, sampler, exec, [dim](const OneBodyVector&) { return dim; });
}

std::vector<std::int64_t> wick_to_antiwick_coeffs(int n) {
  if (n < 0) throw Error("wick_to_antiwick_coeffs: n must be >= 0");
  std::vector<std::int64_t> c(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) {
    // n!/k! as a falling product
    __int128 v = binomial(n, k);
    for (int i = k + 1; i <= n; ++i) {
      v *= i;
      if (v > static_cast<__int128>(INT64_MAX)) throw OverflowError("wick_to_antiwick_coeffs: overflow");
    }
    c[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(v);
  }
  return c;
}

double antiwick_reduced_element(const SectorOperator& gamma, const OneBodyVector& v, int n) {
  if (n < 0 || n > kAntiWickMaxOrder) throw Error("antiwick_reduced_element: need 0 <= n <= 4");
  if (v.size() != gamma.d) throw Error("antiwick_reduced_element: dimension mismatch");
  if (std::abs(v.norm() - 1.0) > kExactTol) throw Error("antiwick_reduced_element: v must be a unit vector");
  if (n == 0) return gamma.matrix.trace().real();
  const SparseCMatrix up = creation_power(v, gamma.N, n);
  // tr[a^n a*^n Γ] = tr[a*^n Γ (a*^n)^†]
  const CMatrix left = up * gamma.matrix;
  cplx tr = 0.0;
  for (Index k = 0; k < up.outerSize(); ++k)
    for (SparseCMatrix::InnerIterator it(up, k); it; ++it) tr += left(it.row(), it.col()) * std::conj(it.value());
  double pref = 1.0;
  for (int i = 0; i < n; ++i) pref /= static_cast<double>(gamma.N + gamma.d + i);
  const double value = pref * tr.real();
  if (std::abs(pref * tr.imag()) > kChainedTol) throw Error("antiwick_reduced_element: non-real trace");
  return value;
}

DeFinettiReport verify_definetti_bound(const SectorOperator& gamma, int n) {
  if (n < 0 || n > gamma.N) throw Error("verify_definetti_bound: need 0 <= n <= N");
  const auto gammas = reduced_hierarchy(gamma, n);
  const SectorOperator tilde = chiribella_reduced(gammas, gamma.N, gamma.d, n);
  DeFinettiReport r;
  r.N = gamma.N;
  r.d = gamma.d;
  r.n = n;
  r.distance = trace_norm_distance(gammas[static_cast<std::size_t>(n)], tilde);
  r.bound = 2.0 * n * (gamma.d + 2.0 * n) / gamma.N;
  r.sharper_bound = 2.0 * n * gamma.d / gamma.N;
  r.pass = r.distance <= r.bound + kChainedTol;
  r.sharper_holds = r.distance <= r.sharper_bound + kChainedTol;
  return r;
}

SectorOperator random_density(int d, int N, int rank, std::uint64_t seed, std::uint64_t index) {
  const Index dim = static_cast<Index>(sym_dimension(d, N));
  if (rank < 1) throw Error("random_density: rank must be >= 1");
  CounterRng rng(seed, stream::kRandomStates);
  CMatrix g(dim, rank);
  std::uint64_t lane = 0;
  for (Index c = 0; c < rank; ++c)
    for (Index r = 0; r < dim; ++r) g(r, c) = rng.complex_normal(index, lane++);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return SectorOperator(d, N, std::move(rho));
}

}  // namespace bdfl
