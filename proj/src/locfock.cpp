#include "bdfl/locfock.hpp"

#include <cmath>
#include <sstream>

#include "bdfl/sampling.hpp"

namespace bdfl {

std::vector<double> DiagonalFockState::traces() const {
  std::vector<double> t;
  t.reserve(sectors.size());
  for (const auto& s : sectors) t.push_back(s.matrix.trace().real());
  return t;
}

double DiagonalFockState::total_trace() const {
  double s = 0.0;
  for (double t : traces()) s += t;
  return s;
}

bool is_orthogonal_projector(const CMatrix& p, double tol) {
  if (p.rows() != p.cols()) return false;
  if (!is_hermitian(p, tol)) return false;
  return (p * p - p).cwiseAbs().maxCoeff() <= tol;
}

DiagonalFockState localize(const SectorOperator& gamma, const CMatrix& projector) {
  const int d = gamma.d;
  const int N = gamma.N;
  if (projector.rows() != d || projector.cols() != d) throw Error("localize: projector must be d x d");
  if (!is_orthogonal_projector(projector)) throw Error("localize: only orthogonal projectors (P^2 = P = P^†) are supported");

  // columns of u: range(P) first, then its complement
  Eigen::SelfAdjointEigenSolver<CMatrix> es(projector);
  int rank = 0;
  for (Index i = 0; i < d; ++i) rank += es.eigenvalues()[i] > 0.5 ? 1 : 0;
  CMatrix u(d, d);
  u.leftCols(rank) = es.eigenvectors().rightCols(rank);
  u.rightCols(d - rank) = es.eigenvectors().leftCols(d - rank);

  const CMatrix s_full = sector_representation(u, N);
  const CMatrix rotated = s_full.adjoint() * gamma.matrix * s_full;
  const auto& full = *OccupationBasis::get(d, N);

  DiagonalFockState out;
  out.d = d;
  out.N = N;
  for (int k = 0; k <= N; ++k) {
    const auto& kept = *OccupationBasis::get(d, k);
    const auto& traced = *OccupationBasis::get(d, N - k);
    auto inside = [&](const OccupationVector& v, bool in_range) {
      for (int i = 0; i < d; ++i)
        if (v[static_cast<std::size_t>(i)] > 0 && ((i < rank) != in_range)) return false;
      return true;
    };
    std::vector<Index> rows;
    for (Index m = 0; m < kept.size(); ++m)
      if (inside(kept[m], true)) rows.push_back(m);
    std::vector<Index> rests;
    for (Index j = 0; j < traced.size(); ++j)
      if (inside(traced[j], false)) rests.push_back(j);

    CMatrix gk = CMatrix::Zero(kept.size(), kept.size());
    const double pref = static_cast<double>(binomial(N, k));
    OccupationVector sum(static_cast<std::size_t>(d));
    std::vector<Index> idx(rows.size());
    std::vector<double> coef(rows.size());
    for (Index j : rests) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (int i = 0; i < d; ++i)
          sum[static_cast<std::size_t>(i)] = kept[rows[r]][static_cast<std::size_t>(i)] + traced[j][static_cast<std::size_t>(i)];
        idx[r] = *full.index_of(sum);
        coef[r] = std::exp(0.5 * (kept.log_multinomial_at(rows[r]) + traced.log_multinomial_at(j) - full.log_multinomial_at(idx[r])));
      }
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < rows.size(); ++b)
          gk(rows[a], rows[b]) += pref * coef[a] * coef[b] * rotated(idx[a], idx[b]);
    }
    const CMatrix sk = sector_representation(u, k);
    CMatrix back = sk * gk * sk.adjoint();
    back = 0.5 * (back + back.adjoint()).eval();
    out.sectors.emplace_back(d, k, std::move(back));
  }
  return out;
}

SectorOperator fock_reduced_matrix(const DiagonalFockState& g, int n) {
  if (n < 0 || n > g.N) throw Error("fock_reduced_matrix: need 0 <= n <= N");
  CMatrix acc = CMatrix::Zero(sym_dimension(g.d, n), sym_dimension(g.d, n));
  for (int k = n; k <= g.N; ++k) {
    const SectorOperator reduced = partial_trace(g.sectors[static_cast<std::size_t>(k)], n);
    acc += static_cast<double>(binomial(k, n)) * reduced.matrix;
  }
  acc /= static_cast<double>(binomial(g.N, n));
  return SectorOperator(g.d, n, std::move(acc));
}

DualityReport verify_duality(const SectorOperator& gamma, const CMatrix& projector) {
  const CMatrix perp = CMatrix::Identity(gamma.d, gamma.d) - projector;
  const auto tp = localize(gamma, projector).traces();
  const auto tq = localize(gamma, perp).traces();
  DualityReport r;
  for (int n = 0; n <= gamma.N; ++n)
    r.max_deviation = std::max(r.max_deviation, std::abs(tp[static_cast<std::size_t>(n)] - tq[static_cast<std::size_t>(gamma.N - n)]));
  r.pass = r.max_deviation <= kChainedTol;
  return r;
}

double mass_distribution(const DiagonalFockState& g, const std::function<double(double)>& f) {
  const auto t = g.traces();
  double s = 0.0;
  for (int k = 0; k <= g.N; ++k) s += f(g.N == 0 ? 0.0 : static_cast<double>(k) / g.N) * t[static_cast<std::size_t>(k)];
  return s;
}

CMatrix random_unitary(int d, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, stream::kRandomStates);
  CMatrix z(d, d);
  std::uint64_t lane = 0;
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < d; ++r) z(r, c) = rng.complex_normal(index, lane++);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  // phase fix so the distribution is Haar
  for (Index i = 0; i < d; ++i) {
    const cplx di = rmat(i, i);
    if (std::abs(di) > 0.0) q.col(i) *= di / std::abs(di);
  }
  return q;
}

CMatrix random_projector(int d, int rank, std::uint64_t seed, std::uint64_t index) {
  if (rank < 0 || rank > d) throw Error("random_projector: rank outside [0, d]");
  const CMatrix u = random_unitary(d, seed, index);
  CMatrix p = u.leftCols(rank) * u.leftCols(rank).adjoint();
  return 0.5 * (p + p.adjoint());
}

}  // namespace bdfl
