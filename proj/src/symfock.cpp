#include "bdfl/symfock.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace bdfl {

std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::int64_t>::max()) {
      std::ostringstream os;
      os << "binomial(" << n << ", " << k << ") overflows int64";
      throw OverflowError(os.str());
    }
  }
  return static_cast<std::int64_t>(r);
}

std::int64_t sym_dimension(int d, int N) {
  if (d < 1) throw Error("sym_dimension: d must be >= 1");
  if (N < 0) throw Error("sym_dimension: N must be >= 0");
  return binomial(static_cast<std::int64_t>(N) + d - 1, d - 1);
}

double log_multinomial(const OccupationVector& counts) {
  int total = 0;
  double acc = 0.0;
  for (int c : counts) {
    total += c;
    acc -= std::lgamma(c + 1.0);
  }
  return acc + std::lgamma(total + 1.0);
}

std::size_t OccupationVectorHash::operator()(const OccupationVector& v) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (int c : v) {
    h ^= static_cast<std::size_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

namespace {

void fill_basis(int mode, int remaining, OccupationVector& current, std::vector<OccupationVector>& out) {
  const int d = static_cast<int>(current.size());
  if (mode == d - 1) {
    current[mode] = remaining;
    out.push_back(current);
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    current[mode] = c;
    fill_basis(mode + 1, remaining - c, current, out);
  }
}

}  // namespace

std::vector<OccupationVector> enumerate_basis(int d, int N) {
  const std::int64_t dim = sym_dimension(d, N);
  std::vector<OccupationVector> out;
  out.reserve(static_cast<std::size_t>(dim));
  OccupationVector current(static_cast<std::size_t>(d), 0);
  fill_basis(0, N, current, out);
  return out;
}

OccupationBasis::OccupationBasis(int d, int N) : d_(d), n_(N), states_(enumerate_basis(d, N)) {
  log_mult_.reserve(states_.size());
  lookup_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    log_mult_.push_back(log_multinomial(states_[i]));
    lookup_.emplace(states_[i], static_cast<Index>(i));
  }
}

std::shared_ptr<const OccupationBasis> OccupationBasis::get(int d, int N) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const OccupationBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({d, N});
  if (it != cache.end()) return it->second;
  auto basis = std::make_shared<const OccupationBasis>(d, N);
  cache.emplace(std::make_pair(d, N), basis);
  return basis;
}

std::optional<Index> OccupationBasis::index_of(const OccupationVector& counts) const {
  auto it = lookup_.find(counts);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

SectorOperator::SectorOperator(int d_, int N_, CMatrix m) : d(d_), N(N_), matrix(std::move(m)) {
  const auto dim = sym_dimension(d, N);
  if (matrix.rows() != dim || matrix.cols() != dim) {
    std::ostringstream os;
    os << "SectorOperator: matrix is " << matrix.rows() << "x" << matrix.cols() << " but sector (d=" << d
       << ", N=" << N << ") has dimension " << dim;
    throw Error(os.str());
  }
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

void require_density(const SectorOperator& op, double tol) {
  if (!is_hermitian(op.matrix, tol)) throw Error("density operator is not Hermitian");
  const cplx tr = op.matrix.trace();
  if (std::abs(tr - 1.0) > tol) {
    std::ostringstream os;
    os << "density operator trace is " << tr.real() << " (expected 1)";
    throw Error(os.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    std::ostringstream os;
    os << "density operator has negative eigenvalue " << es.eigenvalues().minCoeff();
    throw Error(os.str());
  }
}

SectorOperator pure_state(const CVector& psi, int d, int N) { return SectorOperator(d, N, psi * psi.adjoint()); }

SparseCMatrix creation_matrix(const OneBodyVector& f, int N) {
  if (N < 0) throw Error("creation_matrix: N must be >= 0");
  if (f.size() < 1) throw Error("creation_matrix: empty one-body vector");
  const int d = static_cast<int>(f.size());
  const auto& from = *OccupationBasis::get(d, N);
  const auto& to = *OccupationBasis::get(d, N + 1);
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(from.size() * d));
  OccupationVector target;
  for (Index col = 0; col < from.size(); ++col) {
    target = from[col];
    for (int i = 0; i < d; ++i) {
      if (f[i] == cplx(0.0)) continue;
      const int occ = target[i];
      target[i] = occ + 1;
      const Index row = *to.index_of(target);
      triplets.emplace_back(row, col, f[i] * std::sqrt(static_cast<double>(occ + 1)));
      target[i] = occ;
    }
  }
  SparseCMatrix m(to.size(), from.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseCMatrix annihilation_matrix(const OneBodyVector& f, int N) {
  if (N < 1) throw Error("annihilation_matrix: N must be >= 1 (no sector below the vacuum)");
  return SparseCMatrix(creation_matrix(f, N - 1).adjoint());
}

SparseCMatrix creation_power(const OneBodyVector& f, int N, int k) {
  if (k < 0) throw Error("creation_power: k must be >= 0");
  const Index dim = static_cast<Index>(sym_dimension(static_cast<int>(f.size()), N));
  SparseCMatrix out(dim, dim);
  out.setIdentity();
  for (int step = 0; step < k; ++step) {
    out = SparseCMatrix(creation_matrix(f, N + step) * out);
  }
  return out;
}

SparseCMatrix annihilation_power(const OneBodyVector& f, int N, int k) {
  if (k < 0) throw Error("annihilation_power: k must be >= 0");
  if (k > N) throw Error("annihilation_power: k exceeds the particle number");
  const Index dim = static_cast<Index>(sym_dimension(static_cast<int>(f.size()), N));
  SparseCMatrix out(dim, dim);
  out.setIdentity();
  for (int step = 0; step < k; ++step) {
    out = SparseCMatrix(annihilation_matrix(f, N - step) * out);
  }
  return out;
}

CVector product_state_unchecked(const OneBodyVector& u, const OccupationBasis& basis) {
  const int d = basis.dim_one_body();
  const int N = basis.particles();
  // powers(i, k) = u_i^k
  CMatrix powers(d, N + 1);
  for (int i = 0; i < d; ++i) {
    powers(i, 0) = 1.0;
    for (int k = 1; k <= N; ++k) powers(i, k) = powers(i, k - 1) * u[i];
  }
  CVector out(basis.size());
  for (Index j = 0; j < basis.size(); ++j) {
    const auto& n = basis[j];
    cplx c = std::exp(0.5 * basis.log_multinomial_at(j));
    for (int i = 0; i < d; ++i) c *= powers(i, n[static_cast<std::size_t>(i)]);
    out[j] = c;
  }
  return out;
}

CVector product_state(const OneBodyVector& u, int N) {
  const double norm = u.norm();
  if (std::abs(norm - 1.0) > kExactTol) {
    std::ostringstream os;
    os.precision(17);
    os << "product_state: one-body vector must be normalized, measured norm " << norm;
    throw Error(os.str());
  }
  return product_state_unchecked(u, *OccupationBasis::get(static_cast<int>(u.size()), N));
}

CMatrix sector_representation(const CMatrix& one_body, int N) {
  if (one_body.rows() != one_body.cols()) throw Error("sector_representation: operator must be square");
  const int d = static_cast<int>(one_body.rows());
  const auto& basis = *OccupationBasis::get(d, N);
  // creators[i][k]: a*(A e_i) from sector k to k + 1
  std::vector<std::vector<SparseCMatrix>> creators(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const CVector col = one_body.col(i);
    for (int k = 0; k < N; ++k) creators[static_cast<std::size_t>(i)].push_back(creation_matrix(col, k));
  }
  CMatrix out(basis.size(), basis.size());
  for (Index j = 0; j < basis.size(); ++j) {
    const auto& n = basis[j];
    CVector v = CVector::Ones(1);
    int level = 0;
    double log_fact = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int rep = 0; rep < n[static_cast<std::size_t>(i)]; ++rep) {
        v = creators[static_cast<std::size_t>(i)][static_cast<std::size_t>(level)] * v;
        ++level;
      }
      log_fact += std::lgamma(n[static_cast<std::size_t>(i)] + 1.0);
    }
    out.col(j) = v * std::exp(-0.5 * log_fact);
  }
  return out;
}

SectorOperator partial_trace(const SectorOperator& op, int n) {
  if (n < 0 || n > op.N) {
    std::ostringstream os;
    os << "partial_trace: n = " << n << " outside [0, " << op.N << "]";
    throw Error(os.str());
  }
  if (n == op.N) return op;
  const int d = op.d;
  const auto& full = *OccupationBasis::get(d, op.N);
  const auto& kept = *OccupationBasis::get(d, n);
  const auto& traced = *OccupationBasis::get(d, op.N - n);
  const Index dk = kept.size();

  // <m ⊗ j | m + j> = sqrt(C_m C_j / C_{m+j}) with C the multinomial counts.
  CMatrix out = CMatrix::Zero(dk, dk);
  std::vector<Index> idx(static_cast<std::size_t>(dk));
  std::vector<double> coef(static_cast<std::size_t>(dk));
  OccupationVector sum(static_cast<std::size_t>(d));
  for (Index j = 0; j < traced.size(); ++j) {
    const auto& rest = traced[j];
    for (Index m = 0; m < dk; ++m) {
      for (int i = 0; i < d; ++i) sum[static_cast<std::size_t>(i)] = kept[m][static_cast<std::size_t>(i)] + rest[static_cast<std::size_t>(i)];
      const Index s = *full.index_of(sum);
      idx[static_cast<std::size_t>(m)] = s;
      coef[static_cast<std::size_t>(m)] =
          std::exp(0.5 * (kept.log_multinomial_at(m) + traced.log_multinomial_at(j) - full.log_multinomial_at(s)));
    }
    for (Index a = 0; a < dk; ++a) {
      for (Index b = 0; b < dk; ++b) {
        out(a, b) += coef[static_cast<std::size_t>(a)] * coef[static_cast<std::size_t>(b)] *
                     op.matrix(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
      }
    }
  }
  return SectorOperator(d, n, std::move(out));
}

double wick_reduced_element(const SectorOperator& gamma, const OneBodyVector& v, int n) {
  if (n < 0 || n > gamma.N) throw Error("wick_reduced_element: n outside [0, N]");
  if (v.size() != gamma.d) throw Error("wick_reduced_element: vector dimension does not match d");
  if (n == 0) return gamma.matrix.trace().real();
  const SparseCMatrix lower = annihilation_power(v, gamma.N, n);
  const CMatrix lg = lower * gamma.matrix;
  // tr[a^n Γ a*^n] = sum_{r,c} (a^n Γ)_{r c} conj((a^n)_{r c})
  cplx acc = 0.0;
  for (Index k = 0; k < lower.outerSize(); ++k) {
    for (SparseCMatrix::InnerIterator it(lower, k); it; ++it) {
      acc += lg(it.row(), it.col()) * std::conj(it.value());
    }
  }
  double factor = 1.0;
  for (int i = 0; i < n; ++i) factor /= static_cast<double>(gamma.N - i);
  acc *= factor;
  if (std::abs(acc.imag()) > kChainedTol * std::max(1.0, std::abs(acc.real()))) {
    std::ostringstream os;
    os << "wick_reduced_element: imaginary residue " << acc.imag() << " (operator not Hermitian?)";
    throw Error(os.str());
  }
  return acc.real();
}

double trace_norm_distance(const SectorOperator& a, const SectorOperator& b) {
  if (a.d != b.d || a.N != b.N) {
    std::ostringstream os;
    os << "trace_norm_distance: sector mismatch (d=" << a.d << ", N=" << a.N << ") vs (d=" << b.d << ", N=" << b.N
       << ")";
    throw Error(os.str());
  }
  const CMatrix diff = a.matrix - b.matrix;
  if (is_hermitian(diff, kExactTol)) {
    const CMatrix herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<CMatrix> svd(diff);
  return svd.singularValues().sum();
}

CMatrix one_body_matrix(const SectorOperator& gamma1) {
  if (gamma1.N != 1) throw Error("one_body_matrix: operator must live on sector 1");
  const int d = gamma1.d;
  CMatrix out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = gamma1.matrix(sector_one_index(d, i), sector_one_index(d, j));
  return out;
}

SectorOperator from_one_body_matrix(const CMatrix& m) {
  const int d = static_cast<int>(m.rows());
  CMatrix out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(sector_one_index(d, i), sector_one_index(d, j)) = m(i, j);
  return SectorOperator(d, 1, std::move(out));
}

CMatrix symmetric_embedding(int d, int N) {
  const auto& basis = *OccupationBasis::get(d, N);
  const double full_dim = std::pow(static_cast<double>(d), N);
  if (full_dim > static_cast<double>(1 << 22)) throw Error("symmetric_embedding: full tensor space too large");
  const Index full = static_cast<Index>(full_dim);
  CMatrix out = CMatrix::Zero(full, basis.size());
  OccupationVector counts(static_cast<std::size_t>(d));
  for (Index w = 0; w < full; ++w) {
    std::fill(counts.begin(), counts.end(), 0);
    Index rem = w;
    for (int slot = 0; slot < N; ++slot) {
      ++counts[static_cast<std::size_t>(rem % d)];
      rem /= d;
    }
    const Index col = *basis.index_of(counts);
    out(w, col) = std::exp(-0.5 * basis.log_multinomial_at(col));
  }
  return out;
}

nlohmann::json to_json(const SectorOperator& op) {
  nlohmann::json j;
  j["d"] = op.d;
  j["N"] = op.N;
  j["D"] = op.dim();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(2 * op.dim() * op.dim()));
  for (Index r = 0; r < op.dim(); ++r) {
    for (Index c = 0; c < op.dim(); ++c) {
      data.push_back(op.matrix(r, c).real());
      data.push_back(op.matrix(r, c).imag());
    }
  }
  j["data"] = std::move(data);
  return j;
}

SectorOperator sector_operator_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  const int N = j.at("N").get<int>();
  const Index D = j.at("D").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != 2 * D * D) throw Error("sector operator JSON: data length mismatch");
  CMatrix m(D, D);
  for (Index r = 0; r < D; ++r)
    for (Index c = 0; c < D; ++c) {
      const auto k = static_cast<std::size_t>(2 * (r * D + c));
      m(r, c) = cplx(data[k], data[k + 1]);
    }
  return SectorOperator(d, N, std::move(m));
}

}  // namespace bdfl
