#include "bdfl/manybody.hpp"

#include <cmath>
#include <sstream>

#include "bdfl/sampling.hpp"

namespace bdfl {

CMatrix swap_operator(int d) {
  CMatrix s = CMatrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) s(b * d + a, a * d + b) = 1.0;
  return s;
}

void ModelSpec::validate() const {
  if (d < 1) throw Error("model: d must be >= 1");
  if (h.rows() != d || h.cols() != d) throw Error("model: h must be d x d");
  if (w.rows() != d * d || w.cols() != d * d) throw Error("model: w must be d^2 x d^2");
  if (!is_hermitian(h, kExactTol)) throw Error("model: h is not Hermitian");
  if (!is_hermitian(w, kExactTol)) throw Error("model: w is not Hermitian");
  const CMatrix s = swap_operator(d);
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((s * w * s - w).cwiseAbs().maxCoeff() > kExactTol * scale)
    throw Error("model: w does not commute with the two-particle swap");
}

CMatrix ModelSpec::rank_one_pair(int d, double g) {
  CMatrix w = CMatrix::Zero(d * d, d * d);
  w(0, 0) = g;
  return w;
}

CMatrix ModelSpec::density_density(const RMatrix& g) {
  const auto d = g.rows();
  if (g.cols() != d) throw Error("density_density: g must be square");
  CMatrix w = CMatrix::Zero(d * d, d * d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) w(a * d + b, a * d + b) = g(a, b);
  return w;
}

ModelSpec ModelSpec::benchmark(double g) {
  ModelSpec m;
  m.d = 2;
  m.h = CMatrix::Zero(2, 2);
  m.h(1, 1) = 1.0;
  m.w = rank_one_pair(2, g);
  return m;
}

SparseCMatrix assemble_hamiltonian_sparse(const ModelSpec& model, int N) {
  model.validate();
  if (N < 1) throw Error("assemble_hamiltonian: N must be >= 1");
  const int d = model.d;
  const auto& basis = *OccupationBasis::get(d, N);

  struct Term1 {
    int a, b;
    cplx v;
  };
  struct Term2 {
    int a, b, c, e;
    cplx v;
  };
  std::vector<Term1> one;
  std::vector<Term2> two;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (model.h(a, b) != cplx(0.0)) one.push_back({a, b, model.h(a, b)});
  if (N >= 2) {
    const double pref = 1.0 / (2.0 * (N - 1));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            const cplx v = model.w(a * d + b, c * d + e);
            if (v != cplx(0.0)) two.push_back({a, b, c, e, pref * v});
          }
  }

  std::vector<Eigen::Triplet<cplx>> triplets;
  OccupationVector occ;
  for (Index col = 0; col < basis.size(); ++col) {
    for (const auto& t : one) {
      occ = basis[col];
      if (occ[t.b] == 0) continue;
      double coef = std::sqrt(static_cast<double>(occ[t.b]));
      --occ[t.b];
      coef *= std::sqrt(static_cast<double>(occ[t.a] + 1));
      ++occ[t.a];
      triplets.emplace_back(*basis.index_of(occ), col, t.v * coef);
    }
    for (const auto& t : two) {
      // a*_a a*_b a_e a_c, applied right to left
      occ = basis[col];
      if (occ[t.c] == 0) continue;
      double coef = std::sqrt(static_cast<double>(occ[t.c]));
      --occ[t.c];
      if (occ[t.e] == 0) continue;
      coef *= std::sqrt(static_cast<double>(occ[t.e]));
      --occ[t.e];
      coef *= std::sqrt(static_cast<double>(occ[t.b] + 1));
      ++occ[t.b];
      coef *= std::sqrt(static_cast<double>(occ[t.a] + 1));
      ++occ[t.a];
      triplets.emplace_back(*basis.index_of(occ), col, t.v * coef);
    }
  }
  SparseCMatrix hmat(basis.size(), basis.size());
  hmat.setFromTriplets(triplets.begin(), triplets.end());
  return hmat;
}

SectorOperator assemble_hamiltonian(const ModelSpec& model, int N) {
  return SectorOperator(model.d, N, CMatrix(assemble_hamiltonian_sparse(model, N)));
}

void fix_phase(CVector& v) {
  if (v.size() == 0) return;
  Index best = 0;
  double best_abs = std::abs(v[0]);
  for (Index i = 1; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_abs * (1.0 + 1e-12) + 1e-300) {
      best = i;
      best_abs = a;
    }
  }
  if (best_abs == 0.0) return;
  v *= std::conj(v[best]) / best_abs;
  v[best] = best_abs;
}

SpectralData spectrum(const SectorOperator& hamiltonian) {
  if (!is_hermitian(hamiltonian.matrix, kExactTol)) throw Error("spectrum: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hamiltonian.matrix);
  if (es.info() != Eigen::Success) throw Error("spectrum: eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

int count_degenerate(const RVector& ev, double scale) {
  const double tol = 1e-10 * std::max(1.0, scale);
  int k = 0;
  for (Index i = 0; i < ev.size() && ev[i] - ev[0] <= tol; ++i) ++k;
  return k;
}

}  // namespace

GroundState ground_state(const SectorOperator& hamiltonian, Index dense_threshold) {
  if (hamiltonian.dim() > dense_threshold) {
    return ground_state_iterative(hamiltonian.matrix.sparseView(), LanczosOptions{});
  }
  const auto spec = spectrum(hamiltonian);
  GroundState gs;
  gs.energy = spec.eigenvalues[0];
  gs.vector = spec.eigenvectors.col(0);
  fix_phase(gs.vector);
  gs.degeneracy = count_degenerate(spec.eigenvalues, spec.eigenvalues.cwiseAbs().maxCoeff());
  gs.residual = (hamiltonian.matrix * gs.vector - gs.energy * gs.vector).norm();
  const double hnorm = std::max(1.0, spec.eigenvalues.cwiseAbs().maxCoeff());
  if (gs.residual > 1e-8 * hnorm) {
    std::ostringstream os;
    os << "ground_state: residual " << gs.residual << " exceeds 1e-8 ||H||";
    throw Error(os.str());
  }
  return gs;
}

GroundState ground_state_iterative(const SparseCMatrix& hamiltonian, const LanczosOptions& opts) {
  const Index n = hamiltonian.rows();
  if (n == 0) throw Error("ground_state_iterative: empty operator");
  const int m = static_cast<int>(std::min<Index>(opts.krylov_dim, n));

  CounterRng rng(0x5eedULL, 0);
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.complex_normal(static_cast<std::uint64_t>(i), 0);
  v.normalize();

  // crude ||H|| bound for the stopping rule
  double hnorm = 0.0;
  for (Index k = 0; k < hamiltonian.outerSize(); ++k) {
    double col = 0.0;
    for (SparseCMatrix::InnerIterator it(hamiltonian, k); it; ++it) col += std::abs(it.value());
    hnorm = std::max(hnorm, col);
  }
  hnorm = std::max(hnorm, 1.0);

  double residual = 0.0;
  double theta = 0.0;
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    CMatrix q(n, m);
    RVector alpha(m), beta(m);
    q.col(0) = v;
    int built = m;
    for (int j = 0; j < m; ++j) {
      CVector r = hamiltonian * q.col(j);
      alpha[j] = q.col(j).dot(r).real();
      // full reorthogonalization, twice
      for (int pass = 0; pass < 2; ++pass) r -= q.leftCols(j + 1) * (q.leftCols(j + 1).adjoint() * r);
      beta[j] = r.norm();
      if (j + 1 < m) {
        if (beta[j] < 1e-14 * hnorm) {
          built = j + 1;
          break;
        }
        q.col(j + 1) = r / beta[j];
      }
    }
    RMatrix t = RMatrix::Zero(built, built);
    for (int j = 0; j < built; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < built) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(t);
    theta = es.eigenvalues()[0];
    const RVector s = es.eigenvectors().col(0);
    v = q.leftCols(built) * s.cast<cplx>();
    v.normalize();
    residual = (hamiltonian * v - theta * v).norm();
    if (residual <= opts.tol * hnorm) {
      GroundState gs;
      gs.energy = theta;
      gs.vector = v;
      fix_phase(gs.vector);
      gs.residual = residual;
      // Ritz values of the final Krylov space that coincide with theta
      gs.degeneracy = count_degenerate(es.eigenvalues(), hnorm);
      return gs;
    }
  }
  std::ostringstream os;
  os << "ground_state_iterative: no convergence after " << opts.max_restarts << " restarts, residual " << residual;
  throw Error(os.str());
}

GibbsState gibbs_state(const SectorOperator& hamiltonian, double temperature) {
  if (!(temperature > 0.0)) throw Error("gibbs_state: temperature must be > 0");
  const auto spec = spectrum(hamiltonian);
  const RVector& ev = spec.eigenvalues;
  const double lmin = ev[0];
  RVector p(ev.size());
  for (Index i = 0; i < ev.size(); ++i) p[i] = std::exp(-(ev[i] - lmin) / temperature);
  const double z = p.sum();
  p /= z;
  CMatrix gamma = spec.eigenvectors * p.cast<cplx>().asDiagonal() * spec.eigenvectors.adjoint();
  gamma = 0.5 * (gamma + gamma.adjoint()).eval();
  GibbsState out{SectorOperator(hamiltonian.d, hamiltonian.N, std::move(gamma)), lmin - temperature * std::log(z), ev};
  return out;
}

double entropy_term(const SectorOperator& gamma) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gamma.matrix, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()[i];
    if (l > 0.0) s += l * std::log(l);
  }
  return s;
}

double free_energy_functional(const SectorOperator& hamiltonian, const SectorOperator& gamma, double temperature) {
  const double energy = (hamiltonian.matrix * gamma.matrix).trace().real();
  return energy + temperature * entropy_term(gamma);
}

}  // namespace bdfl
