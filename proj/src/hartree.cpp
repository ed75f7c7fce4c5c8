#include "bdfl/hartree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdfl/sampling.hpp"

namespace bdfl {

namespace {

void require_unit(const OneBodyVector& u, const ModelSpec& model, const char* who) {
  if (u.size() != model.d) throw Error(std::string(who) + ": dimension mismatch");
  const double nrm = u.norm();
  if (std::abs(nrm - 1.0) > kExactTol) {
    std::ostringstream os;
    os << who << ": u must be a unit vector (norm " << nrm << ")";
    throw Error(os.str());
  }
}

CVector pair_vector(const OneBodyVector& u) {
  const Index d = u.size();
  CVector uu(d * d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) uu[a * d + b] = u[a] * u[b];
  return uu;
}

double energy_unchecked(const OneBodyVector& u, const ModelSpec& model) {
  const CVector uu = pair_vector(u);
  return u.dot(model.h * u).real() + 0.5 * uu.dot(model.w * uu).real();
}

OneBodyVector gradient_unchecked(const OneBodyVector& u, const ModelSpec& model) {
  const CVector v = model.h * u + mean_field_matrix(u, model) * u;
  return 2.0 * (v - u * u.dot(v));
}

struct Descent {
  OneBodyVector u;
  double energy = 0.0;
  double grad_norm = 0.0;
};

Descent descend(OneBodyVector u, const ModelSpec& model, const HartreeOptions& opts) {
  constexpr double kArmijo = 1e-4;
  const double eps = std::numeric_limits<double>::epsilon();
  double e = energy_unchecked(u, model);
  OneBodyVector g = gradient_unchecked(u, model);
  double gn = g.norm();
  double step = 1.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    if (gn <= 0.1 * opts.grad_tol) break;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      OneBodyVector trial = u - step * g;
      trial.normalize();
      const double et = energy_unchecked(trial, model);
      // the slack absorbs roundoff once the decrease drops below machine precision
      if (et <= e - kArmijo * step * gn * gn + 8.0 * eps * std::max(1.0, std::abs(e))) {
        const OneBodyVector gt = gradient_unchecked(trial, model);
        const double de = e - et;
        // Barzilai-Borwein guess for the next step; plain doubling zig-zags
        const double sy = (trial - u).dot(gt - g).real();
        const double ss = (trial - u).squaredNorm();
        u = trial;
        e = et;
        g = gt;
        gn = g.norm();
        accepted = true;
        if (de <= opts.tol * std::max(1.0, std::abs(e)) && gn <= opts.grad_tol) return {u, e, gn};
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-8, 1e3) : std::min(step * 2.0, 1e3);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (gn <= opts.grad_tol) break;
      std::ostringstream os;
      os << "minimize_hartree: line search failed at iteration " << it << ", E = " << e << ", |grad| = " << gn;
      throw Error(os.str());
    }
  }
  if (gn > opts.grad_tol) {
    std::ostringstream os;
    os << "minimize_hartree: no convergence after " << opts.max_iter << " iterations, |grad| = " << gn;
    throw Error(os.str());
  }
  return {u, e, gn};
}

double projector_distance(const OneBodyVector& a, const OneBodyVector& b) {
  // ‖|a><a| - |b><b|‖_1 = 2 sqrt(1 - |<a,b>|^2)
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - std::norm(a.dot(b))));
}

}  // namespace

double hartree_energy(const OneBodyVector& u, const ModelSpec& model) {
  require_unit(u, model, "hartree_energy");
  return energy_unchecked(u, model);
}

CMatrix mean_field_matrix(const OneBodyVector& u, const ModelSpec& model) {
  const Index d = model.d;
  CMatrix k = CMatrix::Zero(d, d);
  for (Index a = 0; a < d; ++a)
    for (Index c = 0; c < d; ++c) {
      cplx s = 0.0;
      for (Index b = 0; b < d; ++b)
        for (Index e = 0; e < d; ++e) s += model.w(a * d + b, c * d + e) * std::conj(u[b]) * u[e];
      k(a, c) = s;
    }
  return k;
}

OneBodyVector hartree_gradient(const OneBodyVector& u, const ModelSpec& model) {
  require_unit(u, model, "hartree_gradient");
  return gradient_unchecked(u, model);
}

HartreeResult minimize_hartree(const ModelSpec& model, const HartreeOptions& opts) {
  model.validate();
  if (opts.restarts < 1) throw Error("minimize_hartree: need at least one restart");
  const SphereSampler starts(model.d, opts.seed, stream::kHartreeStarts);
  const auto runs = ordered_map<Descent>(
      opts.restarts, [&](std::int64_t r) { return descend(starts.sample(static_cast<std::uint64_t>(r)), model, opts); },
      opts.exec);

  HartreeResult out;
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out.restart_energies.push_back(runs[r].energy);
    if (runs[r].energy < runs[best].energy) best = r;
  }
  out.e_H = runs[best].energy;
  out.u_H = runs[best].u;
  fix_phase(out.u_H);
  out.grad_norm = runs[best].grad_norm;
  out.restarts_agree = true;
  for (const auto& run : runs) {
    if (std::abs(run.energy - out.e_H) > 1e-8) {
      out.restarts_agree = false;
      continue;
    }
    OneBodyVector v = run.u;
    fix_phase(v);
    bool seen = false;
    for (const auto& m : out.distinct_minimizers) seen = seen || projector_distance(m, v) <= 1e-6;
    if (!seen) out.distinct_minimizers.push_back(v);
  }
  return out;
}

std::vector<ConvergenceRow> convergence_report(const ModelSpec& model, const std::vector<int>& N_list,
                                               const HartreeResult& hartree, Execution exec) {
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (N_list[i] < 2) throw Error("convergence_report: N must be >= 2");
    if (i > 0 && N_list[i] <= N_list[i - 1]) throw Error("convergence_report: N list must be ascending");
  }
  const SectorOperator h2 = assemble_hamiltonian(model, 2);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h2.matrix, Eigen::EigenvaluesOnly);
  const double h2_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  const SectorOperator target = from_one_body_matrix(hartree.u_H * hartree.u_H.adjoint());

  return ordered_map<ConvergenceRow>(
      static_cast<std::int64_t>(N_list.size()),
      [&](std::int64_t i) {
        const int N = N_list[static_cast<std::size_t>(i)];
        const SparseCMatrix hs = assemble_hamiltonian_sparse(model, N);
        const GroundState gs = hs.rows() > kDenseThreshold ? ground_state_iterative(hs)
                                                           : ground_state(SectorOperator(model.d, N, CMatrix(hs)));
        ConvergenceRow row;
        row.N = N;
        row.energy_per_particle = gs.energy / N;
        row.e_H = hartree.e_H;
        row.gap = hartree.e_H - row.energy_per_particle;
        row.lower_bound = hartree.e_H - h2_norm * 2.0 * (model.d + 4.0) / N;
        row.degeneracy = gs.degeneracy;
        const SectorOperator g1 = partial_trace(pure_state(gs.vector, model.d, N), 1);
        row.one_body_distance = trace_norm_distance(g1, target);
        return row;
      },
      exec);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("loglog_slope: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace bdfl
