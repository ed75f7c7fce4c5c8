#pragma once

#include <cstdint>
#include <vector>

#include "bdfl/manybody.hpp"
#include "bdfl/parallel.hpp"

namespace bdfl {

/// E_H[u] = <u, h u> + ½ <u ⊗ u, w u ⊗ u>, for |u| = 1.
double hartree_energy(const OneBodyVector& u, const ModelSpec& model);

/// K[u]_{ac} = sum_{bd} w_{ab,cd} conj(u_b) u_d.
CMatrix mean_field_matrix(const OneBodyVector& u, const ModelSpec& model);

/// Riemannian gradient 2 (1 - |u><u|)(h + K[u]) u; the derivative of E_H along
/// a tangent direction ξ is Re <ξ, gradient>.
OneBodyVector hartree_gradient(const OneBodyVector& u, const ModelSpec& model);

struct HartreeOptions {
  int restarts = 8;
  double tol = 1e-12;
  double grad_tol = 1e-10;
  int max_iter = 200000;
  std::uint64_t seed = 42;
  Execution exec = Execution::parallel;
};

struct HartreeResult {
  double e_H = 0.0;
  OneBodyVector u_H;
  double grad_norm = 0.0;
  bool restarts_agree = false;
  std::vector<double> restart_energies;
  /// Restart minimizers within 1e-8 of e_H that differ as projectors.
  std::vector<OneBodyVector> distinct_minimizers;
};

HartreeResult minimize_hartree(const ModelSpec& model, const HartreeOptions& opts = {});

struct ConvergenceRow {
  int N = 0;
  double energy_per_particle = 0.0;
  double e_H = 0.0;
  double gap = 0.0;
  double lower_bound = 0.0;
  int degeneracy = 1;
  /// trace-norm distance of the ground-state γ^(1) to |u_H><u_H|
  double one_body_distance = 0.0;
};

/// E(N)/N against e_H along an ascending N sweep; lower_bound is
/// e_H - ‖H_2‖ 2(d+4)/N.
std::vector<ConvergenceRow> convergence_report(const ModelSpec& model, const std::vector<int>& N_list,
                                               const HartreeResult& hartree, Execution exec = Execution::parallel);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bdfl
