#include "bdfl/definetti_c.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bdfl/sampling.hpp"

namespace bdfl {

SymmetricClassicalState::SymmetricClassicalState(int m_, int N_, std::vector<double> w)
    : m(m_), N(N_), weights(std::move(w)) {
  if (m < 1 || N < 0) throw Error("classical state: need m >= 1, N >= 0");
  if (static_cast<Index>(weights.size()) != basis().size()) throw Error("classical state: one weight per orbit");
}

void SymmetricClassicalState::validate(double tol) const {
  double total = 0.0;
  for (double w : weights) {
    if (w < -tol) throw Error("classical state: negative orbit weight");
    total += w;
  }
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream os;
    os << "classical state: weights sum to " << total;
    throw Error(os.str());
  }
}

namespace {

Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// log of c (c-1) ... (c-k+1); -inf when k > c
double log_falling(int c, int k) {
  if (k > c) return -INFINITY;
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += std::log(static_cast<double>(c - i));
  return s;
}

// Spread a function of the counts of a length-n word onto Ω^n.
template <class F>
ClassicalMarginal spread_over_words(int m, int n, F&& by_counts) {
  const auto& words = *OccupationBasis::get(m, n);
  std::vector<double> per_orbit(static_cast<std::size_t>(words.size()));
  for (Index i = 0; i < words.size(); ++i) per_orbit[static_cast<std::size_t>(i)] = by_counts(words[i]);
  const Index total = ipow(m, n);
  ClassicalMarginal out(static_cast<std::size_t>(total));
  OccupationVector k(static_cast<std::size_t>(m));
  for (Index x = 0; x < total; ++x) {
    std::fill(k.begin(), k.end(), 0);
    Index rem = x;
    for (int s = 0; s < n; ++s) {
      ++k[static_cast<std::size_t>(rem % m)];
      rem /= m;
    }
    out[static_cast<std::size_t>(x)] = per_orbit[static_cast<std::size_t>(*words.index_of(k))];
  }
  return out;
}

void require_enumerable(int m, int N) {
  if (sym_dimension(m, N) > kMaxOrbitEnumeration)
    throw Error("orbit enumeration too large; use df_marginal / df_marginal_closed_form instead");
}

}  // namespace

SymmetricClassicalState orbit_state(const OccupationVector& counts) {
  int N = 0;
  for (int c : counts) N += c;
  const int m = static_cast<int>(counts.size());
  const auto& basis = *OccupationBasis::get(m, N);
  std::vector<double> w(static_cast<std::size_t>(basis.size()), 0.0);
  const auto idx = basis.index_of(counts);
  if (!idx) throw Error("orbit_state: invalid counts");
  w[static_cast<std::size_t>(*idx)] = 1.0;
  return {m, N, std::move(w)};
}

SymmetricClassicalState product_classical_state(const RVector& rho, int N) {
  const int m = static_cast<int>(rho.size());
  const auto& basis = *OccupationBasis::get(m, N);
  std::vector<double> w(static_cast<std::size_t>(basis.size()));
  for (Index i = 0; i < basis.size(); ++i) {
    double lw = basis.log_multinomial_at(i);
    for (int a = 0; a < m; ++a) {
      const int c = basis[i][static_cast<std::size_t>(a)];
      if (c > 0) lw += c * std::log(rho[a]);
    }
    w[static_cast<std::size_t>(i)] = std::exp(lw);
  }
  return {m, N, std::move(w)};
}

SymmetricClassicalState random_symmetric_state(int m, int N, std::uint64_t seed, std::uint64_t index) {
  const auto& basis = *OccupationBasis::get(m, N);
  CounterRng rng(seed, stream::kRandomStates);
  std::vector<double> w(static_cast<std::size_t>(basis.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    // cubed exponentials: weights spread over several orders of magnitude
    const double e = -std::log(rng.uniform(index, i));
    w[i] = e * e * e;
    total += w[i];
  }
  for (double& x : w) x /= total;
  return {m, N, std::move(w)};
}

ClassicalMarginal configuration_probabilities(const SymmetricClassicalState& mu) {
  if (std::pow(static_cast<double>(mu.m), mu.N) > static_cast<double>(1 << 20))
    throw Error("configuration_probabilities: state space too large");
  const auto& basis = mu.basis();
  return spread_over_words(mu.m, mu.N, [&](const OccupationVector& k) {
    const Index i = *basis.index_of(k);
    return mu.weights[static_cast<std::size_t>(i)] * std::exp(-basis.log_multinomial_at(i));
  });
}

ClassicalMarginal marginal(const SymmetricClassicalState& mu, int n) {
  if (n < 0 || n > mu.N) throw Error("marginal: need 0 <= n <= N");
  const auto& basis = mu.basis();
  const double log_den = log_falling(mu.N, n);
  return spread_over_words(mu.m, n, [&](const OccupationVector& k) {
    double p = 0.0;
    for (Index i = 0; i < basis.size(); ++i) {
      const double w = mu.weights[static_cast<std::size_t>(i)];
      if (w == 0.0) continue;
      double lp = -log_den;
      for (int a = 0; a < mu.m; ++a) lp += log_falling(basis[i][static_cast<std::size_t>(a)], k[static_cast<std::size_t>(a)]);
      if (lp > -INFINITY) p += w * std::exp(lp);
    }
    return p;
  });
}

ClassicalMarginal df_marginal(const SymmetricClassicalState& mu, int n) {
  if (n < 0 || n > mu.N) throw Error("df_marginal: need 0 <= n <= N");
  const auto& basis = mu.basis();
  const double inv_n = 1.0 / mu.N;
  return spread_over_words(mu.m, n, [&](const OccupationVector& k) {
    double p = 0.0;
    for (Index i = 0; i < basis.size(); ++i) {
      const double w = mu.weights[static_cast<std::size_t>(i)];
      if (w == 0.0) continue;
      double prod = 1.0;
      for (int a = 0; a < mu.m; ++a)
        prod *= std::pow(basis[i][static_cast<std::size_t>(a)] * inv_n, k[static_cast<std::size_t>(a)]);
      p += w * prod;
    }
    return p;
  });
}

ClassicalMarginal df_marginal_closed_form(const SymmetricClassicalState& mu, int n) {
  if (n == 1) return marginal(mu, 1);
  if (n != 2) throw Error("df_marginal_closed_form: only n = 1, 2");
  if (mu.N < 2) throw Error("df_marginal_closed_form: n = 2 needs N >= 2");
  const auto one = marginal(mu, 1);
  auto out = marginal(mu, 2);
  const double N = mu.N;
  for (auto& x : out) x *= (N - 1.0) / N;
  for (int a = 0; a < mu.m; ++a) out[static_cast<std::size_t>(a * mu.m + a)] += one[static_cast<std::size_t>(a)] / N;
  return out;
}

SymmetricClassicalState df_state(const SymmetricClassicalState& mu) {
  require_enumerable(mu.m, mu.N);
  const auto& basis = mu.basis();
  const Index D = basis.size();
  std::vector<double> out(static_cast<std::size_t>(D), 0.0);
  const double logN = std::log(static_cast<double>(mu.N));
  for (Index i = 0; i < D; ++i) {
    const double w = mu.weights[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    const auto& c = basis[i];
    for (Index j = 0; j < D; ++j) {
      const auto& k = basis[j];
      double lp = basis.log_multinomial_at(j);
      bool zero = false;
      for (int a = 0; a < mu.m && !zero; ++a) {
        const int ka = k[static_cast<std::size_t>(a)];
        if (ka == 0) continue;
        const int ca = c[static_cast<std::size_t>(a)];
        if (ca == 0) zero = true;
        else lp += ka * (std::log(static_cast<double>(ca)) - logN);
      }
      if (!zero) out[static_cast<std::size_t>(j)] += w * std::exp(lp);
    }
  }
  return {mu.m, mu.N, std::move(out)};
}

double tv_distance(const ClassicalMarginal& p, const ClassicalMarginal& q) {
  if (p.size() != q.size()) throw Error("tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s;
}

ClassicalMarginal product_marginal(const RVector& rho, int n) {
  const int m = static_cast<int>(rho.size());
  const Index total = ipow(m, n);
  ClassicalMarginal out(static_cast<std::size_t>(total));
  for (Index x = 0; x < total; ++x) {
    double p = 1.0;
    Index rem = x;
    for (int s = 0; s < n; ++s) {
      p *= rho[rem % m];
      rem /= m;
    }
    out[static_cast<std::size_t>(x)] = p;
  }
  return out;
}

DfBoundReport verify_df_bound(const SymmetricClassicalState& mu, int n) {
  DfBoundReport r;
  r.m = mu.m;
  r.N = mu.N;
  r.n = n;
  r.tv = tv_distance(marginal(mu, n), df_marginal(mu, n));
  r.bound_general = 2.0 * n * (n - 1.0) / mu.N;
  const double k = std::min<double>(static_cast<double>(mu.m) * n, static_cast<double>(n) * n);
  r.bound_finite = 2.0 * k / mu.N;
  r.finite_ratio = r.tv * mu.N / k;
  r.pass = r.tv <= r.bound_general + kExactTol;
  return r;
}

double classical_orbit_energy(const ClassicalModel& model, const OccupationVector& counts) {
  int N = 0;
  for (int c : counts) N += c;
  double one = 0.0, pair = 0.0;
  for (int a = 0; a < model.m; ++a) {
    const double na = counts[static_cast<std::size_t>(a)];
    one += na * model.V[a];
    pair += 0.5 * na * (na - 1.0) * model.w(a, a);
    for (int b = a + 1; b < model.m; ++b) pair += na * counts[static_cast<std::size_t>(b)] * model.w(a, b);
  }
  return N >= 2 ? one + pair / (N - 1.0) : one;
}

ClassicalGibbs classical_gibbs(const ClassicalModel& model, int N, double T) {
  model.validate();
  if (!(T > 0.0)) throw Error("classical_gibbs: T must be > 0");
  if (N < 2) throw Error("classical_gibbs: N must be >= 2");
  require_enumerable(model.m, N);
  const auto& basis = *OccupationBasis::get(model.m, N);
  std::vector<double> lw(static_cast<std::size_t>(basis.size()));
  double top = -INFINITY;
  for (Index i = 0; i < basis.size(); ++i) {
    lw[static_cast<std::size_t>(i)] = basis.log_multinomial_at(i) - classical_orbit_energy(model, basis[i]) / T;
    top = std::max(top, lw[static_cast<std::size_t>(i)]);
  }
  double z = 0.0;
  for (double& x : lw) {
    x = std::exp(x - top);
    z += x;
  }
  for (double& x : lw) x /= z;
  ClassicalGibbs out;
  out.state = SymmetricClassicalState(model.m, N, std::move(lw));
  out.free_energy = -T * (top + std::log(z));
  return out;
}

double mf_functional(const ClassicalModel& model, const RVector& rho, double T) {
  double s = model.V.dot(rho) + 0.5 * rho.dot(model.w * rho);
  for (Index a = 0; a < rho.size(); ++a)
    if (rho[a] > 0.0) s += T * rho[a] * std::log(rho[a]);
  return s;
}

namespace {

RVector softmax(const RVector& x) {
  const double top = x.maxCoeff();
  RVector e = (x.array() - top).exp();
  return e / e.sum();
}

}  // namespace

MeanField mf_free_energy(const ClassicalModel& model, double T, std::uint64_t seed) {
  model.validate();
  if (!(T > 0.0)) throw Error("mf_free_energy: T must be > 0");
  constexpr int kStarts = 5;
  constexpr int kMaxIter = 100000;
  constexpr double kDamping = 0.5;
  CounterRng rng(seed, stream::kMeanFieldStarts);
  MeanField best;
  best.free_energy = INFINITY;
  for (int s = 0; s < kStarts; ++s) {
    RVector rho(model.m);
    if (s == 0) {
      rho.setConstant(1.0 / model.m);
    } else {
      for (int a = 0; a < model.m; ++a) rho[a] = -std::log(rng.uniform(static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(a)));
      rho /= rho.sum();
    }
    int it = 0;
    for (; it < kMaxIter; ++it) {
      const RVector target = softmax(-(model.V + model.w * rho) / T);
      const RVector next = (1.0 - kDamping) * rho + kDamping * target;
      const double step = (next - rho).lpNorm<1>();
      rho = next;
      if (step <= 1e-12) break;
    }
    if (it == kMaxIter) {
      std::ostringstream os;
      os << "mf_free_energy: start " << s << " did not converge in " << kMaxIter << " iterations";
      throw Error(os.str());
    }
    const double f = mf_functional(model, rho, T);
    if (f < best.free_energy) best = {f, rho, it + 1};
  }
  return best;
}

}  // namespace bdfl
