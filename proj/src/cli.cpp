#include "bdfl/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bdfl/csv.hpp"
#include "bdfl/definetti_c.hpp"
#include "bdfl/definetti_q.hpp"
#include "bdfl/gibbs.hpp"
#include "bdfl/hartree.hpp"
#include "bdfl/locfock.hpp"
#include "bdfl/manybody.hpp"
#include "bdfl/model_io.hpp"
#include "bdfl/parallel.hpp"

namespace bdfl {

namespace {

using json = nlohmann::json;

struct ConfigError : Error {
  using Error::Error;
};

struct Common {
  std::uint64_t seed = 42;
  std::string out;
  std::string manifest;
};

struct Outcome {
  CsvTable table;
  json summary = json::object();
  std::vector<std::string> violations;
  std::string line;

  void check(bool ok, const std::string& what) {
    if (!ok) violations.push_back(what);
  }
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ModelSpec load_model(const std::string& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ClassicalModel load_classical_model(const std::string& path) {
  try {
    return classical_model_from_json(read_json_file(path));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void require_ascending(const std::vector<int>& v, int min_value, const char* name) {
  require(!v.empty(), std::string(name) + ": empty list");
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] >= min_value, std::string(name) + ": values must be >= " + std::to_string(min_value));
    if (i > 0) require(v[i] > v[i - 1], std::string(name) + ": values must be strictly ascending");
  }
}

json vector_json(const OneBodyVector& u) {
  json re = json::array(), im = json::array();
  for (Index i = 0; i < u.size(); ++i) {
    re.push_back(u[i].real());
    im.push_back(u[i].imag());
  }
  return {{"re", re}, {"im", im}};
}

std::string fmt(double x) { return format_real(x); }

// ---------------------------------------------------------------- dims

struct DimsArgs {
  int d = 2;
  int N = 1;
};

Outcome cmd_dims(const DimsArgs& a, const Common&) {
  require(a.d >= 1 && a.N >= 0, "dims: need d >= 1 and N >= 0");
  Outcome o;
  std::int64_t dim = 0;
  try {
    dim = sym_dimension(a.d, a.N);
  } catch (const OverflowError& e) {
    throw ConfigError(e.what());
  }
  o.table.columns = {"d", "N", "dim"};
  o.table.add({std::int64_t{a.d}, std::int64_t{a.N}, dim});
  o.summary["dim"] = dim;
  o.line = std::to_string(dim);
  return o;
}

// ---------------------------------------------------------------- groundstate

struct GroundArgs {
  std::string model;
  std::vector<int> N;
};

Outcome cmd_groundstate(const GroundArgs& a, const Common& c) {
  const ModelSpec model = load_model(a.model);
  require_ascending(a.N, 1, "--N");
  HartreeOptions hopts;
  hopts.seed = c.seed;
  const HartreeResult hr = minimize_hartree(model, hopts);

  Outcome o;
  o.table.columns = {"N", "D", "energy", "energy_per_particle", "degeneracy", "residual", "e_H"};
  const auto rows = ordered_map<GroundState>(static_cast<std::int64_t>(a.N.size()), [&](std::int64_t i) {
    const SparseCMatrix h = assemble_hamiltonian_sparse(model, a.N[static_cast<std::size_t>(i)]);
    return h.rows() > kDenseThreshold ? ground_state_iterative(h)
                                      : ground_state(SectorOperator(model.d, a.N[static_cast<std::size_t>(i)], CMatrix(h)));
  });
  double prev = -INFINITY;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int N = a.N[i];
    const double epp = rows[i].energy / N;
    o.table.add({std::int64_t{N}, static_cast<std::int64_t>(rows[i].vector.size()), rows[i].energy, epp,
                 std::int64_t{rows[i].degeneracy}, rows[i].residual, hr.e_H});
    o.check(epp <= hr.e_H + kChainedTol, "E(N)/N exceeds e_H at N=" + std::to_string(N));
    o.check(epp >= prev - kChainedTol, "E(N)/N decreases at N=" + std::to_string(N));
    prev = epp;
  }
  o.summary["e_H"] = hr.e_H;
  o.line = "groundstate: " + std::to_string(rows.size()) + " sectors, E(N)/N at N=" + std::to_string(a.N.back()) +
           " = " + fmt(rows.back().energy / a.N.back());
  return o;
}

// ---------------------------------------------------------------- hartree

struct HartreeArgs {
  std::string model;
  std::vector<int> N{10, 20, 40, 80};
  int restarts = 8;
};

Outcome cmd_hartree(const HartreeArgs& a, const Common& c) {
  const ModelSpec model = load_model(a.model);
  require_ascending(a.N, 2, "--N");
  require(a.restarts >= 1, "--restarts must be >= 1");
  HartreeOptions hopts;
  hopts.restarts = a.restarts;
  hopts.seed = c.seed;
  const HartreeResult hr = minimize_hartree(model, hopts);
  const auto rows = convergence_report(model, a.N, hr);

  Outcome o;
  o.table.columns = {"N", "energy_per_particle", "e_H", "gap", "lower_bound"};
  std::vector<double> ns, gaps;
  double prev = -INFINITY;
  for (const auto& r : rows) {
    o.table.add({std::int64_t{r.N}, r.energy_per_particle, r.e_H, r.gap, r.lower_bound});
    o.check(r.gap >= -kChainedTol, "E(N)/N above e_H at N=" + std::to_string(r.N));
    o.check(r.lower_bound <= r.energy_per_particle + kChainedTol, "certified lower bound violated at N=" + std::to_string(r.N));
    o.check(r.energy_per_particle >= prev - kChainedTol, "E(N)/N decreases at N=" + std::to_string(r.N));
    prev = r.energy_per_particle;
    if (r.gap > 0.0) {
      ns.push_back(r.N);
      gaps.push_back(r.gap);
    }
  }
  o.check(hr.grad_norm <= 1e-10, "Hartree gradient norm " + fmt(hr.grad_norm) + " above 1e-10");
  o.summary["e_H"] = hr.e_H;
  o.summary["u_H"] = vector_json(hr.u_H);
  o.summary["grad_norm"] = hr.grad_norm;
  o.summary["restarts_agree"] = hr.restarts_agree;
  o.summary["restart_energies"] = hr.restart_energies;
  json mins = json::array();
  for (const auto& m : hr.distinct_minimizers) mins.push_back(vector_json(m));
  o.summary["distinct_minimizers"] = mins;
  json dist = json::array();
  for (const auto& r : rows) dist.push_back({{"N", r.N}, {"one_body_distance", r.one_body_distance}, {"degeneracy", r.degeneracy}});
  o.summary["ground_state_one_body"] = dist;
  if (ns.size() >= 2) o.summary["loglog_gap_slope"] = loglog_slope(ns, gaps);
  o.line = "hartree: e_H = " + fmt(hr.e_H) + ", gap(" + std::to_string(rows.back().N) + ") = " + fmt(rows.back().gap);
  return o;
}

// ---------------------------------------------------------------- definetti-check

struct DeFinettiArgs {
  std::string model;
  std::string state;
  int random = 0;
  int d = 2;
  int N = 10;
  int rank = 0;
  std::vector<int> n{2};
  std::int64_t samples = 0;
};

Outcome cmd_definetti(const DeFinettiArgs& a, const Common& c) {
  std::vector<SectorOperator> states;
  if (!a.state.empty()) {
    try {
      states.push_back(sector_operator_from_json(read_json_file(a.state)));
      require_density(states.back());
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  } else if (!a.model.empty()) {
    const ModelSpec model = load_model(a.model);
    require(a.N >= 1, "--N must be >= 1");
    const SparseCMatrix h = assemble_hamiltonian_sparse(model, a.N);
    const GroundState gs = h.rows() > kDenseThreshold ? ground_state_iterative(h)
                                                      : ground_state(SectorOperator(model.d, a.N, CMatrix(h)));
    states.push_back(pure_state(gs.vector, model.d, a.N));
  } else {
    require(a.random >= 1, "definetti-check: give --model, --state or --random");
    require(a.d >= 1 && a.N >= 1, "need d >= 1 and N >= 1");
    const int dim = static_cast<int>(sym_dimension(a.d, a.N));
    for (int i = 0; i < a.random; ++i) {
      const int rank = a.rank > 0 ? a.rank : 1 + static_cast<int>(CounterRng(c.seed, stream::kRandomStates).bits(1u << 30, i) % dim);
      states.push_back(random_density(a.d, a.N, rank, c.seed, static_cast<std::uint64_t>(i)));
    }
  }
  for (int n : a.n) require(n >= 0 && n <= states.front().N, "--n must lie in [0, N]");
  require(a.samples == 0 || a.samples >= 1000, "--samples must be 0 or >= 1000");

  Outcome o;
  o.table.columns = {"index", "N", "d", "n", "distance", "bound", "pass", "sharper_bound", "sharper_holds", "samples", "stderr", "mc_ok"};
  SphereSampler sampler(states.front().d, c.seed, stream::kCkmr);
  int sharper_violations = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (int n : a.n) {
      const DeFinettiReport r = verify_definetti_bound(states[i], n);
      double se = 0.0;
      bool mc_ok = true;
      if (a.samples > 0) {
        const auto hier = reduced_hierarchy(states[i], n);
        const SectorOperator closed = chiribella_reduced(hier, r.N, r.d, n);
        const McMatrixEstimate mc = ckmr_reduced_mc(states[i], n, a.samples, sampler);
        se = mc.stderr;
        const RMatrix diff = (mc.estimate.matrix - closed.matrix).cwiseAbs();
        mc_ok = (diff.array() <= kSigmaFactor * mc.stderr_matrix.array() + kChainedTol).all();
      }
      o.table.add({static_cast<std::int64_t>(i), std::int64_t{r.N}, std::int64_t{r.d}, std::int64_t{n}, r.distance, r.bound,
                   r.pass, r.sharper_bound, r.sharper_holds, a.samples, se, mc_ok});
      o.check(r.pass, "de Finetti bound violated: state " + std::to_string(i) + ", n=" + std::to_string(n) +
                          ", distance " + fmt(r.distance) + " > " + fmt(r.bound));
      o.check(mc_ok, "closed form and Monte-Carlo disagree beyond 3 sigma: state " + std::to_string(i) + ", n=" + std::to_string(n));
      if (!r.sharper_holds) ++sharper_violations;
    }
  }
  o.summary["states"] = states.size();
  o.summary["sharper_bound_violations"] = sharper_violations;
  const auto& last = o.table.rows.back();
  o.line = "definetti-check: " + std::string(o.violations.empty() ? "pass" : "FAIL") + ", " +
           std::to_string(o.table.rows.size()) + " checks, last bound " + fmt(std::get<double>(last[5]));
  return o;
}

// ---------------------------------------------------------------- wick-check

struct WickArgs {
  int d = 2;
  int Nmax = 4;
  int nmax = 3;
  int trials = 5;
};

Outcome cmd_wick(const WickArgs& a, const Common& c) {
  require(a.d >= 1 && a.Nmax >= 0 && a.nmax >= 0 && a.trials >= 1, "wick-check: invalid sizes");
  require(a.nmax <= kAntiWickMaxOrder, "wick-check: --nmax must be <= 4");
  Outcome o;
  o.table.columns = {"N", "n", "trials", "identity_residual", "closed_form_checked", "antiwick_dev", "pass"};
  SphereSampler vs(a.d, c.seed, stream::kSchur, 1u << 20);
  for (int N = 0; N <= a.Nmax; ++N) {
    for (int n = 0; n <= a.nmax; ++n) {
      const auto coeffs = wick_to_antiwick_coeffs(n);
      double residual = 0.0, dev = 0.0;
      const bool closed = N >= 1 && n <= N;
      const SectorOperator gamma = random_density(a.d, std::max(N, 1), static_cast<int>(sym_dimension(a.d, std::max(N, 1))), c.seed,
                                                  static_cast<std::uint64_t>(1000 + N * 10 + n));
      SectorOperator tilde;
      if (closed) tilde = chiribella_reduced(reduced_hierarchy(gamma, n), N, a.d, n);
      for (int t = 0; t < a.trials; ++t) {
        const OneBodyVector v = vs.next();
        const CMatrix lhs = CMatrix(annihilation_power(v, N + n, n)) * CMatrix(creation_power(v, N, n));
        CMatrix rhs = CMatrix::Zero(lhs.rows(), lhs.cols());
        for (int k = 0; k <= std::min(n, N); ++k)
          rhs += static_cast<double>(coeffs[static_cast<std::size_t>(k)]) *
                 (CMatrix(creation_power(v, N - k, k)) * CMatrix(annihilation_power(v, N, k)));
        residual = std::max(residual, (lhs - rhs).cwiseAbs().maxCoeff());
        if (closed) {
          const CVector vn = product_state(v, n);
          const double via_closed = vn.dot(tilde.matrix * vn).real();
          dev = std::max(dev, std::abs(via_closed - antiwick_reduced_element(gamma, v, n)));
        }
      }
      const bool pass = residual <= kChainedTol && dev <= 1e-9;
      o.table.add({std::int64_t{N}, std::int64_t{n}, std::int64_t{a.trials}, residual, closed, dev, pass});
      o.check(residual <= kChainedTol, "Wick/anti-Wick identity residual " + fmt(residual) + " at N=" + std::to_string(N) +
                                           ", n=" + std::to_string(n));
      o.check(dev <= 1e-9, "anti-Wick element differs from closed form by " + fmt(dev) + " at N=" + std::to_string(N) +
                               ", n=" + std::to_string(n));
    }
  }
  o.line = std::string("wick-check: ") + (o.violations.empty() ? "pass" : "FAIL") + ", " + std::to_string(o.table.rows.size()) + " sectors";
  return o;
}

// ---------------------------------------------------------------- df-classical

struct DfArgs {
  std::vector<int> m{2, 3};
  int Nmin = 2;
  int Nmax = 8;
  int count = 200;
  std::vector<int> n{2};
};

Outcome cmd_df(const DfArgs& a, const Common& c) {
  require(!a.m.empty() && a.Nmin >= 1 && a.Nmax >= a.Nmin && a.count >= 0, "df-classical: invalid sizes");
  for (int m : a.m) require(m >= 1, "--m values must be >= 1");
  for (int n : a.n) require(n >= 1 && n <= a.Nmin, "--n values must lie in [1, Nmin]");
  Outcome o;
  o.table.columns = {"index", "kind", "m", "N", "n", "tv", "bound_general", "bound_finite", "finite_ratio", "closed_form_dev", "pass"};

  auto row = [&](std::int64_t idx, const std::string& kind, const SymmetricClassicalState& mu, int n) {
    const DfBoundReport r = verify_df_bound(mu, n);
    double dev = 0.0;
    if (n <= 2 && mu.N >= n) {
      const auto closed = df_marginal_closed_form(mu, n);
      const auto enumerated = marginal(df_state(mu), n);
      for (std::size_t i = 0; i < closed.size(); ++i) dev = std::max(dev, std::abs(closed[i] - enumerated[i]));
    }
    o.table.add({idx, kind, std::int64_t{mu.m}, std::int64_t{mu.N}, std::int64_t{n}, r.tv, r.bound_general, r.bound_finite,
                 r.finite_ratio, dev, r.pass});
    o.check(r.pass, kind + " state " + std::to_string(idx) + ": TV " + fmt(r.tv) + " exceeds " + fmt(r.bound_general));
    o.check(dev <= kExactTol, kind + " state " + std::to_string(idx) + ": closed-form marginal off by " + fmt(dev));
    return r;
  };

  const auto anti = row(-1, "anticorrelated", orbit_state({1, 1}), 2);
  o.check(anti.tv == 1.0, "anticorrelated example: TV " + fmt(anti.tv) + " instead of 1");
  const int spanN = a.Nmax - a.Nmin + 1;
  const int per_state = static_cast<int>(a.n.size());
  double worst_ratio = 0.0;
  for (int i = 0; i < a.count; ++i) {
    const int m = a.m[static_cast<std::size_t>(i) % a.m.size()];
    const int N = a.Nmin + (i / static_cast<int>(a.m.size())) % spanN;
    const auto mu = random_symmetric_state(m, N, c.seed, static_cast<std::uint64_t>(i));
    for (int k = 0; k < per_state; ++k) {
      const int n = a.n[static_cast<std::size_t>(k)];
      if (n > N) continue;
      worst_ratio = std::max(worst_ratio, row(i, "random", mu, n).finite_ratio);
    }
  }
  o.summary["anticorrelated_tv"] = anti.tv;
  o.summary["largest_finite_ratio"] = worst_ratio;
  o.line = std::string("df-classical: ") + (o.violations.empty() ? "pass" : "FAIL") + ", anticorrelated TV = " + fmt(anti.tv);
  return o;
}

// ---------------------------------------------------------------- classical-gibbs

struct CGibbsArgs {
  std::string model;
  double T = 1.0;
  std::vector<int> N{25, 50, 100, 200};
};

Outcome cmd_classical_gibbs(const CGibbsArgs& a, const Common& c) {
  const ClassicalModel model = load_classical_model(a.model);
  require(a.T > 0.0, "--T must be > 0");
  require_ascending(a.N, 2, "--N");
  const MeanField mf = mf_free_energy(model, a.T, c.seed);
  const auto rho1 = product_marginal(mf.rho, 1);
  const auto rho2 = product_marginal(mf.rho, 2);

  Outcome o;
  o.table.columns = {"N", "F_N", "F_N_over_N", "F_MF", "tv1", "tv2"};
  std::vector<double> gaps;
  for (int N : a.N) {
    const ClassicalGibbs g = classical_gibbs(model, N, a.T);
    g.state.validate(1e-10);
    const double tv1 = tv_distance(marginal(g.state, 1), rho1);
    const double tv2 = tv_distance(marginal(g.state, 2), rho2);
    o.table.add({std::int64_t{N}, g.free_energy, g.free_energy / N, mf.free_energy, tv1, tv2});
    gaps.push_back(std::abs(g.free_energy / N - mf.free_energy));
  }
  if (gaps.size() >= 2)
    o.check(gaps.back() < gaps.front(), "|F_N/N - F_MF| did not decrease over the sweep");
  o.summary["F_MF"] = mf.free_energy;
  o.summary["rho_MF"] = std::vector<double>(mf.rho.data(), mf.rho.data() + mf.rho.size());
  o.summary["entropy"] = "counting measure on a finite state space";
  o.line = "classical-gibbs: F_MF = " + fmt(mf.free_energy) + ", |F_N/N - F_MF| at N=" + std::to_string(a.N.back()) + " = " + fmt(gaps.back());
  return o;
}

// ---------------------------------------------------------------- localize

struct LocalizeArgs {
  int d = 3;
  int N = 3;
  int rank = 0;
  int count = 50;
};

Outcome cmd_localize(const LocalizeArgs& a, const Common& c) {
  require(a.d >= 2 && a.N >= 1 && a.count >= 0, "localize: need d >= 2, N >= 1");
  require(a.rank >= 0 && a.rank <= a.d, "--rank must lie in [0, d]");
  Outcome o;
  o.table.columns = {"index", "kind", "d", "N", "rank", "total_trace", "min_eigenvalue", "duality_dev", "reduced_dev", "binomial_dev", "pass"};
  json traces = json::array();

  auto examine = [&](std::int64_t idx, const std::string& kind, const SectorOperator& gamma, const CMatrix& p, int rank,
                     double binomial_dev) {
    const DiagonalFockState g = localize(gamma, p);
    double min_eig = INFINITY;
    for (const auto& s : g.sectors) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(s.matrix, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    const DualityReport dual = verify_duality(gamma, p);
    double red = 0.0;
    for (int n = 1; n <= gamma.N; ++n) {
      const SectorOperator lhs = fock_reduced_matrix(g, n);
      const CMatrix pn = sector_representation(p, n);
      const CMatrix rhs = pn * partial_trace(gamma, n).matrix * pn.adjoint();
      red = std::max(red, (lhs.matrix - rhs).cwiseAbs().maxCoeff());
    }
    const double total = g.total_trace();
    const bool pass = std::abs(total - 1.0) <= kChainedTol && min_eig >= -kChainedTol && dual.pass && red <= kChainedTol &&
                      binomial_dev <= kChainedTol;
    o.table.add({idx, kind, std::int64_t{gamma.d}, std::int64_t{gamma.N}, std::int64_t{rank}, total, min_eig, dual.max_deviation,
                 red, binomial_dev, pass});
    o.check(pass, kind + " pair " + std::to_string(idx) + ": localization identities violated");
    json t = json::object();
    const auto tr = g.traces();
    for (std::size_t k = 0; k < tr.size(); ++k) t[std::to_string(k)] = tr[k];
    traces.push_back({{"index", idx}, {"kind", kind}, {"traces", t}});
  };

  {
    // product state u = α e_1 + β e_2 against P = |e_1><e_1|
    OneBodyVector u = OneBodyVector::Zero(a.d);
    u[0] = cplx(0.6, 0.0);
    u[1] = cplx(0.0, 0.8);
    CMatrix p = CMatrix::Zero(a.d, a.d);
    p(0, 0) = 1.0;
    const SectorOperator gamma = pure_state(product_state(u, a.N), a.d, a.N);
    const auto tr = localize(gamma, p).traces();
    double dev = 0.0;
    for (int k = 0; k <= a.N; ++k)
      dev = std::max(dev, std::abs(tr[static_cast<std::size_t>(k)] -
                                   static_cast<double>(binomial(a.N, k)) * std::pow(0.36, k) * std::pow(0.64, a.N - k)));
    examine(-1, "product", gamma, p, 1, dev);
  }
  const int dim = static_cast<int>(sym_dimension(a.d, a.N));
  const CounterRng pick(c.seed, stream::kRandomStates);
  for (int i = 0; i < a.count; ++i) {
    const int rank = a.rank > 0 ? a.rank : 1 + static_cast<int>(pick.bits(1u << 31, i) % static_cast<std::uint64_t>(a.d - 1));
    const SectorOperator gamma = random_density(a.d, a.N, dim, c.seed, static_cast<std::uint64_t>(i));
    const CMatrix p = random_projector(a.d, rank, c.seed, static_cast<std::uint64_t>(100000 + i));
    examine(i, "random", gamma, p, rank, 0.0);
  }
  o.summary["sector_traces"] = traces;
  o.line = std::string("localize: ") + (o.violations.empty() ? "pass" : "FAIL") + ", " + std::to_string(o.table.rows.size()) + " pairs";
  return o;
}

// ---------------------------------------------------------------- gibbs-appendixB

struct AppendixArgs {
  std::string model;
  double t = 0.5;
  int nmin = 25;
  int nmax = 200;
  std::int64_t samples = 1000000;
  std::string method;
  int n = 1;
};

Outcome cmd_appendix(const AppendixArgs& a, const Common& c) {
  const ModelSpec model = load_model(a.model);
  require(a.t > 0.0, "--t must be > 0");
  require(a.nmin >= 2 && a.nmax >= a.nmin, "need 2 <= nmin <= nmax");
  require(a.n == 1 || a.n == 2, "--n must be 1 or 2");
  require(a.samples >= 1000, "--samples must be >= 1000");
  std::vector<int> Ns;
  for (int N = a.nmin; N <= a.nmax; N *= 2) Ns.push_back(N);

  FreeEnergyMethod method = model.d == 2 ? FreeEnergyMethod::quadrature2d : FreeEnergyMethod::mc;
  if (a.method == "mc") method = FreeEnergyMethod::mc;
  else if (a.method == "quadrature2d") method = FreeEnergyMethod::quadrature2d;
  else require(a.method.empty(), "--method must be mc or quadrature2d");
  require(method == FreeEnergyMethod::mc || model.d == 2, "quadrature2d needs d = 2");

  SphereSampler fe_sampler(model.d, c.seed, stream::kClassicalFreeEnergy);
  const ClassicalFreeEnergy fcl = classical_free_energy(model, a.t, method, a.samples, fe_sampler);
  const auto rows = appendixB_experiment(model, a.t, Ns, fcl.F_cl);
  SphereSampler is_sampler(model.d, c.seed, stream::kGibbsMarginal);
  const ImportanceEstimate limit = classical_gibbs_marginal_is(model, a.t, a.n, a.samples, is_sampler);
  const auto conv = gibbs_marginal_convergence(model, a.t, Ns, a.n, limit);

  Outcome o;
  o.table.columns = {"N", "T", "F_N", "log_dim", "F_cl", "delta", "delta_over_N", "gamma_distance", "mc_error"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    o.table.add({std::int64_t{r.N}, r.T, r.F_N, r.log_dim, r.F_cl, r.delta, r.delta_over_N, conv[i].distance, conv[i].mc_error});
  }
  if (rows.size() >= 2) {
    o.check(std::abs(rows.back().delta_over_N) < std::abs(rows.front().delta_over_N), "|delta_N/N| did not decrease over the sweep");
    for (std::size_t i = 1; i < conv.size(); ++i)
      o.check(conv[i].distance <= conv[i - 1].distance + kSigmaFactor * conv[i].mc_error,
              "reduced-matrix distance increased beyond 3 sigma at N=" + std::to_string(conv[i].N));
  }
  if (method == FreeEnergyMethod::quadrature2d)
    o.check(fcl.stability <= 1e-8, "quadrature not stable to 1e-8 (relative change " + fmt(fcl.stability) + ")");
  double max_delta = 0.0;
  for (const auto& r : rows) max_delta = std::max(max_delta, std::abs(r.delta));
  o.summary["F_cl"] = fcl.F_cl;
  o.summary["method"] = to_string(method);
  o.summary["quadrature_level"] = fcl.grid_level;
  o.summary["quadrature_stability"] = fcl.stability;
  o.summary["mc_stderr"] = fcl.stderr;
  o.summary["samples"] = a.samples;
  o.summary["max_abs_delta"] = max_delta;
  o.summary["effective_samples"] = limit.effective_samples;
  o.line = "gibbs-appendixB: F_cl = " + fmt(fcl.F_cl) + ", delta/N at N=" + std::to_string(rows.back().N) + " = " +
           fmt(rows.back().delta_over_N);
  return o;
}

// ---------------------------------------------------------------- bl-check

struct BlArgs {
  int d = 2;
  int N = 10;
  int count = 50;
  int upper_count = 10;
  std::int64_t samples = 100000;
  int max_power = 6;
};

Outcome cmd_bl(const BlArgs& a, const Common& c) {
  require(a.d >= 1 && a.N >= 1 && a.count >= 0 && a.upper_count >= 0, "bl-check: invalid sizes");
  require(a.samples >= 1000, "--samples must be >= 1000");
  Outcome o;
  o.table.columns = {"index", "kind", "s_exact", "lower_side", "lower_stderr", "first_ok", "upper_side", "upper_stderr", "second_ok", "clamp_max"};
  SphereSampler sampler(a.d, c.seed, stream::kBerezinLieb);
  const int dim = static_cast<int>(sym_dimension(a.d, a.N));
  const CounterRng pick(c.seed, stream::kRandomStates);
  for (int i = 0; i < a.count; ++i) {
    const int rank = 1 + static_cast<int>(pick.bits(1u << 29, i) % static_cast<std::uint64_t>(dim));
    const SectorOperator gamma = random_density(a.d, a.N, rank, c.seed, static_cast<std::uint64_t>(200000 + i));
    const BerezinLiebReport r = berezin_lieb_check(gamma, a.samples, sampler);
    o.table.add({std::int64_t{i}, std::string("random"), r.s_exact, r.lower_side, r.lower_stderr, r.first_ok, 0.0, 0.0, true, r.clamp_max});
    o.check(r.first_ok, "first Berezin-Lieb inequality fails for random state " + std::to_string(i));
  }
  for (int i = 0; i < a.upper_count; ++i) {
    const UpperSymbol mu = random_upper_symbol(a.d, 1 + i % 3, a.max_power, c.seed, static_cast<std::uint64_t>(i));
    const SectorOperator gamma = upper_symbol_state(mu, a.d, a.N);
    const BerezinLiebReport r = berezin_lieb_check(gamma, mu, a.samples, sampler);
    o.table.add({std::int64_t{i}, std::string("upper_symbol"), r.s_exact, r.lower_side, r.lower_stderr, r.first_ok, r.upper_side,
                 r.upper_stderr, r.second_ok, r.clamp_max});
    o.check(r.first_ok, "first Berezin-Lieb inequality fails for upper-symbol state " + std::to_string(i));
    o.check(r.second_ok, "second Berezin-Lieb inequality fails for upper-symbol state " + std::to_string(i));
  }
  o.line = std::string("bl-check: ") + (o.violations.empty() ? "pass" : "FAIL") + ", " + std::to_string(o.table.rows.size()) + " states";
  return o;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "run seed (drives every random stream)")->capture_default_str();
  sub->add_option("--out", c.out, "CSV output path");
  sub->add_option("--manifest", c.manifest, "JSON manifest path (default: <out>.manifest.json)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  apply_thread_cap_from_env();
  CLI::App app{"bdfl: de Finetti, mean-field and Gibbs-state numerics on bosonic sectors", "bdfl"};
  app.require_subcommand(1);
  Common common;
  std::function<Outcome()> job;

  DimsArgs dims;
  auto* s_dims = app.add_subcommand("dims", "dimension of the bosonic N-particle sector");
  s_dims->add_option("--d", dims.d, "one-body dimension")->required();
  s_dims->add_option("--n,--N", dims.N, "particle number")->required();
  add_common(s_dims, common);
  s_dims->callback([&] { job = [&] { return cmd_dims(dims, common); }; });

  GroundArgs ground;
  auto* s_ground = app.add_subcommand("groundstate", "ground-state energies E(N)");
  s_ground->add_option("--model", ground.model, "model JSON")->required();
  s_ground->add_option("--N", ground.N, "particle numbers (ascending)")->required()->delimiter(',');
  add_common(s_ground, common);
  s_ground->callback([&] { job = [&] { return cmd_groundstate(ground, common); }; });

  HartreeArgs hartree;
  auto* s_hartree = app.add_subcommand("hartree", "Hartree minimization and E(N)/N convergence");
  s_hartree->add_option("--model", hartree.model, "model JSON")->required();
  s_hartree->add_option("--N", hartree.N, "particle numbers (ascending)")->delimiter(',')->capture_default_str();
  s_hartree->add_option("--restarts", hartree.restarts)->capture_default_str();
  add_common(s_hartree, common);
  s_hartree->callback([&] { job = [&] { return cmd_hartree(hartree, common); }; });

  DeFinettiArgs df;
  auto* s_df = app.add_subcommand("definetti-check", "quantitative quantum de Finetti bound");
  s_df->add_option("--model", df.model, "model JSON (uses the N-particle ground state)");
  s_df->add_option("--state", df.state, "sector operator JSON {d, N, D, data}");
  s_df->add_option("--random", df.random, "number of random mixed states");
  s_df->add_option("--d", df.d)->capture_default_str();
  s_df->add_option("--N", df.N)->capture_default_str();
  s_df->add_option("--rank", df.rank, "rank of random states (0: random)")->capture_default_str();
  s_df->add_option("--n", df.n, "marginal orders")->delimiter(',')->capture_default_str();
  s_df->add_option("--samples", df.samples, "Monte-Carlo cross-check samples (0: off)")->capture_default_str();
  add_common(s_df, common);
  s_df->callback([&] { job = [&] { return cmd_definetti(df, common); }; });

  WickArgs wick;
  auto* s_wick = app.add_subcommand("wick-check", "normal/anti-normal order identity and anti-Wick elements");
  s_wick->add_option("--d", wick.d)->capture_default_str();
  s_wick->add_option("--Nmax", wick.Nmax)->capture_default_str();
  s_wick->add_option("--nmax", wick.nmax)->capture_default_str();
  s_wick->add_option("--trials", wick.trials)->capture_default_str();
  add_common(s_wick, common);
  s_wick->callback([&] { job = [&] { return cmd_wick(wick, common); }; });

  DfArgs dfc;
  auto* s_dfc = app.add_subcommand("df-classical", "Diaconis-Freedman bound on finite state spaces");
  s_dfc->add_option("--m", dfc.m, "state-space sizes")->delimiter(',')->capture_default_str();
  s_dfc->add_option("--Nmin", dfc.Nmin)->capture_default_str();
  s_dfc->add_option("--Nmax", dfc.Nmax)->capture_default_str();
  s_dfc->add_option("--count", dfc.count)->capture_default_str();
  s_dfc->add_option("--n", dfc.n)->delimiter(',')->capture_default_str();
  add_common(s_dfc, common);
  s_dfc->callback([&] { job = [&] { return cmd_df(dfc, common); }; });

  CGibbsArgs cg;
  auto* s_cg = app.add_subcommand("classical-gibbs", "finite-state Gibbs measures against mean field");
  s_cg->add_option("--model", cg.model, "classical model JSON {m, V, w}")->required();
  s_cg->add_option("--T", cg.T)->capture_default_str();
  s_cg->add_option("--N", cg.N)->delimiter(',')->capture_default_str();
  add_common(s_cg, common);
  s_cg->callback([&] { job = [&] { return cmd_classical_gibbs(cg, common); }; });

  LocalizeArgs loc;
  auto* s_loc = app.add_subcommand("localize", "Fock-space localization by orthogonal projectors");
  s_loc->add_option("--d", loc.d)->capture_default_str();
  s_loc->add_option("--N", loc.N)->capture_default_str();
  s_loc->add_option("--rank", loc.rank, "projector rank (0: random)")->capture_default_str();
  s_loc->add_option("--count", loc.count)->capture_default_str();
  add_common(s_loc, common);
  s_loc->callback([&] { job = [&] { return cmd_localize(loc, common); }; });

  AppendixArgs ab;
  auto* s_ab = app.add_subcommand("gibbs-appendixB", "mean-field/large-temperature limit of quantum Gibbs states");
  s_ab->add_option("--model", ab.model, "model JSON")->required();
  s_ab->add_option("--t", ab.t)->capture_default_str();
  s_ab->add_option("--nmin", ab.nmin)->capture_default_str();
  s_ab->add_option("--nmax", ab.nmax)->capture_default_str();
  s_ab->add_option("--samples", ab.samples)->capture_default_str();
  s_ab->add_option("--method", ab.method, "mc or quadrature2d (default: quadrature2d when d = 2)");
  s_ab->add_option("--n", ab.n)->capture_default_str();
  add_common(s_ab, common);
  s_ab->callback([&] { job = [&] { return cmd_appendix(ab, common); }; });

  BlArgs bl;
  auto* s_bl = app.add_subcommand("bl-check", "Berezin-Lieb inequalities with f(x) = x log x");
  s_bl->add_option("--d", bl.d)->capture_default_str();
  s_bl->add_option("--N", bl.N)->capture_default_str();
  s_bl->add_option("--count", bl.count)->capture_default_str();
  s_bl->add_option("--upper-count", bl.upper_count)->capture_default_str();
  s_bl->add_option("--samples", bl.samples)->capture_default_str();
  s_bl->add_option("--max-power", bl.max_power)->capture_default_str();
  add_common(s_bl, common);
  s_bl->callback([&] { job = [&] { return cmd_bl(bl, common); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "bdfl: " << e.what() << "\n";
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Outcome o;
  try {
    o = job();
  } catch (const ConfigError& e) {
    err << "bdfl " << command << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "bdfl " << command << ": " << e.what() << "\n";
    return kExitVerification;
  }

  try {
    if (!common.out.empty()) {
      emit_csv(o.table, common.out);
      json manifest;
      manifest["command"] = command;
      manifest["args"] = args;
      manifest["seed"] = common.seed;
      manifest["timestamp"] = utc_timestamp();
      manifest["csv"] = common.out;
      manifest["summary"] = o.summary;
      manifest["violations"] = o.violations;
      manifest["pass"] = o.violations.empty();
      const std::string mpath = common.manifest.empty() ? common.out + ".manifest.json" : common.manifest;
      std::ofstream mf(mpath);
      if (!mf) throw Error("cannot open '" + mpath + "' for writing");
      mf << manifest.dump(2) << "\n";
    }
  } catch (const Error& e) {
    err << "bdfl " << command << ": " << e.what() << "\n";
    return kExitUsage;
  }

  for (const auto& v : o.violations) err << "violation: " << v << "\n";
  out << o.line << "\n";
  return o.violations.empty() ? kExitOk : kExitVerification;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace bdfl
