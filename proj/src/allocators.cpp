#include "dualscale/allocators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dualscale/error.hpp"
#include "dualscale/sched.hpp"

namespace dualscale {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Pattern pat(std::size_t bits) { return Pattern{static_cast<std::uint32_t>(bits)}; }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return kInf;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Fixed-association subproblem: queue i has rows A (containing i) weighted by
// p_A lambda^i / rho_i, and coefficient M[i][column][A] on each column.
SubproblemSpec fixed_spec(std::span<const double> rho, std::span<const double> lambda, const CollapsedEta& m) {
  SubproblemSpec spec;
  spec.polytope = Polytope::Simplex;
  spec.n = m.n;
  const std::size_t np = pattern_count(m.n);
  for (int i = 0; i < m.n; ++i) {
    const double li = lambda[static_cast<std::size_t>(i)];
    if (li <= 0.0) continue;
    const double ri = rho[static_cast<std::size_t>(i)];
    const auto cw = conditional_weights(rho, i);
    QueueBlock blk;
    blk.queue = i;
    blk.curvature = li / (1.0 - ri);
    blk.cap = ri;
    for (std::size_t a = 0; a < np; ++a) {
      if (cw[a] <= 0.0) continue;
      blk.states.push_back(static_cast<std::uint32_t>(a));
      blk.weight.push_back(cw[a] * li);
    }
    const std::size_t nr = blk.rows();
    blk.columns.resize(np);
    std::iota(blk.columns.begin(), blk.columns.end(), 0);
    blk.coeff.resize(np * nr);
    for (std::size_t c = 0; c < np; ++c)
      for (std::size_t r = 0; r < nr; ++r) blk.coeff[c * nr + r] = m.at(i, pat(c), pat(blk.states[r]));
    spec.blocks.push_back(std::move(blk));
  }
  return spec;
}

CollapsedEta slow_only_map(const ApTable& s) {
  CollapsedEta m;
  m.n = s.n;
  const std::size_t np = pattern_count(s.n);
  m.m.assign(static_cast<std::size_t>(s.n) * np * np, 0.0);
  for (int i = 0; i < s.n; ++i)
    for (std::size_t f = 0; f < np; ++f)
      if (pat(f).contains(i))
        for (std::size_t a = 0; a < np; ++a) m.m[(static_cast<std::size_t>(i) * np + f) * np + a] = s.at(i, pat(f & a));
  return m;
}

struct FlexContext {
  const Scenario& sc;
  const EffTable& eff;
  std::span<const Pattern> nb;
};

QueueBlock flex_block(int j, double lambda, double sigma, std::span<const double> p) {
  QueueBlock blk;
  blk.queue = j;
  blk.curvature = lambda / (1.0 - sigma);
  blk.cap = sigma;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] <= 0.0) continue;
    blk.states.push_back(static_cast<std::uint32_t>(a));
    blk.weight.push_back(p[a] * lambda);
  }
  return blk;
}

// (x, y) block: column (i, j, F) carries sum_T z_T eta^{i->j}(F, T, I) on row I of group j.
SubproblemSpec flex_xy_spec(const FlexContext& ctx, std::span<const double> sigma, std::span<const double> p,
                            std::span<const double> z) {
  const int n = ctx.sc.n();
  const int k = ctx.sc.k();
  const std::size_t np = pattern_count(n);
  SubproblemSpec spec;
  spec.polytope = Polytope::CoupledXY;
  spec.n = n;
  spec.k = k;
  for (int j = 0; j < k; ++j) {
    const double lj = ctx.sc.lambda[static_cast<std::size_t>(j)];
    if (lj <= 0.0) continue;
    QueueBlock blk = flex_block(j, lj, sigma[static_cast<std::size_t>(j)], p);
    const std::size_t nr = blk.rows();
    for (std::size_t f = 1; f < np; ++f) {
      for (int i = 0; i < n; ++i) {
        if (!pat(f).contains(i)) continue;
        blk.columns.push_back(static_cast<int>((static_cast<std::size_t>(i) * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)) * np + f));
        const std::size_t base = blk.coeff.size();
        blk.coeff.resize(base + nr, 0.0);
        for (std::size_t t = 0; t < np; ++t) {
          if (z[t] <= 0.0) continue;
          for (std::size_t r = 0; r < nr; ++r)
            blk.coeff[base + r] += z[t] * eta_flex(i, j, pat(f), pat(t), pat(blk.states[r]), ctx.eff, ctx.nb);
        }
      }
    }
    spec.blocks.push_back(std::move(blk));
  }
  return spec;
}

// Time block: column T carries sum_F sum_i eta^{i->j}(F, T, I) x^{i->j}_F on row I of group j.
SubproblemSpec flex_z_spec(const FlexContext& ctx, std::span<const double> sigma, std::span<const double> p,
                           const Allocation& alloc) {
  const int n = ctx.sc.n();
  const int k = ctx.sc.k();
  const std::size_t np = pattern_count(n);
  SubproblemSpec spec;
  spec.polytope = Polytope::Simplex;
  spec.n = n;
  for (int j = 0; j < k; ++j) {
    const double lj = ctx.sc.lambda[static_cast<std::size_t>(j)];
    if (lj <= 0.0) continue;
    QueueBlock blk = flex_block(j, lj, sigma[static_cast<std::size_t>(j)], p);
    const std::size_t nr = blk.rows();
    blk.columns.resize(np);
    std::iota(blk.columns.begin(), blk.columns.end(), 0);
    blk.coeff.assign(np * nr, 0.0);
    for (std::size_t f = 1; f < np; ++f) {
      for (int i = 0; i < n; ++i) {
        if (!pat(f).contains(i)) continue;
        const double xv = alloc.xv(i, j, pat(f));
        if (xv <= 0.0) continue;
        for (std::size_t t = 0; t < np; ++t)
          for (std::size_t r = 0; r < nr; ++r)
            blk.coeff[t * nr + r] += xv * eta_flex(i, j, pat(f), pat(t), pat(blk.states[r]), ctx.eff, ctx.nb);
      }
    }
    spec.blocks.push_back(std::move(blk));
  }
  return spec;
}

void require_feasible(const SolveResult& res, int iteration) {
  if (res.status != SolveStatus::Infeasible) return;
  if (iteration == 0) throw Error(ErrorKind::Infeasible, "infeasible: offered load cannot be carried even from the all-busy start");
  throw Error(ErrorKind::Infeasible, "subproblem infeasible after a feasible iterate (feasibility chain broken)");
}

// Componentwise max(u, map(u)); absorbs solver tolerance so the downward iteration may start.
template <typename Map>
// Smallest point above u (along u <- max(u, map(u))) from which the downward iteration
// may start. In fixed modes the block solves already guarantee map(u) <= u. Under
// flexible association they do not: the (x, y) block holds rho fixed while rho(sigma)
// itself depends on x, so sigma can need raising. `climb` receives the largest raise.
std::vector<double> contractive_start(std::vector<double> u, Map map, double* climb = nullptr) {
  const auto u0 = u;
  for (int it = 0; it < 10000; ++it) {
    const auto mu = map(u);
    bool done = true;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (mu[i] > u[i] + 1e-13) done = false;
      u[i] = std::max(u[i], mu[i]);
    }
    if (done) break;
  }
  if (climb) {
    *climb = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) *climb = std::max(*climb, u[i] - u0[i]);
  }
  return u;
}

double objective_or_inf(const Scenario& sc, const UtilState& util, const RateTable& rates) {
  try {
    return analytic_delays(sc, util, rates).objective;
  } catch (const Error&) {
    return kInf;
  }
}

// Outer-loop state carried from one run into another (slow-timescale solution into the
// dual-timescale run) and the lowest-objective iterate seen so far.
struct Snapshot {
  double objective = kInf;
  Allocation alloc;
  UtilState util;
  RateTable rates;
  std::vector<WeightedAtom> atoms;  // spectrum block (y or x)
  bool set = false;
};

void keep_best(Snapshot& best, double obj, const Allocation& a, const UtilState& u, const RateTable& r,
               const std::vector<WeightedAtom>& atoms) {
  if (best.set && !(obj < best.objective)) return;
  best = Snapshot{obj, a, u, r, atoms, true};
}

struct Run {
  AllocResult result;
  Snapshot best;
};

Run solve_fixed(const Scenario& sc, const AllocatorOptions& opt, bool dual, const Snapshot* warm) {
  if (!sc.fixed()) throw Error(ErrorKind::InvalidInput, "this method needs fixed association");
  if (sc.n() > kMaxApsFixed) throw Error(ErrorKind::InvalidInput, "pattern space too large for fixed-association solvers");
  const int n = sc.n();
  const EffTable eff(sc);
  const ApTable s = fixed_view(eff, sc);
  const auto lambda = sc.ap_lambdas();
  const std::span<const Pattern> nb = sc.neighbors;
  const std::size_t np = pattern_count(n);
  const bool time_block = dual && opt.optimize_time;

  Run run;
  AllocResult& out = run.result;
  Snapshot& best = run.best;
  out.alloc = Allocation::full_reuse(n, n);
  std::vector<double> rho(static_cast<std::size_t>(n), 1.0 - opt.init_delta);
  std::vector<WeightedAtom> y_atoms;
  std::vector<WeightedAtom> z_atoms{{Atom{static_cast<std::uint32_t>(np - 1), {}}, 1.0}};
  std::vector<double> prev_y;
  RateTable rates;
  if (warm && warm->set) {
    best = *warm;
    out.alloc = warm->alloc;
    out.util = warm->util;
    rho = warm->util.rho;
    y_atoms = warm->atoms;
    rates = warm->rates;
  }
  const CollapsedEta slow = slow_only_map(s);

  for (int it = 0; it < opt.outer_cap; ++it) {
    if (opt.max_outer_iterations >= 0 && it >= opt.max_outer_iterations) break;
    const int attempt = warm && warm->set ? it + 1 : it;
    TraceEntry e;
    const CollapsedEta ymap = time_block ? collapse_over_time(s, nb, out.alloc.z) : slow;
    const auto yres = solve(fixed_spec(rho, lambda, ymap), opt.solver, y_atoms);
    e.statuses.push_back(yres.status);
    require_feasible(yres, attempt);
    out.alloc.y = yres.y;
    y_atoms = yres.atoms;

    if (time_block) {
      const auto zres = solve(fixed_spec(rho, lambda, collapse_over_freq(s, nb, out.alloc.y)), opt.solver, z_atoms);
      e.statuses.push_back(zres.status);
      require_feasible(zres, attempt);
      out.alloc.z = zres.y;
      z_atoms = zres.atoms;
    }

    rates = rates_dual(out.alloc.y, out.alloc.z, s, nb);
    auto f = [&](std::span<const double> r) { return f_map(r, rates, lambda); };
    const auto fp = fixed_point_rho(contractive_start(rho, f), rates, lambda, opt.fixed_point);
    rho = fp.rho;
    out.util = UtilState{rho, {}, fp.p};

    e.rho = rho;
    e.objective = objective_or_inf(sc, out.util, rates);
    e.change = max_abs_diff(out.alloc.y, prev_y);
    out.trace.entries.push_back(e);
    prev_y = out.alloc.y;
    keep_best(best, e.objective, out.alloc, out.util, rates, y_atoms);
    if (e.change < opt.outer_tol) {
      out.trace.converged = true;
      break;
    }
  }
  if (best.set) {
    out.alloc = best.alloc;
    out.util = best.util;
    rates = best.rates;
  }
  out.delay = analytic_delays(sc, out.util, rates);
  return run;
}

Run solve_flex(const Scenario& sc, const AllocatorOptions& opt, bool dual, const Snapshot* warm) {
  if (sc.n() > kMaxApsFlexible || sc.k() > kMaxGroupsFlexible)
    throw Error(ErrorKind::InvalidInput, "pattern space too large for the flexible-association solver");
  const int n = sc.n();
  const int k = sc.k();
  const EffTable eff(sc);
  const FlexContext ctx{sc, eff, sc.neighbors};
  const std::size_t np = pattern_count(n);
  const bool time_block = dual && opt.optimize_time;

  Run run;
  AllocResult& out = run.result;
  Snapshot& best = run.best;
  out.alloc = Allocation::full_reuse(n, k);
  out.alloc.x.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(k) * np, 0.0);
  std::vector<double> sigma(static_cast<std::size_t>(k), 1.0 - opt.init_delta);
  std::vector<double> rho(static_cast<std::size_t>(n), 1.0 - opt.init_delta);
  std::vector<double> p = busy_probs(rho);
  std::vector<WeightedAtom> x_atoms;
  std::vector<WeightedAtom> z_atoms{{Atom{static_cast<std::uint32_t>(np - 1), {}}, 1.0}};
  std::vector<double> prev_x;
  RateTable rates;
  if (warm && warm->set) {
    best = *warm;
    out.alloc = warm->alloc;
    out.util = warm->util;
    sigma = warm->util.sigma;
    rho = warm->util.rho;
    p = warm->util.p;
    x_atoms = warm->atoms;
    rates = warm->rates;
  }

  for (int it = 0; it < opt.outer_cap; ++it) {
    if (opt.max_outer_iterations >= 0 && it >= opt.max_outer_iterations) break;
    const int attempt = warm && warm->set ? it + 1 : it;
    TraceEntry e;
    const auto xres = solve(flex_xy_spec(ctx, sigma, p, out.alloc.z), opt.solver, x_atoms);
    e.statuses.push_back(xres.status);
    require_feasible(xres, attempt);
    out.alloc.x = xres.x;
    out.alloc.y = xres.y;
    x_atoms = xres.atoms;

    if (time_block) {
      const auto zres = solve(flex_z_spec(ctx, sigma, p, out.alloc), opt.solver, z_atoms);
      e.statuses.push_back(zres.status);
      require_feasible(zres, attempt);
      out.alloc.z = zres.y;
      z_atoms = zres.atoms;
    }

    rates = rates_flex(out.alloc, eff, sc.neighbors);
    auto g = [&](std::span<const double> s) { return g_map(s, out.alloc, rates, sc.lambda); };
    const auto fp = fixed_point_sigma(contractive_start(sigma, g, &e.climb), out.alloc, rates, sc.lambda, opt.fixed_point);
    sigma = fp.util;
    rho = fp.rho;
    p = fp.p;
    out.util = UtilState{rho, sigma, p};

    e.rho = rho;
    e.sigma = sigma;
    e.objective = objective_or_inf(sc, out.util, rates);
    e.change = max_abs_diff(out.alloc.x, prev_x);
    out.trace.entries.push_back(e);
    prev_x = out.alloc.x;
    keep_best(best, e.objective, out.alloc, out.util, rates, x_atoms);
    if (e.change < opt.outer_tol) {
      out.trace.converged = true;
      break;
    }
  }
  if (best.set) {
    out.alloc = best.alloc;
    out.util = best.util;
    rates = best.rates;
  }
  out.delay = analytic_delays(sc, out.util, rates);
  return run;
}

// Dual-timescale run seeded with the slow-timescale solution, which is feasible for it.
template <typename Solver>
AllocResult seeded(const Scenario& sc, const AllocatorOptions& opt, Solver solver) {
  Run slow = solver(sc, opt, false, nullptr);
  if (!opt.optimize_time) return slow.result;
  Run dual = solver(sc, opt, true, &slow.best);
  auto& entries = slow.result.trace.entries;
  entries.insert(entries.end(), dual.result.trace.entries.begin(), dual.result.trace.entries.end());
  dual.result.trace.entries = std::move(entries);
  return dual.result;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "p1") return Method::P1;
  if (name == "p2") return Method::P2;
  if (name == "p3") return Method::P3;
  if (name == "full-reuse") return Method::FullReuse;
  if (name == "conservative") return Method::Conservative;
  throw Error(ErrorKind::InvalidInput, "unknown method '" + name + "' (expected p1, p2, p3, full-reuse, conservative)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::P1: return "p1";
    case Method::P2: return "p2";
    case Method::P3: return "p3";
    case Method::FullReuse: return "full-reuse";
    case Method::Conservative: return "conservative";
  }
  return "?";
}

AllocResult solve_p1(const Scenario& sc, const AllocatorOptions& opt) {
  return solve_fixed(sc, opt, false, nullptr).result;
}

AllocResult solve_p2(const Scenario& sc, const AllocatorOptions& opt) { return seeded(sc, opt, solve_fixed); }

AllocResult solve_p3(const Scenario& sc, const AllocatorOptions& opt) { return seeded(sc, opt, solve_flex); }

Allocation baseline_full_reuse(const Scenario& sc) {
  Allocation a = Allocation::full_reuse(sc.n(), sc.k());
  if (sc.fixed()) return a;
  const int n = sc.n();
  const int k = sc.k();
  const std::size_t np = pattern_count(n);
  const EffTable eff(sc);
  const Pattern full = Pattern::full(n);
  std::vector<std::vector<int>> served(static_cast<std::size_t>(n));
  for (int j = 0; j < k; ++j) {
    if (sc.lambda[static_cast<std::size_t>(j)] <= 0.0) continue;
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (eff.at(i, j, Pattern::single(i)) > eff.at(best, j, Pattern::single(best))) best = i;
    served[static_cast<std::size_t>(best)].push_back(j);
  }
  a.x.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(k) * np, 0.0);
  for (int i = 0; i < n; ++i) {
    auto& groups = served[static_cast<std::size_t>(i)];
    if (groups.empty()) {
      int best = 0;
      for (int j = 1; j < k; ++j)
        if (eff.at(i, j, Pattern::single(i)) > eff.at(i, best, Pattern::single(i))) best = j;
      groups.push_back(best);
    }
    for (int j : groups) a.xv(i, j, full) = 1.0 / static_cast<double>(groups.size());
  }
  return a;
}

Allocation baseline_conservative(const Scenario& sc, const AllocatorOptions& opt) {
  AllocatorOptions first = opt;
  first.max_outer_iterations = 1;
  first.optimize_time = false;
  return sc.fixed() ? solve_fixed(sc, first, false, nullptr).result.alloc : solve_flex(sc, first, false, nullptr).result.alloc;
}

RateTable allocation_rates(const Scenario& sc, const EffTable& eff, const Allocation& alloc) {
  if (sc.fixed()) return rates_dual(alloc.y, alloc.z, fixed_view(eff, sc), sc.neighbors);
  return rates_flex(alloc, eff, sc.neighbors);
}

AllocResult evaluate_allocation(const Scenario& sc, const Allocation& alloc, const AllocatorOptions& opt) {
  alloc.validate(1e-6);
  if (alloc.n != sc.n() || alloc.k != sc.k()) throw Error(ErrorKind::InvalidInput, "allocation does not match the scenario size");
  if (sc.fixed() == alloc.flexible())
    throw Error(ErrorKind::InvalidInput, "allocation association mode does not match the scenario");
  const EffTable eff(sc);
  const RateTable rates = allocation_rates(sc, eff, alloc);
  AllocResult out;
  out.alloc = alloc;
  if (sc.fixed()) {
    const auto fp = least_fixed_point_rho(rates, sc.ap_lambdas(), opt.fixed_point);
    out.util = UtilState{fp.rho, {}, fp.p};
  } else {
    const auto fp = least_fixed_point_sigma(alloc, rates, sc.lambda, opt.fixed_point);
    out.util = UtilState{fp.rho, fp.util, fp.p};
  }
  out.trace.converged = true;
  out.delay = analytic_delays(sc, out.util, rates);
  return out;
}

AllocResult run_method(const Scenario& sc, Method m, const AllocatorOptions& opt) {
  switch (m) {
    case Method::P1: return solve_p1(sc, opt);
    case Method::P2: return solve_p2(sc, opt);
    case Method::P3: return solve_p3(sc, opt);
    case Method::FullReuse: return evaluate_allocation(sc, baseline_full_reuse(sc), opt);
    case Method::Conservative: return evaluate_allocation(sc, baseline_conservative(sc, opt), opt);
  }
  throw Error(ErrorKind::InvalidInput, "unknown method");
}

DelayReport analytic_delays(const Scenario& sc, const UtilState& util, const RateTable& rates) {
  DelayReport rep;
  const int k = sc.k();
  rep.queue_delay.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::quiet_NaN());
  double total = 0.0;
  for (int q = 0; q < rates.queues; ++q) {
    const int group = sc.fixed() ? sc.group(q) : q;
    const double lambda = sc.lambda[static_cast<std::size_t>(group)];
    double d = std::numeric_limits<double>::quiet_NaN();
    try {
      d = sc.fixed() ? delay_fixed(q, lambda, util.rho, rates.row(q))
                     : delay_flex(lambda, util.sigma[static_cast<std::size_t>(q)], util.p, rates.row(q));
    } catch (const Error&) {
      if (lambda > 0.0) throw;
    }
    rep.queue_delay[static_cast<std::size_t>(group)] = d;
    if (lambda > 0.0) rep.objective += lambda * d;
    total += lambda;
  }
  rep.network_delay = total > 0.0 ? rep.objective / total : 0.0;
  return rep;
}

}  // namespace dualscale
