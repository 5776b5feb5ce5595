#include "dualscale/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "dualscale/io.hpp"
#include "dualscale/simulator.hpp"

namespace dualscale::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

std::string status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Unstable: return "unstable";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::InvalidInput: return "invalid";
  }
  return "error";
}

void print_allocation(const Allocation& a, const Scenario& sc, std::ostream& out) {
  out << "allocation:\n";
  for (std::size_t m = 0; m < a.patterns(); ++m)
    if (a.y[m] > 0.0) out << "  y" << Pattern{static_cast<std::uint32_t>(m)}.to_string() << " = " << format_number(a.y[m]) << "\n";
  for (std::size_t m = 0; m < a.patterns(); ++m)
    if (a.z[m] > 0.0) out << "  z" << Pattern{static_cast<std::uint32_t>(m)}.to_string() << " = " << format_number(a.z[m]) << "\n";
  if (!a.flexible()) return;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.k; ++j)
      for (std::size_t m = 0; m < a.patterns(); ++m) {
        const Pattern f{static_cast<std::uint32_t>(m)};
        if (a.xv(i, j, f) > 0.0)
          out << "  x[ap " << sc.ap_ids[static_cast<std::size_t>(i)] << " -> ue " << sc.ue_ids[static_cast<std::size_t>(j)]
              << "]" << f.to_string() << " = " << format_number(a.xv(i, j, f)) << "\n";
      }
}

void print_report(const DelayReport& r, const Scenario& sc, std::ostream& out) {
  out << (r.simulated ? "simulated delays:\n" : "analytic delays:\n");
  for (int j = 0; j < sc.k(); ++j) {
    const auto uj = static_cast<std::size_t>(j);
    out << "  ue " << sc.ue_ids[uj] << ": ";
    if (std::isnan(r.queue_delay[uj])) {
      out << "-";
    } else {
      out << format_number(r.queue_delay[uj]) << " s";
      if (r.simulated) out << " +- " << format_number(r.queue_ci[uj]);
    }
    out << "\n";
  }
  out << "network delay: " << format_number(r.network_delay) << " s";
  if (r.simulated) out << " +- " << format_number(r.network_ci) << " (" << r.served << " packets, " << r.warmup_discarded << " warm-up)";
  out << "\n";
}

AllocResult optimize(const Scenario& sc, const std::string& method, const CommonFlags& c) {
  return run_method(sc, parse_method(method), c.allocator());
}

void write_csv(const std::string& path, const std::vector<Row>& rows, std::ostream& out) {
  std::ostringstream ss;
  ss << kCsvHeader << "\n";
  for (const auto& r : rows) ss << r.to_csv() << "\n";
  if (path.empty())
    out << ss.str();
  else
    write_file(path, ss.str());
}

template <typename F>
int guarded(std::ostream& out, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return kExitUsage;
    case ErrorKind::Infeasible:
    case ErrorKind::Unstable: return kExitInfeasible;
    case ErrorKind::Numerical: return kExitNumerical;
  }
  return kExitNumerical;
}

AllocatorOptions CommonFlags::allocator() const {
  AllocatorOptions o;
  o.outer_tol = outer_tol;
  o.fixed_point.eps = eps_fixed_point;
  o.solver.barrier_scales = barrier_stages;
  return o;
}

std::string Row::to_csv() const {
  std::ostringstream ss;
  ss << method << ',' << format_number(load_mult) << ',' << format_number(analytic_delay) << ',' << format_number(sim_delay)
     << ',' << format_number(sim_ci) << ',' << format_number(max_rho) << ',' << outer_iters << ',' << status;
  return ss.str();
}

int cmd_optimize(const OptimizeArgs& a, std::ostream& out) {
  return guarded(out, [&] {
    const Scenario sc = load_scenario(a.common.scenario).scaled(a.common.load_mult);
    const AllocResult res = optimize(sc, a.method, a.common);
    out << "method: " << a.method << "\n";
    out << "outer iterations: " << res.outer_iterations() << (res.trace.converged ? " (converged)" : " (not converged)") << "\n";
    for (std::size_t t = 0; t < res.trace.entries.size(); ++t) {
      const auto& e = res.trace.entries[t];
      out << "  iter " << t + 1 << ": objective " << format_number(e.objective) << ", max rho " << format_number(max_of(e.rho))
          << ", change " << format_number(e.change) << "\n";
    }
    print_allocation(res.alloc, sc, out);
    out << "max rho: " << format_number(max_of(res.util.rho)) << "\n";
    print_report(res.delay, sc, out);
    if (!a.out.empty()) save_allocation(a.out, res.alloc, sc);
    return kExitOk;
  });
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  return guarded(out, [&] {
    if (a.allocation.empty() == a.method.empty())
      throw Error(ErrorKind::InvalidInput, "simulate needs exactly one of --allocation or --method");
    const Scenario sc = load_scenario(a.common.scenario).scaled(a.common.load_mult);
    Row row;
    row.load_mult = a.common.load_mult;
    AllocResult res;
    if (!a.method.empty()) {
      res = optimize(sc, a.method, a.common);
      row.method = a.method;
    } else {
      res = evaluate_allocation(sc, load_allocation(a.allocation, sc), a.common.allocator());
      row.method = "file";
    }
    row.analytic_delay = res.delay.network_delay;
    row.max_rho = max_of(res.util.rho);
    row.outer_iters = res.outer_iterations();
    const DelayReport rep = simulate(sc, res.alloc, SimOptions{a.packets, a.seed, 0.1});
    row.sim_delay = rep.network_delay;
    row.sim_ci = rep.network_ci;
    print_report(rep, sc, out);
    out << "analytic network delay: " << format_number(row.analytic_delay) << " s\n";
    write_csv(a.out, {row}, out);
    return kExitOk;
  });
}

Row sweep_point(const Scenario& base, const std::string& method, double mult, const SweepArgs& a) {
  Row row;
  row.method = method;
  row.load_mult = mult;
  row.analytic_delay = row.sim_delay = row.sim_ci = row.max_rho = kNaN;
  const Scenario sc = base.scaled(mult);
  AllocResult res;
  try {
    res = optimize(sc, method, a.common);
  } catch (const Error& e) {
    row.status = status_of(e.kind());
    return row;
  }
  row.analytic_delay = res.delay.network_delay;
  row.max_rho = max_of(res.util.rho);
  row.outer_iters = res.outer_iterations();
  if (a.packets > 0) {
    try {
      const DelayReport rep = simulate(sc, res.alloc, SimOptions{a.packets, a.seed, 0.1});
      row.sim_delay = rep.network_delay;
      row.sim_ci = rep.network_ci;
    } catch (const Error& e) {
      row.status = e.kind() == ErrorKind::Unstable ? "saturated" : status_of(e.kind());
    }
  }
  return row;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  return guarded(out, [&] {
    if (a.methods.empty()) throw Error(ErrorKind::InvalidInput, "sweep needs at least one method");
    if (a.load_mults.empty()) throw Error(ErrorKind::InvalidInput, "sweep needs at least one load multiplier");
    for (const auto& m : a.methods) parse_method(m);
    for (double m : a.load_mults)
      if (!(m > 0.0)) throw Error(ErrorKind::InvalidInput, "load multipliers must be positive");
    const Scenario base = load_scenario(a.common.scenario);

    const std::size_t total = a.methods.size() * a.load_mults.size();
    std::vector<Row> rows(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t idx = next++; idx < total; idx = next++)
        rows[idx] = sweep_point(base, a.methods[idx / a.load_mults.size()], a.load_mults[idx % a.load_mults.size()], a);
    };
    unsigned jobs = a.jobs > 0 ? static_cast<unsigned>(a.jobs) : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, total));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    write_csv(a.out, rows, out);
    return kExitOk;
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-timescale spectrum and time allocation for small AP clusters"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* sub, CommonFlags& c) {
    sub->add_option("scenario", c.scenario, "Scenario JSON file")->required();
    sub->add_option("--eps-fixed-point", c.eps_fixed_point, "Fixed-point residual tolerance")->capture_default_str();
    sub->add_option("--outer-tol", c.outer_tol, "Outer-loop tolerance (L-infinity)")->capture_default_str();
    sub->add_option("--barrier-stages", c.barrier_stages, "Barrier weights relative to the start objective")
        ->delimiter(',');
  };

  OptimizeArgs opt_args;
  auto* opt = app.add_subcommand("optimize", "Compute an allocation and its analytic delays");
  add_common(opt, opt_args.common);
  opt->add_option("--method", opt_args.method, "p1, p2, p3, full-reuse or conservative")->required();
  opt->add_option("--load-mult", opt_args.common.load_mult, "Scale every arrival rate")->capture_default_str();
  opt->add_option("--out", opt_args.out, "Write the allocation JSON here");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate an allocation");
  add_common(sim, sim_args.common);
  sim->add_option("--allocation", sim_args.allocation, "Allocation JSON file");
  sim->add_option("--method", sim_args.method, "Optimize with this method instead of reading a file");
  sim->add_option("--seed", sim_args.seed, "RNG seed")->capture_default_str();
  sim->add_option("--packets", sim_args.packets, "Packets to simulate")->capture_default_str();
  sim->add_option("--load-mult", sim_args.common.load_mult, "Scale every arrival rate")->capture_default_str();
  sim->add_option("--out", sim_args.out, "Write the CSV row here");

  SweepArgs sw_args;
  auto* sw = app.add_subcommand("sweep", "Delay against load for several methods, as CSV");
  add_common(sw, sw_args.common);
  sw->add_option("--method", sw_args.methods, "Methods (comma separated)")->delimiter(',')->required();
  sw->add_option("--load-mult", sw_args.load_mults, "Load multipliers (comma separated)")->delimiter(',')->required();
  sw->add_option("--seed", sw_args.seed, "RNG seed shared by every point")->capture_default_str();
  sw->add_option("--packets", sw_args.packets, "Packets per point; 0 skips simulation")->capture_default_str();
  sw->add_option("--jobs", sw_args.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  sw->add_option("--out", sw_args.out, "CSV output file (stdout when omitted)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (opt->parsed()) return cmd_optimize(opt_args, out);
  if (sim->parsed()) return cmd_simulate(sim_args, out);
  return cmd_sweep(sw_args, out);
}

}  // namespace dualscale::cli
