#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dualscale/allocators.hpp"
#include "dualscale/error.hpp"

namespace dualscale::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind);

inline const char* kCsvHeader = "method,load_mult,analytic_delay_s,sim_delay_s,sim_ci_s,max_rho,outer_iters,status";

struct CommonFlags {
  std::string scenario;
  double eps_fixed_point = 1e-8;
  double outer_tol = 1e-4;
  std::vector<double> barrier_stages{1e-2, 1e-4, 1e-6, 1e-8};
  double load_mult = 1.0;
  AllocatorOptions allocator() const;
};

struct OptimizeArgs {
  CommonFlags common;
  std::string method;
  std::string out;  // allocation JSON, optional
};

struct SimulateArgs {
  CommonFlags common;
  std::string allocation;  // allocation JSON; or
  std::string method;      // optimize first with this method
  std::uint64_t seed = 1;
  std::int64_t packets = 1000000;
  std::string out;         // CSV, optional
};

struct SweepArgs {
  CommonFlags common;
  std::vector<std::string> methods;
  std::vector<double> load_mults;
  std::uint64_t seed = 1;
  std::int64_t packets = 200000;  // 0 skips simulation
  std::string out;                // CSV; stdout when empty
  int jobs = 0;                   // 0 = hardware concurrency
};

/// One sweep row (also emitted by simulate).
struct Row {
  std::string method;
  double load_mult = 1.0;
  double analytic_delay = 0.0;
  double sim_delay = 0.0;
  double sim_ci = 0.0;
  double max_rho = 0.0;
  int outer_iters = 0;
  std::string status = "ok";
  std::string to_csv() const;
};

int cmd_optimize(const OptimizeArgs& a, std::ostream& out);
int cmd_simulate(const SimulateArgs& a, std::ostream& out);
int cmd_sweep(const SweepArgs& a, std::ostream& out);

/// Evaluates one (method, multiplier) point; errors become the row status.
Row sweep_point(const Scenario& base, const std::string& method, double mult, const SweepArgs& a);

/// Full command line (argv[0] excluded). Errors are reported on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualscale::cli
