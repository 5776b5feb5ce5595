#pragma once

#include <string>
#include <vector>

#include "dualscale/allocation.hpp"
#include "dualscale/convex.hpp"
#include "dualscale/eff_table.hpp"
#include "dualscale/queue_analytics.hpp"
#include "dualscale/report.hpp"
#include "dualscale/scenario.hpp"

namespace dualscale {

enum class Method { P1, P2, P3, FullReuse, Conservative };

/// Parses "p1", "p2", "p3", "full-reuse", "conservative"; throws InvalidInput otherwise.
Method parse_method(const std::string& name);
std::string to_string(Method m);

inline constexpr int kMaxApsFixed = 8;
inline constexpr int kMaxApsFlexible = 6;
inline constexpr int kMaxGroupsFlexible = 40;

struct UtilState {
  std::vector<double> rho;    // per AP
  std::vector<double> sigma;  // per UE group, flexible mode only
  std::vector<double> p;      // over all busy / interferer sets
};

struct TraceEntry {
  std::vector<double> rho;
  std::vector<double> sigma;
  double objective = 0.0;
  std::vector<SolveStatus> statuses;  // one per subproblem solved this iteration
  double change = 0.0;                // L-infinity change of the tracked block
  double climb = 0.0;                 // raise of sigma needed before the fixed point (flexible only)
};

struct SolveTrace {
  std::vector<TraceEntry> entries;
  bool converged = false;
};

struct AllocatorOptions {
  double outer_tol = 1e-4;
  int outer_cap = 200;
  double init_delta = 1e-3;  // start from rho = 1 - delta
  FixedPointOptions fixed_point{};
  SolveOptions solver{};
  int max_outer_iterations = -1;  // when >= 0, stop after this many outer iterations
  bool optimize_time = true;      // false pins z to the full pattern (slow timescale only)
};

struct AllocResult {
  Allocation alloc;
  UtilState util;
  DelayReport delay;  // analytic
  SolveTrace trace;
  int outer_iterations() const { return static_cast<int>(trace.entries.size()); }
};

/// Alternates the spectrum block with the utilization fixed point.
AllocResult solve_p1(const Scenario& sc, const AllocatorOptions& opt = {});
/// Spectrum block, time block, utilization fixed point.
AllocResult solve_p2(const Scenario& sc, const AllocatorOptions& opt = {});
/// Flexible association: (x, y) block, time block, group-utilization fixed point.
AllocResult solve_p3(const Scenario& sc, const AllocatorOptions& opt = {});

/// y_N = z_N = 1; under flexible association each AP splits its band equally among
/// the groups it hears best (every AP serves at least its best group).
Allocation baseline_full_reuse(const Scenario& sc);
/// The first spectrum-block solve from the all-busy state (slow timescale only).
Allocation baseline_conservative(const Scenario& sc, const AllocatorOptions& opt = {});

/// Stable utilizations (least fixed point) and analytic delays of an arbitrary allocation.
/// Throws Error(Unstable) when no stable operating point exists.
AllocResult evaluate_allocation(const Scenario& sc, const Allocation& alloc, const AllocatorOptions& opt = {});

/// Dispatch on method; baselines are evaluated with evaluate_allocation.
AllocResult run_method(const Scenario& sc, Method m, const AllocatorOptions& opt = {});

/// Analytic delays for a utilization state and rate table (fixed or flexible per scenario).
DelayReport analytic_delays(const Scenario& sc, const UtilState& util, const RateTable& rates);

/// Rate table implied by an allocation: per AP in fixed modes, per group in flexible mode.
RateTable allocation_rates(const Scenario& sc, const EffTable& eff, const Allocation& alloc);

}  // namespace dualscale
