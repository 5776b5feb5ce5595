#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dualscale {

/// One queue's slice of a linear rate map. Rows are the busy / interferer sets with
/// positive weight; columns are the decision coordinates that feed this queue's rates.
///
/// The subproblem objective is sum_rows w (a/r^2 + 1/r) and the utilization
/// constraint is sum_rows w / r <= cap, with r = coeff * decision.
struct QueueBlock {
  int queue = 0;
  std::vector<std::uint32_t> states;  // busy / interferer set per row
  std::vector<double> weight;         // w per row
  double curvature = 0.0;             // a
  double cap = 1.0;
  std::vector<int> columns;           // global decision columns
  std::vector<double> coeff;          // rows x columns.size(), column-major

  std::size_t rows() const { return weight.size(); }
};

enum class Polytope {
  Simplex,    // decision y over 2^n patterns, column F
  CoupledXY,  // decision x^{i->j}_F with sum_j x^{i->j}_F = y_F, column ((i*k)+j)*2^n + F
};

struct SubproblemSpec {
  Polytope polytope = Polytope::Simplex;
  int n = 0;
  int k = 1;
  std::vector<QueueBlock> blocks;

  std::size_t num_columns() const;
};

/// Polytope vertex: all mass on one pattern; under CoupledXY each AP of the pattern
/// serves exactly one group (`groups[i]`, -1 for APs outside the pattern).
struct Atom {
  std::uint32_t pattern = 0;
  std::vector<int> groups;

  bool operator==(const Atom&) const = default;
};

struct WeightedAtom {
  Atom atom;
  double weight = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, MaxIter, Stall };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double gap_tol = 1e-6;
  int max_iter = 50000;
  std::vector<double> barrier_scales{1e-2, 1e-4, 1e-6, 1e-8};
  double rate_floor = 1e-12;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<WeightedAtom> atoms;
  std::vector<double> y;       // 2^n
  std::vector<double> x;       // CoupledXY only
  std::vector<double> rates;   // per row, blocks concatenated
  std::vector<double> util;    // constraint value per block
  double objective = 0.0;      // without the barrier term
  double gap = 0.0;
  double max_violation = 0.0;  // max_q util/cap - 1 at the returned point
  int iterations = 0;
  bool boundary = false;       // no strictly feasible point; phase-1 point returned
};

struct Evaluation {
  double objective = 0.0;
  std::vector<double> util;      // per block
  std::vector<double> gradient;  // d objective / d column
};

/// Objective, constraint values and objective gradient at a decision vector
/// (y for Simplex, x for CoupledXY).
Evaluation evaluate(const SubproblemSpec& spec, std::span<const double> decision, double rate_floor = 1e-12);

/// Linear minimization over the polytope for per-column costs. Ties go to the lowest index.
Atom lmo(std::span<const double> column_cost, const SubproblemSpec& spec);

struct Phase1Result {
  bool feasible = false;
  bool strict = false;
  double max_violation = 0.0;
  std::vector<WeightedAtom> atoms;
};

/// Minimizes a smoothed maximum of the relative constraint violations.
Phase1Result phase1(const SubproblemSpec& spec, const SolveOptions& opt = {}, std::span<const WeightedAtom> start = {});

/// Frank-Wolfe (pairwise steps) with log-barrier continuation over the utilization constraints.
SolveResult solve(const SubproblemSpec& spec, const SolveOptions& opt = {}, std::span<const WeightedAtom> start = {});

/// Decision vector represented by a convex combination of atoms.
std::vector<double> decision_of(const SubproblemSpec& spec, std::span<const WeightedAtom> atoms);

}  // namespace dualscale
