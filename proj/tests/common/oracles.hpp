#pragma once

// Independent reference computations used by unit and acceptance tests. None of
// these call into the library's rate, delay or solver code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "dualscale/convex.hpp"
#include "support.hpp"

namespace oracle {

using dualscale::Pattern;
using Gains = std::vector<std::vector<double>>;

inline double busy_prob(const std::vector<double>& rho, Pattern a) {
  double p = 1.0;
  for (std::size_t i = 0; i < rho.size(); ++i) p *= a.contains(static_cast<int>(i)) ? rho[i] : 1.0 - rho[i];
  return p;
}

// Slow-timescale rate of AP i under busy set A: sum_F s_i(F & A) y_F (group i served by AP i).
inline double rate_fixed(const Gains& g, const std::vector<double>& y, int i, Pattern a) {
  double r = 0.0;
  for (std::uint32_t f = 0; f < y.size(); ++f)
    if (Pattern{f}.contains(i)) r += testsupport::shannon(g, i, i, Pattern{f} & a) * y[f];
  return r;
}

// f^i(rho) written straight from its definition, for the slow-timescale model.
inline std::vector<double> f_fixed(const Gains& g, const std::vector<double>& y, const std::vector<double>& lambda,
                                   const std::vector<double>& rho) {
  const int n = static_cast<int>(rho.size());
  std::vector<double> out(rho.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::uint32_t a = 0; a < (1u << n); ++a) {
      const Pattern A{a};
      if (!A.contains(i)) continue;
      double w = 1.0;
      for (int l = 0; l < n; ++l) {
        if (l == i) continue;
        w *= A.contains(l) ? rho[static_cast<std::size_t>(l)] : 1.0 - rho[static_cast<std::size_t>(l)];
      }
      if (w > 0.0) acc += w / rate_fixed(g, y, i, A);
    }
    out[static_cast<std::size_t>(i)] = lambda[static_cast<std::size_t>(i)] * acc;
  }
  return out;
}

// Solves u = map(u) by nested bisection: the outermost coordinate is bisected on
// [0, hi]; for each trial value the remaining coordinates are solved recursively.
// Returns the root whose bracket starts from the upper end `hi` (largest root found
// by bisection on a residual that is >= 0 at hi and <= 0 at 0).
inline std::vector<double> nested_bisection(const std::function<std::vector<double>(const std::vector<double>&)>& map,
                                            const std::vector<double>& hi, int iters = 60) {
  const std::size_t n = hi.size();
  std::vector<double> u(n, 0.0);
  std::function<void(std::size_t)> solve = [&](std::size_t c) {
    if (c == n) return;
    auto residual = [&](double v) {
      u[c] = v;
      solve(c + 1);
      return v - map(u)[c];
    };
    double lo = 0.0;
    double up = hi[c];
    for (int it = 0; it < iters; ++it) {
      const double mid = 0.5 * (lo + up);
      if (residual(mid) >= 0.0)
        up = mid;
      else
        lo = mid;
    }
    u[c] = up;
    solve(c + 1);
  };
  solve(0);
  return u;
}

// Slow-timescale subproblem objective and per-AP constraint values at y, from the definitions.
struct SubproblemValue {
  double objective = 0.0;
  std::vector<double> util;
};

inline SubproblemValue subproblem_fixed(const Gains& g, const std::vector<double>& y, const std::vector<double>& lambda,
                                        const std::vector<double>& rho) {
  const int n = static_cast<int>(rho.size());
  SubproblemValue v;
  v.util.assign(rho.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const double li = lambda[static_cast<std::size_t>(i)];
    const double ri = rho[static_cast<std::size_t>(i)];
    for (std::uint32_t a = 0; a < (1u << n); ++a) {
      const Pattern A{a};
      if (!A.contains(i)) continue;
      const double w = busy_prob(rho, A) / ri;
      if (w <= 0.0) continue;
      const double r = rate_fixed(g, y, i, A);
      if (r <= 0.0) {
        v.objective = std::numeric_limits<double>::infinity();
        v.util[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
        continue;
      }
      v.objective += w * li * (li / (1.0 - ri) / (r * r) + 1.0 / r);
      v.util[static_cast<std::size_t>(i)] += w * li / r;
    }
  }
  return v;
}

// Grid search over (y_{1}, y_{2}, y_{12}) at the given resolution for n = 2.
struct GridResult {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> y;
  bool feasible = false;
};

inline GridResult grid_search_n2(const Gains& g, const std::vector<double>& lambda, const std::vector<double>& rho,
                                 int steps = 100) {
  GridResult best;
  for (int a = 0; a <= steps; ++a)
    for (int b = 0; a + b <= steps; ++b) {
      const std::vector<double> y{0.0, double(a) / steps, double(b) / steps, double(steps - a - b) / steps};
      const auto v = subproblem_fixed(g, y, lambda, rho);
      bool ok = true;
      for (int i = 0; i < 2; ++i) ok = ok && v.util[static_cast<std::size_t>(i)] <= rho[static_cast<std::size_t>(i)];
      if (ok && v.objective < best.objective) {
        best.objective = v.objective;
        best.y = y;
        best.feasible = true;
      }
    }
  return best;
}

// Random distribution over 2^n patterns that never puts mass on the empty pattern.
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t size) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> y(size, 0.0);
  double s = 0.0;
  for (std::size_t f = 1; f < size; ++f) s += (y[f] = e(rng));
  for (double& v : y) v /= s;
  return y;
}

// The slow-timescale spectrum subproblem at a fixed utilization state, built from the
// definitions (weights p_A lambda / rho_i, curvature lambda / (1 - rho_i), coefficient
// s_i(F & A) for every pattern F holding AP i).
inline dualscale::SubproblemSpec spec_fixed(const Gains& g, const std::vector<double>& lambda,
                                            const std::vector<double>& rho) {
  const int n = static_cast<int>(rho.size());
  dualscale::SubproblemSpec spec;
  spec.polytope = dualscale::Polytope::Simplex;
  spec.n = n;
  for (int i = 0; i < n; ++i) {
    const double li = lambda[static_cast<std::size_t>(i)];
    if (li <= 0.0) continue;
    const double ri = rho[static_cast<std::size_t>(i)];
    dualscale::QueueBlock b;
    b.queue = i;
    b.curvature = li / (1.0 - ri);
    b.cap = ri;
    for (std::uint32_t a = 0; a < (1u << n); ++a) {
      const Pattern A{a};
      if (!A.contains(i) || busy_prob(rho, A) <= 0.0) continue;
      b.states.push_back(a);
      b.weight.push_back(busy_prob(rho, A) / ri * li);
    }
    for (std::uint32_t f = 0; f < (1u << n); ++f) b.columns.push_back(static_cast<int>(f));
    for (std::uint32_t f = 0; f < (1u << n); ++f)
      for (std::uint32_t st : b.states)
        b.coeff.push_back(Pattern{f}.contains(i) ? testsupport::shannon(g, i, i, Pattern{f} & Pattern{st}) : 0.0);
    spec.blocks.push_back(std::move(b));
  }
  return spec;
}

// A corpus of random n = 2 subproblems at an intermediate utilization state, with loads
// chosen so the all-orthogonal split is comfortably feasible.
struct Instance2 {
  Gains g;
  std::vector<double> lambda;
  std::vector<double> rho;
};

inline Instance2 random_instance_n2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> own(2.0, 30.0), cross(0.1, 10.0), util(0.3, 0.95), load(0.1, 0.6);
  Instance2 in;
  in.g = {{own(rng), cross(rng)}, {cross(rng), own(rng)}};
  in.rho = {util(rng), util(rng)};
  // Orthogonal halves give AP i the rate 0.5 s_i({i}); its constraint there reads
  // lambda / (0.5 s) <= rho.
  for (int i = 0; i < 2; ++i)
    in.lambda.push_back(load(rng) * in.rho[std::size_t(i)] * 0.5 * testsupport::shannon(in.g, i, i, Pattern::single(i)));
  return in;
}

}  // namespace oracle
