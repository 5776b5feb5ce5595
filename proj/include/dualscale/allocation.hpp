#pragma once

#include <vector>

#include "dualscale/pattern.hpp"

namespace dualscale {

/// Slow-timescale decision: spectrum fractions y[F], time fractions z[T] and,
/// under flexible association, per-link spectrum x[i][j][F].
struct Allocation {
  int n = 0;
  int k = 0;
  std::vector<double> y;
  std::vector<double> z;
  std::vector<double> x;  // empty unless flexible; index ((i*k)+j)*2^n + F

  bool flexible() const { return !x.empty(); }
  std::size_t patterns() const { return pattern_count(n); }

  double& xv(int ap, int ue, Pattern f) { return x[x_index(ap, ue, f)]; }
  double xv(int ap, int ue, Pattern f) const { return x[x_index(ap, ue, f)]; }
  std::size_t x_index(int ap, int ue, Pattern f) const {
    return (static_cast<std::size_t>(ap) * static_cast<std::size_t>(k) + static_cast<std::size_t>(ue)) * patterns() + f.bits();
  }

  /// y and z set to the full pattern; x empty.
  static Allocation full_reuse(int n, int k);
  /// Throws Error(InvalidInput) if any invariant fails beyond `tol`.
  void validate(double tol = 1e-9) const;
};

}  // namespace dualscale
