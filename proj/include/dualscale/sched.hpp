#pragma once

#include <span>
#include <vector>

#include "dualscale/eff_table.hpp"
#include "dualscale/pattern.hpp"

namespace dualscale {

/// APs transmitting on PRB (F,T) when `busy` is the busy set: members of F & busy that either
/// own the time pattern or see every neighbor holding F idle.
Pattern active_set(Pattern f, Pattern t, Pattern busy, std::span<const Pattern> neighbors);

double eta_fixed(int ap, Pattern f, Pattern t, Pattern busy, const ApTable& s, std::span<const Pattern> neighbors);

/// Flexible mode: A = (F & I) | {server}, then the same replacement rule applied to A.
/// Throws InvalidInput if the server does not hold F.
Pattern active_set_flex(int server, Pattern f, Pattern t, Pattern interferers, std::span<const Pattern> neighbors);

double eta_flex(int server, int ue, Pattern f, Pattern t, Pattern interferers, const EffTable& eff,
                std::span<const Pattern> neighbors);

/// Dense n x 2^n x 2^n tensor indexed [i][pattern][A].
struct CollapsedEta {
  int n = 0;
  std::vector<double> m;

  double at(int ap, Pattern pat, Pattern a) const {
    const std::size_t np = pattern_count(n);
    return m[(static_cast<std::size_t>(ap) * np + pat.bits()) * np + a.bits()];
  }
};

/// M[i][F][A] = sum_T eta^i(F,T,A) z_T.
CollapsedEta collapse_over_time(const ApTable& s, std::span<const Pattern> neighbors, std::span<const double> z);

/// M'[i][T][A] = sum_F eta^i(F,T,A) y_F.
CollapsedEta collapse_over_freq(const ApTable& s, std::span<const Pattern> neighbors, std::span<const double> y);

}  // namespace dualscale
