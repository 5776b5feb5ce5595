#include "dualscale/sched.hpp"

#include "dualscale/error.hpp"

namespace dualscale {

namespace {

// Replacement rule on a candidate set: keep members owning T, or whose neighbors
// within the candidate set are all idle.
Pattern apply_rule(Pattern candidates, Pattern t, std::span<const Pattern> neighbors) {
  std::uint32_t out = 0;
  for (std::uint32_t rest = candidates.bits(); rest != 0; rest &= rest - 1) {
    const int l = std::countr_zero(rest);
    if (t.contains(l) || (neighbors[static_cast<std::size_t>(l)] & candidates).is_empty()) out |= 1u << l;
  }
  return Pattern{out};
}

}  // namespace

Pattern active_set(Pattern f, Pattern t, Pattern busy, std::span<const Pattern> neighbors) {
  return apply_rule(f & busy, t, neighbors);
}

double eta_fixed(int ap, Pattern f, Pattern t, Pattern busy, const ApTable& s, std::span<const Pattern> neighbors) {
  if (!f.contains(ap)) return 0.0;
  return s.at(ap, active_set(f, t, busy, neighbors));
}

Pattern active_set_flex(int server, Pattern f, Pattern t, Pattern interferers, std::span<const Pattern> neighbors) {
  if (!f.contains(server)) throw Error(ErrorKind::InvalidInput, "server lacks pattern");
  return apply_rule((f & interferers).with(server), t, neighbors);
}

double eta_flex(int server, int ue, Pattern f, Pattern t, Pattern interferers, const EffTable& eff,
                std::span<const Pattern> neighbors) {
  return eff.at(server, ue, active_set_flex(server, f, t, interferers, neighbors));
}

namespace {

enum class Axis { Time, Freq };

CollapsedEta collapse(const ApTable& s, std::span<const Pattern> neighbors, std::span<const double> weights, Axis axis) {
  CollapsedEta out;
  out.n = s.n;
  const std::size_t np = pattern_count(s.n);
  out.m.assign(static_cast<std::size_t>(s.n) * np * np, 0.0);
  for (std::size_t w = 0; w < np; ++w) {
    const double weight = weights[w];
    if (weight <= 0.0) continue;
    for (std::size_t pat = 0; pat < np; ++pat) {
      const Pattern f{static_cast<std::uint32_t>(axis == Axis::Time ? pat : w)};
      const Pattern t{static_cast<std::uint32_t>(axis == Axis::Time ? w : pat)};
      for (std::size_t a = 0; a < np; ++a) {
        const Pattern active = active_set(f, t, Pattern{static_cast<std::uint32_t>(a)}, neighbors);
        for (std::uint32_t rest = active.bits(); rest != 0; rest &= rest - 1) {
          const int i = std::countr_zero(rest);
          out.m[(static_cast<std::size_t>(i) * np + pat) * np + a] += weight * s.at(i, active);
        }
      }
    }
  }
  return out;
}

}  // namespace

CollapsedEta collapse_over_time(const ApTable& s, std::span<const Pattern> neighbors, std::span<const double> z) {
  return collapse(s, neighbors, z, Axis::Time);
}

CollapsedEta collapse_over_freq(const ApTable& s, std::span<const Pattern> neighbors, std::span<const double> y) {
  return collapse(s, neighbors, y, Axis::Freq);
}

}  // namespace dualscale
