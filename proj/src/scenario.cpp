#include "dualscale/scenario.hpp"

#include <cmath>
#include <string>

#include "dualscale/error.hpp"

namespace dualscale {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::InvalidInput, msg);
}

}  // namespace

std::vector<double> Scenario::ap_lambdas() const {
  std::vector<double> out(static_cast<std::size_t>(n()));
  for (int i = 0; i < n(); ++i) out[static_cast<std::size_t>(i)] = ap_lambda(i);
  return out;
}

void Scenario::validate() const {
  const auto nn = static_cast<std::size_t>(n());
  const auto kk = static_cast<std::size_t>(k());
  require(nn >= 1, "scenario needs at least one AP");
  require(kk >= 1, "scenario needs at least one UE group");
  require(psd.size() == nn && neighbors.size() == nn, "per-AP arrays have inconsistent sizes");
  require(noise.size() == kk && lambda.size() == kk, "per-group arrays have inconsistent sizes");
  require(shadow.empty() || shadow.size() == nn * kk, "shadow matrix has wrong size");
  require(bandwidth_hz > 0.0, "bandwidth must be positive");
  require(mean_packet_bits > 0.0, "mean packet length must be positive");
  for (double q : psd) require(q > 0.0 && std::isfinite(q), "transmit PSD must be positive");
  for (double v : noise) require(v > 0.0 && std::isfinite(v), "noise PSD must be positive");
  for (double l : lambda) require(l >= 0.0 && std::isfinite(l), "arrival rates must be nonnegative");
  for (double s : shadow) require(s > 0.0 && std::isfinite(s), "shadow factors must be positive");
  for (int i = 0; i < n(); ++i) {
    const Pattern nb = neighbors[static_cast<std::size_t>(i)];
    require(!nb.contains(i), "an AP cannot be its own neighbor");
    require(nb.subset_of(Pattern::full(n())), "neighbor index out of range");
    for (int l = 0; l < n(); ++l) {
      if (nb.contains(l)) require(neighbors[static_cast<std::size_t>(l)].contains(i), "neighbor relation must be symmetric");
    }
  }
  if (group_of_ap) {
    require(kk == nn, "fixed association needs exactly one UE group per AP");
    require(group_of_ap->size() == nn, "association map has wrong size");
    std::vector<bool> seen(kk, false);
    for (int g : *group_of_ap) {
      require(g >= 0 && static_cast<std::size_t>(g) < kk, "association refers to unknown UE group");
      require(!seen[static_cast<std::size_t>(g)], "fixed association must be a bijection");
      seen[static_cast<std::size_t>(g)] = true;
    }
  }
}

Scenario Scenario::scaled(double mult) const {
  Scenario out = *this;
  for (double& l : out.lambda) l *= mult;
  return out;
}

double link_gain(const Scenario& sc, int ap, int ue) {
  const Point a = sc.ap_positions.at(static_cast<std::size_t>(ap));
  const Point u = sc.ue_positions.at(static_cast<std::size_t>(ue));
  const double d = std::hypot(a.x - u.x, a.y - u.y);
  if (d <= 0.0) throw Error(ErrorKind::InvalidInput, "degenerate geometry: AP and UE group coincide");
  return sc.shadow_factor(ap, ue) * std::pow(d, -sc.pathloss_exponent);
}

}  // namespace dualscale
