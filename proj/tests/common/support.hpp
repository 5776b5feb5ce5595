#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dualscale/allocation.hpp"
#include "dualscale/eff_table.hpp"
#include "dualscale/pattern.hpp"
#include "dualscale/scenario.hpp"

namespace testsupport {

using dualscale::Pattern;
using dualscale::Point;
using dualscale::Scenario;

inline Pattern P(std::initializer_list<int> members) {
  Pattern p;
  for (int m : members) p = p.with(m);
  return p;
}

// Every AP sits 1 m from every UE group (groups at the origin, APs on the unit
// circle), so the link gains are exactly the shadow factors gain[ap][ue] up to
// rounding of the positions. PSD and noise are 1, W = L, so s = log2(1 + SINR).
inline Scenario gain_scenario(const std::vector<std::vector<double>>& gain, std::vector<double> lambda,
                              bool fixed = true, Pattern neighbor_mask_all = Pattern::full(31)) {
  Scenario sc;
  const int n = static_cast<int>(gain.size());
  const int k = static_cast<int>(gain[0].size());
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    sc.ap_positions.push_back(Point{std::cos(a), std::sin(a)});
    sc.ap_ids.push_back(i + 1);
    sc.psd.push_back(1.0);
  }
  for (int j = 0; j < k; ++j) {
    sc.ue_positions.push_back(Point{0.0, 0.0});
    sc.ue_ids.push_back(j + 1);
    sc.noise.push_back(1.0);
  }
  sc.lambda = std::move(lambda);
  sc.bandwidth_hz = 1e6;
  sc.mean_packet_bits = 1e6;
  sc.pathloss_exponent = 3.0;
  for (int i = 0; i < n; ++i) sc.neighbors.push_back((Pattern::full(n) & neighbor_mask_all).without(i));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) sc.shadow.push_back(gain[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  if (fixed) {
    std::vector<int> map(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) map[static_cast<std::size_t>(i)] = i;
    sc.group_of_ap = map;
  }
  sc.validate();
  return sc;
}

// No neighbor relations at all.
inline Scenario isolate(Scenario sc) {
  for (auto& nb : sc.neighbors) nb = Pattern::empty();
  return sc;
}

// Single AP with spectral efficiency s packets/s (SNR 1, W = s L).
inline Scenario single_ap(double s, double lambda) {
  Scenario sc = gain_scenario({{1.0}}, {lambda});
  sc.bandwidth_hz = s * sc.mean_packet_bits;
  return sc;
}

// Random gains: own link in [2, 20], cross links in [0.05, 2] (noise 1).
inline std::vector<std::vector<double>> random_gains(std::mt19937_64& rng, int n, int k) {
  std::uniform_real_distribution<double> own(2.0, 20.0);
  std::uniform_real_distribution<double> cross(0.05, 2.0);
  std::vector<std::vector<double>> g(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(k)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (i == j % n) ? own(rng) : cross(rng);
  return g;
}

// Independent Shannon evaluation from a gain matrix (PSD 1, noise 1, W/L = 1).
inline double shannon(const std::vector<std::vector<double>>& gain, int i, int j, Pattern a) {
  if (!a.contains(i)) return 0.0;
  double interference = 0.0;
  for (int l = 0; l < static_cast<int>(gain.size()); ++l)
    if (l != i && a.contains(l)) interference += gain[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
  return std::log2(1.0 + gain[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / (interference + 1.0));
}

inline std::vector<double> one_hot(std::size_t size, std::size_t at) {
  std::vector<double> v(size, 0.0);
  v[at] = 1.0;
  return v;
}

inline std::string scenario_path(const std::string& name) { return std::string(DUALSCALE_SCENARIO_DIR) + "/" + name; }

}  // namespace testsupport
