#pragma once

#include <optional>
#include <vector>

#include "dualscale/pattern.hpp"

namespace dualscale {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Immutable network instance: APs, UE groups, radio constants and traffic.
/// Indices are 0-based; `ap_ids` / `ue_ids` keep the identifiers used in files.
struct Scenario {
  std::vector<int> ap_ids;
  std::vector<int> ue_ids;
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  std::vector<double> psd;      // q^i, W/Hz
  std::vector<double> noise;    // n^j, W/Hz
  std::vector<double> lambda;   // packets/s per UE group
  double bandwidth_hz = 0.0;
  double mean_packet_bits = 0.0;
  double pathloss_exponent = 3.0;
  std::vector<Pattern> neighbors;       // per AP
  std::vector<double> shadow;           // n*k, row-major [ap][ue], linear
  std::optional<std::vector<int>> group_of_ap;  // fixed association; nullopt = flexible

  int n() const { return static_cast<int>(ap_positions.size()); }
  int k() const { return static_cast<int>(ue_positions.size()); }
  bool fixed() const { return group_of_ap.has_value(); }

  /// Serving AP's group index under fixed association.
  int group(int ap) const { return (*group_of_ap)[static_cast<std::size_t>(ap)]; }
  /// Per-AP arrival rate under fixed association.
  double ap_lambda(int ap) const { return lambda[static_cast<std::size_t>(group(ap))]; }
  std::vector<double> ap_lambdas() const;

  double shadow_factor(int ap, int ue) const {
    return shadow.empty() ? 1.0 : shadow[static_cast<std::size_t>(ap * k() + ue)];
  }

  /// Throws Error(InvalidInput) on any violated invariant.
  void validate() const;

  /// Copy with every arrival rate multiplied by `mult`.
  Scenario scaled(double mult) const;
};

/// h = shadow * (d / 1 m)^(-exponent). Throws on coincident positions.
double link_gain(const Scenario& sc, int ap, int ue);

}  // namespace dualscale
