#pragma once

#include <cstdint>
#include <vector>

namespace dualscale {

/// Mean packet delays per UE group (seconds) and their network aggregate.
/// Analytic reports leave the confidence fields empty.
struct DelayReport {
  std::vector<double> queue_delay;
  std::vector<double> queue_ci;       // 95% half-widths, simulated only
  double network_delay = 0.0;         // sum lambda d / sum lambda
  double network_ci = 0.0;
  double objective = 0.0;             // sum lambda d
  std::int64_t served = 0;
  std::int64_t warmup_discarded = 0;
  bool simulated = false;
  double work_served_bits = 0.0;     // integral of service rates over time, simulated only
  double work_completed_bits = 0.0;  // completed packet work plus progress of packets still queued
};

}  // namespace dualscale
