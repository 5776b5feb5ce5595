#pragma once

#include <cstdint>
#include <vector>

#include "dualscale/allocation.hpp"
#include "dualscale/report.hpp"
#include "dualscale/scenario.hpp"

namespace dualscale {

inline constexpr std::int64_t kSaturationGuard = 1000000;
inline constexpr int kBatches = 20;

struct SimOptions {
  std::int64_t packets = 1000000;  // completions to simulate, warm-up included
  std::uint64_t seed = 1;
  double warmup_fraction = 0.1;
};

/// Discrete-event simulation of the interacting queues (one per AP under fixed
/// association, one per UE group otherwise). Delays are reported per UE group.
/// Throws Error(Unstable, "saturated ...") when a queue exceeds the guard length.
DelayReport simulate(const Scenario& sc, const Allocation& alloc, const SimOptions& opt = {});

/// Bit-rates of every queue when the queues in `nonempty` (bit q = queue q) hold packets.
std::vector<double> instantaneous_rates(const Scenario& sc, const Allocation& alloc, std::uint64_t nonempty);

}  // namespace dualscale
