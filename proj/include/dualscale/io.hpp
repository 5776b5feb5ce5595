#pragma once

#include <string>

#include "dualscale/allocation.hpp"
#include "dualscale/scenario.hpp"

namespace dualscale {

/// Scenario document: aps, ue_groups, bandwidth_hz, mean_packet_bits, pathloss_exponent,
/// neighbors (AP-id pairs), association ("flexible" or {"type":"fixed","map":[{ue, ap}]}),
/// optional shadow [{ap, ue, factor}]. Throws Error(InvalidInput) on malformed input.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& sc);

/// Allocation document: "y" and "z" map pattern masks (decimal strings, bit i = AP index i)
/// to fractions; "x" nests AP id -> UE group id -> mask -> fraction (flexible only).
/// Omitted entries are zero.
Allocation parse_allocation(const std::string& text, const Scenario& sc);
Allocation load_allocation(const std::string& path, const Scenario& sc);
std::string allocation_to_json(const Allocation& alloc, const Scenario& sc);
void save_allocation(const std::string& path, const Allocation& alloc, const Scenario& sc);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Shortest decimal that round-trips; empty string for NaN.
std::string format_number(double v);

}  // namespace dualscale
