#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "crbeam/model.hpp"

namespace crbeam {

/// Key/value + array scenario format; see the bundled scenarios/ files.
/// Channels come from angles (su_angles_deg / pu_angles_deg) or explicit
/// complex entries (su_channel k re im ...); SINR and IP thresholds carry an
/// explicit unit suffix (_db or _linear); per-side radii are given as exactly
/// one of vector_radius or matrix_radius. Single values broadcast.
/// Throws std::runtime_error with line diagnostics on malformed input.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::string& path);

/// Deterministic serialization of the resolved scenario; basis of the hash,
/// so formatting and comments in the source file do not matter.
std::string scenario_canonical_text(const ScenarioConfig& s);

std::uint64_t fnv1a64(std::string_view data);
std::string scenario_hash_hex(const ScenarioConfig& s);

}  // namespace crbeam
