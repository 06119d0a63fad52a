#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dhym/path.hpp"
#include "dhym/phase.hpp"
#include "dhym/torus.hpp"

namespace dhym {

/// Contents of a JSON run configuration.
///
/// Keys: "dimension" (3 or 4), "theta_hat" (radians), optional "intersection_numbers" (array of n + 1 numbers),
/// optional "ell", "seed", "samples", and an optional "torus" object with "grid", "base" ("diagonal" or
/// {"h11", "h22", "re", "im"}), "frozen" ("diagonal" or an array of n - 2 numbers), "potential" (array of
/// {"amplitude", "wave": [4 integers], "phase"}), "volume" and "tolerance".
struct RunConfig {
    PhaseParams phase;
    std::optional<IntersectionNumbers> omega;
    std::optional<double> ell;
    std::uint64_t seed = 7;
    int samples = 1000;
    std::optional<TorusProblem> torus;
};

/// Parses configuration text. Throws ArgumentError on malformed input.
RunConfig parse_config(const std::string& text);

/// Reads and parses a configuration file. Throws ArgumentError if it cannot be read.
RunConfig load_config(const std::string& path);

/// Intersection numbers given explicitly, or computed from the torus problem. Throws ArgumentError if neither.
IntersectionNumbers config_omega(const RunConfig& config);

}  // namespace dhym
