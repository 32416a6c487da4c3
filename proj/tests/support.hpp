#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rescue/config.hpp"
#include "rescue/engine.hpp"
#include "rescue/rng.hpp"

namespace rescue::testing {

/// One hovering UAV away from the home base, no entities.
inline SimConfig single_uav_config(const Vec3& position = {100.0, 100.0, 10.0},
                                   AutonomyLevel level = AutonomyLevel::waypoint_sequence) {
    SimConfig c = default_config();
    c.uavs = {UavSpawn{UavColor::red, position, level}};
    c.entity_counts = {0, 0, 0, 0};
    return c;
}

inline CommandRequest to(std::uint32_t uav, OperatorCommand cmd) { return {{uav}, std::move(cmd)}; }

/// Box-Muller on the project's uniform stream; the test oracle's own normal
/// generator, independent of any library distribution.
inline double normal(Rng& rng) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace rescue::testing
