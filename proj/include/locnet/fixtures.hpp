#pragma once

// Reference initial conditions for the ten-oscillator ring
// (displacements first, then velocities).

#include <array>
#include <optional>
#include <string_view>

#include "locnet/model.hpp"

namespace locnet::fixtures {

inline constexpr std::array<double, 20> x0a{0.0678, 0.0392, 0.0330, 0.03074, 0.0738, 0.0672, 0.0413,
                                            0.0780, 0.06037291, 0.0747, 0.0062, 0.0381, 0.0933, 0.0543,
                                            0.0505, 0.0356, 0.0193, 0.0180, 0.0577, 0.0390};

inline constexpr std::array<double, 20> x0b{0.0092, 0.0089, 0.0045, 0.0023, 0.0013, 0.0018, 0.008,
                                            0.0065, 0.0002, 0.0048, 0.0026, 0.005,  0.0087, 0.0033,
                                            0.0006, 0.0019, 0.0041, 0.002,  0.005,  0.0007};

inline constexpr std::array<double, 20> x0c{0.0466, 0.0039, 0.0121, 0.0876, 0.0077, 0.0366, 0.0205,
                                            0.0105, 0.0442, 0.0656, 0.0261, 0.0725, 0.0919, 0.0103,
                                            0.0613, 0.0310, 0.0878, 0.0022, 0.0736, 0.0126};

inline constexpr std::array<std::string_view, 3> names{"x0a", "x0b", "x0c"};

/// Looks up a fixture by name; std::nullopt for unknown names.
inline std::optional<StateVector> by_name(std::string_view name) {
    const std::array<double, 20>* src = nullptr;
    if (name == "x0a") src = &x0a;
    else if (name == "x0b") src = &x0b;
    else if (name == "x0c") src = &x0c;
    if (!src) return std::nullopt;
    return StateVector(std::vector<double>(src->begin(), src->end()));
}

}  // namespace locnet::fixtures
