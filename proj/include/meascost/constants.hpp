#pragma once

#include <numbers>

namespace meascost {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kPlanck = 6.62607015e-34;   // J s
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);

}  // namespace meascost
