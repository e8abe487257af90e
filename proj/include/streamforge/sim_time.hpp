#pragma once

#include <cstdint>
#include <string>

namespace streamforge {

/// Simulated time in integer microseconds. All timing arithmetic in the
/// engine is integral so traces are bit-identical across platforms.
using SimTime = std::int64_t;

constexpr SimTime kUsPerMs = 1'000;
constexpr SimTime kUsPerSec = 1'000'000;

constexpr SimTime us_from_ms(double ms) {
    return static_cast<SimTime>(ms * static_cast<double>(kUsPerMs) + 0.5);
}

constexpr SimTime us_from_seconds(double s) {
    return static_cast<SimTime>(s * static_cast<double>(kUsPerSec) + 0.5);
}

constexpr double seconds_from_us(SimTime t) {
    return static_cast<double>(t) / static_cast<double>(kUsPerSec);
}

inline std::string format_us(SimTime t) { return std::to_string(t); }

}  // namespace streamforge
