#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowfl {

using RobotId = std::uint32_t;
using Tick = std::int64_t;
using Bytes = std::vector<std::uint8_t>;

inline constexpr double kSecondsPerTick = 0.1;

inline constexpr double ticks_to_seconds(Tick t) { return static_cast<double>(t) * kSecondsPerTick; }

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

using Trajectory = std::vector<Point2>;

// Experiment variants: pooled-data baseline, server-scheduled FL, serverless Flow-FL.
enum class VariantKind { centralized, server_fl, flow_fl };

std::string to_string(VariantKind v);
VariantKind parse_variant(const std::string& s);

// Thrown when a protocol state machine is driven out of order.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Thrown on malformed or unreadable input files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a run configuration fails validation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace flowfl
