#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vectwin {

// Unit-carrying aliases. All delays and queue backlogs are seconds, data
// sizes are Gbit, rates are Gbit/s, positions are meters along the road.
using Meters = double;
using Seconds = double;
using MetersPerSecond = double;
using Gbit = double;
using GbitPerSecond = double;

using SlotIndex = std::int64_t;
using EpochIndex = std::int64_t;  // 1-based
using RsuId = int;
using VehicleId = std::uint64_t;

enum class Direction { forward, backward };

inline int direction_index(Direction d) { return d == Direction::forward ? 0 : 1; }
inline const char* direction_name(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

// Broken precondition or invariant inside the artifact itself.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Malformed or inconsistent user configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Defective mobility trace input.
struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training.
struct TrainingFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace vectwin
