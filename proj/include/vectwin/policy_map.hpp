#pragma once

#include <array>
#include <optional>
#include <vector>

#include "vectwin/net_model.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

// One direction's pair of computing-policy benchmarks on the
// location-speed plane: a point (deliver locally) and a line (deliver to
// the next RSU). Speeds are magnitudes; direction selects the benchmark set.
struct DirectionBenchmarks {
    Meters point_x = 0.0;            // x-hat
    MetersPerSecond point_v = 0.0;   // v-hat
    double line_a = 0.0;             // alpha
    double line_b = 1.0;             // beta
    double line_c = 0.0;             // gamma
};

// Per-RSU, per-epoch policy-map parameters. Published once per epoch and
// immutable afterwards.
struct PolicyMap {
    RsuId rsu = 0;
    EpochIndex epoch = 0;
    std::array<DirectionBenchmarks, 2> benchmarks;  // indexed by direction_index()
    Seconds reference_queue = 0.0;                  // Q-hat

    const DirectionBenchmarks& for_direction(Direction d) const {
        return benchmarks[static_cast<std::size_t>(direction_index(d))];
    }
};

// Optional per-axis scaling of the location-speed plane before measuring
// benchmark distances. Off (1,1) reproduces the raw-unit distances.
struct AxisScale {
    double x = 1.0;
    double v = 1.0;
};

double point_benchmark_distance(Meters x, MetersPerSecond v, const DirectionBenchmarks& b,
                                const AxisScale& scale = {});
double line_benchmark_distance(Meters x, MetersPerSecond v, const DirectionBenchmarks& b,
                               const AxisScale& scale = {});

// Nearest-benchmark delivery choice: the point benchmark selects the
// connected RSU, the line benchmark the approached one. Ties and a missing
// next RSU both resolve to the connected RSU.
RsuId select_delivery_rsu(Meters x, MetersPerSecond v, const DirectionBenchmarks& b,
                          RsuId connected, std::optional<RsuId> next,
                          const AxisScale& scale = {});

struct ActionBounds {
    MetersPerSecond v_min = 0.0;
    MetersPerSecond v_max = 1.0;
    Seconds qhat_max = 0.0;   // 0: derive 5 * input_size / C_r per RSU
    Gbit input_size = 0.0;
};

// Raw action layout: per RSU, per direction, six components
// [x-hat, v-hat, alpha, beta, gamma, q-ref]. Direction blocks each carry a
// queue-reference slot; the RSU-level reference queue is their mean.
constexpr int kActionComponentsPerDirection = 6;
inline int action_dimension(int num_rsus) { return num_rsus * 2 * kActionComponentsPerDirection; }

// Squash an unbounded raw vector into valid policy maps: tanh then affine
// into each parameter's range; (alpha, beta) renormalized to unit length,
// gamma anchored so the line crosses the coverage-speed box.
std::vector<PolicyMap> decode_action(const std::vector<double>& raw, const Topology& topo,
                                     const ActionBounds& bounds, EpochIndex epoch);

// Inverse of decode_action on its invertible components (x-hat, v-hat,
// gamma, q-ref); the line-direction slots are filled with zero.
std::vector<double> encode_action(const std::vector<PolicyMap>& maps, const Topology& topo,
                                  const ActionBounds& bounds);

}  // namespace vectwin
