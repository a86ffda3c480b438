#include "vectwin/policy_map.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace vectwin {

namespace {

constexpr double kDegenerateNorm = 1e-12;

double affine_from_unit(double y, double lo, double hi) {
    return lo + (y + 1.0) * 0.5 * (hi - lo);
}

double unit_from_affine(double value, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return 2.0 * (value - lo) / (hi - lo) - 1.0;
}

// Range of alpha*x + beta*v over the coverage-speed box; extremes sit at
// corners of the box.
std::pair<double, double> line_offset_range(const DirectionBenchmarks& b, const RsuConfig& rsu,
                                            const ActionBounds& bounds) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : {rsu.coverage_lo, rsu.coverage_hi}) {
        for (double v : {bounds.v_min, bounds.v_max}) {
            const double s = b.line_a * x + b.line_b * v;
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    return {lo, hi};
}

Seconds qhat_range(const ActionBounds& bounds, const RsuConfig& rsu) {
    if (bounds.qhat_max > 0.0) return bounds.qhat_max;
    return 5.0 * bounds.input_size / rsu.compute_rate;
}

}  // namespace

double point_benchmark_distance(Meters x, MetersPerSecond v, const DirectionBenchmarks& b,
                                const AxisScale& scale) {
    return std::hypot((x - b.point_x) / scale.x, (v - b.point_v) / scale.v);
}

double line_benchmark_distance(Meters x, MetersPerSecond v, const DirectionBenchmarks& b,
                               const AxisScale& scale) {
    const double norm = std::hypot(b.line_a * scale.x, b.line_b * scale.v);
    if (norm < kDegenerateNorm)
        throw ContractError("line benchmark degenerate: alpha = beta = 0");
    return std::abs(b.line_a * x + b.line_b * v + b.line_c) / norm;
}

RsuId select_delivery_rsu(Meters x, MetersPerSecond v, const DirectionBenchmarks& b,
                          RsuId connected, std::optional<RsuId> next, const AxisScale& scale) {
    if (!next.has_value()) return connected;
    const double d_point = point_benchmark_distance(x, v, b, scale);
    const double d_line = line_benchmark_distance(x, v, b, scale);
    return d_line < d_point ? *next : connected;
}

std::vector<PolicyMap> decode_action(const std::vector<double>& raw, const Topology& topo,
                                     const ActionBounds& bounds, EpochIndex epoch) {
    const int expect = action_dimension(topo.num_rsus());
    if (static_cast<int>(raw.size()) != expect)
        throw ContractError("decode_action: raw vector length mismatch");

    std::vector<PolicyMap> maps;
    maps.reserve(static_cast<std::size_t>(topo.num_rsus()));
    std::size_t at = 0;
    for (const RsuConfig& rsu : topo.rsus()) {
        PolicyMap map;
        map.rsu = rsu.id;
        map.epoch = epoch;
        const Seconds qmax = qhat_range(bounds, rsu);
        double qsum = 0.0;
        for (int d = 0; d < 2; ++d) {
            DirectionBenchmarks& bm = map.benchmarks[static_cast<std::size_t>(d)];
            bm.point_x = affine_from_unit(std::tanh(raw[at + 0]), rsu.coverage_lo, rsu.coverage_hi);
            bm.point_v = affine_from_unit(std::tanh(raw[at + 1]), bounds.v_min, bounds.v_max);
            const double a0 = std::tanh(raw[at + 2]);
            const double b0 = std::tanh(raw[at + 3]);
            const double norm = std::hypot(a0, b0);
            if (norm < kDegenerateNorm) {
                bm.line_a = 0.0;
                bm.line_b = 1.0;
            } else {
                bm.line_a = a0 / norm;
                bm.line_b = b0 / norm;
            }
            const auto [s_lo, s_hi] = line_offset_range(bm, rsu, bounds);
            bm.line_c = -affine_from_unit(std::tanh(raw[at + 4]), s_lo, s_hi);
            qsum += affine_from_unit(std::tanh(raw[at + 5]), 0.0, qmax);
            at += kActionComponentsPerDirection;
        }
        map.reference_queue = qsum * 0.5;
        maps.push_back(map);
    }
    return maps;
}

std::vector<double> encode_action(const std::vector<PolicyMap>& maps, const Topology& topo,
                                  const ActionBounds& bounds) {
    if (static_cast<int>(maps.size()) != topo.num_rsus())
        throw ContractError("encode_action: one map per RSU required");
    std::vector<double> raw(static_cast<std::size_t>(action_dimension(topo.num_rsus())), 0.0);
    std::size_t at = 0;
    for (const RsuConfig& rsu : topo.rsus()) {
        const PolicyMap& map = maps[static_cast<std::size_t>(rsu.id)];
        const Seconds qmax = qhat_range(bounds, rsu);
        for (int d = 0; d < 2; ++d) {
            const DirectionBenchmarks& bm = map.benchmarks[static_cast<std::size_t>(d)];
            raw[at + 0] = std::atanh(unit_from_affine(bm.point_x, rsu.coverage_lo, rsu.coverage_hi));
            raw[at + 1] = std::atanh(unit_from_affine(bm.point_v, bounds.v_min, bounds.v_max));
            raw[at + 2] = 0.0;  // line direction is not invertible past normalization
            raw[at + 3] = 0.0;
            const auto [s_lo, s_hi] = line_offset_range(bm, rsu, bounds);
            raw[at + 4] = std::atanh(unit_from_affine(-bm.line_c, s_lo, s_hi));
            raw[at + 5] = std::atanh(unit_from_affine(map.reference_queue, 0.0, qmax));
            at += kActionComponentsPerDirection;
        }
    }
    return raw;
}

}  // namespace vectwin
