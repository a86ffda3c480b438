#include "vectwin/net_model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace vectwin {

namespace {
constexpr double kCoverageTol = 1e-9;
}

Topology::Topology(Meters road_length, std::vector<RsuConfig> rsus, Seconds slot_duration,
                   SlotIndex slots_per_epoch)
    : road_length_(road_length),
      rsus_(std::move(rsus)),
      slot_duration_(slot_duration),
      slots_per_epoch_(slots_per_epoch) {
    if (road_length_ <= 0.0) throw ConfigError("topology: road_length must be positive");
    if (slot_duration_ <= 0.0) throw ConfigError("topology: slot_duration must be positive");
    if (slots_per_epoch_ < 1) throw ConfigError("topology: slots_per_epoch must be >= 1");
    if (rsus_.empty()) throw ConfigError("topology: at least one RSU required");

    const int n = static_cast<int>(rsus_.size());
    Meters expect_lo = 0.0;
    for (int r = 0; r < n; ++r) {
        RsuConfig& c = rsus_[r];
        c.id = r;
        if (std::abs(c.coverage_lo - expect_lo) > kCoverageTol)
            throw ConfigError("topology: RSU " + std::to_string(r) +
                              " coverage does not abut its predecessor (gap or overlap)");
        if (c.coverage_hi <= c.coverage_lo)
            throw ConfigError("topology: RSU " + std::to_string(r) + " has empty coverage");
        if (c.compute_rate <= 0.0)
            throw ConfigError("topology: RSU " + std::to_string(r) + " compute_rate must be positive");
        if (c.uplink_rate <= 0.0)
            throw ConfigError("topology: RSU " + std::to_string(r) + " uplink_rate must be positive");
        if (c.wired_rate_to.size() != rsus_.size())
            throw ConfigError("topology: RSU " + std::to_string(r) + " wired rate table must have one entry per RSU");
        for (int j = 0; j < n; ++j) {
            if (j == r) {
                c.wired_rate_to[j] = std::numeric_limits<double>::infinity();
            } else if (c.wired_rate_to[j] <= 0.0) {
                throw ConfigError("topology: RSU " + std::to_string(r) + " wired rate to " +
                                  std::to_string(j) + " must be positive");
            }
        }
        expect_lo = c.coverage_hi;
    }
    if (std::abs(expect_lo - road_length_) > kCoverageTol)
        throw ConfigError("topology: RSU coverage does not end at road_length");
}

const RsuConfig& Topology::rsu(RsuId r) const {
    if (r < 0 || r >= num_rsus()) throw ContractError("rsu id out of range");
    return rsus_[static_cast<std::size_t>(r)];
}

Seconds Topology::wire_seconds(RsuId r, RsuId j, Gbit size) const {
    if (r == j) return 0.0;
    return size / rsu(r).wired_rate_to[static_cast<std::size_t>(j)];
}

RsuId rsu_at(Meters x, const Topology& topo) {
    if (x < 0.0 || x > topo.road_length())
        throw ContractError("rsu_at: position outside the road segment");
    // Boundary tie-break: x == coverage_hi still belongs to the lower index.
    for (const RsuConfig& c : topo.rsus()) {
        if (x <= c.coverage_hi) return c.id;
    }
    return topo.num_rsus() - 1;  // x == road_length after float noise
}

std::optional<RsuId> next_rsu_of(RsuId r, Direction dir, const Topology& topo) {
    if (r < 0 || r >= topo.num_rsus()) throw ContractError("next_rsu: rsu id out of range");
    const int step = dir == Direction::forward ? 1 : -1;
    const int n = r + step;
    if (n < 0 || n >= topo.num_rsus()) return std::nullopt;
    return n;
}

std::optional<RsuId> next_rsu(Meters x, Direction dir, const Topology& topo) {
    return next_rsu_of(rsu_at(x, topo), dir, topo);
}

std::set<RsuId> eligible_processors(RsuId r, const Topology& topo) {
    if (r < 0 || r >= topo.num_rsus()) throw ContractError("eligible_processors: rsu id out of range");
    std::set<RsuId> out;
    for (int j = r - 1; j <= r + 1; ++j) {
        if (j >= 0 && j < topo.num_rsus()) out.insert(j);
    }
    return out;
}

}  // namespace vectwin
