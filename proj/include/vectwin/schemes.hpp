#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vectwin/matching.hpp"
#include "vectwin/net_model.hpp"
#include "vectwin/policy_map.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

enum class SchemeKind { dt_matching, dt_only, migrate_x, no_coop };

struct SchemeConfig {
    SchemeKind kind = SchemeKind::dt_matching;
    Meters migrate_threshold = 50.0;  // migrate_x only
};

std::string scheme_name(const SchemeConfig& s);
SchemeConfig parse_scheme(const std::string& name);
bool scheme_uses_ddpg(SchemeKind k);

// Everything a scheme may look at for one offloading vehicle. Positions and
// speeds come from the vehicle's twin; speed is signed.
struct DecisionInput {
    VehicleId vehicle = 0;
    Meters x = 0.0;
    MetersPerSecond predicted_speed = 0.0;
    Direction direction = Direction::forward;
    RsuId connected = 0;
    std::optional<RsuId> next;
};

struct PolicyDecision {
    RsuId processing = 0;  // P_{i,t}
    RsuId delivery = 0;    // D_{i,t}
    int proposals = 0;
    bool fallback = false;
};

// Sanity counters proving the benchmark schemes never consult the learned
// machinery.
struct SchemeCounters {
    long policy_map_lookups = 0;
    long matching_runs = 0;
};

// Decide (P, D) for every vehicle offloading in this slot.
//   dt_matching: nearest benchmark for D, deferred acceptance for P.
//   dt_only:     nearest benchmark for D, P fixed to the connected RSU.
//   migrate_x:   D is the next RSU iff the vehicle is within the threshold
//                of its cell exit, P fixed to the connected RSU.
//   no_coop:     P = D = connected RSU.
std::map<VehicleId, PolicyDecision> decide_slot(
    const SchemeConfig& scheme, const std::vector<DecisionInput>& inputs,
    const std::vector<PolicyMap>& maps, std::span<const Seconds> queue_snapshot,
    Gbit input_size, const Topology& topo, const AxisScale& axis_scale,
    SchemeCounters& counters);

}  // namespace vectwin
