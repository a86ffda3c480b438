#include "vectwin/schemes.hpp"

#include <cmath>

namespace vectwin {

std::string scheme_name(const SchemeConfig& s) {
    switch (s.kind) {
        case SchemeKind::dt_matching: return "dt_matching";
        case SchemeKind::dt_only: return "dt_only";
        case SchemeKind::migrate_x: return "migrate_x";
        case SchemeKind::no_coop: return "no_coop";
    }
    return "unknown";
}

SchemeConfig parse_scheme(const std::string& name) {
    SchemeConfig s;
    if (name == "dt_matching") s.kind = SchemeKind::dt_matching;
    else if (name == "dt_only") s.kind = SchemeKind::dt_only;
    else if (name == "migrate_x") s.kind = SchemeKind::migrate_x;
    else if (name == "no_coop") s.kind = SchemeKind::no_coop;
    else throw ConfigError("unknown scheme '" + name + "'");
    return s;
}

bool scheme_uses_ddpg(SchemeKind k) {
    return k == SchemeKind::dt_matching || k == SchemeKind::dt_only;
}

namespace {

// Distance along the travel direction to the exit edge of the current cell.
Meters distance_to_exit(const DecisionInput& in, const Topology& topo) {
    const RsuConfig& cell = topo.rsu(in.connected);
    return in.direction == Direction::forward ? cell.coverage_hi - in.x : in.x - cell.coverage_lo;
}

RsuId delivery_from_map(const DecisionInput& in, const std::vector<PolicyMap>& maps,
                        const AxisScale& scale, SchemeCounters& counters) {
    if (in.connected < 0 || in.connected >= static_cast<int>(maps.size()))
        throw ContractError("decide_slot: no policy map for RSU");
    ++counters.policy_map_lookups;
    const PolicyMap& map = maps[static_cast<std::size_t>(in.connected)];
    return select_delivery_rsu(in.x, std::abs(in.predicted_speed),
                               map.for_direction(in.direction), in.connected, in.next, scale);
}

}  // namespace

std::map<VehicleId, PolicyDecision> decide_slot(
    const SchemeConfig& scheme, const std::vector<DecisionInput>& inputs,
    const std::vector<PolicyMap>& maps, std::span<const Seconds> queue_snapshot,
    Gbit input_size, const Topology& topo, const AxisScale& axis_scale,
    SchemeCounters& counters) {
    std::map<VehicleId, PolicyDecision> out;

    switch (scheme.kind) {
        case SchemeKind::no_coop: {
            for (const DecisionInput& in : inputs)
                out[in.vehicle] = PolicyDecision{in.connected, in.connected, 0, false};
            break;
        }
        case SchemeKind::migrate_x: {
            for (const DecisionInput& in : inputs) {
                RsuId d = in.connected;
                if (in.next.has_value() && distance_to_exit(in, topo) <= scheme.migrate_threshold)
                    d = *in.next;
                out[in.vehicle] = PolicyDecision{in.connected, d, 0, false};
            }
            break;
        }
        case SchemeKind::dt_only: {
            for (const DecisionInput& in : inputs) {
                const RsuId d = delivery_from_map(in, maps, axis_scale, counters);
                out[in.vehicle] = PolicyDecision{in.connected, d, 0, false};
            }
            break;
        }
        case SchemeKind::dt_matching: {
            std::vector<MatchTask> tasks;
            tasks.reserve(inputs.size());
            for (const DecisionInput& in : inputs) {
                const RsuId d = delivery_from_map(in, maps, axis_scale, counters);
                out[in.vehicle] = PolicyDecision{in.connected, d, 0, false};
                tasks.push_back(MatchTask{in.vehicle, in.connected, d});
            }
            if (!tasks.empty()) {
                std::vector<Seconds> qhat(static_cast<std::size_t>(topo.num_rsus()), 0.0);
                for (const PolicyMap& m : maps)
                    qhat[static_cast<std::size_t>(m.rsu)] = m.reference_queue;
                ++counters.matching_runs;
                const MatchResult res =
                    run_matching(tasks, queue_snapshot, qhat, input_size, topo);
                for (auto& [vid, decision] : out) {
                    decision.processing = res.processor.at(vid);
                    decision.proposals = res.proposals.at(vid);
                    decision.fallback = res.fallback.at(vid);
                }
            }
            break;
        }
    }
    return out;
}

}  // namespace vectwin
