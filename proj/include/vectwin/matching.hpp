#pragma once

#include <map>
#include <span>
#include <vector>

#include "vectwin/net_model.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

// One slot's offloaded task as seen by the matcher; the delivery RSU has
// already been fixed by the policy map.
struct MatchTask {
    VehicleId vehicle = 0;
    RsuId connected = 0;  // R_{i,t}
    RsuId delivery = 0;   // D_{i,t}
};

struct MatchResult {
    std::map<VehicleId, RsuId> processor;  // P_{i,t}
    std::map<VehicleId, int> proposals;    // proposals made before settling
    std::map<VehicleId, bool> fallback;    // exhausted every preference
};

// Candidate RSUs for one vehicle, shortest current queue first, ties by
// ascending RSU id.
std::vector<RsuId> vehicle_preference(RsuId connected, std::span<const Seconds> queue_snapshot,
                                      const Topology& topo);

// RSU-side ranking tier: 0 for vehicles under its coverage, 1 for vehicles
// it will deliver results to, 2 for everyone else. Lower is preferred.
int rsu_tier(const MatchTask& task, RsuId rsu);

// Projected backlog if `accepted_inputs` were all queued at a server with
// the given residual work and compute rate.
Seconds project_queue(Seconds residual, std::span<const Gbit> accepted_inputs,
                      GbitPerSecond compute_rate);

// Deferred acceptance over one slot's tasks. Vehicles propose down their
// queue-sorted preference lists; each RSU keeps its best proposals (by tier,
// then vehicle id) while the projected queue stays within the reference
// queue length, rejecting the rest; tentative holds are revocable. A vehicle
// rejected everywhere is assigned its connected RSU.
MatchResult run_matching(const std::vector<MatchTask>& tasks,
                         std::span<const Seconds> queue_snapshot,
                         std::span<const Seconds> reference_queue, Gbit input_size,
                         const Topology& topo);

}  // namespace vectwin
