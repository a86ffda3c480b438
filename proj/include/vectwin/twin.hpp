#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "vectwin/mobility.hpp"
#include "vectwin/net_model.hpp"
#include "vectwin/policy_map.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

// Twin-side record of one computing session. The delay and discontinuity
// fields are write-once: unset while the task is in flight, immutable after
// the result-delivery slot.
struct OffloadingEvent {
    SlotIndex gen_slot = 0;
    Meters location = 0.0;
    MetersPerSecond predicted_speed = 0.0;  // signed
    RsuId connected_rsu = 0;
    std::optional<RsuId> delivery_rsu;
    std::optional<Seconds> delay;
    std::optional<bool> discontinuity;

    bool in_flight() const { return !delay.has_value(); }
};

struct EventHandle {
    VehicleId vehicle = 0;
    std::uint64_t seq = 0;
};

// Virtual replica of one vehicle: trajectory window, offloading-event log,
// and the LISP-style routing locators (current RSU, plus the future locator
// held while a migrated delivery is pending).
struct VehicleDigitalTwin {
    VehicleId endpoint_id = 0;
    Direction direction = Direction::forward;
    TrajectoryWindow trajectory;
    std::map<std::uint64_t, OffloadingEvent> events;
    std::uint64_t next_event_seq = 0;
    RsuId current_rloc = 0;
    std::optional<RsuId> future_rloc;
    bool active = true;
};

// X-by-V grid counting one epoch's offloading events under an RSU by
// discretized location and predicted-speed magnitude.
struct VehicleStatusMatrix {
    RsuId rsu = 0;
    EpochIndex epoch = 0;
    int x_levels = 0;
    int v_levels = 0;
    std::vector<double> counts;  // x-major: counts[xi * v_levels + vi]

    double at(int xi, int vi) const { return counts[static_cast<std::size_t>(xi * v_levels + vi)]; }
    double total() const;
};

VehicleStatusMatrix build_status_matrix(const std::vector<OffloadingEvent>& events,
                                        const RsuConfig& rsu, EpochIndex epoch, int x_levels,
                                        int v_levels, MetersPerSecond v_min,
                                        MetersPerSecond v_max);

// Replica of one RSU: demand history (status matrices), resource provision
// history (per-slot queue backlog), and the policy map currently in force.
struct InfrastructureDigitalTwin {
    RsuId rsu = 0;
    GbitPerSecond compute_rate = 0.0;
    std::vector<Seconds> queue_history;
    std::vector<VehicleStatusMatrix> status_matrices;
    std::optional<PolicyMap> policy_map;
};

struct TwinConfig {
    std::size_t window_slots = 10;  // T_N
    int x_levels = 5;
    int v_levels = 5;
    MetersPerSecond v_min = 5.0;
    MetersPerSecond v_max = 25.0;
};

// Owner of all VDTs and IDTs. Mutated only by the engine between slots.
class TwinStore {
  public:
    TwinStore(const Topology& topo, TwinConfig cfg);

    // Ingest one slot of mobility samples; returns vehicles that left the
    // road this slot. Keeps locators consistent with the new positions.
    std::vector<VehicleId> sync(SlotIndex slot, const std::vector<TraceSample>& samples,
                                const MobilitySource& source);

    EventHandle record_offload(VehicleId vehicle, SlotIndex slot, Meters location,
                               MetersPerSecond predicted_speed, RsuId connected);
    void set_delivery(const EventHandle& h, RsuId delivery);
    // Write-once completion; a second write is a contract violation.
    void complete_event(const EventHandle& h, Seconds delay, bool discontinuity);
    const OffloadingEvent& event(const EventHandle& h) const;

    bool has_vdt(VehicleId v) const { return vdts_.contains(v); }
    const VehicleDigitalTwin& vdt(VehicleId v) const;
    const std::map<VehicleId, VehicleDigitalTwin>& vdts() const { return vdts_; }

    InfrastructureDigitalTwin& idt(RsuId r);
    const InfrastructureDigitalTwin& idt(RsuId r) const;
    const std::vector<InfrastructureDigitalTwin>& idts() const { return idts_; }

    void snapshot_provision(RsuId r, Seconds residual_work);
    void publish_policy_map(const PolicyMap& map);

    // Offloading events recorded under RSU r during epoch k.
    std::vector<OffloadingEvent> epoch_events(RsuId r, EpochIndex k) const;
    // Build and store every RSU's status matrix for the finished epoch, then
    // drop completed events that can no longer matter and departed twins.
    void finish_epoch(EpochIndex k);

    std::vector<VehicleId> active_vehicles() const;

    void restore(std::map<VehicleId, VehicleDigitalTwin> vdts,
                 std::vector<InfrastructureDigitalTwin> idts);

  private:
    void refresh_locators(VehicleDigitalTwin& t);

    const Topology* topo_;
    TwinConfig cfg_;
    std::map<VehicleId, VehicleDigitalTwin> vdts_;
    std::vector<InfrastructureDigitalTwin> idts_;
};

}  // namespace vectwin
