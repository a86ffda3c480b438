#pragma once

#include <optional>
#include <set>
#include <vector>

#include "vectwin/types.hpp"

namespace vectwin {

// Static description of one roadside unit and its edge server.
struct RsuConfig {
    RsuId id = 0;
    Meters coverage_lo = 0.0;
    Meters coverage_hi = 0.0;
    GbitPerSecond compute_rate = 0.0;            // C_r, workload drained per second
    GbitPerSecond uplink_rate = 0.0;             // h_r, vehicle-to-RSU
    std::vector<GbitPerSecond> wired_rate_to;    // W_{r,j}; W_{r,r} = +inf

    Meters cell_length() const { return coverage_hi - coverage_lo; }
};

struct Vehicle {
    VehicleId endpoint_id = 0;
    Direction direction = Direction::forward;
    SlotIndex task_gen_period = 1;  // slots between task generations
    double delay_weight = 0.0;      // w_i in the violation measure
};

struct Task {
    VehicleId vehicle = 0;
    SlotIndex gen_slot = 0;
    Gbit input_size = 0.0;   // H_I
    Gbit output_size = 0.0;  // H_O
    Seconds deadline = 0.0;  // tau
};

// One-dimensional road covered by consecutive RSU cells plus the slot/epoch
// clock. Immutable after construction; validated against gaps/overlaps.
class Topology {
  public:
    Topology(Meters road_length, std::vector<RsuConfig> rsus, Seconds slot_duration,
             SlotIndex slots_per_epoch);

    Meters road_length() const { return road_length_; }
    Seconds slot_duration() const { return slot_duration_; }
    SlotIndex slots_per_epoch() const { return slots_per_epoch_; }
    int num_rsus() const { return static_cast<int>(rsus_.size()); }
    const RsuConfig& rsu(RsuId r) const;
    const std::vector<RsuConfig>& rsus() const { return rsus_; }

    // Wired transfer time of `size` from r to j; zero when r == j.
    Seconds wire_seconds(RsuId r, RsuId j, Gbit size) const;

    Seconds slot_start_time(SlotIndex t) const { return static_cast<Seconds>(t) * slot_duration_; }
    EpochIndex epoch_of_slot(SlotIndex t) const { return t / slots_per_epoch_ + 1; }
    SlotIndex epoch_first_slot(EpochIndex k) const { return (k - 1) * slots_per_epoch_; }

  private:
    Meters road_length_;
    std::vector<RsuConfig> rsus_;
    Seconds slot_duration_;
    SlotIndex slots_per_epoch_;
};

// RSU whose coverage contains x; shared boundary points resolve to the
// lower-indexed RSU.
RsuId rsu_at(Meters x, const Topology& topo);

// Neighbouring RSU in the travel direction; empty in the last cell.
std::optional<RsuId> next_rsu(Meters x, Direction dir, const Topology& topo);
std::optional<RsuId> next_rsu_of(RsuId r, Direction dir, const Topology& topo);

// {r-1, r, r+1} clipped to existing RSUs: the servers allowed to process a
// task offloaded through r.
std::set<RsuId> eligible_processors(RsuId r, const Topology& topo);

}  // namespace vectwin
