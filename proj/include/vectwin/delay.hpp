#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "vectwin/net_model.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

// Per-RSU FIFO work queue. Backlog is measured in seconds of residual
// processing time (the compute rate is folded into the per-task work at
// enqueue time) and drains at one second of work per simulated second.
//
// Internally the queue tracks the absolute end of the current busy period,
// so residual work at any instant is max(0, busy_end - now) with no
// accumulated rounding; the offline replay oracle computes the exact same
// expression.
class EdgeQueue {
  public:
    explicit EdgeQueue(RsuId rsu = 0) : rsu_(rsu) {}

    RsuId rsu() const { return rsu_; }

    // Residual work (seconds) still queued at absolute time `now`.
    Seconds residual_at(Seconds now) const;

    // Admit a task needing `work` seconds of processing, arriving at
    // `arrival`. Returns U: wait behind the existing backlog plus the task's
    // own service time. Arrivals are processed in enqueue order; a timestamp
    // earlier than the previous arrival is clamped to it.
    Seconds enqueue(VehicleId vehicle, Seconds work, Seconds arrival);

    // Tasks whose service completed at or before `now`, in FIFO order.
    std::vector<VehicleId> pop_completed(Seconds now);

    std::size_t pending_count() const { return fifo_.size(); }
    Seconds busy_end() const { return busy_end_; }

    void restore(Seconds busy_end, Seconds last_arrival,
                 std::deque<std::pair<VehicleId, Seconds>> fifo);
    const std::deque<std::pair<VehicleId, Seconds>>& fifo() const { return fifo_; }
    Seconds last_arrival() const { return last_arrival_; }

  private:
    RsuId rsu_;
    Seconds busy_end_ = 0.0;
    Seconds last_arrival_ = 0.0;
    std::deque<std::pair<VehicleId, Seconds>> fifo_;  // (vehicle, completion time)
};

// Fully resolved timing record of one computing session.
struct SessionOutcome {
    Seconds offload = 0.0;        // O_{i,t}
    Seconds processing = 0.0;     // U_{i,t}
    Seconds delivery = 0.0;       // result delivery incl. signalling
    Seconds signalling = 0.0;     // E_{i,t}
    Seconds total = 0.0;          // F = O + U + delivery
    SlotIndex completion_slot = 0;
    bool discontinuity = false;
    bool truncated = false;       // vehicle left the road before delivery
    double violation = 0.0;       // I_{i,t}
};

// Task offloading delay: uplink to the connected RSU plus, when the
// processor differs, the wired forward. The wired term vanishes for j == r.
Seconds offload_delay(Gbit input_size, RsuId connected, RsuId processor, const Topology& topo);

// Slot in which processing finishes, given the offload instant's slot.
SlotIndex completion_slot(SlotIndex gen_slot, Seconds offload, Seconds processing, Seconds slot_duration);

struct DeliveryResult {
    Seconds delivery = 0.0;
    Seconds signalling = 0.0;
    bool discontinuity = false;
};

// Result delivery: wired transfer from the processor to the RSU actually
// covering the vehicle at completion, the downlink there, plus signalling:
// E1 when that RSU is neither the offload nor the pre-selected delivery RSU
// (service discontinuity), E2 when the vehicle stayed put but a migration
// had been signalled.
DeliveryResult delivery_delay(Gbit output_size, RsuId connected, RsuId delivery_choice,
                              RsuId processor, RsuId rsu_at_completion, Seconds e1, Seconds e2,
                              const Topology& topo);

// Weighted service requirement violation: 1 for a missed deadline (strict),
// plus the vehicle weight for a discontinuity.
double violation(Seconds total, Seconds deadline, bool discontinuity, double weight);

}  // namespace vectwin
