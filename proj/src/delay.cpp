#include "vectwin/delay.hpp"

#include <algorithm>
#include <cmath>

namespace vectwin {

Seconds EdgeQueue::residual_at(Seconds now) const {
    return std::max(0.0, busy_end_ - now);
}

Seconds EdgeQueue::enqueue(VehicleId vehicle, Seconds work, Seconds arrival) {
    if (work < 0.0) throw ContractError("EdgeQueue: negative work");
    const Seconds t = std::max(arrival, last_arrival_);
    last_arrival_ = t;
    const Seconds wait = std::max(0.0, busy_end_ - t);
    const Seconds u = wait + work;
    busy_end_ = t + u;
    fifo_.emplace_back(vehicle, busy_end_);
    return u;
}

std::vector<VehicleId> EdgeQueue::pop_completed(Seconds now) {
    std::vector<VehicleId> done;
    while (!fifo_.empty() && fifo_.front().second <= now) {
        done.push_back(fifo_.front().first);
        fifo_.pop_front();
    }
    return done;
}

void EdgeQueue::restore(Seconds busy_end, Seconds last_arrival,
                        std::deque<std::pair<VehicleId, Seconds>> fifo) {
    busy_end_ = busy_end;
    last_arrival_ = last_arrival;
    fifo_ = std::move(fifo);
}

Seconds offload_delay(Gbit input_size, RsuId connected, RsuId processor, const Topology& topo) {
    const auto eligible = eligible_processors(connected, topo);
    if (!eligible.contains(processor))
        throw ContractError("offload_delay: processor not eligible for this RSU");
    const Seconds uplink = input_size / topo.rsu(connected).uplink_rate;
    return uplink + topo.wire_seconds(connected, processor, input_size);
}

SlotIndex completion_slot(SlotIndex gen_slot, Seconds offload, Seconds processing,
                          Seconds slot_duration) {
    if (offload < 0.0 || processing < 0.0) throw ContractError("completion_slot: negative delay");
    return gen_slot + static_cast<SlotIndex>(std::ceil((offload + processing) / slot_duration));
}

DeliveryResult delivery_delay(Gbit output_size, RsuId connected, RsuId delivery_choice,
                              RsuId processor, RsuId rsu_at_completion, Seconds e1, Seconds e2,
                              const Topology& topo) {
    DeliveryResult res;
    res.discontinuity = rsu_at_completion != connected && rsu_at_completion != delivery_choice;
    if (res.discontinuity) {
        res.signalling = e1;
    } else if (rsu_at_completion == connected && connected != delivery_choice) {
        res.signalling = e2;
    }
    const Seconds downlink = output_size / topo.rsu(rsu_at_completion).uplink_rate;
    res.delivery = topo.wire_seconds(processor, rsu_at_completion, output_size) + downlink +
                   res.signalling;
    return res;
}

double violation(Seconds total, Seconds deadline, bool discontinuity, double weight) {
    if (total < 0.0) throw ContractError("violation: negative total delay");
    double v = total > deadline ? 1.0 : 0.0;
    if (discontinuity) v += weight;
    return v;
}

}  // namespace vectwin
