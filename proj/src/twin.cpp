#include "vectwin/twin.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vectwin {

double VehicleStatusMatrix::total() const {
    double s = 0.0;
    for (double c : counts) s += c;
    return s;
}

VehicleStatusMatrix build_status_matrix(const std::vector<OffloadingEvent>& events,
                                        const RsuConfig& rsu, EpochIndex epoch, int x_levels,
                                        int v_levels, MetersPerSecond v_min,
                                        MetersPerSecond v_max) {
    if (x_levels < 1 || v_levels < 1)
        throw ContractError("status matrix: levels must be positive");
    VehicleStatusMatrix m;
    m.rsu = rsu.id;
    m.epoch = epoch;
    m.x_levels = x_levels;
    m.v_levels = v_levels;
    m.counts.assign(static_cast<std::size_t>(x_levels * v_levels), 0.0);

    const double cell = rsu.cell_length();
    const double span = v_max - v_min;
    for (const OffloadingEvent& e : events) {
        int xi = static_cast<int>(std::floor((e.location - rsu.coverage_lo) / cell *
                                             static_cast<double>(x_levels)));
        xi = std::clamp(xi, 0, x_levels - 1);
        const double v = std::abs(e.predicted_speed);
        int vi = static_cast<int>(std::floor((v - v_min) / span * static_cast<double>(v_levels)));
        vi = std::clamp(vi, 0, v_levels - 1);
        m.counts[static_cast<std::size_t>(xi * v_levels + vi)] += 1.0;
    }
    return m;
}

TwinStore::TwinStore(const Topology& topo, TwinConfig cfg) : topo_(&topo), cfg_(cfg) {
    idts_.reserve(static_cast<std::size_t>(topo.num_rsus()));
    for (const RsuConfig& r : topo.rsus()) {
        InfrastructureDigitalTwin idt;
        idt.rsu = r.id;
        idt.compute_rate = r.compute_rate;
        idts_.push_back(std::move(idt));
    }
}

void TwinStore::refresh_locators(VehicleDigitalTwin& t) {
    if (t.trajectory.empty()) return;
    t.current_rloc = rsu_at(t.trajectory.latest().position, *topo_);
    t.future_rloc.reset();
    // Latest in-flight event whose delivery RSU differs from the current one
    // still needs a forward locator.
    for (auto it = t.events.rbegin(); it != t.events.rend(); ++it) {
        const OffloadingEvent& e = it->second;
        if (e.in_flight() && e.delivery_rsu.has_value() && *e.delivery_rsu != t.current_rloc) {
            t.future_rloc = e.delivery_rsu;
            break;
        }
    }
}

std::vector<VehicleId> TwinStore::sync(SlotIndex slot, const std::vector<TraceSample>& samples,
                                       const MobilitySource& source) {
    std::set<VehicleId> present;
    for (const TraceSample& s : samples) {
        present.insert(s.vehicle);
        auto it = vdts_.find(s.vehicle);
        if (it == vdts_.end()) {
            VehicleDigitalTwin t;
            t.endpoint_id = s.vehicle;
            t.direction = source.direction_of(s.vehicle);
            t.trajectory = TrajectoryWindow(cfg_.window_slots);
            it = vdts_.emplace(s.vehicle, std::move(t)).first;
        }
        it->second.trajectory.push(s);
        it->second.active = true;
        refresh_locators(it->second);
    }

    std::vector<VehicleId> departed;
    for (auto& [vid, t] : vdts_) {
        if (t.active && !present.contains(vid)) {
            t.active = false;
            departed.push_back(vid);
        }
    }
    (void)slot;
    return departed;
}

EventHandle TwinStore::record_offload(VehicleId vehicle, SlotIndex slot, Meters location,
                                      MetersPerSecond predicted_speed, RsuId connected) {
    auto it = vdts_.find(vehicle);
    if (it == vdts_.end() || !it->second.active)
        throw ContractError("record_offload: vehicle has no active twin");
    OffloadingEvent e;
    e.gen_slot = slot;
    e.location = location;
    e.predicted_speed = predicted_speed;
    e.connected_rsu = connected;
    const std::uint64_t seq = it->second.next_event_seq++;
    it->second.events.emplace(seq, std::move(e));
    return EventHandle{vehicle, seq};
}

void TwinStore::set_delivery(const EventHandle& h, RsuId delivery) {
    auto it = vdts_.find(h.vehicle);
    if (it == vdts_.end()) throw ContractError("set_delivery: unknown vehicle");
    auto ev = it->second.events.find(h.seq);
    if (ev == it->second.events.end()) throw ContractError("set_delivery: unknown event");
    if (!ev->second.in_flight()) throw ContractError("set_delivery: event already completed");
    ev->second.delivery_rsu = delivery;
    refresh_locators(it->second);
}

void TwinStore::complete_event(const EventHandle& h, Seconds delay, bool discontinuity) {
    auto it = vdts_.find(h.vehicle);
    if (it == vdts_.end()) throw ContractError("complete_event: unknown vehicle");
    auto ev = it->second.events.find(h.seq);
    if (ev == it->second.events.end()) throw ContractError("complete_event: unknown event");
    if (!ev->second.in_flight())
        throw ContractError("complete_event: event already completed (write-once)");
    ev->second.delay = delay;
    ev->second.discontinuity = discontinuity;
    refresh_locators(it->second);
}

const OffloadingEvent& TwinStore::event(const EventHandle& h) const {
    auto it = vdts_.find(h.vehicle);
    if (it == vdts_.end()) throw ContractError("event: unknown vehicle");
    auto ev = it->second.events.find(h.seq);
    if (ev == it->second.events.end()) throw ContractError("event: unknown event");
    return ev->second;
}

const VehicleDigitalTwin& TwinStore::vdt(VehicleId v) const {
    auto it = vdts_.find(v);
    if (it == vdts_.end()) throw ContractError("vdt: unknown vehicle " + std::to_string(v));
    return it->second;
}

InfrastructureDigitalTwin& TwinStore::idt(RsuId r) {
    if (r < 0 || r >= static_cast<int>(idts_.size())) throw ContractError("idt: bad rsu id");
    return idts_[static_cast<std::size_t>(r)];
}

const InfrastructureDigitalTwin& TwinStore::idt(RsuId r) const {
    if (r < 0 || r >= static_cast<int>(idts_.size())) throw ContractError("idt: bad rsu id");
    return idts_[static_cast<std::size_t>(r)];
}

void TwinStore::snapshot_provision(RsuId r, Seconds residual_work) {
    idt(r).queue_history.push_back(residual_work);
}

void TwinStore::publish_policy_map(const PolicyMap& map) {
    idt(map.rsu).policy_map = map;
}

std::vector<OffloadingEvent> TwinStore::epoch_events(RsuId r, EpochIndex k) const {
    std::vector<OffloadingEvent> out;
    for (const auto& [vid, t] : vdts_) {
        for (const auto& [seq, e] : t.events) {
            if (e.connected_rsu == r && topo_->epoch_of_slot(e.gen_slot) == k) out.push_back(e);
        }
    }
    return out;
}

void TwinStore::finish_epoch(EpochIndex k) {
    for (InfrastructureDigitalTwin& idt : idts_) {
        idt.status_matrices.push_back(build_status_matrix(epoch_events(idt.rsu, k),
                                                          topo_->rsu(idt.rsu), k, cfg_.x_levels,
                                                          cfg_.v_levels, cfg_.v_min, cfg_.v_max));
    }
    // Completed events from this epoch or earlier have been folded into the
    // matrices; drop them, then drop departed twins with nothing in flight.
    for (auto it = vdts_.begin(); it != vdts_.end();) {
        auto& events = it->second.events;
        for (auto ev = events.begin(); ev != events.end();) {
            if (!ev->second.in_flight() && topo_->epoch_of_slot(ev->second.gen_slot) <= k)
                ev = events.erase(ev);
            else
                ++ev;
        }
        if (!it->second.active && events.empty())
            it = vdts_.erase(it);
        else
            ++it;
    }
}

std::vector<VehicleId> TwinStore::active_vehicles() const {
    std::vector<VehicleId> out;
    for (const auto& [vid, t] : vdts_)
        if (t.active) out.push_back(vid);
    return out;
}

void TwinStore::restore(std::map<VehicleId, VehicleDigitalTwin> vdts,
                        std::vector<InfrastructureDigitalTwin> idts) {
    vdts_ = std::move(vdts);
    idts_ = std::move(idts);
}

}  // namespace vectwin
