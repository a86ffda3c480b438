#include "vectwin/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vectwin/rng.hpp"

namespace vectwin {

using nlohmann::json;

Engine::Engine(Topology topo, EngineConfig cfg, std::unique_ptr<MobilitySource> mobility,
               DdpgAgent* agent, MetricsSink* sink)
    : topo_(std::move(topo)),
      cfg_(cfg),
      mobility_(std::move(mobility)),
      agent_(agent),
      sink_(sink),
      twins_(topo_, cfg.twin),
      predictor_(topo_.slot_duration()) {
    if (!mobility_) throw ContractError("engine: mobility source required");
    if (scheme_uses_ddpg(cfg_.scheme.kind) && !agent_)
        throw ContractError("engine: scheme requires a DDPG agent");
    if (cfg_.sync_period < 1) throw ConfigError("engine: sync_period must be >= 1");
    if (topo_.slot_duration() >= cfg_.task.deadline)
        throw ConfigError("engine: slot duration must be shorter than the task deadline");
    for (const RsuConfig& r : topo_.rsus()) queues_.emplace_back(r.id);
    offload_counts_.assign(static_cast<std::size_t>(topo_.num_rsus()), {});
}

int Engine::state_dim() const {
    return state_dimension(topo_.num_rsus(), cfg_.count_window, cfg_.twin.x_levels,
                           cfg_.twin.v_levels);
}

int Engine::action_dim() const { return action_dimension(topo_.num_rsus()); }

SlotIndex Engine::vehicle_phase(VehicleId v) const {
    const std::uint64_t h = rng::splitmix64(rng::stream_seed(cfg_.seed, "phase") ^ v);
    return static_cast<SlotIndex>(h % static_cast<std::uint64_t>(cfg_.task.gen_period));
}

const Vehicle& Engine::vehicle_record(VehicleId v) {
    auto it = vehicles_.find(v);
    if (it == vehicles_.end()) {
        Vehicle veh;
        veh.endpoint_id = v;
        veh.direction = mobility_->direction_of(v);
        veh.task_gen_period = cfg_.task.gen_period;
        veh.delay_weight = cfg_.task.delay_weight;
        it = vehicles_.emplace(v, veh).first;
    }
    return it->second;
}

std::vector<Seconds> Engine::queue_snapshot(Seconds now) const {
    std::vector<Seconds> q;
    q.reserve(queues_.size());
    for (const EdgeQueue& eq : queues_) q.push_back(eq.residual_at(now));
    return q;
}

StateSnapshot Engine::make_state_snapshot(SlotIndex t) const {
    StateSnapshot s;
    const Seconds now = topo_.slot_start_time(t);
    for (const RsuConfig& r : topo_.rsus()) {
        s.compute_rates.push_back(r.compute_rate);
        s.uplink_rates.push_back(r.uplink_rate);
        s.queue_lengths.push_back(queues_[static_cast<std::size_t>(r.id)].residual_at(now));
    }
    s.offload_counts = offload_counts_;
    bool have_matrices = true;
    for (const auto& idt : twins_.idts())
        if (idt.status_matrices.empty()) have_matrices = false;
    if (have_matrices)
        for (const auto& idt : twins_.idts()) s.prev_matrices.push_back(idt.status_matrices.back());
    return s;
}

RunSummary Engine::run(EpochIndex total_epochs,
                       const std::function<void(EpochIndex)>& on_boundary) {
    const SlotIndex K = topo_.slots_per_epoch();
    while (epoch_cursor_ <= total_epochs) {
        const EpochIndex k = epoch_cursor_;
        epoch_boundary(k, /*act=*/true);
        for (SlotIndex i = 0; i < K; ++i) {
            step_slot(next_slot_, /*generate=*/true);
            ++next_slot_;
        }
        ++epoch_cursor_;
        // Wrap up epoch k: matrices, next state, finalization, learning.
        epoch_boundary(k + 1, /*act=*/false);
        if (on_boundary) on_boundary(k);
    }

    // Drain: no new tasks, but every in-flight session must resolve so the
    // metrics account for each generated task exactly once.
    while (!sessions_.empty()) {
        step_slot(next_slot_, /*generate=*/false);
        ++next_slot_;
        finalize_ready();
    }
    finalize_ready();

    RunSummary sum;
    sum.epochs = cost_epochs_;
    sum.tasks = static_cast<int>(total_tasks_);
    sum.satisfied = static_cast<int>(total_satisfied_);
    sum.discontinuities = static_cast<int>(total_discontinuities_);
    sum.mean_cost = cost_epochs_ > 0 ? cost_sum_ / static_cast<double>(cost_epochs_) : 0.0;
    sum.satisfaction =
        total_tasks_ > 0 ? static_cast<double>(total_satisfied_) / static_cast<double>(total_tasks_)
                         : 1.0;
    return sum;
}

void Engine::epoch_boundary(EpochIndex k, bool act) {
    const bool learning = scheme_uses_ddpg(cfg_.scheme.kind);
    if (act) {
        // Start of epoch k: observe the state and publish this epoch's maps.
        auto& rec = epochs_[k];
        rec.epoch = k;
        rec.slots.assign(static_cast<std::size_t>(topo_.slots_per_epoch()), {0.0, 0});
        rec.critic_loss = pending_critic_loss_;
        rec.updated = pending_updated_;
        pending_critic_loss_ = 0.0;
        pending_updated_ = false;
        if (learning) {
            if (state_cache_.empty())
                state_cache_ = encode_state(make_state_snapshot(next_slot_), topo_.num_rsus(),
                                            cfg_.count_window, cfg_.twin.x_levels,
                                            cfg_.twin.v_levels, cfg_.state_norm);
            rec.state = state_cache_;
            rec.noise_sigma = cfg_.training ? agent_->noise().sigma() : 0.0;
            rec.action = agent_->act(state_cache_, cfg_.training);
            rec.has_action = cfg_.training;
            const ActionBounds bounds{cfg_.twin.v_min, cfg_.twin.v_max, cfg_.qhat_max,
                                      cfg_.task.input_size};
            maps_ = decode_action(rec.action, topo_, bounds, k);
            for (const PolicyMap& m : maps_) twins_.publish_policy_map(m);
            if (sink_) sink_->on_policy_maps(k, maps_);
        }
        return;
    }

    // End of epoch k-1.
    const EpochIndex done = k - 1;
    twins_.finish_epoch(done);
    {
        auto it = epochs_.find(done);
        if (it == epochs_.end()) throw ContractError("engine: epoch record missing at wrap-up");
        it->second.slots_complete = true;
        if (learning) {
            state_cache_ = encode_state(make_state_snapshot(next_slot_), topo_.num_rsus(),
                                        cfg_.count_window, cfg_.twin.x_levels, cfg_.twin.v_levels,
                                        cfg_.state_norm);
            if (it->second.has_action) {
                it->second.next_state = state_cache_;
                it->second.has_next = true;
            }
        }
    }
    finalize_ready();
    if (cfg_.training && agent_) {
        const auto stats = agent_->update();
        pending_critic_loss_ = stats.critic_loss;
        pending_updated_ = stats.updated;
        agent_->decay_noise();
    }
}

void Engine::step_slot(SlotIndex t, bool generate) {
    const Seconds now = topo_.slot_start_time(t);

    // (1) Mobility advance and twin synchronization.
    const std::vector<TraceSample> samples = mobility_->advance(t);
    std::set<VehicleId> present;
    for (const TraceSample& s : samples) present.insert(s.vehicle);
    std::vector<VehicleId> exited;
    for (const auto& [vid, x] : positions_)
        if (!present.contains(vid)) exited.push_back(vid);
    for (VehicleId vid : exited) positions_.erase(vid);
    for (const TraceSample& s : samples) positions_[s.vehicle] = s.position;
    if (t % cfg_.sync_period == 0) twins_.sync(t, samples, *mobility_);

    // Sessions of departed vehicles can never deliver: truncate them now.
    if (!exited.empty()) {
        std::set<VehicleId> gone(exited.begin(), exited.end());
        std::vector<Session> keep;
        keep.reserve(sessions_.size());
        for (const Session& s : sessions_) {
            if (gone.contains(s.task.vehicle))
                resolve_session(s, t, /*vehicle_present=*/false);
            else
                keep.push_back(s);
        }
        sessions_ = std::move(keep);
    }

    // (2) Deliveries whose completion slot arrived.
    {
        std::vector<Session> keep;
        keep.reserve(sessions_.size());
        for (const Session& s : sessions_) {
            if (s.completion_slot <= t)
                resolve_session(s, t, /*vehicle_present=*/true);
            else
                keep.push_back(s);
        }
        sessions_ = std::move(keep);
    }

    // (3) Task generation and (4) scheme decisions.
    std::vector<int> slot_counts(static_cast<std::size_t>(topo_.num_rsus()), 0);
    if (generate) {
        std::vector<DecisionInput> inputs;
        std::vector<EventHandle> handles;
        std::vector<Task> tasks;
        for (const TraceSample& s : samples) {
            const Vehicle& veh = vehicle_record(s.vehicle);
            if (t % veh.task_gen_period != vehicle_phase(s.vehicle)) continue;
            if (!twins_.has_vdt(s.vehicle)) continue;
            const VehicleDigitalTwin& vdt = twins_.vdt(s.vehicle);
            if (!vdt.active || vdt.trajectory.empty()) continue;

            Task task;
            task.vehicle = s.vehicle;
            task.gen_slot = t;
            task.input_size = cfg_.task.input_size;
            task.output_size = cfg_.task.output_size;
            task.deadline = cfg_.task.deadline;

            const Meters x = vdt.trajectory.latest().position;
            const MetersPerSecond v_pred = predictor_.predict(vdt.trajectory, task.deadline);
            const RsuId connected = vdt.current_rloc;
            handles.push_back(twins_.record_offload(s.vehicle, t, x, v_pred, connected));
            tasks.push_back(task);
            DecisionInput in;
            in.vehicle = s.vehicle;
            in.x = x;
            in.predicted_speed = v_pred;
            in.direction = vdt.direction;
            in.connected = connected;
            in.next = next_rsu_of(connected, vdt.direction, topo_);
            inputs.push_back(in);
        }

        if (!inputs.empty()) {
            const std::vector<Seconds> qsnap = queue_snapshot(now);
            const auto decisions = decide_slot(cfg_.scheme, inputs, maps_, qsnap,
                                               cfg_.task.input_size, topo_, cfg_.axis_scale,
                                               counters_);

            // (5) Enqueue in arrival order (ties by vehicle id).
            struct Pending {
                std::size_t input_index;
                Seconds arrival;
            };
            std::vector<Pending> order;
            std::vector<Seconds> offloads(inputs.size());
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                const PolicyDecision& d = decisions.at(inputs[i].vehicle);
                offloads[i] = offload_delay(tasks[i].input_size, inputs[i].connected,
                                            d.processing, topo_);
                order.push_back(Pending{i, now + offloads[i]});
            }
            std::stable_sort(order.begin(), order.end(), [&](const Pending& a, const Pending& b) {
                if (a.arrival != b.arrival) return a.arrival < b.arrival;
                return inputs[a.input_index].vehicle < inputs[b.input_index].vehicle;
            });

            auto& rec = epochs_.at(topo_.epoch_of_slot(t));
            const std::size_t slot_in_epoch =
                static_cast<std::size_t>(t - topo_.epoch_first_slot(topo_.epoch_of_slot(t)));
            for (const Pending& p : order) {
                const DecisionInput& in = inputs[p.input_index];
                const PolicyDecision& d = decisions.at(in.vehicle);
                EdgeQueue& q = queues_[static_cast<std::size_t>(d.processing)];
                const Task& task = tasks[p.input_index];
                const Seconds work = task.input_size / topo_.rsu(d.processing).compute_rate;
                const Seconds u = q.enqueue(in.vehicle, work, p.arrival);

                Session sess;
                sess.task = task;
                sess.epoch = topo_.epoch_of_slot(t);
                sess.connected = in.connected;
                sess.delivery = d.delivery;
                sess.processing = d.processing;
                sess.proposals = d.proposals;
                sess.fallback = d.fallback;
                sess.delay_weight = vehicle_record(in.vehicle).delay_weight;
                sess.x = in.x;
                sess.predicted_speed = in.predicted_speed;
                sess.offload = offloads[p.input_index];
                sess.processing_delay = u;
                sess.completion_slot =
                    completion_slot(t, sess.offload, u, topo_.slot_duration());
                sess.event_seq = handles[p.input_index].seq;
                sessions_.push_back(sess);

                twins_.set_delivery(handles[p.input_index], d.delivery);
                ++slot_counts[static_cast<std::size_t>(in.connected)];
            }
            rec.slots[slot_in_epoch].second = static_cast<int>(inputs.size());
            rec.open_tasks += static_cast<int>(inputs.size());
            rec.tasks += static_cast<int>(inputs.size());
            total_tasks_ += static_cast<long>(inputs.size());
        }
    }

    // Trailing offload-count window for the state encoding.
    for (std::size_t r = 0; r < offload_counts_.size(); ++r) {
        auto& w = offload_counts_[r];
        w.push_back(static_cast<double>(slot_counts[r]));
        while (w.size() > static_cast<std::size_t>(cfg_.count_window)) w.erase(w.begin());
    }

    // (6) Provision snapshots: committed backlog as of this slot.
    for (const RsuConfig& r : topo_.rsus()) {
        EdgeQueue& q = queues_[static_cast<std::size_t>(r.id)];
        q.pop_completed(now);
        twins_.snapshot_provision(r.id, q.residual_at(now));
    }
}

void Engine::resolve_session(const Session& s, SlotIndex now, bool vehicle_present) {
    SessionOutcome o;
    o.offload = s.offload;
    o.processing = s.processing_delay;
    o.completion_slot = s.completion_slot;

    if (vehicle_present) {
        const Meters x = positions_.at(s.task.vehicle);
        const RsuId here = rsu_at(x, topo_);
        const DeliveryResult d =
            delivery_delay(s.task.output_size, s.connected, s.delivery, s.processing, here,
                           cfg_.penalties.e1, cfg_.penalties.e2, topo_);
        o.delivery = d.delivery;
        o.signalling = d.signalling;
        o.discontinuity = d.discontinuity;
        o.total = s.offload + s.processing_delay + d.delivery;
    } else {
        // The vehicle left the road mid-session: no delivery RSU exists, so
        // the session ends at the exit slot with the discontinuity penalty.
        o.discontinuity = true;
        o.truncated = true;
        o.signalling = cfg_.penalties.e1;
        o.total = static_cast<Seconds>(now - s.task.gen_slot) * topo_.slot_duration() +
                  cfg_.penalties.e1;
        o.delivery = o.total - o.offload - o.processing;
    }
    o.violation = violation(o.total, s.task.deadline, o.discontinuity, s.delay_weight);

    const EventHandle handle{s.task.vehicle, s.event_seq};
    twins_.complete_event(handle, o.total, o.discontinuity);
    if (sink_) sink_->on_event(s.task.vehicle, twins_.event(handle));

    auto it = epochs_.find(s.epoch);
    if (it == epochs_.end()) throw ContractError("engine: resolving session of unknown epoch");
    EpochRecord& rec = it->second;
    rec.slots[static_cast<std::size_t>(s.task.gen_slot -
                                       topo_.epoch_first_slot(s.epoch))].first += o.violation;
    --rec.open_tasks;
    const bool satisfied = !o.truncated && o.total <= s.task.deadline;
    if (satisfied) {
        ++rec.satisfied;
        ++total_satisfied_;
    }
    if (o.discontinuity) {
        ++rec.discontinuities;
        ++total_discontinuities_;
    }

    if (sink_) {
        TaskRow row;
        row.epoch = s.epoch;
        row.gen_slot = s.task.gen_slot;
        row.vehicle = s.task.vehicle;
        row.x = s.x;
        row.predicted_speed = s.predicted_speed;
        row.connected = s.connected;
        row.delivery = s.delivery;
        row.processing = s.processing;
        row.proposals = s.proposals;
        row.fallback = s.fallback;
        row.offload = o.offload;
        row.processing_delay = o.processing;
        row.delivery_delay = o.delivery;
        row.signalling = o.signalling;
        row.total = o.total;
        row.completion_slot = o.completion_slot;
        row.resolved_slot = now;
        row.discontinuity = o.discontinuity;
        row.truncated = o.truncated;
        row.violation = o.violation;
        sink_->on_task(row);
    }
}

void Engine::finalize_ready() {
    for (;;) {
        auto it = epochs_.find(finalize_cursor_);
        if (it == epochs_.end()) break;
        EpochRecord& rec = it->second;
        if (!rec.slots_complete || rec.open_tasks > 0) break;

        const double cost = epoch_cost(rec.slots);
        cost_sum_ += cost;
        ++cost_epochs_;

        if (sink_) {
            EpochRow row;
            row.epoch = rec.epoch;
            row.cost = cost;
            row.tasks = rec.tasks;
            row.satisfied = rec.satisfied;
            row.satisfaction =
                rec.tasks > 0 ? static_cast<double>(rec.satisfied) / rec.tasks : 1.0;
            row.discontinuities = rec.discontinuities;
            row.noise_sigma = rec.noise_sigma;
            row.critic_loss = rec.critic_loss;
            row.updated = rec.updated;
            sink_->on_epoch(row);
        }
        if (cfg_.training && agent_ && rec.has_action && rec.has_next)
            agent_->store(Transition{std::move(rec.state), std::move(rec.action), cost,
                                     std::move(rec.next_state)});
        epochs_.erase(it);
        ++finalize_cursor_;
    }
}

// ---- checkpoint serialization ----

namespace {

json window_to_json(const TrajectoryWindow& w) {
    json arr = json::array();
    for (const TraceSample& s : w.samples())
        arr.push_back({{"t", s.slot}, {"v", s.vehicle}, {"x", s.position}, {"s", s.speed}});
    return arr;
}

TrajectoryWindow window_from_json(const json& j, std::size_t capacity) {
    TrajectoryWindow w(capacity);
    for (const auto& sj : j) {
        TraceSample s;
        s.slot = sj.at("t").get<SlotIndex>();
        s.vehicle = sj.at("v").get<VehicleId>();
        s.position = sj.at("x").get<double>();
        s.speed = sj.at("s").get<double>();
        w.push(s);
    }
    return w;
}

json matrix_to_json(const VehicleStatusMatrix& m) {
    return {{"rsu", m.rsu}, {"epoch", m.epoch}, {"x", m.x_levels}, {"v", m.v_levels},
            {"counts", m.counts}};
}

VehicleStatusMatrix matrix_from_json(const json& j) {
    VehicleStatusMatrix m;
    m.rsu = j.at("rsu").get<RsuId>();
    m.epoch = j.at("epoch").get<EpochIndex>();
    m.x_levels = j.at("x").get<int>();
    m.v_levels = j.at("v").get<int>();
    m.counts = j.at("counts").get<std::vector<double>>();
    return m;
}

json benchmarks_to_json(const DirectionBenchmarks& b) {
    return {{"px", b.point_x}, {"pv", b.point_v}, {"a", b.line_a}, {"b", b.line_b},
            {"c", b.line_c}};
}

DirectionBenchmarks benchmarks_from_json(const json& j) {
    DirectionBenchmarks b;
    b.point_x = j.at("px").get<double>();
    b.point_v = j.at("pv").get<double>();
    b.line_a = j.at("a").get<double>();
    b.line_b = j.at("b").get<double>();
    b.line_c = j.at("c").get<double>();
    return b;
}

json map_to_json(const PolicyMap& m) {
    return {{"rsu", m.rsu},
            {"epoch", m.epoch},
            {"fw", benchmarks_to_json(m.benchmarks[0])},
            {"bw", benchmarks_to_json(m.benchmarks[1])},
            {"qref", m.reference_queue}};
}

PolicyMap map_from_json(const json& j) {
    PolicyMap m;
    m.rsu = j.at("rsu").get<RsuId>();
    m.epoch = j.at("epoch").get<EpochIndex>();
    m.benchmarks[0] = benchmarks_from_json(j.at("fw"));
    m.benchmarks[1] = benchmarks_from_json(j.at("bw"));
    m.reference_queue = j.at("qref").get<double>();
    return m;
}

}  // namespace

json Engine::save_state() const {
    json j;
    j["next_slot"] = next_slot_;
    j["epoch_cursor"] = epoch_cursor_;
    j["finalize_cursor"] = finalize_cursor_;
    j["state_cache"] = state_cache_;
    j["pending_critic_loss"] = pending_critic_loss_;
    j["pending_updated"] = pending_updated_;

    json queues = json::array();
    for (const EdgeQueue& q : queues_) {
        json fifo = json::array();
        for (const auto& [vid, done] : q.fifo()) fifo.push_back({{"v", vid}, {"t", done}});
        queues.push_back({{"busy_end", q.busy_end()},
                          {"last_arrival", q.last_arrival()},
                          {"fifo", std::move(fifo)}});
    }
    j["queues"] = std::move(queues);

    json positions = json::array();
    for (const auto& [vid, x] : positions_) positions.push_back({{"v", vid}, {"x", x}});
    j["positions"] = std::move(positions);

    json sessions = json::array();
    for (const Session& s : sessions_) {
        sessions.push_back({{"vehicle", s.task.vehicle},
                            {"gen_slot", s.task.gen_slot},
                            {"input_size", s.task.input_size},
                            {"output_size", s.task.output_size},
                            {"deadline", s.task.deadline},
                            {"weight", s.delay_weight},
                            {"epoch", s.epoch},
                            {"connected", s.connected},
                            {"delivery", s.delivery},
                            {"processing", s.processing},
                            {"proposals", s.proposals},
                            {"fallback", s.fallback},
                            {"x", s.x},
                            {"v_pred", s.predicted_speed},
                            {"offload", s.offload},
                            {"queue", s.processing_delay},
                            {"completion", s.completion_slot},
                            {"event", s.event_seq}});
    }
    j["sessions"] = std::move(sessions);

    json epochs = json::array();
    for (const auto& [k, rec] : epochs_) {
        json slots = json::array();
        for (const auto& [viol, count] : rec.slots) slots.push_back({{"i", viol}, {"n", count}});
        epochs.push_back({{"epoch", rec.epoch},
                          {"slots", std::move(slots)},
                          {"open", rec.open_tasks},
                          {"complete", rec.slots_complete},
                          {"tasks", rec.tasks},
                          {"satisfied", rec.satisfied},
                          {"disc", rec.discontinuities},
                          {"state", rec.state},
                          {"action", rec.action},
                          {"has_action", rec.has_action},
                          {"next_state", rec.next_state},
                          {"has_next", rec.has_next},
                          {"critic_loss", rec.critic_loss},
                          {"updated", rec.updated},
                          {"noise_sigma", rec.noise_sigma}});
    }
    j["epochs"] = std::move(epochs);
    j["offload_counts"] = offload_counts_;

    json vdts = json::array();
    for (const auto& [vid, t] : twins_.vdts()) {
        json events = json::array();
        for (const auto& [seq, e] : t.events) {
            json ej = {{"seq", seq},
                       {"gen_slot", e.gen_slot},
                       {"x", e.location},
                       {"v", e.predicted_speed},
                       {"connected", e.connected_rsu}};
            if (e.delivery_rsu) ej["delivery"] = *e.delivery_rsu;
            if (e.delay) ej["delay"] = *e.delay;
            if (e.discontinuity) ej["disc"] = *e.discontinuity;
            events.push_back(std::move(ej));
        }
        json tj = {{"id", t.endpoint_id},
                   {"dir", t.direction == Direction::forward ? 0 : 1},
                   {"window", window_to_json(t.trajectory)},
                   {"events", std::move(events)},
                   {"next_seq", t.next_event_seq},
                   {"rloc", t.current_rloc},
                   {"active", t.active}};
        if (t.future_rloc) tj["future_rloc"] = *t.future_rloc;
        vdts.push_back(std::move(tj));
    }
    j["vdts"] = std::move(vdts);

    json idts = json::array();
    for (const auto& idt : twins_.idts()) {
        json matrices = json::array();
        for (const auto& m : idt.status_matrices) matrices.push_back(matrix_to_json(m));
        json ij = {{"rsu", idt.rsu},
                   {"compute_rate", idt.compute_rate},
                   {"queue_history", idt.queue_history},
                   {"matrices", std::move(matrices)}};
        if (idt.policy_map) ij["policy_map"] = map_to_json(*idt.policy_map);
        idts.push_back(std::move(ij));
    }
    j["idts"] = std::move(idts);

    if (auto* syn = dynamic_cast<SyntheticMobility*>(mobility_.get())) {
        const auto snap = syn->snapshot();
        json vehicles = json::array();
        for (const auto& v : snap.vehicles) {
            vehicles.push_back({{"id", v.id},
                                {"dir", v.direction == Direction::forward ? 0 : 1},
                                {"x", v.position},
                                {"speed", v.speed},
                                {"cruise", v.cruise}});
        }
        j["mobility"] = {{"kind", "synthetic"},
                         {"next_slot", snap.next_slot},
                         {"next_id", snap.next_id},
                         {"vehicles", std::move(vehicles)},
                         {"motion_rng", snap.motion_rng},
                         {"arrival_rng", snap.arrival_rng}};
    } else if (auto* trace = dynamic_cast<TraceFileSource*>(mobility_.get())) {
        j["mobility"] = {{"kind", "trace"}, {"next_slot", next_slot_}};
        (void)trace;
    } else {
        throw CheckpointError("engine: mobility source is not checkpointable");
    }
    return j;
}

void Engine::load_state(const json& j) {
    try {
        next_slot_ = j.at("next_slot").get<SlotIndex>();
        epoch_cursor_ = j.at("epoch_cursor").get<EpochIndex>();
        finalize_cursor_ = j.at("finalize_cursor").get<EpochIndex>();
        state_cache_ = j.at("state_cache").get<std::vector<double>>();
        pending_critic_loss_ = j.at("pending_critic_loss").get<double>();
        pending_updated_ = j.at("pending_updated").get<bool>();

        const auto& queues = j.at("queues");
        if (queues.size() != queues_.size())
            throw CheckpointError("engine: queue count mismatch");
        for (std::size_t r = 0; r < queues_.size(); ++r) {
            std::deque<std::pair<VehicleId, Seconds>> fifo;
            for (const auto& fj : queues[r].at("fifo"))
                fifo.emplace_back(fj.at("v").get<VehicleId>(), fj.at("t").get<Seconds>());
            queues_[r].restore(queues[r].at("busy_end").get<Seconds>(),
                               queues[r].at("last_arrival").get<Seconds>(), std::move(fifo));
        }

        positions_.clear();
        for (const auto& pj : j.at("positions"))
            positions_[pj.at("v").get<VehicleId>()] = pj.at("x").get<double>();

        sessions_.clear();
        for (const auto& sj : j.at("sessions")) {
            Session s;
            s.task.vehicle = sj.at("vehicle").get<VehicleId>();
            s.task.gen_slot = sj.at("gen_slot").get<SlotIndex>();
            s.task.input_size = sj.at("input_size").get<Gbit>();
            s.task.output_size = sj.at("output_size").get<Gbit>();
            s.task.deadline = sj.at("deadline").get<Seconds>();
            s.delay_weight = sj.at("weight").get<double>();
            s.epoch = sj.at("epoch").get<EpochIndex>();
            s.connected = sj.at("connected").get<RsuId>();
            s.delivery = sj.at("delivery").get<RsuId>();
            s.processing = sj.at("processing").get<RsuId>();
            s.proposals = sj.at("proposals").get<int>();
            s.fallback = sj.at("fallback").get<bool>();
            s.x = sj.at("x").get<double>();
            s.predicted_speed = sj.at("v_pred").get<double>();
            s.offload = sj.at("offload").get<Seconds>();
            s.processing_delay = sj.at("queue").get<Seconds>();
            s.completion_slot = sj.at("completion").get<SlotIndex>();
            s.event_seq = sj.at("event").get<std::uint64_t>();
            sessions_.push_back(std::move(s));
        }

        epochs_.clear();
        for (const auto& ej : j.at("epochs")) {
            EpochRecord rec;
            rec.epoch = ej.at("epoch").get<EpochIndex>();
            for (const auto& slj : ej.at("slots"))
                rec.slots.emplace_back(slj.at("i").get<double>(), slj.at("n").get<int>());
            rec.open_tasks = ej.at("open").get<int>();
            rec.slots_complete = ej.at("complete").get<bool>();
            rec.tasks = ej.at("tasks").get<int>();
            rec.satisfied = ej.at("satisfied").get<int>();
            rec.discontinuities = ej.at("disc").get<int>();
            rec.state = ej.at("state").get<std::vector<double>>();
            rec.action = ej.at("action").get<std::vector<double>>();
            rec.has_action = ej.at("has_action").get<bool>();
            rec.next_state = ej.at("next_state").get<std::vector<double>>();
            rec.has_next = ej.at("has_next").get<bool>();
            rec.critic_loss = ej.at("critic_loss").get<double>();
            rec.updated = ej.at("updated").get<bool>();
            rec.noise_sigma = ej.at("noise_sigma").get<double>();
            epochs_[rec.epoch] = std::move(rec);
        }
        offload_counts_ = j.at("offload_counts").get<std::vector<std::vector<double>>>();

        std::map<VehicleId, VehicleDigitalTwin> vdts;
        for (const auto& tj : j.at("vdts")) {
            VehicleDigitalTwin t;
            t.endpoint_id = tj.at("id").get<VehicleId>();
            t.direction = tj.at("dir").get<int>() == 0 ? Direction::forward : Direction::backward;
            t.trajectory = window_from_json(tj.at("window"), cfg_.twin.window_slots);
            for (const auto& ej : tj.at("events")) {
                OffloadingEvent e;
                e.gen_slot = ej.at("gen_slot").get<SlotIndex>();
                e.location = ej.at("x").get<double>();
                e.predicted_speed = ej.at("v").get<double>();
                e.connected_rsu = ej.at("connected").get<RsuId>();
                if (ej.contains("delivery")) e.delivery_rsu = ej.at("delivery").get<RsuId>();
                if (ej.contains("delay")) e.delay = ej.at("delay").get<Seconds>();
                if (ej.contains("disc")) e.discontinuity = ej.at("disc").get<bool>();
                t.events.emplace(ej.at("seq").get<std::uint64_t>(), std::move(e));
            }
            t.next_event_seq = tj.at("next_seq").get<std::uint64_t>();
            t.current_rloc = tj.at("rloc").get<RsuId>();
            if (tj.contains("future_rloc")) t.future_rloc = tj.at("future_rloc").get<RsuId>();
            t.active = tj.at("active").get<bool>();
            vdts[t.endpoint_id] = std::move(t);
        }

        std::vector<InfrastructureDigitalTwin> idts;
        for (const auto& ij : j.at("idts")) {
            InfrastructureDigitalTwin idt;
            idt.rsu = ij.at("rsu").get<RsuId>();
            idt.compute_rate = ij.at("compute_rate").get<double>();
            idt.queue_history = ij.at("queue_history").get<std::vector<Seconds>>();
            for (const auto& mj : ij.at("matrices"))
                idt.status_matrices.push_back(matrix_from_json(mj));
            if (ij.contains("policy_map")) idt.policy_map = map_from_json(ij.at("policy_map"));
            idts.push_back(std::move(idt));
        }
        twins_.restore(std::move(vdts), std::move(idts));

        const auto& mj = j.at("mobility");
        const std::string kind = mj.at("kind").get<std::string>();
        if (kind == "synthetic") {
            auto* syn = dynamic_cast<SyntheticMobility*>(mobility_.get());
            if (!syn) throw CheckpointError("engine: checkpoint is for synthetic mobility");
            SyntheticMobility::Snapshot snap;
            snap.next_slot = mj.at("next_slot").get<SlotIndex>();
            snap.next_id = mj.at("next_id").get<VehicleId>();
            for (const auto& vj : mj.at("vehicles")) {
                SyntheticMobility::VehicleState v;
                v.id = vj.at("id").get<VehicleId>();
                v.direction =
                    vj.at("dir").get<int>() == 0 ? Direction::forward : Direction::backward;
                v.position = vj.at("x").get<double>();
                v.speed = vj.at("speed").get<double>();
                v.cruise = vj.at("cruise").get<double>();
                snap.vehicles.push_back(v);
            }
            snap.motion_rng = mj.at("motion_rng").get<std::string>();
            snap.arrival_rng = mj.at("arrival_rng").get<std::string>();
            syn->restore(snap);
        } else if (kind == "trace") {
            auto* trace = dynamic_cast<TraceFileSource*>(mobility_.get());
            if (!trace) throw CheckpointError("engine: checkpoint is for trace mobility");
            trace->seek(mj.at("next_slot").get<SlotIndex>());
        } else {
            throw CheckpointError("engine: unknown mobility kind in checkpoint");
        }
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("engine state malformed: ") + e.what());
    }
}

}  // namespace vectwin
