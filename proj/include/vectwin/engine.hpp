#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "vectwin/ddpg.hpp"
#include "vectwin/delay.hpp"
#include "vectwin/metrics.hpp"
#include "vectwin/mobility.hpp"
#include "vectwin/net_model.hpp"
#include "vectwin/schemes.hpp"
#include "vectwin/twin.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

struct TaskParams {
    Gbit input_size = 0.2;
    Gbit output_size = 0.05;
    Seconds deadline = 3.0;       // tau
    SlotIndex gen_period = 5;     // slots between tasks per vehicle
    double delay_weight = 10.0;   // w_i
};

struct PenaltyParams {
    Seconds e1 = 1.0;
    Seconds e2 = 0.5;
};

struct EngineConfig {
    TaskParams task;
    PenaltyParams penalties;
    TwinConfig twin;
    StateNorm state_norm;
    AxisScale axis_scale;
    int count_window = 10;   // T_w slots of offload counts in the state
    int sync_period = 1;     // twin collection period, slots
    Seconds qhat_max = 0.0;  // 0: auto 5 * H_I / C_r per RSU
    SchemeConfig scheme;
    std::uint64_t seed = 1;
    bool training = false;
};

struct RunSummary {
    EpochIndex epochs = 0;
    int tasks = 0;
    int satisfied = 0;
    int discontinuities = 0;
    double mean_cost = 0.0;      // mean of per-epoch costs
    double satisfaction = 1.0;   // satisfied / tasks (1 when no tasks)
};

// Single-threaded discrete-time loop: per slot it advances mobility, syncs
// twins, resolves due deliveries, generates tasks, applies the scheme,
// queues work, and snapshots provisions; per epoch it aggregates twins,
// computes the cost, and drives the DDPG agent when one is attached.
class Engine {
  public:
    Engine(Topology topo, EngineConfig cfg, std::unique_ptr<MobilitySource> mobility,
           DdpgAgent* agent, MetricsSink* sink);

    // Runs epochs until `total_epochs` have been issued (continuing from
    // restored state if any), then drains in-flight sessions so every task
    // is accounted for. `on_boundary(k)` fires after epoch k is wrapped up
    // (updates applied) and before epoch k+1 acts.
    RunSummary run(EpochIndex total_epochs,
                   const std::function<void(EpochIndex)>& on_boundary = nullptr);

    const Topology& topology() const { return topo_; }
    const TwinStore& twins() const { return twins_; }
    const SchemeCounters& counters() const { return counters_; }
    const std::vector<EdgeQueue>& queues() const { return queues_; }
    EpochIndex completed_epochs() const { return epoch_cursor_ - 1; }
    int state_dim() const;
    int action_dim() const;

    nlohmann::json save_state() const;
    void load_state(const nlohmann::json& j);

  private:
    struct Session {
        Task task;
        EpochIndex epoch = 0;
        RsuId connected = 0;
        RsuId delivery = 0;
        RsuId processing = 0;
        int proposals = 0;
        bool fallback = false;
        double delay_weight = 0.0;
        Meters x = 0.0;
        MetersPerSecond predicted_speed = 0.0;
        Seconds offload = 0.0;
        Seconds processing_delay = 0.0;
        SlotIndex completion_slot = 0;
        std::uint64_t event_seq = 0;
    };

    struct EpochRecord {
        EpochIndex epoch = 0;
        std::vector<std::pair<double, int>> slots;  // (violation sum, offloaders)
        int open_tasks = 0;
        bool slots_complete = false;
        int tasks = 0;
        int satisfied = 0;
        int discontinuities = 0;
        std::vector<double> state, action;
        bool has_action = false;
        std::vector<double> next_state;
        bool has_next = false;
        double critic_loss = 0.0;
        bool updated = false;
        double noise_sigma = 0.0;
    };

    void epoch_boundary(EpochIndex k, bool act);
    void step_slot(SlotIndex t, bool generate);
    void resolve_session(const Session& s, SlotIndex now, bool vehicle_present);
    void finalize_ready();
    const Vehicle& vehicle_record(VehicleId v);
    StateSnapshot make_state_snapshot(SlotIndex t) const;
    std::vector<Seconds> queue_snapshot(Seconds now) const;
    SlotIndex vehicle_phase(VehicleId v) const;

    Topology topo_;
    EngineConfig cfg_;
    std::unique_ptr<MobilitySource> mobility_;
    DdpgAgent* agent_;
    MetricsSink* sink_;
    TwinStore twins_;
    LeastSquaresPredictor predictor_;
    std::vector<EdgeQueue> queues_;
    std::vector<PolicyMap> maps_;
    std::map<VehicleId, Vehicle> vehicles_;  // seen so far; period/weight from config
    std::map<VehicleId, Meters> positions_;
    std::vector<Session> sessions_;
    std::map<EpochIndex, EpochRecord> epochs_;
    std::vector<std::vector<double>> offload_counts_;  // per RSU, trailing window
    std::vector<double> state_cache_;                  // s_{k+1} computed at the boundary
    double pending_critic_loss_ = 0.0;                 // boundary update stats for the next row
    bool pending_updated_ = false;
    EpochIndex finalize_cursor_ = 1;
    SlotIndex next_slot_ = 0;
    EpochIndex epoch_cursor_ = 1;  // next epoch to issue
    SchemeCounters counters_;
    // run() totals
    long total_tasks_ = 0;
    long total_satisfied_ = 0;
    long total_discontinuities_ = 0;
    double cost_sum_ = 0.0;
    EpochIndex cost_epochs_ = 0;
};

}  // namespace vectwin
