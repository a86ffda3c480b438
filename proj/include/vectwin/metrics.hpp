#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "vectwin/policy_map.hpp"
#include "vectwin/twin.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

// Shortest round-trip decimal form; locale-independent, so identical runs
// yield byte-identical files.
std::string format_double(double v);

struct TaskRow {
    EpochIndex epoch = 0;
    SlotIndex gen_slot = 0;
    VehicleId vehicle = 0;
    Meters x = 0.0;
    MetersPerSecond predicted_speed = 0.0;
    RsuId connected = 0;
    RsuId delivery = 0;
    RsuId processing = 0;
    int proposals = 0;
    bool fallback = false;
    Seconds offload = 0.0;
    Seconds processing_delay = 0.0;
    Seconds delivery_delay = 0.0;
    Seconds signalling = 0.0;
    Seconds total = 0.0;
    SlotIndex completion_slot = 0;
    SlotIndex resolved_slot = 0;
    bool discontinuity = false;
    bool truncated = false;
    double violation = 0.0;
};

struct EpochRow {
    EpochIndex epoch = 0;
    double cost = 0.0;
    int tasks = 0;
    int satisfied = 0;
    double satisfaction = 1.0;
    int discontinuities = 0;
    double noise_sigma = 0.0;
    double critic_loss = 0.0;
    bool updated = false;
};

class MetricsSink {
  public:
    virtual ~MetricsSink() = default;
    virtual void on_task(const TaskRow&) {}
    virtual void on_epoch(const EpochRow&) {}
    virtual void on_policy_maps(EpochIndex, const std::vector<PolicyMap>&) {}
    virtual void on_event(VehicleId, const OffloadingEvent&) {}
};

// Accumulates rows in memory; used by tests and summary building.
class RecordingSink : public MetricsSink {
  public:
    void on_task(const TaskRow& r) override { tasks.push_back(r); }
    void on_epoch(const EpochRow& r) override { epochs.push_back(r); }

    std::vector<TaskRow> tasks;
    std::vector<EpochRow> epochs;
};

// Single metrics CSV per run: task rows and epoch rows share the file,
// discriminated by the leading `record` column.
class CsvMetricsSink : public MetricsSink {
  public:
    explicit CsvMetricsSink(const std::string& path, bool log_policy_maps = false,
                            bool log_events = false);
    ~CsvMetricsSink() override;

    void on_task(const TaskRow&) override;
    void on_epoch(const EpochRow&) override;
    void on_policy_maps(EpochIndex, const std::vector<PolicyMap>&) override;
    void on_event(VehicleId, const OffloadingEvent&) override;

    static const char* header();

  private:
    std::ofstream out_;
    std::ofstream maps_out_;
    std::ofstream events_out_;
};

// Fan-out to several sinks.
class TeeSink : public MetricsSink {
  public:
    void add(MetricsSink* s) { sinks_.push_back(s); }
    void on_task(const TaskRow& r) override {
        for (auto* s : sinks_) s->on_task(r);
    }
    void on_epoch(const EpochRow& r) override {
        for (auto* s : sinks_) s->on_epoch(r);
    }
    void on_policy_maps(EpochIndex k, const std::vector<PolicyMap>& m) override {
        for (auto* s : sinks_) s->on_policy_maps(k, m);
    }
    void on_event(VehicleId v, const OffloadingEvent& e) override {
        for (auto* s : sinks_) s->on_event(v, e);
    }

  private:
    std::vector<MetricsSink*> sinks_;
};

}  // namespace vectwin
