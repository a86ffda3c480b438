#include "vectwin/metrics.hpp"

#include <charconv>
#include <system_error>

namespace vectwin {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) throw ContractError("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

namespace {

std::string csv_bool(bool b) { return b ? "1" : "0"; }

}  // namespace

const char* CsvMetricsSink::header() {
    return "record,epoch,slot,vehicle,x,v_pred,connected,delivery,processing,proposals,fallback,"
           "offload_s,queue_s,delivery_s,signal_s,total_s,completion_slot,resolved_slot,"
           "discontinuity,truncated,violation,cost,tasks,satisfied,satisfaction,discontinuities,"
           "noise_sigma,critic_loss,updated";
}

CsvMetricsSink::CsvMetricsSink(const std::string& path, bool log_policy_maps, bool log_events) {
    out_.open(path);
    if (!out_) throw std::runtime_error("cannot open metrics file " + path);
    out_ << header() << "\n";
    if (log_policy_maps) {
        const std::string p = path + ".policymaps.csv";
        maps_out_.open(p);
        if (!maps_out_) throw std::runtime_error("cannot open policy map log " + p);
        maps_out_ << "epoch,rsu,direction,point_x,point_v,line_a,line_b,line_c,reference_queue\n";
    }
    if (log_events) {
        const std::string p = path + ".events.csv";
        events_out_.open(p);
        if (!events_out_) throw std::runtime_error("cannot open event log " + p);
        events_out_ << "vehicle,gen_slot,location,predicted_speed,connected,delivery,delay,"
                       "discontinuity\n";
    }
}

CsvMetricsSink::~CsvMetricsSink() = default;

void CsvMetricsSink::on_task(const TaskRow& r) {
    out_ << "task," << r.epoch << ',' << r.gen_slot << ',' << r.vehicle << ','
         << format_double(r.x) << ',' << format_double(r.predicted_speed) << ',' << r.connected
         << ',' << r.delivery << ',' << r.processing << ',' << r.proposals << ','
         << csv_bool(r.fallback) << ',' << format_double(r.offload) << ','
         << format_double(r.processing_delay) << ',' << format_double(r.delivery_delay) << ','
         << format_double(r.signalling) << ',' << format_double(r.total) << ','
         << r.completion_slot << ',' << r.resolved_slot << ',' << csv_bool(r.discontinuity) << ','
         << csv_bool(r.truncated) << ',' << format_double(r.violation)
         << ",,,,,,,,\n";
}

void CsvMetricsSink::on_epoch(const EpochRow& r) {
    out_ << "epoch," << r.epoch << ",,,,,,,,,,,,,,,,,,,,"
         << format_double(r.cost) << ',' << r.tasks << ',' << r.satisfied << ','
         << format_double(r.satisfaction) << ',' << r.discontinuities << ','
         << format_double(r.noise_sigma) << ',' << format_double(r.critic_loss) << ','
         << csv_bool(r.updated) << "\n";
}

void CsvMetricsSink::on_policy_maps(EpochIndex k, const std::vector<PolicyMap>& maps) {
    if (!maps_out_.is_open()) return;
    for (const PolicyMap& m : maps) {
        for (int d = 0; d < 2; ++d) {
            const DirectionBenchmarks& b = m.benchmarks[static_cast<std::size_t>(d)];
            maps_out_ << k << ',' << m.rsu << ',' << (d == 0 ? "forward" : "backward") << ','
                      << format_double(b.point_x) << ',' << format_double(b.point_v) << ','
                      << format_double(b.line_a) << ',' << format_double(b.line_b) << ','
                      << format_double(b.line_c) << ',' << format_double(m.reference_queue)
                      << "\n";
        }
    }
}

void CsvMetricsSink::on_event(VehicleId v, const OffloadingEvent& e) {
    if (!events_out_.is_open()) return;
    events_out_ << v << ',' << e.gen_slot << ',' << format_double(e.location) << ','
                << format_double(e.predicted_speed) << ',' << e.connected_rsu << ','
                << (e.delivery_rsu ? std::to_string(*e.delivery_rsu) : std::string()) << ','
                << (e.delay ? format_double(*e.delay) : std::string()) << ','
                << (e.discontinuity ? csv_bool(*e.discontinuity) : std::string()) << "\n";
}

}  // namespace vectwin
