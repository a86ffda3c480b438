#include "vectwin/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vectwin/rng.hpp"

namespace vectwin {

namespace {

// Explicit primitives instead of std distributions: draw counts per call are
// fixed, so an engine state snapshot fully determines the stream.
double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

double normal01(std::mt19937_64& g) {
    const double u1 = 1.0 - uniform01(g);  // (0,1]
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int poisson(std::mt19937_64& g, double mean) {
    const double limit = std::exp(-mean);
    int n = 0;
    double prod = uniform01(g);
    while (prod > limit) {
        ++n;
        prod *= uniform01(g);
    }
    return n;
}

}  // namespace

TrajectoryWindow::TrajectoryWindow(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

void TrajectoryWindow::push(const TraceSample& s) {
    if (!samples_.empty() && s.slot <= samples_.back().slot)
        throw ContractError("TrajectoryWindow: samples must advance in time");
    samples_.push_back(s);
    while (samples_.size() > capacity_) samples_.pop_front();
}

const TraceSample& TrajectoryWindow::latest() const {
    if (samples_.empty()) throw ContractError("TrajectoryWindow: empty");
    return samples_.back();
}

MetersPerSecond predict_speed_least_squares(const TrajectoryWindow& window, Seconds /*tau*/,
                                            Seconds slot_duration) {
    if (window.empty()) throw ContractError("predict_speed: empty window");
    const auto& s = window.samples();
    const std::size_t n = s.size();
    if (n == 1) return s.front().speed;

    const SlotIndex base = s.front().slot;
    double t_mean = 0.0, x_mean = 0.0;
    for (const auto& p : s) {
        t_mean += static_cast<double>(p.slot - base) * slot_duration;
        x_mean += p.position;
    }
    t_mean /= static_cast<double>(n);
    x_mean /= static_cast<double>(n);

    double num = 0.0, den = 0.0;
    for (const auto& p : s) {
        const double dt = static_cast<double>(p.slot - base) * slot_duration - t_mean;
        num += dt * (p.position - x_mean);
        den += dt * dt;
    }
    return num / den;
}

SyntheticMobility::SyntheticMobility(SyntheticMobilityConfig cfg, Meters road_length,
                                     Seconds slot_duration, std::uint64_t master_seed)
    : cfg_(cfg),
      road_length_(road_length),
      slot_duration_(slot_duration),
      motion_rng_(rng::make_stream(master_seed, "mobility")),
      arrival_rng_(rng::make_stream(master_seed, "arrivals")) {
    if (cfg_.speed_min <= 0.0 || cfg_.speed_max <= cfg_.speed_min)
        throw ConfigError("mobility: speed bounds must satisfy 0 < speed_min < speed_max");
    if (cfg_.mean_speed_lo < cfg_.speed_min || cfg_.mean_speed_hi > cfg_.speed_max ||
        cfg_.mean_speed_hi < cfg_.mean_speed_lo)
        throw ConfigError("mobility: mean speed range must lie within the speed bounds");
}

void SyntheticMobility::spawn(Direction dir, Meters x) {
    VehicleState v;
    v.id = next_id_++;
    v.direction = dir;
    v.position = x;
    v.cruise = uniform_in(arrival_rng_, cfg_.mean_speed_lo, cfg_.mean_speed_hi);
    v.speed = v.cruise;
    directions_[v.id] = dir;
    vehicles_.push_back(v);
}

std::vector<TraceSample> SyntheticMobility::advance(SlotIndex t) {
    if (t != next_slot_) throw ContractError("SyntheticMobility: advance out of order");
    ++next_slot_;

    if (t == 0) {
        for (int i = 0; i < cfg_.initial_vehicles; ++i) {
            const Direction dir =
                uniform01(arrival_rng_) < 0.5 ? Direction::forward : Direction::backward;
            spawn(dir, uniform_in(arrival_rng_, 0.0, road_length_));
        }
    } else {
        // Move existing vehicles; leave the road by crossing either end.
        std::vector<VehicleState> kept;
        kept.reserve(vehicles_.size());
        for (VehicleState& v : vehicles_) {
            const double drift = cfg_.ou_theta * (v.cruise - v.speed) * slot_duration_;
            const double diffusion =
                cfg_.ou_sigma * std::sqrt(slot_duration_) * normal01(motion_rng_);
            v.speed = std::clamp(v.speed + drift + diffusion, cfg_.speed_min, cfg_.speed_max);
            const double sign = v.direction == Direction::forward ? 1.0 : -1.0;
            v.position += sign * v.speed * slot_duration_;
            if (v.position >= 0.0 && v.position <= road_length_) kept.push_back(v);
        }
        vehicles_ = std::move(kept);

        const int in_fw = poisson(arrival_rng_, cfg_.arrival_rate_per_slot);
        const int in_bw = poisson(arrival_rng_, cfg_.arrival_rate_per_slot);
        for (int i = 0; i < in_fw; ++i) spawn(Direction::forward, 0.0);
        for (int i = 0; i < in_bw; ++i) spawn(Direction::backward, road_length_);
    }

    std::vector<TraceSample> out;
    out.reserve(vehicles_.size());
    for (const VehicleState& v : vehicles_) {
        const double sign = v.direction == Direction::forward ? 1.0 : -1.0;
        out.push_back(TraceSample{t, v.id, v.position, sign * v.speed});
    }
    std::sort(out.begin(), out.end(),
              [](const TraceSample& a, const TraceSample& b) { return a.vehicle < b.vehicle; });
    return out;
}

Direction SyntheticMobility::direction_of(VehicleId v) const {
    auto it = directions_.find(v);
    if (it == directions_.end()) throw ContractError("SyntheticMobility: unknown vehicle");
    return it->second;
}

SyntheticMobility::Snapshot SyntheticMobility::snapshot() const {
    Snapshot s;
    s.next_slot = next_slot_;
    s.next_id = next_id_;
    s.vehicles = vehicles_;
    s.motion_rng = rng::save_state(motion_rng_);
    s.arrival_rng = rng::save_state(arrival_rng_);
    return s;
}

void SyntheticMobility::restore(const Snapshot& s) {
    next_slot_ = s.next_slot;
    next_id_ = s.next_id;
    vehicles_ = s.vehicles;
    directions_.clear();
    for (const auto& v : vehicles_) directions_[v.id] = v.direction;
    rng::load_state(motion_rng_, s.motion_rng);
    rng::load_state(arrival_rng_, s.arrival_rng);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

TraceFileSource::TraceFileSource(std::istream& in, Meters road_length, Seconds slot_duration,
                                 MetersPerSecond max_speed) {
    std::string line;
    if (!std::getline(in, line)) throw TraceError("trace: empty file");
    {
        std::string header = trim(line);
        std::erase(header, ' ');
        if (header != "slot,vehicle,position,speed")
            throw TraceError("trace: expected header 'slot,vehicle,position,speed'");
    }

    std::map<VehicleId, std::vector<TraceSample>> by_vehicle;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        std::string f0, f1, f2, f3;
        if (!std::getline(ls, f0, ',') || !std::getline(ls, f1, ',') ||
            !std::getline(ls, f2, ',') || !std::getline(ls, f3))
            throw TraceError("trace: line " + std::to_string(lineno) + ": expected 4 fields");
        TraceSample s;
        try {
            s.slot = std::stoll(trim(f0));
            s.vehicle = std::stoull(trim(f1));
            s.position = std::stod(trim(f2));
            s.speed = std::stod(trim(f3));
        } catch (const std::exception&) {
            throw TraceError("trace: line " + std::to_string(lineno) + ": malformed field");
        }
        if (s.slot < 0) throw TraceError("trace: line " + std::to_string(lineno) + ": negative slot");
        if (s.position < 0.0 || s.position > road_length)
            throw TraceError("trace: line " + std::to_string(lineno) + ": position off the road");
        by_vehicle[s.vehicle].push_back(s);
    }

    for (auto& [vid, samples] : by_vehicle) {
        std::sort(samples.begin(), samples.end(),
                  [](const TraceSample& a, const TraceSample& b) { return a.slot < b.slot; });
        for (std::size_t i = 1; i < samples.size(); ++i) {
            if (samples[i].slot == samples[i - 1].slot)
                throw TraceError("trace: vehicle " + std::to_string(vid) + " duplicated slot " +
                                 std::to_string(samples[i].slot));
            if (samples[i].slot != samples[i - 1].slot + 1)
                throw TraceError("trace: vehicle " + std::to_string(vid) + " missing slot " +
                                 std::to_string(samples[i - 1].slot + 1));
            if (max_speed > 0.0 &&
                std::abs(samples[i].position - samples[i - 1].position) >
                    max_speed * slot_duration + 1e-9)
                throw TraceError("trace: vehicle " + std::to_string(vid) + " jumps at slot " +
                                 std::to_string(samples[i].slot));
        }
        Direction dir = Direction::forward;
        for (const auto& s : samples) {
            if (s.speed < 0.0) { dir = Direction::backward; break; }
            if (s.speed > 0.0) break;
        }
        directions_[vid] = dir;
        for (const auto& s : samples) by_slot_[s.slot].push_back(s);
    }

    if (!by_slot_.empty()) {
        first_slot_ = by_slot_.begin()->first;
        last_slot_ = by_slot_.rbegin()->first;
    }
    for (auto& [slot, samples] : by_slot_) {
        std::sort(samples.begin(), samples.end(),
                  [](const TraceSample& a, const TraceSample& b) { return a.vehicle < b.vehicle; });
    }
}

TraceFileSource TraceFileSource::from_file(const std::string& path, Meters road_length,
                                           Seconds slot_duration, MetersPerSecond max_speed) {
    std::ifstream in(path);
    if (!in) throw TraceError("trace: cannot open " + path);
    return TraceFileSource(in, road_length, slot_duration, max_speed);
}

std::vector<TraceSample> TraceFileSource::advance(SlotIndex t) {
    if (t != next_slot_) throw ContractError("TraceFileSource: advance out of order");
    ++next_slot_;
    auto it = by_slot_.find(t);
    if (it == by_slot_.end()) return {};
    return it->second;
}

Direction TraceFileSource::direction_of(VehicleId v) const {
    auto it = directions_.find(v);
    if (it == directions_.end()) throw ContractError("TraceFileSource: unknown vehicle");
    return it->second;
}

}  // namespace vectwin
