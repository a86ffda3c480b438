#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vectwin/types.hpp"

namespace vectwin {

// One per-slot mobility observation. Speed is signed by travel direction
// (negative for backward-travelling vehicles).
struct TraceSample {
    SlotIndex slot = 0;
    VehicleId vehicle = 0;
    Meters position = 0.0;
    MetersPerSecond speed = 0.0;
};

// Ring of the last T_N samples of one vehicle, newest last.
class TrajectoryWindow {
  public:
    explicit TrajectoryWindow(std::size_t capacity = 1);

    void push(const TraceSample& s);
    std::size_t size() const { return samples_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return samples_.empty(); }
    const TraceSample& latest() const;
    const std::deque<TraceSample>& samples() const { return samples_; }

  private:
    std::size_t capacity_;
    std::deque<TraceSample> samples_;
};

// Mean speed over the next tau seconds, estimated as the least-squares slope
// of position over the window; a single sample falls back to its
// instantaneous speed. Signed like the samples.
MetersPerSecond predict_speed_least_squares(const TrajectoryWindow& window, Seconds tau,
                                            Seconds slot_duration);

class SpeedPredictor {
  public:
    virtual ~SpeedPredictor() = default;
    virtual MetersPerSecond predict(const TrajectoryWindow& window, Seconds tau) const = 0;
};

class LeastSquaresPredictor final : public SpeedPredictor {
  public:
    explicit LeastSquaresPredictor(Seconds slot_duration) : slot_duration_(slot_duration) {}
    MetersPerSecond predict(const TrajectoryWindow& window, Seconds tau) const override {
        return predict_speed_least_squares(window, tau, slot_duration_);
    }

  private:
    Seconds slot_duration_;
};

// Feeds the engine one slot of samples at a time. Vehicles enter and leave
// the road through the sample stream: a vehicle absent from a slot's samples
// has left.
class MobilitySource {
  public:
    virtual ~MobilitySource() = default;
    virtual std::vector<TraceSample> advance(SlotIndex t) = 0;
    virtual Direction direction_of(VehicleId v) const = 0;
};

struct SyntheticMobilityConfig {
    double arrival_rate_per_slot = 0.025;  // Poisson mean per road end per slot
    int initial_vehicles = 11;             // roughly the stationary population
    MetersPerSecond speed_min = 5.0;
    MetersPerSecond speed_max = 25.0;
    MetersPerSecond mean_speed_lo = 8.0;   // per-vehicle cruise target drawn uniformly
    MetersPerSecond mean_speed_hi = 14.0;  // urban-taxi-like cruise range
    double ou_theta = 0.3;                 // mean reversion, 1/s
    double ou_sigma = 1.0;                 // diffusion, m/s per sqrt(s)
};

// Seeded generator: per-vehicle Ornstein-Uhlenbeck speed around an
// individual cruise target, clamped to [speed_min, speed_max], with Poisson
// arrivals at both road ends.
class SyntheticMobility final : public MobilitySource {
  public:
    SyntheticMobility(SyntheticMobilityConfig cfg, Meters road_length, Seconds slot_duration,
                      std::uint64_t master_seed);

    std::vector<TraceSample> advance(SlotIndex t) override;
    Direction direction_of(VehicleId v) const override;

    struct VehicleState {
        VehicleId id = 0;
        Direction direction = Direction::forward;
        Meters position = 0.0;
        MetersPerSecond speed = 0.0;  // magnitude
        MetersPerSecond cruise = 0.0;
    };

    struct Snapshot {
        SlotIndex next_slot = 0;
        VehicleId next_id = 1;
        std::vector<VehicleState> vehicles;
        std::string motion_rng;
        std::string arrival_rng;
    };
    Snapshot snapshot() const;
    void restore(const Snapshot& s);

  private:
    void spawn(Direction dir, Meters x);

    SyntheticMobilityConfig cfg_;
    Meters road_length_;
    Seconds slot_duration_;
    SlotIndex next_slot_ = 0;
    VehicleId next_id_ = 1;
    std::vector<VehicleState> vehicles_;           // kept sorted by id
    std::map<VehicleId, Direction> directions_;    // includes departed vehicles
    std::mt19937_64 motion_rng_;
    std::mt19937_64 arrival_rng_;
};

// Pre-parsed CSV trace (header `slot,vehicle,position,speed`). Validates
// per-vehicle slot contiguity and road bounds at load time.
class TraceFileSource final : public MobilitySource {
  public:
    TraceFileSource(std::istream& in, Meters road_length, Seconds slot_duration,
                    MetersPerSecond max_speed = 0.0);
    static TraceFileSource from_file(const std::string& path, Meters road_length,
                                     Seconds slot_duration, MetersPerSecond max_speed = 0.0);

    std::vector<TraceSample> advance(SlotIndex t) override;
    Direction direction_of(VehicleId v) const override;

    SlotIndex first_slot() const { return first_slot_; }
    SlotIndex last_slot() const { return last_slot_; }
    SlotIndex cursor() const { return next_slot_; }
    void seek(SlotIndex t) { next_slot_ = t; }

  private:
    SlotIndex next_slot_ = 0;
    SlotIndex first_slot_ = 0;
    SlotIndex last_slot_ = -1;
    std::map<SlotIndex, std::vector<TraceSample>> by_slot_;
    std::map<VehicleId, Direction> directions_;
};

}  // namespace vectwin
