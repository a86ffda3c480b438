#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "vectwin/ddpg.hpp"
#include "vectwin/engine.hpp"
#include "vectwin/mobility.hpp"
#include "vectwin/net_model.hpp"
#include "vectwin/schemes.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

// Full experiment configuration. Only the topology section is mandatory;
// everything else has documented defaults.
struct Config {
    struct RsuEntry {
        Meters coverage_lo = 0.0;
        Meters coverage_hi = 0.0;
        GbitPerSecond compute_rate = 0.3;
        GbitPerSecond uplink_rate = 0.4;
        GbitPerSecond wired_rate = 1.0;  // to every other RSU unless a matrix is given
    };

    // topology
    Meters road_length = 1200.0;
    Seconds slot_duration = 0.5;
    SlotIndex slots_per_epoch = 10;
    std::vector<RsuEntry> rsus;
    std::vector<std::vector<double>> wired_matrix;  // optional full W_{r,j}

    TaskParams task;
    PenaltyParams penalties;

    // mobility
    std::string mobility_source = "synthetic";  // or "trace"
    std::string trace_file;
    SyntheticMobilityConfig mobility;
    int window_slots = 10;  // T_N

    // twin / state
    int x_levels = 5;
    int v_levels = 5;
    int sync_period = 1;
    int count_window = 10;  // T_w
    StateNorm state_norm;
    AxisScale axis_scale;
    Seconds qhat_max = 0.0;

    DdpgConfig ddpg;

    // run
    SchemeConfig scheme;
    EpochIndex train_epochs = 2000;
    EpochIndex eval_epochs = 200;
    std::uint64_t seed = 1;
    EpochIndex checkpoint_period = 100;

    // output
    bool log_policy_maps = false;
    bool log_events = false;
};

Config parse_config(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& c);
Config load_config_file(const std::string& path);

// Hard errors throw ConfigError; returns soft warnings (e.g. output size
// exceeding input size).
std::vector<std::string> validate_config(const Config& c);

Topology make_topology(const Config& c);
std::unique_ptr<MobilitySource> make_mobility(const Config& c, std::uint64_t seed);
EngineConfig make_engine_config(const Config& c, const SchemeConfig& scheme, std::uint64_t seed,
                                bool training);

// A ready-to-run default scenario mirroring the documented baseline.
Config default_config();

}  // namespace vectwin
