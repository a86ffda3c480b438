#include "vectwin/config.hpp"

#include <algorithm>
#include <fstream>

namespace vectwin {

using nlohmann::json;

namespace {

const json* find_path(const json& root, const std::string& dotted) {
    const json* cur = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos
                                                                              : dot - start);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) return cur;
        start = dot + 1;
    }
    return nullptr;
}

template <typename T>
T require(const json& root, const std::string& dotted) {
    const json* v = find_path(root, dotted);
    if (!v) throw ConfigError("config: missing required key '" + dotted + "'");
    try {
        return v->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: key '" + dotted + "' has the wrong type");
    }
}

template <typename T>
T optional_or(const json& root, const std::string& dotted, T fallback) {
    const json* v = find_path(root, dotted);
    if (!v) return fallback;
    try {
        return v->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: key '" + dotted + "' has the wrong type");
    }
}

}  // namespace

Config parse_config(const json& j) {
    Config c;
    c.road_length = require<double>(j, "topology.road_length");
    c.slot_duration = require<double>(j, "topology.slot_duration");
    c.slots_per_epoch = require<SlotIndex>(j, "topology.slots_per_epoch");

    const json* rsus = find_path(j, "topology.rsus");
    if (!rsus || !rsus->is_array() || rsus->empty())
        throw ConfigError("config: missing required key 'topology.rsus'");
    int idx = 0;
    for (const auto& rj : *rsus) {
        Config::RsuEntry e;
        const std::string base = "topology.rsus[" + std::to_string(idx) + "]";
        if (!rj.contains("coverage") || !rj["coverage"].is_array() || rj["coverage"].size() != 2)
            throw ConfigError("config: missing required key '" + base + ".coverage'");
        e.coverage_lo = rj["coverage"][0].get<double>();
        e.coverage_hi = rj["coverage"][1].get<double>();
        if (!rj.contains("compute_rate"))
            throw ConfigError("config: missing required key '" + base + ".compute_rate'");
        e.compute_rate = rj["compute_rate"].get<double>();
        if (!rj.contains("uplink_rate"))
            throw ConfigError("config: missing required key '" + base + ".uplink_rate'");
        e.uplink_rate = rj["uplink_rate"].get<double>();
        e.wired_rate = rj.value("wired_rate", 1.0);
        c.rsus.push_back(e);
        ++idx;
    }
    if (const json* wm = find_path(j, "topology.wired_matrix"))
        c.wired_matrix = wm->get<std::vector<std::vector<double>>>();

    c.task.input_size = optional_or<double>(j, "task.input_size", c.task.input_size);
    c.task.output_size = optional_or<double>(j, "task.output_size", c.task.output_size);
    c.task.deadline = optional_or<double>(j, "task.deadline", c.task.deadline);
    c.task.gen_period = optional_or<SlotIndex>(j, "task.gen_period_slots", c.task.gen_period);
    c.task.delay_weight = optional_or<double>(j, "task.delay_weight", c.task.delay_weight);

    c.penalties.e1 = optional_or<double>(j, "penalties.e1", c.penalties.e1);
    c.penalties.e2 = optional_or<double>(j, "penalties.e2", c.penalties.e2);

    c.mobility_source = optional_or<std::string>(j, "mobility.source", c.mobility_source);
    c.trace_file = optional_or<std::string>(j, "mobility.trace_file", c.trace_file);
    c.mobility.arrival_rate_per_slot =
        optional_or<double>(j, "mobility.arrival_rate_per_slot", c.mobility.arrival_rate_per_slot);
    c.mobility.initial_vehicles =
        optional_or<int>(j, "mobility.initial_vehicles", c.mobility.initial_vehicles);
    c.mobility.speed_min = optional_or<double>(j, "mobility.speed_min", c.mobility.speed_min);
    c.mobility.speed_max = optional_or<double>(j, "mobility.speed_max", c.mobility.speed_max);
    c.mobility.mean_speed_lo =
        optional_or<double>(j, "mobility.mean_speed_lo", c.mobility.mean_speed_lo);
    c.mobility.mean_speed_hi =
        optional_or<double>(j, "mobility.mean_speed_hi", c.mobility.mean_speed_hi);
    c.mobility.ou_theta = optional_or<double>(j, "mobility.ou_theta", c.mobility.ou_theta);
    c.mobility.ou_sigma = optional_or<double>(j, "mobility.ou_sigma", c.mobility.ou_sigma);
    c.window_slots = optional_or<int>(j, "mobility.window_slots", c.window_slots);

    c.x_levels = optional_or<int>(j, "twin.x_levels", c.x_levels);
    c.v_levels = optional_or<int>(j, "twin.v_levels", c.v_levels);
    c.sync_period = optional_or<int>(j, "twin.sync_period_slots", c.sync_period);
    c.count_window = optional_or<int>(j, "twin.count_window_slots", c.count_window);
    c.state_norm.rate_scale = optional_or<double>(j, "state.rate_scale", c.state_norm.rate_scale);
    c.state_norm.queue_scale =
        optional_or<double>(j, "state.queue_scale", c.state_norm.queue_scale);
    c.state_norm.count_scale =
        optional_or<double>(j, "state.count_scale", c.state_norm.count_scale);
    c.axis_scale.x = optional_or<double>(j, "policy.axis_scale_x", c.axis_scale.x);
    c.axis_scale.v = optional_or<double>(j, "policy.axis_scale_v", c.axis_scale.v);
    c.qhat_max = optional_or<double>(j, "policy.qhat_max", c.qhat_max);

    c.ddpg.actor_hidden =
        optional_or<std::vector<int>>(j, "ddpg.actor_hidden", c.ddpg.actor_hidden);
    c.ddpg.critic_hidden =
        optional_or<std::vector<int>>(j, "ddpg.critic_hidden", c.ddpg.critic_hidden);
    c.ddpg.actor_lr = optional_or<double>(j, "ddpg.actor_lr", c.ddpg.actor_lr);
    c.ddpg.critic_lr = optional_or<double>(j, "ddpg.critic_lr", c.ddpg.critic_lr);
    c.ddpg.discount = optional_or<double>(j, "ddpg.discount", c.ddpg.discount);
    c.ddpg.soft_eps = optional_or<double>(j, "ddpg.soft_update", c.ddpg.soft_eps);
    c.ddpg.noise_mean = optional_or<double>(j, "ddpg.noise_mean", c.ddpg.noise_mean);
    c.ddpg.noise_sigma = optional_or<double>(j, "ddpg.noise_sigma", c.ddpg.noise_sigma);
    c.ddpg.noise_decay = optional_or<double>(j, "ddpg.noise_decay", c.ddpg.noise_decay);
    c.ddpg.replay_capacity =
        optional_or<std::size_t>(j, "ddpg.replay_capacity", c.ddpg.replay_capacity);
    c.ddpg.minibatch = optional_or<std::size_t>(j, "ddpg.minibatch", c.ddpg.minibatch);
    c.ddpg.warmup = optional_or<std::size_t>(j, "ddpg.warmup_epochs", c.ddpg.warmup);

    c.scheme = parse_scheme(optional_or<std::string>(j, "run.scheme", "dt_matching"));
    c.scheme.migrate_threshold =
        optional_or<double>(j, "run.migrate_threshold", c.scheme.migrate_threshold);
    c.train_epochs = optional_or<EpochIndex>(j, "run.train_epochs", c.train_epochs);
    c.eval_epochs = optional_or<EpochIndex>(j, "run.eval_epochs", c.eval_epochs);
    c.seed = optional_or<std::uint64_t>(j, "run.seed", c.seed);
    c.checkpoint_period =
        optional_or<EpochIndex>(j, "run.checkpoint_period_epochs", c.checkpoint_period);

    c.log_policy_maps = optional_or<bool>(j, "output.policy_maps", c.log_policy_maps);
    c.log_events = optional_or<bool>(j, "output.events", c.log_events);
    return c;
}

json config_to_json(const Config& c) {
    json rsus = json::array();
    for (const auto& e : c.rsus) {
        rsus.push_back({{"coverage", {e.coverage_lo, e.coverage_hi}},
                        {"compute_rate", e.compute_rate},
                        {"uplink_rate", e.uplink_rate},
                        {"wired_rate", e.wired_rate}});
    }
    json j = {
        {"topology",
         {{"road_length", c.road_length},
          {"slot_duration", c.slot_duration},
          {"slots_per_epoch", c.slots_per_epoch},
          {"rsus", std::move(rsus)}}},
        {"task",
         {{"input_size", c.task.input_size},
          {"output_size", c.task.output_size},
          {"deadline", c.task.deadline},
          {"gen_period_slots", c.task.gen_period},
          {"delay_weight", c.task.delay_weight}}},
        {"penalties", {{"e1", c.penalties.e1}, {"e2", c.penalties.e2}}},
        {"mobility",
         {{"source", c.mobility_source},
          {"trace_file", c.trace_file},
          {"arrival_rate_per_slot", c.mobility.arrival_rate_per_slot},
          {"initial_vehicles", c.mobility.initial_vehicles},
          {"speed_min", c.mobility.speed_min},
          {"speed_max", c.mobility.speed_max},
          {"mean_speed_lo", c.mobility.mean_speed_lo},
          {"mean_speed_hi", c.mobility.mean_speed_hi},
          {"ou_theta", c.mobility.ou_theta},
          {"ou_sigma", c.mobility.ou_sigma},
          {"window_slots", c.window_slots}}},
        {"twin",
         {{"x_levels", c.x_levels},
          {"v_levels", c.v_levels},
          {"sync_period_slots", c.sync_period},
          {"count_window_slots", c.count_window}}},
        {"state",
         {{"rate_scale", c.state_norm.rate_scale},
          {"queue_scale", c.state_norm.queue_scale},
          {"count_scale", c.state_norm.count_scale}}},
        {"policy",
         {{"axis_scale_x", c.axis_scale.x},
          {"axis_scale_v", c.axis_scale.v},
          {"qhat_max", c.qhat_max}}},
        {"ddpg",
         {{"actor_hidden", c.ddpg.actor_hidden},
          {"critic_hidden", c.ddpg.critic_hidden},
          {"actor_lr", c.ddpg.actor_lr},
          {"critic_lr", c.ddpg.critic_lr},
          {"discount", c.ddpg.discount},
          {"soft_update", c.ddpg.soft_eps},
          {"noise_mean", c.ddpg.noise_mean},
          {"noise_sigma", c.ddpg.noise_sigma},
          {"noise_decay", c.ddpg.noise_decay},
          {"replay_capacity", c.ddpg.replay_capacity},
          {"minibatch", c.ddpg.minibatch},
          {"warmup_epochs", c.ddpg.warmup}}},
        {"run",
         {{"scheme", scheme_name(c.scheme)},
          {"migrate_threshold", c.scheme.migrate_threshold},
          {"train_epochs", c.train_epochs},
          {"eval_epochs", c.eval_epochs},
          {"seed", c.seed},
          {"checkpoint_period_epochs", c.checkpoint_period}}},
        {"output", {{"policy_maps", c.log_policy_maps}, {"events", c.log_events}}},
    };
    if (!c.wired_matrix.empty()) j["topology"]["wired_matrix"] = c.wired_matrix;
    return j;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

std::vector<std::string> validate_config(const Config& c) {
    std::vector<std::string> warnings;
    make_topology(c);  // throws on structural problems
    if (c.slot_duration >= c.task.deadline)
        throw ConfigError("config: slot_duration must be smaller than task.deadline");
    if (c.task.input_size <= 0.0 || c.task.output_size <= 0.0)
        throw ConfigError("config: task sizes must be positive");
    if (c.task.gen_period < 1) throw ConfigError("config: task.gen_period_slots must be >= 1");
    if (c.task.deadline <= 0.0) throw ConfigError("config: task.deadline must be positive");
    if (c.mobility_source != "synthetic" && c.mobility_source != "trace")
        throw ConfigError("config: mobility.source must be 'synthetic' or 'trace'");
    if (c.mobility_source == "trace" && c.trace_file.empty())
        throw ConfigError("config: mobility.trace_file required for trace source");
    if (c.window_slots < 1) throw ConfigError("config: mobility.window_slots must be >= 1");
    if (c.x_levels < 1 || c.v_levels < 1)
        throw ConfigError("config: twin levels must be >= 1");
    if (c.count_window < 1) throw ConfigError("config: twin.count_window_slots must be >= 1");
    if (c.sync_period < 1) throw ConfigError("config: twin.sync_period_slots must be >= 1");
    if (c.scheme.kind == SchemeKind::migrate_x) {
        Meters max_cell = 0.0;
        for (const auto& e : c.rsus) max_cell = std::max(max_cell, e.coverage_hi - e.coverage_lo);
        if (c.scheme.migrate_threshold < 0.0 || c.scheme.migrate_threshold > max_cell)
            throw ConfigError("config: run.migrate_threshold must be within a cell length");
    }
    if (c.task.output_size > c.task.input_size)
        warnings.push_back("task.output_size exceeds task.input_size; the RSU preference "
                           "ordering assumes results are smaller than inputs");
    if (c.state_norm.rate_scale <= 0.0 || c.state_norm.queue_scale <= 0.0 ||
        c.state_norm.count_scale <= 0.0)
        throw ConfigError("config: state scales must be positive");
    return warnings;
}

Topology make_topology(const Config& c) {
    std::vector<RsuConfig> rsus;
    const std::size_t n = c.rsus.size();
    if (!c.wired_matrix.empty() && c.wired_matrix.size() != n)
        throw ConfigError("config: wired_matrix must be square over the RSUs");
    for (std::size_t r = 0; r < n; ++r) {
        RsuConfig rc;
        rc.coverage_lo = c.rsus[r].coverage_lo;
        rc.coverage_hi = c.rsus[r].coverage_hi;
        rc.compute_rate = c.rsus[r].compute_rate;
        rc.uplink_rate = c.rsus[r].uplink_rate;
        if (c.wired_matrix.empty()) {
            rc.wired_rate_to.assign(n, c.rsus[r].wired_rate);
        } else {
            if (c.wired_matrix[r].size() != n)
                throw ConfigError("config: wired_matrix must be square over the RSUs");
            rc.wired_rate_to = c.wired_matrix[r];
        }
        rsus.push_back(std::move(rc));
    }
    return Topology(c.road_length, std::move(rsus), c.slot_duration, c.slots_per_epoch);
}

std::unique_ptr<MobilitySource> make_mobility(const Config& c, std::uint64_t seed) {
    if (c.mobility_source == "trace")
        return std::make_unique<TraceFileSource>(TraceFileSource::from_file(
            c.trace_file, c.road_length, c.slot_duration, c.mobility.speed_max));
    return std::make_unique<SyntheticMobility>(c.mobility, c.road_length, c.slot_duration, seed);
}

EngineConfig make_engine_config(const Config& c, const SchemeConfig& scheme, std::uint64_t seed,
                                bool training) {
    EngineConfig ec;
    ec.task = c.task;
    ec.penalties = c.penalties;
    ec.twin.window_slots = static_cast<std::size_t>(c.window_slots);
    ec.twin.x_levels = c.x_levels;
    ec.twin.v_levels = c.v_levels;
    ec.twin.v_min = c.mobility.speed_min;
    ec.twin.v_max = c.mobility.speed_max;
    ec.state_norm = c.state_norm;
    ec.axis_scale = c.axis_scale;
    ec.count_window = c.count_window;
    ec.sync_period = c.sync_period;
    ec.qhat_max = c.qhat_max;
    ec.scheme = scheme;
    ec.seed = seed;
    ec.training = training;
    return ec;
}

Config default_config() {
    Config c;
    const int n = 6;
    const double cell = 200.0;
    for (int r = 0; r < n; ++r) {
        Config::RsuEntry e;
        e.coverage_lo = r * cell;
        e.coverage_hi = (r + 1) * cell;
        e.compute_rate = 0.25;
        e.uplink_rate = 0.4;
        e.wired_rate = 1.0;
        c.rsus.push_back(e);
    }
    c.state_norm.queue_scale = c.task.deadline;
    return c;
}

}  // namespace vectwin
