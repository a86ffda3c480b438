#include "vectwin/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "vectwin/metrics.hpp"
#include "vectwin/rng.hpp"

namespace vectwin {

using nlohmann::json;
namespace fs = std::filesystem;

SweepSpec parse_sweep(const std::string& text) {
    SweepSpec spec;
    if (text.empty() || text == "none") return spec;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ConfigError("sweep: expected '<variable>=<v1,v2,...>', got '" + text + "'");
    const std::string var = text.substr(0, eq);
    if (var == "compute_rate") spec.var = SweepSpec::Variable::compute_rate;
    else if (var == "e2") spec.var = SweepSpec::Variable::e2;
    else throw ConfigError("sweep: unknown variable '" + var + "'");

    std::string rest = text.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
        const auto comma = rest.find(',', start);
        const std::string tok =
            rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!tok.empty()) {
            try {
                spec.values.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("sweep: bad value '" + tok + "'");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (spec.values.empty()) throw ConfigError("sweep: no values given");
    return spec;
}

std::string sweep_variable_name(SweepSpec::Variable v) {
    switch (v) {
        case SweepSpec::Variable::none: return "none";
        case SweepSpec::Variable::compute_rate: return "compute_rate";
        case SweepSpec::Variable::e2: return "e2";
    }
    return "none";
}

Config apply_sweep(const Config& base, SweepSpec::Variable var, double value) {
    Config c = base;
    switch (var) {
        case SweepSpec::Variable::none: break;
        case SweepSpec::Variable::compute_rate:
            for (auto& r : c.rsus) r.compute_rate = value;
            break;
        case SweepSpec::Variable::e2:
            c.penalties.e2 = value;
            break;
    }
    return c;
}

std::string metrics_file_name(const std::string& scheme, SweepSpec::Variable var, double value,
                              std::uint64_t seed, const std::string& prefix) {
    std::string name = prefix + "_" + scheme;
    if (var != SweepSpec::Variable::none)
        name += "_" + sweep_variable_name(var) + "-" + format_double(value);
    name += "_seed" + std::to_string(seed) + ".csv";
    return name;
}

namespace {

struct BuiltRun {
    Topology topo;
    EngineConfig engine_cfg;
};

std::unique_ptr<DdpgAgent> make_agent(const Config& cfg, const Topology& topo,
                                      std::uint64_t seed) {
    const int sd = state_dimension(static_cast<int>(cfg.rsus.size()), cfg.count_window,
                                   cfg.x_levels, cfg.v_levels);
    const int ad = action_dimension(topo.num_rsus());
    return std::make_unique<DdpgAgent>(sd, ad, cfg.ddpg, seed);
}

// Training environments draw their mobility from a salted seed so evaluation
// streams stay comparable across schemes.
std::uint64_t train_env_seed(std::uint64_t seed) { return rng::stream_seed(seed, "train-env"); }

void atomic_write(const std::string& path, const std::string& payload) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << payload;
    }
    fs::rename(tmp, path);
}

json config_echo(const Config& cfg) {
    json j = config_to_json(cfg);
    j.erase("run");     // orchestration knobs may differ across resumes
    j.erase("output");
    return j;
}

}  // namespace

void write_checkpoint_file(const std::string& path, const Config& cfg, const SchemeConfig& scheme,
                           EpochIndex epoch, const Engine& engine, const DdpgAgent& agent) {
    json j;
    j["format"] = "vectwin-checkpoint";
    j["version"] = kCheckpointVersion;
    j["scheme"] = scheme_name(scheme);
    j["epoch"] = epoch;
    j["config"] = config_echo(cfg);
    j["engine"] = engine.save_state();
    j["agent"] = agent.save();
    atomic_write(path, j.dump());
}

namespace {

json read_checkpoint(const std::string& path, const Config& cfg, const SchemeConfig& scheme,
                     bool check_config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw CheckpointError("checkpoint: " + path + " is corrupted: " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "vectwin-checkpoint")
        throw CheckpointError("checkpoint: " + path + " is not a vectwin checkpoint");
    if (j.value("version", -1) != kCheckpointVersion)
        throw CheckpointError("checkpoint: " + path + " has unsupported version " +
                              std::to_string(j.value("version", -1)));
    if (j.value("scheme", "") != scheme_name(scheme))
        throw CheckpointError("checkpoint: scheme mismatch (file has '" +
                              j.value("scheme", std::string()) + "')");
    if (check_config && j.at("config") != config_echo(cfg))
        throw CheckpointError("checkpoint: configuration differs from the current config");
    return j;
}

}  // namespace

EpochIndex load_checkpoint_file(const std::string& path, const Config& cfg,
                                const SchemeConfig& scheme, Engine& engine, DdpgAgent& agent) {
    const json j = read_checkpoint(path, cfg, scheme, /*check_config=*/true);
    engine.load_state(j.at("engine"));
    agent.load(j.at("agent"));
    return j.at("epoch").get<EpochIndex>();
}

void load_checkpoint_agent(const std::string& path, DdpgAgent& agent) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw CheckpointError("checkpoint: " + path + " is corrupted: " + e.what());
    }
    if (j.value("format", "") != "vectwin-checkpoint" ||
        j.value("version", -1) != kCheckpointVersion)
        throw CheckpointError("checkpoint: " + path + " is not a loadable checkpoint");
    agent.load(j.at("agent"));
}

TrainResult train_run(const Config& cfg, const SchemeConfig& scheme, std::uint64_t seed,
                      const TrainOptions& opt) {
    if (!scheme_uses_ddpg(scheme.kind))
        throw ConfigError("train: scheme '" + scheme_name(scheme) + "' has nothing to learn");
    const EpochIndex epochs = opt.epochs > 0 ? opt.epochs : cfg.train_epochs;
    const EpochIndex period =
        opt.checkpoint_period > 0 ? opt.checkpoint_period : cfg.checkpoint_period;
    fs::create_directories(opt.out_dir);

    const std::string metrics_path =
        (fs::path(opt.out_dir) /
         metrics_file_name(scheme_name(scheme), SweepSpec::Variable::none, 0.0, seed, "train"))
            .string();
    CsvMetricsSink csv(metrics_path, cfg.log_policy_maps, cfg.log_events);

    Topology topo = make_topology(cfg);
    auto agent = make_agent(cfg, topo, seed);
    Engine engine(std::move(topo),
                  make_engine_config(cfg, scheme, train_env_seed(seed), /*training=*/true),
                  make_mobility(cfg, train_env_seed(seed)), agent.get(), &csv);

    if (!opt.resume_from.empty()) {
        const EpochIndex start = load_checkpoint_file(opt.resume_from, cfg, scheme, engine, *agent);
        if (start >= epochs)
            throw ConfigError("train: checkpoint already covers the requested epochs");
    }

    TrainResult result;
    result.metrics_path = metrics_path;
    auto hook = [&](EpochIndex k) {
        if (k == epochs || (period > 0 && k % period == 0)) {
            const std::string ck =
                (fs::path(opt.out_dir) / ("checkpoint_" + scheme_name(scheme) + "_seed" +
                                          std::to_string(seed) + "_epoch" + std::to_string(k) +
                                          ".json"))
                    .string();
            write_checkpoint_file(ck, cfg, scheme, k, engine, *agent);
            if (k == epochs) result.final_checkpoint = ck;
        }
    };
    result.summary = engine.run(epochs, hook);
    return result;
}

CellResult evaluate_run(const Config& cfg, const SchemeConfig& scheme, std::uint64_t seed,
                        const EvalOptions& opt) {
    const EpochIndex epochs = opt.epochs > 0 ? opt.epochs : cfg.eval_epochs;
    fs::create_directories(opt.out_dir);

    Topology topo = make_topology(cfg);
    std::unique_ptr<DdpgAgent> agent;
    if (scheme_uses_ddpg(scheme.kind)) {
        agent = make_agent(cfg, topo, seed);
        if (opt.checkpoint.empty())
            throw ConfigError("evaluate: scheme '" + scheme_name(scheme) +
                              "' needs --checkpoint");
        load_checkpoint_agent(opt.checkpoint, *agent);
    }

    const std::string path =
        (fs::path(opt.out_dir) /
         metrics_file_name(scheme_name(scheme), SweepSpec::Variable::none, 0.0, seed, "eval"))
            .string();
    CsvMetricsSink csv(path, cfg.log_policy_maps, cfg.log_events);
    Engine engine(std::move(topo), make_engine_config(cfg, scheme, seed, /*training=*/false),
                  make_mobility(cfg, seed), agent.get(), &csv);

    CellResult r;
    r.scheme = scheme_name(scheme);
    r.seed = seed;
    r.metrics_path = path;
    r.summary = engine.run(epochs);
    return r;
}

std::vector<CellResult> execute_experiment(const ExperimentSpec& spec) {
    if (spec.seeds.empty()) throw ConfigError("experiment: at least one seed required");
    if (spec.schemes.empty()) throw ConfigError("experiment: at least one scheme required");
    if (spec.sweep.var != SweepSpec::Variable::none && spec.sweep.values.empty())
        throw ConfigError("experiment: sweep variable set but no values");
    fs::create_directories(spec.out_dir);

    std::vector<double> values = spec.sweep.values;
    if (spec.sweep.var == SweepSpec::Variable::none) values = {0.0};

    std::vector<CellResult> results;
    for (const SchemeConfig& scheme : spec.schemes) {
        for (double value : values) {
            const Config cfg = apply_sweep(spec.base, spec.sweep.var, value);
            for (std::uint64_t seed : spec.seeds) {
                std::unique_ptr<DdpgAgent> agent;
                Topology topo = make_topology(cfg);
                if (scheme_uses_ddpg(scheme.kind)) {
                    // Train to convergence budget, then evaluate frozen.
                    agent = make_agent(cfg, topo, seed);
                    Engine trainer(
                        topo, make_engine_config(cfg, scheme, train_env_seed(seed), true),
                        make_mobility(cfg, train_env_seed(seed)), agent.get(), nullptr);
                    trainer.run(cfg.train_epochs);
                }

                const std::string path =
                    (fs::path(spec.out_dir) / metrics_file_name(scheme_name(scheme),
                                                                spec.sweep.var, value, seed))
                        .string();
                CsvMetricsSink csv(path, cfg.log_policy_maps, cfg.log_events);
                Engine engine(std::move(topo),
                              make_engine_config(cfg, scheme, seed, /*training=*/false),
                              make_mobility(cfg, seed), agent.get(), &csv);

                CellResult r;
                r.scheme = scheme_name(scheme);
                r.sweep_value = value;
                r.seed = seed;
                r.metrics_path = path;
                r.summary = engine.run(cfg.eval_epochs);
                if (!spec.quiet)
                    std::cout << r.scheme << " "
                              << (spec.sweep.var == SweepSpec::Variable::none
                                      ? std::string("-")
                                      : sweep_variable_name(spec.sweep.var) + "=" +
                                            format_double(value))
                              << " seed=" << seed << " cost=" << format_double(r.summary.mean_cost)
                              << " satisfaction=" << format_double(r.summary.satisfaction)
                              << "\n";
                results.push_back(std::move(r));
            }
        }
    }
    write_summary_csv((fs::path(spec.out_dir) / "summary.csv").string(), spec, results);
    return results;
}

void write_summary_csv(const std::string& path, const ExperimentSpec& spec,
                       const std::vector<CellResult>& results) {
    struct Cell {
        int n = 0;
        double cost = 0.0;
        double satisfaction = 0.0;
    };
    std::map<std::pair<std::string, double>, Cell> cells;
    for (const CellResult& r : results) {
        Cell& c = cells[{r.scheme, r.sweep_value}];
        ++c.n;
        c.cost += r.summary.mean_cost;
        c.satisfaction += r.summary.satisfaction;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "scheme,sweep_variable,sweep_value,seeds,mean_cost,mean_satisfaction\n";
    for (const auto& [key, c] : cells) {
        out << key.first << ',' << sweep_variable_name(spec.sweep.var) << ','
            << format_double(key.second) << ',' << c.n << ','
            << format_double(c.cost / c.n) << ',' << format_double(c.satisfaction / c.n) << "\n";
    }
}

}  // namespace vectwin
