#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vectwin/config.hpp"
#include "vectwin/engine.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

struct SweepSpec {
    enum class Variable { none, compute_rate, e2 };
    Variable var = Variable::none;
    std::vector<double> values;
};

SweepSpec parse_sweep(const std::string& text);  // "compute_rate=0.1,0.2" / "e2=..."
std::string sweep_variable_name(SweepSpec::Variable v);

// Returns the configuration with the swept variable overridden.
Config apply_sweep(const Config& base, SweepSpec::Variable var, double value);

struct ExperimentSpec {
    Config base;
    SweepSpec sweep;
    std::vector<std::uint64_t> seeds;
    std::vector<SchemeConfig> schemes;
    std::string out_dir;
    bool quiet = false;
};

struct CellResult {
    std::string scheme;
    double sweep_value = 0.0;  // meaningless when the sweep variable is none
    std::uint64_t seed = 0;
    RunSummary summary;
    std::string metrics_path;
};

// scheme x sweep-value x seed grid. Learning schemes are trained first
// (train_epochs) and then evaluated with frozen weights on a fresh engine
// whose mobility seed is shared by every scheme in the same cell; benchmark
// schemes evaluate directly. Writes one metrics CSV per run plus
// summary.csv, and returns the per-run results.
std::vector<CellResult> execute_experiment(const ExperimentSpec& spec);

void write_summary_csv(const std::string& path, const ExperimentSpec& spec,
                       const std::vector<CellResult>& results);

// ---- training entry points ----

struct TrainOptions {
    EpochIndex epochs = 0;  // 0: use config train_epochs
    std::string out_dir = ".";
    std::string resume_from;            // checkpoint path, empty for fresh
    EpochIndex checkpoint_period = 0;   // 0: use config value
};

struct TrainResult {
    RunSummary summary;
    std::string metrics_path;
    std::string final_checkpoint;
};

TrainResult train_run(const Config& cfg, const SchemeConfig& scheme, std::uint64_t seed,
                      const TrainOptions& opt);

struct EvalOptions {
    EpochIndex epochs = 0;  // 0: use config eval_epochs
    std::string out_dir = ".";
    std::string checkpoint;  // required for learning schemes
};

CellResult evaluate_run(const Config& cfg, const SchemeConfig& scheme, std::uint64_t seed,
                        const EvalOptions& opt);

// ---- checkpoint files ----

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint_file(const std::string& path, const Config& cfg, const SchemeConfig& scheme,
                           EpochIndex epoch, const Engine& engine, const DdpgAgent& agent);
// Throws CheckpointError on corruption or version/config mismatch; engine
// and agent are only touched after the file fully parses.
EpochIndex load_checkpoint_file(const std::string& path, const Config& cfg,
                                const SchemeConfig& scheme, Engine& engine, DdpgAgent& agent);
// Loads only the agent weights (for evaluation).
void load_checkpoint_agent(const std::string& path, DdpgAgent& agent);

std::string metrics_file_name(const std::string& scheme, SweepSpec::Variable var, double value,
                              std::uint64_t seed, const std::string& prefix = "metrics");

}  // namespace vectwin
