// Command-line front end: experiment grids, training, evaluation and config
// validation. See README.md for the config schema and output formats.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vectwin/config.hpp"
#include "vectwin/experiment.hpp"
#include "vectwin/metrics.hpp"

namespace {

using namespace vectwin;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (seeds.empty()) throw ConfigError("--seeds: no seeds given");
    return seeds;
}

std::vector<SchemeConfig> parse_schemes(const std::string& text, const Config& cfg) {
    std::vector<SchemeConfig> schemes;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!tok.empty()) {
            SchemeConfig s = parse_scheme(tok);
            s.migrate_threshold = cfg.scheme.migrate_threshold;
            schemes.push_back(s);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (schemes.empty()) throw ConfigError("--scheme: no schemes given");
    return schemes;
}

std::string resolve_out_dir(const std::string& flag_value) {
    if (const char* env = std::getenv("VECTWIN_OUT"); env && *env) return env;
    return flag_value;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vectwin - digital twin driven vehicular edge computing simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string scheme_arg;
    std::string seeds_arg = "1";
    std::string sweep_arg;
    std::string out_arg = "out";
    std::string checkpoint_arg;
    long long epochs_arg = 0;

    auto add_common = [&](CLI::App* sub, bool need_config = true) {
        auto* opt = sub->add_option("--config", config_path, "configuration file (JSON)");
        if (need_config) opt->required();
        sub->add_option("--out", out_arg, "output directory (env VECTWIN_OUT overrides)");
    };

    CLI::App* run = app.add_subcommand("run", "evaluate schemes over a sweep grid");
    add_common(run);
    run->add_option("--scheme", scheme_arg, "comma-separated schemes");
    run->add_option("--seeds", seeds_arg, "comma-separated seeds");
    run->add_option("--sweep", sweep_arg, "sweep spec, e.g. compute_rate=0.15,0.2,0.3,0.4");
    run->add_option("--epochs", epochs_arg, "evaluation epochs per run");

    CLI::App* train = app.add_subcommand("train", "train a learning scheme");
    add_common(train);
    train->add_option("--scheme", scheme_arg, "dt_matching or dt_only");
    train->add_option("--seeds", seeds_arg, "comma-separated seeds");
    train->add_option("--epochs", epochs_arg, "training epochs");
    train->add_option("--checkpoint", checkpoint_arg, "resume from this checkpoint");

    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a trained checkpoint");
    add_common(evaluate);
    evaluate->add_option("--scheme", scheme_arg, "scheme to evaluate");
    evaluate->add_option("--seeds", seeds_arg, "comma-separated seeds");
    evaluate->add_option("--epochs", epochs_arg, "evaluation epochs");
    evaluate->add_option("--checkpoint", checkpoint_arg, "checkpoint with trained weights");

    CLI::App* validate = app.add_subcommand("validate-config", "check a configuration file");
    add_common(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = load_config_file(config_path);
        const auto warnings = validate_config(cfg);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        const std::string out_dir = resolve_out_dir(out_arg);

        if (validate->parsed()) {
            std::cout << "config ok: " << config_path << "\n";
            return 0;
        }

        if (run->parsed()) {
            ExperimentSpec spec;
            spec.base = cfg;
            if (epochs_arg > 0) spec.base.eval_epochs = epochs_arg;
            spec.sweep = parse_sweep(sweep_arg);
            spec.seeds = parse_seeds(seeds_arg);
            spec.schemes = scheme_arg.empty() ? std::vector<SchemeConfig>{cfg.scheme}
                                              : parse_schemes(scheme_arg, cfg);
            spec.out_dir = out_dir;
            execute_experiment(spec);
            std::cout << "summary: " << out_dir << "/summary.csv\n";
            return 0;
        }

        if (train->parsed()) {
            const auto schemes = scheme_arg.empty() ? std::vector<SchemeConfig>{cfg.scheme}
                                                    : parse_schemes(scheme_arg, cfg);
            for (const SchemeConfig& s : schemes) {
                for (std::uint64_t seed : parse_seeds(seeds_arg)) {
                    TrainOptions opt;
                    opt.epochs = epochs_arg;
                    opt.out_dir = out_dir;
                    opt.resume_from = checkpoint_arg;
                    const TrainResult tr = train_run(cfg, s, seed, opt);
                    std::cout << scheme_name(s) << " seed=" << seed
                              << " mean_cost=" << format_double(tr.summary.mean_cost)
                              << " checkpoint=" << tr.final_checkpoint << "\n";
                }
            }
            return 0;
        }

        if (evaluate->parsed()) {
            const auto schemes = scheme_arg.empty() ? std::vector<SchemeConfig>{cfg.scheme}
                                                    : parse_schemes(scheme_arg, cfg);
            for (const SchemeConfig& s : schemes) {
                for (std::uint64_t seed : parse_seeds(seeds_arg)) {
                    EvalOptions opt;
                    opt.epochs = epochs_arg;
                    opt.out_dir = out_dir;
                    opt.checkpoint = checkpoint_arg;
                    const CellResult r = evaluate_run(cfg, s, seed, opt);
                    std::cout << r.scheme << " seed=" << seed
                              << " mean_cost=" << format_double(r.summary.mean_cost)
                              << " satisfaction=" << format_double(r.summary.satisfaction)
                              << "\n";
                }
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
