#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "vectwin/config.hpp"
#include "vectwin/experiment.hpp"
#include "vectwin/metrics.hpp"

using namespace vectwin;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("vectwin_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Minimal CSV reader for the metrics files.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::string line;
    REQUIRE(std::getline(in, line));
    std::vector<std::string> header;
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        cells.resize(header.size());
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TEST_CASE("config round-trip: parse, serialize, parse") {
    Config c = testutil::small_config();
    c.scheme = parse_scheme("migrate_x");
    c.scheme.migrate_threshold = 42.5;
    c.wired_matrix.assign(6, std::vector<double>(6, 2.0));
    const auto j1 = config_to_json(c);
    const Config c2 = parse_config(j1);
    const auto j2 = config_to_json(c2);
    CHECK(j1 == j2);
}

TEST_CASE("missing required keys are named") {
    nlohmann::json j = config_to_json(default_config());
    j["topology"].erase("road_length");
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("topology.road_length") != std::string::npos);
    }

    nlohmann::json j2 = config_to_json(default_config());
    j2["topology"]["rsus"][2].erase("compute_rate");
    try {
        parse_config(j2);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("compute_rate") != std::string::npos);
    }
}

TEST_CASE("validation rules") {
    SUBCASE("slot duration must stay below the deadline") {
        Config c = default_config();
        c.slot_duration = 3.5;
        CHECK_THROWS_AS(validate_config(c), ConfigError);
    }
    SUBCASE("oversized results are a warning, not an error") {
        Config c = default_config();
        c.task.output_size = 0.5;  // > input 0.2
        const auto warnings = validate_config(c);
        REQUIRE(!warnings.empty());
        CHECK(warnings[0].find("output_size") != std::string::npos);
    }
    SUBCASE("migrate threshold bounded by the cell length") {
        Config c = default_config();
        c.scheme = parse_scheme("migrate_x");
        c.scheme.migrate_threshold = 250.0;
        CHECK_THROWS_AS(validate_config(c), ConfigError);
    }
    SUBCASE("default config is clean") {
        CHECK(validate_config(default_config()).empty());
    }
}

TEST_CASE("experiment grid writes one metrics file per run plus a summary") {
    const fs::path dir = fresh_dir("grid");
    ExperimentSpec spec;
    spec.base = testutil::small_config();
    spec.base.train_epochs = 4;
    spec.base.eval_epochs = 3;
    spec.seeds = {1, 2, 3};
    spec.schemes = {parse_scheme("no_coop"), parse_scheme("migrate_x")};
    spec.out_dir = dir.string();
    spec.quiet = true;

    const auto results = execute_experiment(spec);
    CHECK(results.size() == 6);  // 2 schemes x 3 seeds
    for (const auto& r : results) CHECK(fs::exists(r.metrics_path));
    CHECK(fs::exists(dir / "summary.csv"));

    // The summary aggregates must be recomputable from the per-run files.
    const auto summary = read_csv(dir / "summary.csv");
    REQUIRE(summary.size() == 2);
    for (const auto& row : summary) {
        double cost_sum = 0.0;
        int n = 0;
        for (const auto& r : results) {
            if (r.scheme != row.at("scheme")) continue;
            const auto rows = read_csv(r.metrics_path);
            double run_cost = 0.0;
            int epochs = 0;
            for (const auto& rr : rows) {
                if (rr.at("record") != "epoch") continue;
                run_cost += std::stod(rr.at("cost"));
                ++epochs;
            }
            REQUIRE(epochs == 3);
            cost_sum += run_cost / epochs;
            ++n;
        }
        REQUIRE(n == 3);
        CHECK(std::stod(row.at("mean_cost")) == doctest::Approx(cost_sum / n).epsilon(1e-9));
    }
}

TEST_CASE("sweep grid cardinality") {
    const fs::path dir = fresh_dir("sweep");
    ExperimentSpec spec;
    spec.base = testutil::small_config();
    spec.base.train_epochs = 2;  // keep the learning schemes cheap
    spec.base.eval_epochs = 2;
    spec.base.ddpg.warmup = 1;
    spec.base.ddpg.minibatch = 1;
    spec.sweep = parse_sweep("compute_rate=0.2,0.25,0.3,0.35");
    spec.seeds = {1, 2, 3};
    spec.schemes = {parse_scheme("dt_matching"), parse_scheme("dt_only"),
                    parse_scheme("migrate_x"), parse_scheme("no_coop")};
    spec.out_dir = dir.string();
    spec.quiet = true;

    const auto results = execute_experiment(spec);
    CHECK(results.size() == 48);  // 4 values x 4 schemes x 3 seeds
    const auto summary = read_csv(dir / "summary.csv");
    CHECK(summary.size() == 16);  // one cell per scheme x value
    for (const auto& row : summary) CHECK(row.at("seeds") == "3");
}

TEST_CASE("parse_sweep") {
    const auto s = parse_sweep("e2=0.25,0.5,1.0,1.5");
    CHECK(s.var == SweepSpec::Variable::e2);
    REQUIRE(s.values.size() == 4);
    CHECK(s.values[3] == 1.5);
    CHECK(parse_sweep("").var == SweepSpec::Variable::none);
    CHECK_THROWS_AS(parse_sweep("bogus=1"), ConfigError);
    CHECK_THROWS_AS(parse_sweep("compute_rate=abc"), ConfigError);
    const Config swept = apply_sweep(default_config(), SweepSpec::Variable::e2, 1.5);
    CHECK(swept.penalties.e2 == 1.5);
}

TEST_CASE("train, checkpoint, resume: identical to the straight run") {
    const fs::path dir_a = fresh_dir("train_a");
    const fs::path dir_b = fresh_dir("train_b");
    const fs::path dir_c = fresh_dir("train_c");
    Config cfg = testutil::small_config();
    cfg.checkpoint_period = 3;
    const SchemeConfig scheme = parse_scheme("dt_matching");

    // Straight run to 6 epochs.
    TrainOptions full;
    full.epochs = 6;
    full.out_dir = dir_a.string();
    const TrainResult full_res = train_run(cfg, scheme, 9, full);
    REQUIRE(fs::exists(full_res.final_checkpoint));

    // Stop at 3 epochs, then resume to 6.
    TrainOptions half;
    half.epochs = 3;
    half.out_dir = dir_b.string();
    const TrainResult half_res = train_run(cfg, scheme, 9, half);
    TrainOptions resume;
    resume.epochs = 6;
    resume.out_dir = dir_c.string();
    resume.resume_from = half_res.final_checkpoint;
    const TrainResult resumed = train_run(cfg, scheme, 9, resume);

    CHECK(slurp(resumed.final_checkpoint) == slurp(full_res.final_checkpoint));
}

TEST_CASE("checkpoint guards") {
    const fs::path dir = fresh_dir("ckpt");
    Config cfg = testutil::small_config();
    const SchemeConfig scheme = parse_scheme("dt_only");
    TrainOptions opt;
    opt.epochs = 3;
    opt.out_dir = dir.string();
    const TrainResult res = train_run(cfg, scheme, 4, opt);

    SUBCASE("corrupted file refuses to load") {
        const fs::path bad = dir / "broken.json";
        std::ofstream(bad) << slurp(res.final_checkpoint).substr(0, 60);
        TrainOptions resume = opt;
        resume.epochs = 6;
        resume.resume_from = bad.string();
        CHECK_THROWS_AS(train_run(cfg, scheme, 4, resume), CheckpointError);
    }
    SUBCASE("version mismatch refused") {
        nlohmann::json j = nlohmann::json::parse(slurp(res.final_checkpoint));
        j["version"] = 999;
        const fs::path wrong = dir / "wrong_version.json";
        std::ofstream(wrong) << j.dump();
        TrainOptions resume = opt;
        resume.epochs = 6;
        resume.resume_from = wrong.string();
        CHECK_THROWS_AS(train_run(cfg, scheme, 4, resume), CheckpointError);
    }
    SUBCASE("scheme mismatch refused") {
        TrainOptions resume = opt;
        resume.epochs = 6;
        resume.resume_from = res.final_checkpoint;
        CHECK_THROWS_AS(train_run(cfg, parse_scheme("dt_matching"), 4, resume),
                        CheckpointError);
    }
    SUBCASE("config mismatch refused") {
        Config other = cfg;
        other.task.input_size = 0.3;
        TrainOptions resume = opt;
        resume.epochs = 6;
        resume.resume_from = res.final_checkpoint;
        CHECK_THROWS_AS(train_run(other, scheme, 4, resume), CheckpointError);
    }
    SUBCASE("already-covered epochs refused") {
        TrainOptions resume = opt;
        resume.epochs = 3;
        resume.resume_from = res.final_checkpoint;
        CHECK_THROWS_AS(train_run(cfg, scheme, 4, resume), ConfigError);
    }
    SUBCASE("training a non-learning scheme is refused") {
        CHECK_THROWS_AS(train_run(cfg, parse_scheme("no_coop"), 4, opt), ConfigError);
    }
}

TEST_CASE("evaluate_run replays a trained policy") {
    const fs::path dir = fresh_dir("eval");
    Config cfg = testutil::small_config();
    const SchemeConfig scheme = parse_scheme("dt_matching");
    TrainOptions topt;
    topt.epochs = 4;
    topt.out_dir = dir.string();
    const TrainResult tr = train_run(cfg, scheme, 6, topt);

    EvalOptions eopt;
    eopt.epochs = 3;
    eopt.out_dir = dir.string();
    eopt.checkpoint = tr.final_checkpoint;
    const CellResult r1 = evaluate_run(cfg, scheme, 6, eopt);
    const CellResult r2 = evaluate_run(cfg, scheme, 6, eopt);
    CHECK(r1.summary.mean_cost == r2.summary.mean_cost);           // deterministic
    CHECK(slurp(r1.metrics_path) == slurp(r2.metrics_path));       // bit-identical
    EvalOptions missing = eopt;
    missing.checkpoint.clear();
    CHECK_THROWS_AS(evaluate_run(cfg, scheme, 6, missing), ConfigError);
}

#ifdef VECTWIN_CLI_PATH
TEST_CASE("command-line interface") {
    const fs::path dir = fresh_dir("cli");
    const fs::path cfg_path = dir / "base.json";
    Config cfg = testutil::small_config();
    cfg.train_epochs = 2;
    cfg.eval_epochs = 2;
    std::ofstream(cfg_path) << config_to_json(cfg).dump(2);

    const std::string cli = VECTWIN_CLI_PATH;
    auto run_cmd = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >" + (dir / "stdout.txt").string() +
                                " 2>" + (dir / "stderr.txt").string();
        return std::system(cmd.c_str());
    };

    SUBCASE("validate-config accepts a good file") {
        CHECK(run_cmd("validate-config --config " + cfg_path.string()) == 0);
    }
    SUBCASE("validate-config rejects a broken file and names the key") {
        nlohmann::json j = config_to_json(cfg);
        j["topology"].erase("road_length");
        const fs::path bad = dir / "bad.json";
        std::ofstream(bad) << j.dump();
        CHECK(run_cmd("validate-config --config " + bad.string()) != 0);
        CHECK(slurp(dir / "stderr.txt").find("topology.road_length") != std::string::npos);
    }
    SUBCASE("run produces per-seed metrics and a summary") {
        const fs::path out = dir / "out";
        CHECK(run_cmd("run --config " + cfg_path.string() + " --scheme no_coop --seeds 1,2,3" +
                      " --out " + out.string()) == 0);
        CHECK(fs::exists(out / "summary.csv"));
        int metrics_files = 0;
        for (const auto& e : fs::directory_iterator(out))
            if (e.path().filename().string().rfind("metrics_", 0) == 0) ++metrics_files;
        CHECK(metrics_files == 3);
    }
    SUBCASE("unknown scheme fails cleanly") {
        CHECK(run_cmd("run --config " + cfg_path.string() + " --scheme nonesuch") != 0);
    }
    SUBCASE("VECTWIN_OUT overrides --out") {
        const fs::path env_out = dir / "env_out";
        const std::string cmd = "VECTWIN_OUT=" + env_out.string() + " " + cli +
                                " run --config " + cfg_path.string() +
                                " --scheme no_coop --seeds 1 --out " + (dir / "ignored").string() +
                                " >/dev/null 2>&1";
        CHECK(std::system(cmd.c_str()) == 0);
        CHECK(fs::exists(env_out / "summary.csv"));
        CHECK_FALSE(fs::exists(dir / "ignored"));
    }
}
#endif
