#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rgnn/pipeline.hpp"

using namespace rgnn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "rgnn_pipeline_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig tiny_config(const fs::path& outdir) {
    ConfigResult r = parse_config_text(R"({
        "dataset": {"blocks": [12, 12], "p_in": 0.5, "p_out": 0.05, "feature_dim": 16,
                     "noise": 0.05, "sbm_seed": 3, "largest_component": true},
        "encoder": {"layers": 2, "perceptron_depth": 1, "bottleneck_dim": 4, "hidden_dim": 6},
        "training": {"epochs": 8, "lr": 0.05, "patience": 8, "batch_size": 4, "gen_budget": 1},
        "defense": ["plain"],
        "attacks": ["rand"],
        "seeds": [1, 2],
        "eval": {"high_count": 1, "low_count": 1, "random_count": 1,
                  "sweep_budgets": [1, 2], "sweep_axes": ["intra"]}
    })",
                                       "tiny");
    REQUIRE(r.ok());
    r.config.output_dir = outdir.string();
    return r.config;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(RGNN_CLI_PATH) + " " + args + " >" + log.string() +
                            " 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("pipeline writes the full artifact tree") {
    fs::path out = fresh_dir("full");
    ExperimentConfig cfg = tiny_config(out);
    std::ostringstream log;
    int rc = run_pipeline(cfg, 1, log);
    CHECK(rc == exit_ok);
    CHECK(log.str().find("pipeline complete") != std::string::npos);

    for (const char* seed_dir : {"seed_1", "seed_2"}) {
        for (const char* f :
             {"surrogate.ckpt", "model_plain.ckpt", "train_plain.log.csv", "targets.tsv",
              "report_plain_rand.tsv", "trace_rand.tsv", "sweep_intra.csv"}) {
            CAPTURE(seed_dir);
            CAPTURE(f);
            CHECK(fs::exists(out / seed_dir / f));
        }
    }
    REQUIRE(fs::exists(out / "summary.csv"));
    REQUIRE(fs::exists(out / "manifest.json"));

    nlohmann::json manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["completed"] == true);
    CHECK(manifest["errors"].empty());
    CHECK(manifest["config"]["training"]["epochs"] == 8);
    CHECK(manifest["version"] == 1);
    bool lists_summary = false;
    for (const auto& a : manifest["artifacts"])
        if (a == "summary.csv") lists_summary = true;
    CHECK(lists_summary);
    // timestamps only live here
    CHECK(slurp(out / "summary.csv").find('T') == std::string::npos);
}

TEST_CASE("summary rows cover defense x condition with a recomputable mean") {
    fs::path out = fresh_dir("summary");
    ExperimentConfig cfg = tiny_config(out);
    std::ostringstream log;
    REQUIRE(run_pipeline(cfg, 1, log) == exit_ok);

    std::istringstream in(slurp(out / "summary.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "defense,attack,seed_1,seed_2,mean");

    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        ++rows;
        std::istringstream ls(line);
        std::string defense, attack, s1, s2, mean;
        std::getline(ls, defense, ',');
        std::getline(ls, attack, ',');
        std::getline(ls, s1, ',');
        std::getline(ls, s2, ',');
        std::getline(ls, mean, ',');
        CHECK(defense == "plain");
        CHECK((attack == "clean" || attack == "rand"));
        double v1 = std::stod(s1), v2 = std::stod(s2), m = std::stod(mean);
        CHECK(m == doctest::Approx((v1 + v2) / 2.0).epsilon(1e-9));
        CHECK(v1 >= 0.0);
        CHECK(v1 <= 1.0);
    }
    CHECK(rows == 2);  // defenses x (clean + attacks)
}

TEST_CASE("identical configs produce byte-identical artifacts") {
    fs::path out1 = fresh_dir("rerun_a");
    fs::path out2 = fresh_dir("rerun_b");
    std::ostringstream log;
    REQUIRE(run_pipeline(tiny_config(out1), 1, log) == exit_ok);
    REQUIRE(run_pipeline(tiny_config(out2), 2, log) == exit_ok);  // jobs must not matter

    CHECK(slurp(out1 / "summary.csv") == slurp(out2 / "summary.csv"));
    for (const char* f : {"surrogate.ckpt", "model_plain.ckpt", "train_plain.log.csv",
                          "targets.tsv", "report_plain_rand.tsv", "trace_rand.tsv",
                          "sweep_intra.csv"}) {
        CAPTURE(f);
        CHECK(slurp(out1 / "seed_1" / f) == slurp(out2 / "seed_1" / f));
        CHECK(slurp(out1 / "seed_2" / f) == slurp(out2 / "seed_2" / f));
    }

    // manifests may differ only in the two timestamp lines
    std::istringstream m1(slurp(out1 / "manifest.json")), m2(slurp(out2 / "manifest.json"));
    std::string l1, l2;
    while (std::getline(m1, l1) && std::getline(m2, l2)) {
        if (l1.find("started_at") != std::string::npos ||
            l1.find("finished_at") != std::string::npos ||
            l1.find("output_dir") != std::string::npos)  // differs by construction here
            continue;
        CHECK(l1 == l2);
    }
}

TEST_CASE("a failing seed yields an incomplete manifest and no summary") {
    fs::path out = fresh_dir("failure");
    fs::path data = fresh_dir("failure_data");
    std::ofstream(data / "edges.txt") << "0 1\n1 2\n2 3\n3 4\n4 0\n";
    std::ofstream(data / "labels.txt") << "0\t0\n1\t1\n2\t0\n3\t1\n4\t0\n";

    // identity features give width 5; the default 16-wide encoder cannot
    // funnel, which only becomes checkable after the dataset loads
    ConfigResult r = parse_config_text(R"({
        "dataset": {"kind": "custom"},
        "training": {"epochs": 3},
        "attacks": ["rand"],
        "seeds": [1],
        "eval": {"high_count": 1, "low_count": 1, "random_count": 1}
    })",
                                       "failing");
    REQUIRE_FALSE(r.ok());  // missing paths flagged at parse time
    r.config.dataset.edges = (data / "edges.txt").string();
    r.config.dataset.labels = (data / "labels.txt").string();
    r.config.output_dir = out.string();

    std::ostringstream log;
    int rc = run_pipeline(r.config, 1, log);
    CHECK(rc == exit_runtime_error);
    CHECK_FALSE(fs::exists(out / "summary.csv"));
    REQUIRE(fs::exists(out / "manifest.json"));
    nlohmann::json manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["completed"] == false);
    CHECK_FALSE(manifest["errors"].empty());
}

TEST_CASE("cli rejects bad configs with the config exit status") {
    fs::path dir = fresh_dir("cli_bad");
    fs::path cfg = dir / "bad.json";
    std::ofstream(cfg) << R"({"training": {"lr": -1}})";
    int rc = run_cli("pipeline --config " + cfg.string(), dir / "out.log");
    CHECK(rc == exit_config_error);
    std::string log = slurp(dir / "out.log");
    CHECK(log.find("training.lr") != std::string::npos);

    fs::path junk = dir / "junk.json";
    std::ofstream(junk) << "{broken";
    CHECK(run_cli("pipeline --config " + junk.string(), dir / "out2.log") == exit_config_error);

    CHECK(run_cli("pipeline --no-such-flag", dir / "out3.log") == exit_config_error);
    CHECK(run_cli("--help", dir / "out4.log") == exit_ok);
}

TEST_CASE("cli renders sweep curves to svg") {
    fs::path dir = fresh_dir("cli_render");
    fs::path csv = dir / "sweep.csv";
    std::ofstream(csv) << "budget,mean,sum,max\n1,0.5,0.4,0.3\n2,0.3,0.2,0.1\n4,0.1,0.0,-0.2\n";
    fs::path svg = dir / "sweep.svg";
    int rc = run_cli("render --in " + csv.string() + " --out " + svg.string(), dir / "r.log");
    CHECK(rc == exit_ok);
    REQUIRE(fs::exists(svg));
    std::string body = slurp(svg);
    CHECK(body.find("<svg") == 0);
    CHECK(body.find("polyline") != std::string::npos);
    CHECK(body.find("mean") != std::string::npos);
    CHECK(body.find("</svg>") != std::string::npos);

    std::ofstream(dir / "empty.csv") << "";
    CHECK(run_cli("render --in " + (dir / "empty.csv").string() + " --out " +
                      (dir / "e.svg").string(),
                  dir / "r2.log") == exit_runtime_error);
}

TEST_CASE("cli train subcommand writes a checkpoint and log") {
    fs::path dir = fresh_dir("cli_train");
    fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({
        "dataset": {"blocks": [10, 10], "p_in": 0.5, "p_out": 0.05, "feature_dim": 12,
                     "noise": 0.05, "sbm_seed": 3},
        "encoder": {"layers": 2, "perceptron_depth": 1, "bottleneck_dim": 3, "hidden_dim": 5},
        "training": {"epochs": 4, "patience": 4},
        "seeds": [1],
        "eval": {"high_count": 1, "low_count": 1, "random_count": 1}
    })";
    int rc = run_cli("train --config " + cfg.string() + " --mode plain --output-dir " +
                         (dir / "out").string(),
                     dir / "t.log");
    CHECK(rc == exit_ok);
    CHECK(fs::exists(dir / "out" / "model_plain.ckpt"));
    CHECK(fs::exists(dir / "out" / "train_plain.log.csv"));
    std::string msg = slurp(dir / "t.log");
    CHECK(msg.find("best val acc") != std::string::npos);
}
