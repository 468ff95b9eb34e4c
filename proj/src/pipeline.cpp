#include "rgnn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "rgnn/checkpoint.hpp"
#include "rgnn/eval.hpp"

namespace rgnn {

namespace fs = std::filesystem;

namespace {

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt_acc(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<std::string> files;                // relative to the output dir
    std::vector<double> clean_acc;                 // per defense, on test nodes
    std::vector<std::vector<double>> attack_acc;   // [defense][attack]
};

template <typename Fn>
void write_file(const fs::path& outdir, const std::string& rel, SeedOutcome& out, Fn&& fill) {
    const fs::path path = outdir / rel;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    fill(f);
    if (!f) throw std::runtime_error("write failed for " + path.string());
    out.files.push_back(rel);
}

SeedOutcome run_seed(const ExperimentConfig& cfg, const Graph& g, std::uint64_t seed,
                     const fs::path& outdir) {
    SeedOutcome out;
    out.seed = seed;
    const std::string sdir = "seed_" + std::to_string(seed);
    fs::create_directories(outdir / sdir);

    SplitMasks masks = split_nodes(g, seed);
    SurrogateModel surrogate = train_surrogate(g, masks.train, seed);
    save_surrogate((outdir / sdir / "surrogate.ckpt").string(), surrogate);
    out.files.push_back(sdir + "/surrogate.ckpt");

    TrainConfig tc = cfg.training;
    tc.seed = seed;

    std::vector<ModelParams> models;
    for (TrainMode mode : cfg.defenses) {
        TrainResult tr = train(g, masks, cfg.encoder, tc, mode, &surrogate);
        const std::string tag = to_string(mode);
        save_checkpoint((outdir / sdir / ("model_" + tag + ".ckpt")).string(),
                        Checkpoint{cfg.encoder, g.feature_dim(), g.num_classes(), tr.params});
        out.files.push_back(sdir + "/model_" + tag + ".ckpt");
        write_file(outdir, sdir + "/train_" + tag + ".log.csv", out,
                   [&](std::ostream& f) { write_train_log(f, tr.log); });
        models.push_back(std::move(tr.params));
    }

    std::vector<ForwardResult> clean;
    for (size_t di = 0; di < models.size(); ++di) {
        clean.push_back(forward(g, cfg.encoder, models[di]));
        out.clean_acc.push_back(accuracy_on(clean.back().logits, g.labels(), masks.unlabeled));
    }

    const TargetSet targets =
        select_targets(clean[0].logits, g.labels(), masks.unlabeled, cfg.eval.high_count,
                       cfg.eval.low_count, cfg.eval.random_count, seed);
    write_file(outdir, sdir + "/targets.tsv", out, [&](std::ostream& f) {
        if (!targets.warning.empty()) f << "# " << targets.warning << '\n';
        for (int v : targets.high_conf) f << v << "\thigh\n";
        for (int v : targets.low_conf) f << v << "\tlow\n";
        for (int v : targets.random) f << v << "\trandom\n";
    });

    const BudgetRule rule{cfg.eval.degree_budget, cfg.eval.fixed_budget};
    out.attack_acc.assign(models.size(), std::vector<double>(cfg.attacks.size(), 0.0));
    for (size_t ai = 0; ai < cfg.attacks.size(); ++ai) {
        const AttackKind kind = cfg.attacks[ai];
        for (size_t di = 0; di < models.size(); ++di) {
            EvalReport rep = evaluate_under_attack(g, cfg.encoder, models[di], targets, kind, rule,
                                                   &surrogate, seed);
            out.attack_acc[di][ai] = rep.accuracy;
            const std::string name = sdir + "/report_" + to_string(cfg.defenses[di]) + "_" +
                                     std::string(to_string(kind)) + ".tsv";
            write_file(outdir, name, out, [&](std::ostream& f) { write_report(f, rep); });
            // The attacks never read the defended model, so the edit scripts
            // agree across defenses; keep one trace per attack kind.
            if (di == 0) {
                write_file(outdir, sdir + "/trace_" + std::string(to_string(kind)) + ".tsv", out,
                           [&](std::ostream& f) { write_trace(f, rep.traces); });
            }
        }
    }

    for (const std::string& axis : cfg.eval.sweep_axes) {
        SweepResult sweep = variant_sweep(g, masks, cfg.encoder, tc, axis, cfg.eval.sweep_budgets,
                                          AttackKind::Nettack, targets, surrogate);
        write_file(outdir, sdir + "/sweep_" + axis + ".csv", out,
                   [&](std::ostream& f) { write_sweep_csv(f, sweep); });
    }

    out.ok = true;
    return out;
}

}  // namespace

int run_pipeline(const ExperimentConfig& cfg, int jobs, std::ostream& log) {
    const std::string started = iso_now();
    const fs::path outdir = cfg.output_dir;
    std::vector<std::string> errors;
    std::vector<SeedOutcome> outcomes(cfg.seeds.size());

    try {
        fs::create_directories(outdir);
        log << "loading dataset `" << cfg.dataset.kind << "`\n";
        const Graph g = load_dataset(cfg.dataset);
        log << "graph: " << g.num_nodes() << " nodes, " << g.num_edges() << " edges, "
            << g.num_classes() << " classes\n";

        const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.seeds.size())));
        std::atomic<size_t> next{0};
        std::mutex log_mu;
        auto work = [&]() {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= cfg.seeds.size()) return;
                const std::uint64_t seed = cfg.seeds[i];
                try {
                    outcomes[i] = run_seed(cfg, g, seed, outdir);
                    std::lock_guard<std::mutex> lk(log_mu);
                    log << "seed " << seed << " done\n";
                } catch (const std::exception& e) {
                    outcomes[i].seed = seed;
                    outcomes[i].error = e.what();
                    std::lock_guard<std::mutex> lk(log_mu);
                    log << "seed " << seed << " failed: " << e.what() << '\n';
                }
            }
        };
        if (workers == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work);
            for (std::thread& th : pool) th.join();
        }
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }

    for (const SeedOutcome& o : outcomes)
        if (!o.ok && !o.error.empty())
            errors.push_back("seed " + std::to_string(o.seed) + ": " + o.error);
    const bool complete =
        errors.empty() &&
        std::all_of(outcomes.begin(), outcomes.end(), [](const SeedOutcome& o) { return o.ok; });

    std::vector<std::string> artifacts;
    if (complete) {
        // Rows: defense x (clean + attacks); columns: per-seed accuracy then mean.
        std::ofstream f(outdir / "summary.csv");
        f << "defense,attack";
        for (std::uint64_t s : cfg.seeds) f << ",seed_" << s;
        f << ",mean\n";
        for (size_t di = 0; di < cfg.defenses.size(); ++di) {
            auto row = [&](const std::string& attack, auto value_for) {
                f << to_string(cfg.defenses[di]) << ',' << attack;
                double sum = 0.0;
                for (size_t si = 0; si < outcomes.size(); ++si) {
                    const double v = value_for(outcomes[si]);
                    sum += v;
                    f << ',' << fmt_acc(v);
                }
                f << ',' << fmt_acc(sum / static_cast<double>(outcomes.size())) << '\n';
            };
            row("clean", [&](const SeedOutcome& o) { return o.clean_acc[di]; });
            for (size_t ai = 0; ai < cfg.attacks.size(); ++ai)
                row(to_string(cfg.attacks[ai]),
                    [&](const SeedOutcome& o) { return o.attack_acc[di][ai]; });
        }
        if (!f) errors.push_back("failed writing summary.csv");
        artifacts.push_back("summary.csv");
    }
    for (const SeedOutcome& o : outcomes)
        artifacts.insert(artifacts.end(), o.files.begin(), o.files.end());

    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["started_at"] = started;
    manifest["finished_at"] = iso_now();
    manifest["completed"] = complete && errors.empty();
    manifest["errors"] = errors;
    manifest["config"] = nlohmann::json::parse(config_to_json(cfg));
    manifest["artifacts"] = artifacts;
    {
        std::ofstream f(outdir / "manifest.json");
        f << manifest.dump(2) << '\n';
    }

    if (!errors.empty() || !complete) {
        log << "pipeline incomplete; see manifest\n";
        return exit_runtime_error;
    }
    log << "pipeline complete: " << (outdir / "summary.csv").string() << '\n';
    return exit_ok;
}

}  // namespace rgnn
