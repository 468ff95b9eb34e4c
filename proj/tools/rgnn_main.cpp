// Command-line front end: train / attack / evaluate / sweep / pipeline /
// render, all driven by one JSON experiment config plus flag overrides.
// Exit codes: 0 success, 2 config error, 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rgnn/checkpoint.hpp"
#include "rgnn/eval.hpp"
#include "rgnn/pipeline.hpp"
#include "rgnn/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flag overrides are collected as strings and merged over the config file as
// a JSON patch, so the config parser stays the single source of validation.
struct Overrides {
    std::string config_path;
    std::vector<std::pair<std::string, json>> values;  // dotted path -> value

    void set(const std::string& dotted, json v) { values.push_back({dotted, std::move(v)}); }
};

void add_config_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("-c,--config", ov.config_path, "experiment config file (JSON)")
        ->check(CLI::ExistingFile);
    auto num = [&ov, cmd](const std::string& flag, const std::string& dotted,
                          const std::string& help) {
        cmd->add_option_function<double>(
               flag, [&ov, dotted](double v) { ov.set(dotted, v); }, help)
            ->group("Config overrides");
    };
    auto integer = [&ov, cmd](const std::string& flag, const std::string& dotted,
                              const std::string& help) {
        cmd->add_option_function<long long>(
               flag, [&ov, dotted](long long v) { ov.set(dotted, v); }, help)
            ->group("Config overrides");
    };
    auto str = [&ov, cmd](const std::string& flag, const std::string& dotted,
                          const std::string& help) {
        cmd->add_option_function<std::string>(
               flag, [&ov, dotted](const std::string& v) { ov.set(dotted, v); }, help)
            ->group("Config overrides");
    };
    str("--dataset", "dataset.kind", "dataset kind (sbm|cora|citeseer|polblogs|custom)");
    str("--data-dir", "dataset.data_dir", "directory holding named datasets");
    integer("--epochs", "training.epochs", "training epochs");
    num("--lr", "training.lr", "initial learning rate");
    num("--lambda", "training.lambda_acl", "contrastive loss weight");
    integer("--gen-budget", "training.gen_budget", "flips per batch node in acl generation");
    integer("--batch-size", "training.batch_size", "discriminator batch size");
    integer("--patience", "training.patience", "early stopping patience");
    str("--intra", "encoder.intra", "intra-layer aggregator (mean|sum|max)");
    str("--inter", "encoder.inter", "inter-layer aggregator (none|skip|dense)");
    integer("--layers", "encoder.layers", "encoder rounds");
    integer("--bottleneck", "encoder.bottleneck_dim", "final embedding width");
    integer("--hidden", "encoder.hidden_dim", "intermediate width (0 = bottleneck)");
    cmd->add_option_function<std::vector<long long>>(
           "--seeds",
           [&ov](const std::vector<long long>& v) { ov.set("seeds", json(v)); },
           "run seeds (space separated)")
        ->group("Config overrides");
    cmd->add_option_function<std::vector<std::string>>(
           "--defense",
           [&ov](const std::vector<std::string>& v) { ov.set("defense", json(v)); },
           "defense modes (plain|ncl|acl)")
        ->group("Config overrides");
    cmd->add_option_function<std::vector<std::string>>(
           "--attacks",
           [&ov](const std::vector<std::string>& v) { ov.set("attacks", json(v)); },
           "attack kinds (rand|fgsm|nettack)")
        ->group("Config overrides");
    str("--output-dir", "output_dir", "artifact directory");
}

// File < environment < flags.
rgnn::ConfigResult resolve_config(const Overrides& ov) {
    std::string text = "{}";
    std::string source = "<defaults>";
    if (!ov.config_path.empty()) {
        std::ifstream in(ov.config_path);
        if (!in) {
            rgnn::ConfigResult res;
            res.errors.push_back("cannot read config file " + ov.config_path);
            return res;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
        source = ov.config_path;
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) text = "{}";
    }
    json merged;
    try {
        merged = json::parse(text);
    } catch (const json::parse_error& e) {
        rgnn::ConfigResult res;
        res.errors.push_back(source + ": " + e.what());
        return res;
    }
    if (!merged.is_object()) {
        rgnn::ConfigResult res;
        res.errors.push_back(source + ": top level must be an object");
        return res;
    }
    bool outdir_overridden = false;
    auto assign = [&merged](const std::string& dotted, const json& v) {
        json* cur = &merged;
        std::istringstream ss(dotted);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.')) parts.push_back(part);
        for (size_t i = 0; i + 1 < parts.size(); ++i) {
            if (!cur->contains(parts[i]) || !(*cur)[parts[i]].is_object())
                (*cur)[parts[i]] = json::object();
            cur = &(*cur)[parts[i]];
        }
        (*cur)[parts.back()] = v;
    };
    for (const auto& [dotted, v] : ov.values) {
        assign(dotted, v);
        if (dotted == "output_dir") outdir_overridden = true;
    }
    if (!outdir_overridden) {
        if (const char* env = std::getenv("RGNN_OUTPUT_DIR"); env && *env)
            assign("output_dir", std::string(env));
    }
    return rgnn::parse_config_text(merged.dump(), source);
}

int report_config_errors(const rgnn::ConfigResult& res) {
    for (const std::string& e : res.errors) std::cerr << "config error: " << e << '\n';
    return rgnn::exit_config_error;
}

int jobs_from_env() {
    if (const char* env = std::getenv("RGNN_JOBS"); env && *env) {
        const int j = std::atoi(env);
        if (j >= 1) return j;
    }
    return 1;
}

struct Prepared {
    rgnn::Graph g;
    rgnn::SplitMasks masks;
    rgnn::SurrogateModel surrogate;
};

Prepared prepare(const rgnn::ExperimentConfig& cfg, std::uint64_t seed) {
    rgnn::Graph g = rgnn::load_dataset(cfg.dataset);
    rgnn::validate_encoder_config(cfg.encoder, g.feature_dim());
    rgnn::SplitMasks masks = rgnn::split_nodes(g, seed);
    rgnn::SurrogateModel surrogate = rgnn::train_surrogate(g, masks.train, seed);
    return Prepared{std::move(g), std::move(masks), std::move(surrogate)};
}

std::ofstream open_out(const std::string& path) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

// Writes a minimal polyline chart for a `x,series...` CSV.
void render_svg(std::istream& csv, std::ostream& svg) {
    std::string line;
    if (!std::getline(csv, line)) throw std::runtime_error("render: empty input");
    std::vector<std::string> names;
    {
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    if (names.size() < 2) throw std::runtime_error("render: need at least one series column");
    std::vector<double> xs;
    std::vector<std::vector<double>> series(names.size() - 1);
    int lineno = 1;
    while (std::getline(csv, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != names.size())
            throw std::runtime_error("render: line " + std::to_string(lineno) +
                                     " has wrong column count");
        xs.push_back(row[0]);
        for (size_t i = 1; i < row.size(); ++i) series[i - 1].push_back(row[i]);
    }
    if (xs.empty()) throw std::runtime_error("render: no data rows");

    double lo = series[0][0], hi = lo;
    for (const auto& s : series)
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi == lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const double w = 640, h = 400, ml = 60, mr = 150, mt = 20, mb = 40;
    auto px = [&](double x) {
        const double x0 = xs.front(), x1 = xs.back() == x0 ? x0 + 1 : xs.back();
        return ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    };
    auto py = [&](double v) { return mt + (hi - v) / (hi - lo) * (h - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", lo + pad);
    svg << "<text x='8' y='" << h - mb << "' font-size='12'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", hi - pad);
    svg << "<text x='8' y='" << mt + 12 << "' font-size='12'>" << buf << "</text>\n";
    for (size_t i = 0; i < xs.size(); ++i)
        svg << "<text x='" << px(xs[i]) - 4 << "' y='" << h - mb + 16 << "' font-size='12'>"
            << xs[i] << "</text>\n";
    for (size_t si = 0; si < series.size(); ++si) {
        const char* color = colors[si % 5];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
        for (size_t i = 0; i < xs.size(); ++i)
            svg << px(xs[i]) << ',' << py(series[si][i]) << ' ';
        svg << "'/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(si);
        svg << "<line x1='" << w - mr + 10 << "' y1='" << ly << "' x2='" << w - mr + 34 << "' y2='"
            << ly << "' stroke='" << color << "' stroke-width='2'/>\n";
        svg << "<text x='" << w - mr + 40 << "' y='" << ly + 4 << "' font-size='12'>"
            << names[si + 1] << "</text>\n";
    }
    svg << "</svg>\n";
}

int cmd_train(const rgnn::ExperimentConfig& cfg, std::uint64_t seed, const std::string& mode_name,
              std::string model_out, std::string log_out) {
    const rgnn::TrainMode mode = rgnn::train_mode_from_string(mode_name);
    Prepared p = prepare(cfg, seed);
    rgnn::TrainConfig tc = cfg.training;
    tc.seed = seed;
    rgnn::TrainResult tr = rgnn::train(p.g, p.masks, cfg.encoder, tc, mode, &p.surrogate);
    const std::string tag = rgnn::to_string(mode);
    if (model_out.empty()) model_out = cfg.output_dir + "/model_" + tag + ".ckpt";
    if (log_out.empty()) log_out = cfg.output_dir + "/train_" + tag + ".log.csv";
    fs::create_directories(fs::path(model_out).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(model_out).parent_path());
    rgnn::save_checkpoint(model_out, rgnn::Checkpoint{cfg.encoder, p.g.feature_dim(),
                                                      p.g.num_classes(), tr.params});
    auto f = open_out(log_out);
    rgnn::write_train_log(f, tr.log);
    std::cout << "trained " << tag << ": best val acc " << tr.best_val_acc << " at epoch "
              << tr.best_epoch << " (" << tr.epochs_run << " epochs run)\n"
              << "checkpoint: " << model_out << "\nlog: " << log_out << '\n';
    return rgnn::exit_ok;
}

int cmd_attack(const rgnn::ExperimentConfig& cfg, std::uint64_t seed, const std::string& kind_name,
               const std::vector<int>& target_ids, int budget, const std::string& out_path) {
    const rgnn::AttackKind kind = rgnn::attack_from_string(kind_name);
    Prepared p = prepare(cfg, seed);
    std::vector<rgnn::Perturbation> traces;
    for (int v : target_ids) {
        if (v < 0 || v >= p.g.num_nodes())
            throw std::runtime_error("target " + std::to_string(v) + " out of range");
        const int b = budget > 0 ? budget : p.g.degree(v) + 2;
        rgnn::AttackSpec spec{kind, b, rgnn::derive_seed(seed, static_cast<std::uint64_t>(v))};
        rgnn::MutableAdjacency before(p.g);
        const double m0 = rgnn::surrogate_margin(before, p.surrogate, v, p.g.label(v));
        rgnn::Perturbation pert = rgnn::run_attack(p.g, v, spec, &p.surrogate);
        rgnn::MutableAdjacency after(rgnn::apply(p.g, pert));
        const double m1 = rgnn::surrogate_margin(after, p.surrogate, v, p.g.label(v));
        std::cout << "target " << v << ": budget " << b << ", ops " << pert.ops.size()
                  << ", surrogate margin " << m0 << " -> " << m1
                  << (pert.truncated ? " (truncated)" : "")
                  << (pert.used_fallback ? " (fallback)" : "") << '\n';
        traces.push_back(std::move(pert));
    }
    if (out_path == "-") {
        rgnn::write_trace(std::cout, traces);
    } else {
        auto f = open_out(out_path);
        rgnn::write_trace(f, traces);
        std::cout << "trace: " << out_path << '\n';
    }
    return rgnn::exit_ok;
}

int cmd_evaluate(const rgnn::ExperimentConfig& cfg, std::uint64_t seed,
                 const std::string& model_path, const std::string& kind_name,
                 const std::string& out_path) {
    const rgnn::AttackKind kind = rgnn::attack_from_string(kind_name);
    Prepared p = prepare(cfg, seed);
    rgnn::Checkpoint ck = rgnn::load_checkpoint(model_path);
    if (ck.feature_dim != p.g.feature_dim() || ck.num_classes != p.g.num_classes())
        throw std::runtime_error("checkpoint dims do not match the dataset");
    const rgnn::ForwardResult clean = rgnn::forward(p.g, ck.cfg, ck.params);
    const rgnn::TargetSet targets =
        rgnn::select_targets(clean.logits, p.g.labels(), p.masks.unlabeled, cfg.eval.high_count,
                             cfg.eval.low_count, cfg.eval.random_count, seed);
    if (!targets.warning.empty()) std::cerr << "warning: " << targets.warning << '\n';
    const rgnn::BudgetRule rule{cfg.eval.degree_budget, cfg.eval.fixed_budget};
    rgnn::EvalReport rep = rgnn::evaluate_under_attack(p.g, ck.cfg, ck.params, targets, kind, rule,
                                                       &p.surrogate, seed);
    if (out_path == "-") {
        rgnn::write_report(std::cout, rep);
    } else {
        auto f = open_out(out_path);
        rgnn::write_report(f, rep);
        std::cout << "report: " << out_path << '\n';
    }
    std::cout << "accuracy under " << rgnn::to_string(kind) << ": " << rep.accuracy;
    if (rep.failed_count > 0) std::cout << " (" << rep.failed_count << " targets failed)";
    std::cout << '\n';
    return rgnn::exit_ok;
}

int cmd_sweep(const rgnn::ExperimentConfig& cfg, std::uint64_t seed, const std::string& axis,
              const std::string& kind_name, const std::string& out_path) {
    const rgnn::AttackKind kind = rgnn::attack_from_string(kind_name);
    Prepared p = prepare(cfg, seed);
    rgnn::TrainConfig tc = cfg.training;
    tc.seed = seed;
    rgnn::TrainResult base = rgnn::train(p.g, p.masks, cfg.encoder, tc, rgnn::TrainMode::Plain);
    const rgnn::ForwardResult clean = rgnn::forward(p.g, cfg.encoder, base.params);
    const rgnn::TargetSet targets =
        rgnn::select_targets(clean.logits, p.g.labels(), p.masks.unlabeled, cfg.eval.high_count,
                             cfg.eval.low_count, cfg.eval.random_count, seed);
    rgnn::SweepResult sweep = rgnn::variant_sweep(p.g, p.masks, cfg.encoder, tc, axis,
                                                  cfg.eval.sweep_budgets, kind, targets,
                                                  p.surrogate);
    if (out_path == "-") {
        rgnn::write_sweep_csv(std::cout, sweep);
    } else {
        auto f = open_out(out_path);
        rgnn::write_sweep_csv(f, sweep);
        std::cout << "sweep: " << out_path << '\n';
    }
    return rgnn::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph encoder robustness workbench"};
    app.require_subcommand(1);

    Overrides ov;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option_function<std::uint64_t>(
            "--seed",
            [&](std::uint64_t s) {
                seed_flag = s;
                seed_given = true;
            },
            "run seed (default: first configured seed)");
    };

    auto* c_train = app.add_subcommand("train", "train one defense mode and save a checkpoint");
    std::string defense_flag, model_out, log_out;
    add_config_options(c_train, ov);
    add_seed(c_train);
    c_train->add_option("--mode", defense_flag, "defense mode to train (plain|ncl|acl)");
    c_train->add_option("--model-out", model_out, "checkpoint path");
    c_train->add_option("--log-out", log_out, "training log path");

    auto* c_attack = app.add_subcommand("attack", "attack targets and emit an edit-script trace");
    std::string attack_flag = "nettack", trace_out = "-";
    std::vector<int> target_ids;
    int budget_flag = 0;
    add_config_options(c_attack, ov);
    add_seed(c_attack);
    c_attack->add_option("--attack", attack_flag, "attack kind (rand|fgsm|nettack)");
    c_attack->add_option("--target", target_ids, "target node ids")->required();
    c_attack->add_option("--budget", budget_flag, "edit budget (default: degree + 2 per target)");
    c_attack->add_option("--out", trace_out, "trace path, `-` for stdout");

    auto* c_eval = app.add_subcommand("evaluate", "evaluate a saved model under attack");
    std::string model_path, eval_attack = "nettack", report_out = "-";
    add_config_options(c_eval, ov);
    add_seed(c_eval);
    c_eval->add_option("--model", model_path, "model checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    c_eval->add_option("--attack", eval_attack, "attack kind (rand|fgsm|nettack)");
    c_eval->add_option("--out", report_out, "report path, `-` for stdout");

    auto* c_sweep = app.add_subcommand("sweep", "margin curves across encoder variants");
    std::string axis = "intra", sweep_attack = "nettack", sweep_out = "-";
    add_config_options(c_sweep, ov);
    add_seed(c_sweep);
    c_sweep->add_option("--axis", axis, "variant axis (intra|inter|dim)");
    c_sweep->add_option("--attack", sweep_attack, "attack kind (rand|fgsm|nettack)");
    c_sweep->add_option("--out", sweep_out, "csv path, `-` for stdout");

    auto* c_pipe = app.add_subcommand("pipeline", "full multi-seed experiment with artifacts");
    int jobs = 0;
    add_config_options(c_pipe, ov);
    c_pipe->add_option("--jobs", jobs, "worker threads over seeds (default: RGNN_JOBS or 1)");

    auto* c_render = app.add_subcommand("render", "render a csv series file to svg");
    std::string render_in, render_out;
    c_render->add_option("--in", render_in, "input csv")->required()->check(CLI::ExistingFile);
    c_render->add_option("--out", render_out, "output svg")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return rgnn::exit_config_error;
    }

    try {
        if (c_render->parsed()) {
            std::ifstream in(render_in);
            if (!in) throw std::runtime_error("cannot read " + render_in);
            auto out = open_out(render_out);
            render_svg(in, out);
            std::cout << "rendered: " << render_out << '\n';
            return rgnn::exit_ok;
        }

        rgnn::ConfigResult res = resolve_config(ov);
        if (!res.ok()) return report_config_errors(res);
        const rgnn::ExperimentConfig& cfg = res.config;
        const std::uint64_t seed = seed_given ? seed_flag : cfg.seeds.front();

        if (c_train->parsed()) {
            const std::string mode =
                defense_flag.empty() ? rgnn::to_string(cfg.defenses.front()) : defense_flag;
            return cmd_train(cfg, seed, mode, model_out, log_out);
        }
        if (c_attack->parsed())
            return cmd_attack(cfg, seed, attack_flag, target_ids, budget_flag, trace_out);
        if (c_eval->parsed()) return cmd_evaluate(cfg, seed, model_path, eval_attack, report_out);
        if (c_sweep->parsed()) return cmd_sweep(cfg, seed, axis, sweep_attack, sweep_out);
        if (c_pipe->parsed()) {
            const int j = jobs >= 1 ? jobs : jobs_from_env();
            return rgnn::run_pipeline(cfg, j, std::cout);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return rgnn::exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return rgnn::exit_runtime_error;
    }
    return rgnn::exit_config_error;
}
