#include "rgnn/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rgnn/graph_io.hpp"
#include "rgnn/rng.hpp"
#include "rgnn/sbm.hpp"

namespace rgnn {

namespace {

using nlohmann::json;

class Checker {
public:
    explicit Checker(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const std::string& msg) { errors_.push_back(msg); }

    // Rejects keys outside the allowed set for one object level.
    void known_keys(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
        for (const auto& [key, _] : j.items())
            if (!allowed.count(key))
                error(where + ": unknown key `" + key + "`");
    }

    bool object(const json& j, const std::string& where) {
        if (j.is_object()) return true;
        error(where + ": expected an object");
        return false;
    }

    template <typename T>
    void field(const json& j, const std::string& where, const std::string& key, T& out) {
        if (!j.contains(key)) return;
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception&) {
            error(where + "." + key + ": wrong type");
        }
    }

private:
    std::vector<std::string>& errors_;
};

void parse_dataset(const json& j, Checker& ck, DatasetConfig& d) {
    if (!ck.object(j, "dataset")) return;
    ck.known_keys(j, "dataset",
                  {"kind", "blocks", "p_in", "p_out", "feature_dim", "noise", "sbm_seed",
                   "data_dir", "edges", "features", "labels", "largest_component"});
    ck.field(j, "dataset", "kind", d.kind);
    ck.field(j, "dataset", "blocks", d.blocks);
    ck.field(j, "dataset", "p_in", d.p_in);
    ck.field(j, "dataset", "p_out", d.p_out);
    ck.field(j, "dataset", "feature_dim", d.feature_dim);
    ck.field(j, "dataset", "noise", d.noise);
    ck.field(j, "dataset", "sbm_seed", d.sbm_seed);
    ck.field(j, "dataset", "data_dir", d.data_dir);
    ck.field(j, "dataset", "edges", d.edges);
    ck.field(j, "dataset", "features", d.features);
    ck.field(j, "dataset", "labels", d.labels);
    ck.field(j, "dataset", "largest_component", d.largest_component);
}

void parse_encoder(const json& j, Checker& ck, EncoderConfig& e) {
    if (!ck.object(j, "encoder")) return;
    ck.known_keys(j, "encoder",
                  {"intra", "inter", "layers", "perceptron_depth", "bottleneck_dim", "hidden_dim"});
    std::string intra = to_string(e.intra), inter = to_string(e.inter);
    ck.field(j, "encoder", "intra", intra);
    ck.field(j, "encoder", "inter", inter);
    try {
        e.intra = intra_from_string(intra);
    } catch (const std::invalid_argument& ex) {
        ck.error(std::string("encoder.intra: ") + ex.what());
    }
    try {
        e.inter = inter_from_string(inter);
    } catch (const std::invalid_argument& ex) {
        ck.error(std::string("encoder.inter: ") + ex.what());
    }
    ck.field(j, "encoder", "layers", e.layers);
    ck.field(j, "encoder", "perceptron_depth", e.perceptron_depth);
    ck.field(j, "encoder", "bottleneck_dim", e.bottleneck_dim);
    ck.field(j, "encoder", "hidden_dim", e.hidden_dim);
}

void parse_training(const json& j, Checker& ck, TrainConfig& t) {
    if (!ck.object(j, "training")) return;
    ck.known_keys(j, "training",
                  {"epochs", "lr", "lr_decay", "decay_every", "lambda_acl", "neg_per_pos",
                   "patience", "gen_budget", "batch_size"});
    ck.field(j, "training", "epochs", t.epochs);
    ck.field(j, "training", "lr", t.lr);
    ck.field(j, "training", "lr_decay", t.lr_decay);
    ck.field(j, "training", "decay_every", t.decay_every);
    ck.field(j, "training", "lambda_acl", t.lambda_acl);
    ck.field(j, "training", "neg_per_pos", t.neg_per_pos);
    ck.field(j, "training", "patience", t.patience);
    ck.field(j, "training", "gen_budget", t.gen_budget);
    ck.field(j, "training", "batch_size", t.batch_size);
}

void parse_eval(const json& j, Checker& ck, EvalConfig& e) {
    if (!ck.object(j, "eval")) return;
    ck.known_keys(j, "eval",
                  {"high_count", "low_count", "random_count", "degree_budget", "fixed_budget",
                   "sweep_budgets", "sweep_axes"});
    ck.field(j, "eval", "high_count", e.high_count);
    ck.field(j, "eval", "low_count", e.low_count);
    ck.field(j, "eval", "random_count", e.random_count);
    ck.field(j, "eval", "degree_budget", e.degree_budget);
    ck.field(j, "eval", "fixed_budget", e.fixed_budget);
    ck.field(j, "eval", "sweep_budgets", e.sweep_budgets);
    ck.field(j, "eval", "sweep_axes", e.sweep_axes);
}

bool is_named_dataset(const std::string& kind) {
    return kind == "cora" || kind == "citeseer" || kind == "polblogs";
}

void cross_validate(Checker& ck, ExperimentConfig& c) {
    DatasetConfig& d = c.dataset;
    if (d.kind == "sbm") {
        if (d.blocks.size() < 2) ck.error("dataset.blocks: need at least 2 blocks");
        for (int b : d.blocks)
            if (b < 1) ck.error("dataset.blocks: block sizes must be >= 1");
        if (!(d.p_in > 0.0 && d.p_in <= 1.0)) ck.error("dataset.p_in: must be in (0, 1]");
        if (!(d.p_out >= 0.0 && d.p_out <= 1.0)) ck.error("dataset.p_out: must be in [0, 1]");
        if (d.p_in <= d.p_out) ck.error("dataset.p_in: must exceed p_out");
        if (d.feature_dim < 1) ck.error("dataset.feature_dim: must be >= 1");
        if (d.noise < 0.0) ck.error("dataset.noise: must be >= 0");
    } else if (is_named_dataset(d.kind)) {
        namespace fs = std::filesystem;
        const fs::path dir = fs::path(d.data_dir) / d.kind;
        if (!fs::exists(dir / "edges.txt"))
            ck.error("dataset: " + (dir / "edges.txt").string() + " does not exist");
        if (!fs::exists(dir / "labels.txt"))
            ck.error("dataset: " + (dir / "labels.txt").string() + " does not exist");
    } else if (d.kind == "custom") {
        if (d.edges.empty()) ck.error("dataset.edges: required for custom datasets");
        if (d.labels.empty()) ck.error("dataset.labels: required for custom datasets");
        for (const std::string& p : {d.edges, d.labels})
            if (!p.empty() && !std::filesystem::exists(p))
                ck.error("dataset: path `" + p + "` does not exist");
        if (!d.features.empty() && !std::filesystem::exists(d.features))
            ck.error("dataset: path `" + d.features + "` does not exist");
    } else {
        ck.error("dataset.kind: `" + d.kind +
                 "` is not one of sbm, cora, citeseer, polblogs, custom");
    }

    // fieldwise so every training violation lands in the error list
    const TrainConfig& t = c.training;
    if (t.epochs < 1) ck.error("training.epochs must be >= 1");
    if (!(t.lr > 0.0)) ck.error("training.lr must be > 0");
    if (!(t.lr_decay > 0.0 && t.lr_decay <= 1.0)) ck.error("training.lr_decay must be in (0, 1]");
    if (t.decay_every < 1) ck.error("training.decay_every must be >= 1");
    if (t.neg_per_pos < 1) ck.error("training.neg_per_pos must be >= 1");
    if (t.patience < 1) ck.error("training.patience must be >= 1");
    if (t.lambda_acl < 0.0) ck.error("training.lambda_acl must be >= 0");
    bool has_acl = false;
    for (TrainMode m : c.defenses)
        if (m == TrainMode::Acl) has_acl = true;
    if (has_acl) {
        if (t.gen_budget < 1) ck.error("training.gen_budget must be >= 1 in acl mode");
        if (t.batch_size < 1) ck.error("training.batch_size must be >= 1 in acl mode");
    }

    // Encoder widths are checkable now only when the feature width is known
    // before loading (the generator case); file datasets are checked at load.
    if (d.kind == "sbm") {
        try {
            validate_encoder_config(c.encoder, d.feature_dim);
        } catch (const std::invalid_argument& e) {
            ck.error(std::string("encoder: ") + e.what());
        }
    }
    if (c.encoder.layers < 1) ck.error("encoder.layers: must be >= 1");
    if (c.encoder.perceptron_depth < 1) ck.error("encoder.perceptron_depth: must be >= 1");

    if (c.seeds.empty()) ck.error("seeds: must be nonempty");
    if (c.defenses.empty()) ck.error("defense: must name at least one mode");
    for (std::size_t i = 0; i < c.defenses.size(); ++i)
        for (std::size_t j = i + 1; j < c.defenses.size(); ++j)
            if (c.defenses[i] == c.defenses[j]) {
                ck.error(std::string("defense: `") + to_string(c.defenses[i]) +
                         "` listed more than once");
                j = c.defenses.size();
            }
    if (c.eval.high_count < 0 || c.eval.low_count < 0 || c.eval.random_count < 0)
        ck.error("eval: target counts must be >= 0");
    if (c.eval.high_count + c.eval.low_count + c.eval.random_count < 1)
        ck.error("eval: at least one target required");
    if (!c.eval.degree_budget && c.eval.fixed_budget < 0)
        ck.error("eval.fixed_budget: must be >= 0");
    for (int b : c.eval.sweep_budgets)
        if (b < 1) ck.error("eval.sweep_budgets: budgets must be >= 1");
    for (const std::string& a : c.eval.sweep_axes)
        if (a != "intra" && a != "inter" && a != "dim")
            ck.error("eval.sweep_axes: `" + a + "` is not one of intra, inter, dim");
    if (c.output_dir.empty()) ck.error("output_dir: must be nonempty");
}

}  // namespace

ConfigResult parse_config_text(const std::string& text, const std::string& source_name) {
    ConfigResult res;
    Checker ck(res.errors);

    std::string body = text;
    // Whitespace-only input picks up every default.
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) body = "{}";

    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        ck.error(source_name + ": " + e.what());
        return res;
    }
    if (!j.is_object()) {
        ck.error(source_name + ": top level must be an object");
        return res;
    }
    ck.known_keys(j, source_name,
                  {"dataset", "encoder", "training", "defense", "attacks", "eval", "seeds",
                   "output_dir"});

    ExperimentConfig& c = res.config;
    if (j.contains("dataset")) parse_dataset(j["dataset"], ck, c.dataset);
    if (j.contains("encoder")) parse_encoder(j["encoder"], ck, c.encoder);
    if (j.contains("training")) parse_training(j["training"], ck, c.training);
    if (j.contains("eval")) parse_eval(j["eval"], ck, c.eval);

    if (j.contains("defense")) {
        std::vector<std::string> names;
        if (j["defense"].is_string()) {
            names.push_back(j["defense"].get<std::string>());
        } else {
            ck.field(j, "config", "defense", names);
        }
        if (!names.empty()) {
            c.defenses.clear();
            for (const std::string& n : names) {
                try {
                    c.defenses.push_back(train_mode_from_string(n));
                } catch (const std::invalid_argument& e) {
                    ck.error(std::string("defense: ") + e.what());
                }
            }
        }
    }
    if (j.contains("attacks")) {
        std::vector<std::string> names;
        ck.field(j, "config", "attacks", names);
        c.attacks.clear();
        for (const std::string& n : names) {
            try {
                c.attacks.push_back(attack_from_string(n));
            } catch (const std::invalid_argument& e) {
                ck.error(std::string("attacks: ") + e.what());
            }
        }
    }
    ck.field(j, "config", "seeds", c.seeds);
    ck.field(j, "config", "output_dir", c.output_dir);

    cross_validate(ck, c);
    return res;
}

ConfigResult load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ConfigResult res;
        res.errors.push_back("cannot read config file " + path);
        return res;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    json& d = j["dataset"];
    d["kind"] = c.dataset.kind;
    if (c.dataset.kind == "sbm") {
        d["blocks"] = c.dataset.blocks;
        d["p_in"] = c.dataset.p_in;
        d["p_out"] = c.dataset.p_out;
        d["feature_dim"] = c.dataset.feature_dim;
        d["noise"] = c.dataset.noise;
        d["sbm_seed"] = c.dataset.sbm_seed;
    } else if (c.dataset.kind == "custom") {
        d["edges"] = c.dataset.edges;
        if (!c.dataset.features.empty()) d["features"] = c.dataset.features;
        d["labels"] = c.dataset.labels;
    } else {
        d["data_dir"] = c.dataset.data_dir;
    }
    d["largest_component"] = c.dataset.largest_component;
    json& e = j["encoder"];
    e["intra"] = to_string(c.encoder.intra);
    e["inter"] = to_string(c.encoder.inter);
    e["layers"] = c.encoder.layers;
    e["perceptron_depth"] = c.encoder.perceptron_depth;
    e["bottleneck_dim"] = c.encoder.bottleneck_dim;
    e["hidden_dim"] = c.encoder.hidden_dim;
    json& t = j["training"];
    t["epochs"] = c.training.epochs;
    t["lr"] = c.training.lr;
    t["lr_decay"] = c.training.lr_decay;
    t["decay_every"] = c.training.decay_every;
    t["lambda_acl"] = c.training.lambda_acl;
    t["neg_per_pos"] = c.training.neg_per_pos;
    t["patience"] = c.training.patience;
    t["gen_budget"] = c.training.gen_budget;
    t["batch_size"] = c.training.batch_size;
    std::vector<std::string> defenses, attacks;
    for (TrainMode m : c.defenses) defenses.push_back(to_string(m));
    for (AttackKind k : c.attacks) attacks.push_back(to_string(k));
    j["defense"] = defenses;
    j["attacks"] = attacks;
    json& ev = j["eval"];
    ev["high_count"] = c.eval.high_count;
    ev["low_count"] = c.eval.low_count;
    ev["random_count"] = c.eval.random_count;
    ev["degree_budget"] = c.eval.degree_budget;
    ev["fixed_budget"] = c.eval.fixed_budget;
    ev["sweep_budgets"] = c.eval.sweep_budgets;
    ev["sweep_axes"] = c.eval.sweep_axes;
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir;
    return j.dump(2);
}

Graph load_dataset(const DatasetConfig& d) {
    Graph g = [&] {
        if (d.kind == "sbm")
            return generate_sbm(d.blocks, d.p_in, d.p_out, d.feature_dim, d.noise, d.sbm_seed);
        if (is_named_dataset(d.kind)) {
            namespace fs = std::filesystem;
            const fs::path dir = fs::path(d.data_dir) / d.kind;
            const fs::path features = dir / "features.txt";
            std::optional<std::string> fpath;
            if (fs::exists(features)) fpath = features.string();
            return load_graph((dir / "edges.txt").string(), fpath, (dir / "labels.txt").string());
        }
        if (d.kind == "custom") {
            std::optional<std::string> fpath;
            if (!d.features.empty()) fpath = d.features;
            return load_graph(d.edges, fpath, d.labels);
        }
        throw std::invalid_argument("unknown dataset kind: " + d.kind);
    }();
    if (d.largest_component) g = largest_connected_component(g);
    return g;
}

}  // namespace rgnn
