#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgnn/attack.hpp"
#include "rgnn/encoder.hpp"
#include "rgnn/graph.hpp"
#include "rgnn/trainer.hpp"

namespace rgnn {

struct DatasetConfig {
    std::string kind = "sbm";  // sbm | cora | citeseer | polblogs | custom
    // sbm parameters
    std::vector<int> blocks{100, 100};
    double p_in = 0.1;
    double p_out = 0.005;
    int feature_dim = 300;
    double noise = 0.3;
    std::uint64_t sbm_seed = 7;  // dataset identity; run seeds only vary splits
    // named datasets resolve to <data_dir>/<kind>/{edges,labels,features}.txt
    std::string data_dir = "data";
    // custom file paths (features optional)
    std::string edges, features, labels;
    bool largest_component = false;
};

struct EvalConfig {
    int high_count = 2;
    int low_count = 2;
    int random_count = 4;
    bool degree_budget = true;  // per-target budget d_v + 2
    int fixed_budget = 0;       // used when degree_budget is false
    std::vector<int> sweep_budgets{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<std::string> sweep_axes;  // subset of {intra, inter, dim}
};

struct ExperimentConfig {
    DatasetConfig dataset;
    EncoderConfig encoder;
    TrainConfig training;
    std::vector<TrainMode> defenses{TrainMode::Plain};
    std::vector<AttackKind> attacks{AttackKind::Rand, AttackKind::Fgsm, AttackKind::Nettack};
    EvalConfig eval;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string output_dir = "out";
};

struct ConfigResult {
    ExperimentConfig config;
    std::vector<std::string> errors;  // every violation, not just the first

    bool ok() const { return errors.empty(); }
};

// Strict parse: unknown keys are errors, every field is range-checked, and
// cross-module constraints (encoder widths against the dataset feature
// dimension, referenced paths) are verified where they are knowable.
ConfigResult parse_config_text(const std::string& text, const std::string& source_name);

// An empty or missing-body file yields the full default configuration.
ConfigResult load_config_file(const std::string& path);

// Serialized normalized form (stable key order) for manifests.
std::string config_to_json(const ExperimentConfig& cfg);

// Instantiates the configured dataset (generator or files).
Graph load_dataset(const DatasetConfig& d);

}  // namespace rgnn
