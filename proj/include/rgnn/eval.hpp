#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rgnn/attack.hpp"
#include "rgnn/encoder.hpp"
#include "rgnn/graph.hpp"
#include "rgnn/trainer.hpp"

namespace rgnn {

// Classification margin: probability of the true class minus the largest
// other-class probability. Positive iff correctly classified.
double margin(const std::vector<double>& probs, int true_class);

std::vector<double> softmax_row(const Tensor& logits, int row);

struct TargetSet {
    std::vector<int> high_conf;  // top-margin correct test nodes
    std::vector<int> low_conf;   // smallest-positive-margin correct test nodes
    std::vector<int> random;     // uniform over the remaining test nodes
    std::string warning;         // nonempty when counts had to be scaled down

    std::vector<int> all() const;
};

// Margin-ranked bucket selection over the test nodes, deterministic per seed.
// When fewer than hi+lo test nodes are correctly classified the two bucket
// sizes shrink proportionally and a warning is recorded.
TargetSet select_targets(const Tensor& clean_logits, const std::vector<int>& labels,
                         const std::vector<int>& test_nodes, int hi, int lo, int rnd,
                         std::uint64_t seed);

// Per-target attack budget. The default follows the degree rule n_p = d_v + 2;
// a fixed override of 0 means the identity attack.
struct BudgetRule {
    bool degree_plus_two = true;
    int fixed = 0;

    int budget_for(const Graph& g, int v) const {
        return degree_plus_two ? g.degree(v) + 2 : fixed;
    }
};

struct TargetRecord {
    int node = -1;
    std::string bucket;
    int budget = 0;
    int ops_used = 0;
    double clean_margin = 0.0;
    double attacked_margin = 0.0;
    bool correct_before = false;
    bool correct_after = false;
    bool truncated = false;
    bool used_fallback = false;
    bool failed = false;
    std::string fail_reason;
};

struct EvalReport {
    AttackKind attack = AttackKind::Rand;
    std::uint64_t seed = 0;
    std::string fingerprint;  // parameter hash; evaluation must not change it
    std::vector<TargetRecord> records;
    std::vector<Perturbation> traces;  // one per non-failed attacked target
    double accuracy = 0.0;             // fraction of non-failed targets with margin > 0
    int failed_count = 0;
};

// Evasion evaluation: attacks are built per target against the clean graph,
// applied, and the frozen model is re-run on each perturbed copy. A target
// whose attack throws is flagged and excluded from the aggregate.
EvalReport evaluate_under_attack(const Graph& g, const EncoderConfig& cfg,
                                 const ModelParams& params, const TargetSet& targets,
                                 AttackKind kind, const BudgetRule& rule,
                                 const SurrogateModel* surrogate, std::uint64_t seed);

// Tab-separated records, one line per target after a header.
void write_report(std::ostream& out, const EvalReport& report);

// FNV-1a over shapes and raw bytes of all parameter matrices.
std::string param_fingerprint(const ModelParams& params);

struct VariantCurve {
    std::string name;
    std::vector<double> mean_margin;  // parallel to the budget list
};

struct SweepResult {
    std::string axis;
    std::vector<int> budgets;
    std::vector<VariantCurve> curves;
};

// Trains one plain model per variant on the chosen axis (intra, inter, dim),
// attacks the shared targets once at the maximum budget, and reads the margin
// after each budget prefix of the edit script.
SweepResult variant_sweep(const Graph& g, const SplitMasks& masks, const EncoderConfig& base,
                          const TrainConfig& tc, const std::string& axis,
                          const std::vector<int>& budgets, AttackKind kind,
                          const TargetSet& targets, const SurrogateModel& surrogate);

// Comma-separated curves: budget column then one column per variant.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

}  // namespace rgnn
