#include "rgnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "rgnn/rng.hpp"

namespace rgnn {

double margin(const std::vector<double>& probs, int true_class) {
    if (probs.size() < 2) throw std::invalid_argument("margin: need at least 2 classes");
    if (true_class < 0 || true_class >= static_cast<int>(probs.size()))
        throw std::invalid_argument("margin: true class out of range");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= -1e-9 && p <= 1.0 + 1e-9))
            throw std::invalid_argument("margin: probability outside [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("margin: probabilities do not sum to 1");
    double best_other = -1.0;
    for (size_t c = 0; c < probs.size(); ++c)
        if (static_cast<int>(c) != true_class) best_other = std::max(best_other, probs[c]);
    return probs[true_class] - best_other;
}

std::vector<double> softmax_row(const Tensor& logits, int row) {
    if (row < 0 || row >= logits.rows) throw std::invalid_argument("softmax_row: row out of range");
    const double* r = logits.row_ptr(row);
    std::vector<double> v(r, r + logits.cols);
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

std::vector<int> TargetSet::all() const {
    std::vector<int> out = high_conf;
    out.insert(out.end(), low_conf.begin(), low_conf.end());
    out.insert(out.end(), random.begin(), random.end());
    return out;
}

TargetSet select_targets(const Tensor& clean_logits, const std::vector<int>& labels,
                         const std::vector<int>& test_nodes, int hi, int lo, int rnd,
                         std::uint64_t seed) {
    if (hi < 0 || lo < 0 || rnd < 0) throw std::invalid_argument("select_targets: negative count");
    if (test_nodes.empty()) throw std::invalid_argument("select_targets: empty test set");
    // Margin-sorted correct nodes, best first; ties broken by node id so the
    // ranking is total.
    std::vector<std::pair<double, int>> correct;
    for (int v : test_nodes) {
        double m = margin(softmax_row(clean_logits, v), labels[v]);
        if (m > 0.0) correct.push_back({m, v});
    }
    std::sort(correct.begin(), correct.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    TargetSet ts;
    int want_hi = hi, want_lo = lo;
    const int c = static_cast<int>(correct.size());
    if (want_hi + want_lo > c) {
        const int total = want_hi + want_lo;
        want_hi = total > 0 ? (hi * c) / total : 0;
        want_lo = total > 0 ? (lo * c) / total : 0;
        ts.warning = "only " + std::to_string(c) + " correctly classified test nodes; scaled " +
                     "high/low counts to " + std::to_string(want_hi) + "/" + std::to_string(want_lo);
    }
    for (int i = 0; i < want_hi; ++i) ts.high_conf.push_back(correct[i].second);
    for (int i = 0; i < want_lo; ++i)
        ts.low_conf.push_back(correct[c - 1 - i].second);  // smallest positive margins

    std::vector<int> taken = ts.high_conf;
    taken.insert(taken.end(), ts.low_conf.begin(), ts.low_conf.end());
    std::sort(taken.begin(), taken.end());
    std::vector<int> rest;
    for (int v : test_nodes)
        if (!std::binary_search(taken.begin(), taken.end(), v)) rest.push_back(v);
    auto rng = make_rng(seed, seed_stream::targets);
    for (int i = 0; i < rnd && !rest.empty(); ++i) {
        const int last = static_cast<int>(rest.size()) - 1;
        int j = std::uniform_int_distribution<int>(0, last)(rng);
        ts.random.push_back(rest[j]);
        rest[j] = rest[last];
        rest.pop_back();
    }
    if (static_cast<int>(ts.random.size()) < rnd) {
        if (!ts.warning.empty()) ts.warning += "; ";
        ts.warning += "random bucket has only " + std::to_string(ts.random.size()) + " of " +
                      std::to_string(rnd) + " nodes";
    }
    return ts;
}

std::string param_fingerprint(const ModelParams& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* p, size_t len) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const Tensor* t : params.all()) {
        mix(&t->rows, sizeof(t->rows));
        mix(&t->cols, sizeof(t->cols));
        mix(t->data.data(), t->data.size() * sizeof(double));
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

EvalReport evaluate_under_attack(const Graph& g, const EncoderConfig& cfg,
                                 const ModelParams& params, const TargetSet& targets,
                                 AttackKind kind, const BudgetRule& rule,
                                 const SurrogateModel* surrogate, std::uint64_t seed) {
    EvalReport report;
    report.attack = kind;
    report.seed = seed;
    report.fingerprint = param_fingerprint(params);
    const ForwardResult clean = forward(g, cfg, params);

    auto run_bucket = [&](const std::vector<int>& nodes, const char* bucket) {
        for (int v : nodes) {
            TargetRecord rec;
            rec.node = v;
            rec.bucket = bucket;
            rec.budget = rule.budget_for(g, v);
            rec.clean_margin = margin(softmax_row(clean.logits, v), g.label(v));
            rec.correct_before = rec.clean_margin > 0.0;
            if (rec.budget == 0) {
                rec.attacked_margin = rec.clean_margin;
                rec.correct_after = rec.correct_before;
                report.records.push_back(std::move(rec));
                continue;
            }
            AttackSpec spec{kind, rec.budget, derive_seed(seed, static_cast<std::uint64_t>(v))};
            try {
                Perturbation p = run_attack(g, v, spec, surrogate);
                rec.ops_used = static_cast<int>(p.ops.size());
                rec.truncated = p.truncated;
                rec.used_fallback = p.used_fallback;
                const Graph attacked = apply(g, p);
                const ForwardResult after = forward(attacked, cfg, params);
                rec.attacked_margin = margin(softmax_row(after.logits, v), g.label(v));
                rec.correct_after = rec.attacked_margin > 0.0;
                report.traces.push_back(std::move(p));
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.fail_reason = e.what();
                ++report.failed_count;
            }
            report.records.push_back(std::move(rec));
        }
    };
    run_bucket(targets.high_conf, "high");
    run_bucket(targets.low_conf, "low");
    run_bucket(targets.random, "random");

    int ok = 0, correct = 0;
    for (const TargetRecord& r : report.records) {
        if (r.failed) continue;
        ++ok;
        if (r.attacked_margin > 0.0) ++correct;
    }
    report.accuracy = ok > 0 ? static_cast<double>(correct) / ok : 0.0;
    return report;
}

void write_report(std::ostream& out, const EvalReport& report) {
    out << "node\tbucket\tbudget\tops_used\tclean_margin\tattacked_margin\tcorrect_before"
           "\tcorrect_after\tflags\n";
    char buf[64];
    for (const TargetRecord& r : report.records) {
        std::string flags;
        auto add_flag = [&flags](const char* f) {
            if (!flags.empty()) flags += ',';
            flags += f;
        };
        if (r.truncated) add_flag("truncated");
        if (r.used_fallback) add_flag("fallback");
        if (r.failed) {
            std::string reason = r.fail_reason;
            for (char& ch : reason)
                if (ch == '\t' || ch == '\n' || ch == ' ' || ch == ',') ch = '_';
            add_flag(("failed:" + reason).c_str());
        }
        if (flags.empty()) flags = "-";
        out << r.node << '\t' << r.bucket << '\t' << r.budget << '\t' << r.ops_used << '\t';
        std::snprintf(buf, sizeof(buf), "%.10g\t%.10g", r.clean_margin, r.attacked_margin);
        out << buf << '\t' << (r.correct_before ? 1 : 0) << '\t' << (r.correct_after ? 1 : 0)
            << '\t' << flags << '\n';
    }
}

SweepResult variant_sweep(const Graph& g, const SplitMasks& masks, const EncoderConfig& base,
                          const TrainConfig& tc, const std::string& axis,
                          const std::vector<int>& budgets, AttackKind kind,
                          const TargetSet& targets, const SurrogateModel& surrogate) {
    if (budgets.empty()) throw std::invalid_argument("variant_sweep: empty budget list");
    for (int b : budgets)
        if (b < 1) throw std::invalid_argument("variant_sweep: budgets must be >= 1");
    const int max_budget = *std::max_element(budgets.begin(), budgets.end());

    std::vector<std::pair<std::string, EncoderConfig>> variants;
    if (axis == "intra") {
        for (IntraMode m : {IntraMode::Mean, IntraMode::Sum, IntraMode::Max}) {
            EncoderConfig c = base;
            c.intra = m;
            variants.push_back({to_string(m), c});
        }
    } else if (axis == "inter") {
        for (InterMode m : {InterMode::None, InterMode::Skip, InterMode::Dense}) {
            EncoderConfig c = base;
            c.inter = m;
            variants.push_back({to_string(m), c});
        }
    } else if (axis == "dim") {
        for (const char* profile : {"low", "mid", "high"}) {
            EncoderConfig c = base;
            c.bottleneck_dim = profile_dim(profile);
            c.hidden_dim = 0;
            variants.push_back({profile, c});
        }
    } else {
        throw std::invalid_argument("variant_sweep: unknown axis `" + axis +
                                    "` (expected intra, inter, or dim)");
    }

    const std::vector<int> target_nodes = targets.all();
    if (target_nodes.empty()) throw std::invalid_argument("variant_sweep: empty target set");

    // The edit scripts depend only on the surrogate, so each budget point is a
    // prefix of one max-budget attack shared by every variant.
    std::vector<std::vector<Graph>> attacked(target_nodes.size());
    for (size_t ti = 0; ti < target_nodes.size(); ++ti) {
        const int v = target_nodes[ti];
        AttackSpec spec{kind, max_budget, derive_seed(tc.seed, static_cast<std::uint64_t>(v))};
        const Perturbation full = run_attack(g, v, spec, &surrogate);
        for (int b : budgets) {
            Perturbation prefix = full;
            prefix.ops.resize(std::min<size_t>(b, full.ops.size()));
            prefix.budget = b;
            attacked[ti].push_back(apply(g, prefix));
        }
    }

    SweepResult sweep;
    sweep.axis = axis;
    sweep.budgets = budgets;
    for (auto& [name, vcfg] : variants) {
        validate_encoder_config(vcfg, g.feature_dim());
        TrainResult tr = train(g, masks, vcfg, tc, TrainMode::Plain);
        VariantCurve curve;
        curve.name = name;
        curve.mean_margin.assign(budgets.size(), 0.0);
        for (size_t ti = 0; ti < target_nodes.size(); ++ti) {
            const int v = target_nodes[ti];
            for (size_t bi = 0; bi < budgets.size(); ++bi) {
                const ForwardResult fr = forward(attacked[ti][bi], vcfg, tr.params);
                curve.mean_margin[bi] += margin(softmax_row(fr.logits, v), g.label(v));
            }
        }
        for (double& m : curve.mean_margin) m /= static_cast<double>(target_nodes.size());
        sweep.curves.push_back(std::move(curve));
    }
    return sweep;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "budget";
    for (const VariantCurve& c : sweep.curves) out << ',' << c.name;
    out << '\n';
    char buf[64];
    for (size_t bi = 0; bi < sweep.budgets.size(); ++bi) {
        out << sweep.budgets[bi];
        for (const VariantCurve& c : sweep.curves) {
            std::snprintf(buf, sizeof(buf), ",%.10g", c.mean_margin[bi]);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace rgnn
