#include "rgnn/attack.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rgnn/rng.hpp"
#include "rgnn/tape.hpp"

namespace rgnn {

namespace {

std::pair<int, int> norm_pair(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

EdgeOp make_op(const MutableAdjacency& adj, int u, int v) {
    auto [a, b] = norm_pair(u, v);
    return EdgeOp{adj.has(a, b) ? EdgeOpKind::Remove : EdgeOpKind::Add, a, b};
}

void check_target(const Graph& g, int target) {
    if (target < 0 || target >= g.num_nodes())
        throw std::invalid_argument("attack: target " + std::to_string(target) + " out of range");
}

// One uniform random edit at the target: a coin picks add-cross-class vs
// delete-same-class, falling back to the feasible kind. Empty optional when
// neither kind has a candidate.
std::optional<EdgeOp> rand_step(const MutableAdjacency& adj,
                                const std::set<std::pair<int, int>>& flipped, int target,
                                const std::vector<int>& labels, std::mt19937_64& rng) {
    std::vector<int> adds, dels;
    for (int v = 0; v < adj.num_nodes(); ++v) {
        if (v == target || labels[v] == labels[target]) continue;
        if (adj.has(target, v) || flipped.count(norm_pair(target, v))) continue;
        adds.push_back(v);
    }
    for (int v : adj.neighbors(target)) {
        if (labels[v] != labels[target]) continue;
        if (flipped.count(norm_pair(target, v))) continue;
        dels.push_back(v);
    }
    bool want_add = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
    const std::vector<int>* pool = want_add ? &adds : &dels;
    if (pool->empty()) pool = want_add ? &dels : &adds;
    if (pool->empty()) return std::nullopt;
    int idx = std::uniform_int_distribution<int>(0, static_cast<int>(pool->size()) - 1)(rng);
    return make_op(adj, target, (*pool)[idx]);
}

void commit(MutableAdjacency& adj, std::set<std::pair<int, int>>& flipped, Perturbation& p,
            const EdgeOp& op) {
    adj.flip(op.u, op.v);
    flipped.insert(norm_pair(op.u, op.v));
    p.ops.push_back(op);
}

}  // namespace

const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::Rand: return "rand";
        case AttackKind::Fgsm: return "fgsm";
        case AttackKind::Nettack: return "nettack";
    }
    throw std::logic_error("bad attack kind");
}

AttackKind attack_from_string(const std::string& s) {
    if (s == "rand") return AttackKind::Rand;
    if (s == "fgsm") return AttackKind::Fgsm;
    if (s == "nettack") return AttackKind::Nettack;
    throw std::invalid_argument("unknown attack kind: " + s);
}

void AttackSpec::validate() const {
    if (budget < 1) throw std::invalid_argument("attack budget must be >= 1");
}

Graph apply(const Graph& g, const Perturbation& p) {
    std::set<std::pair<int, int>> edges;
    for (auto& e : g.edge_list()) edges.insert(e);
    for (size_t i = 0; i < p.ops.size(); ++i) {
        const EdgeOp& op = p.ops[i];
        auto key = norm_pair(op.u, op.v);
        std::string where = "apply: op " + std::to_string(i) + " (" +
                            (op.kind == EdgeOpKind::Add ? "ADD " : "DEL ") +
                            std::to_string(op.u) + "-" + std::to_string(op.v) + ")";
        if (op.u == op.v) throw std::invalid_argument(where + " is a self loop");
        if (op.u < 0 || op.v < 0 || op.u >= g.num_nodes() || op.v >= g.num_nodes())
            throw std::invalid_argument(where + " is out of range");
        if (op.kind == EdgeOpKind::Add) {
            if (!edges.insert(key).second) throw std::invalid_argument(where + ": edge already present");
        } else {
            if (edges.erase(key) == 0) throw std::invalid_argument(where + ": edge not present");
        }
    }
    std::vector<std::pair<int, int>> edge_vec(edges.begin(), edges.end());
    return Graph::build_shared(g.num_nodes(), edge_vec, g.features_ptr(), g.labels_ptr(),
                               g.num_classes());
}

Perturbation attack_rand(const Graph& g, int target, int budget, const std::vector<int>& labels,
                         std::uint64_t seed) {
    check_target(g, target);
    if (budget < 1) throw std::invalid_argument("attack: budget must be >= 1");
    if (static_cast<int>(labels.size()) != g.num_nodes())
        throw std::invalid_argument("attack: labels size mismatch");
    auto rng = make_rng(seed, seed_stream::attack);
    MutableAdjacency adj(g);
    std::set<std::pair<int, int>> flipped;
    Perturbation p;
    p.target = target;
    p.budget = budget;
    for (int step = 0; step < budget; ++step) {
        auto op = rand_step(adj, flipped, target, labels, rng);
        if (!op) {
            p.truncated = true;
            break;
        }
        commit(adj, flipped, p, *op);
    }
    return p;
}

double surrogate_margin(const MutableAdjacency& adj, const SurrogateModel& model, int target,
                        int true_class) {
    std::vector<double> probs = softmax_vec(surrogate_target_logits(adj, model, target));
    if (probs.size() < 2) throw std::invalid_argument("surrogate margin needs >= 2 classes");
    double best_other = -1.0;
    for (size_t c = 0; c < probs.size(); ++c)
        if (static_cast<int>(c) != true_class) best_other = std::max(best_other, probs[c]);
    return probs[true_class] - best_other;
}

Perturbation attack_fgsm(const Graph& g, int target, int budget, const SurrogateModel& surrogate,
                         std::uint64_t seed) {
    check_target(g, target);
    if (budget < 1) throw std::invalid_argument("attack: budget must be >= 1");
    if (surrogate.prop.rows != g.num_nodes())
        throw std::invalid_argument("attack: surrogate not trained on this graph");
    const int n = g.num_nodes();
    auto rng = make_rng(seed, seed_stream::attack);
    MutableAdjacency adj(g);
    std::set<std::pair<int, int>> flipped;
    Perturbation p;
    p.target = target;
    p.budget = budget;
    for (int step = 0; step < budget; ++step) {
        Tensor dense(n, n);
        for (int v = 0; v < n; ++v) {
            dense.at(v, v) = 1.0;  // self loop of the normalized propagation
            for (int u : adj.neighbors(v)) dense.at(v, u) = 1.0;
        }
        Tape t;
        Var a = t.input(std::move(dense));
        Var m = t.input(surrogate.prop);
        Var ahat = row_normalize(t, a);
        Var logits = matmul(t, ahat, matmul(t, ahat, m));
        Var loss = softmax_xent(t, logits, g.labels(), {target});
        t.backward(loss);
        const Tensor& grad = t.grad(a);
        int best_v = -1;
        double best_score = 0.0;
        bool any_nonzero = false;
        for (int v = 0; v < n; ++v) {
            if (v == target || flipped.count(norm_pair(target, v))) continue;
            double gsym = grad.at(target, v) + grad.at(v, target);
            if (gsym != 0.0) any_nonzero = true;
            double score = adj.has(target, v) ? -gsym : gsym;
            if (best_v < 0 || score > best_score) {
                best_v = v;
                best_score = score;
            }
        }
        if (!any_nonzero) {
            auto op = rand_step(adj, flipped, target, g.labels(), rng);
            if (!op) {
                p.truncated = true;
                break;
            }
            p.used_fallback = true;
            commit(adj, flipped, p, *op);
            continue;
        }
        if (best_v < 0) {
            p.truncated = true;
            break;
        }
        commit(adj, flipped, p, make_op(adj, target, best_v));
    }
    return p;
}

Perturbation attack_nettack(const Graph& g, int target, int budget,
                            const SurrogateModel& surrogate) {
    check_target(g, target);
    if (budget < 1) throw std::invalid_argument("attack: budget must be >= 1");
    if (surrogate.prop.rows != g.num_nodes())
        throw std::invalid_argument("attack: surrogate not trained on this graph");
    const int n = g.num_nodes();
    const int y = g.label(target);
    MutableAdjacency adj(g);
    std::set<std::pair<int, int>> flipped;
    Perturbation p;
    p.target = target;
    p.budget = budget;
    double cur = surrogate_margin(adj, surrogate, target, y);
    for (int step = 0; step < budget; ++step) {
        std::set<std::pair<int, int>> cands;
        for (int v = 0; v < n; ++v)
            if (v != target) cands.insert(norm_pair(target, v));
        for (int u : adj.neighbors(target))
            for (int w = 0; w < n; ++w)
                if (w != u) cands.insert(norm_pair(u, w));
        std::pair<int, int> best{-1, -1};
        double best_margin = cur;
        for (const auto& [cu, cv] : cands) {
            if (flipped.count({cu, cv})) continue;
            MutableAdjacency& mut = adj;
            mut.flip(cu, cv);
            double m = surrogate_margin(mut, surrogate, target, y);
            mut.flip(cu, cv);
            if (m < best_margin) {
                best_margin = m;
                best = {cu, cv};
            }
        }
        if (best.first < 0) {
            p.truncated = true;
            break;
        }
        commit(adj, flipped, p, make_op(adj, best.first, best.second));
        cur = best_margin;
    }
    return p;
}

Perturbation run_attack(const Graph& g, int target, const AttackSpec& spec,
                        const SurrogateModel* surrogate) {
    spec.validate();
    switch (spec.kind) {
        case AttackKind::Rand:
            return attack_rand(g, target, spec.budget, g.labels(), spec.seed);
        case AttackKind::Fgsm:
            if (!surrogate) throw std::invalid_argument("fgsm needs a surrogate model");
            return attack_fgsm(g, target, spec.budget, *surrogate, spec.seed);
        case AttackKind::Nettack:
            if (!surrogate) throw std::invalid_argument("nettack needs a surrogate model");
            return attack_nettack(g, target, spec.budget, *surrogate);
    }
    throw std::logic_error("bad attack kind");
}

void write_trace(std::ostream& out, const std::vector<Perturbation>& ps) {
    for (const Perturbation& p : ps)
        for (const EdgeOp& op : p.ops)
            out << p.target << '\t' << (op.kind == EdgeOpKind::Add ? "ADD" : "DEL") << '\t' << op.u
                << '\t' << op.v << '\n';
}

std::vector<Perturbation> read_trace(std::istream& in) {
    std::vector<Perturbation> out;
    std::map<int, size_t> index;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int target, u, v;
        std::string kind;
        if (!(ss >> target >> kind >> u >> v) || (kind != "ADD" && kind != "DEL")) {
            throw std::runtime_error("trace line " + std::to_string(lineno) +
                                     ": expected `target ADD|DEL u v`");
        }
        auto it = index.find(target);
        if (it == index.end()) {
            index.emplace(target, out.size());
            out.push_back(Perturbation{});
            out.back().target = target;
            it = index.find(target);
        }
        Perturbation& p = out[it->second];
        p.ops.push_back(EdgeOp{kind == "ADD" ? EdgeOpKind::Add : EdgeOpKind::Remove, u, v});
        p.budget = static_cast<int>(p.ops.size());
    }
    return out;
}

}  // namespace rgnn
