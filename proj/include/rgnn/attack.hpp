#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rgnn/graph.hpp"
#include "rgnn/surrogate.hpp"

namespace rgnn {

enum class AttackKind { Rand, Fgsm, Nettack };

const char* to_string(AttackKind k);
AttackKind attack_from_string(const std::string& s);

enum class EdgeOpKind { Add, Remove };

struct EdgeOp {
    EdgeOpKind kind;
    int u, v;
    bool operator==(const EdgeOp&) const = default;
};

// Ordered edit script produced by one attack on one target. Each unordered
// pair appears at most once, so no op can undo an earlier one.
struct Perturbation {
    int target = -1;
    std::vector<EdgeOp> ops;
    int budget = 0;
    bool truncated = false;      // feasible ops ran out before the budget
    bool used_fallback = false;  // FGSM hit zero gradients and took a random step
};

struct AttackSpec {
    AttackKind kind = AttackKind::Nettack;
    int budget = 1;
    std::uint64_t seed = 1;

    void validate() const;  // budget >= 1
};

// Replays the edit script on a copy; the input graph is untouched. Node count
// and features are unchanged. Throws naming the op index if an op is illegal
// on the running edge set.
Graph apply(const Graph& g, const Perturbation& p);

// Uniformly mixes add-cross-class and delete-same-class edits at the target,
// falling back to whichever kind is feasible; stops early (truncated) when
// neither is.
Perturbation attack_rand(const Graph& g, int target, int budget, const std::vector<int>& labels,
                         std::uint64_t seed);

// Greedy gradient-sign attack: per step, differentiate the target's surrogate
// cross-entropy w.r.t. a relaxed dense adjacency and flip the incident entry
// whose sign-aligned change raises the loss most. Zero gradient on every
// candidate falls back to one random step (flagged).
Perturbation attack_fgsm(const Graph& g, int target, int budget, const SurrogateModel& surrogate,
                         std::uint64_t seed);

// Greedy search over edge flips incident to the target and its current 1-hop
// neighborhood, scored by exact surrogate-margin decrease; ties go to the
// smallest (u,v); halts early once no flip strictly decreases the margin.
Perturbation attack_nettack(const Graph& g, int target, int budget,
                            const SurrogateModel& surrogate);

// Dispatch on spec.kind; surrogate may be null for RAND.
Perturbation run_attack(const Graph& g, int target, const AttackSpec& spec,
                        const SurrogateModel* surrogate);

// Surrogate probability margin of `target` under the overlay adjacency.
double surrogate_margin(const MutableAdjacency& adj, const SurrogateModel& model, int target,
                        int true_class);

// Trace format: one op per line, `target<TAB>ADD|DEL<TAB>u<TAB>v`.
void write_trace(std::ostream& out, const std::vector<Perturbation>& ps);
std::vector<Perturbation> read_trace(std::istream& in);

}  // namespace rgnn
