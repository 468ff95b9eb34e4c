#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "rgnn/graph.hpp"
#include "rgnn/tensor.hpp"

namespace rgnn {

// Two-layer linearized GCN used to drive the attacks:
//   logits = A_hat^2 X W1 W2,  A_hat = row-normalized adjacency with self loops.
struct SurrogateModel {
    Tensor w1;          // d x hidden
    Tensor w2;          // hidden x num_classes
    Tensor prop;        // cached X * w1 * w2, n x num_classes
    int num_classes = 0;

    void refresh_prop(const Tensor& features);
};

SurrogateModel train_surrogate(const Graph& g, const std::vector<int>& train_nodes,
                               std::uint64_t seed, int epochs = 100, double lr = 0.01,
                               int hidden = 16);

// Full-graph logits of the surrogate (no tape).
Tensor surrogate_logits(const Graph& g, const SurrogateModel& model);

// Adjacency overlay the attack search mutates without touching the immutable graph.
class MutableAdjacency {
public:
    explicit MutableAdjacency(const Graph& g);

    int num_nodes() const { return static_cast<int>(adj_.size()); }
    bool has(int u, int v) const;
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }
    const std::set<int>& neighbors(int v) const { return adj_[v]; }

    // Toggles edge {u,v}; rejects self loops and out-of-range ids.
    void flip(int u, int v);

private:
    std::vector<std::set<int>> adj_;
};

// Logits of one node under the overlay, using the cached propagation matrix.
// Touches only the target's closed two-hop neighborhood.
std::vector<double> surrogate_target_logits(const MutableAdjacency& adj,
                                            const SurrogateModel& model, int target);

std::vector<double> softmax_vec(const std::vector<double>& logits);

}  // namespace rgnn
