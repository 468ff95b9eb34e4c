#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rgnn/tensor.hpp"

namespace rgnn {

// Immutable undirected attributed graph in CSR form.
//
// Invariants, enforced on every construction:
//   - adjacency is symmetric, no self-loops, no parallel edges
//   - every endpoint < n, every label < num_classes
// Features and labels are shared between perturbed copies of the same graph.
class Graph {
public:
    // Normalizes the edge list (drops self-loops, dedupes, symmetrizes) and
    // validates the result. `features` must have n rows, `labels` n entries.
    static Graph build(int n, const std::vector<std::pair<int, int>>& edges, Tensor features,
                       std::vector<int> labels, int num_classes);

    // Same, but shares feature/label storage with an existing graph.
    static Graph build_shared(int n, const std::vector<std::pair<int, int>>& edges,
                              std::shared_ptr<const Tensor> features,
                              std::shared_ptr<const std::vector<int>> labels, int num_classes);

    int num_nodes() const { return n_; }
    int num_edges() const { return static_cast<int>(adj_.size()) / 2; }  // undirected count
    int feature_dim() const { return features_->cols; }
    int num_classes() const { return num_classes_; }

    int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }
    std::span<const int> neighbors(int v) const {
        return {adj_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
    }
    bool has_edge(int u, int v) const;

    const Tensor& features() const { return *features_; }
    const std::vector<int>& labels() const { return *labels_; }
    int label(int v) const { return (*labels_)[v]; }

    std::shared_ptr<const Tensor> features_ptr() const { return features_; }
    std::shared_ptr<const std::vector<int>> labels_ptr() const { return labels_; }

    // Each undirected edge once, u < v, lexicographically sorted.
    std::vector<std::pair<int, int>> edge_list() const;

private:
    Graph() = default;
    void validate() const;

    int n_ = 0;
    int num_classes_ = 0;
    std::vector<int> offsets_;  // size n+1
    std::vector<int> adj_;      // sorted neighbor lists, size 2m
    std::shared_ptr<const Tensor> features_;
    std::shared_ptr<const std::vector<int>> labels_;
};

// Node split into train/validation/unlabeled sets (sorted node-id lists).
struct SplitMasks {
    std::vector<int> train;
    std::vector<int> val;
    std::vector<int> unlabeled;
};

// Keeps the largest component (ties: the one containing the smallest original
// node id) and remaps ids order-preservingly. Throws on an empty graph.
Graph largest_connected_component(const Graph& g);

// 80% labeled (split 50/50 into train/val, odd remainder to train), 20% unlabeled.
// Deterministic for a fixed seed. Requires n >= 5.
SplitMasks split_nodes(const Graph& g, std::uint64_t seed);

}  // namespace rgnn
