#pragma once

#include <functional>
#include <vector>

#include "rgnn/graph.hpp"
#include "rgnn/tensor.hpp"

namespace rgnn {

// Handle to a tensor recorded on a Tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over a fixed op vocabulary. Each op validates its inputs,
// computes the forward value, and records a backward closure; backward() walks
// the record in exact reverse execution order. A Tape is confined to one thread.
class Tape {
public:
    Var input(Tensor value);  // leaf (constants, features)
    Var param(Tensor value);  // leaf registered as a trainable parameter

    const Tensor& value(Var v) const { return recs_[v.id].value; }
    const Tensor& grad(Var v) const { return recs_[v.id].grad; }
    double scalar_value(Var v) const { return recs_[v.id].value.data.at(0); }

    // Seeds d(loss)=1 and accumulates gradients for every reachable var.
    // `loss` must be 1x1.
    void backward(Var loss);

    int size() const { return static_cast<int>(recs_.size()); }

    // Internal API for the op implementations.
    Var push(Tensor value);
    void set_back(Var v, std::function<void(Tape&)> back);
    Tensor& grad_mut(Var v);
    bool grad_set(Var v) const { return !recs_[v.id].grad.data.empty(); }

private:
    struct Record {
        Tensor value;
        Tensor grad;  // empty until touched by backward
        std::function<void(Tape&)> back;
    };
    std::vector<Record> recs_;
};

// ---- op vocabulary ---------------------------------------------------------

Var matmul(Tape& t, Var a, Var b);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double c);
Var relu(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var concat_cols(Tape& t, const std::vector<Var>& parts);
Var transpose(Tape& t, Var a);
Var row_lookup(Tape& t, Var a, std::vector<int> rows);
Var mean_rows(Tape& t, Var a);             // 1 x cols
Var rows_dot(Tape& t, Var a, Var b);       // rows x 1, per-row dot product
Var row_normalize(Tape& t, Var a);         // each row divided by its sum

// Neighborhood aggregation over the graph adjacency; row v aggregates the
// rows of h at v's neighbors (v itself excluded). Empty neighborhood -> zero
// row. Max routes its gradient to the first maximal index on ties.
Var neighbor_mean_rows(Tape& t, const Graph& g, Var h);
Var neighbor_sum_rows(Tape& t, const Graph& g, Var h);
Var neighbor_max_rows(Tape& t, const Graph& g, Var h);

// Self-loop propagation (h_v + sum of neighbor rows) / (deg_v + 1); the
// linearized surrogate's aggregation step.
Var self_loop_mean_rows(Tape& t, const Graph& g, Var h);

// Mean softmax cross-entropy of logits rows listed in `mask` against integer
// labels. Returns 1x1.
Var softmax_xent(Tape& t, Var logits, const std::vector<int>& labels,
                 const std::vector<int>& mask);

// Mean sigmoid binary cross-entropy of raw scores against {0,1} targets,
// computed in the fused log-sum-exp form. Returns 1x1.
Var binary_xent(Tape& t, Var scores, const std::vector<double>& targets);

}  // namespace rgnn
