#include "rgnn/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rgnn/optimizer.hpp"
#include "rgnn/rng.hpp"
#include "rgnn/tape.hpp"

namespace rgnn {

namespace {

Tensor glorot(int rows, int cols, std::mt19937_64& rng) {
    Tensor t(rows, cols);
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : t.data) v = dist(rng);
    return t;
}

}  // namespace

void SurrogateModel::refresh_prop(const Tensor& features) {
    if (features.cols != w1.rows)
        throw std::invalid_argument("surrogate: feature width does not match w1");
    // prop = X * w1 * w2
    Tensor xw(features.rows, w1.cols);
    for (int i = 0; i < features.rows; ++i) {
        const double* x = features.row_ptr(i);
        double* out = xw.row_ptr(i);
        for (int k = 0; k < features.cols; ++k) {
            const double xv = x[k];
            if (xv == 0.0) continue;
            const double* w = w1.row_ptr(k);
            for (int j = 0; j < w1.cols; ++j) out[j] += xv * w[j];
        }
    }
    prop = Tensor(features.rows, w2.cols);
    for (int i = 0; i < xw.rows; ++i) {
        const double* a = xw.row_ptr(i);
        double* out = prop.row_ptr(i);
        for (int k = 0; k < xw.cols; ++k) {
            const double av = a[k];
            if (av == 0.0) continue;
            const double* w = w2.row_ptr(k);
            for (int j = 0; j < w2.cols; ++j) out[j] += av * w[j];
        }
    }
    num_classes = w2.cols;
}

SurrogateModel train_surrogate(const Graph& g, const std::vector<int>& train_nodes,
                               std::uint64_t seed, int epochs, double lr, int hidden) {
    if (train_nodes.empty()) throw std::invalid_argument("surrogate: empty training set");
    for (int v : train_nodes)
        if (v < 0 || v >= g.num_nodes())
            throw std::invalid_argument("surrogate: training node out of range");
    auto rng = make_rng(seed, seed_stream::surrogate);
    SurrogateModel model;
    model.w1 = glorot(g.feature_dim(), hidden, rng);
    model.w2 = glorot(hidden, g.num_classes(), rng);
    Adam opt;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        Tape t;
        Var x = t.input(g.features());
        Var w1 = t.param(model.w1);
        Var w2 = t.param(model.w2);
        Var a = matmul(t, x, w1);
        Var b = self_loop_mean_rows(t, g, a);
        Var c = self_loop_mean_rows(t, g, b);
        Var logits = matmul(t, c, w2);
        Var loss = softmax_xent(t, logits, g.labels(), train_nodes);
        t.backward(loss);
        std::vector<Tensor*> params{&model.w1, &model.w2};
        std::vector<const Tensor*> grads{&t.grad(w1), &t.grad(w2)};
        opt.step(params, grads, lr);
    }
    model.refresh_prop(g.features());
    return model;
}

Tensor surrogate_logits(const Graph& g, const SurrogateModel& model) {
    Tape t;
    Var x = t.input(g.features());
    Var w1 = t.input(model.w1);
    Var w2 = t.input(model.w2);
    Var a = matmul(t, x, w1);
    Var b = self_loop_mean_rows(t, g, a);
    Var c = self_loop_mean_rows(t, g, b);
    Var logits = matmul(t, c, w2);
    return t.value(logits);
}

MutableAdjacency::MutableAdjacency(const Graph& g) : adj_(g.num_nodes()) {
    for (int v = 0; v < g.num_nodes(); ++v)
        for (int u : g.neighbors(v)) adj_[v].insert(u);
}

bool MutableAdjacency::has(int u, int v) const {
    return adj_[u].count(v) > 0;
}

void MutableAdjacency::flip(int u, int v) {
    if (u == v) throw std::invalid_argument("adjacency flip: self loop");
    if (u < 0 || v < 0 || u >= num_nodes() || v >= num_nodes())
        throw std::invalid_argument("adjacency flip: node out of range");
    if (adj_[u].count(v)) {
        adj_[u].erase(v);
        adj_[v].erase(u);
    } else {
        adj_[u].insert(v);
        adj_[v].insert(u);
    }
}

std::vector<double> surrogate_target_logits(const MutableAdjacency& adj,
                                            const SurrogateModel& model, int target) {
    if (model.prop.rows != adj.num_nodes())
        throw std::invalid_argument("surrogate: stale propagation cache");
    const int y = model.prop.cols;
    // one_hop(j) = row j of A_hat * prop; needed for j in {target} + N(target)
    auto one_hop = [&](int j) {
        std::vector<double> row(model.prop.row_ptr(j), model.prop.row_ptr(j) + y);
        for (int u : adj.neighbors(j)) {
            const double* p = model.prop.row_ptr(u);
            for (int c = 0; c < y; ++c) row[c] += p[c];
        }
        const double inv = 1.0 / (adj.degree(j) + 1);
        for (double& v : row) v *= inv;
        return row;
    };
    std::vector<double> out = one_hop(target);
    for (int j : adj.neighbors(target)) {
        std::vector<double> r = one_hop(j);
        for (int c = 0; c < y; ++c) out[c] += r[c];
    }
    const double inv = 1.0 / (adj.degree(target) + 1);
    for (double& v : out) v *= inv;
    return out;
}

std::vector<double> softmax_vec(const std::vector<double>& logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace rgnn
