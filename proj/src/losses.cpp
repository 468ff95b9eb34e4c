#include "rgnn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rgnn {

Var supervised_loss(Tape& t, Var logits, const std::vector<int>& labels,
                    const std::vector<int>& mask) {
    return softmax_xent(t, logits, labels, mask);
}

std::vector<double> degree_noise_weights(const Graph& g, double power) {
    std::vector<double> w(g.num_nodes());
    for (int v = 0; v < g.num_nodes(); ++v) w[v] = std::pow(static_cast<double>(g.degree(v)), power);
    return w;
}

std::vector<double> cumulative(const std::vector<double>& weights) {
    std::vector<double> cum(weights.size());
    double s = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0) throw std::invalid_argument("negative sampling weight");
        s += weights[i];
        cum[i] = s;
    }
    if (s <= 0.0) throw std::invalid_argument("sampling weights sum to zero");
    return cum;
}

int sample_weighted(const std::vector<double>& cum_weights, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, cum_weights.back());
    double x = dist(rng);
    auto it = std::lower_bound(cum_weights.begin(), cum_weights.end(), x);
    if (it == cum_weights.end()) --it;
    return static_cast<int>(it - cum_weights.begin());
}

Var ncl_loss(Tape& t, Var h, const Graph& g, int k_negatives,
             const std::vector<double>& noise_weights, std::mt19937_64& rng) {
    if (t.value(h).rows != g.num_nodes())
        throw std::invalid_argument("ncl_loss: embedding row count != node count");
    if (k_negatives < 1) throw std::invalid_argument("ncl_loss: K must be >= 1");
    if (static_cast<int>(noise_weights.size()) != g.num_nodes())
        throw std::invalid_argument("ncl_loss: noise weight count != node count");
    if (g.num_edges() == 0) throw std::invalid_argument("ncl_loss: graph has no edges");
    std::vector<double> cum = cumulative(noise_weights);
    std::vector<int> us, vs;
    for (int u = 0; u < g.num_nodes(); ++u)
        for (int v : g.neighbors(u)) {
            us.push_back(u);
            vs.push_back(v);
        }
    const size_t e = us.size();
    std::vector<std::vector<int>> negs(k_negatives, std::vector<int>(e));
    for (size_t i = 0; i < e; ++i)
        for (int k = 0; k < k_negatives; ++k) negs[k][i] = sample_weighted(cum, rng);
    const std::vector<double> ones(e, 1.0), zeros(e, 0.0);
    Var anchors = row_lookup(t, h, vs);
    Var pos = rows_dot(t, row_lookup(t, h, us), anchors);
    Var loss = binary_xent(t, pos, ones);
    for (int k = 0; k < k_negatives; ++k) {
        Var neg = rows_dot(t, row_lookup(t, h, negs[k]), anchors);
        loss = add(t, loss, binary_xent(t, neg, zeros));
    }
    return loss;
}

Var bilinear_scores(Tape& t, Var h_rows, Var w_d, Var h_g) {
    const Tensor& hv = t.value(h_rows);
    const Tensor& wv = t.value(w_d);
    const Tensor& gv = t.value(h_g);
    if (gv.rows != 1)
        throw std::invalid_argument("bilinear: graph embedding must be a single row");
    if (hv.cols != wv.rows || wv.cols != gv.cols)
        throw std::invalid_argument("bilinear: width mismatch (" + hv.shape_str() + " * " +
                                    wv.shape_str() + " * " + gv.shape_str() + "^T)");
    return matmul(t, matmul(t, h_rows, w_d), transpose(t, h_g));
}

Var discriminate(Tape& t, Var h_v, Var h_g, Var w_d) {
    return sigmoid(t, bilinear_scores(t, h_v, w_d, h_g));
}

}  // namespace rgnn
