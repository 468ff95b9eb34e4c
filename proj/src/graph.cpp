#include "rgnn/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

namespace rgnn {

Graph Graph::build(int n, const std::vector<std::pair<int, int>>& edges, Tensor features,
                   std::vector<int> labels, int num_classes) {
    return build_shared(n, edges, std::make_shared<const Tensor>(std::move(features)),
                        std::make_shared<const std::vector<int>>(std::move(labels)), num_classes);
}

Graph Graph::build_shared(int n, const std::vector<std::pair<int, int>>& edges,
                          std::shared_ptr<const Tensor> features,
                          std::shared_ptr<const std::vector<int>> labels, int num_classes) {
    Graph g;
    g.n_ = n;
    g.num_classes_ = num_classes;
    g.features_ = std::move(features);
    g.labels_ = std::move(labels);

    std::vector<std::pair<int, int>> sym;
    sym.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw std::invalid_argument("Graph: edge endpoint out of range: (" +
                                        std::to_string(u) + "," + std::to_string(v) + ")");
        if (u == v) continue;  // self-loops dropped
        sym.emplace_back(u, v);
        sym.emplace_back(v, u);
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());

    g.offsets_.assign(n + 1, 0);
    for (auto& [u, v] : sym) g.offsets_[u + 1]++;
    for (int i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.adj_.reserve(sym.size());
    for (auto& [u, v] : sym) g.adj_.push_back(v);  // sorted order preserved per row

    g.validate();
    return g;
}

void Graph::validate() const {
    if (!features_ || !labels_) throw std::invalid_argument("Graph: missing features or labels");
    if (features_->rows != n_)
        throw std::invalid_argument("Graph: feature row count " + std::to_string(features_->rows) +
                                    " != n " + std::to_string(n_));
    if (static_cast<int>(labels_->size()) != n_)
        throw std::invalid_argument("Graph: label count != n");
    for (int v = 0; v < n_; ++v) {
        int y = (*labels_)[v];
        if (y < 0 || y >= num_classes_)
            throw std::invalid_argument("Graph: label " + std::to_string(y) + " of node " +
                                        std::to_string(v) + " out of range [0," +
                                        std::to_string(num_classes_) + ")");
    }
    // Symmetry and no-self-loop are guaranteed by construction; assert anyway.
    for (int v = 0; v < n_; ++v)
        for (int u : neighbors(v)) {
            if (u == v) throw std::logic_error("Graph: self-loop survived construction");
            if (!has_edge(u, v)) throw std::logic_error("Graph: asymmetric adjacency");
        }
}

bool Graph::has_edge(int u, int v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<int, int>> Graph::edge_list() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(adj_.size() / 2);
    for (int u = 0; u < n_; ++u)
        for (int v : neighbors(u))
            if (u < v) out.emplace_back(u, v);
    return out;
}

Graph largest_connected_component(const Graph& g) {
    const int n = g.num_nodes();
    if (n == 0) throw std::invalid_argument("largest_connected_component: empty graph");

    std::vector<int> comp(n, -1);
    int comp_count = 0;
    std::vector<int> comp_size;
    for (int s = 0; s < n; ++s) {
        if (comp[s] != -1) continue;
        int size = 0;
        std::queue<int> q;
        q.push(s);
        comp[s] = comp_count;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            ++size;
            for (int u : g.neighbors(v))
                if (comp[u] == -1) {
                    comp[u] = comp_count;
                    q.push(u);
                }
        }
        comp_size.push_back(size);
        ++comp_count;
    }

    // Components are discovered in order of their smallest node id, so on a
    // size tie the first (smallest-id) component wins.
    int best = 0;
    for (int c = 1; c < comp_count; ++c)
        if (comp_size[c] > comp_size[best]) best = c;

    std::vector<int> old_to_new(n, -1);
    std::vector<int> keep;
    for (int v = 0; v < n; ++v)
        if (comp[v] == best) {
            old_to_new[v] = static_cast<int>(keep.size());
            keep.push_back(v);
        }

    const int n2 = static_cast<int>(keep.size());
    Tensor x2(n2, g.feature_dim());
    std::vector<int> labels2(n2);
    for (int i = 0; i < n2; ++i) {
        const double* src = g.features().row_ptr(keep[i]);
        std::copy(src, src + g.feature_dim(), x2.row_ptr(i));
        labels2[i] = g.label(keep[i]);
    }
    std::vector<std::pair<int, int>> edges2;
    for (auto [u, v] : g.edge_list())
        if (old_to_new[u] != -1 && old_to_new[v] != -1)
            edges2.emplace_back(old_to_new[u], old_to_new[v]);

    return Graph::build(n2, edges2, std::move(x2), std::move(labels2), g.num_classes());
}

SplitMasks split_nodes(const Graph& g, std::uint64_t seed) {
    const int n = g.num_nodes();
    if (n < 5) throw std::invalid_argument("split_nodes: need at least 5 nodes");

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    const int labeled = static_cast<int>(std::lround(0.8 * n));
    const int train_count = (labeled + 1) / 2;  // odd remainder goes to train

    SplitMasks m;
    m.train.assign(perm.begin(), perm.begin() + train_count);
    m.val.assign(perm.begin() + train_count, perm.begin() + labeled);
    m.unlabeled.assign(perm.begin() + labeled, perm.end());
    std::sort(m.train.begin(), m.train.end());
    std::sort(m.val.begin(), m.val.end());
    std::sort(m.unlabeled.begin(), m.unlabeled.end());
    return m;
}

}  // namespace rgnn
