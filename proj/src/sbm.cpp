#include "rgnn/sbm.hpp"

#include <random>
#include <stdexcept>

#include "rgnn/rng.hpp"

namespace rgnn {

Graph generate_sbm(const std::vector<int>& blocks, double p_in, double p_out, int feature_dim,
                   double noise, std::uint64_t seed) {
    if (blocks.empty()) throw std::invalid_argument("generate_sbm: no blocks");
    for (int b : blocks)
        if (b <= 0) throw std::invalid_argument("generate_sbm: block counts must be positive");
    if (!(p_in > p_out)) throw std::invalid_argument("generate_sbm: requires p_in > p_out");
    if (p_in > 1.0 || p_out < 0.0) throw std::invalid_argument("generate_sbm: bad probabilities");
    if (feature_dim <= 0) throw std::invalid_argument("generate_sbm: feature_dim must be positive");
    if (noise < 0.0) throw std::invalid_argument("generate_sbm: negative noise");

    const int y_count = static_cast<int>(blocks.size());
    int n = 0;
    std::vector<int> labels;
    for (int c = 0; c < y_count; ++c) {
        n += blocks[c];
        labels.insert(labels.end(), blocks[c], c);
    }

    std::mt19937_64 rng = make_rng(seed, seed_stream::sbm);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const double p = (labels[u] == labels[v]) ? p_in : p_out;
            if (unif(rng) < p) edges.emplace_back(u, v);
        }

    // Per-class mean vectors, then per-node noisy copies binarized at 0.5.
    std::vector<std::vector<double>> means(y_count, std::vector<double>(feature_dim));
    for (auto& m : means)
        for (double& v : m) v = unif(rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Tensor x(n, feature_dim);
    for (int v = 0; v < n; ++v)
        for (int j = 0; j < feature_dim; ++j) {
            const double raw = means[labels[v]][j] + noise * gauss(rng);
            x.at(v, j) = raw > 0.5 ? 1.0 : 0.0;
        }

    return Graph::build(n, edges, std::move(x), std::move(labels), y_count);
}

}  // namespace rgnn
