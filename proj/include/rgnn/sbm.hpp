#pragma once

#include <cstdint>
#include <vector>

#include "rgnn/graph.hpp"

namespace rgnn {

// Stochastic block model with one block per class. Edges are sampled
// independently with probability p_in inside a block and p_out across blocks
// (p_in > p_out required). Node features are the block's mean vector plus
// Gaussian noise, binarized at 0.5; labels equal block ids. The output may be
// disconnected; callers apply largest_connected_component.
Graph generate_sbm(const std::vector<int>& blocks, double p_in, double p_out, int feature_dim,
                   double noise, std::uint64_t seed);

}  // namespace rgnn
