#pragma once

#include <random>
#include <vector>

#include "rgnn/graph.hpp"
#include "rgnn/tape.hpp"

namespace rgnn {

// Mean softmax cross-entropy of the masked logit rows (thin alias kept for
// the loss vocabulary).
Var supervised_loss(Tape& t, Var logits, const std::vector<int>& labels,
                    const std::vector<int>& mask);

// Unigram degree distribution raised to `power`; the negative-sampling noise.
std::vector<double> degree_noise_weights(const Graph& g, double power = 0.75);

// Inverse-CDF draw from unnormalized weights.
int sample_weighted(const std::vector<double>& cum_weights, std::mt19937_64& rng);
std::vector<double> cumulative(const std::vector<double>& weights);

// Noise-contrastive neighbor loss: every directed edge (u,v) contributes
// -log sigma(h_u . h_v) and K negatives v_n ~ noise contribute
// -log sigma(-h_vn . h_v); each of the 1+K terms is averaged over edges.
Var ncl_loss(Tape& t, Var h, const Graph& g, int k_negatives,
             const std::vector<double>& noise_weights, std::mt19937_64& rng);

// Raw bilinear scores rows(h) * W_D * h_g^T, one per row (pre-sigmoid).
Var bilinear_scores(Tape& t, Var h_rows, Var w_d, Var h_g);

// sigma(h_v W_D h_G); h_v may hold several rows, giving one probability each.
Var discriminate(Tape& t, Var h_v, Var h_g, Var w_d);

}  // namespace rgnn
