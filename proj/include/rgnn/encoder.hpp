#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgnn/graph.hpp"
#include "rgnn/tape.hpp"

namespace rgnn {

enum class IntraMode { Mean, Sum, Max };
enum class InterMode { None, Skip, Dense };

const char* to_string(IntraMode m);
const char* to_string(InterMode m);
IntraMode intra_from_string(const std::string& s);
InterMode inter_from_string(const std::string& s);

// out_dim profile used by the variant study: low/mid/high -> 16/64/256.
int profile_dim(const std::string& profile);

struct EncoderConfig {
    IntraMode intra = IntraMode::Mean;
    InterMode inter = InterMode::Dense;
    int layers = 3;
    int perceptron_depth = 2;
    int bottleneck_dim = 16;  // final embedding width
    int hidden_dim = 0;       // intermediate layer width; 0 -> bottleneck_dim

    int hidden() const { return hidden_dim > 0 ? hidden_dim : bottleneck_dim; }
    int out_width(int k) const { return k == layers ? bottleneck_dim : hidden(); }
};

// Concatenated perceptron input width per layer (1-based), from the Eq.-style
// width arithmetic: intra keeps the previous width, skip appends the last
// hidden width, dense appends all of them.
std::vector<int> layer_input_widths(const EncoderConfig& cfg, int feature_dim);

// Throws std::invalid_argument when the config cannot form a bottleneck:
// layer outputs must never expand, and layer 1 must strictly reduce the
// feature dimension.
void validate_encoder_config(const EncoderConfig& cfg, int feature_dim);

// All trainable matrices. Row-vector convention: a linear map is h * W with
// W of shape in x out.
struct ModelParams {
    std::vector<std::vector<Tensor>> perce;  // [layer][perceptron_depth]
    Tensor readout_w;                        // bottleneck x bottleneck
    Tensor dec_w;                            // bottleneck x num_classes
    Tensor disc_w;                           // bottleneck x bottleneck

    std::vector<Tensor*> all();
    std::vector<const Tensor*> all() const;
    std::vector<std::string> names() const;
};

// Glorot-uniform initialization, deterministic in the seed.
ModelParams init_params(const EncoderConfig& cfg, int feature_dim, int num_classes,
                        std::uint64_t seed);

// Tape handles for one registration of a ModelParams set.
struct ParamVars {
    std::vector<std::vector<Var>> perce;
    Var readout_w, dec_w, disc_w;
    std::vector<Var> flat;  // same order as ModelParams::all()
};
ParamVars register_params(Tape& t, const ModelParams& params);

struct Embeddings {
    Var h;       // n x bottleneck node embeddings
    Var h_g;     // 1 x bottleneck graph embedding
    Var logits;  // n x Y
};

// ---- encoder operations ----------------------------------------------------

Var agg_intra(Tape& t, const Graph& g, Var h_prev, IntraMode mode);

// history holds h^(1)..h^(k-1) in layer order; dense concatenates newest
// first after the intra output, skip appends only the last entry.
Var agg_inter(Tape& t, Var intra_out, const std::vector<Var>& history, InterMode mode);

// perceptron stack: depth x (linear map then ReLU).
Var bperce(Tape& t, Var a, const std::vector<Var>& layer_weights);

Var readout(Tape& t, Var h, Var w_r);
Var decode(Tape& t, Var h, Var w_dec);

// Full K-layer forward from h^0 = X, differentiable through the tape.
Embeddings encode(Tape& t, const Graph& g, const EncoderConfig& cfg, const ParamVars& pv);

// Forward-only convenience over a throwaway tape.
struct ForwardResult {
    Tensor h, h_g, logits;
};
ForwardResult forward(const Graph& g, const EncoderConfig& cfg, const ModelParams& params);

}  // namespace rgnn
