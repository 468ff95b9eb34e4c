#include "rgnn/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rgnn/rng.hpp"

namespace rgnn {

const char* to_string(IntraMode m) {
    switch (m) {
        case IntraMode::Mean: return "mean";
        case IntraMode::Sum: return "sum";
        case IntraMode::Max: return "max";
    }
    return "?";
}

const char* to_string(InterMode m) {
    switch (m) {
        case InterMode::None: return "none";
        case InterMode::Skip: return "skip";
        case InterMode::Dense: return "dense";
    }
    return "?";
}

IntraMode intra_from_string(const std::string& s) {
    if (s == "mean") return IntraMode::Mean;
    if (s == "sum") return IntraMode::Sum;
    if (s == "max") return IntraMode::Max;
    throw std::invalid_argument("unknown intra aggregator '" + s + "' (mean|sum|max)");
}

InterMode inter_from_string(const std::string& s) {
    if (s == "none") return InterMode::None;
    if (s == "skip") return InterMode::Skip;
    if (s == "dense") return InterMode::Dense;
    throw std::invalid_argument("unknown inter aggregator '" + s + "' (none|skip|dense)");
}

int profile_dim(const std::string& profile) {
    if (profile == "low") return 16;
    if (profile == "mid") return 64;
    if (profile == "high") return 256;
    throw std::invalid_argument("unknown out_dim profile '" + profile + "' (low|mid|high)");
}

std::vector<int> layer_input_widths(const EncoderConfig& cfg, int feature_dim) {
    std::vector<int> widths;  // widths[k-1] = perceptron input width at layer k
    int prev = feature_dim;   // width of h^(k-1)
    std::vector<int> history;
    for (int k = 1; k <= cfg.layers; ++k) {
        int w = prev;  // intra aggregation keeps the width
        if (cfg.inter == InterMode::Skip && !history.empty()) w += history.back();
        if (cfg.inter == InterMode::Dense)
            for (int hw : history) w += hw;
        widths.push_back(w);
        prev = cfg.out_width(k);
        history.push_back(prev);
    }
    return widths;
}

void validate_encoder_config(const EncoderConfig& cfg, int feature_dim) {
    if (cfg.layers < 1) throw std::invalid_argument("encoder: layers must be >= 1");
    if (cfg.perceptron_depth < 1)
        throw std::invalid_argument("encoder: perceptron_depth must be >= 1");
    if (cfg.bottleneck_dim < 1 || cfg.hidden() < 1)
        throw std::invalid_argument("encoder: dims must be positive");
    std::vector<int> in = layer_input_widths(cfg, feature_dim);
    if (cfg.out_width(1) >= feature_dim)
        throw std::invalid_argument(
            "encoder: layer-1 output width " + std::to_string(cfg.out_width(1)) +
            " must be smaller than the input feature width " + std::to_string(feature_dim));
    for (int k = 1; k <= cfg.layers; ++k)
        if (cfg.out_width(k) > in[k - 1])
            throw std::invalid_argument("encoder: layer " + std::to_string(k) +
                                        " output width " + std::to_string(cfg.out_width(k)) +
                                        " exceeds its input width " + std::to_string(in[k - 1]));
}

std::vector<Tensor*> ModelParams::all() {
    std::vector<Tensor*> out;
    for (auto& layer : perce)
        for (auto& w : layer) out.push_back(&w);
    out.push_back(&readout_w);
    out.push_back(&dec_w);
    out.push_back(&disc_w);
    return out;
}

std::vector<const Tensor*> ModelParams::all() const {
    std::vector<const Tensor*> out;
    for (auto& layer : perce)
        for (auto& w : layer) out.push_back(&w);
    out.push_back(&readout_w);
    out.push_back(&dec_w);
    out.push_back(&disc_w);
    return out;
}

std::vector<std::string> ModelParams::names() const {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < perce.size(); ++k)
        for (std::size_t d = 0; d < perce[k].size(); ++d)
            out.push_back("perce." + std::to_string(k) + "." + std::to_string(d));
    out.push_back("readout_w");
    out.push_back("dec_w");
    out.push_back("disc_w");
    return out;
}

namespace {

Tensor glorot(int rows, int cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> unif(-limit, limit);
    Tensor w(rows, cols);
    for (double& v : w.data) v = unif(rng);
    return w;
}

}  // namespace

ModelParams init_params(const EncoderConfig& cfg, int feature_dim, int num_classes,
                        std::uint64_t seed) {
    validate_encoder_config(cfg, feature_dim);
    std::mt19937_64 rng = make_rng(seed, seed_stream::init);
    std::vector<int> in = layer_input_widths(cfg, feature_dim);

    ModelParams p;
    p.perce.resize(cfg.layers);
    for (int k = 1; k <= cfg.layers; ++k) {
        int w_in = in[k - 1];
        const int w_out = cfg.out_width(k);
        for (int d = 0; d < cfg.perceptron_depth; ++d) {
            p.perce[k - 1].push_back(glorot(w_in, w_out, rng));
            w_in = w_out;  // later stages keep the width
        }
    }
    const int b = cfg.bottleneck_dim;
    p.readout_w = glorot(b, b, rng);
    p.dec_w = glorot(b, num_classes, rng);
    p.disc_w = glorot(b, b, rng);
    return p;
}

ParamVars register_params(Tape& t, const ModelParams& params) {
    ParamVars pv;
    pv.perce.resize(params.perce.size());
    for (std::size_t k = 0; k < params.perce.size(); ++k)
        for (const Tensor& w : params.perce[k]) {
            Var v = t.param(w);
            pv.perce[k].push_back(v);
            pv.flat.push_back(v);
        }
    pv.readout_w = t.param(params.readout_w);
    pv.dec_w = t.param(params.dec_w);
    pv.disc_w = t.param(params.disc_w);
    pv.flat.push_back(pv.readout_w);
    pv.flat.push_back(pv.dec_w);
    pv.flat.push_back(pv.disc_w);
    return pv;
}

Var agg_intra(Tape& t, const Graph& g, Var h_prev, IntraMode mode) {
    switch (mode) {
        case IntraMode::Mean: return neighbor_mean_rows(t, g, h_prev);
        case IntraMode::Sum: return neighbor_sum_rows(t, g, h_prev);
        case IntraMode::Max: return neighbor_max_rows(t, g, h_prev);
    }
    throw std::logic_error("agg_intra: bad mode");
}

Var agg_inter(Tape& t, Var intra_out, const std::vector<Var>& history, InterMode mode) {
    if (mode == InterMode::None || history.empty()) return intra_out;
    std::vector<Var> parts{intra_out};
    if (mode == InterMode::Skip) {
        parts.push_back(history.back());
    } else {  // dense: newest history first, per the concatenation order
        for (auto it = history.rbegin(); it != history.rend(); ++it) parts.push_back(*it);
    }
    return concat_cols(t, parts);
}

Var bperce(Tape& t, Var a, const std::vector<Var>& layer_weights) {
    if (layer_weights.empty()) throw std::invalid_argument("bperce: empty weight stack");
    Var h = a;
    for (Var w : layer_weights) h = relu(t, matmul(t, h, w));
    return h;
}

Var readout(Tape& t, Var h, Var w_r) { return sigmoid(t, matmul(t, mean_rows(t, h), w_r)); }

Var decode(Tape& t, Var h, Var w_dec) { return matmul(t, h, w_dec); }

Embeddings encode(Tape& t, const Graph& g, const EncoderConfig& cfg, const ParamVars& pv) {
    validate_encoder_config(cfg, g.feature_dim());
    if (static_cast<int>(pv.perce.size()) != cfg.layers)
        throw std::invalid_argument("encode: param layer count mismatch");

    Var h = t.input(g.features());
    std::vector<Var> history;
    for (int k = 1; k <= cfg.layers; ++k) {
        Var intra = agg_intra(t, g, h, cfg.intra);
        Var a = agg_inter(t, intra, history, cfg.inter);
        h = bperce(t, a, pv.perce[k - 1]);
        history.push_back(h);
    }
    Embeddings e;
    e.h = h;
    e.h_g = readout(t, h, pv.readout_w);
    e.logits = decode(t, h, pv.dec_w);
    return e;
}

ForwardResult forward(const Graph& g, const EncoderConfig& cfg, const ModelParams& params) {
    Tape t;
    ParamVars pv = register_params(t, params);
    Embeddings e = encode(t, g, cfg, pv);
    return {t.value(e.h), t.value(e.h_g), t.value(e.logits)};
}

}  // namespace rgnn
