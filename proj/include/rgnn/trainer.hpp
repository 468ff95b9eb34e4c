#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rgnn/encoder.hpp"
#include "rgnn/graph.hpp"
#include "rgnn/optimizer.hpp"
#include "rgnn/surrogate.hpp"

namespace rgnn {

enum class TrainMode { Plain, Ncl, Acl };

const char* to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
    int epochs = 200;
    double lr = 0.01;
    double lr_decay = 0.5;  // multiplied in every decay_every epochs
    int decay_every = 50;
    double lambda_acl = 1.0;   // weight of the contrastive terms (NCL and ACL)
    int neg_per_pos = 5;       // K negatives per positive edge in NCL
    int patience = 30;         // epochs without a validation improvement before stopping
    int gen_budget = 3;        // flips per batch node when generating adversarial graphs
    int batch_size = 16;       // nodes sampled per epoch for the discriminator pairs
    std::uint64_t seed = 1;

    void validate(TrainMode mode) const;
};

struct EpochLog {
    int epoch;
    double lr;
    double train_loss;
    double val_acc;
    double disc_acc;  // NaN for modes without a discriminator
};

struct TrainResult {
    ModelParams params;  // best-validation checkpoint
    std::vector<EpochLog> log;
    double best_val_acc = 0.0;
    int best_epoch = -1;
    int epochs_run = 0;
};

struct AclStepResult {
    double total = 0.0;
    double supervised = 0.0;
    double contrastive = 0.0;
    double disc_acc = 0.0;
};

// Perturbed copy of g: greedy surrogate flips (gen_budget each) around every
// batch node, applied cumulatively. The generator is deterministic; seed is
// kept for interface stability.
Graph generate_negatives(const Graph& g, const SurrogateModel& surrogate, int gen_budget,
                         const std::vector<int>& batch, std::uint64_t seed);

// One joint update: supervised loss on the clean graph plus lambda_acl times
// the discriminator BCE, where (h_v, h_G) from the clean graph score 1 and
// (h'_v, h_G) with h' from g_adv score 0, averaged over the batch pairs.
// Updates params in place through one Adam step.
AclStepResult acl_step(const Graph& g, const Graph& g_adv, const std::vector<int>& batch,
                       const SplitMasks& masks, const EncoderConfig& cfg, const TrainConfig& tc,
                       double lr, ModelParams& params, Adam& opt);

// Full training loop with the stepped lr schedule and best-checkpoint early
// stopping. ACL mode trains a surrogate internally when none is supplied.
TrainResult train(const Graph& g, const SplitMasks& masks, const EncoderConfig& cfg,
                  const TrainConfig& tc, TrainMode mode,
                  const SurrogateModel* surrogate = nullptr);

// Fraction of `nodes` whose argmax logit row (first index on ties) matches
// the label.
double accuracy_on(const Tensor& logits, const std::vector<int>& labels,
                   const std::vector<int>& nodes);

// Comma-separated log, one line per epoch after a header.
void write_train_log(std::ostream& out, const std::vector<EpochLog>& log);

}  // namespace rgnn
