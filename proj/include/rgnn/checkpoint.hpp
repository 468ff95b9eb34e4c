#pragma once

#include <string>

#include "rgnn/encoder.hpp"
#include "rgnn/surrogate.hpp"

namespace rgnn {

struct Checkpoint {
    EncoderConfig cfg;
    int feature_dim = 0;
    int num_classes = 0;
    ModelParams params;
};

// Versioned text blobs; values are written as C hexfloats so save/load
// round-trips bit for bit. Loading validates shapes against the config.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// The loaded surrogate has an empty propagation cache; call refresh_prop with
// the graph features before attacking.
void save_surrogate(const std::string& path, const SurrogateModel& model);
SurrogateModel load_surrogate(const std::string& path);

}  // namespace rgnn
