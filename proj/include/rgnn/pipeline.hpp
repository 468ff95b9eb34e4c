#pragma once

#include <iosfwd>

#include "rgnn/config.hpp"

namespace rgnn {

// Process exit statuses shared by the pipeline and the CLI.
constexpr int exit_ok = 0;
constexpr int exit_config_error = 2;
constexpr int exit_runtime_error = 3;

// Runs the full experiment (per seed: split, surrogate, defenses, attacks,
// reports, optional variant sweeps) and writes artifacts under
// cfg.output_dir. Seeds fan out over `jobs` worker threads. A failed stage
// keeps its partial artifacts; the manifest records completeness either way.
// Returns exit_ok or exit_runtime_error.
int run_pipeline(const ExperimentConfig& cfg, int jobs, std::ostream& log);

}  // namespace rgnn
