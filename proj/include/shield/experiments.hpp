#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shield/analysis.hpp"
#include "shield/config.hpp"
#include "shield/io.hpp"
#include "shield/sampler.hpp"

namespace shield {

// synthetic smooth action sequences: count rows of S points in R^action_dim,
// each rescaled so its discrete variation sum |a_{s+1}-a_s|^2 / (S*ds) hits a
// target drawn uniformly from [v_lo, v_hi]
Mat smooth_dataset(int count, int S, int action_dim, double ds, double v_lo, double v_hi,
                   std::uint64_t seed);

// numeric CSV (optional non-numeric header row is skipped)
Mat load_dataset_csv(const std::string& path);

SamplerSetup build_setup(const ExperimentConfig& cfg);

struct RunArtifacts {
    SampleMode mode = SampleMode::Guided;
    std::vector<TrajectoryRecord> records;
    AuditReport audit;
    KLReport kl;
    EnergyProfile profile;
    RunSummary summary;
};

RunArtifacts run_mode(const SamplerSetup& setup, SampleMode mode, int n_paths, int threads);

// path_NNN.csv for the first 32 paths, profile.csv, summary.json
void write_run(const RunArtifacts& run, const std::string& dir);

struct ExperimentResult {
    RunArtifacts main;
    std::optional<RunArtifacts> unconstrained;
    std::optional<RunArtifacts> projection;
    std::optional<CapTrackingPlan> cap;
};

const char* mode_dir_name(SampleMode mode);

// main pass plus configured baselines; writes per-mode artifact directories
// under cfg.output when write_output is set
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads, bool write_output);

} // namespace shield
