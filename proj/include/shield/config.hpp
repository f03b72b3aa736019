#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shield/barrier.hpp"
#include "shield/lorenz.hpp"
#include "shield/noise.hpp"
#include "shield/schedule.hpp"
#include "shield/shield.hpp"
#include "shield/types.hpp"

namespace shield {

struct NoiseSpec {
    std::string kind = "vp"; // vp | ve | constant
    double beta_min = 0.1, beta_max = 20.0;
    double g_min = 0.01, ratio = 100.0;
    double g0 = 1.0;
    std::shared_ptr<NoiseSchedule> build(double T) const;
};

struct ScheduleSpec {
    std::string kind = "linear"; // linear | exponential | polynomial
    double lambda = 2.0;
    double power = 2.0;
    ConstrictionSchedule build() const;
};

struct GammaSpec {
    std::string kind = "linear"; // linear | cap_tracking
    double q = 0.75;
    double y0 = 1e-4;
};

struct BarrierSpec {
    std::string kind = "none";
    // halfspace
    Vec w;
    double offset = 0.0;
    // ball
    Vec center;
    double radius = 1.0;
    // box
    Vec lo, hi;
    // physics_residual
    LorenzParams lorenz;
    double dl = 0.01;
    int L = 50;
    // smoothness
    int S = 15;
    int action_dim = 2;
    double ds = 0.005;
    // pixel_patch / color_region
    int img_h = 32, img_w = 32;
    int row0 = 0, col0 = 0, height = 8, width = 8;
    int i_min = 0, i_max = 7;
    std::array<double, 3> target{0.0, 0.0, 0.0};
    double v_min = 1.0, v_max = 1.0;
    // threshold shared by the residual-style barriers
    double e = 1e-3;
    // intersection
    std::vector<BarrierSpec> members;
    // optional per-barrier overrides of the global schedule / margin
    std::optional<ScheduleSpec> schedule;
    std::optional<double> margin;

    std::shared_ptr<Barrier> build() const;
};

struct OracleSpec {
    std::string kind = "gmm"; // gmm | dataset_file | lorenz_dataset | smooth_dataset | pure_diffusion
    // gmm
    Mat means;
    Vec sds;
    Vec weights;
    // dataset_file
    std::string path;
    // lorenz_dataset
    int count = 64;
    std::uint64_t data_seed = 123;
    LorenzParams lorenz;
    double dl = 0.01;
    int L = 50;
    // smooth_dataset
    int S = 15;
    int action_dim = 2;
    double ds = 0.005;
    double v_lo = 1.0, v_hi = 1.48;
    // pure_diffusion
    int dim = 1;

    std::string drift = "beta_scaled"; // beta_scaled | literal
    NoiseSpec noise;
};

struct ExperimentConfig {
    std::string experiment = "gmm"; // gmm | lorenz | smooth | pixels | kl-check | qp-check
    std::uint64_t seed = 7;
    int n_paths = 1000;

    double T = 1.0;
    int K = 200;
    double alpha = 0.5;
    double c = 0.1;
    ScheduleSpec schedule;
    GammaSpec gamma;
    bool stochastic = false;
    std::string solver = "auto"; // auto | closed_form | dual_ascent

    OracleSpec oracle;
    BarrierSpec barrier;

    bool baseline_unconstrained = false;
    bool baseline_projection = false;
    bool projection_tube = false; // project onto the relaxed tube instead of {h >= 0}

    std::string output = "out";
    Vec control; // forced control for kl-check runs

    ShieldConfig shield_config() const;
};

// canonical defaults for each experiment; throws ValidationError on unknown name
ExperimentConfig default_config(const std::string& experiment);

// invariant checks shared by parsing and CLI overrides
void validate_config(const ExperimentConfig& cfg);

// strict parse: unknown keys anywhere raise ParseError naming the key,
// numeric invariants raise ValidationError
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig parse_config(const std::string& path);

std::string serialize_config(const ExperimentConfig& cfg);

} // namespace shield
