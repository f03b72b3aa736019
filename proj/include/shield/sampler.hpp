#pragma once

#include <memory>
#include <vector>

#include "shield/oracle.hpp"
#include "shield/record.hpp"
#include "shield/shield.hpp"

namespace shield {

enum class SampleMode {
    Guided,        // CBF filter active
    Unguided,      // u = 0, barrier only logged
    Projection,    // u = 0, per-step projection baseline
    ForcedControl, // fixed u injected through the same plumbing (KL tests)
};

struct SamplerSetup {
    Oracle oracle;
    std::shared_ptr<Barrier> barrier; // null for pure-diffusion runs
    ShieldConfig cfg;

    // per-row schedule/margin overrides (Intersection members may differ);
    // empty means every row uses cfg.schedule / cfg.c
    std::vector<ConstrictionSchedule> row_schedules;
    std::vector<double> row_margins;

    // projection baseline: false projects onto the true set {h >= 0}
    // (schedule-independent corrections); true uses the tube at time t
    bool projection_tube = false;

    Vec forced_u; // ForcedControl mode

    int dim = 0; // state dimension when neither barrier nor mixture fixes it

    // trajectories larger than this many doubles drop their states after the
    // in-run audit instead of retaining them
    long keep_states_limit = 4'000'000;

    int state_dim() const;
    ConstrictionSchedule schedule_for(int row) const {
        return row_schedules.empty() ? cfg.schedule : row_schedules[row];
    }
};

// Runs n_paths independent reverse-time paths; path p draws its own RNG
// stream from (cfg.seed, p), so records are reproducible regardless of
// thread count. Guided paths audit themselves (independent h-tilde
// re-evaluation from visited states) before large state blocks are dropped.
std::vector<TrajectoryRecord> sample_paths(const SamplerSetup& setup, SampleMode mode,
                                           int n_paths, int n_threads = 1);

inline std::vector<TrajectoryRecord> sample_guided(const SamplerSetup& setup, int n_paths,
                                                   int n_threads = 1) {
    return sample_paths(setup, SampleMode::Guided, n_paths, n_threads);
}

inline std::vector<TrajectoryRecord> sample_unconstrained(const SamplerSetup& setup, int n_paths,
                                                          int n_threads = 1) {
    return sample_paths(setup, SampleMode::Unguided, n_paths, n_threads);
}

// Cap-tracking constants are derived from the run's own terminal draws: with
// the exponential tube eps(t) = eps0*(e^{lam t/T}-1)/(e^lam - 1), riding a
// fixed fraction q of the way into the reference tube is an exact invariant
// of gamma(y) = lam*y + kappa*min(1, y/y0) with kappa = q*lam*(C_ref - e),
// C_ref = (eps_ref + c_eff)/(e^lam - 1). eps_ref is 0.9 times the mildest
// initial violation across paths and c_eff = q/(1-q)*(e + eps_ref) replaces
// the configured margin so every path's tube dominates the reference one.
struct CapTrackingPlan {
    GammaFn gamma;
    double c_eff = 0.0;
    double eps_ref = 0.0;
};

CapTrackingPlan derive_cap_tracking(const SamplerSetup& setup, int n_paths);

} // namespace shield
