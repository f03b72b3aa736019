#pragma once

#include <vector>

#include "shield/barrier.hpp"
#include "shield/noise.hpp"
#include "shield/record.hpp"
#include "shield/schedule.hpp"

namespace shield {

struct KLReport {
    double estimate = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
    // mean over paths of the per-step integrand |u_k|^2/g_k^2, k = K..1
    std::vector<double> per_step_integrand;
    // true when some control acted at zero sampling noise: the number
    // reported is the L2 drift-perturbation energy, not a KL divergence
    bool deterministic_energy = false;
};

struct AuditReport {
    int n_paths = 0;
    std::vector<double> min_h_tilde; // per path, audited value where available
    std::vector<double> final_h;
    std::vector<char> flagged; // tube breach below -1e-6
    int tube_flags = 0;
    int violations = 0; // final h < 0
    double violation_fraction = 0.0;
    double worst_min_h_tilde = 0.0;
    double worst_final_h = 0.0;
    double max_integrity_error = 0.0; // logged vs recomputed h_tilde
    double energy_first_half_fraction = 0.0;
};

struct EnergyProfile {
    std::vector<double> mean_u_norm_sq; // K entries, k = K..1
    double first_half_fraction = 0.0;   // share of energy with t in [T/2, T]
};

// Re-evaluates h_tilde along the stored states (fresh barrier + schedule
// evaluation, not the sampler's own log), records the audited minimum,
// cross-checks the log to 1e-12, and flags drops below -1e-6.
void audit_record(TrajectoryRecord& rec, const Barrier& bar,
                  const std::vector<ConstrictionSchedule>& row_schedules,
                  const ConstrictionSchedule& default_schedule, double T);

AuditReport invariance_audit(const std::vector<TrajectoryRecord>& records);

// 0.5 * mean over paths of sum_k |u_k|^2/g(t_k)^2 dt, with Monte-Carlo
// standard error, recomputed from the per-step logs. Steps with u = 0
// contribute nothing; if any step applied control at g = 0 the run was
// deterministic and the report switches to the plain L2 energy
// mean sum |u_k|^2 dt (flagged).
KLReport kl_girsanov_estimate(const std::vector<TrajectoryRecord>& records,
                              const NoiseSchedule& ns);

EnergyProfile energy_profile(const std::vector<TrajectoryRecord>& records);

// per-sequence violation indicator (1 when h(x) < 0) for a batch of action
// sequences under a smoothness barrier
std::vector<int> smoothness_violations(const std::vector<Vec>& sequences, const Smoothness& bar);

} // namespace shield
