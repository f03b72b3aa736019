#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "shield/qp.hpp"
#include "shield/types.hpp"

namespace shield {

// One CSV row: the state at index k (k = K..0) plus the control taken from
// it (zero at k = 0, where no step remains). g is the effective diffusion of
// the sampling process: 0 for probability-flow runs.
struct StepLog {
    int k = 0;
    double t = 0.0;
    double h = 0.0;        // barrier value (worst row)
    double h_tilde = 0.0;  // h + eps, min over rows
    double epsilon = 0.0;  // tube radius of the worst row
    double u_norm_sq = 0.0;
    double g = 0.0;
    QpMethod qp = QpMethod::None;
};

struct TrajectoryRecord {
    int path = 0;

    std::vector<StepLog> steps; // K+1 entries, k descending from K to 0
    Vec eps0;                   // per constraint row, captured at x(T)

    // states row i holds x at k = K - i; dropped after auditing when the
    // trajectory is too large to keep (has_states false)
    Mat states;
    bool has_states = false;

    double min_h_tilde = std::numeric_limits<double>::infinity();
    double final_h = 0.0;
    double total_energy = 0.0;     // sum |u_k|^2 dt
    double kl_integrand_sum = 0.0; // sum |u_k|^2 / g_k^2 dt (or |u_k|^2 dt when deterministic)
    bool deterministic = false;    // some control step ran with zero sampling noise

    // filled by the auditor (independent re-evaluation from states)
    bool audited = false;
    double audited_min_h_tilde = std::numeric_limits<double>::quiet_NaN();
    double audit_integrity_error = std::numeric_limits<double>::quiet_NaN();
    bool tube_flag = false; // audited min fell below -1e-6
};

} // namespace shield
