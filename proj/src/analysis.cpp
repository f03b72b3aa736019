#include "shield/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace shield {

void audit_record(TrajectoryRecord& rec, const Barrier& bar,
                  const std::vector<ConstrictionSchedule>& row_schedules,
                  const ConstrictionSchedule& default_schedule, double T) {
    if (!rec.has_states)
        throw ValidationError("audit needs retained states");
    const int R = bar.rows();
    const int K = static_cast<int>(rec.steps.size()) - 1;
    Vec h(R);

    double audited_min = std::numeric_limits<double>::infinity();
    double integrity = 0.0;
    for (int i = 0; i <= K; ++i) {
        const int k = rec.steps[i].k;
        const double t = T * k / K;
        Vec x = rec.states.row(i).transpose();
        bar.eval(x, h);
        double worst = std::numeric_limits<double>::infinity();
        for (int r = 0; r < R; ++r) {
            const ConstrictionSchedule& sched =
                row_schedules.empty() ? default_schedule : row_schedules[r];
            worst = std::min(worst, h[r] + sched.eval(rec.eps0[r], t, T));
        }
        audited_min = std::min(audited_min, worst);
        integrity = std::max(integrity, std::abs(worst - rec.steps[i].h_tilde));
        if (i == K) integrity = std::max(integrity, std::abs(h.minCoeff() - rec.final_h));
    }

    rec.audited = true;
    rec.audited_min_h_tilde = audited_min;
    rec.audit_integrity_error = integrity;
    rec.tube_flag = audited_min < -1e-6;
}

AuditReport invariance_audit(const std::vector<TrajectoryRecord>& records) {
    AuditReport rep;
    rep.n_paths = static_cast<int>(records.size());
    if (records.empty()) return rep;

    rep.worst_min_h_tilde = std::numeric_limits<double>::infinity();
    rep.worst_final_h = std::numeric_limits<double>::infinity();
    for (const auto& rec : records) {
        double mh = rec.audited ? rec.audited_min_h_tilde : rec.min_h_tilde;
        bool flag = rec.audited ? rec.tube_flag : (mh < -1e-6);
        rep.min_h_tilde.push_back(mh);
        rep.final_h.push_back(rec.final_h);
        rep.flagged.push_back(flag ? 1 : 0);
        if (flag) ++rep.tube_flags;
        if (rec.final_h < 0.0) ++rep.violations;
        rep.worst_min_h_tilde = std::min(rep.worst_min_h_tilde, mh);
        rep.worst_final_h = std::min(rep.worst_final_h, rec.final_h);
        if (rec.audited)
            rep.max_integrity_error = std::max(rep.max_integrity_error, rec.audit_integrity_error);
    }
    rep.violation_fraction = static_cast<double>(rep.violations) / rep.n_paths;
    rep.energy_first_half_fraction = energy_profile(records).first_half_fraction;
    return rep;
}

KLReport kl_girsanov_estimate(const std::vector<TrajectoryRecord>& records,
                              const NoiseSchedule& ns) {
    (void)ns; // realized per-step g comes from the logs
    KLReport rep;
    rep.n_paths = static_cast<int>(records.size());
    if (records.empty()) return rep;

    const int K = static_cast<int>(records.front().steps.size()) - 1;
    for (const auto& rec : records)
        if (static_cast<int>(rec.steps.size()) != K + 1)
            throw ValidationError("kl estimate needs records of equal length");

    bool det = false;
    for (const auto& rec : records)
        for (int i = 0; i < K; ++i)
            if (rec.steps[i].u_norm_sq > 0.0 && rec.steps[i].g == 0.0) det = true;
    rep.deterministic_energy = det;

    rep.per_step_integrand.assign(K, 0.0);
    Vec per_path(rep.n_paths);
    for (int p = 0; p < rep.n_paths; ++p) {
        const auto& steps = records[p].steps;
        double acc = 0.0;
        for (int i = 0; i < K; ++i) { // rows k = K..1; k = 0 carries no control
            double u2 = steps[i].u_norm_sq;
            if (u2 == 0.0) continue;
            double dt = steps[i].t - steps[i + 1].t;
            double integrand = det ? u2 : u2 / (steps[i].g * steps[i].g);
            acc += integrand * dt;
            rep.per_step_integrand[i] += integrand / rep.n_paths;
        }
        per_path[p] = det ? acc : 0.5 * acc;
    }
    rep.estimate = per_path.mean();
    if (rep.n_paths > 1) {
        double var = (per_path.array() - rep.estimate).square().sum() / (rep.n_paths - 1);
        rep.std_error = std::sqrt(var / rep.n_paths);
    }
    return rep;
}

EnergyProfile energy_profile(const std::vector<TrajectoryRecord>& records) {
    EnergyProfile prof;
    if (records.empty()) return prof;
    const int K = static_cast<int>(records.front().steps.size()) - 1;
    for (const auto& rec : records)
        if (static_cast<int>(rec.steps.size()) != K + 1)
            throw ValidationError("energy profile needs records of equal length");

    prof.mean_u_norm_sq.assign(K, 0.0);
    for (const auto& rec : records)
        for (int i = 0; i < K; ++i)
            prof.mean_u_norm_sq[i] += rec.steps[i].u_norm_sq / records.size();

    double first = 0.0, total = 0.0;
    for (int i = 0; i < K; ++i) {
        int k = records.front().steps[i].k;
        total += prof.mean_u_norm_sq[i];
        if (2 * k >= K) first += prof.mean_u_norm_sq[i]; // t = Tk/K >= T/2
    }
    prof.first_half_fraction = total > 0.0 ? first / total : 0.0;
    return prof;
}

std::vector<int> smoothness_violations(const std::vector<Vec>& sequences, const Smoothness& bar) {
    std::vector<int> out;
    out.reserve(sequences.size());
    Vec h(1);
    for (const auto& seq : sequences) {
        bar.eval(seq, h);
        out.push_back(h[0] < 0.0 ? 1 : 0);
    }
    return out;
}

} // namespace shield
