#include "shield/sampler.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "shield/analysis.hpp"
#include "shield/rng.hpp"

namespace shield {

int SamplerSetup::state_dim() const {
    if (barrier) return barrier->dim();
    if (oracle.mix) return oracle.mix->dim();
    if (dim > 0) return dim;
    throw ValidationError("state dimension is undetermined (no barrier, mixture, or dim)");
}

CapTrackingPlan derive_cap_tracking(const SamplerSetup& setup, int n_paths) {
    if (!setup.barrier)
        throw ValidationError("cap-tracking gamma needs a barrier");
    const Barrier& bar = *setup.barrier;
    const double e = bar.h_sup();
    if (!std::isfinite(e))
        throw ValidationError("cap-tracking gamma needs a barrier with finite h_sup");
    if (setup.cfg.schedule.kind() != ScheduleKind::Exponential)
        throw ValidationError("cap-tracking gamma requires the exponential schedule");

    const int dim = bar.dim();
    Vec x(dim), h(bar.rows());
    double mildest = std::numeric_limits<double>::infinity();
    for (int p = 0; p < n_paths; ++p) {
        Rng rng(setup.cfg.seed, static_cast<uint64_t>(p));
        for (int i = 0; i < dim; ++i) x[i] = rng.normal();
        bar.eval(x, h);
        mildest = std::min(mildest, -h.minCoeff());
    }
    if (!(mildest > 0.0))
        throw ValidationError("cap-tracking gamma expects every initial draw to violate the barrier");

    const double q = setup.cfg.gamma_q;
    const double lam = setup.cfg.schedule.param();
    CapTrackingPlan plan;
    plan.eps_ref = 0.9 * mildest;
    plan.c_eff = q / (1.0 - q) * (e + plan.eps_ref);
    double c_ref = (plan.eps_ref + plan.c_eff) / std::expm1(lam);
    double kappa = q * lam * (c_ref - e);
    if (!(kappa > 0.0))
        throw ValidationError("cap-tracking gamma needs deeper initial violations than h_sup");

    plan.gamma = GammaFn{GammaKind::CapTracking, lam, kappa, setup.cfg.gamma_y0};
    if (!(plan.gamma.max_slope() * setup.cfg.dt() < 1.0))
        throw ValidationError("cap-tracking gamma slope violates the dt stability bound");
    return plan;
}

namespace {

struct RunContext {
    const SamplerSetup& setup;
    SampleMode mode;
    GammaFn gamma;
    std::vector<double> margins; // per row
};

TrajectoryRecord run_path(const RunContext& ctx, int path) {
    const SamplerSetup& s = ctx.setup;
    const ShieldConfig& cfg = s.cfg;
    const Barrier* bar = s.barrier.get();
    const int dim = s.state_dim();
    const int R = bar ? bar->rows() : 0;
    const int K = cfg.K;
    const double T = cfg.T, dt = cfg.dt();
    const bool guided = ctx.mode == SampleMode::Guided;

    if (ctx.mode == SampleMode::ForcedControl && s.forced_u.size() != dim)
        throw DimensionMismatch(dim, static_cast<int>(s.forced_u.size()));

    Rng rng(cfg.seed, static_cast<uint64_t>(path));

    TrajectoryRecord rec;
    rec.path = path;
    rec.steps.reserve(K + 1);
    rec.states.resize(K + 1, dim);
    rec.has_states = true;

    Vec x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.normal();

    // per-row tube radius from this path's own terminal draw
    Vec h(std::max(R, 1)), grad(dim), d = Vec::Zero(dim), u = Vec::Zero(dim);
    std::vector<double> eps0(R, 0.0), eps(R, 0.0), htld(R, 0.0);
    if (R > 0) {
        bar->eval(x, h);
        for (int r = 0; r < R; ++r) eps0[r] = epsilon_init(h[r], ctx.margins[r]);
        rec.eps0 = Eigen::Map<Vec>(eps0.data(), R);
    }

    auto log_state = [&](int k, double t, double u2, double g_step, QpMethod method) {
        StepLog sl;
        sl.k = k;
        sl.t = t;
        sl.u_norm_sq = u2;
        sl.g = g_step;
        sl.qp = method;
        if (R > 0) {
            int worst = 0;
            for (int r = 0; r < R; ++r) {
                eps[r] = s.schedule_for(r).eval(eps0[r], t, T);
                htld[r] = h[r] + eps[r];
                if (htld[r] < htld[worst]) worst = r;
            }
            sl.h = h[worst];
            sl.epsilon = eps[worst];
            sl.h_tilde = htld[worst];
        }
        rec.min_h_tilde = std::min(rec.min_h_tilde, sl.h_tilde);
        rec.steps.push_back(sl);
    };

    for (int k = K; k >= 1; --k) {
        const double t = T * k / K;
        rec.states.row(K - k) = x.transpose();
        if (R > 0) bar->eval(x, h);

        // noise first: the control sees the realized increment
        const double g_step = cfg.stochastic ? s.oracle.ns->g(t) : 0.0;
        if (cfg.stochastic) {
            for (int i = 0; i < dim; ++i) d[i] = rng.normal();
            d *= g_step * std::sqrt(dt);
        }

        Vec f = s.oracle.drift(x, t);

        u.setZero();
        QpMethod method = QpMethod::None;
        if (guided && R > 0) {
            QPInstance qp(dim);
            for (int r = 0; r < R; ++r) {
                double eps_r = s.schedule_for(r).eval(eps0[r], t, T);
                double htld_r = h[r] + eps_r;
                if (htld_r < -1e-6)
                    throw TubeViolation("path " + std::to_string(path) + " left the tube at k=" +
                                        std::to_string(k) + " (h_tilde=" + std::to_string(htld_r) + ")");
                bar->grad(x, r, grad);
                double eps_dt = s.schedule_for(r).deriv(eps0[r], t, T);
                qp.add_row(grad, assemble_rhs(ctx.gamma(htld_r), grad, f, d, eps_dt, dt),
                           bar->support(r));
            }
            QpResult res = solve_min_norm(qp, cfg.solver);
            u = std::move(res.u);
            method = res.method;
        } else if (ctx.mode == SampleMode::ForcedControl) {
            u = s.forced_u;
        }

        const double u2 = u.squaredNorm();
        log_state(k, t, u2, g_step, method);
        rec.total_energy += u2 * dt;
        if (u2 > 0.0) {
            if (g_step > 0.0) {
                rec.kl_integrand_sum += u2 / (g_step * g_step) * dt;
            } else {
                rec.kl_integrand_sum += u2 * dt;
                rec.deterministic = true;
            }
        }

        // shared update expression for every mode keeps the minimal
        // intervention property bitwise (u = 0 reproduces the unguided step)
        x -= dt * f;
        x -= dt * u;
        x += d;

        if (ctx.mode == SampleMode::Projection && R > 0) {
            const double t_next = T * (k - 1) / K;
            std::vector<double> proj_eps(R, 0.0);
            if (s.projection_tube)
                for (int r = 0; r < R; ++r)
                    proj_eps[r] = s.schedule_for(r).eval(eps0[r], t_next, T);
            Vec moved = projection_step(*bar, x, proj_eps);
            double disp2 = (moved - x).squaredNorm();
            if (disp2 > 0.0) {
                // log the projection as its equivalent instantaneous control
                rec.steps.back().u_norm_sq += disp2 / (dt * dt);
                rec.total_energy += disp2 / dt;
            }
            x = std::move(moved);
        }
    }

    rec.states.row(K) = x.transpose();
    if (R > 0) bar->eval(x, h);
    log_state(0, 0.0, 0.0, cfg.stochastic ? s.oracle.ns->g(0.0) : 0.0, QpMethod::None);
    rec.final_h = R > 0 ? h.minCoeff() : 0.0;
    if (R == 0) rec.min_h_tilde = 0.0;

    if (guided && rec.steps.back().h_tilde < -1e-6)
        throw TubeViolation("path " + std::to_string(path) + " ended outside the tube (h_tilde=" +
                            std::to_string(rec.steps.back().h_tilde) + ")");

    if (R > 0) audit_record(rec, *bar, s.row_schedules, cfg.schedule, T);

    if (static_cast<long>(K + 1) * dim > s.keep_states_limit) {
        rec.states.resize(0, 0);
        rec.has_states = false;
    }
    return rec;
}

} // namespace

std::vector<TrajectoryRecord> sample_paths(const SamplerSetup& setup, SampleMode mode,
                                           int n_paths, int n_threads) {
    if (n_paths < 1) throw ValidationError("n_paths must be >= 1");
    setup.cfg.validate();
    const int R = setup.barrier ? setup.barrier->rows() : 0;
    if (!setup.row_schedules.empty() && static_cast<int>(setup.row_schedules.size()) != R)
        throw ValidationError("row schedule count must match barrier rows");
    if (!setup.row_margins.empty() && static_cast<int>(setup.row_margins.size()) != R)
        throw ValidationError("row margin count must match barrier rows");

    RunContext ctx{setup, mode, GammaFn{GammaKind::Linear, setup.cfg.alpha, 0.0, 1.0}, {}};
    ctx.margins.assign(R, setup.cfg.c);
    if (!setup.row_margins.empty()) ctx.margins = setup.row_margins;
    if (setup.cfg.gamma_kind == GammaKind::CapTracking && R > 0) {
        CapTrackingPlan plan = derive_cap_tracking(setup, n_paths);
        ctx.gamma = plan.gamma;
        ctx.margins.assign(R, plan.c_eff);
    }

    std::vector<TrajectoryRecord> records(n_paths);
    n_threads = std::max(1, n_threads);
    if (n_threads == 1 || n_paths == 1) {
        for (int p = 0; p < n_paths; ++p) records[p] = run_path(ctx, p);
        return records;
    }

    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n_paths);
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            int p = next.fetch_add(1);
            if (p >= n_paths || failed.load(std::memory_order_relaxed)) break;
            try {
                records[p] = run_path(ctx, p);
            } catch (...) {
                errors[p] = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(n_threads, n_paths); ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err); // lowest path index wins
    return records;
}

} // namespace shield
