#include "shield/checks.hpp"

#include <cmath>
#include <memory>

#include "shield/analysis.hpp"
#include "shield/barrier.hpp"
#include "shield/lorenz.hpp"
#include "shield/qp.hpp"
#include "shield/rng.hpp"
#include "shield/sampler.hpp"

namespace shield {

namespace {

double cross_check(const QPInstance& qp, QpSuiteReport& rep) {
    QpResult closed = solve_min_norm(qp, QpSolver::ClosedForm);
    QpResult dual = solve_min_norm(qp, QpSolver::DualAscent);
    const double diff = (closed.u - dual.u).lpNorm<Eigen::Infinity>();
    for (std::size_t i = 0; i < qp.rows().size(); ++i) {
        const auto& row = qp.rows()[i];
        const double slack = row.a.dot(dual.u) - row.b;
        rep.max_feasibility_viol = std::max(rep.max_feasibility_viol, slack);
        rep.max_complementarity =
            std::max(rep.max_complementarity, std::abs(dual.lambda[static_cast<long>(i)] * slack));
    }
    return diff;
}

} // namespace

QpSuiteReport qp_equivalence_suite(std::uint64_t seed, int n_single, int n_multi) {
    Rng rng(seed);
    QpSuiteReport rep;
    rep.n_single = n_single;
    rep.n_multi = n_multi;
    for (int i = 0; i < n_single; ++i) {
        const int dim = 1 + static_cast<int>(rng.bits() % 8);
        Vec a(dim);
        for (int d = 0; d < dim; ++d) a[d] = rng.normal();
        const double b = rng.uniform(-1.5, 0.5); // mixes active and slack rows
        QPInstance qp(dim);
        qp.add_row(a, b);
        rep.max_diff_single = std::max(rep.max_diff_single, cross_check(qp, rep));
    }
    for (int i = 0; i < n_multi; ++i) {
        const int blocks = 2 + static_cast<int>(rng.bits() % 4);
        std::vector<int> widths(blocks);
        int dim = 0;
        for (int bi = 0; bi < blocks; ++bi) {
            widths[bi] = 1 + static_cast<int>(rng.bits() % 3);
            dim += widths[bi];
        }
        QPInstance qp(dim);
        int at = 0;
        for (int bi = 0; bi < blocks; ++bi) {
            Vec a = Vec::Zero(dim);
            for (int d = 0; d < widths[bi]; ++d) a[at + d] = rng.normal();
            at += widths[bi];
            qp.add_row(a, rng.uniform(-1.5, 0.5));
        }
        rep.max_diff_multi = std::max(rep.max_diff_multi, cross_check(qp, rep));
    }
    rep.pass = rep.max_diff_single <= 1e-9 && rep.max_diff_multi <= 1e-8 &&
               rep.max_feasibility_viol <= 1e-8 && rep.max_complementarity <= 1e-6;
    return rep;
}

std::vector<GradCheckEntry> grad_check_suite(std::uint64_t seed) {
    std::vector<GradCheckEntry> out;
    Rng rng(seed);
    auto randn = [&](int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = rng.normal();
        return v;
    };
    auto randu = [&](int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = rng.uniform();
        return v;
    };
    // quadratic barriers pass at 1e-4, linear ones at 1e-9, both at step 1e-5
    auto add = [&](const char* name, const Barrier& bar, const Vec& x, double tol) {
        const double err = grad_check(bar, x, 1e-5);
        out.push_back({name, err, tol, err <= tol});
    };

    Vec w(3);
    w << 1.0, -2.0, 0.5;
    add("halfspace", Halfspace(w, 0.3), randn(3), 1e-9);

    Vec center(3);
    center << 0.2, -0.1, 0.0;
    add("ball", Ball(center, 1.1), randn(3), 1e-4);

    Vec lo(3), hi(3), xb(3);
    lo << -1.0, -1.0, -1.0;
    hi << 1.0, 2.0, 3.0;
    for (int i = 0; i < 3; ++i) // interior point, clear of min-face ties
        xb[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform(0.55, 0.95);
    add("box", Box(lo, hi), xb, 1e-9);

    const int L = 5;
    Mat traj = lorenz_dataset(1, L, 0.01, seed + 1);
    Vec xp = traj.row(0).transpose() + 0.05 * randn(3 * (L + 1));
    add("physics_residual", PhysicsResidual(LorenzParams{}, 0.01, L, 1e-3), xp, 1e-4);

    add("smoothness", Smoothness(5, 2, 0.1, 1.5), randn(10), 1e-4);

    add("pixel_patch", PixelPatch(8, 8, 2, 3, 3, 2, {0.2, 0.4, 0.8}, 0.05), randu(8 * 8 * 3), 1e-4);

    add("color_region", ColorRegion(8, 8, 0, 2, {0.2, 0.4, 0.8}, 0.25, 1.0, 0.05),
        randu(8 * 8 * 3), 1e-4);

    std::vector<std::shared_ptr<Barrier>> members;
    members.push_back(std::make_shared<Halfspace>(w, 0.3));
    members.push_back(std::make_shared<Ball>(center, 1.1));
    add("intersection", Intersection(std::move(members)), randn(3), 1e-4);

    return out;
}

std::vector<KlCheckEntry> kl_check_suite(int n_paths, std::uint64_t seed, int threads,
                                         double rel_tol) {
    const double cases[3][3] = {{1.0, 1.0, 1.0}, {2.0, 1.5, 0.5}, {0.7, 0.5, 2.0}};
    std::vector<KlCheckEntry> out;
    for (const auto& cs : cases) {
        KlCheckEntry e;
        e.u = cs[0];
        e.g = cs[1];
        e.T = cs[2];
        SamplerSetup s;
        s.oracle.ns = std::make_shared<ConstantGSchedule>(e.g, e.T);
        s.oracle.probability_flow = false;
        s.cfg.T = e.T;
        s.cfg.K = 200;
        s.cfg.stochastic = true;
        s.cfg.seed = seed;
        s.forced_u = Vec::Constant(1, e.u);
        s.dim = 1;
        auto records = sample_paths(s, SampleMode::ForcedControl, n_paths, threads);
        KLReport kl = kl_girsanov_estimate(records, *s.oracle.ns);
        e.estimate = kl.estimate;
        e.std_error = kl.std_error;
        e.expected = 0.5 * e.u * e.u * e.T / (e.g * e.g);
        e.rel_error = std::abs(e.estimate - e.expected) / e.expected;
        e.pass = e.rel_error <= rel_tol;
        out.push_back(e);
    }
    return out;
}

} // namespace shield
