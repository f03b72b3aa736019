#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "shield/checks.hpp"
#include "shield/config.hpp"
#include "shield/errors.hpp"
#include "shield/experiments.hpp"

namespace {

using namespace shield;

int default_threads() {
    if (const char* env = std::getenv("SHIELD_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

void print_run(const char* label, const RunArtifacts& a) {
    std::printf("%s: paths=%d violations=%d min_h_tilde=%.10g final_h=%.10g energy=%.10g",
                label, a.audit.n_paths, a.audit.violations, a.audit.worst_min_h_tilde,
                a.audit.worst_final_h, a.summary.total_energy);
    if (a.kl.deterministic_energy)
        std::printf(" l2_energy=%.10g", a.kl.estimate);
    else
        std::printf(" kl=%.10g stderr=%.3g", a.kl.estimate, a.kl.std_error);
    std::printf(" first_half_energy=%.4g wall_ms=%ld\n", a.audit.energy_first_half_fraction,
                a.summary.wall_ms);
}

int cmd_run(const std::string& config_path, const CLI::Option* seed_opt, std::uint64_t seed,
            const CLI::Option* paths_opt, int paths, const CLI::Option* steps_opt, int steps,
            const CLI::Option* out_opt, const std::string& out, int threads) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config(config_path);
    } catch (const IOError& e) {
        throw ValidationError(e.what()); // unreadable config is a config error, not an abort
    }
    bool overridden = false;
    if (seed_opt->count()) {
        cfg.seed = seed;
        overridden = true;
    }
    if (paths_opt->count()) {
        cfg.n_paths = paths;
        overridden = true;
    }
    if (steps_opt->count()) {
        cfg.K = steps;
        overridden = true;
    }
    if (out_opt->count()) cfg.output = out;
    if (overridden) validate_config(cfg);

    if (cfg.experiment == "qp-check") {
        QpSuiteReport rep = qp_equivalence_suite(cfg.seed);
        std::printf("qp-check: singles=%d blocks=%d max_diff_single=%.3g max_diff_multi=%.3g "
                    "max_feas=%.3g max_comp=%.3g -> %s\n",
                    rep.n_single, rep.n_multi, rep.max_diff_single, rep.max_diff_multi,
                    rep.max_feasibility_viol, rep.max_complementarity, rep.pass ? "PASS" : "FAIL");
        return rep.pass ? 0 : 3;
    }

    ExperimentResult res = run_experiment(cfg, threads, true);
    if (res.cap)
        std::printf("cap-tracking: eps_ref=%.10g c_eff=%.10g slope=%.10g kappa=%.10g y0=%.3g\n",
                    res.cap->eps_ref, res.cap->c_eff, res.cap->gamma.slope, res.cap->gamma.kappa,
                    res.cap->gamma.y0);
    print_run(mode_dir_name(res.main.mode), res.main);
    if (res.unconstrained) print_run("unconstrained", *res.unconstrained);
    if (res.projection) print_run("projection", *res.projection);
    std::printf("wrote %s\n", cfg.output.c_str());

    const bool safe = res.main.audit.violations == 0 && res.main.audit.tube_flags == 0;
    return safe ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"constricting safety-tube sampling for flow-based generative models"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    std::uint64_t seed = 7;
    int paths = 0, steps = 0;
    int threads = default_threads();

    auto* run = app.add_subcommand("run", "run an experiment config with baselines");
    run->add_option("config", config_path, "JSON experiment config")->required();
    auto* run_seed = run->add_option("--seed", seed, "override the rng seed");
    auto* run_paths = run->add_option("--paths", paths, "override the path count");
    auto* run_steps = run->add_option("--steps", steps, "override the step count K");
    auto* run_out = run->add_option("--out", out_override, "override the output directory");
    run->add_option("--threads", threads, "worker threads (default: SHIELD_THREADS or hardware)");

    std::uint64_t qp_seed = 7;
    int qp_singles = 1000, qp_blocks = 200;
    auto* qp = app.add_subcommand("qp-check", "closed-form vs dual-ascent QP cross-validation");
    qp->add_option("--seed", qp_seed, "suite rng seed");
    qp->add_option("--singles", qp_singles, "number of single-row instances");
    qp->add_option("--blocks", qp_blocks, "number of block-separable instances");

    std::uint64_t kl_seed = 7;
    int kl_paths = 10000, kl_threads = default_threads();
    auto* kl = app.add_subcommand("kl-check", "forced-control KL estimates vs closed form");
    kl->add_option("--seed", kl_seed, "path rng seed");
    kl->add_option("--paths", kl_paths, "paths per setting");
    kl->add_option("--threads", kl_threads, "worker threads");

    std::uint64_t gc_seed = 7;
    auto* gc = app.add_subcommand("grad-check", "finite-difference check of barrier gradients");
    gc->add_option("--seed", gc_seed, "probe rng seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // bad usage is a config error
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, run_seed, seed, run_paths, paths, run_steps, steps,
                           run_out, out_override, threads);
        if (qp->parsed()) {
            QpSuiteReport rep = qp_equivalence_suite(qp_seed, qp_singles, qp_blocks);
            std::printf(
                "qp-check: singles=%d blocks=%d max_diff_single=%.3g max_diff_multi=%.3g "
                "max_feas=%.3g max_comp=%.3g -> %s\n",
                rep.n_single, rep.n_multi, rep.max_diff_single, rep.max_diff_multi,
                rep.max_feasibility_viol, rep.max_complementarity, rep.pass ? "PASS" : "FAIL");
            return rep.pass ? 0 : 3;
        }
        if (kl->parsed()) {
            bool all = true;
            for (const auto& e : kl_check_suite(kl_paths, kl_seed, kl_threads)) {
                std::printf("kl-check u=%g g=%g T=%g: estimate=%.10g expected=%.10g rel=%.3g "
                            "stderr=%.3g -> %s\n",
                            e.u, e.g, e.T, e.estimate, e.expected, e.rel_error, e.std_error,
                            e.pass ? "PASS" : "FAIL");
                all = all && e.pass;
            }
            return all ? 0 : 3;
        }
        if (gc->parsed()) {
            bool all = true;
            for (const auto& e : grad_check_suite(gc_seed)) {
                std::printf("grad-check %s: err=%.3g tol=%.1g -> %s\n", e.name.c_str(), e.error,
                            e.tol, e.pass ? "PASS" : "FAIL");
                all = all && e.pass;
            }
            return all ? 0 : 3;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const RuntimeAbort& e) {
        std::fprintf(stderr, "runtime abort: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
