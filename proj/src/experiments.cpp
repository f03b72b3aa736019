#include "shield/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shield/errors.hpp"
#include "shield/lorenz.hpp"
#include "shield/rng.hpp"

namespace shield {

Mat smooth_dataset(int count, int S, int action_dim, double ds, double v_lo, double v_hi,
                   std::uint64_t seed) {
    if (count < 1) throw InvalidCount("dataset count must be >= 1");
    if (S < 2) throw ValidationError("sequence length S must be >= 2");
    if (action_dim < 1) throw ValidationError("action_dim must be >= 1");
    if (!(ds > 0.0)) throw ValidationError("action spacing ds must be positive");
    if (!(v_lo >= 0.0) || !(v_lo <= v_hi)) throw ValidationError("need 0 <= v_lo <= v_hi");
    Rng rng(seed);
    Mat out(count, S * action_dim);
    for (int m = 0; m < count; ++m) {
        Vec a(action_dim);
        for (int i = 0; i < action_dim; ++i) a[i] = rng.normal();
        Mat inc(S - 1, action_dim);
        for (long r = 0; r < inc.rows(); ++r)
            for (int i = 0; i < action_dim; ++i) inc(r, i) = rng.normal();
        const double target = rng.uniform(v_lo, v_hi);
        const double v = inc.squaredNorm() / (S * ds);
        if (v > 0.0) inc *= std::sqrt(target / v);
        out.row(m).segment(0, action_dim) = a;
        for (int s = 1; s < S; ++s) {
            a += inc.row(s - 1);
            out.row(m).segment(static_cast<long>(s) * action_dim, action_dim) = a;
        }
    }
    return out;
}

Mat load_dataset_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot open dataset file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        bool numeric = true;
        while (std::getline(ss, field, ',')) {
            char* end = nullptr;
            double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0') {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first) { // header row
                first = false;
                continue;
            }
            throw ParseError(path + ": non-numeric field \"" + field + "\"");
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path + ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");
    Mat m(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    return m;
}

namespace {

std::shared_ptr<GaussianMixture> build_mixture(const OracleSpec& o) {
    if (o.kind == "pure_diffusion") return nullptr;
    if (o.kind == "gmm") {
        Vec sds = o.sds.size() ? o.sds : Vec::Zero(o.means.rows());
        Vec w = o.weights.size()
                    ? o.weights
                    : Vec::Constant(o.means.rows(), 1.0 / static_cast<double>(o.means.rows()));
        return std::make_shared<GaussianMixture>(o.means, sds, w);
    }
    Mat data;
    if (o.kind == "dataset_file")
        data = load_dataset_csv(o.path);
    else if (o.kind == "lorenz_dataset")
        data = lorenz_dataset(o.count, o.L, o.dl, o.data_seed, o.lorenz);
    else if (o.kind == "smooth_dataset")
        data = smooth_dataset(o.count, o.S, o.action_dim, o.ds, o.v_lo, o.v_hi, o.data_seed);
    else
        throw ValidationError("unknown oracle kind \"" + o.kind + "\"");
    return std::make_shared<GaussianMixture>(GaussianMixture::dataset(data));
}

int spec_rows(const BarrierSpec& spec) {
    auto b = spec.build();
    return b ? b->rows() : 0;
}

} // namespace

SamplerSetup build_setup(const ExperimentConfig& cfg) {
    SamplerSetup s;
    s.oracle.mix = build_mixture(cfg.oracle);
    s.oracle.ns = cfg.oracle.noise.build(cfg.T);
    s.oracle.form = cfg.oracle.drift == "literal" ? DriftForm::Literal : DriftForm::BetaScaled;
    s.oracle.probability_flow = !cfg.stochastic;
    s.barrier = cfg.barrier.build();
    s.cfg = cfg.shield_config();
    s.projection_tube = cfg.projection_tube;
    s.forced_u = cfg.control;
    if (cfg.oracle.kind == "pure_diffusion")
        s.dim = cfg.control.size() ? static_cast<int>(cfg.control.size()) : cfg.oracle.dim;

    // expand per-barrier schedule/margin overrides to per-row vectors
    bool any_override = cfg.barrier.schedule.has_value() || cfg.barrier.margin.has_value();
    for (const auto& m : cfg.barrier.members)
        any_override = any_override || m.schedule.has_value() || m.margin.has_value();
    if (any_override && s.barrier) {
        auto push_rows = [&](const BarrierSpec& spec, int rows) {
            ConstrictionSchedule sched =
                spec.schedule ? spec.schedule->build()
                              : (cfg.barrier.schedule ? cfg.barrier.schedule->build()
                                                      : cfg.schedule.build());
            double margin = spec.margin ? *spec.margin
                                        : (cfg.barrier.margin ? *cfg.barrier.margin : cfg.c);
            for (int r = 0; r < rows; ++r) {
                s.row_schedules.push_back(sched);
                s.row_margins.push_back(margin);
            }
        };
        if (cfg.barrier.kind == "intersection") {
            for (const auto& m : cfg.barrier.members) push_rows(m, spec_rows(m));
        } else {
            push_rows(cfg.barrier, s.barrier->rows());
        }
        if (static_cast<int>(s.row_schedules.size()) != s.barrier->rows())
            throw ValidationError("per-row override expansion does not match barrier rows");
    }
    return s;
}

RunArtifacts run_mode(const SamplerSetup& setup, SampleMode mode, int n_paths, int threads) {
    RunArtifacts art;
    art.mode = mode;
    const auto t0 = std::chrono::steady_clock::now();
    art.records = sample_paths(setup, mode, n_paths, threads);
    art.audit = invariance_audit(art.records);
    art.kl = kl_girsanov_estimate(art.records, *setup.oracle.ns);
    art.profile = energy_profile(art.records);
    const auto t1 = std::chrono::steady_clock::now();
    const long wall_ms =
        static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count());
    art.summary = make_summary(art.records, art.audit, art.kl, wall_ms);
    return art;
}

void write_run(const RunArtifacts& run, const std::string& dir) {
    ensure_dir(dir);
    const std::size_t full_logs = std::min<std::size_t>(run.records.size(), 32);
    for (std::size_t p = 0; p < full_logs; ++p) {
        char name[32];
        std::snprintf(name, sizeof(name), "path_%03zu.csv", p);
        write_trajectory_csv(run.records[p], dir + "/" + name);
    }
    write_profile_csv(run.records, run.profile, dir + "/profile.csv");
    write_summary_json(run.summary, dir + "/summary.json");
}

const char* mode_dir_name(SampleMode mode) {
    switch (mode) {
    case SampleMode::Guided: return "guided";
    case SampleMode::Unguided: return "unguided";
    case SampleMode::Projection: return "projection";
    case SampleMode::ForcedControl: return "forced";
    }
    return "run";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads, bool write_output) {
    SamplerSetup setup = build_setup(cfg);
    ExperimentResult res;
    if (setup.cfg.gamma_kind == GammaKind::CapTracking)
        res.cap = derive_cap_tracking(setup, cfg.n_paths);

    SampleMode main_mode = SampleMode::Guided;
    if (cfg.control.size())
        main_mode = SampleMode::ForcedControl;
    else if (!setup.barrier)
        main_mode = SampleMode::Unguided;

    res.main = run_mode(setup, main_mode, cfg.n_paths, threads);
    if (write_output) write_run(res.main, cfg.output + "/" + mode_dir_name(main_mode));

    if (cfg.baseline_unconstrained && main_mode == SampleMode::Guided) {
        res.unconstrained = run_mode(setup, SampleMode::Unguided, cfg.n_paths, threads);
        if (write_output) write_run(*res.unconstrained, cfg.output + "/unconstrained");
    }
    if (cfg.baseline_projection && setup.barrier) {
        res.projection = run_mode(setup, SampleMode::Projection, cfg.n_paths, threads);
        if (write_output) write_run(*res.projection, cfg.output + "/projection");
    }
    return res;
}

} // namespace shield
