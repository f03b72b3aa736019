#include "shield/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shield/errors.hpp"

namespace shield {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- builders

std::shared_ptr<NoiseSchedule> NoiseSpec::build(double T) const {
    if (kind == "vp") return std::make_shared<VpSchedule>(beta_min, beta_max, T);
    if (kind == "ve") return std::make_shared<VeSchedule>(g_min, ratio, T);
    if (kind == "constant") return std::make_shared<ConstantGSchedule>(g0, T);
    throw ValidationError("unknown noise kind \"" + kind + "\"");
}

ConstrictionSchedule ScheduleSpec::build() const {
    if (kind == "linear") return ConstrictionSchedule::linear();
    if (kind == "exponential") return ConstrictionSchedule::exponential(lambda);
    if (kind == "polynomial") return ConstrictionSchedule::polynomial(power);
    throw ValidationError("unknown schedule kind \"" + kind + "\"");
}

std::shared_ptr<Barrier> BarrierSpec::build() const {
    if (kind == "none") return nullptr;
    if (kind == "halfspace") return std::make_shared<Halfspace>(w, offset);
    if (kind == "ball") return std::make_shared<Ball>(center, radius);
    if (kind == "box") return std::make_shared<Box>(lo, hi);
    if (kind == "physics_residual") return std::make_shared<PhysicsResidual>(lorenz, dl, L, e);
    if (kind == "smoothness") return std::make_shared<Smoothness>(S, action_dim, ds, e);
    if (kind == "pixel_patch")
        return std::make_shared<PixelPatch>(img_h, img_w, row0, col0, height, width, target, e);
    if (kind == "color_region")
        return std::make_shared<ColorRegion>(img_h, img_w, i_min, i_max, target, v_min, v_max, e);
    if (kind == "intersection") {
        std::vector<std::shared_ptr<Barrier>> built;
        for (const auto& m : members) {
            if (m.kind == "intersection")
                throw ValidationError("intersection members cannot be nested intersections");
            auto b = m.build();
            if (!b) throw ValidationError("intersection member cannot have kind \"none\"");
            built.push_back(std::move(b));
        }
        return std::make_shared<Intersection>(std::move(built));
    }
    throw ValidationError("unknown barrier kind \"" + kind + "\"");
}

ShieldConfig ExperimentConfig::shield_config() const {
    ShieldConfig sc;
    sc.T = T;
    sc.K = K;
    sc.alpha = alpha;
    sc.schedule = schedule.build();
    sc.c = c;
    sc.stochastic = stochastic;
    sc.seed = seed;
    if (solver == "auto")
        sc.solver = QpSolver::Auto;
    else if (solver == "closed_form")
        sc.solver = QpSolver::ClosedForm;
    else if (solver == "dual_ascent")
        sc.solver = QpSolver::DualAscent;
    else
        throw ValidationError("unknown solver \"" + solver + "\"");
    sc.gamma_kind = gamma.kind == "cap_tracking" ? GammaKind::CapTracking : GammaKind::Linear;
    sc.gamma_q = gamma.q;
    sc.gamma_y0 = gamma.y0;
    return sc;
}

// ---------------------------------------------------------------- defaults

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (experiment == "gmm") {
        cfg.oracle.kind = "gmm";
        cfg.oracle.means.resize(2, 2);
        cfg.oracle.means << -1.5, 0.0, 1.5, 0.0;
        cfg.oracle.sds = Vec::Constant(2, 0.4);
        cfg.oracle.weights = Vec::Constant(2, 0.5);
        cfg.barrier.kind = "halfspace";
        cfg.barrier.w = Vec::Zero(2);
        cfg.barrier.w[0] = 1.0;
        cfg.barrier.offset = -1.5;
        cfg.n_paths = 1000;
        cfg.baseline_unconstrained = true;
    } else if (experiment == "lorenz") {
        cfg.K = 40000;
        cfg.schedule.kind = "exponential";
        cfg.schedule.lambda = 14.0;
        cfg.gamma.kind = "cap_tracking";
        cfg.oracle.kind = "lorenz_dataset";
        cfg.oracle.count = 64;
        cfg.oracle.data_seed = 123;
        cfg.barrier.kind = "physics_residual";
        cfg.barrier.e = 1e-3;
        cfg.n_paths = 20;
        cfg.baseline_unconstrained = true;
    } else if (experiment == "smooth") {
        cfg.K = 300;
        cfg.alpha = 3.0;
        cfg.c = 6.0;
        cfg.schedule.kind = "polynomial";
        cfg.schedule.power = 2.0;
        cfg.oracle.kind = "smooth_dataset";
        cfg.oracle.count = 200;
        cfg.oracle.data_seed = 11;
        cfg.barrier.kind = "smoothness";
        cfg.barrier.e = 1.5;
        cfg.n_paths = 100;
        cfg.baseline_unconstrained = true;
    } else if (experiment == "pixels") {
        // per-pixel quadratic rows tolerate only an O(dt^2) linearization
        // undershoot when they ride the boundary, so the preset keeps positive
        // clearance with the cap-tracking gamma (exponential tube), runs fine
        // steps, a gentler late drift, and data whose mean honors the
        // constraint (the sd tails still make unguided paths violate)
        cfg.K = 2000;
        cfg.schedule.kind = "exponential";
        cfg.schedule.lambda = 6.0;
        cfg.gamma.kind = "cap_tracking";
        cfg.gamma.y0 = 0.01;
        cfg.c = 0.01;
        cfg.oracle.kind = "gmm";
        cfg.oracle.means = Mat::Zero(1, 32 * 32 * 3);
        for (int i = 0; i <= 7; ++i)
            for (int jcol = 0; jcol < 32; ++jcol) {
                const long base = 3L * (32L * i + jcol);
                cfg.oracle.means(0, base + 0) = 0.2;
                cfg.oracle.means(0, base + 1) = 0.4;
                cfg.oracle.means(0, base + 2) = 0.8;
            }
        cfg.oracle.sds = Vec::Constant(1, 0.15);
        cfg.oracle.weights = Vec::Constant(1, 1.0);
        cfg.oracle.noise.beta_max = 8.0;
        cfg.barrier.kind = "color_region";
        cfg.barrier.i_min = 0;
        cfg.barrier.i_max = 7;
        cfg.barrier.target = {0.2, 0.4, 0.8};
        cfg.barrier.v_min = 0.25;
        cfg.barrier.v_max = 1.0;
        cfg.barrier.e = 0.05;
        cfg.n_paths = 4;
    } else if (experiment == "kl-check") {
        cfg.stochastic = true;
        cfg.oracle.kind = "pure_diffusion";
        cfg.oracle.dim = 1;
        cfg.oracle.noise.kind = "constant";
        cfg.oracle.noise.g0 = 1.0;
        cfg.barrier.kind = "none";
        cfg.control = Vec::Constant(1, 1.0);
        cfg.n_paths = 10000;
    } else if (experiment == "qp-check") {
        cfg.oracle.kind = "pure_diffusion";
        cfg.barrier.kind = "none";
        cfg.n_paths = 1;
    } else {
        throw ValidationError("unknown experiment \"" + experiment + "\"");
    }
    return cfg;
}

// ---------------------------------------------------------------- parse helpers

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& ctx) {
    throw ParseError("unknown key \"" + key + "\" in " + ctx);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& ctx) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) bad_key(it.key(), ctx);
}

const json& req(const json& obj, const char* key, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError("missing required key \"" + std::string(key) + "\" in " + ctx);
    return *it;
}

double as_num(const json& j, const std::string& ctx) {
    if (!j.is_number()) throw ParseError(ctx + " must be a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& ctx) {
    if (!j.is_number_integer()) throw ParseError(ctx + " must be an integer");
    return j.get<int>();
}

std::uint64_t as_u64(const json& j, const std::string& ctx) {
    if (!j.is_number_unsigned() && !j.is_number_integer())
        throw ParseError(ctx + " must be a nonnegative integer");
    if (j.is_number_integer() && j.get<long long>() < 0)
        throw ParseError(ctx + " must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

bool as_bool(const json& j, const std::string& ctx) {
    if (!j.is_boolean()) throw ParseError(ctx + " must be a boolean");
    return j.get<bool>();
}

std::string as_str(const json& j, const std::string& ctx) {
    if (!j.is_string()) throw ParseError(ctx + " must be a string");
    return j.get<std::string>();
}

Vec as_vec(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw ParseError(ctx + " must be an array of numbers");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<long>(i)] = as_num(j[i], ctx + " entry");
    return v;
}

Mat as_mat(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) throw ParseError(ctx + " must be a nonempty array of rows");
    Vec first = as_vec(j[0], ctx + " row");
    Mat m(static_cast<long>(j.size()), first.size());
    m.row(0) = first;
    for (std::size_t i = 1; i < j.size(); ++i) {
        Vec row = as_vec(j[i], ctx + " row");
        if (row.size() != m.cols()) throw ParseError(ctx + " rows must all have the same length");
        m.row(static_cast<long>(i)) = row;
    }
    return m;
}

NoiseSpec parse_noise(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + " must be an object");
    NoiseSpec ns;
    ns.kind = as_str(req(j, "kind", ctx), ctx + ".kind");
    if (ns.kind == "vp") {
        check_keys(j, {"kind", "beta_min", "beta_max"}, ctx);
        if (j.contains("beta_min")) ns.beta_min = as_num(j["beta_min"], ctx + ".beta_min");
        if (j.contains("beta_max")) ns.beta_max = as_num(j["beta_max"], ctx + ".beta_max");
    } else if (ns.kind == "ve") {
        check_keys(j, {"kind", "g_min", "ratio"}, ctx);
        if (j.contains("g_min")) ns.g_min = as_num(j["g_min"], ctx + ".g_min");
        if (j.contains("ratio")) ns.ratio = as_num(j["ratio"], ctx + ".ratio");
    } else if (ns.kind == "constant") {
        check_keys(j, {"kind", "g"}, ctx);
        if (j.contains("g")) ns.g0 = as_num(j["g"], ctx + ".g");
    } else {
        throw ValidationError("unknown noise kind \"" + ns.kind + "\"");
    }
    return ns;
}

ScheduleSpec parse_schedule(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + " must be an object");
    ScheduleSpec s;
    s.kind = as_str(req(j, "kind", ctx), ctx + ".kind");
    if (s.kind == "linear") {
        check_keys(j, {"kind"}, ctx);
    } else if (s.kind == "exponential") {
        check_keys(j, {"kind", "lambda"}, ctx);
        if (j.contains("lambda")) s.lambda = as_num(j["lambda"], ctx + ".lambda");
    } else if (s.kind == "polynomial") {
        check_keys(j, {"kind", "power"}, ctx);
        if (j.contains("power")) s.power = as_num(j["power"], ctx + ".power");
    } else {
        throw ValidationError("unknown schedule kind \"" + s.kind + "\"");
    }
    return s;
}

GammaSpec parse_gamma(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + " must be an object");
    GammaSpec g;
    g.kind = as_str(req(j, "kind", ctx), ctx + ".kind");
    if (g.kind == "linear") {
        check_keys(j, {"kind"}, ctx);
    } else if (g.kind == "cap_tracking") {
        check_keys(j, {"kind", "q", "y0"}, ctx);
        if (j.contains("q")) g.q = as_num(j["q"], ctx + ".q");
        if (j.contains("y0")) g.y0 = as_num(j["y0"], ctx + ".y0");
    } else {
        throw ValidationError("unknown gamma kind \"" + g.kind + "\"");
    }
    return g;
}

LorenzParams parse_lorenz_params(const json& j, const std::string& ctx, LorenzParams base) {
    if (j.contains("sigma")) base.sigma = as_num(j["sigma"], ctx + ".sigma");
    if (j.contains("rho")) base.rho = as_num(j["rho"], ctx + ".rho");
    if (j.contains("beta")) base.beta = as_num(j["beta"], ctx + ".beta");
    return base;
}

BarrierSpec parse_barrier(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + " must be an object");
    BarrierSpec b;
    b.kind = as_str(req(j, "kind", ctx), ctx + ".kind");
    const std::set<std::string> overrides = {"schedule", "c"};
    auto with = [&](std::set<std::string> keys) {
        keys.insert("kind");
        keys.insert(overrides.begin(), overrides.end());
        check_keys(j, keys, ctx);
    };
    if (b.kind == "none") {
        with({});
    } else if (b.kind == "halfspace") {
        with({"w", "offset"});
        b.w = as_vec(req(j, "w", ctx), ctx + ".w");
        if (j.contains("offset")) b.offset = as_num(j["offset"], ctx + ".offset");
    } else if (b.kind == "ball") {
        with({"center", "radius"});
        b.center = as_vec(req(j, "center", ctx), ctx + ".center");
        if (j.contains("radius")) b.radius = as_num(j["radius"], ctx + ".radius");
    } else if (b.kind == "box") {
        with({"lo", "hi"});
        b.lo = as_vec(req(j, "lo", ctx), ctx + ".lo");
        b.hi = as_vec(req(j, "hi", ctx), ctx + ".hi");
    } else if (b.kind == "physics_residual") {
        with({"sigma", "rho", "beta", "dl", "L", "e"});
        b.lorenz = parse_lorenz_params(j, ctx, LorenzParams{});
        if (j.contains("dl")) b.dl = as_num(j["dl"], ctx + ".dl");
        if (j.contains("L")) b.L = as_int(j["L"], ctx + ".L");
        b.e = j.contains("e") ? as_num(j["e"], ctx + ".e") : 1e-3;
    } else if (b.kind == "smoothness") {
        with({"S", "action_dim", "ds", "e"});
        if (j.contains("S")) b.S = as_int(j["S"], ctx + ".S");
        if (j.contains("action_dim")) b.action_dim = as_int(j["action_dim"], ctx + ".action_dim");
        if (j.contains("ds")) b.ds = as_num(j["ds"], ctx + ".ds");
        b.e = j.contains("e") ? as_num(j["e"], ctx + ".e") : 1.5;
    } else if (b.kind == "pixel_patch" || b.kind == "color_region") {
        if (j.contains("image")) {
            Vec img = as_vec(j["image"], ctx + ".image");
            if (img.size() != 2) throw ParseError(ctx + ".image must be [height, width]");
            b.img_h = static_cast<int>(img[0]);
            b.img_w = static_cast<int>(img[1]);
        }
        Vec t = as_vec(req(j, "target", ctx), ctx + ".target");
        if (t.size() != 3) throw ParseError(ctx + ".target must have 3 channels");
        b.target = {t[0], t[1], t[2]};
        b.e = j.contains("e") ? as_num(j["e"], ctx + ".e") : 0.05;
        if (b.kind == "pixel_patch") {
            with({"image", "region", "target", "e"});
            Vec r = as_vec(req(j, "region", ctx), ctx + ".region");
            if (r.size() != 4) throw ParseError(ctx + ".region must be [row, col, height, width]");
            b.row0 = static_cast<int>(r[0]);
            b.col0 = static_cast<int>(r[1]);
            b.height = static_cast<int>(r[2]);
            b.width = static_cast<int>(r[3]);
        } else {
            with({"image", "rows", "target", "v_min", "v_max", "e"});
            Vec r = as_vec(req(j, "rows", ctx), ctx + ".rows");
            if (r.size() != 2) throw ParseError(ctx + ".rows must be [first, last]");
            b.i_min = static_cast<int>(r[0]);
            b.i_max = static_cast<int>(r[1]);
            if (j.contains("v_min")) b.v_min = as_num(j["v_min"], ctx + ".v_min");
            if (j.contains("v_max")) b.v_max = as_num(j["v_max"], ctx + ".v_max");
        }
    } else if (b.kind == "intersection") {
        with({"members"});
        const json& ms = req(j, "members", ctx);
        if (!ms.is_array() || ms.empty()) throw ParseError(ctx + ".members must be a nonempty array");
        for (std::size_t i = 0; i < ms.size(); ++i)
            b.members.push_back(parse_barrier(ms[i], ctx + ".members[" + std::to_string(i) + "]"));
    } else {
        throw ValidationError("unknown barrier kind \"" + b.kind + "\"");
    }
    if (j.contains("schedule")) b.schedule = parse_schedule(j["schedule"], ctx + ".schedule");
    if (j.contains("c")) b.margin = as_num(j["c"], ctx + ".c");
    return b;
}

OracleSpec parse_oracle(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + " must be an object");
    OracleSpec o;
    o.kind = as_str(req(j, "kind", ctx), ctx + ".kind");
    auto with = [&](std::set<std::string> keys) {
        keys.insert("kind");
        keys.insert("drift");
        keys.insert("noise");
        check_keys(j, keys, ctx);
    };
    if (o.kind == "gmm") {
        with({"means", "sds", "weights"});
        o.means = as_mat(req(j, "means", ctx), ctx + ".means");
        if (j.contains("sds")) {
            const json& s = j["sds"];
            if (s.is_number())
                o.sds = Vec::Constant(o.means.rows(), as_num(s, ctx + ".sds"));
            else
                o.sds = as_vec(s, ctx + ".sds");
        }
        if (j.contains("weights")) o.weights = as_vec(j["weights"], ctx + ".weights");
    } else if (o.kind == "dataset_file") {
        with({"path"});
        o.path = as_str(req(j, "path", ctx), ctx + ".path");
    } else if (o.kind == "lorenz_dataset") {
        with({"count", "data_seed", "sigma", "rho", "beta", "dl", "L"});
        if (j.contains("count")) o.count = as_int(j["count"], ctx + ".count");
        if (j.contains("data_seed")) o.data_seed = as_u64(j["data_seed"], ctx + ".data_seed");
        o.lorenz = parse_lorenz_params(j, ctx, LorenzParams{});
        if (j.contains("dl")) o.dl = as_num(j["dl"], ctx + ".dl");
        if (j.contains("L")) o.L = as_int(j["L"], ctx + ".L");
    } else if (o.kind == "smooth_dataset") {
        with({"count", "data_seed", "S", "action_dim", "ds", "v_lo", "v_hi"});
        if (j.contains("count")) o.count = as_int(j["count"], ctx + ".count");
        if (j.contains("data_seed")) o.data_seed = as_u64(j["data_seed"], ctx + ".data_seed");
        if (j.contains("S")) o.S = as_int(j["S"], ctx + ".S");
        if (j.contains("action_dim")) o.action_dim = as_int(j["action_dim"], ctx + ".action_dim");
        if (j.contains("ds")) o.ds = as_num(j["ds"], ctx + ".ds");
        if (j.contains("v_lo")) o.v_lo = as_num(j["v_lo"], ctx + ".v_lo");
        if (j.contains("v_hi")) o.v_hi = as_num(j["v_hi"], ctx + ".v_hi");
    } else if (o.kind == "pure_diffusion") {
        with({"dim"});
        if (j.contains("dim")) o.dim = as_int(j["dim"], ctx + ".dim");
    } else {
        throw ValidationError("unknown oracle kind \"" + o.kind + "\"");
    }
    if (j.contains("drift")) o.drift = as_str(j["drift"], ctx + ".drift");
    if (j.contains("noise")) o.noise = parse_noise(j["noise"], ctx + ".noise");
    return o;
}

void validate_oracle(const OracleSpec& o) {
    if (o.kind == "gmm") {
        if (o.means.rows() < 1) throw ValidationError("mixture needs at least one component");
        if (o.sds.size() && o.sds.size() != o.means.rows())
            throw ValidationError("mixture sds length must match component count");
        if (o.weights.size() && o.weights.size() != o.means.rows())
            throw ValidationError("mixture weights length must match component count");
        for (long i = 0; i < o.sds.size(); ++i)
            if (o.sds[i] < 0.0) throw ValidationError("mixture sds must be nonnegative");
        for (long i = 0; i < o.weights.size(); ++i)
            if (!(o.weights[i] > 0.0)) throw ValidationError("mixture weights must be positive");
    } else if (o.kind == "dataset_file") {
        if (!std::filesystem::exists(o.path))
            throw ValidationError("dataset file not found: " + o.path);
    } else if (o.kind == "lorenz_dataset") {
        if (o.count < 1) throw ValidationError("dataset count must be >= 1");
        if (o.L < 1) throw ValidationError("rollout length L must be >= 1");
        if (!(o.dl > 0.0)) throw ValidationError("rollout step dl must be positive");
    } else if (o.kind == "smooth_dataset") {
        if (o.count < 1) throw ValidationError("dataset count must be >= 1");
        if (o.S < 2) throw ValidationError("sequence length S must be >= 2");
        if (o.action_dim < 1) throw ValidationError("action_dim must be >= 1");
        if (!(o.ds > 0.0)) throw ValidationError("action spacing ds must be positive");
        if (!(o.v_lo <= o.v_hi)) throw ValidationError("v_lo must be <= v_hi");
        if (!(o.v_lo >= 0.0)) throw ValidationError("v_lo must be nonnegative");
    } else if (o.kind == "pure_diffusion") {
        if (o.dim < 1) throw ValidationError("dim must be >= 1");
    }
    if (o.drift != "beta_scaled" && o.drift != "literal")
        throw ValidationError("unknown drift form \"" + o.drift + "\"");
}

} // namespace

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n_paths < 1) throw ValidationError("n_paths must be >= 1");
    ShieldConfig sc = cfg.shield_config();
    sc.validate();
    auto ns = cfg.oracle.noise.build(cfg.T); // validates noise parameters
    (void)ns;
    validate_oracle(cfg.oracle);
    auto bar = cfg.barrier.build(); // validates barrier parameters
    auto check_override = [](const BarrierSpec& b) {
        if (b.schedule) b.schedule->build();
        if (b.margin && *b.margin < 0.0) throw ValidationError("per-barrier margin c must be nonnegative");
    };
    check_override(cfg.barrier);
    for (const auto& m : cfg.barrier.members) check_override(m);
    if (cfg.baseline_projection && !bar)
        throw ValidationError("projection baseline requires a barrier");
    if (cfg.control.size() && cfg.experiment != "kl-check")
        throw ValidationError("control is only valid for the kl-check experiment");
    if (cfg.experiment == "kl-check" && bar)
        throw ValidationError("kl-check runs are unconstrained; barrier must be \"none\"");
}

// ---------------------------------------------------------------- parse

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ParseError(origin + ": top level must be an object");
    check_keys(root,
               {"experiment", "seed", "n_paths", "T", "K", "alpha", "c", "schedule", "gamma",
                "stochastic", "solver", "oracle", "barrier", "baselines", "projection_tube",
                "output", "control"},
               "config");

    std::string experiment = "gmm";
    if (root.contains("experiment")) experiment = as_str(root["experiment"], "experiment");
    ExperimentConfig cfg = default_config(experiment);

    if (root.contains("seed")) cfg.seed = as_u64(root["seed"], "seed");
    if (root.contains("n_paths")) cfg.n_paths = as_int(root["n_paths"], "n_paths");
    if (root.contains("T")) cfg.T = as_num(root["T"], "T");
    if (root.contains("K")) cfg.K = as_int(root["K"], "K");
    if (root.contains("alpha")) cfg.alpha = as_num(root["alpha"], "alpha");
    if (root.contains("c")) cfg.c = as_num(root["c"], "c");
    if (root.contains("schedule")) cfg.schedule = parse_schedule(root["schedule"], "schedule");
    if (root.contains("gamma")) cfg.gamma = parse_gamma(root["gamma"], "gamma");
    if (root.contains("stochastic")) cfg.stochastic = as_bool(root["stochastic"], "stochastic");
    if (root.contains("solver")) cfg.solver = as_str(root["solver"], "solver");
    if (root.contains("oracle")) cfg.oracle = parse_oracle(root["oracle"], "oracle");
    if (root.contains("barrier")) {
        cfg.barrier = parse_barrier(root["barrier"], "barrier");
        // per-pixel constraints default to a tighter margin unless given explicitly
        if (!root.contains("c") &&
            (cfg.barrier.kind == "pixel_patch" || cfg.barrier.kind == "color_region"))
            cfg.c = 0.01;
    }
    if (root.contains("baselines")) {
        const json& b = root["baselines"];
        if (!b.is_object()) throw ParseError("baselines must be an object");
        check_keys(b, {"unconstrained", "projection"}, "baselines");
        cfg.baseline_unconstrained =
            b.contains("unconstrained") && as_bool(b["unconstrained"], "baselines.unconstrained");
        cfg.baseline_projection =
            b.contains("projection") && as_bool(b["projection"], "baselines.projection");
    }
    if (root.contains("projection_tube"))
        cfg.projection_tube = as_bool(root["projection_tube"], "projection_tube");
    if (root.contains("output")) cfg.output = as_str(root["output"], "output");
    if (root.contains("control")) cfg.control = as_vec(root["control"], "control");

    validate_config(cfg);
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot open config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------- serialize

namespace {

json noise_json(const NoiseSpec& n) {
    json j;
    j["kind"] = n.kind;
    if (n.kind == "vp") {
        j["beta_min"] = n.beta_min;
        j["beta_max"] = n.beta_max;
    } else if (n.kind == "ve") {
        j["g_min"] = n.g_min;
        j["ratio"] = n.ratio;
    } else if (n.kind == "constant") {
        j["g"] = n.g0;
    }
    return j;
}

json schedule_json(const ScheduleSpec& s) {
    json j;
    j["kind"] = s.kind;
    if (s.kind == "exponential") j["lambda"] = s.lambda;
    if (s.kind == "polynomial") j["power"] = s.power;
    return j;
}

json gamma_json(const GammaSpec& g) {
    json j;
    j["kind"] = g.kind;
    if (g.kind == "cap_tracking") {
        j["q"] = g.q;
        j["y0"] = g.y0;
    }
    return j;
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json barrier_json(const BarrierSpec& b) {
    json j;
    j["kind"] = b.kind;
    if (b.kind == "halfspace") {
        j["w"] = vec_json(b.w);
        j["offset"] = b.offset;
    } else if (b.kind == "ball") {
        j["center"] = vec_json(b.center);
        j["radius"] = b.radius;
    } else if (b.kind == "box") {
        j["lo"] = vec_json(b.lo);
        j["hi"] = vec_json(b.hi);
    } else if (b.kind == "physics_residual") {
        j["sigma"] = b.lorenz.sigma;
        j["rho"] = b.lorenz.rho;
        j["beta"] = b.lorenz.beta;
        j["dl"] = b.dl;
        j["L"] = b.L;
        j["e"] = b.e;
    } else if (b.kind == "smoothness") {
        j["S"] = b.S;
        j["action_dim"] = b.action_dim;
        j["ds"] = b.ds;
        j["e"] = b.e;
    } else if (b.kind == "pixel_patch") {
        j["image"] = json::array({b.img_h, b.img_w});
        j["region"] = json::array({b.row0, b.col0, b.height, b.width});
        j["target"] = json::array({b.target[0], b.target[1], b.target[2]});
        j["e"] = b.e;
    } else if (b.kind == "color_region") {
        j["image"] = json::array({b.img_h, b.img_w});
        j["rows"] = json::array({b.i_min, b.i_max});
        j["target"] = json::array({b.target[0], b.target[1], b.target[2]});
        j["v_min"] = b.v_min;
        j["v_max"] = b.v_max;
        j["e"] = b.e;
    } else if (b.kind == "intersection") {
        json ms = json::array();
        for (const auto& m : b.members) ms.push_back(barrier_json(m));
        j["members"] = ms;
    }
    if (b.schedule) j["schedule"] = schedule_json(*b.schedule);
    if (b.margin) j["c"] = *b.margin;
    return j;
}

json oracle_json(const OracleSpec& o) {
    json j;
    j["kind"] = o.kind;
    if (o.kind == "gmm") {
        json rows = json::array();
        for (long r = 0; r < o.means.rows(); ++r) {
            json row = json::array();
            for (long cidx = 0; cidx < o.means.cols(); ++cidx) row.push_back(o.means(r, cidx));
            rows.push_back(row);
        }
        j["means"] = rows;
        if (o.sds.size()) j["sds"] = vec_json(o.sds);
        if (o.weights.size()) j["weights"] = vec_json(o.weights);
    } else if (o.kind == "dataset_file") {
        j["path"] = o.path;
    } else if (o.kind == "lorenz_dataset") {
        j["count"] = o.count;
        j["data_seed"] = o.data_seed;
        j["sigma"] = o.lorenz.sigma;
        j["rho"] = o.lorenz.rho;
        j["beta"] = o.lorenz.beta;
        j["dl"] = o.dl;
        j["L"] = o.L;
    } else if (o.kind == "smooth_dataset") {
        j["count"] = o.count;
        j["data_seed"] = o.data_seed;
        j["S"] = o.S;
        j["action_dim"] = o.action_dim;
        j["ds"] = o.ds;
        j["v_lo"] = o.v_lo;
        j["v_hi"] = o.v_hi;
    } else if (o.kind == "pure_diffusion") {
        j["dim"] = o.dim;
    }
    j["drift"] = o.drift;
    j["noise"] = noise_json(o.noise);
    return j;
}

} // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["seed"] = cfg.seed;
    j["n_paths"] = cfg.n_paths;
    j["T"] = cfg.T;
    j["K"] = cfg.K;
    j["alpha"] = cfg.alpha;
    j["c"] = cfg.c;
    j["schedule"] = schedule_json(cfg.schedule);
    j["gamma"] = gamma_json(cfg.gamma);
    j["stochastic"] = cfg.stochastic;
    j["solver"] = cfg.solver;
    j["oracle"] = oracle_json(cfg.oracle);
    j["barrier"] = barrier_json(cfg.barrier);
    j["baselines"] = json{{"unconstrained", cfg.baseline_unconstrained},
                          {"projection", cfg.baseline_projection}};
    j["projection_tube"] = cfg.projection_tube;
    j["output"] = cfg.output;
    if (cfg.control.size()) j["control"] = vec_json(cfg.control);
    return j.dump(2) + "\n";
}

} // namespace shield
