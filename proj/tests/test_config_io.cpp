#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <unistd.h>
#include <vector>

#include "shield/config.hpp"
#include "shield/experiments.hpp"
#include "shield/io.hpp"
#include "shield/sampler.hpp"

using namespace shield;

namespace {

std::string msg_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("shield_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

TrajectoryRecord one_guided_record(int K = 200) {
    ExperimentConfig cfg = default_config("gmm");
    cfg.n_paths = 1;
    cfg.K = K;
    SamplerSetup setup = build_setup(cfg);
    return sample_paths(setup, SampleMode::Guided, 1)[0];
}

} // namespace

TEST_CASE("experiment presets carry their canonical settings") {
    ExperimentConfig gmm = default_config("gmm");
    CHECK(gmm.T == 1.0);
    CHECK(gmm.K == 200);
    CHECK(gmm.alpha == 0.5);
    CHECK(gmm.c == 0.1);
    CHECK(gmm.n_paths == 1000);
    CHECK(gmm.schedule.kind == "linear");
    CHECK(gmm.oracle.kind == "gmm");
    CHECK(gmm.oracle.noise.kind == "vp");
    CHECK(gmm.barrier.kind == "halfspace");
    CHECK(gmm.barrier.offset == -1.5);
    CHECK(gmm.baseline_unconstrained);
    CHECK_FALSE(gmm.stochastic);

    ExperimentConfig lorenz = default_config("lorenz");
    CHECK(lorenz.K == 40000);
    CHECK(lorenz.schedule.kind == "exponential");
    CHECK(lorenz.schedule.lambda == 14.0);
    CHECK(lorenz.gamma.kind == "cap_tracking");
    CHECK(lorenz.barrier.kind == "physics_residual");
    CHECK(lorenz.oracle.kind == "lorenz_dataset");

    ExperimentConfig smooth = default_config("smooth");
    CHECK(smooth.schedule.kind == "polynomial");
    CHECK(smooth.barrier.kind == "smoothness");
    CHECK(smooth.c == 6.0);

    ExperimentConfig pixels = default_config("pixels");
    CHECK(pixels.barrier.kind == "color_region");
    CHECK(pixels.gamma.kind == "cap_tracking");
    CHECK(pixels.oracle.means.cols() == 32 * 32 * 3);

    ExperimentConfig kl = default_config("kl-check");
    CHECK(kl.stochastic);
    CHECK(kl.oracle.kind == "pure_diffusion");
    CHECK(kl.barrier.kind == "none");
    CHECK(kl.control.size() == 1);

    CHECK_THROWS_AS(default_config("nope"), ValidationError);
}

TEST_CASE("minimal configs parse onto preset defaults") {
    ExperimentConfig cfg = parse_config_text(R"({"experiment": "gmm", "seed": 9, "n_paths": 5})");
    CHECK(cfg.seed == 9);
    CHECK(cfg.n_paths == 5);
    CHECK(cfg.T == 1.0);
    CHECK(cfg.K == 200);
    CHECK(cfg.barrier.kind == "halfspace");
    CHECK(cfg.barrier.w.size() == 2);

    // empty object defaults to the gmm experiment wholesale
    ExperimentConfig empty = parse_config_text("{}");
    CHECK(empty.experiment == "gmm");
    CHECK(empty.n_paths == 1000);
}

TEST_CASE("strict parsing rejects unknown keys by name") {
    std::string m = msg_of([] { parse_config_text(R"({"experiment":"gmm","gamma_margin":0.2})"); });
    CHECK(m.find("gamma_margin") != std::string::npos);
    CHECK(m.find("config") != std::string::npos);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"gmm","gamma_margin":0.2})"), ParseError);

    m = msg_of([] {
        parse_config_text(R"({"barrier":{"kind":"halfspace","w":[1,0],"offst":0.0}})");
    });
    CHECK(m.find("offst") != std::string::npos);
    CHECK(m.find("barrier") != std::string::npos);

    m = msg_of([] { parse_config_text(R"({"oracle":{"kind":"gmm","means":[[0.0]],"sd":1}})"); });
    CHECK(m.find("sd") != std::string::npos);

    CHECK_THROWS_AS(parse_config_text(R"({"schedule":{"kind":"linear","lambda":2}})"), ParseError);
}

TEST_CASE("type and structure errors are parse errors") {
    CHECK_THROWS_AS(parse_config_text("{"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[]"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"seed": "x"})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"seed": -3})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"K": 1.5})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"stochastic": 1})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"barrier": {"w": [1,0]}})"), ParseError); // no kind
    CHECK_THROWS_AS(parse_config_text(R"({"oracle": {"kind":"gmm"}})"), ParseError); // no means
    CHECK_THROWS_AS(parse_config_text(R"({"baselines": true})"), ParseError);
}

TEST_CASE("numeric invariants are validation errors") {
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"gmm","alpha":300})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"gmm","K":0})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"gmm","c":-0.5})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"gmm","T":0})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"gmm","n_paths":0})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"qp-check","solver":"magic"})"),
                    ValidationError);
    // cap-tracking gamma needs the exponential tube
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"gmm","gamma":{"kind":"cap_tracking"}})"),
                    ValidationError);
    // forced control is a kl-check-only feature
    CHECK_THROWS_AS(parse_config_text(R"({"experiment":"gmm","control":[1.0]})"), ValidationError);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"experiment":"kl-check","barrier":{"kind":"halfspace","w":[1],"offset":0}})"),
        ValidationError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"experiment":"kl-check","baselines":{"projection":true}})"),
        ValidationError);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"experiment":"gmm","oracle":{"kind":"dataset_file","path":"/no/such/file.csv"}})"),
        ValidationError);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"experiment":"gmm","barrier":{"kind":"halfspace","w":[1,0],"c":-1.0}})"),
        ValidationError);
    // intersections must stay flat and concrete
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"experiment":"gmm","barrier":{"kind":"intersection","members":[{"kind":"none"}]}})"),
        ValidationError);
}

TEST_CASE("serialization round-trips every preset byte for byte") {
    for (const char* name : {"gmm", "lorenz", "smooth", "pixels", "kl-check", "qp-check"}) {
        ExperimentConfig cfg = default_config(name);
        std::string s1 = serialize_config(cfg);
        ExperimentConfig cfg2 = parse_config_text(s1);
        std::string s2 = serialize_config(cfg2);
        INFO("preset ", name);
        CHECK(s1 == s2);
        CHECK(!s1.empty());
        CHECK(s1.back() == '\n');
    }
}

TEST_CASE("custom configs survive a parse/serialize cycle") {
    const std::string text = R"({
        "experiment": "gmm",
        "seed": 42,
        "n_paths": 7,
        "K": 50,
        "stochastic": true,
        "solver": "dual_ascent",
        "schedule": {"kind": "exponential", "lambda": 3.5},
        "oracle": {
            "kind": "gmm",
            "means": [[0.25, -1.0], [2.0, 0.125]],
            "sds": [0.5, 0.25],
            "weights": [0.75, 0.25],
            "drift": "literal",
            "noise": {"kind": "ve", "g_min": 0.02, "ratio": 50.0}
        },
        "barrier": {
            "kind": "intersection",
            "members": [
                {"kind": "halfspace", "w": [1.0, 0.0], "offset": -1.5},
                {"kind": "ball", "center": [0.0, 0.0], "radius": 4.0,
                 "schedule": {"kind": "polynomial", "power": 2.0}, "c": 0.3}
            ]
        },
        "baselines": {"unconstrained": true, "projection": true},
        "projection_tube": true,
        "output": "custom_out"
    })";
    ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.solver == "dual_ascent");
    CHECK(cfg.oracle.drift == "literal");
    CHECK(cfg.oracle.noise.kind == "ve");
    CHECK(cfg.barrier.members.size() == 2);
    CHECK(cfg.baseline_projection);
    CHECK(cfg.projection_tube);

    std::string s1 = serialize_config(cfg);
    std::string s2 = serialize_config(parse_config_text(s1));
    CHECK(s1 == s2);

    // per-member overrides expand to one schedule/margin per row
    SamplerSetup setup = build_setup(cfg);
    REQUIRE(setup.barrier != nullptr);
    CHECK(setup.barrier->rows() == 2);
    REQUIRE(setup.row_schedules.size() == 2);
    CHECK(setup.row_schedules[0].kind() == ScheduleKind::Exponential); // global default
    CHECK(setup.row_schedules[1].kind() == ScheduleKind::Polynomial);  // member override
    REQUIRE(setup.row_margins.size() == 2);
    CHECK(setup.row_margins[0] == 0.1);
    CHECK(setup.row_margins[1] == 0.3);
}

TEST_CASE("config files parse from disk and missing files fail loudly") {
    TempDir tmp;
    const std::string path = tmp.file("cfg.json");
    std::ofstream(path) << R"({"experiment": "gmm", "n_paths": 3})";
    ExperimentConfig cfg = parse_config(path);
    CHECK(cfg.n_paths == 3);
    CHECK_THROWS_AS(parse_config(tmp.file("missing.json")), IOError);
}

TEST_CASE("shortest-roundtrip double formatting") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(10.0) == "10");
    CHECK(format_double(-17.0) == "-17");
    CHECK(format_double(0.25) == "0.25");
    CHECK(format_double(-0.5) == "-0.5");
    CHECK(format_double(0.1) == "0.1");

    const std::vector<double> tricky = {0.1,   1.0 / 3.0, 6.322999387e-4, 1e-308, 5e-324,
                                        -0.0,  1e16,      12345678901234.5, 1e300, 0.505,
                                        M_PI,  -2.2250738585072014e-308};
    for (double v : tricky) {
        std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(std::signbit(std::strtod(format_double(-0.0).c_str(), nullptr)));
}

TEST_CASE("trajectory csv shape, determinism and round-trip") {
    TrajectoryRecord rec = one_guided_record(200);
    std::string text = trajectory_csv_text(rec);
    CHECK(text.rfind("k,t,h,h_tilde,epsilon,u_norm_sq,g,qp_status\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 202); // header + 201 states

    // an independent rerun reproduces the bytes exactly
    TrajectoryRecord again = one_guided_record(200);
    CHECK(trajectory_csv_text(again) == text);

    TempDir tmp;
    write_trajectory_csv(rec, tmp.file("path.csv"));
    CsvTable table = read_trajectory_csv(tmp.file("path.csv"));
    REQUIRE(table.columns.size() == 8);
    CHECK(table.columns[3] == "h_tilde");
    REQUIRE(table.numeric.size() == 201);
    REQUIRE(table.qp_status.size() == 201);

    // k runs K..0 and every parsed h_tilde is bit-identical to the log
    double min_ht = table.numeric[0][3];
    for (std::size_t i = 0; i < table.numeric.size(); ++i) {
        CHECK(table.numeric[i][0] == 200.0 - static_cast<double>(i));
        CHECK(table.numeric[i][3] == rec.steps[i].h_tilde);
        min_ht = std::min(min_ht, table.numeric[i][3]);
    }
    CHECK(min_ht == rec.min_h_tilde);
    for (const std::string& status : table.qp_status)
        CHECK((status == "none" || status == "closed" || status == "dual"));

    // malformed numeric fields are rejected
    std::ofstream(tmp.file("bad.csv")) << "k,t,h,h_tilde,epsilon,u_norm_sq,g,qp_status\n"
                                          "1,0.5,zap,0,0,0,1,none\n";
    CHECK_THROWS_AS(read_trajectory_csv(tmp.file("bad.csv")), ParseError);
    CHECK_THROWS_AS(read_trajectory_csv(tmp.file("absent.csv")), IOError);
}

TEST_CASE("summary json uses fixed keys in a fixed order") {
    RunSummary s;
    s.min_h_tilde = 0.25;
    s.final_h = -0.5;
    s.total_energy = 1.5;
    s.kl_estimate = 0.125;
    s.kl_stderr = 0.0;
    s.violations = 3;
    s.energy_first_half_fraction = 0.75;
    s.wall_ms = 42;
    CHECK(summary_json_text(s) == "{\n"
                                  "  \"min_h_tilde\": 0.25,\n"
                                  "  \"final_h\": -0.5,\n"
                                  "  \"total_energy\": 1.5,\n"
                                  "  \"kl_estimate\": 0.125,\n"
                                  "  \"kl_stderr\": 0,\n"
                                  "  \"violations\": 3,\n"
                                  "  \"energy_first_half_fraction\": 0.75,\n"
                                  "  \"wall_ms\": 42\n"
                                  "}\n");

    TempDir tmp;
    write_summary_json(s, tmp.file("summary.json"));
    std::ifstream f(tmp.file("summary.json"));
    std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(body == summary_json_text(s));
}

TEST_CASE("profile csv lists one control step per line") {
    ExperimentConfig cfg = default_config("gmm");
    cfg.n_paths = 2;
    cfg.K = 10;
    SamplerSetup setup = build_setup(cfg);
    auto records = sample_paths(setup, SampleMode::Guided, 2);
    EnergyProfile prof = energy_profile(records);

    TempDir tmp;
    write_profile_csv(records, prof, tmp.file("profile.csv"));
    std::ifstream f(tmp.file("profile.csv"));
    std::string header;
    std::getline(f, header);
    CHECK(header == "k,t,mean_u_norm_sq");
    int lines = 0;
    std::string line;
    while (std::getline(f, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 10);
}

TEST_CASE("dataset csv round-trips rollout data bitwise") {
    Mat data = lorenz_dataset(3, 5, 0.01, 9);
    TempDir tmp;
    write_dataset_csv(data, tmp.file("data.csv"));

    std::ifstream f(tmp.file("data.csv"));
    std::string header;
    std::getline(f, header);
    CHECK(header.rfind("z0_x,z0_y,z0_z,z1_x", 0) == 0);

    Mat back = load_dataset_csv(tmp.file("data.csv"));
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 18);
    CHECK((back.array() == data.array()).all());

    // header-less numeric files load too
    std::ofstream(tmp.file("plain.csv")) << "1.5,2.5\n-0.25,0.75\n";
    Mat plain = load_dataset_csv(tmp.file("plain.csv"));
    CHECK(plain.rows() == 2);
    CHECK(plain(1, 0) == -0.25);

    CHECK_THROWS_AS(load_dataset_csv(tmp.file("nope.csv")), IOError);
    std::ofstream(tmp.file("ragged.csv")) << "1,2\n3\n";
    CHECK_THROWS_AS(load_dataset_csv(tmp.file("ragged.csv")), ParseError);
}

TEST_CASE("directories are created recursively") {
    TempDir tmp;
    const std::string nested = tmp.file("a/b/c");
    ensure_dir(nested);
    CHECK(std::filesystem::is_directory(nested));
    ensure_dir(nested); // idempotent
}

TEST_CASE("run summaries aggregate the audit and divergence reports") {
    ExperimentConfig cfg = default_config("gmm");
    cfg.n_paths = 6;
    cfg.K = 50;
    SamplerSetup setup = build_setup(cfg);
    RunArtifacts art = run_mode(setup, SampleMode::Guided, 6, 2);
    CHECK(art.summary.violations == art.audit.violations);
    CHECK(art.summary.min_h_tilde == art.audit.worst_min_h_tilde);
    CHECK(art.summary.final_h == art.audit.worst_final_h);
    CHECK(art.summary.kl_estimate == art.kl.estimate);
    double energy = 0.0;
    for (const auto& rec : art.records) energy += rec.total_energy;
    CHECK(art.summary.total_energy == doctest::Approx(energy / 6.0).epsilon(1e-15));

    TempDir tmp;
    write_run(art, tmp.file("guided"));
    CHECK(std::filesystem::exists(tmp.file("guided/path_000.csv")));
    CHECK(std::filesystem::exists(tmp.file("guided/path_005.csv")));
    CHECK_FALSE(std::filesystem::exists(tmp.file("guided/path_006.csv")));
    CHECK(std::filesystem::exists(tmp.file("guided/profile.csv")));
    CHECK(std::filesystem::exists(tmp.file("guided/summary.json")));
}
