#include "doctest.h"

#include "grazing/config.hpp"
#include "grazing/errors.hpp"
#include "grazing/run.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace grazing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("grazing_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string field_of(const RunConfig& cfg) {
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("configuration round trip") {
    RunConfig cfg;
    cfg.mode = Mode::couple;
    cfg.kernel.nu = 0.7;
    cfg.kernel.c_beta = 1.0 / 3.0;
    cfg.kernel.velocity = Shifted{0.25, -1.5};
    cfg.n_particles = 321;
    cfg.cutoff_k = 12.5;
    cfg.dt = 0.013;
    cfg.t_end = 0.9;
    cfg.sample_times = {0.0, 0.3, 0.9};
    cfg.seed = 0xFFFFFFFFFFFFFFFFULL;
    cfg.mirror_seed = 42;
    cfg.refresh_period = 5;
    cfg.repair_on_refresh = true;
    cfg.floor_delta = 1e-4;
    cfg.initial = GaussianMixture{{{1.0, {2, 0, 0}, 0.5}, {2.0, {-2, 0, 0}, 0.1}}};
    cfg.initial_mirror = PointCloud{{{1, 2, 3}, {0.1, 0.2, 0.3}}};
    cfg.verify.cutoffs = {2.0, 20.0};
    cfg.output = "somewhere";

    const std::string text = to_json(cfg).dump(2);
    const RunConfig back = config_from_json(nlohmann::json::parse(text));
    CHECK(to_json(back).dump(2) == text);
    CHECK(config_hash(back) == config_hash(cfg));
    CHECK(config_hash(cfg).size() == 16);

    RunConfig other = cfg;
    other.seed = 1;
    CHECK(config_hash(other) != config_hash(cfg));

    for (const VelocityVariant& v : {VelocityVariant{PowerLaw{-2.0}}, VelocityVariant{Truncated{-1.0, 2.0}}}) {
        RunConfig c;
        c.kernel.velocity = v;
        c.initial = UniformBall{{1, 1, 1}, 2.0};
        CHECK(to_json(config_from_json(to_json(c))).dump() == to_json(c).dump());
    }
}

TEST_CASE("missing keys keep defaults") {
    const RunConfig cfg = config_from_json(nlohmann::json::parse(R"({"seed": 9, "kernel": {"nu": 1.5}})"));
    CHECK(cfg.seed == 9);
    CHECK(cfg.kernel.nu == 1.5);
    CHECK(cfg.n_particles == RunConfig{}.n_particles);
    CHECK_FALSE(cfg.repair_on_refresh.has_value());
    CHECK(config_from_json(nlohmann::json::parse(R"({"repair_on_refresh": false})")).repair_on_refresh == false);
    CHECK_FALSE(config_from_json(nlohmann::json::parse(R"({"repair_on_refresh": null})")).repair_on_refresh);
}

TEST_CASE("malformed configuration names the field") {
    auto error_field = [](const char* text) {
        try {
            config_from_json(nlohmann::json::parse(text));
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string();
    };
    CHECK(error_field(R"({"sed": 1})") == "sed");
    CHECK(error_field(R"({"kernel": {"nu": "one"}})") == "kernel.nu");
    CHECK(error_field(R"({"kernel": {"phi": {"variant": "hard"}}})") == "kernel.phi.variant");
    CHECK(error_field(R"({"kernel": {"phi": {"variant": "truncated", "alpha": -1}}})") == "kernel.phi.cap");
    CHECK(error_field(R"({"n_particles": -4})") == "n_particles");
    CHECK(error_field(R"({"mode": "fly"})") == "mode");
    CHECK(error_field(R"({"initial": {"type": "gaussian", "mean": [1, 2]}})") == "initial.mean");
    CHECK(error_field(R"({"initial": {"type": "mixture", "components": [{"wait": 1}]}})") ==
          "initial.components[0].wait");
    CHECK(error_field(R"({"update_rule": "both"})") == "update_rule");
    CHECK(error_field(R"({"sample_times": [0, "x"]})") == "sample_times[1]");
}

TEST_CASE("validation names the field") {
    RunConfig ok;
    CHECK(field_of(ok) == "");
    RunConfig c = ok;
    c.kernel.nu = 2.0;
    CHECK(field_of(c) == "kernel.nu");
    c = ok;
    c.kernel.velocity = PowerLaw{0.2};
    CHECK(field_of(c) == "kernel.phi");
    c = ok;
    c.n_particles = 1;
    CHECK(field_of(c) == "n_particles");
    c = ok;
    c.mode = Mode::couple;
    c.n_particles = 5000;
    CHECK(field_of(c) == "n_particles");
    c = ok;
    c.dt = 0.1;
    c.cutoff_k = 50;
    CHECK(field_of(c) == "dt");
    c = ok;
    c.sample_times = {0.5, 0.2};
    CHECK(field_of(c) == "sample_times[1]");
    c = ok;
    c.sample_times = {2.0};
    CHECK(field_of(c) == "sample_times[0]");
    c = ok;
    c.mode = Mode::couple;
    c.update_rule = UpdateRule::symmetric;
    CHECK(field_of(c) == "update_rule");
    c = ok;
    c.initial = UniformBall{{0, 0, 0}, -1.0};
    CHECK(field_of(c) == "initial");
    c = ok;
    c.floor_delta = -1;
    CHECK(field_of(c) == "floor_delta");
    c = ok;
    c.output = "";
    CHECK(field_of(c) == "output");
}

TEST_CASE("step plan") {
    RunConfig c;
    c.t_end = 1.0;
    c.dt = 0.01;
    auto [n, h] = step_plan(c);
    CHECK(n == 100);
    CHECK(h == doctest::Approx(0.01));
    c.dt = 0.3;
    std::tie(n, h) = step_plan(c);
    CHECK(n == 4);
    CHECK(h == doctest::Approx(0.25));
    c.t_end = 0.0;
    CHECK(step_plan(c).first == 0);
}

TEST_CASE("formatting with 15 significant digits") {
    CHECK(format15(3.14159265358979323846) == "3.14159265358979");
    CHECK(format15(1e-20) == "1e-20");
    CHECK(format15(std::nan("")) == "nan");
}

TEST_CASE("verify run writes a passing report and a complete manifest") {
    RunConfig c;
    c.mode = Mode::verify;
    c.verify.samples = 8;
    c.verify.a3_pairs = 100;
    c.output = scratch("verify").string();
    const RunResult r = run(c);
    REQUIRE(r.exit_code == exit_ok);
    const std::string report = slurp(fs::path(c.output) / "report.txt");
    CHECK(report.find("identities: pass") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output) / "manifest.json"));
    CHECK(manifest["config_hash"] == config_hash(c));
    CHECK(manifest["library"]["version"] == kLibraryVersion);
    CHECK(manifest.contains("wall_time_s"));
    for (const char* k : {"kappa0", "kappa1", "kappa2_hat", "kappa3"}) CHECK(manifest["constants"].contains(k));
    fs::remove_all(c.output);
}

TEST_CASE("couple run with identical laws and seed has a zero distance column") {
    RunConfig c;
    c.mode = Mode::couple;
    c.n_particles = 100;
    c.t_end = 0.2;
    c.dt = 0.02;
    c.initial = GaussianIso{};
    c.initial_mirror = GaussianIso{};
    c.output = scratch("couple").string();
    const RunResult r = run(c);
    REQUIRE(r.exit_code == exit_ok);
    std::istringstream csv(slurp(fs::path(c.output) / "coupling.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,d,w2sq,jgamma_hat,bound");
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string t, d;
        std::getline(row, t, ',');
        std::getline(row, d, ',');
        CHECK(d == "0");
        ++rows;
    }
    CHECK(rows == 11);
    const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output) / "manifest.json"));
    CHECK(manifest["identically_coupled"] == true);
    for (const char* k : {"kappa0", "kappa1", "kappa2_hat", "kappa3", "k_hat", "floor_delta"})
        CHECK(manifest["constants"].contains(k));
    CHECK(manifest["refresh_period"] == 1);
    CHECK(manifest["repair_on_refresh"] == false);
    fs::remove_all(c.output);
}

TEST_CASE("identical configurations give byte-identical csv output") {
    RunConfig c;
    c.mode = Mode::simulate;
    c.n_particles = 150;
    c.t_end = 0.1;
    c.kernel.velocity = PowerLaw{-1.0};
    c.sample_times = {0.0, 0.05, 0.1};
    c.output = scratch("det_a").string();
    REQUIRE(run(c).exit_code == exit_ok);
    RunConfig d = c;
    d.output = scratch("det_b").string();
    setenv("GRAZING_THREADS", "3", 1);
    REQUIRE(run(d).exit_code == exit_ok);
    unsetenv("GRAZING_THREADS");
    for (const char* f : {"trajectory.csv", "moments.csv"}) {
        const std::string a = slurp(fs::path(c.output) / f), b = slurp(fs::path(d.output) / f);
        CHECK(!a.empty());
        CHECK(a == b);
    }
    std::istringstream traj(slurp(fs::path(c.output) / "trajectory.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(traj, line)) ++lines;
    CHECK(lines == 1 + 3 * 150);
    fs::remove_all(c.output);
    fs::remove_all(d.output);
}

TEST_CASE("failed runs report their exit code and leave no partial output") {
    RunConfig bad;
    bad.kernel.nu = -1;
    bad.output = scratch("bad_config").string();
    const RunResult rc = run(bad);
    CHECK(rc.exit_code == exit_config);
    CHECK(rc.message.find("kernel.nu") != std::string::npos);
    CHECK_FALSE(fs::exists(bad.output));

    RunConfig blow;
    blow.n_particles = 2;
    blow.initial = PointCloud{{{1e308, 0, 0}, {-1e308, 0, 0}}};
    blow.t_end = 0.5;
    blow.output = scratch("nan").string();
    const RunResult rn = run(blow);
    CHECK(rn.exit_code == exit_numerical);
    CHECK_FALSE(fs::exists(blow.output));

    // an existing directory survives, but the files of the failed run do not
    fs::create_directories(blow.output);
    std::ofstream(fs::path(blow.output) / "keep.txt") << "x";
    CHECK(run(blow).exit_code == exit_numerical);
    CHECK(fs::exists(fs::path(blow.output) / "keep.txt"));
    CHECK_FALSE(fs::exists(fs::path(blow.output) / "moments.csv"));
    fs::remove_all(blow.output);
}

TEST_CASE("configuration files load from disk") {
    const fs::path p = scratch("cfg.json");
    std::ofstream(p) << R"({
        // comments are accepted
        "mode": "simulate", "n_particles": 10, "kernel": {"phi": {"variant": "power_law", "gamma": -1}}
    })";
    const RunConfig c = load_config(p.string());
    CHECK(c.n_particles == 10);
    CHECK(std::get<PowerLaw>(c.kernel.velocity).gamma == -1.0);
    fs::remove(p);
    CHECK_THROWS_AS(load_config(p.string()), ConfigError);
    std::ofstream(p) << "{ not json";
    CHECK_THROWS_AS(load_config(p.string()), ConfigError);
    fs::remove(p);
}
