#include "grazing/run.hpp"

#include "grazing/analysis.hpp"
#include "grazing/coupling.hpp"
#include "grazing/errors.hpp"

#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace grazing {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format15(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

namespace {

/// Owns the files of one run and deletes them unless the run commits.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_dir_ = true;
        }
    }
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) fs::remove(f, ec);
        if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    }

    std::ofstream open(const std::string& name) {
        const fs::path p = dir_ / name;
        files_.push_back(p);
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
        return os;
    }

    void commit() { committed_ = true; }
    const std::vector<fs::path>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
    bool created_dir_ = false;
    bool committed_ = false;
};

/// Step indices at which to record, always including step 0 when requested times are empty.
std::set<std::size_t> record_steps(const RunConfig& cfg, std::size_t steps, double h) {
    std::set<std::size_t> out;
    if (cfg.sample_times.empty()) {
        for (std::size_t s = 0; s <= steps; ++s) out.insert(s);
        return out;
    }
    for (double t : cfg.sample_times) {
        const auto s = static_cast<std::size_t>(std::llround(t / h));
        out.insert(std::min(s, steps));
    }
    return out;
}

json constants_json(const KernelConstants& c) {
    return {{"kappa0", format15(c.kappa0)},
            {"kappa1", format15(c.kappa1)},
            {"kappa2_hat", format15(c.kappa2)},
            {"kappa3", format15(c.kappa3)}};
}

void run_simulate(const RunConfig& cfg, OutputSet& out, json& manifest) {
    const Model model = make_model(cfg);
    const auto [steps, h] = step_plan(cfg);
    const auto rec = record_steps(cfg, steps, h);
    manifest["constants"] = constants_json(kappa_constants(model.angular, model.velocity, cfg.verify.a3_pairs, cfg.seed));

    std::ofstream traj;
    if (cfg.write_trajectory) {
        traj = out.open("trajectory.csv");
        write_trajectory_header(traj);
    }
    std::ofstream mom = out.open("moments.csv");
    write_moments_header(mom);

    Ensemble ens = sample_initial(cfg.initial, cfg.n_particles, cfg.seed, cfg.cutoff_k);
    check_finite(ens.velocities, 0.0);
    auto record = [&] {
        if (cfg.write_trajectory) write_trajectory(traj, ens);
        write_moments(mom, ens.time, moments(ens));
    };
    if (rec.count(0)) record();
    for (std::size_t s = 1; s <= steps; ++s) {
        ens = step(ens, model, h);
        ens.time = static_cast<double>(s) * h;  // no accumulated rounding
        if (rec.count(s)) record();
    }
    manifest["steps"] = steps;
    manifest["dt_effective"] = format15(h);
}

void run_couple(const RunConfig& cfg, OutputSet& out, json& manifest) {
    const Model model = make_model(cfg);
    const auto [steps, h] = step_plan(cfg);
    const auto rec = record_steps(cfg, steps, h);
    const KernelConstants constants = kappa_constants(model.angular, model.velocity, cfg.verify.a3_pairs, cfg.seed);

    CouplingOptions opts;
    opts.refresh_period = cfg.refresh_period;
    opts.repair_on_refresh = cfg.repair_on_refresh;
    CoupledState st = init_coupled(cfg.initial, cfg.initial_mirror, cfg.n_particles, cfg.cutoff_k, cfg.seed, opts,
                                   cfg.mirror_seed);
    const double floor =
        cfg.floor_delta > 0.0 ? cfg.floor_delta : default_floor_delta(st.primary.velocities, st.mirror.velocities);
    const double gamma = model.velocity.gamma_eff();

    std::vector<double> t, d, w2sq, jhat;
    auto record = [&] {
        const CoupledDistance cd = coupled_distance(st);
        t.push_back(st.time());
        d.push_back(cd.d);
        w2sq.push_back(cd.w2sq);
        jhat.push_back(j_gamma_hat(st.primary.velocities, st.mirror.velocities, gamma, floor).value);
    };
    if (rec.count(0)) record();
    for (std::size_t s = 1; s <= steps; ++s) {
        st = coupled_step(st, model, h);
        st.primary.time = st.mirror.time = static_cast<double>(s) * h;
        if (rec.count(s)) record();
    }

    std::ofstream csv = out.open("coupling.csv");
    write_coupling_header(csv);
    ContractionFit fit;
    if (!t.empty()) fit = contraction_fit(t, d, jhat);
    for (std::size_t r = 0; r < t.size(); ++r) write_coupling_row(csv, t[r], d[r], w2sq[r], jhat[r], fit.bound[r]);

    json c = constants_json(constants);
    c["k_hat"] = format15(fit.k_hat);
    c["floor_delta"] = format15(floor);
    manifest["constants"] = c;
    manifest["identically_coupled"] = fit.identically_coupled;
    manifest["refresh_period"] = st.refresh_period;
    manifest["repair_on_refresh"] = st.repair_on_refresh;
    manifest["gamma_eff"] = format15(gamma);
    manifest["steps"] = steps;
    manifest["dt_effective"] = format15(h);
}

void run_verify(const RunConfig& cfg, OutputSet& out, json& manifest) {
    const AngularKernel ang(cfg.kernel.nu, cfg.kernel.c_beta);
    const VelocityKernel vel(cfg.kernel.velocity);
    VerifyOptions opts;
    opts.cutoffs = cfg.verify.cutoffs;
    opts.a3_pairs = cfg.verify.a3_pairs;
    const VerificationReport rep = verify_estimates(ang, vel, cfg.verify.samples, cfg.seed, opts);
    {
        std::ofstream os = out.open("report.txt");
        write_report(os, rep);
    }
    {
        std::ofstream os = out.open("ratios.csv");
        write_ratio_csv(os, rep);
    }
    manifest["constants"] = constants_json(rep.constants);
    manifest["identities_pass"] = rep.all_identities_pass();
    json fitted = json::object();
    for (const auto& q : rep.inequalities) fitted[q.name] = format15(q.c_hat);
    manifest["fitted_constants"] = fitted;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
    RunResult result;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        validate(cfg);
        OutputSet out{fs::path(cfg.output)};
        json manifest;
        manifest["library"] = {{"name", "grazing"},
                               {"version", kLibraryVersion},
                               {"boost", std::to_string(BOOST_VERSION / 100000) + "." +
                                             std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                                             std::to_string(BOOST_VERSION % 100)}};
        manifest["mode"] = to_string(cfg.mode);
        manifest["config_hash"] = config_hash(cfg);
        manifest["config"] = to_json(cfg);
        switch (cfg.mode) {
            case Mode::simulate: run_simulate(cfg, out, manifest); break;
            case Mode::couple: run_couple(cfg, out, manifest); break;
            case Mode::verify: run_verify(cfg, out, manifest); break;
        }
        json outputs = json::array();
        for (const auto& f : out.files()) outputs.push_back(f.filename().string());
        outputs.push_back("manifest.json");
        manifest["outputs"] = outputs;
        manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        {
            std::ofstream os = out.open("manifest.json");
            os << manifest.dump(2) << '\n';
            if (!os) throw std::runtime_error("failed writing manifest.json");
        }
        out.commit();
        result.files = out.files();
        result.manifest = std::move(manifest);
    } catch (const ConfigError& e) {
        result.exit_code = exit_config;
        result.message = std::string("config error: ") + e.what();
    } catch (const NumericalError& e) {
        result.exit_code = exit_numerical;
        result.message = std::string("numerical failure: ") + e.what();
    } catch (const std::exception& e) {
        result.exit_code = exit_failure;
        result.message = std::string("error: ") + e.what();
    }
    return result;
}

}  // namespace grazing
