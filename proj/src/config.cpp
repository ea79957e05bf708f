#include "grazing/config.hpp"

#include "grazing/errors.hpp"
#include "grazing/transport.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace grazing {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

void require_object(const json& j, const std::string& field) {
    if (!j.is_object()) throw ConfigError(field, "expected an object");
}

void reject_unknown(const json& j, const std::string& field, std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw ConfigError(field.empty() ? item.key() : field + "." + item.key(), "unknown key");
}

std::string join(const std::string& field, const std::string& key) { return field.empty() ? key : field + "." + key; }

double get_double(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    return j.get<double>();
}

std::uint64_t get_uint(const json& j, const std::string& field) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        if (j.get<std::int64_t>() < 0) throw ConfigError(field, "must be nonnegative");
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    throw ConfigError(field, "expected a nonnegative integer");
}

bool get_bool(const json& j, const std::string& field) {
    if (!j.is_boolean()) throw ConfigError(field, "expected true or false");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field, "expected a string");
    return j.get<std::string>();
}

Vec3 get_vec(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(field, "expected an array of 3 numbers");
    return {get_double(j[0], field + "[0]"), get_double(j[1], field + "[1]"), get_double(j[2], field + "[2]")};
}

template <class F>
void if_present(const json& j, const char* key, F&& f) {
    if (auto it = j.find(key); it != j.end()) f(*it);
}

json velocity_json(const VelocityVariant& v) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PowerLaw>) return {{"variant", "power_law"}, {"gamma", p.gamma}};
            else if constexpr (std::is_same_v<T, Truncated>)
                return {{"variant", "truncated"}, {"alpha", p.alpha}, {"cap", p.cap}};
            else return {{"variant", "shifted"}, {"epsilon", p.epsilon}, {"alpha", p.alpha}};
        },
        v);
}

VelocityVariant velocity_from_json(const json& j, const std::string& field) {
    require_object(j, field);
    if (!j.contains("variant")) throw ConfigError(field + ".variant", "missing");
    const std::string name = get_string(j["variant"], field + ".variant");
    auto num = [&](const char* key) {
        if (!j.contains(key)) throw ConfigError(join(field, key), "missing");
        return get_double(j[key], join(field, key));
    };
    if (name == "power_law") {
        reject_unknown(j, field, {"variant", "gamma"});
        return PowerLaw{num("gamma")};
    }
    if (name == "truncated") {
        reject_unknown(j, field, {"variant", "alpha", "cap"});
        return Truncated{num("alpha"), num("cap")};
    }
    if (name == "shifted") {
        reject_unknown(j, field, {"variant", "epsilon", "alpha"});
        return Shifted{num("epsilon"), num("alpha")};
    }
    throw ConfigError(field + ".variant", "expected power_law, truncated or shifted, got '" + name + "'");
}

json law_json(const InitialLaw& law) {
    return std::visit(
        [](const auto& l) -> json {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, GaussianIso>)
                return {{"type", "gaussian"}, {"mean", vec_json(l.mean)}, {"temperature", l.temperature}};
            else if constexpr (std::is_same_v<T, GaussianMixture>) {
                json comps = json::array();
                for (const auto& c : l.components)
                    comps.push_back({{"weight", c.weight}, {"mean", vec_json(c.mean)}, {"temperature", c.temperature}});
                return {{"type", "mixture"}, {"components", comps}};
            } else if constexpr (std::is_same_v<T, UniformBall>)
                return {{"type", "uniform_ball"}, {"center", vec_json(l.center)}, {"radius", l.radius}};
            else {
                json pts = json::array();
                for (const auto& v : l.velocities) pts.push_back(vec_json(v));
                return {{"type", "point_cloud"}, {"velocities", pts}};
            }
        },
        law);
}

InitialLaw law_from_json(const json& j, const std::string& field) {
    require_object(j, field);
    if (!j.contains("type")) throw ConfigError(field + ".type", "missing");
    const std::string type = get_string(j["type"], field + ".type");
    if (type == "gaussian") {
        reject_unknown(j, field, {"type", "mean", "temperature"});
        GaussianIso g;
        if_present(j, "mean", [&](const json& x) { g.mean = get_vec(x, field + ".mean"); });
        if_present(j, "temperature", [&](const json& x) { g.temperature = get_double(x, field + ".temperature"); });
        return g;
    }
    if (type == "mixture") {
        reject_unknown(j, field, {"type", "components"});
        GaussianMixture m;
        const std::string cf = field + ".components";
        if (!j.contains("components") || !j["components"].is_array()) throw ConfigError(cf, "expected an array");
        for (std::size_t i = 0; i < j["components"].size(); ++i) {
            const json& c = j["components"][i];
            const std::string f = cf + "[" + std::to_string(i) + "]";
            require_object(c, f);
            reject_unknown(c, f, {"weight", "mean", "temperature"});
            GaussianComponent comp;
            if_present(c, "weight", [&](const json& x) { comp.weight = get_double(x, f + ".weight"); });
            if_present(c, "mean", [&](const json& x) { comp.mean = get_vec(x, f + ".mean"); });
            if_present(c, "temperature", [&](const json& x) { comp.temperature = get_double(x, f + ".temperature"); });
            m.components.push_back(comp);
        }
        return m;
    }
    if (type == "uniform_ball") {
        reject_unknown(j, field, {"type", "center", "radius"});
        UniformBall b;
        if_present(j, "center", [&](const json& x) { b.center = get_vec(x, field + ".center"); });
        if_present(j, "radius", [&](const json& x) { b.radius = get_double(x, field + ".radius"); });
        return b;
    }
    if (type == "point_cloud") {
        reject_unknown(j, field, {"type", "velocities"});
        PointCloud p;
        const std::string vf = field + ".velocities";
        if (!j.contains("velocities") || !j["velocities"].is_array()) throw ConfigError(vf, "expected an array");
        for (std::size_t i = 0; i < j["velocities"].size(); ++i)
            p.velocities.push_back(get_vec(j["velocities"][i], vf + "[" + std::to_string(i) + "]"));
        return p;
    }
    throw ConfigError(field + ".type", "expected gaussian, mixture, uniform_ball or point_cloud, got '" + type + "'");
}

void check_finite_field(double x, const std::string& field) {
    if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
}

}  // namespace

std::string to_string(Mode m) {
    switch (m) {
        case Mode::simulate: return "simulate";
        case Mode::couple: return "couple";
        case Mode::verify: return "verify";
    }
    return "simulate";
}

Mode mode_from_string(const std::string& s) {
    if (s == "simulate") return Mode::simulate;
    if (s == "couple") return Mode::couple;
    if (s == "verify") return Mode::verify;
    throw ConfigError("mode", "expected simulate, couple or verify, got '" + s + "'");
}

json to_json(const RunConfig& cfg) {
    json j;
    j["mode"] = to_string(cfg.mode);
    j["kernel"] = {{"nu", cfg.kernel.nu}, {"c", cfg.kernel.c_beta}, {"phi", velocity_json(cfg.kernel.velocity)}};
    j["n_particles"] = cfg.n_particles;
    j["cutoff_k"] = cfg.cutoff_k;
    j["dt"] = cfg.dt;
    j["t_end"] = cfg.t_end;
    j["sample_times"] = cfg.sample_times;
    j["seed"] = cfg.seed;
    j["mirror_seed"] = cfg.mirror_seed ? json(*cfg.mirror_seed) : json(nullptr);
    j["refresh_period"] = cfg.refresh_period;
    j["repair_on_refresh"] = cfg.repair_on_refresh ? json(*cfg.repair_on_refresh) : json(nullptr);
    j["update_rule"] = cfg.update_rule == UpdateRule::one_sided ? "one_sided" : "symmetric";
    j["floor_delta"] = cfg.floor_delta;
    j["write_trajectory"] = cfg.write_trajectory;
    j["initial"] = law_json(cfg.initial);
    j["initial_mirror"] = law_json(cfg.initial_mirror);
    j["verify"] = {{"samples", cfg.verify.samples}, {"cutoffs", cfg.verify.cutoffs}, {"a3_pairs", cfg.verify.a3_pairs}};
    j["output"] = cfg.output;
    return j;
}

RunConfig config_from_json(const json& j) {
    require_object(j, "<root>");
    reject_unknown(j, "",
                   {"mode", "kernel", "n_particles", "cutoff_k", "dt", "t_end", "sample_times", "seed", "mirror_seed",
                    "refresh_period", "repair_on_refresh", "update_rule", "floor_delta", "write_trajectory", "initial",
                    "initial_mirror", "verify", "output"});
    RunConfig cfg;
    if_present(j, "mode", [&](const json& x) { cfg.mode = mode_from_string(get_string(x, "mode")); });
    if_present(j, "kernel", [&](const json& k) {
        require_object(k, "kernel");
        reject_unknown(k, "kernel", {"nu", "c", "phi"});
        if_present(k, "nu", [&](const json& x) { cfg.kernel.nu = get_double(x, "kernel.nu"); });
        if_present(k, "c", [&](const json& x) { cfg.kernel.c_beta = get_double(x, "kernel.c"); });
        if_present(k, "phi", [&](const json& x) { cfg.kernel.velocity = velocity_from_json(x, "kernel.phi"); });
    });
    if_present(j, "n_particles", [&](const json& x) { cfg.n_particles = get_uint(x, "n_particles"); });
    if_present(j, "cutoff_k", [&](const json& x) { cfg.cutoff_k = get_double(x, "cutoff_k"); });
    if_present(j, "dt", [&](const json& x) { cfg.dt = get_double(x, "dt"); });
    if_present(j, "t_end", [&](const json& x) { cfg.t_end = get_double(x, "t_end"); });
    if_present(j, "sample_times", [&](const json& x) {
        if (!x.is_array()) throw ConfigError("sample_times", "expected an array");
        cfg.sample_times.clear();
        for (std::size_t i = 0; i < x.size(); ++i)
            cfg.sample_times.push_back(get_double(x[i], "sample_times[" + std::to_string(i) + "]"));
    });
    if_present(j, "seed", [&](const json& x) { cfg.seed = get_uint(x, "seed"); });
    if_present(j, "mirror_seed", [&](const json& x) {
        if (x.is_null()) cfg.mirror_seed.reset();
        else cfg.mirror_seed = get_uint(x, "mirror_seed");
    });
    if_present(j, "refresh_period", [&](const json& x) { cfg.refresh_period = get_uint(x, "refresh_period"); });
    if_present(j, "repair_on_refresh", [&](const json& x) {
        if (x.is_null()) cfg.repair_on_refresh.reset();
        else cfg.repair_on_refresh = get_bool(x, "repair_on_refresh");
    });
    if_present(j, "update_rule", [&](const json& x) {
        const std::string r = get_string(x, "update_rule");
        if (r == "one_sided") cfg.update_rule = UpdateRule::one_sided;
        else if (r == "symmetric") cfg.update_rule = UpdateRule::symmetric;
        else throw ConfigError("update_rule", "expected one_sided or symmetric, got '" + r + "'");
    });
    if_present(j, "floor_delta", [&](const json& x) { cfg.floor_delta = get_double(x, "floor_delta"); });
    if_present(j, "write_trajectory", [&](const json& x) { cfg.write_trajectory = get_bool(x, "write_trajectory"); });
    if_present(j, "initial", [&](const json& x) { cfg.initial = law_from_json(x, "initial"); });
    if_present(j, "initial_mirror", [&](const json& x) { cfg.initial_mirror = law_from_json(x, "initial_mirror"); });
    if_present(j, "verify", [&](const json& v) {
        require_object(v, "verify");
        reject_unknown(v, "verify", {"samples", "cutoffs", "a3_pairs"});
        if_present(v, "samples", [&](const json& x) { cfg.verify.samples = get_uint(x, "verify.samples"); });
        if_present(v, "a3_pairs", [&](const json& x) { cfg.verify.a3_pairs = get_uint(x, "verify.a3_pairs"); });
        if_present(v, "cutoffs", [&](const json& x) {
            if (!x.is_array()) throw ConfigError("verify.cutoffs", "expected an array");
            cfg.verify.cutoffs.clear();
            for (std::size_t i = 0; i < x.size(); ++i)
                cfg.verify.cutoffs.push_back(get_double(x[i], "verify.cutoffs[" + std::to_string(i) + "]"));
        });
    });
    if_present(j, "output", [&](const json& x) { cfg.output = get_string(x, "output"); });
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("parse error: ") + e.what());
    }
    return config_from_json(j);
}

void validate(const RunConfig& cfg) {
    if (!(cfg.kernel.nu > 0.0 && cfg.kernel.nu < 2.0)) throw ConfigError("kernel.nu", "must lie in (0, 2)");
    if (!(cfg.kernel.c_beta > 0.0) || !std::isfinite(cfg.kernel.c_beta))
        throw ConfigError("kernel.c", "must be positive and finite");
    try {
        VelocityKernel vel(cfg.kernel.velocity);
    } catch (const DomainError& e) {
        throw ConfigError("kernel.phi", e.what());
    }
    if (cfg.n_particles < 2) throw ConfigError("n_particles", "must be at least 2");
    if (cfg.mode == Mode::couple && cfg.n_particles > kDefaultSolverCap)
        throw ConfigError("n_particles", "exceeds the transport solver cap of " + std::to_string(kDefaultSolverCap));
    check_finite_field(cfg.cutoff_k, "cutoff_k");
    if (cfg.cutoff_k < 0.0) throw ConfigError("cutoff_k", "must be nonnegative");
    check_finite_field(cfg.dt, "dt");
    if (!(cfg.dt > 0.0)) throw ConfigError("dt", "must be positive");
    if (2.0 * std::numbers::pi * cfg.cutoff_k * cfg.dt > 10.0)
        throw ConfigError("dt", "2 pi cutoff_k dt must not exceed 10");
    check_finite_field(cfg.t_end, "t_end");
    if (cfg.t_end < 0.0) throw ConfigError("t_end", "must be nonnegative");
    for (std::size_t i = 0; i < cfg.sample_times.size(); ++i) {
        const std::string f = "sample_times[" + std::to_string(i) + "]";
        const double t = cfg.sample_times[i];
        if (!(t >= 0.0 && t <= cfg.t_end)) throw ConfigError(f, "must lie in [0, t_end]");
        if (i > 0 && !(t > cfg.sample_times[i - 1])) throw ConfigError(f, "sample times must be strictly increasing");
    }
    if (cfg.mode == Mode::couple && cfg.update_rule != UpdateRule::one_sided)
        throw ConfigError("update_rule", "coupled runs support only one_sided");
    check_finite_field(cfg.floor_delta, "floor_delta");
    if (cfg.floor_delta < 0.0) throw ConfigError("floor_delta", "must be nonnegative (0 selects the default)");
    try {
        validate(cfg.initial);
    } catch (const DomainError& e) {
        throw ConfigError("initial", e.what());
    }
    try {
        validate(cfg.initial_mirror);
    } catch (const DomainError& e) {
        throw ConfigError("initial_mirror", e.what());
    }
    if (cfg.verify.samples == 0) throw ConfigError("verify.samples", "must be positive");
    if (cfg.verify.a3_pairs == 0) throw ConfigError("verify.a3_pairs", "must be positive");
    for (std::size_t i = 0; i < cfg.verify.cutoffs.size(); ++i)
        if (!(cfg.verify.cutoffs[i] > 0.0) || !std::isfinite(cfg.verify.cutoffs[i]))
            throw ConfigError("verify.cutoffs[" + std::to_string(i) + "]", "must be positive and finite");
    if (cfg.output.empty()) throw ConfigError("output", "must not be empty");
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Model make_model(const RunConfig& cfg) {
    return Model{AngularKernel(cfg.kernel.nu, cfg.kernel.c_beta), VelocityKernel(cfg.kernel.velocity), cfg.update_rule};
}

std::pair<std::size_t, double> step_plan(const RunConfig& cfg) {
    if (cfg.t_end == 0.0) return {0, cfg.dt};
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt * (1.0 - 1e-12)));
    const std::size_t n = steps == 0 ? 1 : steps;
    return {n, cfg.t_end / static_cast<double>(n)};
}

}  // namespace grazing
