#include "run_config.hpp"

#include "epp/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace epp::cli {

using nlohmann::json;

namespace {

template <class T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + key + "' has the wrong type");
    }
}

std::vector<std::string> string_list(const json& v, const std::string& key) {
    if (v.is_string()) return split_list(v.get<std::string>());
    if (v.is_array()) {
        std::vector<std::string> out;
        for (const auto& e : v) out.push_back(get_as<std::string>(e, key));
        return out;
    }
    throw ValidationError("config key '" + key + "' must be a string or a list of strings");
}

std::vector<double> number_list(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& e : v) out.push_back(get_as<double>(e, key));
        return out;
    }
    throw ValidationError("config key '" + key + "' must be a number or a list of numbers");
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void apply(RunConfig& c, const json& j) {
    if (!j.is_object()) throw ValidationError("config must be a flat JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        if (key == "c0") c.c0 = get_as<double>(v, key);
        else if (key == "k") c.k = get_as<double>(v, key);
        else if (key == "Y") c.Y = get_as<double>(v, key);
        else if (key == "L") c.grid.L = get_as<double>(v, key);
        else if (key == "Ny") c.grid.Ny = get_as<int>(v, key);
        else if (key == "Nz") c.grid.Nz = get_as<int>(v, key);
        else if (key == "tol") c.grid.tol = get_as<double>(v, key);
        else if (key == "drift") c.grid.drift = parse_drift_scheme(get_as<std::string>(v, key));
        else if (key == "dt") c.sim.dt = get_as<double>(v, key);
        else if (key == "T") c.sim.T = get_as<double>(v, key);
        else if (key == "burn_in") c.sim.burn_in = get_as<double>(v, key);
        else if (key == "replicas") c.sim.replicas = get_as<int>(v, key);
        else if (key == "seed") c.sim.seed = get_as<std::uint64_t>(v, key);
        else if (key == "batches") c.sim.batches = get_as<int>(v, key);
        else if (key == "cycles") c.sim.cycles = get_as<long long>(v, key);
        else if (key == "paths") c.sim.paths = get_as<long long>(v, key);
        else if (key == "step_cap") c.sim.step_cap = get_as<long long>(v, key);
        else if (key == "threads") c.sim.threads = get_as<int>(v, key);
        else if (key == "ybar") c.gamma.ybar = get_as<double>(v, key);
        else if (key == "ybar1") c.gamma.ybar1 = get_as<double>(v, key);
        else if (key == "gamma_tol") c.gamma.tol = get_as<double>(v, key);
        else if (key == "budget") c.gamma.budget = get_as<int>(v, key);
        else if (key == "f") c.functionals = string_list(v, key);
        else if (key == "lambda") c.lambdas = number_list(v, key);
        else throw ValidationError("unknown config key '" + key + "'");
    }
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json obj = json::object();
    obj[key] = value;
    cli::apply(cfg, obj);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ValidationError("config file '" + path + "' is not valid JSON");
    RunConfig c;
    cli::apply(c, j);
    return c;
}

void RunConfig::validate() const {
    auto key_error = [](const std::string& key, const std::exception& e) {
        return ValidationError("config key '" + key + "': " + e.what());
    };
    try {
        (void)params();
    } catch (const ValidationError& e) {
        throw key_error(c0 <= 0.0 ? "c0" : k <= 0.0 ? "k" : "Y", e);
    }
    if (grid.Ny < 3 || grid.Ny % 2 == 0) throw ValidationError("config key 'Ny': must be odd and >= 3");
    if (grid.Nz < 3) throw ValidationError("config key 'Nz': must be >= 3");
    if (!(grid.tol > 0.0)) throw ValidationError("config key 'tol': must be > 0");
    if (!(grid.L > 3.0 * params().sigma_y())) throw ValidationError("config key 'L': must exceed 3 sigma_y");
    if (!(sim.dt > 0.0)) throw ValidationError("config key 'dt': must be > 0");
    if (!(sim.T > 0.0)) throw ValidationError("config key 'T': must be > 0");
    if (!(sim.burn_in >= 0.0 && sim.burn_in <= 0.5)) throw ValidationError("config key 'burn_in': must lie in [0, 0.5]");
    if (sim.replicas < 1) throw ValidationError("config key 'replicas': must be >= 1");
    if (sim.batches < 20) throw ValidationError("config key 'batches': must be >= 20");
    if (sim.cycles < 1) throw ValidationError("config key 'cycles': must be >= 1");
    if (sim.paths < 1) throw ValidationError("config key 'paths': must be >= 1");
    if (sim.step_cap < 1) throw ValidationError("config key 'step_cap': must be >= 1");
    if (sim.threads < 0) throw ValidationError("config key 'threads': must be >= 0");
    if (gamma.ybar < 0.0) throw ValidationError("config key 'ybar': must be >= 0 (0 selects sigma_y)");
    if (gamma.ybar1 < 0.0) throw ValidationError("config key 'ybar1': must be >= 0 (0 selects 2 sigma_y)");
    if (!(gamma.tol > 0.0)) throw ValidationError("config key 'gamma_tol': must be > 0");
    if (gamma.budget < 1) throw ValidationError("config key 'budget': must be >= 1");
    for (double l : lambdas)
        if (!(l > 0.0)) throw ValidationError("config key 'lambda': every value must be > 0");
    const auto names = functional_names();
    for (const auto& f : functionals)
        if (std::find(names.begin(), names.end(), f) == names.end())
            throw ValidationError("config key 'f': unknown functional '" + f + "'");
}

json RunConfig::to_json() const {
    return json{{"c0", c0},
                {"k", k},
                {"Y", Y},
                {"L", grid.L},
                {"Ny", grid.Ny},
                {"Nz", grid.Nz},
                {"tol", grid.tol},
                {"drift", std::string(to_string(grid.drift))},
                {"dt", sim.dt},
                {"T", sim.T},
                {"burn_in", sim.burn_in},
                {"replicas", sim.replicas},
                {"seed", sim.seed},
                {"batches", sim.batches},
                {"cycles", sim.cycles},
                {"paths", sim.paths},
                {"step_cap", sim.step_cap},
                {"threads", sim.threads},
                {"ybar", gamma.ybar},
                {"ybar1", gamma.ybar1},
                {"gamma_tol", gamma.tol},
                {"budget", gamma.budget},
                {"f", functionals},
                {"lambda", lambdas}};
}

std::string RunConfig::hash() const {
    // threads changes scheduling only, never results
    json j = to_json();
    j.erase("threads");
    const std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<Functional> resolve_functionals(const RunConfig& cfg, const std::vector<std::string>& names) {
    std::vector<Functional> out;
    for (const auto& n : names) out.push_back(make_functional(n, cfg.box()));
    return out;
}

}  // namespace epp::cli
