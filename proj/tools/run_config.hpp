#pragma once

#include "epp/grid.hpp"
#include "epp/model.hpp"
#include "epp/short_cycle.hpp"
#include "epp/svi_mc.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace epp::cli {

/// Everything a run needs, read from a flat JSON object. Keys:
///   c0 k Y | L Ny Nz tol drift | dt T burn_in replicas seed batches cycles
///   paths step_cap threads | ybar ybar1 gamma_tol budget | f lambda
struct RunConfig {
    double c0 = 1.0, k = 1.0, Y = 1.0;
    GridConfig grid;
    SimConfig sim;
    ShortCycleOptions gamma;
    std::vector<std::string> functionals;
    std::vector<double> lambdas{1.0, 0.1, 0.01, 0.001};

    OscillatorParams params() const { return {c0, k, Y}; }
    FunctionalBox box() const { return {grid.L, Y}; }

    /// Validates every block; ValidationError names the offending key.
    void validate() const;
    nlohmann::json to_json() const;
    /// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
    std::string hash() const;
};

/// Applies the keys of a flat JSON object; unknown keys are rejected.
void apply(RunConfig& cfg, const nlohmann::json& j);
/// `key=value` override; the value is parsed as JSON when possible, else as a
/// string.
void apply_override(RunConfig& cfg, const std::string& assignment);
RunConfig load_config(const std::string& path);

std::vector<std::string> split_list(const std::string& s);
std::vector<Functional> resolve_functionals(const RunConfig& cfg, const std::vector<std::string>& names);

}  // namespace epp::cli
