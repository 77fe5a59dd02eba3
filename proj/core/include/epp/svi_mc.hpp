#pragma once

#include "epp/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace epp {

enum class Regime { elastic, plastic_plus, plastic_minus };

std::string_view to_string(Regime r) noexcept;

/// State of the projected Euler scheme. `x` is the total displacement and
/// `Delta` the accumulated plastic deformation, Delta = x - z.
struct SimState {
    double y = 0.0;
    double z = 0.0;
    double x = 0.0;
    double Delta = 0.0;
    Regime regime = Regime::elastic;
    double t = 0.0;

    Region region() const noexcept;
};

/// Elastic state at (y, z); a point with z = +-Y and outward velocity starts
/// in the corresponding plastic regime.
SimState make_state(const OscillatorParams& params, double y, double z);

Regime classify(double y, double z, double Y) noexcept;

/// One Euler-Maruyama step with projection onto |z| <= Y:
///   y' = y - (c0 y + k z) dt + dW,  z' = clamp(z + y dt),  x' = x + y dt.
/// The plastic increment z + y dt - z' is added to Delta, so Delta stays
/// exactly constant on elastic steps.
SimState step(const SimState& s, const OscillatorParams& params, double dt, double dW) noexcept;

struct SimConfig {
    double dt = 1e-3;
    double T = 2e4;              // horizon per replica (time averages)
    double burn_in = 0.1;        // fraction of T discarded
    int replicas = 8;
    std::uint64_t seed = 12345;
    int batches = 40;            // batch means per replica
    long long cycles = 20000;    // cycles per replica and start point
    long long paths = 10000;     // hitting paths per replica
    long long step_cap = 100000000;
    int threads = 0;             // 0: one per replica up to the hardware count

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// Independent stream for (seed, purpose, replica).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose, int replica);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long long count = 0;      // samples, cycles or paths
    int replicas = 0;
    int batches = 0;          // total batch means (time averages)
    long long discarded = 0;  // runs cut by the step cap
};

/// Streaming accumulators of one or more replicas. Merging concatenates
/// batch means and adds sums, in call order.
struct PathStats {
    // time averages, per functional
    std::vector<double> sum;
    std::vector<std::vector<double>> batch_means;
    long long samples = 0;
    // cycles
    long long cycles = 0;
    double sum_f = 0.0, sum_f2 = 0.0, sum_d = 0.0, sum_d2 = 0.0, sum_fd = 0.0;
    // hitting
    long long hits_plus = 0;
    long long hits_minus = 0;
    long long discarded = 0;

    void add_cycle(double integral, double duration);
    void merge(const PathStats& other);
};

/// Long-run time averages (1/T_eff) sum f dt after burn-in, one path per
/// replica, stderr from batch means pooled across replicas.
std::vector<Estimate> estimate_time_averages(const std::vector<Functional>& fs, const OscillatorParams& params,
                                             const SimConfig& cfg);
Estimate estimate_time_average(const Functional& f, const OscillatorParams& params, const SimConfig& cfg);

/// Where a short cycle starts.
struct CycleStart {
    enum class Kind { top, bottom, point };
    Kind kind = Kind::top;
    double y = 0.0;
    double z = 0.0;

    static CycleStart after_plastic_plus() { return {Kind::top, 0.0, 0.0}; }
    static CycleStart after_plastic_minus() { return {Kind::bottom, 0.0, 0.0}; }
    static CycleStart at(double y, double z) { return {Kind::point, y, z}; }
};

struct CycleEstimate {
    Estimate integral;  // E int_0^theta f dt
    Estimate duration;  // E theta
    PathStats stats;
};

/// Integral of f up to the first completion of a plastic phase (the first
/// step where the previous regime was plastic+ and y' <= 0, or plastic- and
/// y' >= 0). The top start is (0, Y) in the elastic regime, the bottom start
/// its mirror. `cfg.cycles` independent cycles per replica.
CycleEstimate estimate_cycle(const Functional& f, const CycleStart& start, const OscillatorParams& params,
                             const SimConfig& cfg);
/// Same paths for every functional.
std::vector<CycleEstimate> estimate_cycles(const std::vector<Functional>& fs, const CycleStart& start,
                                           const OscillatorParams& params, const SimConfig& cfg);

struct CycleRatioEstimate {
    Estimate nu;  // (m_top(f) + m_bottom(f)) / (d_top + d_bottom), delta-method stderr
    CycleEstimate top;
    CycleEstimate bottom;
};

CycleRatioEstimate estimate_cycle_ratio(const Functional& f, const OscillatorParams& params, const SimConfig& cfg);
std::vector<CycleRatioEstimate> estimate_cycle_ratios(const std::vector<Functional>& fs,
                                                      const OscillatorParams& params, const SimConfig& cfg);

struct HittingEstimate {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double std_error = 0.0;  // binomial
    long long paths = 0;
    long long discarded = 0;
};

/// Fraction of paths from `start` whose first plastic phase is plastic+.
HittingEstimate estimate_pi(const PhasePoint& start, const OscillatorParams& params, const SimConfig& cfg);

/// Decimated CSV trajectory: t,y,z,x,Delta,regime.
void dump_trajectory(std::ostream& out, const OscillatorParams& params, const SimConfig& cfg, double y0, double z0,
                     long long steps, long long every);

}  // namespace epp
