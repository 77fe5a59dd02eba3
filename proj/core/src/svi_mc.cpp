#include "epp/svi_mc.hpp"

#include "epp/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>
#include <thread>

namespace epp {

namespace {

enum Purpose : std::uint64_t { time_average = 1, cycle_top = 2, cycle_bottom = 3, cycle_point = 4, hitting = 5, trajectory = 6 };

// Runs fn(replica) for every replica on a small thread pool; results are
// stored by replica index so the merge order never depends on scheduling.
template <class Fn>
auto run_replicas(const SimConfig& cfg, Fn fn) {
    std::vector<decltype(fn(0))> out(static_cast<std::size_t>(cfg.replicas));
    int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.replicas);
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    auto work = [&](int w) {
        try {
            for (int r = next++; r < cfg.replicas; r = next++) out[static_cast<std::size_t>(r)] = fn(r);
        } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

PathStats merge_all(const std::vector<PathStats>& parts) {
    PathStats total;
    for (const auto& p : parts) total.merge(p);
    return total;
}

bool completes(Regime before, double y_after) noexcept {
    return (before == Regime::plastic_plus && y_after <= 0.0) || (before == Regime::plastic_minus && y_after >= 0.0);
}

Estimate cycle_mean(const PathStats& s, double sum, double sum2, int replicas) {
    Estimate e;
    e.count = s.cycles;
    e.replicas = replicas;
    e.discarded = s.discarded;
    if (s.cycles == 0) return e;
    const double n = static_cast<double>(s.cycles);
    e.value = sum / n;
    const double var = s.cycles > 1 ? std::max(0.0, (sum2 - n * e.value * e.value) / (n - 1.0)) : 0.0;
    e.std_error = std::sqrt(var / n);
    return e;
}

}  // namespace

std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::elastic: return "elastic";
        case Regime::plastic_plus: return "plastic+";
        case Regime::plastic_minus: return "plastic-";
    }
    return "?";
}

Region SimState::region() const noexcept {
    switch (regime) {
        case Regime::plastic_plus: return Region::plus_ray;
        case Regime::plastic_minus: return Region::minus_ray;
        case Regime::elastic: break;
    }
    return Region::interior;
}

Regime classify(double y, double z, double Y) noexcept {
    if (z >= Y && y > 0.0) return Regime::plastic_plus;
    if (z <= -Y && y < 0.0) return Regime::plastic_minus;
    return Regime::elastic;
}

SimState make_state(const OscillatorParams& params, double y, double z) {
    if (!std::isfinite(y) || !(std::abs(z) <= params.Y())) throw ValidationError("start state needs finite y and |z| <= Y");
    SimState s;
    s.y = y;
    s.z = z;
    s.x = z;
    s.regime = classify(y, z, params.Y());
    return s;
}

SimState step(const SimState& s, const OscillatorParams& params, double dt, double dW) noexcept {
    const double Y = params.Y();
    SimState n;
    n.y = s.y - (params.c0() * s.y + params.k() * s.z) * dt + dW;
    const double free_z = s.z + s.y * dt;
    n.z = std::clamp(free_z, -Y, Y);
    n.x = s.x + s.y * dt;
    n.Delta = s.Delta + (free_z - n.z);
    n.regime = classify(n.y, n.z, Y);
    n.t = s.t + dt;
    return n;
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("sim.dt must be > 0");
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("sim.T must be > 0");
    if (!(burn_in >= 0.0 && burn_in <= 0.5)) throw ValidationError("sim.burn_in must lie in [0, 0.5]");
    if (replicas < 1) throw ValidationError("sim.replicas must be >= 1");
    if (batches < 1) throw ValidationError("sim.batches must be >= 1");
    if (cycles < 1) throw ValidationError("sim.cycles must be >= 1");
    if (paths < 1) throw ValidationError("sim.paths must be >= 1");
    if (step_cap < 1) throw ValidationError("sim.step_cap must be >= 1");
    if (threads < 0) throw ValidationError("sim.threads must be >= 0");
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose, int replica) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(replica)};
    return std::mt19937_64(seq);
}

void PathStats::add_cycle(double integral, double duration) {
    ++cycles;
    sum_f += integral;
    sum_f2 += integral * integral;
    sum_d += duration;
    sum_d2 += duration * duration;
    sum_fd += integral * duration;
}

void PathStats::merge(const PathStats& o) {
    if (sum.size() < o.sum.size()) {
        sum.resize(o.sum.size(), 0.0);
        batch_means.resize(o.batch_means.size());
    }
    for (std::size_t k = 0; k < o.sum.size(); ++k) {
        sum[k] += o.sum[k];
        batch_means[k].insert(batch_means[k].end(), o.batch_means[k].begin(), o.batch_means[k].end());
    }
    samples += o.samples;
    cycles += o.cycles;
    sum_f += o.sum_f;
    sum_f2 += o.sum_f2;
    sum_d += o.sum_d;
    sum_d2 += o.sum_d2;
    sum_fd += o.sum_fd;
    hits_plus += o.hits_plus;
    hits_minus += o.hits_minus;
    discarded += o.discarded;
}

std::vector<Estimate> estimate_time_averages(const std::vector<Functional>& fs, const OscillatorParams& params,
                                             const SimConfig& cfg) {
    cfg.validate();
    if (cfg.batches < 20) throw ValidationError("sim.batches must be >= 20 for batch-means errors");
    const auto total = static_cast<long long>(std::llround(cfg.T / cfg.dt));
    const auto burn = static_cast<long long>(std::llround(cfg.burn_in * static_cast<double>(total)));
    const long long per_batch = (total - burn) / cfg.batches;
    // A batch must span several relaxation times for the batch means to be
    // roughly independent.
    const double relax = std::max(1.0 / params.c0(), 1.0 / std::sqrt(params.k()));
    if (static_cast<double>(per_batch) * cfg.dt < 10.0 * relax)
        throw ValidationError("sim.T too short: each of the " + std::to_string(cfg.batches) +
                              " batches must cover at least 10 relaxation times");
    const std::size_t nf = fs.size();

    auto parts = run_replicas(cfg, [&](int r) {
        auto rng = make_stream(cfg.seed, Purpose::time_average, r);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double sq = std::sqrt(cfg.dt);
        SimState s = make_state(params, 0.0, 0.0);
        for (long long n = 0; n < burn; ++n) s = step(s, params, cfg.dt, sq * normal(rng));
        PathStats st;
        st.sum.assign(nf, 0.0);
        st.batch_means.assign(nf, {});
        std::vector<double> acc(nf);
        for (int b = 0; b < cfg.batches; ++b) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (long long n = 0; n < per_batch; ++n) {
                const Region reg = s.region();
                for (std::size_t k = 0; k < nf; ++k) acc[k] += fs[k](s.y, s.z, reg);
                s = step(s, params, cfg.dt, sq * normal(rng));
            }
            for (std::size_t k = 0; k < nf; ++k) {
                st.sum[k] += acc[k];
                st.batch_means[k].push_back(acc[k] / static_cast<double>(per_batch));
            }
            st.samples += per_batch;
        }
        return st;
    });
    const PathStats all = merge_all(parts);

    std::vector<Estimate> out(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        const auto& bm = all.batch_means[k];
        const double nb = static_cast<double>(bm.size());
        double mean = 0.0;
        for (double v : bm) mean += v;
        mean /= nb;
        double ss = 0.0;
        for (double v : bm) ss += (v - mean) * (v - mean);
        Estimate& e = out[k];
        e.value = mean;
        e.std_error = std::sqrt(ss / (nb - 1.0) / nb);
        e.count = all.samples;
        e.replicas = cfg.replicas;
        e.batches = static_cast<int>(bm.size());
    }
    return out;
}

Estimate estimate_time_average(const Functional& f, const OscillatorParams& params, const SimConfig& cfg) {
    return estimate_time_averages({f}, params, cfg).front();
}

std::vector<CycleEstimate> estimate_cycles(const std::vector<Functional>& fs, const CycleStart& start,
                                           const OscillatorParams& params, const SimConfig& cfg) {
    cfg.validate();
    SimState origin;
    std::uint64_t purpose = Purpose::cycle_point;
    switch (start.kind) {
        case CycleStart::Kind::top:
            origin = make_state(params, 0.0, params.Y());
            purpose = Purpose::cycle_top;
            break;
        case CycleStart::Kind::bottom:
            origin = make_state(params, 0.0, -params.Y());
            purpose = Purpose::cycle_bottom;
            break;
        case CycleStart::Kind::point: origin = make_state(params, start.y, start.z); break;
    }
    const std::size_t nf = fs.size();

    auto parts = run_replicas(cfg, [&](int r) {
        auto rng = make_stream(cfg.seed, purpose, r);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double sq = std::sqrt(cfg.dt);
        std::vector<PathStats> st(nf);
        std::vector<double> acc(nf);
        for (long long c = 0; c < cfg.cycles; ++c) {
            SimState s = origin;
            std::fill(acc.begin(), acc.end(), 0.0);
            long long n = 0;
            bool done = false;
            while (n < cfg.step_cap) {
                const Region reg = s.region();
                for (std::size_t k = 0; k < nf; ++k) acc[k] += fs[k](s.y, s.z, reg);
                const Regime before = s.regime;
                s = step(s, params, cfg.dt, sq * normal(rng));
                ++n;
                if (completes(before, s.y)) {
                    done = true;
                    break;
                }
            }
            for (std::size_t k = 0; k < nf; ++k) {
                if (done)
                    st[k].add_cycle(acc[k] * cfg.dt, static_cast<double>(n) * cfg.dt);
                else
                    ++st[k].discarded;
            }
        }
        return st;
    });

    std::vector<CycleEstimate> out(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        CycleEstimate& e = out[k];
        for (const auto& part : parts) e.stats.merge(part[k]);
        e.integral = cycle_mean(e.stats, e.stats.sum_f, e.stats.sum_f2, cfg.replicas);
        e.duration = cycle_mean(e.stats, e.stats.sum_d, e.stats.sum_d2, cfg.replicas);
    }
    return out;
}

CycleEstimate estimate_cycle(const Functional& f, const CycleStart& start, const OscillatorParams& params,
                             const SimConfig& cfg) {
    return estimate_cycles({f}, start, params, cfg).front();
}

std::vector<CycleRatioEstimate> estimate_cycle_ratios(const std::vector<Functional>& fs,
                                                      const OscillatorParams& params, const SimConfig& cfg) {
    auto top = estimate_cycles(fs, CycleStart::after_plastic_plus(), params, cfg);
    auto bottom = estimate_cycles(fs, CycleStart::after_plastic_minus(), params, cfg);
    std::vector<CycleRatioEstimate> out(fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) {
        CycleRatioEstimate& r = out[k];
        r.top = std::move(top[k]);
        r.bottom = std::move(bottom[k]);
        const double den = r.top.duration.value + r.bottom.duration.value;
        if (!(den > 0.0)) throw SolverError("no completed cycles", den);
        const double nu = (r.top.integral.value + r.bottom.integral.value) / den;

        // Delta method, the two starts being independent.
        auto part = [nu](const PathStats& s) {
            if (s.cycles < 2) return 0.0;
            const double n = static_cast<double>(s.cycles);
            const double mf = s.sum_f / n;
            const double md = s.sum_d / n;
            const double vf = (s.sum_f2 - n * mf * mf) / (n - 1.0);
            const double vd = (s.sum_d2 - n * md * md) / (n - 1.0);
            const double cfd = (s.sum_fd - n * mf * md) / (n - 1.0);
            return std::max(0.0, vf - 2.0 * nu * cfd + nu * nu * vd) / n;
        };
        r.nu.value = nu;
        r.nu.std_error = std::sqrt(part(r.top.stats) + part(r.bottom.stats)) / den;
        r.nu.count = r.top.stats.cycles + r.bottom.stats.cycles;
        r.nu.replicas = cfg.replicas;
        r.nu.discarded = r.top.stats.discarded + r.bottom.stats.discarded;
    }
    return out;
}

CycleRatioEstimate estimate_cycle_ratio(const Functional& f, const OscillatorParams& params, const SimConfig& cfg) {
    return estimate_cycle_ratios({f}, params, cfg).front();
}

HittingEstimate estimate_pi(const PhasePoint& start, const OscillatorParams& params, const SimConfig& cfg) {
    cfg.validate();
    if (start.region() != Region::interior) throw ValidationError("hitting start must be an interior point");
    const SimState origin = make_state(params, start.y(), start.z());

    auto parts = run_replicas(cfg, [&](int r) {
        auto rng = make_stream(cfg.seed, Purpose::hitting, r);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double sq = std::sqrt(cfg.dt);
        PathStats st;
        for (long long p = 0; p < cfg.paths; ++p) {
            SimState s = origin;
            long long n = 0;
            while (s.regime == Regime::elastic && n < cfg.step_cap) {
                s = step(s, params, cfg.dt, sq * normal(rng));
                ++n;
            }
            if (s.regime == Regime::plastic_plus)
                ++st.hits_plus;
            else if (s.regime == Regime::plastic_minus)
                ++st.hits_minus;
            else
                ++st.discarded;
        }
        return st;
    });
    const PathStats all = merge_all(parts);

    HittingEstimate h;
    h.paths = all.hits_plus + all.hits_minus;
    h.discarded = all.discarded;
    if (h.paths == 0) throw SolverError("no path reached a plastic ray within the step cap", 0.0);
    const double n = static_cast<double>(h.paths);
    h.p_plus = static_cast<double>(all.hits_plus) / n;
    h.p_minus = static_cast<double>(all.hits_minus) / n;
    h.std_error = std::sqrt(h.p_plus * h.p_minus / n);
    return h;
}

void dump_trajectory(std::ostream& out, const OscillatorParams& params, const SimConfig& cfg, double y0, double z0,
                     long long steps, long long every) {
    cfg.validate();
    if (steps < 0 || every < 1) throw ValidationError("trajectory needs steps >= 0 and every >= 1");
    auto rng = make_stream(cfg.seed, Purpose::trajectory, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sq = std::sqrt(cfg.dt);
    SimState s = make_state(params, y0, z0);
    const auto old_prec = out.precision();
    out << "t,y,z,x,Delta,regime\n" << std::setprecision(17);
    for (long long n = 0; n <= steps; ++n) {
        if (n % every == 0)
            out << s.t << ',' << s.y << ',' << s.z << ',' << s.x << ',' << s.Delta << ',' << to_string(s.regime) << '\n';
        if (n < steps) s = step(s, params, cfg.dt, sq * normal(rng));
    }
    out.precision(old_prec);
}

}  // namespace epp
