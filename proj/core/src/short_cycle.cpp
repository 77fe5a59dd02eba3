#include "epp/short_cycle.hpp"

#include "blocks.hpp"
#include "epp/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace epp {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kWeightExponentCut = 37.0;  // exp(-37) < 1e-16
constexpr double kQuadTol = 1e-12;
constexpr unsigned kQuadDepth = 12;

// Largest xi with c0 xi^2 + 2kY xi <= 37.
double xi_cut(const OscillatorParams& p) {
    const double a = p.k() * p.Y();
    return (-a + std::sqrt(a * a + kWeightExponentCut * p.c0())) / p.c0();
}

// Integral over [0, top] on panels [0, knee], [knee, 2 knee], [2 knee, 4 knee], ...
template <unsigned Points, class F>
double integrate_from_knee(const F& f, double knee, double top) {
    double sum = gauss_kronrod<double, Points>::integrate(f, 0.0, knee, kQuadDepth, kQuadTol);
    for (double a = knee; a < top; a *= 2.0)
        sum += gauss_kronrod<double, Points>::integrate(f, a, std::min(2.0 * a, top), kQuadDepth, kQuadTol);
    return sum;
}

// phi+(y; g) with g a function of the velocity on the plus ray.
template <class G>
double phi_plus_quadrature(const OscillatorParams& p, const G& g, double y) {
    if (y == 0.0) return 0.0;
    const double c0 = p.c0();
    const double kY = p.k() * p.Y();
    auto inner = [&](double xi) {
        double upper = y;
        if (xi > 0.0) upper = std::min(y, kWeightExponentCut / (2.0 * c0 * xi));
        auto integrand = [&](double s) { return g(xi + s) * std::exp(-2.0 * c0 * xi * s); };
        return gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, kQuadDepth, kQuadTol);
    };
    auto outer = [&](double xi) { return std::exp(-(c0 * xi * xi + 2.0 * kY * xi)) * inner(xi); };
    const double top = xi_cut(p);
    // The inner integral changes character around xi ~ 1/(2 c0 y).
    const double knee = std::min(0.5 * top, 1.0 / (2.0 * c0 * y));
    return 2.0 * integrate_from_knee<31>(outer, knee, top);
}

}  // namespace

double phi_ray(const OscillatorParams& params, const Functional& f, int sign, double y) {
    if (sign > 0) {
        if (y < 0.0) throw ValidationError("phi+ needs y >= 0");
        const double Y = params.Y();
        return phi_plus_quadrature(params, [&](double s) { return f(s, Y, Region::plus_ray); }, y);
    }
    if (y > 0.0) throw ValidationError("phi- needs y <= 0");
    // phi-(y; f) = phi+(-y; s -> f(-s, -Y)) by the reflection (y, z) -> (-y, -z).
    const double Y = params.Y();
    return phi_plus_quadrature(params, [&](double s) { return f(-s, -Y, Region::minus_ray); }, -y);
}

double phi_unit(const OscillatorParams& params, double y) {
    if (y < 0.0) throw ValidationError("phi_unit needs y >= 0");
    if (y == 0.0) return 0.0;
    const double c0 = params.c0();
    const double kY = params.k() * params.Y();
    auto integrand = [&](double xi) {
        const double w = std::exp(-(c0 * xi * xi + 2.0 * kY * xi));
        if (xi == 0.0) return 2.0 * y * w;
        return w * (-std::expm1(-2.0 * c0 * y * xi)) / (c0 * xi);
    };
    const double top = xi_cut(params);
    const double knee = std::min(0.5 * top, 1.0 / (2.0 * c0 * y));
    return integrate_from_knee<61>(integrand, knee, top);
}

double phi_unit_log_bound(const OscillatorParams& params, double y) {
    const double kY = params.k() * params.Y();
    return std::log((params.c0() * y + kY) / kY) / params.c0();
}

double RayProfile::operator()(double yv, double hy) const {
    const auto k = static_cast<std::size_t>(std::lround(std::abs(yv) / hy));
    return values[std::min(k, values.size() - 1)];
}

namespace {

std::vector<int> ray_indices(const Grid& g, int sign) {
    std::vector<int> idx;
    if (sign > 0) {
        idx.push_back(g.junction(Junction::top_ray));
        for (int i = g.i0() + 1; i < g.ny(); ++i) idx.push_back(g.index(i, g.nz() - 1));
    } else {
        idx.push_back(g.junction(Junction::bottom_ray));
        for (int i = g.i0() - 1; i >= 0; --i) idx.push_back(g.index(i, 0));
    }
    return idx;
}

}  // namespace

RayProfile ray_profile(std::shared_ptr<const Grid> grid, const Functional& f, int sign) {
    const Grid& g = *grid;
    const LinearSystem sys = assemble_generator(grid, 0.0, BoundaryConditionSpec::local_zero(), f);
    const std::vector<int> idx = ray_indices(g, sign);
    // The ray rows only reference the ray and its junction, so this block is
    // decoupled from the strip.
    detail::Block block(sys.matrix, idx, g.tol());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(g.size());
    block.solve_into(sys.rhs, x);

    RayProfile out;
    out.sign = sign;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.y.push_back(sign * static_cast<double>(k) * g.hy());
        out.values.push_back(x[idx[k]]);
    }
    out.values[0] = 0.0;  // pinned junction; drop LU round-off
    return out;
}

RayProfile ray_profile_quadrature(const Grid& grid, const Functional& f, int sign) {
    RayProfile out;
    out.sign = sign;
    for (int k = 0; k <= grid.i0(); ++k) {
        const double y = sign * k * grid.hy();
        out.y.push_back(y);
        out.values.push_back(phi_ray(grid.params(), f, sign, y));
    }
    return out;
}

Field solve_short_cycle(const Functional& f, double lambda, std::shared_ptr<const Grid> grid) {
    return ShortCycleSolver(std::move(grid), lambda).solve(f);
}

ShortCycleSolver::ShortCycleSolver(std::shared_ptr<const Grid> grid, double lambda)
    : problem_(std::move(grid), lambda, BoundaryConditionSpec::local_zero()) {}

// ---------------------------------------------------------------------------

struct SchwarzSolver::Impl {
    std::shared_ptr<const Grid> grid;
    int m = 0;   // ybar / hy
    int m1 = 0;  // ybar1 / hy
    detail::Block interior;
    detail::Block ext_plus;
    detail::Block ext_minus;
    std::vector<int> trace_plus;   // column i0 + m1
    std::vector<int> trace_minus;  // column i0 - m1
    std::vector<RowKind> rows;

    std::vector<double> gather(const Eigen::VectorXd& x, const std::vector<int>& idx) const {
        std::vector<double> out;
        out.reserve(idx.size());
        for (int k : idx) out.push_back(x[k]);
        return out;
    }
};

SchwarzSolver::SchwarzSolver(const LinearSystem& system, double ybar, double ybar1) : impl_(std::make_unique<Impl>()) {
    const Grid& g = *system.grid;
    if (!(ybar > 0.0) || !(ybar1 > ybar) || !(ybar1 < g.L()))
        throw ValidationError("need 0 < ybar < ybar1 < L");
    Impl& s = *impl_;
    s.grid = system.grid;
    s.rows = system.rows;
    s.m = static_cast<int>(std::lround(ybar / g.hy()));
    s.m1 = static_cast<int>(std::lround(ybar1 / g.hy()));
    if (s.m < 1) throw ValidationError("ybar below one mesh width");
    if (s.m1 - s.m < 2) throw ValidationError("overlap too thin: ybar1 - ybar < 2 hy");
    if (s.m1 > g.i0() - 2) throw ValidationError("ybar1 too close to the truncation L");
    for (int idx = 0; idx < g.size(); ++idx) {
        const Node n = g.node(idx);
        const bool ray = n.region != Region::interior;
        if (ray && system.rows[static_cast<std::size_t>(idx)] != RowKind::dirichlet)
            throw ValidationError("interior/exterior iteration needs prescribed data on both rays");
    }

    std::vector<int> in, ep, em;
    for (int idx = 0; idx < g.size(); ++idx) {
        const int off = g.node(idx).i - g.i0();
        if (std::abs(off) < s.m1) in.push_back(idx);
        if (off > s.m) ep.push_back(idx);
        if (off < -s.m) em.push_back(idx);
    }
    s.interior = detail::Block(system.matrix, std::move(in), g.tol());
    s.ext_plus = detail::Block(system.matrix, std::move(ep), g.tol());
    s.ext_minus = detail::Block(system.matrix, std::move(em), g.tol());
    for (int j = 0; j < g.nz(); ++j) {
        s.trace_plus.push_back(g.index(g.i0() + s.m1, j));
        s.trace_minus.push_back(g.index(g.i0() - s.m1, j));
    }
}

SchwarzSolver::~SchwarzSolver() = default;
SchwarzSolver::SchwarzSolver(SchwarzSolver&&) noexcept = default;
SchwarzSolver& SchwarzSolver::operator=(SchwarzSolver&&) noexcept = default;

double SchwarzSolver::ybar() const noexcept { return impl_->m * impl_->grid->hy(); }
double SchwarzSolver::ybar1() const noexcept { return impl_->m1 * impl_->grid->hy(); }

double SchwarzSolver::contraction_factor() const {
    const Impl& s = *impl_;
    const Grid& g = *s.grid;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.size());

    Eigen::VectorXd psi = Eigen::VectorXd::Zero(g.size());
    for (int j = 0; j < g.nz() - 1; ++j) psi[g.index(g.i0() + s.m, j)] = 1.0;
    s.ext_plus.solve_into(zero, psi);
    double rho = 0.0;
    for (int k : s.trace_plus) rho = std::max(rho, psi[k]);

    psi.setZero();
    for (int j = 1; j < g.nz(); ++j) psi[g.index(g.i0() - s.m, j)] = 1.0;
    s.ext_minus.solve_into(zero, psi);
    for (int k : s.trace_minus) rho = std::max(rho, psi[k]);

    if (!(rho > 0.0 && rho < 1.0)) {
        std::ostringstream msg;
        msg << "contraction certificate " << rho << " outside (0,1): maximum principle violated";
        throw SolverError(msg.str(), rho);
    }
    return rho;
}

std::pair<Field, GammaIterationReport> SchwarzSolver::solve(const Eigen::VectorXd& rhs, double tol, int budget) const {
    const Impl& s = *impl_;
    const Grid& g = *s.grid;
    GammaIterationReport rep;
    rep.ybar = ybar();
    rep.ybar1 = ybar1();
    rep.certified_rho = contraction_factor();

    // Positive part of the strip source, for the exterior barrier check.
    double src = 0.0;
    for (int idx = 0; idx < g.size(); ++idx)
        if (s.rows[static_cast<std::size_t>(idx)] == RowKind::strip) src = std::max(src, rhs[idx]);
    const double Y = g.params().Y();
    const double yb = ybar();

    Eigen::VectorXd x = Eigen::VectorXd::Zero(g.size());
    std::vector<double> old_plus(s.trace_plus.size(), 0.0);
    std::vector<double> old_minus(s.trace_minus.size(), 0.0);
    rep.exterior_min = std::numeric_limits<double>::infinity();

    for (int n = 1; n <= budget; ++n) {
        s.interior.solve_into(rhs, x);
        double data_plus = 0.0, data_minus = 0.0;
        for (int j = 0; j < g.nz(); ++j) {
            data_plus = std::max(data_plus, std::abs(x[g.index(g.i0() + s.m, j)]));
            data_minus = std::max(data_minus, std::abs(x[g.index(g.i0() - s.m, j)]));
        }
        s.ext_plus.solve_into(rhs, x);
        s.ext_minus.solve_into(rhs, x);

        for (int k : s.ext_plus.idx) {
            const Node nd = g.node(k);
            rep.exterior_bound_excess =
                std::max(rep.exterior_bound_excess, x[k] - (data_plus + src * (Y - nd.z) / yb));
            rep.exterior_min = std::min(rep.exterior_min, x[k]);
        }
        for (int k : s.ext_minus.idx) {
            const Node nd = g.node(k);
            rep.exterior_bound_excess =
                std::max(rep.exterior_bound_excess, x[k] - (data_minus + src * (Y + nd.z) / yb));
            rep.exterior_min = std::min(rep.exterior_min, x[k]);
        }

        auto plus = s.gather(x, s.trace_plus);
        auto minus = s.gather(x, s.trace_minus);
        double r = 0.0;
        for (std::size_t k = 0; k < plus.size(); ++k) {
            r = std::max(r, std::abs(plus[k] - old_plus[k]));
            r = std::max(r, std::abs(minus[k] - old_minus[k]));
        }
        rep.residuals.push_back(r);
        rep.trace_plus.push_back(plus);
        rep.trace_minus.push_back(minus);
        old_plus = std::move(plus);
        old_minus = std::move(minus);
        rep.iterations = n;
        if (r <= tol) {
            rep.converged = true;
            break;
        }
    }

    double scale = 1.0;
    for (double v : old_plus) scale = std::max(scale, std::abs(v));
    for (double v : old_minus) scale = std::max(scale, std::abs(v));
    for (std::size_t n = 1; n < rep.residuals.size(); ++n) {
        if (rep.residuals[n - 1] <= 1e-12 * scale) break;
        rep.measured_ratio = std::max(rep.measured_ratio, rep.residuals[n] / rep.residuals[n - 1]);
    }
    if (!std::isfinite(rep.exterior_min)) rep.exterior_min = 0.0;
    return {Field(s.grid, std::move(x), "schwarz"), std::move(rep)};
}

// ---------------------------------------------------------------------------

namespace {

struct Overlap {
    double ybar;
    double ybar1;
};

Overlap resolve_overlap(const Grid& g, const ShortCycleOptions& opts) {
    const double s = g.params().sigma_y();
    return {opts.ybar > 0.0 ? opts.ybar : s, opts.ybar1 > 0.0 ? opts.ybar1 : 2.0 * s};
}

void require_converged(const GammaIterationReport& rep, const char* what) {
    if (rep.converged) return;
    std::ostringstream msg;
    msg << what << ": iteration budget of " << rep.iterations << " sweeps exceeded, last trace residual "
        << (rep.residuals.empty() ? 0.0 : rep.residuals.back());
    throw SolverError(msg.str(), rep.residuals.empty() ? 0.0 : rep.residuals.back());
}

BoundaryConditionSpec zero_rays() {
    return BoundaryConditionSpec::dirichlet_ray([](double) { return 0.0; }, [](double) { return 0.0; });
}

// C2 extension of a ray profile to the opposite side of y = 0:
// slope * y * exp(-(y / delta)^2) with slope the one-sided derivative at 0.
Field profile_extension(const std::shared_ptr<const Grid>& grid, const RayProfile& prof) {
    const Grid& g = *grid;
    const double hy = g.hy();
    const double delta = g.params().sigma_y();
    const double slope = prof.sign * prof.values.at(1) / hy;
    Eigen::VectorXd v(g.size());
    for (int idx = 0; idx < g.size(); ++idx) {
        const double y = g.node(idx).y;
        if (y * prof.sign >= 0.0)
            v[idx] = prof(y, hy);
        else
            v[idx] = slope * y * std::exp(-(y / delta) * (y / delta));
    }
    return {grid, std::move(v), "extension"};
}

VRayResult v_ray_with(const SchwarzSolver& solver, const LinearSystem& base, const Functional& f, int sign,
                      const ShortCycleOptions& opts) {
    const auto& grid = base.grid;
    const Grid& g = *grid;
    const RayProfile prof = ray_profile(grid, f, sign);
    const double hy = g.hy();
    auto on_ray = [prof, hy](double y) { return prof(y, hy); };
    auto zero = [](double) { return 0.0; };
    const BoundaryConditionSpec bc =
        sign > 0 ? BoundaryConditionSpec::dirichlet_ray(on_ray, zero) : BoundaryConditionSpec::dirichlet_ray(zero, on_ray);
    const Eigen::VectorXd rhs_v = assemble_rhs(g, base.rows, bc, constant_functional(0.0));

    VRayResult out;
    out.extension = profile_extension(grid, prof);
    const Eigen::VectorXd rhs_w = rhs_v - base.matrix * out.extension.values;
    for (int idx = 0; idx < g.size(); ++idx)
        if (base.rows[static_cast<std::size_t>(idx)] == RowKind::strip)
            out.g_sup = std::max(out.g_sup, std::abs(rhs_w[idx]));

    auto [w, rep] = solver.solve(rhs_w, opts.tol, opts.budget);
    require_converged(rep, sign > 0 ? "v+ remainder" : "v- remainder");
    w.label = sign > 0 ? "w+" : "w-";
    out.w = w;
    out.v = out.extension + w;
    out.v.label = std::string(sign > 0 ? "v+[" : "v-[") + f.name + "]";
    out.report = std::move(rep);
    return out;
}

}  // namespace

std::pair<Field, GammaIterationReport> solve_ve(const Functional& f, std::shared_ptr<const Grid> grid,
                                                const ShortCycleOptions& opts) {
    const Overlap ov = resolve_overlap(*grid, opts);
    const LinearSystem sys = assemble_generator(grid, 0.0, zero_rays(), f);
    const SchwarzSolver solver(sys, ov.ybar, ov.ybar1);
    auto [field, rep] = solver.solve(sys.rhs, opts.tol, opts.budget);
    require_converged(rep, "v_e");
    field.label = "v_e[" + f.name + "]";
    return {std::move(field), std::move(rep)};
}

double contraction_factor(std::shared_ptr<const Grid> grid, double ybar, double ybar1) {
    const LinearSystem sys = assemble_generator(grid, 0.0, zero_rays(), constant_functional(0.0));
    return SchwarzSolver(sys, ybar, ybar1).contraction_factor();
}

VRayResult solve_v_ray(const Functional& f, int sign, std::shared_ptr<const Grid> grid,
                       const ShortCycleOptions& opts) {
    const Overlap ov = resolve_overlap(*grid, opts);
    const LinearSystem sys = assemble_generator(grid, 0.0, zero_rays(), constant_functional(0.0));
    const SchwarzSolver solver(sys, ov.ybar, ov.ybar1);
    return v_ray_with(solver, sys, f, sign, opts);
}

Decomposition decompose_short_cycle(const Functional& f, std::shared_ptr<const Grid> grid,
                                    const ShortCycleOptions& opts) {
    const Overlap ov = resolve_overlap(*grid, opts);
    const LinearSystem sys = assemble_generator(grid, 0.0, zero_rays(), f);
    const SchwarzSolver solver(sys, ov.ybar, ov.ybar1);

    Decomposition d;
    auto [ve, rep] = solver.solve(sys.rhs, opts.tol, opts.budget);
    require_converged(rep, "v_e");
    d.v_e = std::move(ve);
    d.v_e.label = "v_e[" + f.name + "]";
    d.ve_report = std::move(rep);

    VRayResult plus = v_ray_with(solver, sys, f, +1, opts);
    VRayResult minus = v_ray_with(solver, sys, f, -1, opts);
    d.v_plus = std::move(plus.v);
    d.plus_report = std::move(plus.report);
    d.v_minus = std::move(minus.v);
    d.minus_report = std::move(minus.report);
    d.total = d.v_e + d.v_plus + d.v_minus;
    d.total.label = "v[" + f.name + "] (decomposed)";
    return d;
}

}  // namespace epp
