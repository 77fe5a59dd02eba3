#pragma once

#include "epp/assembly.hpp"
#include "epp/grid.hpp"
#include "epp/model.hpp"

#include <memory>
#include <vector>

namespace epp {

// ---------------------------------------------------------------------------
// Plastic-phase profiles phi+- (expected integral of f until the plastic
// phase ends, starting on a ray).
// ---------------------------------------------------------------------------

/// phi+(y; f) for y >= 0 (sign > 0) or phi-(y; f) for y <= 0 (sign < 0) by
/// nested adaptive quadrature of the closed-form double integral. The
/// xi-integral is cut where exp(-(c0 xi^2 + 2kY xi)) drops below 1e-16.
double phi_ray(const OscillatorParams& params, const Functional& f, int sign, double y);

/// phi+(y; 1) from its single-integral representation.
double phi_unit(const OscillatorParams& params, double y);

/// (1/c0) log((c0 y + kY) / kY), the upper bound on phi+(y; 1).
double phi_unit_log_bound(const OscillatorParams& params, double y);

/// Plastic-phase profile sampled on a grid ray, junction first.
struct RayProfile {
    int sign = 1;
    std::vector<double> y;       // 0, +-hy, +-2hy, ...
    std::vector<double> values;  // values[0] == 0

    double at_offset(int k) const { return values[static_cast<std::size_t>(k)]; }
    /// Value at the ray node nearest to y.
    double operator()(double y, double hy) const;
};

/// Profile from the discrete ray equation on the grid (the exact restriction
/// of the monolithic short-cycle system to the ray).
RayProfile ray_profile(std::shared_ptr<const Grid> grid, const Functional& f, int sign);

/// Profile from phi_ray at the ray nodes.
RayProfile ray_profile_quadrature(const Grid& grid, const Functional& f, int sign);

// ---------------------------------------------------------------------------
// Short cycles
// ---------------------------------------------------------------------------

/// Monolithic solve of lambda v + A v = f, lambda v + B+- v = f with
/// v(0+,Y) = v(0-,-Y) = 0. lambda = 0 is the short cycle itself.
Field solve_short_cycle(const Functional& f, double lambda, std::shared_ptr<const Grid> grid);

/// Factored short-cycle operator for repeated source terms.
class ShortCycleSolver {
public:
    ShortCycleSolver(std::shared_ptr<const Grid> grid, double lambda);
    Field solve(const Functional& f) const { return problem_.solve(f, "v[" + f.name + "]"); }
    double lambda() const noexcept { return problem_.system().lambda; }
    const std::shared_ptr<const Grid>& grid() const noexcept { return problem_.system().grid; }

private:
    FactoredProblem problem_;
};

// ---------------------------------------------------------------------------
// Overlapping interior / exterior iteration
// ---------------------------------------------------------------------------

struct GammaIterationReport {
    double ybar = 0.0;   // snapped to the grid
    double ybar1 = 0.0;  // snapped to the grid
    std::vector<std::vector<double>> trace_plus;   // Phi_n on y = +ybar1, n = 1..
    std::vector<std::vector<double>> trace_minus;  // Phi_n on y = -ybar1
    std::vector<double> residuals;                 // ||Phi_n - Phi_{n-1}||_inf
    double measured_ratio = 0.0;                   // max residual ratio, n >= 2
    double certified_rho = 0.0;                    // sup psi(ybar1, .)
    int iterations = 0;
    bool converged = false;
    /// Largest exterior-iterate excess over ||zeta||_inf + (Y -+ z)/ybar and
    /// smallest exterior value, over all sweeps.
    double exterior_bound_excess = 0.0;
    double exterior_min = 0.0;
};

/// Alternating solver for problems whose rays are fully prescribed
/// (Dirichlet rows on D+ and D-). One sweep solves the interior problem on
/// |y| < ybar1 with data on y = +-ybar1, then the two exterior problems on
/// y > ybar and y < -ybar with data from the interior iterate on y = +-ybar;
/// the sweep map sends the traces on y = +-ybar1 to the new exterior traces.
class SchwarzSolver {
public:
    SchwarzSolver(const LinearSystem& system, double ybar, double ybar1);
    ~SchwarzSolver();
    SchwarzSolver(SchwarzSolver&&) noexcept;
    SchwarzSolver& operator=(SchwarzSolver&&) noexcept;

    /// Iterates from zero traces until ||Phi_n - Phi_{n-1}||_inf <= tol.
    /// Throws SolverError when `budget` sweeps do not suffice.
    std::pair<Field, GammaIterationReport> solve(const Eigen::VectorXd& rhs, double tol = 1e-9,
                                                 int budget = 200) const;

    /// sup_z psi(+-ybar1, z) for the exterior problems with psi = 1 on the
    /// segment y = +-ybar, psi = 0 on the ray, homogeneous equation.
    double contraction_factor() const;

    double ybar() const noexcept;
    double ybar1() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ShortCycleOptions {
    double ybar = 0.0;   // 0 selects sigma_y
    double ybar1 = 0.0;  // 0 selects 2 sigma_y
    double tol = 1e-9;
    int budget = 200;
};

/// A v_e = f in D, v_e = 0 on both rays, by the interior/exterior iteration.
std::pair<Field, GammaIterationReport> solve_ve(const Functional& f, std::shared_ptr<const Grid> grid,
                                                const ShortCycleOptions& opts = {});

/// psi certificate for the given overlap; always in (0, 1) for a
/// maximum-principle-preserving assembly, otherwise throws SolverError.
double contraction_factor(std::shared_ptr<const Grid> grid, double ybar, double ybar1);

struct VRayResult {
    Field v;          // v+ (sign > 0) or v- (sign < 0)
    Field w;          // v - extension
    Field extension;  // C2 extension of the ray profile, function of y only
    double g_sup = 0.0;  // sup of the lifted source on strip rows
    GammaIterationReport report;
};

/// A v+ = 0 in D, v+ = phi+ on D+, v+ = 0 on D- (sign > 0), or the mirror
/// problem for v-, solved by lifting the profile with a C2 extension across
/// y = 0 and iterating on the bounded remainder.
VRayResult solve_v_ray(const Functional& f, int sign, std::shared_ptr<const Grid> grid,
                       const ShortCycleOptions& opts = {});

struct Decomposition {
    Field v_e;
    Field v_plus;
    Field v_minus;
    Field total;
    GammaIterationReport ve_report;
    GammaIterationReport plus_report;
    GammaIterationReport minus_report;
};

/// v = v_e + v+ + v- assembled entirely from the iterative route.
Decomposition decompose_short_cycle(const Functional& f, std::shared_ptr<const Grid> grid,
                                    const ShortCycleOptions& opts = {});

}  // namespace epp
