#include "epp/ergodic.hpp"

#include "epp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace epp {

namespace {

constexpr double kTraceMatchTol = 1e-10;

void require_positive_lambda(double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be > 0");
}

double grid_sup(const Grid& g, const Functional& f) {
    double s = 0.0;
    for (int idx = 0; idx < g.size(); ++idx) {
        const Node n = g.node(idx);
        s = std::max(s, std::abs(f(n.y, n.z, n.region)));
    }
    return s;
}

}  // namespace

Field solve_pi(int sign, double lambda, std::shared_ptr<const Grid> grid) {
    if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    BoundaryConditionSpec bc = [&] {
        if (lambda == 0.0)
            return sign > 0 ? BoundaryConditionSpec::dirichlet_ray(one, zero)
                            : BoundaryConditionSpec::dirichlet_ray(zero, one);
        return sign > 0 ? BoundaryConditionSpec(RayClosure::pinned(1.0), RayClosure::prescribed(0.0))
                        : BoundaryConditionSpec(RayClosure::prescribed(0.0), RayClosure::pinned(1.0));
    }();
    const LinearSystem sys = assemble_generator(grid, lambda, bc, constant_functional(0.0));
    Field pi = solve_linear(sys, grid->tol(), sign > 0 ? "pi+" : "pi-");
    // the discrete maximum principle puts pi in [0,1]; only solver round-off escapes it
    const double excursion = std::max(-pi.values.minCoeff(), pi.values.maxCoeff() - 1.0);
    if (excursion > grid->tol())
        throw SolverError("pi field leaves [0,1] by " + std::to_string(excursion), excursion);
    pi.values = pi.values.cwiseMax(0.0).cwiseMin(1.0);
    return pi;
}

ErgodicSolver::ErgodicSolver(std::shared_ptr<const Grid> grid, double lambda)
    : grid_(grid), lambda_(lambda), cycle_(grid, lambda), unit_(cycle_.solve(constant_functional(1.0))) {
    if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
}

const Field& ErgodicSolver::pi_plus() const {
    if (!pi_plus_) pi_plus_ = solve_pi(+1, lambda_, grid_);
    return *pi_plus_;
}

const Field& ErgodicSolver::pi_minus() const {
    if (!pi_minus_) pi_minus_ = solve_pi(-1, lambda_, grid_);
    return *pi_minus_;
}

InvariantMeasureResult ErgodicSolver::measure_from(const Field& v) const {
    const double top1 = unit_.trace(Junction::top_interior);
    const double bot1 = unit_.trace(Junction::bottom_interior);
    if (std::abs(top1 - bot1) > kTraceMatchTol * std::max(1.0, std::abs(top1))) {
        std::ostringstream msg;
        msg << "unit short cycle traces differ: v(0-,Y;1) = " << top1 << ", v(0+,-Y;1) = " << bot1;
        throw SolverError(msg.str(), std::abs(top1 - bot1));
    }
    InvariantMeasureResult r;
    r.lambda = lambda_;
    r.grid = grid_;
    r.numerator_top = v.trace(Junction::top_interior);
    r.numerator_bottom = v.trace(Junction::bottom_interior);
    // Both unit traces enter so that the ratio is exactly mirror-invariant.
    r.denominator = top1 + bot1;
    if (!(r.denominator > 0.0))
        throw SolverError("mean cycle length is not positive: assembly does not preserve positivity", r.denominator);
    r.nu = (r.numerator_top + r.numerator_bottom) / r.denominator;
    r.method = lambda_ == 0.0 ? "short-cycle traces" : "resolvent short-cycle traces";
    return r;
}

InvariantMeasureResult ErgodicSolver::measure(const Functional& f) const { return measure_from(short_cycle(f)); }

Field ErgodicSolver::resolvent_by_formula(const Functional& f) const {
    require_positive_lambda(lambda_);
    const SymmetrySplit split = symmetrize(f);

    // Symmetric part: v + (v(0-,Y)/v(0-,Y;1)) (1/lambda - v(.;1)).
    const Field vs = short_cycle(split.f_sym);
    const double unit_top = unit_.trace(Junction::top_interior);
    if (!(unit_top > 0.0)) throw SolverError("v_lambda(0-,Y;1) is not positive", unit_top);
    Field sym = vs;
    const double a = vs.trace(Junction::top_interior) / unit_top;
    sym.values += a * (Eigen::VectorXd::Constant(grid_->size(), 1.0 / lambda_) - unit_.values);

    // Antisymmetric part: v - (pi+ - pi-) v(0+,-Y) / (1 - pi+(0-,Y) + pi+(0+,-Y)).
    const Field va = short_cycle(split.f_asym);
    const Field& pp = pi_plus();
    const Field& pm = pi_minus();
    const double den = 1.0 - pp.trace(Junction::top_interior) + pp.trace(Junction::bottom_interior);
    if (!(std::abs(den) > 1e-14)) throw SolverError("antisymmetric resolvent denominator vanishes", den);
    Field asym = va;
    asym.values -= (va.trace(Junction::bottom_interior) / den) * (pp.values - pm.values);

    Field u = sym + asym;
    u.label = "u_lambda[" + f.name + "] (formula)";
    return u;
}

Field ErgodicSolver::corrector(const Functional& f) const {
    if (lambda_ != 0.0) throw ValidationError("the corrector is defined for lambda = 0");
    const Field v = short_cycle(f);
    const InvariantMeasureResult m = measure_from(v);
    const Field& pp = pi_plus();
    const Field& pm = pi_minus();
    const double pm_top = pm.trace(Junction::top_interior);
    if (!(pm_top > 0.0)) throw SolverError("pi-(0-,Y) is not positive", pm_top);
    const double jump = v.trace(Junction::top_interior) - v.trace(Junction::bottom_interior);

    Field u = v;
    u.values -= m.nu * unit_.values;
    u.values += (jump / (4.0 * pm_top)) * (pp.values - pm.values);
    u.label = "u[" + f.name + "]";
    return u;
}

InvariantMeasureResult invariant_measure(const Functional& f, std::shared_ptr<const Grid> grid) {
    return ErgodicSolver(std::move(grid), 0.0).measure(f);
}

double nu_lambda(const Functional& f, double lambda, std::shared_ptr<const Grid> grid) {
    require_positive_lambda(lambda);
    return ErgodicSolver(std::move(grid), lambda).measure(f).nu;
}

ResolventPair solve_u_lambda_direct(const Functional& f, double lambda, std::shared_ptr<const Grid> grid) {
    require_positive_lambda(lambda);
    ResolventPair r;
    r.lambda = lambda;
    const LinearSystem sys = assemble_generator(grid, lambda, BoundaryConditionSpec::nonlocal_continuity(), f);
    r.u_lambda = solve_linear(sys, grid->tol(), "u_lambda[" + f.name + "]");
    r.nu_lambda = nu_lambda(f, lambda, grid);
    r.f_sup = grid_sup(*grid, f);
    r.bound_excess = std::max(0.0, r.u_lambda.sup_norm() - r.f_sup / lambda);
    r.bound_ok = r.bound_excess <= 1e-8;
    return r;
}

Field u_lambda_by_formula(const Functional& f, double lambda, std::shared_ptr<const Grid> grid) {
    require_positive_lambda(lambda);
    return ErgodicSolver(std::move(grid), lambda).resolvent_by_formula(f);
}

Field solve_u_representation(const Functional& f, std::shared_ptr<const Grid> grid) {
    return ErgodicSolver(std::move(grid), 0.0).corrector(f);
}

std::vector<Probe> probe_points(const Grid& grid) {
    const double s = grid.params().sigma_y();
    const double Y = grid.params().Y();
    std::vector<Probe> out{{"(0,0)", 0.0, 0.0, 0},
                           {"(+sigma_y,0)", s, 0.0, 0},
                           {"(-sigma_y,0)", -s, 0.0, 0},
                           {"(0,+Y/2)", 0.0, 0.5 * Y, 0},
                           {"(0,-Y/2)", 0.0, -0.5 * Y, 0}};
    for (Probe& p : out) {
        p.index = grid.nearest_index(p.y, p.z);
        const Node n = grid.node(p.index);
        p.y = n.y;
        p.z = n.z;
    }
    return out;
}

}  // namespace epp
