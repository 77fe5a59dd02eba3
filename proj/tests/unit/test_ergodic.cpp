#include "epp/assembly.hpp"
#include "epp/ergodic.hpp"
#include "epp/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace epp;

namespace {

const OscillatorParams kUnit(1.0, 1.0, 1.0);

std::shared_ptr<const Grid> default_grid() {
    static const auto g = build_grid(kUnit, GridConfig{});
    return g;
}

Functional named(const char* n) { return make_functional(n, {6.0, 1.0}); }

// |y| on the plastic rays, 0 in the strip
Functional abs_y_on_rays() {
    return {"abs_y_rays", [](double y, double, Region r) { return r == Region::interior ? 0.0 : std::abs(y); },
            Symmetry::symmetric, 6.0};
}

}  // namespace

// ---------------------------------------------------------------------------
// splitting fields

TEST(Pi, PartitionOfUnityAndRange) {
    const auto g = default_grid();
    const Field p = solve_pi(+1, 0.0, g);
    const Field m = solve_pi(-1, 0.0, g);
    EXPECT_LE(((p.values + m.values).array() - 1.0).abs().maxCoeff(), 1e-8);
    EXPECT_GE(p.values.minCoeff(), 0.0);
    EXPECT_LE(p.values.maxCoeff(), 1.0);
    EXPECT_GE(m.values.minCoeff(), 0.0);
    EXPECT_LE(m.values.maxCoeff(), 1.0);
}

TEST(Pi, BoundaryValues) {
    const auto g = default_grid();
    const Field p = solve_pi(+1, 0.0, g);
    for (double v : p.ray(+1)) EXPECT_NEAR(v, 1.0, 1e-12);
    for (double v : p.ray(-1)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Pi, SymmetryAndCentre) {
    const auto g = default_grid();
    const Field p = solve_pi(+1, 0.0, g);
    const Field m = solve_pi(-1, 0.0, g);
    double worst = 0.0;
    for (int idx = 0; idx < g->size(); ++idx) worst = std::max(worst, std::abs(p[idx] - m[g->mirror(idx)]));
    EXPECT_LE(worst, 1e-10);
    EXPECT_NEAR(p[g->nearest_index(0.0, 0.0)], 0.5, 1e-10);
    // moving up and to the right makes the plus ray likelier
    EXPECT_GT(p[g->nearest_index(0.7, 0.5)], 0.5);
    EXPECT_LT(p[g->nearest_index(-0.7, -0.5)], 0.5);
}

TEST(Pi, DiscountedFieldsSumBelowOne) {
    const auto g = default_grid();
    const Field p = solve_pi(+1, 0.1, g);
    const Field m = solve_pi(-1, 0.1, g);
    const Eigen::VectorXd s = p.values + m.values;
    EXPECT_LE(s.maxCoeff(), 1.0 + 1e-12);
    EXPECT_GE(s.minCoeff(), -1e-12);
    EXPECT_NEAR(p.trace(Junction::top_ray), 1.0, 1e-12);
    EXPECT_LT(p[g->nearest_index(0.0, 0.0)], 0.5);
    EXPECT_THROW(solve_pi(+1, -1.0, g), ValidationError);
}

// ---------------------------------------------------------------------------
// invariant measure

TEST(Measure, Normalization) {
    const auto r = invariant_measure(constant_functional(1.0), default_grid());
    EXPECT_NEAR(r.nu, 1.0, 1e-12);
    EXPECT_NEAR(r.numerator_top, r.numerator_bottom, 1e-10);
    EXPECT_NEAR(r.denominator, r.numerator_top + r.numerator_bottom, 1e-12);
    EXPECT_EQ(r.lambda, 0.0);
}

TEST(Measure, AntisymmetricFunctionalsVanish) {
    const ErgodicSolver es(default_grid());
    for (const char* n : {"y", "z", "y3"}) EXPECT_LE(std::abs(es.measure(named(n)).nu), 1e-8) << n;
}

TEST(Measure, PositivityAndLinearity) {
    const ErgodicSolver es(default_grid());
    const double y2 = es.measure(named("y2")).nu;
    const double z2 = es.measure(named("z2")).nu;
    EXPECT_GT(y2, 0.0);
    EXPECT_GT(z2, 0.0);
    EXPECT_LT(z2, 1.0);  // z^2 <= Y^2 = 1
    EXPECT_NEAR(es.measure(named("y_plus_y2")).nu, y2, 1e-10);
    EXPECT_NEAR(es.measure(named("y_plus_z2")).nu, z2, 1e-10);
    const double ind = es.measure(named("plastic_plus")).nu;
    EXPECT_GT(ind, 0.0);
    EXPECT_LT(ind, 0.5);
}

TEST(Measure, StationaryIdentityForMixedCubic) {
    // z^4 is invariant along the rays, so nu(y z^3) = Y^3 nu(|y| on the rays) > 0
    const ErgodicSolver es(default_grid());
    const double lhs = es.measure(named("yz3")).nu;
    const double rhs = es.measure(abs_y_on_rays()).nu;
    EXPECT_GT(lhs, 0.01);
    EXPECT_NEAR(lhs, rhs, 0.1 * rhs);
}

TEST(Measure, GaussianMarginalScale) {
    // the velocity marginal is close to N(0, 1/(2 c0)) at the default point
    const double y2 = invariant_measure(named("y2"), default_grid()).nu;
    EXPECT_NEAR(y2, 0.5, 0.1);
}

TEST(Measure, FromFieldMatchesDirect) {
    const ErgodicSolver es(default_grid());
    const auto f = named("abs_y");
    const auto a = es.measure(f);
    const auto b = es.measure_from(es.short_cycle(f));
    EXPECT_EQ(a.nu, b.nu);
}

TEST(Measure, DiscountedRatio) {
    const auto g = default_grid();
    EXPECT_NEAR(nu_lambda(constant_functional(1.0), 0.1, g), 1.0, 1e-12);
    EXPECT_LE(std::abs(nu_lambda(named("y"), 0.1, g)), 1e-8);
    EXPECT_LE(std::abs(nu_lambda(named("z"), 0.01, g)), 1e-8);
    const double nu = invariant_measure(named("y2"), g).nu;
    double prev = 1e300;
    for (double lambda : {1.0, 0.1, 0.01, 0.001}) {
        const double d = std::abs(nu_lambda(named("y2"), lambda, g) - nu);
        EXPECT_LT(d, prev) << "lambda=" << lambda;
        prev = d;
    }
    EXPECT_THROW(nu_lambda(named("y2"), 0.0, g), ValidationError);
}

// ---------------------------------------------------------------------------
// resolvent

TEST(Resolvent, ConstantSource) {
    const auto g = default_grid();
    for (double lambda : {1.0, 0.1}) {
        const auto d = solve_u_lambda_direct(constant_functional(1.0), lambda, g);
        EXPECT_LE((d.u_lambda.values.array() - 1.0 / lambda).abs().maxCoeff(), 1e-9 / lambda);
        const Field u = u_lambda_by_formula(constant_functional(1.0), lambda, g);
        EXPECT_LE((u.values.array() - 1.0 / lambda).abs().maxCoeff(), 1e-9 / lambda);
    }
}

TEST(Resolvent, FormulaMatchesDirectSolve) {
    const auto g = default_grid();
    const auto f = named("y_plus_y2");
    for (double lambda : {1.0, 0.1, 0.01}) {
        const auto d = solve_u_lambda_direct(f, lambda, g);
        const Field u = u_lambda_by_formula(f, lambda, g);
        EXPECT_LE(sup_diff(d.u_lambda, u), 1e-7) << "lambda=" << lambda;
        EXPECT_TRUE(d.bound_ok);
        EXPECT_LE(d.u_lambda.sup_norm(), d.f_sup / lambda + 1e-8);
    }
}

TEST(Resolvent, ContinuityAcrossTheJunctions) {
    const auto d = solve_u_lambda_direct(named("y_plus_z2"), 0.1, default_grid());
    const Field& u = d.u_lambda;
    EXPECT_NEAR(u.trace(Junction::top_ray), u.trace(Junction::top_interior), 1e-10);
    EXPECT_NEAR(u.trace(Junction::bottom_ray), u.trace(Junction::bottom_interior), 1e-10);
}

TEST(Resolvent, AntisymmetricPartStaysBounded) {
    const auto g = default_grid();
    const auto f = named("y");
    const double a = u_lambda_by_formula(f, 0.01, g).sup_norm();
    const double b = u_lambda_by_formula(f, 0.001, g).sup_norm();
    EXPECT_LT(b, 1.5 * a);
    EXPECT_LT(b, 0.1 * f.bound / 0.001);
}

TEST(Resolvent, AbelLimitAtProbes) {
    const auto g = default_grid();
    const auto f = named("y2");
    const double nu = invariant_measure(f, g).nu;
    const auto probes = probe_points(*g);
    ASSERT_EQ(probes.size(), 5u);
    std::vector<double> prev(probes.size(), 1e300);
    for (double lambda : {1.0, 0.1, 0.01, 0.001}) {
        const Field u = solve_u_lambda_direct(f, lambda, g).u_lambda;
        for (std::size_t k = 0; k < probes.size(); ++k) {
            const double d = std::abs(lambda * u[probes[k].index] - nu);
            EXPECT_LT(d, prev[k]) << probes[k].name << " lambda=" << lambda;
            prev[k] = d;
        }
    }
}

TEST(Resolvent, ProbesSnapToNodes) {
    const auto g = default_grid();
    for (const auto& p : probe_points(*g)) {
        const Node n = g->node(p.index);
        EXPECT_EQ(n.y, p.y);
        EXPECT_EQ(n.z, p.z);
        EXPECT_EQ(n.region, Region::interior);
    }
}

// ---------------------------------------------------------------------------
// corrector

TEST(Corrector, ConstantSourceGivesZero) {
    EXPECT_LE(solve_u_representation(constant_functional(1.0), default_grid()).sup_norm(), 1e-10);
}

TEST(Corrector, SymmetricSourceDropsTraceTerm) {
    const auto g = default_grid();
    const ErgodicSolver es(g);
    const auto f = named("y2");
    const double nu = es.measure(f).nu;
    const Field expect = es.short_cycle(f) - nu * es.unit_cycle();
    EXPECT_LE(sup_diff(solve_u_representation(f, g), expect), 1e-10);
}

TEST(Corrector, SolvesThePoissonProblem) {
    const auto g = default_grid();
    const auto f = named("y_plus_z2");
    const double nu = invariant_measure(f, g).nu;
    const Field u = solve_u_representation(f, g);
    const auto shifted = combine(1.0, f, -nu, constant_functional(1.0));
    EXPECT_LE(centered_residual(u, shifted, 2.0, 0.8), 10.0 * g->hy());
    EXPECT_NEAR(u.trace(Junction::top_ray), u.trace(Junction::top_interior), 1e-6);
    EXPECT_NEAR(u.trace(Junction::bottom_ray), u.trace(Junction::bottom_interior), 1e-6);
}

TEST(Corrector, SolverMethodMatchesFreeFunction) {
    const auto g = default_grid();
    const auto f = named("y_plus_y2");
    const Field a = solve_u_representation(f, g);
    const Field b = ErgodicSolver(g).corrector(f);
    EXPECT_LE(sup_diff(a, b), 1e-10);
}
