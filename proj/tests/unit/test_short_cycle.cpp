#include "epp/assembly.hpp"
#include "epp/errors.hpp"
#include "epp/short_cycle.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace epp;

namespace {

const OscillatorParams kUnit(1.0, 1.0, 1.0);

std::shared_ptr<const Grid> default_grid() {
    static const auto g = build_grid(kUnit, GridConfig{});
    return g;
}

std::shared_ptr<const Grid> small_grid() {
    GridConfig c;
    c.Ny = 121;
    c.Nz = 41;
    static const auto g = build_grid(kUnit, c);
    return g;
}

Functional named(const char* n) { return make_functional(n, {6.0, 1.0}); }

}  // namespace

// ---------------------------------------------------------------------------
// plastic-phase profiles

TEST(Phi, VanishesAtTheJunction) {
    for (const char* n : {"one", "y2", "abs_y", "plastic_plus"}) {
        EXPECT_EQ(phi_ray(kUnit, named(n), +1, 0.0), 0.0);
        EXPECT_EQ(phi_ray(kUnit, named(n), -1, 0.0), 0.0);
    }
    EXPECT_EQ(phi_unit(kUnit, 0.0), 0.0);
}

TEST(Phi, RejectsWrongSide) {
    EXPECT_THROW(phi_ray(kUnit, named("one"), +1, -0.5), ValidationError);
    EXPECT_THROW(phi_ray(kUnit, named("one"), -1, 0.5), ValidationError);
    EXPECT_THROW(phi_unit(kUnit, -1.0), ValidationError);
}

TEST(Phi, MatchesTwoPointProblemAtUnitVelocity) {
    const double ref = oracle::phi_bvp(kUnit, named("one"), +1, 1.0);
    EXPECT_NEAR(phi_ray(kUnit, named("one"), +1, 1.0), ref, 1e-6);
}

TEST(Phi, MatchesTwoPointProblemForSeveralSources) {
    const OscillatorParams p(0.7, 1.3, 0.8);
    for (const char* n : {"one", "y2", "abs_y", "y"}) {
        const auto f = named(n);
        for (double y : {0.25, 1.0, 2.5}) {
            EXPECT_NEAR(phi_ray(p, f, +1, y), oracle::phi_bvp(p, f, +1, y), 1e-6) << n << " y=" << y;
            EXPECT_NEAR(phi_ray(p, f, -1, -y), oracle::phi_bvp(p, f, -1, -y), 1e-6) << n << " y=" << -y;
        }
    }
}

TEST(Phi, MirrorRelation) {
    // phi-(-y; f) = phi+(y; f o reflect); equal for symmetric f, opposite for antisymmetric f
    for (double y : {0.3, 1.1, 3.0}) {
        EXPECT_NEAR(phi_ray(kUnit, named("y2"), -1, -y), phi_ray(kUnit, named("y2"), +1, y), 1e-13);
        EXPECT_NEAR(phi_ray(kUnit, named("y"), -1, -y), -phi_ray(kUnit, named("y"), +1, y), 1e-13);
    }
}

TEST(Phi, UnitFormulasAgreeAndRespectLogBound) {
    const auto one = constant_functional(1.0);
    for (int n = 1; n <= 100; ++n) {
        const double y = 0.05 * n;
        const double a = phi_unit(kUnit, y);
        const double b = phi_ray(kUnit, one, +1, y);
        ASSERT_NEAR(a, b, 2e-9) << "y=" << y;
        ASSERT_LE(a, phi_unit_log_bound(kUnit, y)) << "y=" << y;
        ASSERT_LE(b, phi_unit_log_bound(kUnit, y)) << "y=" << y;
    }
}

TEST(Phi, LogBoundAtLargeVelocity) {
    // ratio phi / bound at y = 1000 pinned from the quadrature
    const double y = 1000.0;
    const double ratio = phi_unit(kUnit, y) / phi_unit_log_bound(kUnit, y);
    EXPECT_LT(ratio, 1.0);
    EXPECT_NEAR(ratio, 0.976047515225, 1e-9);
    // the ratio climbs toward 1 along a geometric sequence
    double prev = 0.0;
    for (double v : {1.0, 10.0, 100.0, 1000.0}) {
        const double r = phi_unit(kUnit, v) / phi_unit_log_bound(kUnit, v);
        EXPECT_GT(r, prev);
        prev = r;
    }
}

TEST(Phi, MonotoneAndPositive) {
    double prev = 0.0;
    for (int n = 1; n <= 40; ++n) {
        const double v = phi_ray(kUnit, named("z2"), +1, 0.1 * n);
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(RayProfile, DiscreteProfileIsTheRestrictionOfTheMonolithicSolve) {
    const auto g = small_grid();
    for (const char* n : {"one", "y2"}) {
        const auto f = named(n);
        const Field v = solve_short_cycle(f, 0.0, g);
        const RayProfile plus = ray_profile(g, f, +1);
        const RayProfile minus = ray_profile(g, f, -1);
        const auto rp = v.ray(+1);
        const auto rm = v.ray(-1);
        ASSERT_EQ(rp.size(), plus.values.size());
        for (std::size_t k = 0; k < rp.size(); ++k) EXPECT_NEAR(rp[k], plus.values[k], 1e-10);
        for (std::size_t k = 0; k < rm.size(); ++k) EXPECT_NEAR(rm[k], minus.values[k], 1e-10);
        EXPECT_EQ(plus.values[0], 0.0);
    }
}

TEST(RayProfile, DiscreteProfileApproachesQuadrature) {
    const auto g = default_grid();
    const auto f = named("one");
    const RayProfile d = ray_profile(g, f, +1);
    const RayProfile q = ray_profile_quadrature(*g, f, +1);
    double worst = 0.0;
    for (std::size_t k = 0; k < d.values.size() / 2; ++k) worst = std::max(worst, std::abs(d.values[k] - q.values[k]));
    EXPECT_LT(worst, 1e-3);  // 1.6e-4 measured with hybrid drift
}

// ---------------------------------------------------------------------------
// short cycles and the interior / exterior iteration

TEST(ShortCycle, ZeroSourceGivesZero) {
    EXPECT_EQ(solve_short_cycle(constant_functional(0.0), 0.0, small_grid()).sup_norm(), 0.0);
    const auto [v, rep] = solve_ve(constant_functional(0.0), small_grid());
    EXPECT_EQ(v.sup_norm(), 0.0);
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 1);
    const auto r = solve_v_ray(constant_functional(0.0), +1, small_grid());
    EXPECT_EQ(r.v.sup_norm(), 0.0);
}

TEST(ShortCycle, LocalConditionAtTheJunction) {
    const Field v = solve_short_cycle(named("y2"), 0.0, default_grid());
    EXPECT_NEAR(v.trace(Junction::top_ray), 0.0, 1e-12);
    EXPECT_NEAR(v.trace(Junction::bottom_ray), 0.0, 1e-12);
    EXPECT_GT(v.trace(Junction::top_interior), 0.0);
}

TEST(Contraction, CertificateInUnitInterval) {
    const auto g = default_grid();
    const double s = kUnit.sigma_y();
    const double rho = contraction_factor(g, s, 2.0 * s);
    EXPECT_GT(rho, 0.0);
    EXPECT_LT(rho, 1.0);
}

TEST(Contraction, RegressionBaseline) {
    // default grid, hybrid drift, ybar = 1, ybar1 = 2
    EXPECT_NEAR(contraction_factor(default_grid(), 1.0, 2.0), 0.884443438693, 1e-9);
}

TEST(Contraction, GrowsAsOverlapShrinks) {
    const auto g = default_grid();
    double prev = 1.0;
    for (double b1 : {1.2, 1.5, 2.0, 2.5, 3.0}) {
        const double rho = contraction_factor(g, 1.0, b1);
        EXPECT_LT(rho, prev) << "ybar1=" << b1;
        prev = rho;
    }
    EXPECT_GT(contraction_factor(g, 1.0, 1.1), 0.99);
}

TEST(Contraction, RejectsBadOverlap) {
    const auto g = default_grid();
    EXPECT_THROW(contraction_factor(g, 1.0, 1.0), ValidationError);
    EXPECT_THROW(contraction_factor(g, 1.0, 1.05), ValidationError);
    EXPECT_THROW(contraction_factor(g, 0.0, 1.0), ValidationError);
    EXPECT_THROW(contraction_factor(g, 1.0, 5.95), ValidationError);
    // the iteration needs prescribed rays
    const auto sys = assemble_generator(g, 0.0, BoundaryConditionSpec::local_zero(), constant_functional(1.0));
    EXPECT_THROW(SchwarzSolver(sys, 1.0, 2.0), ValidationError);
}

TEST(Iteration, ResidualsContractWithinCertificate) {
    const auto [v, rep] = solve_ve(named("y2"), default_grid());
    EXPECT_TRUE(rep.converged);
    EXPECT_GT(rep.iterations, 2);
    EXPECT_LE(rep.measured_ratio, rep.certified_rho + 0.05);
    EXPECT_LE(rep.residuals.back(), 1e-9);
    EXPECT_EQ(rep.trace_plus.size(), static_cast<std::size_t>(rep.iterations));
}

TEST(Iteration, ExteriorBarrierAndSign) {
    const auto [v, rep] = solve_ve(named("z2"), default_grid());
    EXPECT_LE(rep.exterior_bound_excess, 1e-8);
    EXPECT_GE(rep.exterior_min, -1e-12);
    EXPECT_GE(v.values.minCoeff(), -1e-12);
}

TEST(Iteration, BudgetExhaustionIsAnError) {
    ShortCycleOptions o;
    o.budget = 2;
    try {
        (void)solve_ve(named("y2"), default_grid(), o);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_GT(e.achieved(), o.tol);
    }
}

TEST(Iteration, InteriorPartMatchesMonolithicSolve) {
    // v_e solves the same system as a direct solve with zero rays
    const auto g = default_grid();
    const auto f = named("y2");
    const auto [ve, rep] = solve_ve(f, g);
    const Field direct = solve_linear(assemble_generator(
        g, 0.0, BoundaryConditionSpec::dirichlet_ray([](double) { return 0.0; }, [](double) { return 0.0; }), f));
    EXPECT_LE(sup_diff(ve, direct), 1e-8);
}

TEST(VRay, VanishesOnOppositeRay) {
    const auto g = default_grid();
    const auto r = solve_v_ray(named("one"), +1, g);
    for (double v : r.v.ray(-1)) EXPECT_NEAR(v, 0.0, 1e-10);
    EXPECT_NEAR(r.v.trace(Junction::bottom_ray), 0.0, 1e-10);
    EXPECT_TRUE(r.report.converged);
    // v+ = phi+ on its own ray
    const RayProfile phi = ray_profile(g, named("one"), +1);
    const auto own = r.v.ray(+1);
    for (std::size_t k = 0; k < own.size(); ++k) EXPECT_NEAR(own[k], phi.values[k], 1e-12);
}

TEST(VRay, MirrorPair) {
    const auto g = default_grid();
    const auto p = solve_v_ray(named("y2"), +1, g);
    const auto m = solve_v_ray(named("y2"), -1, g);
    double worst = 0.0;
    for (int idx = 0; idx < g->size(); ++idx) worst = std::max(worst, std::abs(p.v[idx] - m.v[g->mirror(idx)]));
    EXPECT_LE(worst, 1e-8);
}

class Decompose : public ::testing::TestWithParam<const char*> {};

TEST_P(Decompose, AgreesWithMonolithicSolve) {
    const auto g = default_grid();
    const auto f = named(GetParam());
    const Decomposition d = decompose_short_cycle(f, g);
    const Field mono = solve_short_cycle(f, 0.0, g);
    EXPECT_LE(sup_diff(d.total, mono), 5e-8);
    EXPECT_LE(sup_diff(d.v_e + d.v_plus + d.v_minus, d.total), 1e-14 * mono.sup_norm() + 1e-14);
}

INSTANTIATE_TEST_SUITE_P(Sources, Decompose, ::testing::Values("one", "y2", "z2", "y_plus_z2"));
