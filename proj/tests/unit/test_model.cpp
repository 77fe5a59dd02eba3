#include "epp/errors.hpp"
#include "epp/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace epp;

namespace {

const OscillatorParams kUnit(1.0, 1.0, 1.0);
const FunctionalBox kBox{6.0, 1.0};

}  // namespace

TEST(Params, RejectsNonPositiveConstants) {
    EXPECT_THROW(OscillatorParams(0.0, 1.0, 1.0), ValidationError);
    EXPECT_THROW(OscillatorParams(1.0, -1.0, 1.0), ValidationError);
    EXPECT_THROW(OscillatorParams(1.0, 1.0, 0.0), ValidationError);
    EXPECT_NEAR(OscillatorParams(2.0, 1.0, 1.0).sigma_y(), 0.5, 1e-15);
}

TEST(PhasePoint, RegionConstraints) {
    EXPECT_NO_THROW(PhasePoint::on_plus_ray(0.0, 1.0));
    EXPECT_THROW(PhasePoint::on_plus_ray(-0.1, 1.0), ValidationError);
    EXPECT_THROW(PhasePoint::on_minus_ray(0.1, 1.0), ValidationError);
    EXPECT_THROW(PhasePoint::interior(0.0, 1.5, 1.0), ValidationError);
    EXPECT_THROW(PhasePoint(0.3, 0.9, Region::plus_ray, 1.0), ValidationError);
}

TEST(Drift, Examples) {
    EXPECT_EQ(drift(kUnit, PhasePoint::interior(0.0, 0.0, 1.0)), 0.0);
    EXPECT_DOUBLE_EQ(drift(kUnit, PhasePoint::on_plus_ray(2.0, 1.0)), -3.0);
    const OscillatorParams p(0.5, 2.0, 1.0);
    EXPECT_DOUBLE_EQ(drift(p, PhasePoint::on_minus_ray(-1.0, 1.0)), 2.5);
}

TEST(Drift, OddUnderReflection) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uy(-5.0, 5.0), uz(-1.0, 1.0);
    for (int n = 0; n < 200; ++n) {
        const auto p = PhasePoint::interior(uy(rng), uz(rng), 1.0);
        EXPECT_DOUBLE_EQ(drift(kUnit, reflect(p)), -drift(kUnit, p));
    }
}

TEST(Reflect, Examples) {
    EXPECT_EQ(reflect(PhasePoint::on_plus_ray(1.0, 1.0)), PhasePoint::on_minus_ray(-1.0, 1.0));
    EXPECT_EQ(reflect(PhasePoint::interior(0.0, 0.0, 1.0)), PhasePoint::interior(0.0, 0.0, 1.0));
    EXPECT_EQ(reflect(PhasePoint::interior(-0.3, 0.2, 1.0)), PhasePoint::interior(0.3, -0.2, 1.0));
    EXPECT_EQ(reflect(Region::plus_ray), Region::minus_ray);
    EXPECT_EQ(reflect(Region::interior), Region::interior);
}

TEST(Reflect, Involution) {
    const auto p = PhasePoint::on_plus_ray(0.7, 1.0);
    EXPECT_EQ(reflect(reflect(p)), p);
}

TEST(Symmetrize, Examples) {
    const auto y = make_functional("y", kBox);
    const auto y2 = make_functional("y2", kBox);
    const auto mix = make_functional("y_plus_y2", kBox);
    for (double v : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
        for (double w : {-0.9, 0.0, 0.4}) {
            const auto sy = symmetrize(y);
            EXPECT_DOUBLE_EQ(sy.f_sym(v, w, Region::interior), 0.0);
            EXPECT_DOUBLE_EQ(sy.f_asym(v, w, Region::interior), v);
            const auto s2 = symmetrize(y2);
            EXPECT_DOUBLE_EQ(s2.f_sym(v, w, Region::interior), v * v);
            EXPECT_DOUBLE_EQ(s2.f_asym(v, w, Region::interior), 0.0);
            const auto sm = symmetrize(mix);
            EXPECT_NEAR(sm.f_sym(v, w, Region::interior), v * v, 1e-14);
            EXPECT_NEAR(sm.f_asym(v, w, Region::interior), v, 1e-14);
        }
    }
}

TEST(Symmetrize, PartsCarryTagsAndSumBack) {
    const auto f = make_functional("y_plus_z2", kBox);
    const auto s = symmetrize(f);
    EXPECT_EQ(s.f_sym.symmetry, Symmetry::symmetric);
    EXPECT_EQ(s.f_asym.symmetry, Symmetry::antisymmetric);
    EXPECT_EQ(functional_violation(s.f_sym, kBox), 0.0);
    EXPECT_EQ(functional_violation(s.f_asym, kBox), 0.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uy(-6.0, 6.0), uz(-1.0, 1.0);
    for (int n = 0; n < 200; ++n) {
        const double v = uy(rng), w = uz(rng);
        EXPECT_NEAR(s.f_sym(v, w, Region::interior) + s.f_asym(v, w, Region::interior), f(v, w, Region::interior),
                    1e-13);
    }
}

TEST(Catalogue, EveryEntryHonoursItsTagAndBound) {
    for (const auto& name : functional_names()) {
        const auto f = make_functional(name, kBox);
        EXPECT_EQ(f.name, name);
        EXPECT_EQ(functional_violation(f, kBox), 0.0) << name;
    }
}

TEST(Catalogue, MixedOddCubicIsNotAntisymmetric) {
    // y z^3 is even under (y,z) -> (-y,-z); only y^3 is odd
    EXPECT_EQ(make_functional("yz3", kBox).symmetry, Symmetry::symmetric);
    EXPECT_EQ(make_functional("y3", kBox).symmetry, Symmetry::antisymmetric);
    EXPECT_EQ(make_functional("yz3_plus_y3", kBox).symmetry, Symmetry::general);
}

TEST(Catalogue, PlasticIndicator) {
    const auto f = make_functional("plastic_plus", kBox);
    EXPECT_EQ(f(0.5, 1.0, Region::plus_ray), 1.0);
    EXPECT_EQ(f(0.5, 0.99, Region::interior), 0.0);
    EXPECT_EQ(f(-0.5, -1.0, Region::minus_ray), 0.0);
}

TEST(Catalogue, UnknownNameThrows) { EXPECT_THROW(make_functional("nope", kBox), ValidationError); }

TEST(Combine, LinearityAndTag) {
    const auto y = make_functional("y", kBox);
    const auto z = make_functional("z", kBox);
    const auto c = combine(2.0, y, -3.0, z);
    EXPECT_EQ(c.symmetry, Symmetry::antisymmetric);
    EXPECT_DOUBLE_EQ(c(1.5, 0.5, Region::interior), 3.0 - 1.5);
    const auto g = combine(1.0, y, 1.0, make_functional("y2", kBox));
    EXPECT_EQ(g.symmetry, Symmetry::general);
}

TEST(Violation, DetectsWrongTag) {
    auto f = make_functional("y", kBox);
    f.symmetry = Symmetry::symmetric;
    EXPECT_GT(functional_violation(f, kBox), 1.0);
    auto g = make_functional("y2", kBox);
    g.bound = 1.0;
    EXPECT_GT(functional_violation(g, kBox), 1.0);
}
