#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace epp {

/// Physical constants of the elasto-perfectly-plastic oscillator.
///
/// `c0` is the viscous damping (1/time), `k` the stiffness (1/time^2) and
/// `Y` the elasto-plastic bound on the elastic component z. All three must
/// be strictly positive.
class OscillatorParams {
public:
    OscillatorParams(double c0, double k, double Y);

    double c0() const noexcept { return c0_; }
    double k() const noexcept { return k_; }
    double Y() const noexcept { return Y_; }

    /// Stationary velocity scale of the linear oscillator, 1/sqrt(2 c0).
    double sigma_y() const noexcept;

    bool operator==(const OscillatorParams&) const = default;

private:
    double c0_;
    double k_;
    double Y_;
};

/// Which piece of the state space a point lives on: the open strip |z| < Y
/// (together with its inflow edges), the plastic ray z = Y, y >= 0, or the
/// plastic ray z = -Y, y <= 0.
enum class Region { interior, plus_ray, minus_ray };

std::string_view to_string(Region r) noexcept;

/// A validated point of the closed state space.
class PhasePoint {
public:
    /// Throws ValidationError when the region constraints are violated.
    PhasePoint(double y, double z, Region region, double Y);

    static PhasePoint interior(double y, double z, double Y) { return {y, z, Region::interior, Y}; }
    static PhasePoint on_plus_ray(double y, double Y) { return {y, Y, Region::plus_ray, Y}; }
    static PhasePoint on_minus_ray(double y, double Y) { return {y, -Y, Region::minus_ray, Y}; }

    double y() const noexcept { return y_; }
    double z() const noexcept { return z_; }
    Region region() const noexcept { return region_; }
    double Y() const noexcept { return Y_; }

    bool operator==(const PhasePoint&) const = default;

private:
    double y_;
    double z_;
    Region region_;
    double Y_;
};

/// -(c0 y + k z), with z pinned to +-Y on the plastic rays.
double drift(const OscillatorParams& params, const PhasePoint& p) noexcept;

/// (y, z) -> (-y, -z); the two plastic rays are exchanged.
PhasePoint reflect(const PhasePoint& p);

Region reflect(Region r) noexcept;

enum class Symmetry { symmetric, antisymmetric, general };

std::string_view to_string(Symmetry s) noexcept;

/// A bounded test function on the closed state space, carried as a callable
/// so the same object feeds both the grid solvers and the path simulator.
struct Functional {
    using Eval = std::function<double(double y, double z, Region region)>;

    std::string name;
    Eval eval;
    Symmetry symmetry = Symmetry::general;
    double bound = 0.0;  // declared sup-norm estimate

    double operator()(double y, double z, Region region) const { return eval(y, z, region); }
    double operator()(const PhasePoint& p) const { return eval(p.y(), p.z(), p.region()); }
};

struct SymmetrySplit {
    Functional f_sym;
    Functional f_asym;
};

SymmetrySplit symmetrize(const Functional& f);

/// a*f + b*g; the symmetry tag survives when both operands share it.
Functional combine(double a, const Functional& f, double b, const Functional& g);

Functional constant_functional(double value);

/// Box over which catalogue bounds are computed: |y| <= L, |z| <= Y.
struct FunctionalBox {
    double L;
    double Y;
};

/// Named catalogue entries: one, y, z, y2, z2, abs_y, yz, plastic_plus,
/// plus a few mixed combinations used by the consistency checks
/// (y3, yz3, y_plus_y2, y_plus_z2, yz3_plus_y3).
Functional make_functional(std::string_view name, const FunctionalBox& box);

std::vector<std::string> functional_names();

/// Spot-check the declared symmetry tag and bound on a tensor sample of the
/// box. Returns the largest violation found (0 when consistent).
double functional_violation(const Functional& f, const FunctionalBox& box, int samples_per_axis = 41);

}  // namespace epp
