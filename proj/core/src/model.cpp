#include "epp/model.hpp"

#include "epp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace epp {

OscillatorParams::OscillatorParams(double c0, double k, double Y) : c0_(c0), k_(k), Y_(Y) {
    if (!(c0 > 0.0) || !std::isfinite(c0)) throw ValidationError("c0 must be > 0");
    if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("k must be > 0");
    if (!(Y > 0.0) || !std::isfinite(Y)) throw ValidationError("Y must be > 0");
}

double OscillatorParams::sigma_y() const noexcept { return 1.0 / std::sqrt(2.0 * c0_); }

std::string_view to_string(Region r) noexcept {
    switch (r) {
        case Region::interior: return "interior";
        case Region::plus_ray: return "plus_ray";
        case Region::minus_ray: return "minus_ray";
    }
    return "?";
}

std::string_view to_string(Symmetry s) noexcept {
    switch (s) {
        case Symmetry::symmetric: return "symmetric";
        case Symmetry::antisymmetric: return "antisymmetric";
        case Symmetry::general: return "general";
    }
    return "?";
}

PhasePoint::PhasePoint(double y, double z, Region region, double Y) : y_(y), z_(z), region_(region), Y_(Y) {
    if (!std::isfinite(y) || !std::isfinite(z)) throw ValidationError("phase point must be finite");
    switch (region) {
        case Region::interior:
            if (std::abs(z) > Y) throw ValidationError("interior point needs |z| <= Y");
            break;
        case Region::plus_ray:
            if (z != Y || y < 0.0) throw ValidationError("plus-ray point needs z = Y and y >= 0");
            break;
        case Region::minus_ray:
            if (z != -Y || y > 0.0) throw ValidationError("minus-ray point needs z = -Y and y <= 0");
            break;
    }
}

double drift(const OscillatorParams& params, const PhasePoint& p) noexcept {
    double z = p.z();
    if (p.region() == Region::plus_ray) z = params.Y();
    if (p.region() == Region::minus_ray) z = -params.Y();
    return -(params.c0() * p.y() + params.k() * z);
}

Region reflect(Region r) noexcept {
    switch (r) {
        case Region::plus_ray: return Region::minus_ray;
        case Region::minus_ray: return Region::plus_ray;
        case Region::interior: break;
    }
    return Region::interior;
}

PhasePoint reflect(const PhasePoint& p) { return {-p.y(), -p.z(), reflect(p.region()), p.Y()}; }

SymmetrySplit symmetrize(const Functional& f) {
    auto ev = f.eval;
    Functional sym{f.name + "_sym",
                   [ev](double y, double z, Region r) { return 0.5 * (ev(y, z, r) + ev(-y, -z, reflect(r))); },
                   Symmetry::symmetric, f.bound};
    Functional asym{f.name + "_asym",
                    [ev](double y, double z, Region r) { return 0.5 * (ev(y, z, r) - ev(-y, -z, reflect(r))); },
                    Symmetry::antisymmetric, f.bound};
    return {std::move(sym), std::move(asym)};
}

Functional combine(double a, const Functional& f, double b, const Functional& g) {
    auto fe = f.eval;
    auto ge = g.eval;
    Symmetry s = f.symmetry == g.symmetry ? f.symmetry : Symmetry::general;
    if (b == 0.0) s = f.symmetry;
    if (a == 0.0) s = g.symmetry;
    return {f.name + "+" + g.name,
            [=](double y, double z, Region r) { return a * fe(y, z, r) + b * ge(y, z, r); }, s,
            std::abs(a) * f.bound + std::abs(b) * g.bound};
}

Functional constant_functional(double value) {
    return {"const", [value](double, double, Region) { return value; }, Symmetry::symmetric, std::abs(value)};
}

namespace {

struct Entry {
    Functional::Eval eval;
    Symmetry symmetry;
    std::function<double(const FunctionalBox&)> bound;
};

const std::map<std::string, Entry, std::less<>>& catalogue() {
    using R = Region;
    static const std::map<std::string, Entry, std::less<>> entries = {
        {"one", {[](double, double, R) { return 1.0; }, Symmetry::symmetric, [](const FunctionalBox&) { return 1.0; }}},
        {"y", {[](double y, double, R) { return y; }, Symmetry::antisymmetric, [](const FunctionalBox& b) { return b.L; }}},
        {"z", {[](double, double z, R) { return z; }, Symmetry::antisymmetric, [](const FunctionalBox& b) { return b.Y; }}},
        {"y2", {[](double y, double, R) { return y * y; }, Symmetry::symmetric, [](const FunctionalBox& b) { return b.L * b.L; }}},
        {"z2", {[](double, double z, R) { return z * z; }, Symmetry::symmetric, [](const FunctionalBox& b) { return b.Y * b.Y; }}},
        {"abs_y", {[](double y, double, R) { return std::abs(y); }, Symmetry::symmetric, [](const FunctionalBox& b) { return b.L; }}},
        {"yz", {[](double y, double z, R) { return y * z; }, Symmetry::symmetric, [](const FunctionalBox& b) { return b.L * b.Y; }}},
        {"plastic_plus",
         {[](double, double, R r) { return r == R::plus_ray ? 1.0 : 0.0; }, Symmetry::general,
          [](const FunctionalBox&) { return 1.0; }}},
        {"y_plus_y2", {[](double y, double, R) { return y + y * y; }, Symmetry::general,
                       [](const FunctionalBox& b) { return b.L + b.L * b.L; }}},
        {"y_plus_z2", {[](double y, double z, R) { return y + z * z; }, Symmetry::general,
                       [](const FunctionalBox& b) { return b.L + b.Y * b.Y; }}},
        {"y3", {[](double y, double, R) { return y * y * y; }, Symmetry::antisymmetric,
                [](const FunctionalBox& b) { return b.L * b.L * b.L; }}},
        {"yz3", {[](double y, double z, R) { return y * z * z * z; }, Symmetry::symmetric,
                 [](const FunctionalBox& b) { return b.L * b.Y * b.Y * b.Y; }}},
        {"yz3_plus_y3",
         {[](double y, double z, R) { return y * z * z * z + y * y * y; }, Symmetry::general,
          [](const FunctionalBox& b) { return b.L * b.Y * b.Y * b.Y + b.L * b.L * b.L; }}},
    };
    return entries;
}

}  // namespace

Functional make_functional(std::string_view name, const FunctionalBox& box) {
    const auto& cat = catalogue();
    auto it = cat.find(name);
    if (it == cat.end()) throw ValidationError("unknown functional '" + std::string(name) + "'");
    return {std::string(name), it->second.eval, it->second.symmetry, it->second.bound(box)};
}

std::vector<std::string> functional_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : catalogue()) out.push_back(name);
    return out;
}

double functional_violation(const Functional& f, const FunctionalBox& box, int n) {
    double worst = 0.0;
    auto check = [&](double y, double z, Region r) {
        const double a = f(y, z, r);
        const double b = f(-y, -z, reflect(r));
        worst = std::max(worst, std::abs(a) - f.bound);
        if (f.symmetry == Symmetry::symmetric) worst = std::max(worst, std::abs(a - b));
        if (f.symmetry == Symmetry::antisymmetric) worst = std::max(worst, std::abs(a + b));
    };
    for (int i = 0; i < n; ++i) {
        const double y = -box.L + 2.0 * box.L * i / (n - 1);
        for (int j = 0; j < n; ++j) check(y, -box.Y + 2.0 * box.Y * j / (n - 1), Region::interior);
        if (y >= 0.0) check(y, box.Y, Region::plus_ray);
        if (y <= 0.0) check(y, -box.Y, Region::minus_ray);
    }
    return std::max(worst, 0.0);
}

}  // namespace epp
