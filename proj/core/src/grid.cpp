#include "epp/grid.hpp"

#include "epp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace epp {

std::string_view to_string(Junction j) noexcept {
    switch (j) {
        case Junction::top_interior: return "(0-,Y)";
        case Junction::top_ray: return "(0+,Y)";
        case Junction::bottom_interior: return "(0+,-Y)";
        case Junction::bottom_ray: return "(0-,-Y)";
    }
    return "?";
}

std::string_view to_string(DriftScheme s) noexcept { return s == DriftScheme::upwind ? "upwind" : "hybrid"; }

DriftScheme parse_drift_scheme(std::string_view name) {
    if (name == "hybrid") return DriftScheme::hybrid;
    if (name == "upwind") return DriftScheme::upwind;
    throw ValidationError("drift scheme must be 'hybrid' or 'upwind', got '" + std::string(name) + "'");
}

Grid::Grid(const OscillatorParams& params, const GridConfig& config) : params_(params), config_(config) {
    if (config.Ny < 3 || config.Ny % 2 == 0) throw ValidationError("Ny must be odd and >= 3 so that y = 0 is a node");
    if (config.Nz < 3) throw ValidationError("Nz must be >= 3");
    if (!(config.L > 0.0)) throw ValidationError("L must be > 0");
    if (config.L <= 3.0 * params.sigma_y())
        throw ValidationError("L must exceed 3 sigma_y = " + std::to_string(3.0 * params.sigma_y()));
    if (!(config.tol > 0.0)) throw ValidationError("tol must be > 0");

    const int half = (config.Ny - 1) / 2;
    hy_ = config.L / half;
    hz_ = 2.0 * params.Y() / (config.Nz - 1);

    // Integer offsets keep the node set exactly symmetric under y -> -y, z -> -z.
    ys_.resize(static_cast<std::size_t>(config.Ny));
    for (int i = 0; i < config.Ny; ++i) ys_[static_cast<std::size_t>(i)] = (i - half) * hy_;
    ys_.front() = -config.L;
    ys_.back() = config.L;
    ys_[static_cast<std::size_t>(half)] = 0.0;

    const double halfz = params.Y() / (config.Nz - 1);
    zs_.resize(static_cast<std::size_t>(config.Nz));
    for (int j = 0; j < config.Nz; ++j) zs_[static_cast<std::size_t>(j)] = (2 * j - (config.Nz - 1)) * halfz;
    zs_.front() = -params.Y();
    zs_.back() = params.Y();
}

int Grid::junction(Junction which) const noexcept {
    switch (which) {
        case Junction::top_interior: return index(i0(), nz() - 1);
        case Junction::top_ray: return ny() * nz();
        case Junction::bottom_interior: return index(i0(), 0);
        case Junction::bottom_ray: return ny() * nz() + 1;
    }
    return -1;
}

Region Grid::region(int i, int j) const noexcept {
    if (j == nz() - 1 && i > i0()) return Region::plus_ray;
    if (j == 0 && i < i0()) return Region::minus_ray;
    return Region::interior;
}

Node Grid::node(int idx) const {
    if (idx < 0 || idx >= size()) throw ValidationError("node index out of range");
    if (idx == junction(Junction::top_ray)) return {i0(), nz() - 1, 0.0, params_.Y(), Region::plus_ray};
    if (idx == junction(Junction::bottom_ray)) return {i0(), 0, 0.0, -params_.Y(), Region::minus_ray};
    const int i = idx / nz();
    const int j = idx % nz();
    return {i, j, y(i), z(j), region(i, j)};
}

int Grid::mirror(int idx) const noexcept {
    if (idx == junction(Junction::top_ray)) return junction(Junction::bottom_ray);
    if (idx == junction(Junction::bottom_ray)) return junction(Junction::top_ray);
    const int i = idx / nz();
    const int j = idx % nz();
    return index(ny() - 1 - i, nz() - 1 - j);
}

int Grid::nearest_column(double yv) const noexcept {
    const int i = static_cast<int>(std::lround(yv / hy_)) + i0();
    return std::clamp(i, 0, ny() - 1);
}

int Grid::nearest_row(double zv) const noexcept {
    const int j = static_cast<int>(std::lround((zv + params_.Y()) / hz_));
    return std::clamp(j, 0, nz() - 1);
}

int Grid::nearest_index(double yv, double zv) const noexcept { return index(nearest_column(yv), nearest_row(zv)); }

std::shared_ptr<const Grid> build_grid(const OscillatorParams& params, const GridConfig& config) {
    return std::make_shared<const Grid>(params, config);
}

Field::Field(std::shared_ptr<const Grid> g, Eigen::VectorXd v, std::string name)
    : grid(std::move(g)), values(std::move(v)), label(std::move(name)) {
    if (!grid) throw ValidationError("field needs a grid");
    if (values.size() != grid->size()) throw ValidationError("field size does not match grid");
}

Field Field::zeros(std::shared_ptr<const Grid> g, std::string name) {
    const int n = g->size();
    return {std::move(g), Eigen::VectorXd::Zero(n), std::move(name)};
}

Field Field::sample(std::shared_ptr<const Grid> g, const Functional& f, std::string name) {
    Eigen::VectorXd v(g->size());
    for (int idx = 0; idx < g->size(); ++idx) {
        const Node n = g->node(idx);
        v[idx] = f(n.y, n.z, n.region);
    }
    return {std::move(g), std::move(v), name.empty() ? f.name : std::move(name)};
}

std::vector<double> Field::ray(int sign) const {
    std::vector<double> out;
    const Grid& g = *grid;
    if (sign > 0) {
        out.push_back(trace(Junction::top_ray));
        for (int i = g.i0() + 1; i < g.ny(); ++i) out.push_back(at(i, g.nz() - 1));
    } else {
        out.push_back(trace(Junction::bottom_ray));
        for (int i = g.i0() - 1; i >= 0; --i) out.push_back(at(i, 0));
    }
    return out;
}

std::vector<double> Field::column(int i) const {
    std::vector<double> out;
    for (int j = 0; j < grid->nz(); ++j) out.push_back(at(i, j));
    return out;
}

namespace {
void require_same_grid(const Field& a, const Field& b) {
    if (a.grid != b.grid) throw ValidationError("fields live on different grid objects");
}
}  // namespace

Field& Field::operator+=(const Field& other) {
    require_same_grid(*this, other);
    values += other.values;
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(*this, other);
    values -= other.values;
    return *this;
}

Field& Field::operator*=(double s) {
    values *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

double sup_diff(const Field& a, const Field& b) {
    require_same_grid(a, b);
    return (a.values - b.values).cwiseAbs().maxCoeff();
}

double mirror_defect(const Field& a, double s) {
    double worst = 0.0;
    for (int idx = 0; idx < a.grid->size(); ++idx)
        worst = std::max(worst, std::abs(a.values[idx] - s * a.values[a.grid->mirror(idx)]));
    return worst;
}

void write_field_csv(std::ostream& out, const Field& field) {
    const auto old_flags = out.flags();
    const auto old_prec = out.precision();
    out << "y,z,region,value\n" << std::setprecision(17);
    for (int idx = 0; idx < field.grid->size(); ++idx) {
        const Node n = field.grid->node(idx);
        out << n.y << ',' << n.z << ',' << to_string(n.region) << ',' << field.values[idx] << '\n';
    }
    out.flags(old_flags);
    out.precision(old_prec);
}

}  // namespace epp
