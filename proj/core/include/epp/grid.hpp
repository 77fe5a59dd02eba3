#pragma once

#include "epp/model.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace epp {

/// Differencing of the velocity drift (c0 y + k z) d_y.
///
/// - upwind: one-sided toward the incoming characteristic everywhere.
/// - hybrid: centered wherever the cell Peclet number |c0 y + k z| hy is at
///   most 1 (neighbor weights stay nonpositive), upwind elsewhere.
///
/// The transport term -y d_z is always upwinded.
enum class DriftScheme { hybrid, upwind };

std::string_view to_string(DriftScheme s) noexcept;
DriftScheme parse_drift_scheme(std::string_view name);

struct GridConfig {
    double L = 6.0;    // velocity truncation half-width
    int Ny = 241;      // odd, so that y = 0 is a node
    int Nz = 81;
    double tol = 1e-10;  // linear residual contract
    DriftScheme drift = DriftScheme::hybrid;
};

/// One-sided junction values at (0, +-Y). The closure of the strip meets a
/// plastic ray at each of these two points and the solution is generally
/// discontinuous there, so each point carries two unknowns.
enum class Junction {
    top_interior,     // v(0-, Y): limit along z = Y from y < 0
    top_ray,          // v(0+, Y): limit along the plus ray
    bottom_interior,  // v(0+, -Y): limit along z = -Y from y > 0
    bottom_ray,       // v(0-, -Y): limit along the minus ray
};

std::string_view to_string(Junction j) noexcept;

struct Node {
    int i;
    int j;
    double y;
    double z;
    Region region;
};

/// Tensor grid on [-L, L] x [-Y, Y]. Node (i, j) has index i * Nz + j; the
/// base node at (0, Y) is the interior-side junction value and the base node
/// at (0, -Y) likewise, while the two ray-side values live at the two extra
/// indices past the tensor block.
class Grid {
public:
    Grid(const OscillatorParams& params, const GridConfig& config);

    const OscillatorParams& params() const noexcept { return params_; }
    const GridConfig& config() const noexcept { return config_; }
    double L() const noexcept { return config_.L; }
    int ny() const noexcept { return config_.Ny; }
    int nz() const noexcept { return config_.Nz; }
    double hy() const noexcept { return hy_; }
    double hz() const noexcept { return hz_; }
    double tol() const noexcept { return config_.tol; }
    int i0() const noexcept { return (config_.Ny - 1) / 2; }

    int size() const noexcept { return config_.Ny * config_.Nz + 2; }
    int index(int i, int j) const noexcept { return i * config_.Nz + j; }
    int junction(Junction which) const noexcept;

    double y(int i) const noexcept { return ys_[static_cast<std::size_t>(i)]; }
    double z(int j) const noexcept { return zs_[static_cast<std::size_t>(j)]; }

    Node node(int idx) const;
    Region region(int i, int j) const noexcept;

    /// Index of the mirror node under (y, z) -> (-y, -z).
    int mirror(int idx) const noexcept;

    int nearest_column(double y) const noexcept;
    int nearest_row(double z) const noexcept;
    /// Nearest tensor node; ray nodes are returned for points on the rays.
    int nearest_index(double y, double z) const noexcept;

private:
    OscillatorParams params_;
    GridConfig config_;
    double hy_;
    double hz_;
    std::vector<double> ys_;
    std::vector<double> zs_;
};

/// Validates the configuration: Ny odd and >= 3, Nz >= 3, L > 3 sigma_y,
/// tol > 0.
std::shared_ptr<const Grid> build_grid(const OscillatorParams& params, const GridConfig& config);

/// A grid function. Values are indexed like Grid nodes, junction extras
/// included.
struct Field {
    std::shared_ptr<const Grid> grid;
    Eigen::VectorXd values;
    std::string label;

    Field() = default;
    Field(std::shared_ptr<const Grid> g, Eigen::VectorXd v, std::string name = {});

    static Field zeros(std::shared_ptr<const Grid> g, std::string name = {});
    /// Samples a functional at every node (region-aware).
    static Field sample(std::shared_ptr<const Grid> g, const Functional& f, std::string name = {});

    double operator[](int idx) const { return values[idx]; }
    double at(int i, int j) const { return values[grid->index(i, j)]; }
    double trace(Junction which) const { return values[grid->junction(which)]; }

    /// Values on the plus ray (sign > 0, y = 0+ .. L) or the minus ray
    /// (sign < 0, y = 0- .. -L), junction value first.
    std::vector<double> ray(int sign) const;
    /// Values on the vertical segment of column i, bottom to top. The top or
    /// bottom entry is the tensor node there (interior-side at i0).
    std::vector<double> column(int i) const;

    double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
    bool all_finite() const { return values.allFinite(); }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Sup of |a - b| over all nodes; the fields must share the grid object.
double sup_diff(const Field& a, const Field& b);

/// Sup of |a(node) - s * a(mirror(node))|; s = +1 checks symmetry, -1
/// antisymmetry.
double mirror_defect(const Field& a, double s);

/// CSV with header `y,z,region,value`, one row per unknown, rows in index
/// order, values printed with 17 significant digits.
void write_field_csv(std::ostream& out, const Field& field);

}  // namespace epp
