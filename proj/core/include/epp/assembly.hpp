#pragma once

#include "epp/grid.hpp"
#include "epp/model.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace epp {

/// How one plastic ray is closed.
///
/// - junction_value: the ray carries the ray equation and its junction
///   unknown is pinned to `value` (the local condition v(0+,Y) = 0 when
///   value = 0).
/// - continuity: the ray carries the ray equation and its junction unknown
///   equals the interior-side trace (nonlocal condition).
/// - dirichlet: every ray node, junction included, is prescribed by
///   `data(y)`.
struct RayClosure {
    enum class Kind { junction_value, continuity, dirichlet };

    Kind kind = Kind::junction_value;
    double value = 0.0;
    std::function<double(double)> data;

    static RayClosure pinned(double v) { return {Kind::junction_value, v, {}}; }
    static RayClosure continuous() { return {Kind::continuity, 0.0, {}}; }
    static RayClosure prescribed(std::function<double(double)> d) { return {Kind::dirichlet, 0.0, std::move(d)}; }
    static RayClosure prescribed(double v) {
        return {Kind::dirichlet, 0.0, [v](double) { return v; }};
    }
};

/// Dirichlet data on the whole vertical segment y = grid.y(column).
struct SegmentCondition {
    int column;
    std::function<double(double z)> data;
};

class BoundaryConditionSpec {
public:
    enum class Kind { local_zero, nonlocal_continuity, dirichlet_ray, dirichlet_segment, mixed };

    BoundaryConditionSpec(RayClosure plus, RayClosure minus, std::vector<SegmentCondition> segments = {});

    /// v(0+,Y) = 0 and v(0-,-Y) = 0.
    static BoundaryConditionSpec local_zero();
    /// u(.,Y) and u(.,-Y) continuous across y = 0.
    static BoundaryConditionSpec nonlocal_continuity();
    /// Prescribed data on both rays.
    static BoundaryConditionSpec dirichlet_ray(std::function<double(double)> plus, std::function<double(double)> minus);
    /// Dirichlet segments on top of a ray closure.
    static BoundaryConditionSpec dirichlet_segment(BoundaryConditionSpec base, std::vector<SegmentCondition> segments);

    Kind kind() const noexcept;
    const RayClosure& plus() const noexcept { return plus_; }
    const RayClosure& minus() const noexcept { return minus_; }
    const std::vector<SegmentCondition>& segments() const noexcept { return segments_; }

private:
    RayClosure plus_;
    RayClosure minus_;
    std::vector<SegmentCondition> segments_;
};

std::string_view to_string(BoundaryConditionSpec::Kind k) noexcept;

enum class RowKind : unsigned char {
    strip,      // lambda + A, interior and inflow edges
    ray,        // lambda + B+- along a plastic ray
    neumann,    // artificial closure at y = +-L
    dirichlet,  // identity row with prescribed value
    link,       // junction continuity u(0+) - u(0-) = 0
};

struct LinearSystem {
    std::shared_ptr<const Grid> grid;
    double lambda = 0.0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    Eigen::VectorXd rhs;
    std::vector<RowKind> rows;
};

/// M-matrix assembly of lambda + A on the strip and lambda + B+- on the rays.
/// y-drift per GridConfig::drift, z-transport upwind. Rows at y = +-L are
/// closed by a zero one-sided difference, junction/ray/segment rows set by `bc`.
LinearSystem assemble_generator(std::shared_ptr<const Grid> grid, double lambda, const BoundaryConditionSpec& bc,
                                const Functional& f);

/// Right-hand side of an already assembled system for a different source
/// term; the boundary data in `bc` must match the one used for the matrix.
Eigen::VectorXd assemble_rhs(const Grid& grid, const std::vector<RowKind>& rows, const BoundaryConditionSpec& bc,
                             const Functional& f);

/// Sparse LU factorization kept alive for repeated right-hand sides.
class LinearSolver {
public:
    explicit LinearSolver(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix, double tol = 1e-10);

    /// Solves and checks ||A x - b||_inf / max(1, ||b||_inf) <= tol, with a
    /// few steps of iterative refinement before giving up.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    double last_residual() const noexcept { return last_residual_; }
    int size() const noexcept { return static_cast<int>(matrix_.rows()); }

private:
    Eigen::SparseMatrix<double, Eigen::ColMajor> matrix_;
    Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor>, Eigen::COLAMDOrdering<int>> lu_;
    double tol_;
    mutable double last_residual_ = 0.0;
};

double relative_residual(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b);

Field solve_linear(const LinearSystem& system, double tol = 1e-10, std::string label = {});

/// One operator (grid, lambda, boundary closure) factored once and solved for
/// any number of source terms.
class FactoredProblem {
public:
    FactoredProblem(std::shared_ptr<const Grid> grid, double lambda, BoundaryConditionSpec bc);

    Field solve(const Functional& f, std::string label = {}) const;
    const LinearSystem& system() const noexcept { return system_; }
    const BoundaryConditionSpec& bc() const noexcept { return bc_; }
    double last_residual() const noexcept { return solver_->last_residual(); }

private:
    BoundaryConditionSpec bc_;
    LinearSystem system_;
    std::shared_ptr<const LinearSolver> solver_;
};

/// Residual of Au = g evaluated with centered differences in y and z,
/// independent of the assembled matrix. Returns the sup over nodes strictly
/// inside the tensor block with |y| <= ymax, |z| <= zmax.
double centered_residual(const Field& u, const Functional& rhs, double ymax, double zmax);

}  // namespace epp
