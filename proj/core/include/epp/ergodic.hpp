#pragma once

#include "epp/assembly.hpp"
#include "epp/grid.hpp"
#include "epp/model.hpp"
#include "epp/short_cycle.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace epp {

/// Splitting function pi+ (sign > 0) or pi- (sign < 0).
///
/// lambda = 0: A pi = 0 with pi = 1 on the own ray and 0 on the opposite ray.
/// lambda > 0: (lambda + A) pi = 0, the own ray carries lambda + B with the
/// junction pinned to 1, the opposite ray is held at 0.
Field solve_pi(int sign, double lambda, std::shared_ptr<const Grid> grid);

struct InvariantMeasureResult {
    double nu = 0.0;
    double lambda = 0.0;             // 0 for the invariant measure itself
    double numerator_top = 0.0;      // v(0-,Y;f)
    double numerator_bottom = 0.0;   // v(0+,-Y;f)
    double denominator = 0.0;        // 2 v(0-,Y;1)
    std::shared_ptr<const Grid> grid;
    std::string method;
};

/// One operator family (grid, lambda) with the short-cycle factorization and
/// the pi fields kept for reuse across functionals.
class ErgodicSolver {
public:
    ErgodicSolver(std::shared_ptr<const Grid> grid, double lambda = 0.0);

    double lambda() const noexcept { return lambda_; }
    const std::shared_ptr<const Grid>& grid() const noexcept { return grid_; }

    /// v_lambda(.; f) with the local junction conditions.
    Field short_cycle(const Functional& f) const { return cycle_.solve(f); }
    const Field& unit_cycle() const noexcept { return unit_; }
    const Field& pi_plus() const;
    const Field& pi_minus() const;

    /// (v(0-,Y;f) + v(0+,-Y;f)) / (2 v(0-,Y;1)), with the unit traces checked
    /// for equality.
    InvariantMeasureResult measure(const Functional& f) const;
    InvariantMeasureResult measure_from(const Field& v) const;

    /// Resolvent from the short cycles and pi_lambda (lambda > 0).
    Field resolvent_by_formula(const Functional& f) const;

    /// Corrector v(f) - nu(f) v(1) + (pi+ - pi-)(v(0-,Y;f) - v(0+,-Y;f)) / (4 pi-(0-,Y))
    /// (lambda = 0).
    Field corrector(const Functional& f) const;

private:
    std::shared_ptr<const Grid> grid_;
    double lambda_;
    ShortCycleSolver cycle_;
    Field unit_;
    mutable std::optional<Field> pi_plus_;
    mutable std::optional<Field> pi_minus_;
};

InvariantMeasureResult invariant_measure(const Functional& f, std::shared_ptr<const Grid> grid);

/// Ratio of v_lambda traces; lambda > 0.
double nu_lambda(const Functional& f, double lambda, std::shared_ptr<const Grid> grid);

struct ResolventPair {
    double lambda = 0.0;
    Field u_lambda;
    double nu_lambda = 0.0;
    double f_sup = 0.0;         // sup |f| over the grid nodes
    double bound_excess = 0.0;  // max(0, ||u||_inf - f_sup / lambda)
    bool bound_ok = true;       // bound_excess <= 1e-8
};

/// (lambda + A) u = f with u continuous across y = 0 on z = +-Y.
ResolventPair solve_u_lambda_direct(const Functional& f, double lambda, std::shared_ptr<const Grid> grid);

/// Same resolvent assembled from v_lambda and pi_lambda: the symmetric part
/// of f adds a multiple of 1/lambda - v_lambda(.;1), the antisymmetric part
/// a multiple of pi+_lambda - pi-_lambda.
Field u_lambda_by_formula(const Functional& f, double lambda, std::shared_ptr<const Grid> grid);

/// Ergodic corrector u(.; f) with A u = f - nu(f) and continuous traces.
Field solve_u_representation(const Functional& f, std::shared_ptr<const Grid> grid);

/// Diagnostic points (0,0), (+-sigma_y, 0), (0, +-Y/2), snapped to nodes.
struct Probe {
    std::string name;
    double y;
    double z;
    int index;
};
std::vector<Probe> probe_points(const Grid& grid);

}  // namespace epp
