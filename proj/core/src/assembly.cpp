#include "epp/assembly.hpp"

#include "epp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace epp {

BoundaryConditionSpec::BoundaryConditionSpec(RayClosure plus, RayClosure minus, std::vector<SegmentCondition> segments)
    : plus_(std::move(plus)), minus_(std::move(minus)), segments_(std::move(segments)) {
    for (const RayClosure* rc : {&plus_, &minus_})
        if (rc->kind == RayClosure::Kind::dirichlet && !rc->data)
            throw ValidationError("dirichlet ray closure requires data");
    for (const auto& s : segments_)
        if (!s.data) throw ValidationError("dirichlet segment requires data");
}

BoundaryConditionSpec BoundaryConditionSpec::local_zero() { return {RayClosure::pinned(0.0), RayClosure::pinned(0.0)}; }

BoundaryConditionSpec BoundaryConditionSpec::nonlocal_continuity() {
    return {RayClosure::continuous(), RayClosure::continuous()};
}

BoundaryConditionSpec BoundaryConditionSpec::dirichlet_ray(std::function<double(double)> plus,
                                                           std::function<double(double)> minus) {
    return {RayClosure::prescribed(std::move(plus)), RayClosure::prescribed(std::move(minus))};
}

BoundaryConditionSpec BoundaryConditionSpec::dirichlet_segment(BoundaryConditionSpec base,
                                                               std::vector<SegmentCondition> segments) {
    if (segments.empty()) throw ValidationError("dirichlet-segment condition needs at least one segment");
    return {base.plus_, base.minus_, std::move(segments)};
}

BoundaryConditionSpec::Kind BoundaryConditionSpec::kind() const noexcept {
    using K = RayClosure::Kind;
    if (!segments_.empty()) return Kind::dirichlet_segment;
    if (plus_.kind == K::junction_value && minus_.kind == K::junction_value && plus_.value == 0.0 &&
        minus_.value == 0.0)
        return Kind::local_zero;
    if (plus_.kind == K::continuity && minus_.kind == K::continuity) return Kind::nonlocal_continuity;
    if (plus_.kind == K::dirichlet || minus_.kind == K::dirichlet) {
        if (plus_.kind == minus_.kind) return Kind::dirichlet_ray;
    }
    return Kind::mixed;
}

std::string_view to_string(BoundaryConditionSpec::Kind k) noexcept {
    using K = BoundaryConditionSpec::Kind;
    switch (k) {
        case K::local_zero: return "local-zero";
        case K::nonlocal_continuity: return "nonlocal-continuity";
        case K::dirichlet_ray: return "dirichlet-ray";
        case K::dirichlet_segment: return "dirichlet-segment";
        case K::mixed: return "mixed";
    }
    return "?";
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Row builder for lambda - L with L = 1/2 d_yy + b d_y + c d_z.
struct RowWriter {
    std::vector<Triplet>& trips;
    int row;
    double diag = 0.0;

    void add(int col, double v) {
        if (v != 0.0) trips.emplace_back(row, col, v);
    }
    void finish() { trips.emplace_back(row, row, diag); }
};

struct DriftWeights {
    double left;
    double right;
    double diag;
};

// Weights of -1/2 d_yy + a d_y on (i-1, i+1) (entered with a minus sign) and
// the extra diagonal.
DriftWeights drift_weights(DriftScheme scheme, double a, double hy, double diff) {
    if (scheme == DriftScheme::hybrid && std::abs(a) * hy <= 1.0)
        return {diff + 0.5 * a / hy, diff - 0.5 * a / hy, 0.0};
    if (a > 0.0) return {diff + a / hy, diff, a / hy};
    return {diff, diff - a / hy, -a / hy};
}

const SegmentCondition* segment_at(const BoundaryConditionSpec& bc, int i) {
    for (const auto& s : bc.segments())
        if (s.column == i) return &s;
    return nullptr;
}

// Classifies rows and writes the matrix. Source terms are filled separately.
std::vector<RowKind> build_matrix(const Grid& g, double lambda, const BoundaryConditionSpec& bc,
                                  std::vector<Triplet>& trips) {
    const OscillatorParams& p = g.params();
    const int ny = g.ny();
    const int nz = g.nz();
    const int i0 = g.i0();
    const double hy = g.hy();
    const double hz = g.hz();
    const double diff = 0.5 / (hy * hy);
    const int top_ray = g.junction(Junction::top_ray);
    const int bottom_ray = g.junction(Junction::bottom_ray);

    std::vector<RowKind> rows(static_cast<std::size_t>(g.size()), RowKind::strip);
    trips.reserve(static_cast<std::size_t>(g.size()) * 5);

    for (const auto& s : bc.segments())
        if (s.column < 0 || s.column >= ny || s.column == i0)
            throw ValidationError("dirichlet segment column out of range or on y = 0");

    auto identity = [&](int idx) {
        trips.emplace_back(idx, idx, 1.0);
        rows[static_cast<std::size_t>(idx)] = RowKind::dirichlet;
    };
    auto neumann = [&](int idx, int inward) {
        trips.emplace_back(idx, idx, 1.0);
        trips.emplace_back(idx, inward, -1.0);
        rows[static_cast<std::size_t>(idx)] = RowKind::neumann;
    };

    // Ray row: lambda - 1/2 d_yy + a d_y with a = c0 y +- kY.
    auto ray_row = [&](int idx, double a, int left, int right) {
        RowWriter w{trips, idx, lambda + 2.0 * diff};
        const auto [cl, cr, extra] = drift_weights(g.config().drift, a, hy, diff);
        w.diag += extra;
        w.add(left, -cl);
        w.add(right, -cr);
        w.finish();
        rows[static_cast<std::size_t>(idx)] = RowKind::ray;
    };

    for (int i = 0; i < ny; ++i) {
        const SegmentCondition* seg = segment_at(bc, i);
        const double y = g.y(i);
        for (int j = 0; j < nz; ++j) {
            const int idx = g.index(i, j);
            if (seg) {
                identity(idx);
                continue;
            }
            const Region r = g.region(i, j);
            if (r == Region::plus_ray) {
                if (bc.plus().kind == RayClosure::Kind::dirichlet) {
                    identity(idx);
                } else if (i == ny - 1) {
                    neumann(idx, g.index(i - 1, j));
                } else {
                    const int left = (i == i0 + 1) ? top_ray : g.index(i - 1, j);
                    ray_row(idx, p.c0() * y + p.k() * p.Y(), left, g.index(i + 1, j));
                }
                continue;
            }
            if (r == Region::minus_ray) {
                if (bc.minus().kind == RayClosure::Kind::dirichlet) {
                    identity(idx);
                } else if (i == 0) {
                    neumann(idx, g.index(i + 1, j));
                } else {
                    const int right = (i == i0 - 1) ? bottom_ray : g.index(i + 1, j);
                    ray_row(idx, p.c0() * y - p.k() * p.Y(), g.index(i - 1, j), right);
                }
                continue;
            }
            if (i == 0) {
                neumann(idx, g.index(1, j));
                continue;
            }
            if (i == ny - 1) {
                neumann(idx, g.index(ny - 2, j));
                continue;
            }
            // Strip row: lambda - 1/2 d_yy + a d_y - y d_z, a = c0 y + k z.
            const double a = p.c0() * y + p.k() * g.z(j);
            RowWriter w{trips, idx, lambda + 2.0 * diff};
            const auto [cl, cr, extra] = drift_weights(g.config().drift, a, hy, diff);
            w.diag += extra;
            w.add(g.index(i - 1, j), -cl);
            w.add(g.index(i + 1, j), -cr);
            if (y > 0.0) {
                // transport toward z = Y; (i, nz - 1) is a ray node here, never out of range
                w.diag += y / hz;
                w.add(g.index(i, j + 1), -y / hz);
            } else if (y < 0.0) {
                w.diag -= y / hz;
                w.add(g.index(i, j - 1), y / hz);
            }
            w.finish();
        }
    }

    auto junction_row = [&](int idx, int interior, const RayClosure& rc) {
        switch (rc.kind) {
            case RayClosure::Kind::junction_value:
            case RayClosure::Kind::dirichlet: identity(idx); break;
            case RayClosure::Kind::continuity:
                trips.emplace_back(idx, idx, 1.0);
                trips.emplace_back(idx, interior, -1.0);
                rows[static_cast<std::size_t>(idx)] = RowKind::link;
                break;
        }
    };
    junction_row(top_ray, g.junction(Junction::top_interior), bc.plus());
    junction_row(bottom_ray, g.junction(Junction::bottom_interior), bc.minus());
    return rows;
}

}  // namespace

Eigen::VectorXd assemble_rhs(const Grid& g, const std::vector<RowKind>& rows, const BoundaryConditionSpec& bc,
                             const Functional& f) {
    Eigen::VectorXd b(g.size());
    const int top_ray = g.junction(Junction::top_ray);
    const int bottom_ray = g.junction(Junction::bottom_ray);
    for (int idx = 0; idx < g.size(); ++idx) {
        const Node n = g.node(idx);
        switch (rows[static_cast<std::size_t>(idx)]) {
            case RowKind::strip:
            case RowKind::ray: b[idx] = f(n.y, n.z, n.region); break;
            case RowKind::neumann:
            case RowKind::link: b[idx] = 0.0; break;
            case RowKind::dirichlet: {
                if (const SegmentCondition* seg = segment_at(bc, n.i); seg && idx != top_ray && idx != bottom_ray) {
                    b[idx] = seg->data(n.z);
                    break;
                }
                const RayClosure& rc = (n.region == Region::plus_ray) ? bc.plus() : bc.minus();
                if (rc.kind == RayClosure::Kind::dirichlet)
                    b[idx] = rc.data(n.y);
                else
                    b[idx] = rc.value;  // pinned junction
                break;
            }
        }
    }
    return b;
}

LinearSystem assemble_generator(std::shared_ptr<const Grid> grid, double lambda, const BoundaryConditionSpec& bc,
                                const Functional& f) {
    if (!grid) throw ValidationError("assembly needs a grid");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be >= 0");
    std::vector<Triplet> trips;
    LinearSystem sys;
    sys.grid = grid;
    sys.lambda = lambda;
    sys.rows = build_matrix(*grid, lambda, bc, trips);
    sys.matrix.resize(grid->size(), grid->size());
    sys.matrix.setFromTriplets(trips.begin(), trips.end());
    sys.matrix.makeCompressed();
    sys.rhs = assemble_rhs(*grid, sys.rows, bc, f);
    return sys;
}

double relative_residual(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b) {
    const double bn = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
    const Eigen::VectorXd r = a * x - b;
    return (r.size() ? r.cwiseAbs().maxCoeff() : 0.0) / std::max(1.0, bn);
}

LinearSolver::LinearSolver(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix, double tol)
    : matrix_(matrix), tol_(tol) {
    matrix_.makeCompressed();
    lu_.analyzePattern(matrix_);
    lu_.factorize(matrix_);
    if (lu_.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + lu_.lastErrorMessage());
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& rhs) const {
    if (!rhs.allFinite()) throw SolverError("right-hand side contains NaN/Inf");
    Eigen::VectorXd x = lu_.solve(rhs);
    const double bn = std::max(1.0, rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0);
    for (int sweep = 0;; ++sweep) {
        if (!x.allFinite()) throw SolverError("linear solve produced NaN/Inf");
        const Eigen::VectorXd r = rhs - matrix_ * x;
        last_residual_ = r.cwiseAbs().maxCoeff() / bn;
        if (last_residual_ <= 0.01 * tol_ || sweep == 3) break;
        x += lu_.solve(r);
    }
    if (last_residual_ > tol_) {
        std::ostringstream msg;
        msg << "linear residual " << last_residual_ << " above tolerance " << tol_;
        throw SolverError(msg.str(), last_residual_);
    }
    return x;
}

Field solve_linear(const LinearSystem& system, double tol, std::string label) {
    LinearSolver solver(system.matrix, tol);
    return {system.grid, solver.solve(system.rhs), std::move(label)};
}

FactoredProblem::FactoredProblem(std::shared_ptr<const Grid> grid, double lambda, BoundaryConditionSpec bc)
    : bc_(std::move(bc)),
      system_(assemble_generator(std::move(grid), lambda, bc_, constant_functional(0.0))),
      solver_(std::make_shared<const LinearSolver>(system_.matrix, system_.grid->tol())) {}

Field FactoredProblem::solve(const Functional& f, std::string label) const {
    const Eigen::VectorXd b = assemble_rhs(*system_.grid, system_.rows, bc_, f);
    return {system_.grid, solver_->solve(b), label.empty() ? f.name : std::move(label)};
}

double centered_residual(const Field& u, const Functional& rhs, double ymax, double zmax) {
    const Grid& g = *u.grid;
    const OscillatorParams& p = g.params();
    const double hy = g.hy();
    const double hz = g.hz();
    double worst = 0.0;
    for (int i = 1; i < g.ny() - 1; ++i) {
        const double y = g.y(i);
        if (std::abs(y) > ymax) continue;
        for (int j = 1; j < g.nz() - 1; ++j) {
            const double z = g.z(j);
            if (std::abs(z) > zmax) continue;
            const double uyy = (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) / (hy * hy);
            const double uy = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * hy);
            const double uz = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * hz);
            const double au = -0.5 * uyy + (p.c0() * y + p.k() * z) * uy - y * uz;
            worst = std::max(worst, std::abs(au - rhs(y, z, Region::interior)));
        }
    }
    return worst;
}

}  // namespace epp
