#pragma once

// Index-set restriction of the assembled operator, used by the overlapping
// subdomain iteration and the 1-D ray solves.

#include "epp/assembly.hpp"

#include <memory>
#include <vector>

namespace epp::detail {

struct Block {
    std::vector<int> idx;                                  // global indices, ascending
    Eigen::SparseMatrix<double, Eigen::RowMajor> coupling;  // rows of idx, columns outside idx
    std::shared_ptr<const LinearSolver> solver;            // factored restriction to idx x idx

    Block() = default;
    Block(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, std::vector<int> indices, double tol);

    /// x[idx] <- solve(A_SS, b_S - A_S,outside x_outside)
    void solve_into(const Eigen::VectorXd& b, Eigen::VectorXd& x) const;
};

}  // namespace epp::detail
