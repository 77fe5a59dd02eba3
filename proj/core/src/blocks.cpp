#include "blocks.hpp"

#include <algorithm>

namespace epp::detail {

Block::Block(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, std::vector<int> indices, double tol)
    : idx(std::move(indices)) {
    std::sort(idx.begin(), idx.end());
    const int n = static_cast<int>(a.rows());
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    for (std::size_t k = 0; k < idx.size(); ++k) local[static_cast<std::size_t>(idx[k])] = static_cast<int>(k);

    std::vector<Eigen::Triplet<double>> inner;
    std::vector<Eigen::Triplet<double>> outer;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, idx[k]); it; ++it) {
            const int lc = local[static_cast<std::size_t>(it.col())];
            if (lc >= 0)
                inner.emplace_back(static_cast<int>(k), lc, it.value());
            else
                outer.emplace_back(static_cast<int>(k), static_cast<int>(it.col()), it.value());
        }
    }
    const int m = static_cast<int>(idx.size());
    Eigen::SparseMatrix<double, Eigen::RowMajor> a_ss(m, m);
    a_ss.setFromTriplets(inner.begin(), inner.end());
    coupling.resize(m, n);
    coupling.setFromTriplets(outer.begin(), outer.end());
    coupling.makeCompressed();
    solver = std::make_shared<const LinearSolver>(a_ss, tol);
}

void Block::solve_into(const Eigen::VectorXd& b, Eigen::VectorXd& x) const {
    Eigen::VectorXd rhs = -(coupling * x);
    for (std::size_t k = 0; k < idx.size(); ++k) rhs[static_cast<Eigen::Index>(k)] += b[idx[k]];
    const Eigen::VectorXd xs = solver->solve(rhs);
    for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = xs[static_cast<Eigen::Index>(k)];
}

}  // namespace epp::detail
