#pragma once

// Second-order summation-by-parts first-derivative operator on a uniform grid.
//
//   P = h diag(1/2, 1, ..., 1, 1/2),  D = P^{-1} Q,
//   Q + Q^T = diag(-1, 0, ..., 0, 1).
//
// Interior rows use the central stencil (-1/2, 0, 1/2); the boundary rows are
// one-sided (-1/2, 1/2).

#include "phnode/linalg.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace phnode {

using SpMat = Eigen::SparseMatrix<double>;

struct SBPOperator {
    std::vector<double> grid;
    std::vector<double> weights;
    SpMat Q;
    SpMat D;

    Index num_nodes() const { return static_cast<Index>(grid.size()); }
    double spacing() const { return grid[1] - grid[0]; }

    /// diag(-1, 0, ..., 0, 1).
    SpMat boundary_matrix() const {
        SpMat E(num_nodes(), num_nodes());
        E.insert(0, 0) = -1.0;
        E.insert(num_nodes() - 1, num_nodes() - 1) = 1.0;
        return E;
    }

    RVec weight_vector() const { return Eigen::Map<const RVec>(weights.data(), Index(weights.size())); }
    RVec grid_vector() const { return Eigen::Map<const RVec>(grid.data(), Index(grid.size())); }
};

/// Uniform nodes a + i (b - a) / n_cells with the last node pinned to b.
inline std::vector<double> uniform_grid(Index n_cells, double a, double b) {
    std::vector<double> g(static_cast<std::size_t>(n_cells + 1));
    const double h = (b - a) / static_cast<double>(n_cells);
    for (Index i = 0; i <= n_cells; ++i) g[std::size_t(i)] = a + static_cast<double>(i) * h;
    g.back() = b;
    return g;
}

inline SBPOperator build_sbp(Index n_cells, double a = 0.0, double b = 1.0) {
    if (n_cells < 2) throw StructuralError("build_sbp needs at least two cells");
    if (!(b > a)) throw StructuralError("build_sbp needs a < b");
    SBPOperator op;
    op.grid = uniform_grid(n_cells, a, b);
    const double h = (b - a) / static_cast<double>(n_cells);
    const Index n = n_cells + 1;
    op.weights.assign(std::size_t(n), h);
    op.weights.front() = op.weights.back() = 0.5 * h;

    std::vector<Eigen::Triplet<double>> q;
    q.reserve(std::size_t(2 * n));
    q.emplace_back(0, 0, -0.5);
    q.emplace_back(0, 1, 0.5);
    for (Index i = 1; i + 1 < n; ++i) {
        q.emplace_back(i, i - 1, -0.5);
        q.emplace_back(i, i + 1, 0.5);
    }
    q.emplace_back(n - 1, n - 2, -0.5);
    q.emplace_back(n - 1, n - 1, 0.5);
    op.Q.resize(n, n);
    op.Q.setFromTriplets(q.begin(), q.end());

    std::vector<Eigen::Triplet<double>> d;
    d.reserve(q.size());
    for (const auto& t : q) d.emplace_back(t.row(), t.col(), t.value() / op.weights[std::size_t(t.row())]);
    op.D.resize(n, n);
    op.D.setFromTriplets(d.begin(), d.end());
    return op;
}

}  // namespace phnode
