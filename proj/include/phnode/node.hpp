#pragma once

// Finite-dimensional system nodes
//
//   x' = A x + B u,   y = C x + D u
//
// together with the energy metric that makes ||x||^2 / 2 the stored energy.
// Every discretization in the library produces one of these.

#include "phnode/core_ph.hpp"
#include "phnode/quadham.hpp"

#include <string>
#include <utility>

namespace phnode {

struct DiscreteNode {
    Mat A, B, C, D;
    EnergyMetric metric;
    /// Maps a state to the boundary input it implies; empty when the state
    /// carries no such trace (finite-dimensional or strongly constrained nodes).
    Mat input_trace;
    std::string provenance;

    Index state_dim() const { return A.rows(); }
    Index input_dim() const { return B.cols(); }

    void check_dimensions() const {
        const Index n = A.rows(), m = B.cols();
        require_shape(A, n, n, "A");
        require_shape(B, n, m, "B");
        require_shape(C, m, n, "C");
        require_shape(D, m, m, "D");
        if (metric.dim() != n) throw StructuralError("metric dimension does not match the state dimension");
        if (input_trace.size() != 0) require_shape(input_trace, m, n, "input_trace");
    }
};

/// Node of  x' = (J - R) H x + (B - P) u,  y = (B + P)^* H x + (S - N) u
/// with the metric x^* H x. H must be positive definite here.
inline DiscreteNode node_from_ph_structure(const PHStructure& s, std::optional<double> tol_struct = std::nullopt) {
    const auto report = validate_ph_structure(s, tol_struct);
    if (!report.passed()) throw StructuralError("invalid port-Hamiltonian structure: " + report.summary());
    DiscreteNode node;
    node.A = (s.J - s.R) * s.H;
    node.B = s.B - s.P;
    node.C = (s.B + s.P).adjoint() * s.H;
    node.D = s.S - s.N;
    node.metric = EnergyMetric::from_matrix(s.H);
    node.provenance = "ph_matrices";
    return node;
}

/// Inverse of node_from_ph_structure up to the metric: H = mass matrix,
/// J - R = A H^{-1}, and (B, P) recovered from B - P = B_node and
/// (B + P)^* = C H^{-1}. Fails unless the resulting W is PSD.
inline PHStructure node_to_ph_structure(const DiscreteNode& node) {
    node.check_dimensions();
    const Mat H = node.metric.mass_matrix();
    const Eigen::PartialPivLU<Mat> lu(H);
    const Mat JR = lu.solve(node.A.adjoint()).adjoint();  // A H^{-1}, H Hermitian
    const Mat Bp = lu.solve(node.C.adjoint());            // H^{-1} C^*
    PHStructure s;
    s.H = H;
    s.J = 0.5 * (JR - JR.adjoint());
    s.R = -0.5 * (JR + JR.adjoint());
    s.B = 0.5 * (node.B + Bp);
    s.P = 0.5 * (Bp - node.B);
    s.S = 0.5 * (node.D + node.D.adjoint());
    s.N = -0.5 * (node.D - node.D.adjoint());
    return s;
}

/// Energy-pairing dissipation matrix on (x; u):
///   [[MM A, MM B], [-C, -D]],  MM = metric mass matrix,
/// so that Re z^* M z = d/dt H(x) - Re u^* y for z = (x; u).
inline DissipationMatrix node_dissipation_matrix(const DiscreteNode& node) {
    node.check_dimensions();
    const Index n = node.state_dim(), m = node.input_dim();
    const Mat MM = node.metric.mass_matrix();
    DissipationMatrix d;
    d.n = n;
    d.m = m;
    d.M.resize(n + m, n + m);
    d.M << MM * node.A, MM * node.B, -node.C, -node.D;
    return d;
}

/// L^* X L^{-*} with L L^* the metric mass matrix: the matrix of X in an
/// orthonormal basis of the energy inner product.
inline Mat metric_transform(const EnergyMetric& metric, const Mat& X) {
    const Mat L = metric.factor();
    const Mat Y = L.triangularView<Eigen::Lower>().solve(X.adjoint()).adjoint();  // X L^{-*}
    return L.adjoint().triangularView<Eigen::Upper>() * Y;
}

/// Metric generator L^* A L^{-*}; A is dissipative in the energy metric iff
/// the Hermitian part of this matrix is negative semi-definite.
inline Mat metric_generator(const DiscreteNode& node) { return metric_transform(node.metric, node.A); }

/// Largest eigenvalue of the Hermitian part of the metric generator.
inline double metric_symmetric_bound(const DiscreteNode& node) {
    return max_hermitian_eigenvalue(metric_generator(node));
}

}  // namespace phnode
