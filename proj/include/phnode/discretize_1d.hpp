#pragma once

// Energy-consistent semi-discretization of boundary-controlled systems on an
// interval [a, b]:
//
//   hyperbolic:  x_t = P1 (H x)_xi + P0 H x,
//                u = W_B T (z(b); z(a)) / sqrt 2,  y = W_C T (z(b); z(a)) / sqrt 2,
//                z = H x,  T = [[P1, -P1], [I, I]];
//
//   diffusion:   x_t = (a x_xi)_xi,  u = (x(a), x(b)),  y = outward flux a x_xi.
//
// The hyperbolic scheme uses the SBP derivative plus a boundary correction
// that swaps the state-implied input for the applied one. The correction is
// built from (W_B, W_C) itself, so the discrete energy rate equals
// Re <z, P0 z>_w + Re u^* y with no truncation error.

#include "phnode/node.hpp"
#include "phnode/sbp.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>

namespace phnode {

// =============================================================================
// Boundary algebra
// =============================================================================

/// Sigma = [[0, I], [I, 0]] of size 2m.
inline Mat port_sigma(Index m) {
    Mat s = Mat::Zero(2 * m, 2 * m);
    s.topRightCorner(m, m).setIdentity();
    s.bottomLeftCorner(m, m).setIdentity();
    return s;
}

/// T = [[P1, -P1], [I, I]], acting on (z(b); z(a)).
inline Mat boundary_transform(const Mat& P1) {
    const Index m = P1.rows();
    Mat t(2 * m, 2 * m);
    t << P1, -P1, Mat::Identity(m, m), Mat::Identity(m, m);
    return t;
}

struct PortConditionResult {
    bool satisfied = false;
    double residual = 0.0;
};

inline constexpr double kPortTolerance = 1e-12;

/// Residual ||Sigma - W Sigma W^*||_F for W = (W_B; W_C).
inline PortConditionResult check_port_condition(const Mat& WB, const Mat& WC) {
    const Index m = WB.rows();
    require_shape(WB, m, 2 * m, "W_B");
    require_shape(WC, m, 2 * m, "W_C");
    Mat W(2 * m, 2 * m);
    W << WB, WC;
    const Mat sigma = port_sigma(m);
    PortConditionResult r;
    r.residual = (sigma - W * sigma * W.adjoint()).norm();
    r.satisfied = r.residual <= kPortTolerance;
    return r;
}

namespace detail {

/// Real basis of the k x k skew-Hermitian matrices.
inline std::vector<Mat> skew_hermitian_basis(Index k) {
    std::vector<Mat> basis;
    const Complex I(0.0, 1.0);
    for (Index j = 0; j < k; ++j) {
        Mat e = Mat::Zero(k, k);
        e(j, j) = I;
        basis.push_back(e);
        for (Index l = j + 1; l < k; ++l) {
            Mat r = Mat::Zero(k, k);
            r(j, l) = 1.0;
            r(l, j) = -1.0;
            basis.push_back(r);
            Mat c = Mat::Zero(k, k);
            c(j, l) = I;
            c(l, j) = I;
            basis.push_back(c);
        }
    }
    return basis;
}

inline RVec stack_real(const Mat& x) {
    RVec v(2 * x.size());
    for (Index k = 0; k < x.size(); ++k) {
        v(2 * k) = x.data()[k].real();
        v(2 * k + 1) = x.data()[k].imag();
    }
    return v;
}

}  // namespace detail

/// Completes W_C so that (W_B; W_C) satisfies the port condition.
///
/// Every solution has the form W_C = Z0 + K W_B with K skew-Hermitian and
/// Z0 = (W_B W_B^*)^{-1} W_B Sigma; Z0 is the minimum-Frobenius-norm one.
/// Given leading rows W_C1, the matching rows of K are fixed, skewness fixes
/// the mirrored block, and the remaining skew block is chosen to minimise
/// ||W_C||_F.
inline Mat complete_boundary_matrices(const Mat& WB, const Mat& WC_partial = Mat()) {
    const Index m = WB.rows();
    require_shape(WB, m, 2 * m, "W_B");
    if (WC_partial.size() != 0 && (WC_partial.cols() != 2 * m || WC_partial.rows() > m))
        throw StructuralError("partial W_C must have at most m rows and 2m columns");
    const Mat sigma = port_sigma(m);
    const double scale = 1.0 + WB.norm() * WB.norm();
    if ((WB * sigma * WB.adjoint()).norm() > kPortTolerance * scale)
        throw StructuralError("W_B Sigma W_B^* != 0: no completion exists");
    const Mat G = WB * WB.adjoint();
    if (condition_number(G) > 1e12) throw StructuralError("W_B does not have full row rank");
    const Eigen::PartialPivLU<Mat> Glu(G);
    const Mat Z0 = Glu.solve(WB * sigma);

    const Index m1 = WC_partial.size() == 0 ? 0 : WC_partial.rows();
    if (m1 == m) {
        if (!check_port_condition(WB, WC_partial).satisfied)
            throw StructuralError("supplied W_C violates the port condition");
        return WC_partial;
    }
    if (m1 == 0) return Z0;

    // Rows fixed by the partial W_C.
    const Mat Rt = WC_partial - Z0.topRows(m1);
    const Mat Ktop = Glu.solve(WB * Rt.adjoint()).adjoint();  // Rt W_B^* G^{-1}, G Hermitian
    const double tol = kPortTolerance * (1.0 + WC_partial.norm()) * scale;
    if ((Ktop * WB - Rt).norm() > tol) throw StructuralError("partial W_C is not reachable from W_B");
    const Mat K11 = Ktop.leftCols(m1);
    if ((K11 + K11.adjoint()).norm() > tol) throw StructuralError("partial W_C violates W_C Sigma W_C^* = 0");

    const Index m2 = m - m1;
    Mat K = Mat::Zero(m, m);
    K.topRows(m1) = Ktop;
    K.bottomLeftCorner(m2, m1) = -Ktop.rightCols(m2).adjoint();

    // Free skew block: least squares for min ||K21 W_B,top + K22 W_B,bot||_F.
    const Mat R0 = K.bottomLeftCorner(m2, m1) * WB.topRows(m1);
    const Mat WBbot = WB.bottomRows(m2);
    const auto basis = detail::skew_hermitian_basis(m2);
    RMat Als(2 * R0.size(), Index(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) Als.col(Index(j)) = detail::stack_real(basis[j] * WBbot);
    const RVec c = Als.completeOrthogonalDecomposition().solve(-detail::stack_real(R0));
    Mat K22 = Mat::Zero(m2, m2);
    for (std::size_t j = 0; j < basis.size(); ++j) K22 += c(Index(j)) * basis[j];
    // Drop round-off so exact inputs give exact outputs.
    K22 = K22.unaryExpr([](Complex v) {
        return Complex(std::abs(v.real()) < 1e-15 ? 0.0 : v.real(), std::abs(v.imag()) < 1e-15 ? 0.0 : v.imag());
    });
    K.bottomRightCorner(m2, m2) = K22;

    Mat WC = Z0 + K * WB;
    WC.topRows(m1) = WC_partial;
    return WC;
}

// =============================================================================
// Hyperbolic model
// =============================================================================

struct HyperbolicModel {
    std::string name = "hyperbolic";
    Index m = 0;
    double a = 0.0;
    double b = 1.0;
    DensitySpec density;
    /// Pointwise lower-order term; empty means zero.
    std::function<Mat(double)> P0;
    Mat P1;
    /// Controlled rows, then homogeneous rows (zero boundary data).
    Mat WB;
    Mat WB_hom;
    /// Output rows paired with WB; fewer than m rows are completed.
    Mat WC;

    Index active_inputs() const { return WB.rows(); }

    Mat P0_at(double xi) const { return P0 ? P0(xi) : Mat::Zero(m, m); }

    Mat full_WB() const {
        Mat w(WB.rows() + WB_hom.rows(), 2 * m);
        if (WB_hom.rows() > 0)
            w << WB, WB_hom;
        else
            w = WB;
        return w;
    }

    Mat full_WC() const { return complete_boundary_matrices(full_WB(), WC); }

    void check_dimensions() const {
        if (m < 1) throw StructuralError("hyperbolic model needs m >= 1");
        if (!(b > a)) throw StructuralError("hyperbolic model needs a < b");
        require_shape(P1, m, m, "P1");
        if (WB.cols() != 2 * m) throw StructuralError("W_B must have 2m columns");
        if (WB_hom.size() != 0 && WB_hom.cols() != 2 * m) throw StructuralError("homogeneous W_B rows need 2m columns");
        if (WB.rows() + WB_hom.rows() != m) throw StructuralError("W_B and homogeneous rows must total m rows");
        if (WC.size() != 0 && (WC.cols() != 2 * m || WC.rows() > m))
            throw StructuralError("W_C must have 2m columns and at most m rows");
        if (density.block_size != m) throw StructuralError("density block size must equal m");
    }
};

inline constexpr double kMaxP1Condition = 1e12;

/// Checks P1 (Hermitian, invertible), P0 dissipativity on the quadrature
/// nodes of an n_cells grid, the density samples, and the port condition of
/// the completed boundary stack.
inline ValidationReport validate_hyperbolic_model(const HyperbolicModel& model, Index n_cells = 64,
                                                  std::optional<double> tol_struct = std::nullopt) {
    model.check_dimensions();
    ValidationReport report;
    const double tp = tol_struct.value_or(default_tolerance(model.P1));
    const double herm = max_abs_entry(model.P1 - model.P1.adjoint());
    if (herm > tp) report.violations.push_back({"P1 not Hermitian", herm, tp});
    const double cond = condition_number(model.P1);
    if (!(cond <= kMaxP1Condition)) report.violations.push_back({"P1 singular", cond, kMaxP1Condition});

    const auto grid = uniform_grid(std::max<Index>(n_cells, 2), model.a, model.b);
    double worst = -std::numeric_limits<double>::infinity(), worst_tol = 0.0;
    for (double xi : grid) {
        const Mat p0 = model.P0_at(xi);
        const double t = tol_struct.value_or(default_tolerance(p0));
        const double l = max_hermitian_eigenvalue(p0);
        if (l - t > worst - worst_tol) {
            worst = l;
            worst_tol = t;
        }
    }
    if (worst > worst_tol) report.violations.push_back({"P0 not dissipative", worst, worst_tol});

    try {
        (void)build_energy_metric(model.density, grid);
    } catch (const DensityError& e) {
        report.violations.push_back({std::string("density invalid: ") + e.what(), 0.0, 0.0});
    } catch (const IntegrabilityError& e) {
        report.violations.push_back({std::string("density not integrable: ") + e.what(), 0.0, 0.0});
    }

    try {
        const auto pc = check_port_condition(model.full_WB(), model.full_WC());
        if (!pc.satisfied) report.violations.push_back({"port condition", pc.residual, kPortTolerance});
    } catch (const StructuralError& e) {
        report.violations.push_back({std::string("port condition: ") + e.what(), 0.0, 0.0});
    }
    return report;
}

/// B <- B U, C <- U^* C, D <- U^* D U (and the input trace like C).
inline DiscreteNode apply_io_redefinition(const DiscreteNode& node, const Mat& U) {
    node.check_dimensions();
    if (U.rows() != node.input_dim()) throw StructuralError("U must have as many rows as the node has inputs");
    DiscreteNode out = node;
    out.B = node.B * U;
    out.C = U.adjoint() * node.C;
    out.D = U.adjoint() * node.D * U;
    if (node.input_trace.size() != 0) out.input_trace = U.adjoint() * node.input_trace;
    return out;
}

/// Node with all m boundary rows as inputs (homogeneous rows not yet removed).
inline DiscreteNode assemble_hyperbolic_node_full(const HyperbolicModel& model, Index n_cells) {
    model.check_dimensions();
    if (n_cells < 4) throw StructuralError("hyperbolic assembly needs n_cells >= 4");
    const Index m = model.m;
    const Mat WBf = model.full_WB();
    const Mat WCf = model.full_WC();
    const auto pc = check_port_condition(WBf, WCf);
    if (!pc.satisfied)
        throw StructuralError("boundary stack (W_B; W_C) violates the port condition, residual " +
                              std::to_string(pc.residual));
    if (!(condition_number(model.P1) <= kMaxP1Condition)) throw StructuralError("P1 is singular");

    const SBPOperator sbp = build_sbp(n_cells, model.a, model.b);
    EnergyMetric metric = build_energy_metric(model.density, sbp.grid, sbp.weights);
    const Index nodes = sbp.num_nodes(), n = nodes * m;
    const Index last = nodes - 1;
    const double w0 = sbp.weights.front(), wN = sbp.weights.back();

    // F acting on co-energy z.
    Mat F = Mat::Zero(n, n);
    for (Index i = 0; i < nodes; ++i) F.block(i * m, i * m, m, m) += model.P0_at(sbp.grid[std::size_t(i)]);
    for (Index k = 0; k < sbp.D.outerSize(); ++k)
        for (SpMat::InnerIterator it(sbp.D, k); it; ++it) F.block(it.row() * m, it.col() * m, m, m) += it.value() * model.P1;

    const double r2 = 1.0 / std::sqrt(2.0);
    const Mat T = boundary_transform(model.P1);
    const Mat WBT = r2 * WBf * T;
    const Mat WCT = r2 * WCf * T;
    const Mat K = WCT.adjoint();  // 2m x m; top rows act at b, bottom rows at a

    // Boundary correction -W^{-1} E_b^* K (W_B T E_b / sqrt 2).
    const Index ib = last * m, ia = 0;
    const Mat Kb = K.topRows(m) / wN, Ka = K.bottomRows(m) / w0;
    const Mat Bzb = WBT.leftCols(m), Bza = WBT.rightCols(m);
    F.block(ib, ib, m, m) -= Kb * Bzb;
    F.block(ib, ia, m, m) -= Kb * Bza;
    F.block(ia, ib, m, m) -= Ka * Bzb;
    F.block(ia, ia, m, m) -= Ka * Bza;

    DiscreteNode node;
    node.A.resize(n, n);
    for (Index j = 0; j < nodes; ++j) node.A.middleCols(j * m, m) = F.middleCols(j * m, m) * metric.blocks[std::size_t(j)];
    node.B = Mat::Zero(n, m);
    node.B.middleRows(ib, m) = Kb;
    node.B.middleRows(ia, m) += Ka;
    node.C = Mat::Zero(m, n);
    node.C.middleCols(ib, m) = WCT.leftCols(m) * metric.blocks.back();
    node.C.middleCols(ia, m) += WCT.rightCols(m) * metric.blocks.front();
    node.D = Mat::Zero(m, m);
    node.input_trace = Mat::Zero(m, n);
    node.input_trace.middleCols(ib, m) = Bzb * metric.blocks.back();
    node.input_trace.middleCols(ia, m) += Bza * metric.blocks.front();
    node.metric = std::move(metric);
    node.provenance = "hyperbolic:" + model.name + ":n_cells=" + std::to_string(n_cells);
    return node;
}

/// Node with only the controlled rows as inputs; homogeneous rows are held
/// at zero by the redefinition U = (I; 0).
inline DiscreteNode assemble_hyperbolic_node(const HyperbolicModel& model, Index n_cells) {
    DiscreteNode full = assemble_hyperbolic_node_full(model, n_cells);
    const Index m1 = model.active_inputs();
    if (m1 == model.m) return full;
    Mat U = Mat::Zero(model.m, m1);
    U.topRows(m1).setIdentity();
    return apply_io_redefinition(full, U);
}

/// Formal adjoint system: P0 -> P0^*, P1 -> -P1 with the same boundary
/// matrices, which exchanges the roles of the two endpoints.
inline HyperbolicModel adjoint_model(const HyperbolicModel& model) {
    HyperbolicModel adj = model;
    adj.name = model.name + "/adjoint";
    adj.P1 = -model.P1;
    if (model.P0) {
        auto p0 = model.P0;
        adj.P0 = [p0](double xi) { return Mat(p0(xi).adjoint()); };
    }
    adj.WC = model.full_WC();
    return adj;
}

// =============================================================================
// Diffusion
// =============================================================================

struct DiffusionModel {
    std::string name = "diffusion";
    Coefficient a_coeff = Coefficient::constant(1.0);
    double a = 0.0;
    double b = 1.0;
};

/// x_t = (a x_xi)_xi with Dirichlet inputs u = (x(a), x(b)) and outward-flux
/// outputs. Boundary values are eliminated, so the state holds the interior
/// nodes and the energy is 1/2 sum_i w_i |x_i|^2 over them. With
/// K = D^T diag(w a) D and x_full = S x + R u:
///   x' = -W^{-1} (K x_full)_interior,  y = (K x_full)_{a, b},
/// which gives d/dt H = -<Dx_full, a Dx_full>_w + Re u^* y exactly.
inline DiscreteNode assemble_diffusion_node(const DiffusionModel& model, Index n_cells) {
    if (n_cells < 4) throw StructuralError("diffusion assembly needs n_cells >= 4");
    const SBPOperator sbp = build_sbp(n_cells, model.a, model.b);
    const Index nodes = sbp.num_nodes(), last = nodes - 1, ni = nodes - 2;
    RVec wa(nodes);
    for (Index i = 0; i < nodes; ++i) {
        const double ai = model.a_coeff(sbp.grid[std::size_t(i)]);
        if (!(ai > 0.0) || !std::isfinite(ai))
            throw DensityError("diffusion coefficient must be positive and finite at xi = " +
                               std::to_string(sbp.grid[std::size_t(i)]));
        wa(i) = sbp.weights[std::size_t(i)] * ai;
    }
    const RMat Dd = RMat(sbp.D);
    const RMat Kmat = Dd.transpose() * wa.asDiagonal() * Dd;

    RVec winv(ni);
    for (Index i = 0; i < ni; ++i) winv(i) = 1.0 / sbp.weights[std::size_t(i + 1)];
    RMat KR(nodes, 2);
    KR << Kmat.col(0), Kmat.col(last);

    DiscreteNode node;
    node.A = to_complex(-(winv.asDiagonal() * Kmat.block(1, 1, ni, ni)));
    node.B = to_complex(-(winv.asDiagonal() * KR.middleRows(1, ni)));
    RMat C(2, ni), D(2, 2);
    C << Kmat.block(0, 1, 1, ni), Kmat.block(last, 1, 1, ni);
    D << KR.row(0), KR.row(last);
    node.C = to_complex(C);
    node.D = to_complex(D);

    std::vector<double> grid(sbp.grid.begin() + 1, sbp.grid.end() - 1);
    std::vector<double> weights(sbp.weights.begin() + 1, sbp.weights.end() - 1);
    std::vector<Mat> blocks(std::size_t(ni), Mat::Identity(1, 1));
    node.metric = EnergyMetric::from_blocks(std::move(grid), std::move(weights), std::move(blocks));
    node.provenance = "diffusion:" + model.name + ":n_cells=" + std::to_string(n_cells);
    return node;
}

}  // namespace phnode
