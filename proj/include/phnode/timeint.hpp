#pragma once

// Implicit midpoint integration of system nodes with a per-step energy audit.
//
// For x' = A x + B u the midpoint rule gives
//   H(x+) - H(x) = tau Re <A x_mid + B u_mid, x_mid>_Xh
// exactly, which splits into dissipated + supplied power at the midpoint.

#include "phnode/node_analysis.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

namespace phnode {

// =============================================================================
// Input signals
// =============================================================================

struct InputSignal {
    enum class Kind { zero, constant, sinusoid, table };

    Kind kind = Kind::zero;
    Vec values;  // constant value or sinusoid amplitude
    double frequency = 0.0;
    double phase = 0.0;
    std::vector<double> times;
    std::vector<Vec> samples;

    static InputSignal zero() { return {}; }

    static InputSignal constant(Vec value) {
        InputSignal s;
        s.kind = Kind::constant;
        s.values = std::move(value);
        return s;
    }

    /// amplitude * sin(frequency t + phase), componentwise.
    static InputSignal sinusoid(Vec amplitude, double frequency, double phase = 0.0) {
        InputSignal s;
        s.kind = Kind::sinusoid;
        s.values = std::move(amplitude);
        s.frequency = frequency;
        s.phase = phase;
        return s;
    }

    /// Linear interpolation between samples; constant beyond either end.
    static InputSignal table(std::vector<double> times, std::vector<Vec> samples) {
        if (times.empty() || times.size() != samples.size())
            throw StructuralError("input table needs matching, nonempty times and samples");
        for (std::size_t k = 0; k + 1 < times.size(); ++k)
            if (!(times[k + 1] > times[k])) throw StructuralError("input table times must be increasing");
        for (const auto& v : samples)
            if (v.size() != samples.front().size()) throw StructuralError("input table samples differ in length");
        InputSignal s;
        s.kind = Kind::table;
        s.times = std::move(times);
        s.samples = std::move(samples);
        return s;
    }

    /// Value at time t for a node with m inputs.
    Vec operator()(double t, Index m) const {
        switch (kind) {
            case Kind::zero:
                return Vec::Zero(m);
            case Kind::constant:
                require_length(values, m, "constant input");
                return values;
            case Kind::sinusoid:
                require_length(values, m, "sinusoid amplitude");
                return values * std::sin(frequency * t + phase);
            case Kind::table: {
                require_length(samples.front(), m, "input table sample");
                if (t <= times.front()) return samples.front();
                if (t >= times.back()) return samples.back();
                const auto it = std::upper_bound(times.begin(), times.end(), t);
                const std::size_t k = std::size_t(it - times.begin());
                const double theta = (t - times[k - 1]) / (times[k] - times[k - 1]);
                return (1.0 - theta) * samples[k - 1] + theta * samples[k];
            }
        }
        return Vec::Zero(m);
    }
};

// =============================================================================
// Stepper
// =============================================================================

using SpCMat = Eigen::SparseMatrix<Complex>;

namespace detail {

inline SpCMat to_sparse(const Mat& m) {
    std::vector<Eigen::Triplet<Complex>> t;
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) t.emplace_back(i, j, m(i, j));
    SpCMat s(m.rows(), m.cols());
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

}  // namespace detail

struct StepResult {
    Vec x_next;
    Vec y_mid;
    double supplied = 0.0;
    double dissipated = 0.0;
    double residual = 0.0;
};

/// Fixed-step implicit midpoint rule with the step matrix factorised once.
/// Operators are held in sparse form; a negative tau steps backward.
class MidpointStepper {
public:
    MidpointStepper(const DiscreteNode& node, double tau) : node_(&node), tau_(tau) {
        node.check_dimensions();
        if (!(tau != 0.0) || !std::isfinite(tau)) throw PreconditionError("time step must be finite and nonzero");
        const Index n = node.state_dim();
        A_ = detail::to_sparse(node.A);
        B_ = detail::to_sparse(node.B);
        C_ = detail::to_sparse(node.C);
        SpCMat I(n, n);
        I.setIdentity();
        SpCMat lhs = I - (0.5 * tau) * A_;
        rhs_ = I + (0.5 * tau) * A_;
        lhs.makeCompressed();
        if (n > 0) {
            lu_.compute(lhs);
            if (lu_.info() != Eigen::Success) throw ResolventError("implicit midpoint step matrix is singular");
        }
    }

    double tau() const { return tau_; }

    StepResult step(const Vec& x, const Vec& u_mid) const {
        const DiscreteNode& node = *node_;
        require_length(x, node.state_dim(), "x");
        require_length(u_mid, node.input_dim(), "u");
        StepResult r;
        if (node.state_dim() == 0) {
            r.x_next = x;
        } else {
            const Vec rhs = rhs_ * x + tau_ * (B_ * u_mid);
            r.x_next = lu_.solve(rhs);
            if (lu_.info() != Eigen::Success) throw ResolventError("implicit midpoint solve failed");
        }
        const Vec x_mid = 0.5 * (x + r.x_next);
        r.y_mid = C_ * x_mid + node.D * u_mid;
        const Vec v = A_ * x_mid + B_ * u_mid;
        const double rate = xh_inner(node.metric, v, x_mid).real();
        r.supplied = u_mid.dot(r.y_mid).real();
        r.dissipated = rate - r.supplied;
        r.residual = discrete_hamiltonian(node.metric, r.x_next) - discrete_hamiltonian(node.metric, x) -
                     tau_ * (r.dissipated + r.supplied);
        return r;
    }

private:
    const DiscreteNode* node_;
    double tau_;
    SpCMat A_, B_, C_, rhs_;
    Eigen::SparseLU<SpCMat, Eigen::COLAMDOrdering<int>> lu_;
};

/// One midpoint step: (I - tau/2 A) x+ = (I + tau/2 A) x + tau B u_mid,
/// y_mid = C x_mid + D u_mid.
inline StepResult implicit_midpoint_step(const DiscreteNode& node, const Vec& x, const Vec& u_mid, double tau) {
    return MidpointStepper(node, tau).step(x, u_mid);
}

// =============================================================================
// Trajectories
// =============================================================================

struct Trajectory {
    double tau = 0.0;
    std::vector<double> times;         // t_0 .. t_K
    std::vector<double> hamiltonian;   // H(x_k), k = 0 .. K
    std::vector<Vec> inputs;           // u_{k+1/2}, k = 0 .. K-1
    std::vector<Vec> outputs;          // y_{k+1/2}
    std::vector<double> supplied;      // Re u^* y at the midpoint
    std::vector<double> dissipated;    // rate minus supplied, <= 0 for dissipative nodes
    std::vector<double> residual;      // r_k
    std::vector<std::size_t> state_steps;  // k of each stored state
    std::vector<Vec> states;
    bool compatibility_warning = false;

    std::size_t num_steps() const { return residual.size(); }
};

struct SimulationOptions {
    /// Store every k-th state (and always the last one); 0 stores none.
    std::size_t state_stride = 1;
    /// Relative mismatch between u(0) and the boundary trace of x0 above
    /// which a warning is issued.
    double compatibility_tol = 1e-8;
    bool warn = true;
};

/// Runs ceil(t_final / tau) midpoint steps from x0 with t_k = k tau.
inline Trajectory simulate(const DiscreteNode& node, const Vec& x0, const InputSignal& signal, double t_final,
                           double tau, const SimulationOptions& opts = {}) {
    if (!(t_final > 0.0) || !(tau > 0.0)) throw PreconditionError("t_final and tau must be positive");
    node.check_dimensions();
    require_length(x0, node.state_dim(), "x0");
    const Index m = node.input_dim();
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / tau - 1e-9));

    Trajectory traj;
    traj.tau = tau;
    if (node.input_trace.size() != 0) {
        const Vec u0 = signal(0.0, m);
        const double gap = (node.input_trace * x0 - u0).norm();
        if (gap > opts.compatibility_tol * (1.0 + u0.norm() + (node.input_trace * x0).norm())) {
            traj.compatibility_warning = true;
            if (opts.warn)
                std::cerr << "phnode: warning: initial state and u(0) are incompatible at the boundary (mismatch "
                          << gap << ")\n";
        }
    }

    const MidpointStepper stepper(node, tau);
    traj.times.reserve(steps + 1);
    traj.hamiltonian.reserve(steps + 1);
    traj.inputs.reserve(steps);
    traj.outputs.reserve(steps);
    traj.supplied.reserve(steps);
    traj.dissipated.reserve(steps);
    traj.residual.reserve(steps);

    Vec x = x0;
    traj.times.push_back(0.0);
    traj.hamiltonian.push_back(discrete_hamiltonian(node.metric, x));
    auto store = [&](std::size_t k) {
        traj.state_steps.push_back(k);
        traj.states.push_back(x);
    };
    if (opts.state_stride > 0) store(0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t_mid = (static_cast<double>(k) + 0.5) * tau;
        const Vec u = signal(t_mid, m);
        StepResult r = stepper.step(x, u);
        x = std::move(r.x_next);
        traj.times.push_back(static_cast<double>(k + 1) * tau);
        traj.hamiltonian.push_back(discrete_hamiltonian(node.metric, x));
        traj.inputs.push_back(u);
        traj.outputs.push_back(std::move(r.y_mid));
        traj.supplied.push_back(r.supplied);
        traj.dissipated.push_back(r.dissipated);
        traj.residual.push_back(r.residual);
        if (opts.state_stride > 0 && ((k + 1) % opts.state_stride == 0 || k + 1 == steps)) store(k + 1);
    }
    return traj;
}

// =============================================================================
// Audit
// =============================================================================

inline constexpr double kDefaultTolBalance = 1e-9;

struct EnergyAudit {
    double max_abs_residual = 0.0;
    double max_rel_residual = 0.0;  // max |r_k| / (1 + H(x_k))
    double max_inequality_excess = 0.0;  // max (dH - tau supplied) / (1 + H(x_k))
    double cumulative_supplied = 0.0;
    double cumulative_dissipated = 0.0;
    double energy_change = 0.0;
    double tolerance = kDefaultTolBalance;
    bool balance_ok = true;
    bool inequality_ok = true;
    bool dissipation_sign_ok = true;
    bool passed = true;
};

/// Verifies both trajectory invariants and reports cumulative energies.
/// Stored states are re-evaluated against the node's metric so a trajectory
/// from a different node is rejected.
inline EnergyAudit energy_audit(const Trajectory& traj, const DiscreteNode& node, double tol_bal = kDefaultTolBalance) {
    node.check_dimensions();
    const std::size_t K = traj.num_steps();
    if (traj.hamiltonian.size() != K + 1 || traj.supplied.size() != K || traj.dissipated.size() != K ||
        traj.inputs.size() != K)
        throw StructuralError("trajectory fields have inconsistent lengths");
    for (const auto& u : traj.inputs)
        if (u.size() != node.input_dim()) throw StructuralError("trajectory inputs do not match the node");
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        const Vec& x = traj.states[j];
        if (x.size() != node.state_dim()) throw StructuralError("trajectory states do not match the node");
        const double h = discrete_hamiltonian(node.metric, x);
        const double stored = traj.hamiltonian[traj.state_steps[j]];
        if (std::abs(h - stored) > 1e-12 * (1.0 + std::abs(stored)))
            throw StructuralError("trajectory energies do not match the node's metric");
    }

    EnergyAudit a;
    a.tolerance = tol_bal;
    const double tau = traj.tau;
    for (std::size_t k = 0; k < K; ++k) {
        const double scale = 1.0 + std::abs(traj.hamiltonian[k]);
        const double r = std::abs(traj.residual[k]);
        a.max_abs_residual = std::max(a.max_abs_residual, r);
        a.max_rel_residual = std::max(a.max_rel_residual, r / scale);
        const double excess = (traj.hamiltonian[k + 1] - traj.hamiltonian[k] - tau * traj.supplied[k]) / scale;
        a.max_inequality_excess = std::max(a.max_inequality_excess, excess);
        a.cumulative_supplied += tau * traj.supplied[k];
        a.cumulative_dissipated += tau * traj.dissipated[k];
        if (traj.dissipated[k] > tol_bal * scale) a.dissipation_sign_ok = false;
    }
    a.energy_change = traj.hamiltonian.back() - traj.hamiltonian.front();
    a.balance_ok = a.max_rel_residual <= tol_bal;
    a.inequality_ok = a.max_inequality_excess <= tol_bal;
    a.passed = a.balance_ok && a.inequality_ok && a.dissipation_sign_ok;
    return a;
}

// =============================================================================
// CSV export
// =============================================================================

/// Columns t, H, supplied, dissipated, residual. Row k carries the step that
/// ends at t_k; row 0 has zero step terms.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,H,supplied,dissipated,residual\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const bool step = k > 0;
        os << format_number(traj.times[k]) << ',' << format_number(traj.hamiltonian[k]) << ','
           << format_number(step ? traj.supplied[k - 1] : 0.0) << ','
           << format_number(step ? traj.dissipated[k - 1] : 0.0) << ','
           << format_number(step ? traj.residual[k - 1] : 0.0) << '\n';
    }
}

/// Stored states: t followed by re/im pairs of every component.
inline void write_states_csv(std::ostream& os, const Trajectory& traj) {
    if (traj.states.empty()) {
        os << "t\n";
        return;
    }
    os << 't';
    for (Index i = 0; i < traj.states.front().size(); ++i) os << ",re_x" << i << ",im_x" << i;
    os << '\n';
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        os << format_number(traj.times[traj.state_steps[j]]);
        for (Index i = 0; i < traj.states[j].size(); ++i)
            os << ',' << format_number(traj.states[j](i).real()) << ',' << format_number(traj.states[j](i).imag());
        os << '\n';
    }
}

}  // namespace phnode
