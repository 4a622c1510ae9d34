// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include "../test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

using namespace phnode;
using namespace phtest;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Bundled {
    std::string name;
    std::function<DiscreteNode(Index)> build;
    bool diffusion = false;
};

/// Catalog models plus the finite-dimensional mass-spring-damper file.
std::vector<Bundled> bundled_models() {
    std::vector<Bundled> out;
    for (const auto& name : catalog_names())
        out.push_back({name, [name](Index n) { return assemble_catalog_node(name, n); },
                       std::holds_alternative<DiffusionModel>(build_catalog_model(name))});
    const ModelFile msd = load_model_file(std::string(PHNODE_MODELS_DIR) + "/mass_spring_damper.json");
    out.push_back({"mass_spring_damper", [msd](Index) { return build_node(msd); }, false});
    return out;
}

Vec bump(const DiscreteNode& node) {
    const Index m = node.metric.block_size();
    Vec x(node.state_dim());
    for (Index i = 0; i < node.metric.num_nodes(); ++i) {
        const double s = std::sin(M_PI * node.metric.grid[std::size_t(i)]);
        x.segment(i * m, m).setConstant(s * s);
    }
    return x;
}

/// Per-step checks of criterion 4 on one simulated trajectory.
Outcome audit_run(const DiscreteNode& node, const Vec& x0) {
    const double tau = 1e-3;
    const auto traj = simulate(node, x0, InputSignal::sinusoid(Vec::Ones(node.input_dim()), 3.0), 5.0, tau,
                               {0, 1e-8, false});
    double worst_balance = 0.0, worst_ineq = -1e300;
    for (std::size_t k = 0; k < traj.num_steps(); ++k) {
        const double h = std::max(traj.hamiltonian[k], traj.hamiltonian[k + 1]);
        worst_balance = std::max(worst_balance, std::abs(traj.residual[k]) / (1.0 + h));
        const double excess = traj.hamiltonian[k + 1] - traj.hamiltonian[k] - tau * traj.supplied[k];
        worst_ineq = std::max(worst_ineq, excess / (1.0 + h));
    }
    const auto audit = energy_audit(traj, node);
    Outcome o;
    o.passed = worst_balance <= 1e-9 && worst_ineq <= 1e-9 && audit.passed;
    o.detail = "balance=" + fmt(worst_balance) + " excess=" + fmt(worst_ineq);
    return o;
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    std::mt19937 rng(20261);
    double worst = -1e300;
    int caught = 0;
    for (int k = 0; k < 100; ++k) {
        const Index n = random_dim(rng, 1, 8), m = random_dim(rng, 0, 8);
        const PHStructure s = random_valid_structure(rng, n, m);
        if (!validate_ph_structure(s).passed()) return {false, "valid structure rejected"};
        worst = std::max(worst, assemble_dissipation_matrix(s).max_symmetric_eigenvalue());
    }
    for (int k = 0; k < 100; ++k) {
        const Index n = random_dim(rng, 1, 8), m = random_dim(rng, 1, 8);
        PHStructure s = random_valid_structure(rng, n, m);
        const Vec v = random_vector(rng, n);
        const Mat proj = (v * v.adjoint()) / v.squaredNorm();
        switch (k % 5) {
            case 0: s.J += 0.1 * Mat::Identity(n, n); break;
            case 1: s.N += 0.1 * Mat::Identity(m, m); break;
            case 2: s.H -= (1.0 + max_hermitian_eigenvalue(s.H)) * proj; break;
            case 3: s.R -= (1.0 + max_hermitian_eigenvalue(s.W())) * proj; break;
            default: s.S -= (1.0 + max_hermitian_eigenvalue(s.W())) * Mat::Identity(m, m); break;
        }
        bool threw = false;
        try {
            assemble_dissipation_matrix(s);
        } catch (const StructuralError&) {
            threw = true;
        }
        if (!validate_ph_structure(s).passed() && threw) ++caught;
    }
    const double dt = seconds_since(t0);
    return {worst <= 1e-10 && caught == 100 && dt < 5.0,
            "max_sym_eig=" + fmt(worst) + " caught=" + std::to_string(caught) + "/100 time=" + fmt(dt) + "s"};
}

Outcome criterion2() {
    const double r = 1.0 / std::sqrt(2.0);
    Mat WB(2, 4), WC1(1, 4);
    WB << 0, r, r, 0, -r, 0, 0, r;
    WC1 << r, 0, 0, r;
    const Mat WC = complete_boundary_matrices(WB, WC1);
    const auto pc = check_port_condition(WB, WC);
    const bool kept = WC.row(0) == WC1.row(0);
    return {pc.residual <= 1e-12 && kept, "residual=" + fmt(pc.residual)};
}

Outcome criterion3() {
    const auto t0 = Clock::now();
    double worst_q = 0.0, worst_ibp = 0.0;
    std::mt19937 rng(20263);
    std::normal_distribution<double> g;
    for (Index n = 2; n <= 1024; ++n) {
        const SBPOperator op = build_sbp(n);
        const Index N = op.num_nodes();
        const RMat sym = RMat(op.Q) + RMat(op.Q.transpose()) - RMat(op.boundary_matrix());
        worst_q = std::max(worst_q, sym.cwiseAbs().maxCoeff());
        RVec u(N), v(N);
        for (Index i = 0; i < N; ++i) {
            u(i) = g(rng);
            v(i) = g(rng);
        }
        const RVec w = op.weight_vector();
        const double lhs = (w.array() * (op.D * u).array() * v.array()).sum() +
                           (w.array() * u.array() * (op.D * v).array()).sum();
        const double rhs = u(N - 1) * v(N - 1) - u(0) * v(0);
        worst_ibp = std::max(worst_ibp, std::abs(lhs - rhs) / (1.0 + u.norm() * v.norm()));
    }
    const double dt = seconds_since(t0);
    return {worst_q <= 1e-15 && worst_ibp <= 1e-13 && dt < 10.0,
            "Q+Q^T-E=" + fmt(worst_q) + " ibp=" + fmt(worst_ibp) + " time=" + fmt(dt) + "s"};
}

Outcome criterion4() {
    const auto t0 = Clock::now();
    Outcome all;
    for (const auto& b : bundled_models()) {
        const DiscreteNode node = b.build(128);
        const Vec x0 = b.diffusion ? Vec(Vec::Zero(node.state_dim())) : (node.metric.num_nodes() > 1 ? bump(node) : Vec(Vec::Ones(node.state_dim())));
        const Outcome o = audit_run(node, x0);
        all.passed = all.passed && o.passed;
        all.detail += b.name + "[" + o.detail + "] ";
    }
    const double dt = seconds_since(t0);
    all.passed = all.passed && dt < 60.0;
    all.detail += "time=" + fmt(dt) + "s";
    return all;
}

Outcome criterion5() {
    const DiscreteNode node = assemble_hyperbolic_node(string_model(), 128);
    const auto traj = simulate(node, bump(node), InputSignal::zero(), 10.0, 1e-3, {0, 1e-8, false});
    const double h0 = traj.hamiltonian.front();
    double drift = 0.0;
    for (double h : traj.hamiltonian) drift = std::max(drift, std::abs(h - h0) / h0);
    return {drift <= 1e-9, "max_rel_drift=" + fmt(drift)};
}

Outcome criterion6() {
    Outcome all;
    for (const auto& b : bundled_models()) {
        const ScanReport r = positive_real_scan(b.build(kDefaultCells));
        const bool ok = r.min_herm_eig >= -1e-9;
        all.passed = all.passed && ok;
        all.detail += b.name + "=" + fmt(r.min_herm_eig) + " ";
    }
    return all;
}

Outcome criterion7() {
    Outcome all;
    for (const auto& b : bundled_models()) {
        const ContractionReport r = contraction_scan(b.build(kDefaultCells), {0.1, 1.0, 10.0}, 1e-8);
        all.passed = all.passed && r.passed;
        all.detail += b.name + "=" + fmt(r.max_norm) + " ";
    }
    return all;
}

Outcome criterion8() {
    std::mt19937 rng(20268);
    int agree = 0;
    for (int k = 0; k < 100; ++k) {
        const EnergyMetric metric = random_metric(rng, random_dim(rng, 1, 4), random_dim(rng, 1, 3));
        const Mat A = random_dissipative(rng, metric);
        const auto r = check_maximal_dissipative(A, metric, default_resolvent_points());
        if (r.flags_agree && r.is_dissipative) ++agree;
    }
    Outcome o{agree == 100, "random=" + std::to_string(agree) + "/100 "};
    for (const auto& b : bundled_models()) {
        const DiscreteNode node = b.build(kDefaultCells);
        const auto r = check_maximal_dissipative(node.A, node.metric, default_resolvent_points());
        o.passed = o.passed && r.flags_agree && r.is_dissipative;
        o.detail += b.name + "=" + (r.flags_agree ? "agree" : "disagree") + " ";
    }
    return o;
}

double lowest_frequency(const DiscreteNode& node) {
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Mat>(node.A, false).eigenvalues();
    double w = 1e300;
    for (Index k = 0; k < ev.size(); ++k)
        if (ev(k).imag() > 1e-8) w = std::min(w, ev(k).imag());
    return w;
}

double lowest_decay(const DiscreteNode& node) { return -hermitian_eigenvalues(metric_generator(node)).maxCoeff(); }

/// Errors against the exact value over the refinement sequence, and the
/// observed order of the last refinement.
Outcome convergence(const std::string& label, double exact, const std::function<double(Index)>& value) {
    std::vector<double> err;
    std::string detail = label + "[";
    for (Index n : {50, 100, 200, 400}) {
        err.push_back(std::abs(value(n) - exact) / exact);
        detail += fmt(err.back()) + " ";
    }
    double min_order = 1e300;
    for (std::size_t k = 1; k < err.size(); ++k) min_order = std::min(min_order, std::log2(err[k - 1] / err[k]));
    detail += "order=" + fmt(min_order) + "] ";
    return {min_order >= 1.9 && err.back() <= 1e-3, detail};
}

Outcome criterion9() {
    const Outcome s = convergence("string", M_PI / 2.0,
                                  [](Index n) { return lowest_frequency(assemble_hyperbolic_node(string_model(), n)); });
    const Outcome d = convergence("diffusion", M_PI * M_PI,
                                  [](Index n) { return lowest_decay(assemble_catalog_node("diffusion_rod", n)); });
    return {s.passed && d.passed, s.detail + d.detail};
}

Outcome criterion10() {
    const ModelSpec spec = build_catalog_model("singular_string");
    const DiscreteNode node = assemble_model(spec, 128);
    const double lmin = node.metric.min_mass_eigenvalue();
    std::mt19937 rng(20270);
    std::vector<Vec> samples;
    for (int k = 0; k < 10; ++k) samples.push_back(random_vector(rng, node.state_dim()));
    const IsometryReport iso = sqrt_isometry_check(node.metric, samples, 1e-11);
    const Outcome sim = audit_run(node, bump(node));
    return {lmin > 0.0 && iso.passed && sim.passed,
            "min_mass_eig=" + fmt(lmin) + " isometry=" +
                fmt(std::max({iso.u_isometry_error, iso.adjoint_error, iso.composition_error})) + " " + sim.detail};
}

Outcome criterion11() {
    Outcome o;
    const auto narrow = vertical_line_grid(1e2), wide = vertical_line_grid(1e4);
    for (const auto& b : bundled_models()) {
        if (b.name == "mass_spring_damper") continue;
        const DiscreteNode node = b.build(kDefaultCells);
        const double s2 = wellposedness_proxy(node, 1.0, narrow).sup_norm;
        const double s4 = wellposedness_proxy(node, 1.0, wide).sup_norm;
        const double ratio = s4 / s2;
        o.passed = o.passed && (b.diffusion ? ratio >= 2.0 : std::abs(ratio - 1.0) < 0.1);
        o.detail += b.name + "=" + fmt(ratio) + " ";
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, criterion1}, {2, criterion2}, {3, criterion3},  {4, criterion4},   {5, criterion5},   {6, criterion6},
        {7, criterion7}, {8, criterion8}, {9, criterion9},  {10, criterion10}, {11, criterion11},
    };
    int failed = 0;
    for (const auto& [id, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %d: %s\n", o.passed ? "PASS" : "FAIL", id, o.detail.c_str());
        std::fflush(stdout);
        failed += o.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
