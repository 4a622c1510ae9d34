#pragma once

// Command implementations behind the phnode executable. Each returns the
// process exit code: 0 pass, 1 check failure, 2 usage or parse error.

#include "phnode/model_file.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

namespace phnode::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct Options {
    std::optional<Index> n_cells;
    std::optional<double> t_final;
    std::optional<double> dt;
    std::optional<double> tol;
    std::string out_dir = ".";
    std::optional<std::string> mode;
};

namespace detail {

struct Check {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = true;
};

inline Json checks_to_json(const std::vector<Check>& checks) {
    Json arr = Json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"measured", c.measured}, {"threshold", c.threshold}, {"passed", c.passed}});
    return arr;
}

inline void add_report(std::vector<Check>& checks, const ValidationReport& r) {
    for (const auto& v : r.violations) checks.push_back({v.check, v.measured, v.threshold, false});
}

inline std::filesystem::path prepare_out(const Options& o) {
    std::filesystem::path dir(o.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

/// Loads the model or reports a parse error; nullopt means exit 2.
inline std::optional<ModelFile> load(const std::string& path, std::ostream& err) {
    try {
        return load_model_file(path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return std::nullopt;
    }
}

inline constexpr double kDefaultSymBound = 1e-10;

}  // namespace detail

/// Structural checks: pH matrix invariants, model coefficients and port
/// condition, and the metric-symmetric bound of the assembled generator.
/// Prints a JSON report.
inline int cmd_validate(const std::string& path, const Options& opt, std::ostream& out, std::ostream& err) {
    const auto file = detail::load(path, err);
    if (!file) return kExitUsage;
    std::vector<detail::Check> checks;
    Json report = {{"model", file->name}, {"kind", to_string(file->kind)}};
    try {
        bool structural_ok = true;
        if (file->kind == ModelKind::ph_matrices) {
            const auto r = validate_ph_structure(file->ph, opt.tol);
            detail::add_report(checks, r);
            structural_ok = r.passed();
            structural_ok = structural_ok && min_hermitian_eigenvalue(file->ph.H) > 0.0;
            if (r.passed() && !structural_ok)
                checks.push_back({"H not positive definite", min_hermitian_eigenvalue(file->ph.H), 0.0, false});
        } else {
            const ModelSpec spec = model_spec(*file);
            if (const auto* h = std::get_if<HyperbolicModel>(&spec)) {
                const Index n = opt.n_cells.value_or(file->n_cells.value_or(kDefaultCells));
                const auto r = validate_hyperbolic_model(*h, n, opt.tol);
                detail::add_report(checks, r);
                structural_ok = r.passed();
                if (r.passed()) {
                    const auto pc = check_port_condition(h->full_WB(), h->full_WC());
                    checks.push_back({"port condition", pc.residual, kPortTolerance, pc.satisfied});
                }
            }
        }
        if (structural_ok) {
            const Index n = opt.n_cells.value_or(file->n_cells.value_or(kDefaultCells));
            const DiscreteNode node = build_node(*file, n);
            if (file->kind != ModelKind::ph_matrices) report["n_cells"] = n;
            report["state_dim"] = node.state_dim();
            report["input_dim"] = node.input_dim();
            const double bound = opt.tol.value_or(detail::kDefaultSymBound);
            const double sym = metric_symmetric_bound(node);
            checks.push_back({"generator symmetric part", sym, bound, sym <= bound});
            const double lmin = node.metric.min_mass_eigenvalue();
            checks.push_back({"metric positive definite", lmin, 0.0, lmin > 0.0});
        }
    } catch (const ModelFileError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        checks.push_back({std::string("assembly: ") + e.what(), 0.0, 0.0, false});
    }
    bool passed = true;
    for (const auto& c : checks) passed = passed && c.passed;
    report["passed"] = passed;
    report["checks"] = detail::checks_to_json(checks);
    out << report.dump(2) << '\n';
    return passed ? kExitPass : kExitFail;
}

/// Runs the simulation block; writes trajectory.csv (and states.csv when a
/// state stride is set) plus audit.json to the output directory.
inline int cmd_simulate(const std::string& path, const Options& opt, std::ostream& out, std::ostream& err) {
    const auto file = detail::load(path, err);
    if (!file) return kExitUsage;
    if (!file->simulation) {
        err << "error: model file has no simulation block\n";
        return kExitUsage;
    }
    try {
        SimulationSpec sim = *file->simulation;
        if (opt.t_final) sim.t_final = *opt.t_final;
        if (opt.dt) sim.dt = *opt.dt;
        if (!(sim.t_final > 0.0) || !(sim.dt > 0.0)) {
            err << "error: t_final and dt must be positive\n";
            return kExitUsage;
        }
        const DiscreteNode node = build_node(*file, opt.n_cells);
        const auto [a, b] = model_interval(*file);
        const Vec x0 = make_initial_state(sim.x0, node, a, b);
        SimulationOptions so;
        so.state_stride = sim.state_stride;
        const Trajectory traj = simulate(node, x0, sim.input, sim.t_final, sim.dt, so);
        const EnergyAudit audit = energy_audit(traj, node, opt.tol.value_or(kDefaultTolBalance));

        const auto dir = detail::prepare_out(opt);
        {
            auto os = detail::open_out(dir / "trajectory.csv");
            write_trajectory_csv(os, traj);
        }
        if (sim.state_stride > 0) {
            auto os = detail::open_out(dir / "states.csv");
            write_states_csv(os, traj);
        }
        const double h0 = traj.hamiltonian.front(), h1 = traj.hamiltonian.back();
        Json summary = {{"model", file->name},
                        {"steps", traj.num_steps()},
                        {"dt", sim.dt},
                        {"t_final", traj.times.back()},
                        {"H_initial", h0},
                        {"H_final", h1},
                        {"relative_drift", std::abs(h1 - h0) / std::max(std::abs(h0), 1e-300)},
                        {"max_abs_residual", audit.max_abs_residual},
                        {"max_rel_residual", audit.max_rel_residual},
                        {"max_inequality_excess", audit.max_inequality_excess},
                        {"cumulative_supplied", audit.cumulative_supplied},
                        {"cumulative_dissipated", audit.cumulative_dissipated},
                        {"compatibility_warning", traj.compatibility_warning},
                        {"tolerance", audit.tolerance},
                        {"passed", audit.passed}};
        {
            auto os = detail::open_out(dir / "audit.json");
            os << summary.dump(2) << '\n';
        }
        out << (audit.passed ? "PASS" : "FAIL") << " simulate " << file->name << " steps=" << traj.num_steps()
            << " max_rel_residual=" << format_number(audit.max_rel_residual)
            << " cumulative_dissipated=" << format_number(audit.cumulative_dissipated) << '\n';
        return audit.passed ? kExitPass : kExitFail;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFail;
    }
}

/// positive-real, vertical-line, contraction or maxdiss scan. Writes a CSV
/// to the output directory and prints a summary line.
inline int cmd_scan(const std::string& path, const Options& opt, std::ostream& out, std::ostream& err) {
    const auto file = detail::load(path, err);
    if (!file) return kExitUsage;
    ScanSpec scan = file->scan.value_or(ScanSpec{});
    if (opt.mode) scan.mode = *opt.mode;
    if (!phnode::detail::scan_modes().count(scan.mode)) {
        err << "error: unknown scan mode '" << scan.mode << "'\n";
        return kExitUsage;
    }
    try {
        const DiscreteNode node = build_node(*file, opt.n_cells);
        const auto dir = detail::prepare_out(opt);
        bool passed = true;
        if (scan.mode == "positive-real") {
            const ScanReport r = positive_real_scan(node, make_s_grid(scan.grid), opt.tol.value_or(kDefaultTolPR));
            auto os = detail::open_out(dir / "scan_positive_real.csv");
            write_scan_csv(os, r.samples);
            passed = r.passed;
            out << (passed ? "PASS" : "FAIL") << " positive-real " << file->name
                << " min_herm_eig=" << format_number(r.min_herm_eig) << " at s=" << format_number(r.argmin_s.real())
                << (r.argmin_s.imag() < 0 ? "" : "+") << format_number(r.argmin_s.imag()) << "i\n";
        } else if (scan.mode == "vertical-line") {
            if (scan.omega_max.empty()) throw PreconditionError("omega_max list is empty");
            std::vector<double> ws = scan.omega_max;
            std::sort(ws.begin(), ws.end());
            VerticalLineReport widest;
            std::vector<GrowthPoint> growth;
            for (double w : ws) {
                widest = wellposedness_proxy(node, scan.sigma, vertical_line_grid(w));
                growth.push_back({w, widest.sup_norm});
            }
            {
                auto os = detail::open_out(dir / "scan_vertical_line.csv");
                write_scan_csv(os, widest.samples);
            }
            auto os = detail::open_out(dir / "vertical_line_growth.csv");
            os << "omega_max,sup_norm\n";
            for (const auto& g : growth) os << format_number(g.omega_max) << ',' << format_number(g.sup_norm) << '\n';
            for (std::size_t k = 0; k < growth.size(); ++k) {
                passed = passed && std::isfinite(growth[k].sup_norm);
                if (k > 0) passed = passed && growth[k].sup_norm >= growth[k - 1].sup_norm;
            }
            const double ratio = growth.front().sup_norm > 0.0 ? growth.back().sup_norm / growth.front().sup_norm : 1.0;
            out << (passed ? "PASS" : "FAIL") << " vertical-line " << file->name << " sigma=" << format_number(scan.sigma)
                << " growth=" << format_number(ratio);
            for (const auto& g : growth) out << " sup[" << format_number(g.omega_max) << "]=" << format_number(g.sup_norm);
            out << '\n';
        } else if (scan.mode == "contraction") {
            const ContractionReport r = contraction_scan(node, scan.times, opt.tol.value_or(1e-8));
            auto os = detail::open_out(dir / "scan_contraction.csv");
            os << "t,norm\n";
            for (const auto& s : r.samples) os << format_number(s.t) << ',' << format_number(s.norm) << '\n';
            passed = r.passed;
            out << (passed ? "PASS" : "FAIL") << " contraction " << file->name
                << " max_norm=" << format_number(r.max_norm) << " at t=" << format_number(r.worst_t) << '\n';
        } else {
            const MaxDissReport r = check_maximal_dissipative(node.A, node.metric, scan.lambdas, opt.tol);
            auto os = detail::open_out(dir / "scan_maxdiss.csv");
            os << "re_lambda,im_lambda,condition,nonsingular\n";
            for (const auto& w : r.resolvent)
                os << format_number(w.lambda.real()) << ',' << format_number(w.lambda.imag()) << ','
                   << format_number(w.condition) << ',' << (w.nonsingular ? 1 : 0) << '\n';
            passed = r.is_dissipative && r.resolvent_surjective && r.adjoint_dissipative;
            out << (passed ? "PASS" : "FAIL") << " maxdiss " << file->name << " dissipative=" << r.is_dissipative
                << " resolvent=" << r.resolvent_surjective << " adjoint=" << r.adjoint_dissipative
                << " agree=" << r.flags_agree << '\n';
        }
        return passed ? kExitPass : kExitFail;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFail;
    }
}

/// Writes the assembled node as a ph_matrices model file.
inline int cmd_export(const std::string& path, const std::string& target, const Options& opt, std::ostream& out,
                      std::ostream& err) {
    const auto file = detail::load(path, err);
    if (!file) return kExitUsage;
    try {
        const DiscreteNode node = build_node(*file, opt.n_cells);
        save_model_file(node_model_file(node, file->name + "_assembled"), target);
        out << "wrote " << target << " (n=" << node.state_dim() << ", m=" << node.input_dim() << ")\n";
        return kExitPass;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFail;
    }
}

}  // namespace phnode::cli
