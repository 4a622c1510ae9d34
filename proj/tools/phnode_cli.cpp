#include "phnode/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    namespace cli = phnode::cli;
    CLI::App app{"phnode: structure checks and energy-consistent simulation of port-Hamiltonian models"};
    app.require_subcommand(1);

    std::string path;
    std::string target;
    long long n_cells = 0;
    double t_final = 0.0, dt = 0.0, tol = 0.0;
    std::string mode;
    cli::Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("model", path, "JSON model file")->required()->check(CLI::ExistingFile);
        sub->add_option("--n-cells", n_cells, "spatial cells for distributed models")->check(CLI::Range(4LL, 1LL << 20));
        sub->add_option("--tol", tol, "override the check tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--out", opt.out_dir, "output directory");
    };

    auto* validate = app.add_subcommand("validate", "structural checks; JSON report on stdout");
    add_common(validate);
    auto* simulate = app.add_subcommand("simulate", "implicit midpoint run with energy audit");
    add_common(simulate);
    simulate->add_option("--t-final", t_final, "final time")->check(CLI::PositiveNumber);
    simulate->add_option("--dt", dt, "time step")->check(CLI::PositiveNumber);
    auto* scan = app.add_subcommand("scan", "transfer-function and semigroup scans");
    add_common(scan);
    scan->add_option("--mode", mode, "positive-real | vertical-line | contraction | maxdiss")
        ->check(CLI::IsMember({"positive-real", "vertical-line", "contraction", "maxdiss"}));
    auto* exp = app.add_subcommand("export", "write the assembled node as a ph_matrices model file");
    add_common(exp);
    exp->add_option("target", target, "output model file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitUsage;
    }

    if (n_cells > 0) opt.n_cells = static_cast<phnode::Index>(n_cells);
    if (tol > 0.0) opt.tol = tol;
    if (t_final > 0.0) opt.t_final = t_final;
    if (dt > 0.0) opt.dt = dt;
    if (!mode.empty()) opt.mode = mode;

    if (validate->parsed()) return cli::cmd_validate(path, opt, std::cout, std::cerr);
    if (simulate->parsed()) return cli::cmd_simulate(path, opt, std::cout, std::cerr);
    if (scan->parsed()) return cli::cmd_scan(path, opt, std::cout, std::cerr);
    return cli::cmd_export(path, target, opt, std::cout, std::cerr);
}
