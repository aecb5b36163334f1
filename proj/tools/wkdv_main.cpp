// Command-line driver: stability runs, spectrum surveys, norm probes, and
// re-fitting audits from stored trajectories.
//
// Exit codes: 0 success, 1 bad configuration, 2 mid-run solver failure.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wkdv/experiments.hpp"

namespace {

using namespace wkdv;

std::vector<Scalar> parse_list(const std::string& csv) {
    std::vector<Scalar> out;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

int cmd_simulate(const ScenarioConfig& cfg) {
    ScenarioResult result = run_stability_scenario(cfg);
    const std::string prefix = cfg.out.empty() ? "run" : cfg.out;
    write_trajectory_csv(prefix + "_trajectory.csv", result);
    write_audit_json(prefix + "_audit.json", result);
    if (result.failed) {
        std::cerr << "simulate: run failed mid-way: " << result.error
                  << " (partial outputs flushed)\n";
        return 2;
    }
    std::cout << "simulate: wrote " << prefix << "_trajectory.csv and " << prefix
              << "_audit.json";
    if (result.audit.kappa_defined) {
        std::cout << "  (rate " << result.audit.b_fit << ", kappa "
                  << result.audit.kappa << ", r2 " << result.audit.r2 << ")";
    }
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for exponentially weighted KdV soliton dynamics"};
    app.require_subcommand(1);

    // --- simulate ---------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "coupled stability run with modulation tracking");
    std::string config_path;
    ScenarioConfig cfg;
    sim->add_option("--config", config_path, "flat key = value configuration file");
    auto* oc0 = sim->add_option("--c0", cfg.c0, "reference soliton speed");
    auto* oa = sim->add_option("--a", cfg.a, "exponential weight (0 = unweighted)");
    auto* oeps = sim->add_option("--eps", cfg.eps, "perturbation size");
    auto* oshape = sim->add_option("--shape", cfg.shape, "gaussian | dgaussian | sech");
    auto* oL = sim->add_option("--L", cfg.L, "domain half-length");
    auto* oN = sim->add_option("--N", cfg.N, "grid points (power of two)");
    auto* odt = sim->add_option("--dt", cfg.dt, "time step");
    auto* oT = sim->add_option("--T", cfg.T_final, "final time");
    auto* odelta = sim->add_option("--delta", cfg.delta, "audit segment length");
    auto* osample = sim->add_option("--sample-dt", cfg.sample_dt, "trajectory sampling stride");
    auto* oout = sim->add_option("--out", cfg.out, "output path prefix");
    auto* oseed = sim->add_option("--seed", cfg.seed, "seed echoed into outputs");
    auto* oscheme = sim->add_option("--scheme", cfg.scheme, "etdrk4 | ifrk4");
    bool no_dealias = false;
    auto* odea = sim->add_flag("--no-dealias", no_dealias, "disable the 2/3 rule");

    // --- spectrum ----------------------------------------------------------
    auto* spec = app.add_subcommand("spectrum", "dense eigensolve survey of the weighted operator");
    std::string a_list = "0.1,0.3,0.5";
    std::string c_list = "1.0";
    Scalar sp_L = 20 * M_PI;
    int sp_N = 512;
    std::string sp_out = "spectrum.csv";
    spec->add_option("--a-values", a_list, "comma-separated weights");
    spec->add_option("--c-values", c_list, "comma-separated speeds");
    spec->add_option("--L", sp_L, "domain half-length");
    spec->add_option("--N", sp_N, "grid points (<= 2048)");
    spec->add_option("--out", sp_out, "output CSV path");

    // --- norms --------------------------------------------------------------
    auto* norms = app.add_subcommand("norms", "ensemble probes of the dispersive estimates");
    ProbeConfig pc;
    norms->add_option("--seed", pc.seed, "ensemble seed")->required();
    norms->add_option("--nx", pc.nx, "space points (L = pi)");
    norms->add_option("--nt", pc.nt, "time samples");
    norms->add_option("--refine", pc.refine, "measure on a 2^(refine-1) finer lattice");
    norms->add_option("--T", pc.T, "time horizon");
    norms->add_option("--s", pc.s, "Sobolev index");
    norms->add_option("--samples-embedding", pc.n_embedding);
    norms->add_option("--samples-bilinear", pc.n_bilinear);
    norms->add_option("--samples-linear", pc.n_linear);
    norms->add_option("--samples-shell", pc.n_shell);
    std::string norms_out = "probes.json";
    norms->add_option("--out", norms_out, "output JSON path");

    // --- audit ---------------------------------------------------------------
    auto* audit = app.add_subcommand("audit", "re-fit decay rates from a stored trajectory");
    std::string traj_path;
    Scalar audit_delta = 1.0;
    Scalar audit_c0 = 1.0;
    std::string audit_out = "audit.json";
    audit->add_option("--trajectory", traj_path, "trajectory CSV")->required();
    audit->add_option("--delta", audit_delta, "segment length");
    audit->add_option("--c0", audit_c0, "reference speed");
    audit->add_option("--out", audit_out, "output JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            if (!config_path.empty()) {
                ScenarioConfig from_file = load_config(config_path);
                // explicit flags win over file values
                if (!*oc0) cfg.c0 = from_file.c0;
                if (!*oa) cfg.a = from_file.a;
                if (!*oeps) cfg.eps = from_file.eps;
                if (!*oshape) cfg.shape = from_file.shape;
                if (!*oL) cfg.L = from_file.L;
                if (!*oN) cfg.N = from_file.N;
                if (!*odt) cfg.dt = from_file.dt;
                if (!*oT) cfg.T_final = from_file.T_final;
                if (!*odelta) cfg.delta = from_file.delta;
                if (!*osample) cfg.sample_dt = from_file.sample_dt;
                if (!*oout) cfg.out = from_file.out;
                if (!*oseed) cfg.seed = from_file.seed;
                if (!*oscheme) cfg.scheme = from_file.scheme;
                if (!*odea) cfg.dealias = from_file.dealias;
            }
            if (no_dealias) cfg.dealias = false;
            cfg.validate();
            return cmd_simulate(cfg);
        }
        if (spec->parsed()) {
            std::vector<std::pair<Scalar, Scalar>> points;
            for (Scalar c : parse_list(c_list)) {
                for (Scalar a : parse_list(a_list)) points.emplace_back(a, c);
            }
            auto rows = run_spectrum_survey(points, sp_L, sp_N);
            write_survey_csv(sp_out, rows);
            std::cout << "spectrum: wrote " << rows.size() << " rows to " << sp_out << "\n";
            return 0;
        }
        if (norms->parsed()) {
            auto reports = run_norm_probes(pc);
            write_probe_json(norms_out, reports);
            std::cout << "norms: wrote " << reports.size() << " reports to " << norms_out
                      << "\n";
            return 0;
        }
        if (audit->parsed()) {
            auto rows = read_trajectory_csv(traj_path);
            ScenarioResult shell;
            shell.cfg.delta = audit_delta;
            shell.cfg.c0 = audit_c0;
            shell.trajectory = rows;
            shell.audit = audit_from_trajectory(rows, audit_delta, audit_c0);
            write_audit_json(audit_out, shell);
            std::cout << "audit: wrote " << audit_out << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
