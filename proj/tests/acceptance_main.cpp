// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Heavy end-to-end checks live here (the per-module unit
// suites cover edge cases and oracles).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wkdv/experiments.hpp"

using namespace wkdv;

namespace {

int g_failures = 0;

void criterion(int idx, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %-24s %s\n", pass ? "PASS" : "FAIL", idx,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Field random_band_limited(const Grid1D& grid, std::mt19937_64& rng) {
    std::normal_distribution<Scalar> gauss(0, 1);
    Field f = make_field(grid);
    for (int m = 0; m < grid.n_points(); ++m) f.values[m] = gauss(rng);
    SpectralField sf = to_spectral(f);
    const int n = grid.n_points();
    for (int k = 0; k < n; ++k) {
        const int sk = (k < n / 2) ? k : k - n;
        if (std::abs(sk) > n / 3) {
            sf.coeffs[k] = 0;
        } else {
            sf.coeffs[k] /= 1.0 + 0.05 * sk * sk;
        }
    }
    return from_spectral(sf);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- 1 ----------------------------------------------------------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    Grid1D grid = make_grid(20 * M_PI, 1024);
    Scalar worst = 0;
    for (Scalar c : {0.5, 1.0, 4.0}) {
        worst = std::max(worst, soliton_residual(SolitonParams{c, 0}, grid));
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream d;
    d << "max residual " << worst << " over c in {0.5, 1, 4}; " << elapsed << " s";
    criterion(1, "soliton exactness", worst < 1e-8 && elapsed < 1.0, d.str());
}

// --- 2 ----------------------------------------------------------------------

void criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    Grid1D grid = make_grid(20 * M_PI, 1024);
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    cfg.c0 = 1.0;
    cfg.a = 0.3;
    Field u = psi(SolitonParams{1.0, 0.0}, grid);
    const Scalar lyap0 = lyapunov_energy(u, cfg.c0);
    for (int n = 0; n < 5000; ++n) u = step_kdv(u, cfg);
    const Scalar drift = std::abs(peak_location(u) - 5.0);
    Field expected = psi(SolitonParams{1.0, 5.0}, grid);
    const Scalar shape_err = l2_norm(Field{grid, u.values - expected.values});
    const Scalar lyap_err = std::abs(lyapunov_energy(u, cfg.c0) - lyap0) / std::abs(lyap0);
    const double elapsed = seconds_since(t0);
    std::ostringstream d;
    d << "peak drift " << drift << ", shape L2 " << shape_err << ", energy drift "
      << lyap_err << "; " << elapsed << " s";
    criterion(2, "traveling-wave fidelity",
              drift < 1e-3 && shape_err < 1e-6 && lyap_err < 1e-6 && elapsed < 60.0,
              d.str());
}

// --- 3 ----------------------------------------------------------------------

void criterion_3() {
    Grid1D grid = make_grid(20 * M_PI, 1024);
    WeightParams params{0.3, 1.0};
    SpectralPackage pkg = build_spectral_package(params, grid);
    Scalar biorth = 0;
    biorth = std::max(biorth, std::abs(inner(pkg.zeta1, pkg.eta1) - 1));
    biorth = std::max(biorth, std::abs(inner(pkg.zeta2, pkg.eta2) - 1));
    biorth = std::max(biorth, std::abs(inner(pkg.zeta1, pkg.eta2)));
    biorth = std::max(biorth, std::abs(inner(pkg.zeta2, pkg.eta1)));
    const Scalar k1 = l2_norm(apply_Aa(pkg.zeta1, params)) / l2_norm(pkg.zeta1);
    Field once = apply_Aa(pkg.zeta2, params);
    const Scalar k2 = l2_norm(apply_Aa(once, params)) / l2_norm(pkg.zeta2);
    std::ostringstream d;
    d << "biorthogonality defect " << biorth << ", |A zeta1| " << k1 << ", |A^2 zeta2| "
      << k2;
    criterion(3, "spectral package", biorth < 1e-8 && k1 < 1e-6 && k2 < 1e-4, d.str());
}

// --- 4 ----------------------------------------------------------------------

void criterion_4() {
    const auto t0 = std::chrono::steady_clock::now();
    Grid1D grid = make_grid(20 * M_PI, 512);
    WeightParams params{0.3, 1.0};
    auto modes = discretized_spectrum(params, grid);
    int kernel = 0, localized = 0;
    bool gap_ok = true, curve_ok = true, curve_all_ok = true;
    Scalar top_re = -1e9, worst_dist = 0;
    for (const auto& m : modes) {
        if (std::abs(m.lambda) < 1e-3) {
            ++kernel;
            continue;
        }
        top_re = std::max(top_re, m.lambda.real());
        const Scalar dist = curve_distance(m.lambda, params);
        worst_dist = std::max(worst_dist, dist);
        if (dist > 0.05) curve_all_ok = false;
        if (m.boundary_mass <= 0.01) {
            ++localized;
            if (m.lambda.real() > -0.273 + 0.02) gap_ok = false;
            if (dist > 0.05) curve_ok = false;
        }
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream d;
    d << "kernel modes " << kernel << ", localized non-kernel " << localized
      << " (extended branch modes carry ~10% boundary mass and are truncation-flagged); "
      << "unfiltered: max curve distance " << worst_dist << ", top Re " << top_re << "; "
      << elapsed << " s";
    criterion(4, "spectrum placement",
              kernel == 2 && gap_ok && curve_ok && curve_all_ok && elapsed < 120.0,
              d.str());
}

// --- 5 ----------------------------------------------------------------------

void criterion_5() {
    Grid1D grid = make_grid(20 * M_PI, 1024);
    EvolutionConfig cfg;
    cfg.c0 = 1.0;
    cfg.a = 0.3;
    std::mt19937_64 rng(2024);
    int violations = 0;
    Scalar closest = 1e9;
    for (int i = 0; i < 100; ++i) {
        Field f = random_band_limited(grid, rng);
        const Scalar base = l2_norm(f);
        for (Scalar t : {0.5, 1.0, 2.0}) {
            const Scalar bound = std::exp(-0.273 * t) * base;
            const Scalar got = l2_norm(apply_W2(f, t, cfg));
            closest = std::min(closest, (bound - got) / bound);
            if (got > bound) ++violations;
        }
    }
    std::ostringstream d;
    d << violations << " violations over 300 evaluations (closest margin " << closest
      << ")";
    criterion(5, "semigroup decay", violations == 0, d.str());
}

// --- 6 and 7 ------------------------------------------------------------------

void criteria_6_7() {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig cfg;  // defaults: c0 = 1, a = 0.3, eps = 1e-3, gaussian,
                         // L = 20 pi, N = 1024, dt = 1e-3, T = 40, delta = 1
    ScenarioResult result = run_stability_scenario(cfg);
    const double elapsed = seconds_since(t0);

    if (result.failed) {
        criterion(6, "asymptotic stability run", false, "run failed: " + result.error);
        criterion(7, "modulation constraint", false, "run failed");
        return;
    }
    Scalar max_v = 0;
    for (const auto& row : result.trajectory) max_v = std::max(max_v, row.h1_v);
    Scalar c20 = 0, c40 = 0;
    for (const auto& row : result.trajectory) {
        if (std::abs(row.t - 20.0) < 1e-9) c20 = row.c;
        if (std::abs(row.t - 40.0) < 1e-9) c40 = row.c;
    }
    const auto& audit = result.audit;
    // segment increments turn negative once the transient has passed
    bool increments_negative = true;
    for (size_t n = 3; n < audit.rows.size(); ++n) {
        if (audit.rows[n].N_sq >= audit.rows[n - 1].N_sq) increments_negative = false;
    }

    const bool pass6 = audit.kappa_defined && audit.b_fit >= 0.137 &&
                       audit.b_fit <= 0.410 && audit.kappa < 1.0 && max_v <= 10 * cfg.eps &&
                       audit.rates_fit_defined && audit.rates_decay > 0 &&
                       std::abs(c40 - c20) < 1e-2 * cfg.eps && increments_negative &&
                       elapsed < 900.0;
    std::ostringstream d6;
    d6 << "rate " << audit.b_fit << " in [0.137, 0.410], kappa " << audit.kappa
       << ", r2 " << audit.r2 << ", max |v|_H1 " << max_v << ", rate-of-rates "
       << audit.rates_decay << ", |c(40)-c(20)| " << std::abs(c40 - c20)
       << ", increments negative after transient: " << (increments_negative ? "yes" : "no")
       << "; " << elapsed << " s";
    criterion(6, "asymptotic stability run", pass6, d6.str());

    std::ostringstream d7;
    d7 << "max |<w, eta_i>| / |w| = " << audit.max_constraint_defect << ", "
       << audit.reprojections << " re-projection events";
    criterion(7, "modulation constraint",
              audit.max_constraint_defect < 1e-4 && audit.reprojections <= 3, d7.str());
}

// --- 8 ----------------------------------------------------------------------

void criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();
    ProbeConfig base;
    base.seed = 7;
    base.n_shell = 1000;
    base.n_embedding = 200;
    base.n_bilinear = 60;
    base.n_linear = 20;
    base.n_resonance = 2000;
    auto reports = run_norm_probes(base);

    ProbeConfig fine = base;
    fine.refine = 2;
    fine.n_shell = 50;  // Parseval at the fine lattice is a smoke check only
    fine.n_embedding = 50;
    auto refined = run_norm_probes(fine);

    auto find = [](const std::vector<ProbeReport>& rs, const std::string& kind) {
        for (const auto& r : rs)
            if (r.estimate_kind == kind) return r;
        throw std::runtime_error("missing report " + kind);
    };

    const Scalar shell_defect = find(reports, "shell-parseval").max_ratio;
    const Scalar resonance = find(reports, "resonance").max_ratio;
    const Scalar embed = find(reports, "embedding").max_ratio;
    const Scalar embed_cap = embedding_bound(base.s, base.T);

    bool stable = true;
    std::ostringstream drift_list;
    for (const char* kind : {"bilinear", "airy-hom", "diss-hom", "airy-inhom", "diss-inhom"}) {
        const Scalar c1 = find(reports, kind).max_ratio;
        const Scalar c2 = find(refined, kind).max_ratio;
        const Scalar drift = std::abs(c2 - c1) / c1;
        drift_list << kind << " " << c1 << "->" << c2 << " (" << 100 * drift << "%) ";
        if (!(std::isfinite(c1) && std::isfinite(c2)) || drift > 0.20) stable = false;
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream d;
    d << "shell Parseval defect " << shell_defect << ", resonance defect " << resonance
      << ", embedding max " << embed << " <= " << embed_cap << ", refinement drift: "
      << drift_list.str() << "; " << elapsed << " s";
    criterion(8, "norm machinery",
              shell_defect < 1e-10 && resonance < 1e-10 && embed <= embed_cap && stable,
              d.str());
}

// --- 9 ----------------------------------------------------------------------

void criterion_9() {
    ScenarioConfig cfg;
    cfg.N = 512;
    cfg.T_final = 2.0;
    cfg.delta = 0.5;
    cfg.seed = 42;
    auto run_once = [&](const std::string& prefix) {
        ScenarioResult r = run_stability_scenario(cfg);
        write_trajectory_csv(prefix + "_trajectory.csv", r);
        write_audit_json(prefix + "_audit.json", r);
    };
    run_once("/tmp/wkdv_det_a");
    run_once("/tmp/wkdv_det_b");
    const bool same_csv =
        slurp("/tmp/wkdv_det_a_trajectory.csv") == slurp("/tmp/wkdv_det_b_trajectory.csv");
    const bool same_json =
        slurp("/tmp/wkdv_det_a_audit.json") == slurp("/tmp/wkdv_det_b_audit.json");
    std::ostringstream d;
    d << "trajectory bytes " << (same_csv ? "identical" : "DIFFER") << ", audit bytes "
      << (same_json ? "identical" : "DIFFER");
    criterion(9, "determinism", same_csv && same_json, d.str());
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criteria_6_7();
    criterion_8();
    criterion_9();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
