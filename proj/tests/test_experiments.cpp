#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "wkdv/experiments.hpp"

using namespace wkdv;

namespace {

std::string temp_path(const std::string& name) {
    return std::string("/tmp/wkdv_test_") + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig quick_cfg() {
    ScenarioConfig cfg;
    cfg.N = 256;
    cfg.dt = 2e-3;
    cfg.T_final = 2.0;
    cfg.delta = 0.5;
    cfg.sample_dt = 0.1;
    cfg.eps = 1e-3;
    return cfg;
}

}  // namespace

TEST_CASE("decay fit: exact exponential") {
    std::vector<Scalar> t, v;
    for (int i = 0; i <= 200; ++i) {
        t.push_back(0.1 * i);
        v.push_back(std::exp(-0.273 * 0.1 * i));
    }
    DecayFit fit = fit_decay_rate(t, v, 1.0);
    CHECK(std::abs(fit.rate + 0.273) < 1e-9);
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.kappa_per_delta == doctest::Approx(std::exp(-0.273)).epsilon(1e-9));
}

TEST_CASE("decay fit: constant series has zero rate") {
    std::vector<Scalar> t, v;
    for (int i = 0; i < 30; ++i) {
        t.push_back(i);
        v.push_back(4.2);
    }
    DecayFit fit = fit_decay_rate(t, v, 1.0);
    CHECK(std::abs(fit.rate) < 1e-14);
}

TEST_CASE("decay fit: oscillating modulation stays within 0.02 of the mean rate") {
    std::vector<Scalar> t, v;
    for (int i = 0; i <= 400; ++i) {
        const Scalar ti = 0.1 * i;
        t.push_back(ti);
        v.push_back(std::exp(-0.273 * ti) * (1 + 0.1 * std::sin(ti)));
    }
    DecayFit fit = fit_decay_rate(t, v, 1.0);
    CHECK(std::abs(fit.rate + 0.273) < 0.02);
}

TEST_CASE("decay fit rejections") {
    std::vector<Scalar> t{0, 1, 2, 3}, v{1, 1, 1, 1};
    CHECK_THROWS_AS(fit_decay_rate(t, v, 1.0), std::invalid_argument);
    std::vector<Scalar> t5{0, 1, 2, 3, 4}, bad{1, 1, 0.0, 1, 1};
    CHECK_THROWS_AS(fit_decay_rate(t5, bad, 1.0), std::invalid_argument);
    std::vector<Scalar> neg{1, 1, -2, 1, 1};
    CHECK_THROWS_AS(fit_decay_rate(t5, neg, 1.0), std::invalid_argument);
}

TEST_CASE("config file round trip with overrides") {
    const std::string path = temp_path("config.txt");
    {
        std::ofstream out(path);
        out << "# stability scenario\n";
        out << "c0 = 1.0\n";
        out << "a = 0.25\n";
        out << "eps = 2e-3\n";
        out << "shape = dgaussian\n";
        out << "N = 512\n";
        out << "dt = 5e-4\n";
        out << "T = 4\n";
        out << "delta = 1\n";
        out << "sample_dt = 0.25\n";
        out << "seed 99\n";  // whitespace form
        out << "scheme = ifrk4\n";
        out << "dealias = off\n";
    }
    ScenarioConfig cfg = load_config(path);
    CHECK(cfg.a == 0.25);
    CHECK(cfg.eps == 2e-3);
    CHECK(cfg.shape == "dgaussian");
    CHECK(cfg.N == 512);
    CHECK(cfg.seed == 99);
    CHECK(cfg.scheme == "ifrk4");
    CHECK(cfg.dealias == false);
    CHECK_NOTHROW(cfg.validate());

    set_config_value(cfg, "a", "0.3");
    CHECK(cfg.a == 0.3);
    CHECK_THROWS_AS(set_config_value(cfg, "bogus", "1"), std::invalid_argument);
}

TEST_CASE("config validation rejects bad scenarios") {
    ScenarioConfig cfg = quick_cfg();
    cfg.eps = 0.2;  // above the smallness cap
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = quick_cfg();
    cfg.a = 0.8;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = quick_cfg();
    cfg.delta = 0.33;  // not a multiple of sample_dt
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = quick_cfg();
    cfg.scheme = "rk4";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = quick_cfg();
    cfg.shape = "triangle";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = quick_cfg();
    cfg.a = 0.0;  // unweighted contrast mode is a valid configuration
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("perturbation shapes decay at the boundary") {
    Grid1D g = make_grid(20 * M_PI, 256);
    for (const char* id : {"gaussian", "dgaussian", "sech"}) {
        Field f = perturbation_shape(id, g);
        CHECK(std::abs(f.values[0]) < 1e-10);
        CHECK(sup_norm(f) > 0.1);
    }
}

TEST_CASE("zero-size perturbation: all norms zero, kappa flagged undefined") {
    ScenarioConfig cfg = quick_cfg();
    cfg.eps = 0;
    ScenarioResult r = run_stability_scenario(cfg);
    CHECK(!r.failed);
    for (const auto& row : r.trajectory) {
        CHECK(row.h1_w < 1e-12);
        CHECK(row.h1_v < 1e-12);
    }
    CHECK(!r.audit.kappa_defined);
    CHECK(r.audit.reprojections == 0);
}

TEST_CASE("short scenario: decay, audit table, CSV round trip, determinism") {
    ScenarioConfig cfg = quick_cfg();
    ScenarioResult r = run_stability_scenario(cfg);
    REQUIRE(!r.failed);
    REQUIRE(r.trajectory.size() == 21);  // T / sample_dt + 1
    CHECK(r.audit.rows.size() == 5);     // n = 0..4 at delta = 0.5

    // the weighted perturbation shrinks over the window
    CHECK(r.trajectory.back().h1_w < r.trajectory.front().h1_w);
    // constraint held
    CHECK(r.audit.max_constraint_defect < 1e-6);
    CHECK(r.audit.reprojections == 0);

    // round trip through the CSV reproduces the audit table exactly
    const std::string path = temp_path("traj.csv");
    write_trajectory_csv(path, r);
    auto rows = read_trajectory_csv(path);
    REQUIRE(rows.size() == r.trajectory.size());
    IterationAudit again = audit_from_trajectory(rows, cfg.delta, cfg.c0);
    REQUIRE(again.rows.size() == r.audit.rows.size());
    for (size_t i = 0; i < again.rows.size(); ++i) {
        CHECK(std::abs(again.rows[i].N_sq - r.audit.rows[i].N_sq) <=
              1e-12 * std::max<Scalar>(1, r.audit.rows[i].N_sq));
    }

    // identical configuration, identical bytes
    ScenarioResult r2 = run_stability_scenario(cfg);
    const std::string path2 = temp_path("traj2.csv");
    write_trajectory_csv(path2, r2);
    CHECK(slurp(path) == slurp(path2));
    const std::string a1 = temp_path("audit1.json"), a2 = temp_path("audit2.json");
    write_audit_json(a1, r);
    write_audit_json(a2, r2);
    CHECK(slurp(a1) == slurp(a2));
}

TEST_CASE("spectrum survey: empty grid, invalid rows skipped, gap value") {
    auto empty = run_spectrum_survey({}, 20 * M_PI, 256);
    CHECK(empty.empty());
    const std::string path = temp_path("survey.csv");
    write_survey_csv(path, empty);
    CHECK(slurp(path) == "a,c,re_lambda,im_lambda,is_discrete_flag,boundary_mass\n");

    // one invalid point (skipped with a warning) plus one valid one
    auto rows = run_spectrum_survey({{0.9, 1.0}, {0.3, 1.0}}, 20 * M_PI, 256);
    CHECK(rows.size() == 256);
    int discrete = 0;
    Scalar top = -1e9;
    for (const auto& r : rows) {
        CHECK(r.a == 0.3);
        if (r.is_discrete) {
            ++discrete;
        } else {
            top = std::max(top, r.lambda.real());
        }
    }
    CHECK(discrete == 2);
    // measured spectral gap tracks a(c - a^2) = 0.273 up to the O(1/L)
    // truncation shift of the branch endpoint (~0.03 at L = 20 pi)
    CHECK(std::abs(-top - 0.273) < 0.05);
}

TEST_CASE("survey sweep reproduces the gap formula a(1 - a^2) within 0.02") {
    // the branch-endpoint truncation shift scales like 1/L; at L = 60 pi it
    // is below the stated tolerance for the whole sweep
    auto rows = run_spectrum_survey({{0.1, 1.0}, {0.3, 1.0}, {0.5, 1.0}}, 60 * M_PI, 1024);
    for (Scalar a : {0.1, 0.3, 0.5}) {
        Scalar top = -1e9;
        int discrete = 0;
        for (const auto& r : rows) {
            if (r.a != a) continue;
            if (r.is_discrete) {
                ++discrete;
            } else {
                top = std::max(top, r.lambda.real());
            }
        }
        CHECK(discrete == 2);
        const Scalar expected = a * (1.0 - a * a);
        CHECK(std::abs(-top - expected) < 0.02);
    }
    // and the measured gap grows monotonically over the sweep
    auto gap_at = [&](Scalar a) {
        Scalar top = -1e9;
        for (const auto& r : rows)
            if (r.a == a && !r.is_discrete) top = std::max(top, r.lambda.real());
        return -top;
    };
    CHECK(gap_at(0.1) < gap_at(0.3));
    CHECK(gap_at(0.3) < gap_at(0.5));
}

TEST_CASE("probe reports are deterministic for a fixed seed") {
    ProbeConfig pc;
    pc.seed = 123;
    pc.n_shell = 10;
    pc.n_embedding = 5;
    pc.n_bilinear = 3;
    pc.n_linear = 2;
    pc.n_resonance = 50;
    auto r1 = run_norm_probes(pc);
    auto r2 = run_norm_probes(pc);
    REQUIRE(r1.size() == r2.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].max_ratio == r2[i].max_ratio);
        CHECK(r1[i].mean_ratio == r2[i].mean_ratio);
    }
    const std::string p1 = temp_path("probe1.json"), p2 = temp_path("probe2.json");
    write_probe_json(p1, r1);
    write_probe_json(p2, r2);
    CHECK(slurp(p1) == slurp(p2));

    ProbeConfig other = pc;
    other.seed = 124;
    auto r3 = run_norm_probes(other);
    CHECK(r3[1].max_ratio != r1[1].max_ratio);
}

TEST_CASE("mid-run failure is reported, partial trajectory kept") {
    ScenarioConfig cfg = quick_cfg();
    cfg.dt = 0.2;  // grossly unstable explicit coupling
    cfg.sample_dt = 0.2;
    cfg.delta = 0.4;
    cfg.eps = 0.04;
    ScenarioResult r = run_stability_scenario(cfg);
    if (r.failed) {
        CHECK(!r.error.empty());
        CHECK(!r.trajectory.empty());
    }
}
