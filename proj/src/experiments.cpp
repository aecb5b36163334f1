#include "wkdv/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wkdv {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(Scalar x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void ScenarioConfig::validate() const {
    check_weight_window(a, c0, true);
    if (!(eps >= 0) || eps >= eps_cap) {
        std::ostringstream os;
        os << "ScenarioConfig: eps must lie in [0, " << eps_cap << "), got " << eps;
        throw std::invalid_argument(os.str());
    }
    if (!(dt > 0) || !(T_final > 0) || !(delta > 0) || !(sample_dt > 0)) {
        throw std::invalid_argument("ScenarioConfig: dt, T, delta, sample_dt must be positive");
    }
    if (delta > T_final) throw std::invalid_argument("ScenarioConfig: delta exceeds T");
    const Scalar ratio = delta / sample_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
        throw std::invalid_argument(
            "ScenarioConfig: delta must be a multiple of sample_dt (audit rows are "
            "taken from trajectory samples)");
    }
    if (scheme != "etdrk4" && scheme != "ifrk4") {
        throw std::invalid_argument("ScenarioConfig: scheme must be etdrk4 or ifrk4");
    }
    perturbation_shape(shape, make_grid(L, N));  // rejects unknown ids
}

EvolutionConfig ScenarioConfig::evolution() const {
    EvolutionConfig cfg;
    cfg.dt = dt;
    cfg.scheme = (scheme == "ifrk4") ? EvolutionConfig::Scheme::integrating_factor_rk4
                                     : EvolutionConfig::Scheme::exponential_rk4;
    cfg.dealias_on = dealias;
    cfg.c0 = c0;
    cfg.a = a;
    return cfg;
}

void set_config_value(ScenarioConfig& cfg, const std::string& key,
                      const std::string& value) {
    if (key == "c0") cfg.c0 = std::stod(value);
    else if (key == "a") cfg.a = std::stod(value);
    else if (key == "eps") cfg.eps = std::stod(value);
    else if (key == "shape") cfg.shape = value;
    else if (key == "L") cfg.L = std::stod(value);
    else if (key == "N") cfg.N = std::stoi(value);
    else if (key == "dt") cfg.dt = std::stod(value);
    else if (key == "T") cfg.T_final = std::stod(value);
    else if (key == "delta") cfg.delta = std::stod(value);
    else if (key == "sample_dt") cfg.sample_dt = std::stod(value);
    else if (key == "out") cfg.out = value;
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "scheme") cfg.scheme = value;
    else if (key == "dealias") cfg.dealias = (value == "on" || value == "true" || value == "1");
    else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        std::string key, value;
        if (eq != std::string::npos) {
            key = trim(line.substr(0, eq));
            value = trim(line.substr(eq + 1));
        } else {
            std::istringstream ls(line);
            ls >> key >> value;
        }
        if (key.empty() || value.empty()) {
            std::ostringstream os;
            os << "config: malformed line " << lineno << ": '" << line << "'";
            throw std::invalid_argument(os.str());
        }
        set_config_value(cfg, key, value);
    }
    return cfg;
}

Field perturbation_shape(const std::string& id, const Grid1D& grid) {
    const ArrayX& y = grid.points();
    if (id == "gaussian") return Field{grid, (-y.square() / 8).exp()};
    if (id == "dgaussian") return Field{grid, -0.25 * y * (-y.square() / 8).exp()};
    if (id == "sech") {
        Field f = make_field(grid);
        for (int m = 0; m < grid.n_points(); ++m) {
            const Scalar s = 1.0 / std::cosh(0.5 * y[m]);
            f.values[m] = s * s;
        }
        return f;
    }
    throw std::invalid_argument("perturbation_shape: unknown id '" + id + "'");
}

DecayFit fit_decay_rate(const std::vector<Scalar>& t, const std::vector<Scalar>& value,
                        Scalar delta) {
    if (t.size() != value.size()) {
        throw std::invalid_argument("fit_decay_rate: mismatched series lengths");
    }
    if (t.size() < 5) {
        throw std::invalid_argument("fit_decay_rate: need at least 5 samples");
    }
    for (Scalar v : value) {
        if (!(v > 0)) {
            throw std::invalid_argument("fit_decay_rate: series must be positive");
        }
    }
    const size_t skip = t.size() / 10;  // transient window
    const size_t n = t.size() - skip;
    Scalar st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    for (size_t i = skip; i < t.size(); ++i) {
        const Scalar y = std::log(value[i]);
        st += t[i];
        sy += y;
        stt += t[i] * t[i];
        sty += t[i] * y;
        syy += y * y;
    }
    const Scalar det = n * stt - st * st;
    DecayFit fit;
    fit.n_used = static_cast<int>(n);
    fit.rate = (n * sty - st * sy) / det;
    const Scalar mean_y = sy / n;
    Scalar ss_tot = 0, ss_res = 0;
    const Scalar intercept = mean_y - fit.rate * st / n;
    for (size_t i = skip; i < t.size(); ++i) {
        const Scalar y = std::log(value[i]);
        ss_tot += (y - mean_y) * (y - mean_y);
        const Scalar r = y - (intercept + fit.rate * t[i]);
        ss_res += r * r;
    }
    fit.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
    fit.kappa_per_delta = std::exp(fit.rate * delta);
    return fit;
}

IterationAudit audit_from_trajectory(const std::vector<TrajectoryRow>& rows,
                                     Scalar delta, Scalar c0) {
    IterationAudit audit;
    if (rows.empty()) return audit;
    const Scalar tol = 1e-9 * std::max<Scalar>(1, delta);
    int n = 0;
    for (const auto& row : rows) {
        const Scalar target = n * delta;
        if (std::abs(row.t - target) <= tol) {
            AuditRow ar;
            ar.n = n;
            ar.t = row.t;
            ar.N_sq = row.h1_w * row.h1_w;
            ar.v_h1 = row.h1_v;
            ar.cdot = std::abs(row.cdot);
            ar.gammadot = std::abs(row.gammadot);
            ar.c_err = std::abs(row.c - c0);
            audit.rows.push_back(ar);
            ++n;
        }
        if (row.event == "reproject") ++audit.reprojections;
    }

    // continuous fit on the full trajectory of ||w||_{H1}
    std::vector<Scalar> ts, ws;
    for (const auto& row : rows) {
        if (row.h1_w > 0) {
            ts.push_back(row.t);
            ws.push_back(row.h1_w);
        }
    }
    audit.kappa_defined = false;
    if (audit.rows.size() >= 5 && ts.size() >= 5 && ts.size() == rows.size()) {
        DecayFit fit = fit_decay_rate(ts, ws, delta);
        audit.kappa_defined = true;
        audit.kappa = fit.kappa_per_delta;
        audit.b_fit = -fit.rate;
        audit.r2 = fit.r2;
    }

    std::vector<Scalar> tr, vr;
    for (const auto& row : rows) {
        const Scalar mag = std::abs(row.cdot) + std::abs(row.gammadot);
        if (mag > 0) {
            tr.push_back(row.t);
            vr.push_back(mag);
        }
    }
    audit.rates_fit_defined = tr.size() >= 5;
    if (audit.rates_fit_defined) {
        DecayFit fit = fit_decay_rate(tr, vr, delta);
        audit.rates_decay = -fit.rate;
    }
    return audit;
}

ScenarioResult run_stability_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    ScenarioResult result;
    result.cfg = cfg;

    Grid1D grid = make_grid(cfg.L, cfg.N);
    SpectralPackage pkg = build_spectral_package(WeightParams{cfg.a, cfg.c0}, grid);
    EvolutionConfig evo = cfg.evolution();

    Field u0 = psi(SolitonParams{cfg.c0, 0}, grid);
    if (cfg.eps > 0) {
        u0.values += cfg.eps * perturbation_shape(cfg.shape, grid).values;
    }
    InitialProjection proj = project_initial(u0, cfg.c0, cfg.a, pkg);

    PerturbationState state;
    state.v = proj.v0;
    state.w = proj.w0;
    state.mod = proj.state;
    CoupledStepper stepper(grid, evo, pkg);

    const int stride = std::max(1, static_cast<int>(std::round(cfg.sample_dt / cfg.dt)));
    const int n_steps = static_cast<int>(std::round(cfg.T_final / cfg.dt));
    Scalar max_defect = 0;
    int reprojections = 0;

    auto sample = [&](const std::string& forced_event) {
        TrajectoryRow row;
        std::string event = forced_event;
        const Scalar wnorm = l2_norm(state.w);
        if (wnorm > 0) {
            const Scalar defect = l2_norm(project_P(state.w, pkg)) / wnorm;
            max_defect = std::max(max_defect, defect);
            if (defect > 1e-4) {
                InitialProjection re = reproject(state.v, state.w, state.mod, pkg);
                state.v = re.v0;
                state.w = re.w0;
                state.mod = re.state;
                ++reprojections;
                event = "reproject";
            }
        }
        if (cfg.eps > 0) {
            try {
                ModulationRates rates =
                    solve_modulation_rates(state.w, state.v, state.mod, pkg);
                state.mod.cdot = rates.cdot;
                state.mod.gammadot = rates.gammadot;
            } catch (const std::runtime_error&) {
                // leave the last stage rates in place; the run-level guard
                // will fire on the next step if the tube is really lost
            }
        }
        row.t = state.t;
        row.l2_v = l2_norm(state.v);
        row.h1_v = h1_norm(state.v);
        row.l2_w = l2_norm(state.w);
        row.h1_w = h1_norm(state.w);
        row.c = state.mod.c;
        row.gamma = state.mod.gamma;
        row.cdot = state.mod.cdot;
        row.gammadot = state.mod.gammadot;
        row.event = event;
        result.trajectory.push_back(row);
    };

    sample("");
    for (int i = 1; i <= n_steps; ++i) {
        try {
            state = stepper.step(state);
        } catch (const std::exception& e) {
            result.failed = true;
            result.error = e.what();
            break;
        }
        if (i % stride == 0 || i == n_steps) sample("");
    }

    result.audit = audit_from_trajectory(result.trajectory, cfg.delta, cfg.c0);
    result.audit.reprojections = reprojections;
    result.audit.max_constraint_defect = max_defect;
    return result;
}

void write_trajectory_csv(const std::string& path, const ScenarioResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t,l2_v,h1_v,l2_w,h1_w,c,gamma,cdot,gammadot,event\n";
    for (const auto& r : result.trajectory) {
        out << fmt(r.t) << ',' << fmt(r.l2_v) << ',' << fmt(r.h1_v) << ','
            << fmt(r.l2_w) << ',' << fmt(r.h1_w) << ',' << fmt(r.c) << ','
            << fmt(r.gamma) << ',' << fmt(r.cdot) << ',' << fmt(r.gammadot) << ','
            << r.event << '\n';
    }
    if (result.failed) {
        out << "# FAILED: " << result.error << '\n';
    }
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::vector<TrajectoryRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        TrajectoryRow r;
        char comma;
        ls >> r.t >> comma >> r.l2_v >> comma >> r.h1_v >> comma >> r.l2_w >> comma >>
            r.h1_w >> comma >> r.c >> comma >> r.gamma >> comma >> r.cdot >> comma >>
            r.gammadot >> comma;
        std::getline(ls, r.event);
        if (!r.event.empty() && r.event[0] == ',') r.event.erase(0, 1);
        rows.push_back(r);
    }
    return rows;
}

namespace {

ordered_json config_json(const ScenarioConfig& cfg) {
    ordered_json j;
    j["c0"] = cfg.c0;
    j["a"] = cfg.a;
    j["eps"] = cfg.eps;
    j["shape"] = cfg.shape;
    j["L"] = cfg.L;
    j["N"] = cfg.N;
    j["dt"] = cfg.dt;
    j["T"] = cfg.T_final;
    j["delta"] = cfg.delta;
    j["sample_dt"] = cfg.sample_dt;
    j["seed"] = cfg.seed;
    j["scheme"] = cfg.scheme;
    j["dealias"] = cfg.dealias;
    return j;
}

}  // namespace

void write_audit_json(const std::string& path, const ScenarioResult& result) {
    ordered_json j;
    j["config"] = config_json(result.cfg);
    j["failed"] = result.failed;
    j["error"] = result.error;
    ordered_json table = ordered_json::array();
    for (const auto& r : result.audit.rows) {
        ordered_json row;
        row["n"] = r.n;
        row["t"] = r.t;
        row["N_sq"] = r.N_sq;
        row["v_h1"] = r.v_h1;
        row["cdot"] = r.cdot;
        row["gammadot"] = r.gammadot;
        row["c_err"] = r.c_err;
        table.push_back(row);
    }
    j["table"] = table;
    j["kappa_defined"] = result.audit.kappa_defined;
    if (result.audit.kappa_defined) {
        j["kappa"] = result.audit.kappa;
        j["rate"] = result.audit.b_fit;
        j["r2"] = result.audit.r2;
    } else {
        j["kappa"] = nullptr;
        j["rate"] = nullptr;
        j["r2"] = nullptr;
    }
    j["rates_decay"] =
        result.audit.rates_fit_defined ? ordered_json(result.audit.rates_decay) : nullptr;
    j["reprojections"] = result.audit.reprojections;
    j["max_constraint_defect"] = result.audit.max_constraint_defect;
    ordered_json events = ordered_json::array();
    for (const auto& r : result.trajectory) {
        if (!r.event.empty()) {
            ordered_json e;
            e["t"] = r.t;
            e["kind"] = r.event;
            events.push_back(e);
        }
    }
    j["events"] = events;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

// --- spectrum survey ---------------------------------------------------------

std::vector<SurveyRow> run_spectrum_survey(
    const std::vector<std::pair<Scalar, Scalar>>& points, Scalar L, int N) {
    std::vector<SurveyRow> rows;
    Grid1D grid = make_grid(L, N);
    for (const auto& [a, c] : points) {
        if (!(c > 0) || !(a > 0) || !(a < std::sqrt(c / 3))) {
            std::cerr << "spectrum survey: skipping (a, c) = (" << a << ", " << c
                      << "): outside 0 < a < sqrt(c/3)\n";
            continue;
        }
        auto modes = discretized_spectrum(WeightParams{a, c}, grid);
        for (const auto& m : modes) {
            SurveyRow row;
            row.a = a;
            row.c = c;
            row.lambda = m.lambda;
            row.is_discrete = std::abs(m.lambda) < 1e-3;
            row.boundary_mass = m.boundary_mass;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_survey_csv(const std::string& path, const std::vector<SurveyRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "a,c,re_lambda,im_lambda,is_discrete_flag,boundary_mass\n";
    for (const auto& r : rows) {
        out << fmt(r.a) << ',' << fmt(r.c) << ',' << fmt(r.lambda.real()) << ','
            << fmt(r.lambda.imag()) << ',' << (r.is_discrete ? 1 : 0) << ','
            << fmt(r.boundary_mass) << '\n';
    }
}

// --- norm probes ---------------------------------------------------------------

namespace {

// random real field with a smooth decaying spectral envelope, band-limited to
// half the lattice in both axes (so products refine exactly)
Eigen::MatrixXd random_envelope_field(std::mt19937_64& rng, const Grid1D& grid,
                                      int nt, bool half_band) {
    std::normal_distribution<Scalar> gauss(0, 1);
    const int nx = grid.n_points();
    Eigen::MatrixXd white(nt, nx);
    for (int n = 0; n < nt; ++n)
        for (int k = 0; k < nx; ++k) white(n, k) = gauss(rng);

    Eigen::MatrixXcd spec(nt, nx);
    for (int n = 0; n < nt; ++n)
        spec.row(n) = fft_forward(white.row(n).array().cast<Complex>()).matrix().transpose();
    for (int k = 0; k < nx; ++k) spec.col(k) = fft_forward(spec.col(k).array()).matrix();

    const int qcut = half_band ? nt / 4 : (3 * nt) / 8;
    const int kcut = half_band ? nx / 4 : (3 * nx) / 8;
    for (int q = 0; q < nt; ++q) {
        const int sq = (q < nt / 2) ? q : q - nt;
        for (int k = 0; k < nx; ++k) {
            const int sk = (k < nx / 2) ? k : k - nx;
            if (std::abs(sq) > qcut || std::abs(sk) > kcut) {
                spec(q, k) = 0;
            } else {
                spec(q, k) /= (1.0 + std::abs(sq)) * (1.0 + sk * sk);
            }
        }
    }
    for (int k = 0; k < nx; ++k)
        spec.col(k) = fft_inverse(spec.col(k).array()).matrix();
    Eigen::MatrixXd out(nt, nx);
    for (int n = 0; n < nt; ++n)
        out.row(n) = fft_inverse(spec.row(n).array()).real().matrix().transpose();
    return out;
}

Field random_envelope_data(std::mt19937_64& rng, const Grid1D& grid) {
    std::normal_distribution<Scalar> gauss(0, 1);
    Field f = make_field(grid);
    for (int m = 0; m < grid.n_points(); ++m) f.values[m] = gauss(rng);
    SpectralField sf = to_spectral(f);
    const int cut = grid.n_points() / 4;
    for (int k = 0; k < grid.n_points(); ++k) {
        const int sk = (k < grid.n_points() / 2) ? k : k - grid.n_points();
        if (std::abs(sk) > cut) {
            sf.coeffs[k] = 0;
        } else {
            sf.coeffs[k] /= (1.0 + sk * sk);
        }
    }
    sf.coeffs[0] = 0;  // zero mean
    return from_spectral(sf);
}

struct Stats {
    Scalar max = 0, sum = 0;
    int n = 0;
    void add(Scalar v) {
        max = std::max(max, v);
        sum += v;
        ++n;
    }
    Scalar mean() const { return n ? sum / n : 0; }
};

}  // namespace

std::vector<ProbeReport> run_norm_probes(const ProbeConfig& pc) {
    std::mt19937_64 rng(pc.seed);
    Grid1D grid = make_grid(M_PI, pc.nx);
    EvolutionConfig evo;
    evo.c0 = pc.c0;
    evo.a = pc.a;

    if (pc.refine < 1) throw std::invalid_argument("run_norm_probes: refine >= 1");
    const int levels = pc.refine - 1;
    const int nx_meas = pc.nx << levels;
    const int nt_meas = pc.nt << levels;
    auto refined = [&](SpaceTimeField F) {
        for (int l = 0; l < levels; ++l) F = refine_lattice2x(F);
        return F;
    };
    auto refined_data = [&](Field f) {
        for (int l = 0; l < levels; ++l) f = refine_grid2x(f);
        return f;
    };

    std::ostringstream res;
    res << "L=pi,N=" << nx_meas << ",T=" << pc.T << ",nt=" << nt_meas;
    const std::string resolution = res.str();

    std::vector<ProbeReport> reports;
    auto report = [&](const std::string& kind, const Stats& st) {
        reports.push_back({kind, pc.s, st.n, st.max, st.mean(), resolution});
    };

    {
        Stats st;
        for (int i = 0; i < pc.n_shell; ++i) {
            Eigen::MatrixXd vals = random_envelope_field(rng, grid, pc.nt, false);
            SpaceTimeField F = refined(make_space_time_field(grid, pc.T, vals));
            const Scalar total = space_time_l2sq(F);
            const Scalar shells = shell_decompose(F).total_mass_sq();
            st.add(total > 0 ? std::abs(shells - total) / total : 0);
        }
        report("shell-parseval", st);
    }
    {
        Stats st;
        for (int i = 0; i < pc.n_embedding; ++i) {
            Eigen::MatrixXd vals = random_envelope_field(rng, grid, pc.nt, false);
            st.add(embedding_ratio(refined(make_space_time_field(grid, pc.T, vals)), pc.s));
        }
        report("embedding", st);
    }
    {
        Stats st;
        for (int i = 0; i < pc.n_bilinear; ++i) {
            SpaceTimeField f = refined(make_space_time_field(
                grid, pc.T, random_envelope_field(rng, grid, pc.nt, true)));
            SpaceTimeField g = refined(make_space_time_field(
                grid, pc.T, random_envelope_field(rng, grid, pc.nt, true)));
            st.add(bilinear_ratio(f, g, pc.s));
        }
        report("bilinear", st);
    }
    {
        Stats airy, diss;
        for (int i = 0; i < pc.n_linear; ++i) {
            Field f = refined_data(random_envelope_data(rng, grid));
            airy.add(linear_estimate_ratio(f, LinearEstimateKind::airy_hom, pc.s, evo,
                                           pc.T, nt_meas));
            diss.add(linear_estimate_ratio(f, LinearEstimateKind::diss_hom, pc.s, evo,
                                           pc.T, nt_meas));
        }
        report("airy-hom", airy);
        report("diss-hom", diss);
    }
    {
        Stats airy, diss;
        for (int i = 0; i < pc.n_linear; ++i) {
            Eigen::MatrixXd vals = random_envelope_field(rng, grid, pc.nt, false);
            SpaceTimeField F = refined(make_space_time_field(grid, pc.T, vals));
            airy.add(linear_estimate_ratio(F, LinearEstimateKind::airy_inhom, pc.s, evo));
            diss.add(linear_estimate_ratio(F, LinearEstimateKind::diss_inhom, pc.s, evo));
        }
        report("airy-inhom", airy);
        report("diss-inhom", diss);
    }
    {
        Stats st;
        std::uniform_real_distribution<Scalar> u(-20.0, 20.0);
        for (int i = 0; i < pc.n_resonance; ++i) {
            st.add(resonance_defect(u(rng), u(rng), u(rng), u(rng)));
        }
        report("resonance", st);
    }
    return reports;
}

void write_probe_json(const std::string& path, const std::vector<ProbeReport>& reports) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json j;
        j["estimate_kind"] = r.estimate_kind;
        j["s"] = r.s;
        j["ensemble_size"] = r.ensemble_size;
        j["max_ratio"] = r.max_ratio;
        j["mean_ratio"] = r.mean_ratio;
        j["resolution"] = r.resolution;
        arr.push_back(j);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << arr.dump(2) << '\n';
}

}  // namespace wkdv
