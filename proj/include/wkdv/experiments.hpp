#pragma once

// Batch experiment drivers: long-horizon stability runs with modulation
// tracking and segment audits, dense-spectrum surveys, and the norm/estimate
// probe ensembles. File outputs are plain CSV/JSON and are bit-reproducible
// for a fixed configuration and seed (everything runs single-threaded, in a
// fixed order).

#include <optional>
#include <string>
#include <vector>

#include "wkdv/bourgain.hpp"

namespace wkdv {

struct ScenarioConfig {
    Scalar c0 = 1.0;
    Scalar a = 0.3;             // 0 = unweighted contrast run
    Scalar eps = 1e-3;          // perturbation size
    std::string shape = "gaussian";  // gaussian | dgaussian | sech
    Scalar L = 20 * M_PI;
    int N = 1024;
    Scalar dt = 1e-3;
    Scalar T_final = 40.0;
    Scalar delta = 1.0;         // audit segment length
    Scalar sample_dt = 0.1;     // trajectory sampling stride
    std::string out;            // output prefix; empty = no files
    unsigned long long seed = 0;
    std::string scheme = "etdrk4";  // etdrk4 | ifrk4
    bool dealias = true;
    Scalar eps_cap = 0.05;

    void validate() const;
    EvolutionConfig evolution() const;
};

/// Flat key = value file (one pair per line, '#' comments). Unknown keys are
/// rejected.
ScenarioConfig load_config(const std::string& path);
void set_config_value(ScenarioConfig& cfg, const std::string& key,
                      const std::string& value);

/// The perturbation profiles selectable in ScenarioConfig.
Field perturbation_shape(const std::string& id, const Grid1D& grid);

struct TrajectoryRow {
    Scalar t = 0;
    Scalar l2_v = 0, h1_v = 0, l2_w = 0, h1_w = 0;
    Scalar c = 0, gamma = 0, cdot = 0, gammadot = 0;
    std::string event;  // empty or "reproject"
};

struct DecayFit {
    Scalar rate = 0;             // slope of log(value) vs t (negative = decay)
    Scalar kappa_per_delta = 1;  // exp(rate * delta)
    Scalar r2 = 0;
    int n_used = 0;
};

/// Least-squares line on (t, log value) after discarding the first 10% of the
/// samples. Rejects series with fewer than 5 points or non-positive values.
DecayFit fit_decay_rate(const std::vector<Scalar>& t, const std::vector<Scalar>& value,
                        Scalar delta);

struct AuditRow {
    int n = 0;
    Scalar t = 0;
    Scalar N_sq = 0;   // ||w(n delta)||_{H1}^2
    Scalar v_h1 = 0;
    Scalar cdot = 0, gammadot = 0;
    Scalar c_err = 0;  // |c(n delta) - c0|
};

struct IterationAudit {
    std::vector<AuditRow> rows;
    bool kappa_defined = false;
    Scalar kappa = 0;       // per-segment contraction of ||w||_{H1}
    Scalar b_fit = 0;       // fitted continuous decay rate of ||w||_{H1}
    Scalar r2 = 0;
    bool rates_fit_defined = false;
    Scalar rates_decay = 0;  // fitted decay rate of |cdot| + |gammadot|
    int reprojections = 0;
    Scalar max_constraint_defect = 0;
};

struct ScenarioResult {
    ScenarioConfig cfg;
    std::vector<TrajectoryRow> trajectory;
    IterationAudit audit;
    bool failed = false;
    std::string error;
};

/// Full coupled run with modulation tracking; re-projects (and logs an event)
/// whenever ||P w|| / ||w|| exceeds 1e-4 at a sample. On a mid-run solver
/// rejection the partial trajectory is kept and `failed` is set.
ScenarioResult run_stability_scenario(const ScenarioConfig& cfg);

void write_trajectory_csv(const std::string& path, const ScenarioResult& result);
void write_audit_json(const std::string& path, const ScenarioResult& result);
std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path);

/// Rebuild the audit (segment table + fits) from trajectory samples.
IterationAudit audit_from_trajectory(const std::vector<TrajectoryRow>& rows,
                                     Scalar delta, Scalar c0);

// --- spectrum survey --------------------------------------------------------

struct SurveyRow {
    Scalar a = 0, c = 0;
    Complex lambda;
    bool is_discrete = false;  // |lambda| < 1e-3
    Scalar boundary_mass = 0;
};

/// Dense eigensolves over the (a, c) list; rows with a outside [0, sqrt(c/3))
/// are skipped with a warning on stderr.
std::vector<SurveyRow> run_spectrum_survey(
    const std::vector<std::pair<Scalar, Scalar>>& points, Scalar L, int N);

void write_survey_csv(const std::string& path, const std::vector<SurveyRow>& rows);

// --- norm probes -------------------------------------------------------------

struct ProbeReport {
    std::string estimate_kind;
    Scalar s = 0;
    int ensemble_size = 0;
    Scalar max_ratio = 0;
    Scalar mean_ratio = 0;
    std::string resolution;
};

struct ProbeConfig {
    unsigned long long seed = 0;
    int nx = 64;        // generation lattice: space points (L = pi)
    int nt = 128;       // generation lattice: time samples
    int refine = 1;     // measure on a 2^(refine-1)-times finer lattice; the
                        // random ensembles stay the same continuum functions
    Scalar T = 8.0;
    Scalar s = 1.0;
    Scalar a = 0.3, c0 = 1.0;
    int n_embedding = 200;
    int n_bilinear = 100;
    int n_linear = 40;
    int n_shell = 1000;
    int n_resonance = 1000;
};

std::vector<ProbeReport> run_norm_probes(const ProbeConfig& pc);
void write_probe_json(const std::string& path, const std::vector<ProbeReport>& reports);

}  // namespace wkdv
