#include "wkdv/evolution.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wkdv {

void EvolutionConfig::validate() const {
    if (!(dt > 0)) {
        std::ostringstream os;
        os << "EvolutionConfig: dt must be positive, got " << dt;
        throw std::invalid_argument(os.str());
    }
    check_weight_window(a, c0, true);
}

namespace {

constexpr Scalar kSeriesRadius = 1.0;

Complex phi_series(Complex z, int k) {
    // sum_{n >= 0} z^n / (n + k)!
    Complex term(1, 0);
    Scalar fact = 1;
    for (int j = 1; j <= k; ++j) fact *= j;
    term /= fact;
    Complex sum = term;
    for (int n = 1; n <= 24; ++n) {
        term *= z / Scalar(n + k);
        sum += term;
    }
    return sum;
}

}  // namespace

Complex phi1(Complex z) {
    if (std::abs(z) < kSeriesRadius) return phi_series(z, 1);
    return (std::exp(z) - 1.0) / z;
}

Complex phi2(Complex z) {
    if (std::abs(z) < kSeriesRadius) return phi_series(z, 2);
    return (std::exp(z) - 1.0 - z) / (z * z);
}

Complex phi3(Complex z) {
    if (std::abs(z) < kSeriesRadius) return phi_series(z, 3);
    return (std::exp(z) - 1.0 - z - 0.5 * z * z) / (z * z * z);
}

Scalar dissipation_rate(Scalar xi, Scalar a, Scalar c0) {
    return 3 * a * xi * xi + a * (c0 - a * a);
}

ArrayXc kdv_linear_symbol(const Grid1D& grid) {
    const int n = grid.n_points();
    ArrayXc L(n);
    const ArrayX& xi = grid.xi_fft();
    for (int k = 0; k < n; ++k) L[k] = Complex(0, xi[k] * xi[k] * xi[k]);
    L[n / 2] = 0;
    return L;
}

ArrayXc v_linear_symbol(const Grid1D& grid, const EvolutionConfig& cfg) {
    return weighted_linear_symbol(grid, WeightParams{0, cfg.c0});
}

ArrayXc w_linear_symbol(const Grid1D& grid, const EvolutionConfig& cfg) {
    return weighted_linear_symbol(grid, WeightParams{cfg.a, cfg.c0});
}

Field apply_W1(const Field& f, Scalar t) {
    ArrayXc mult = (t * kdv_linear_symbol(f.grid)).exp();
    return apply_fourier_multiplier(f, mult);
}

namespace {

Field apply_w2_impl(const Field& f, Scalar phase_t, Scalar decay_t,
                    const EvolutionConfig& cfg) {
    const Grid1D& grid = f.grid;
    const int n = grid.n_points();
    ArrayXc airy = phase_t * kdv_linear_symbol(grid);
    ArrayXc mult(n);
    for (int k = 0; k < n; ++k) {
        const Scalar p = dissipation_rate(grid.xi_fft()[k], cfg.a, cfg.c0);
        mult[k] = std::exp(airy[k] - decay_t * p);
    }
    return apply_fourier_multiplier(f, mult);
}

}  // namespace

Field apply_W2(const Field& f, Scalar t, const EvolutionConfig& cfg) {
    cfg.validate();
    if (t < 0) {
        std::ostringstream os;
        os << "apply_W2: one-sided semigroup requires t >= 0, got " << t;
        throw std::invalid_argument(os.str());
    }
    return apply_w2_impl(f, t, t, cfg);
}

Field apply_W2_two_sided(const Field& f, Scalar t, const EvolutionConfig& cfg) {
    cfg.validate();
    return apply_w2_impl(f, t, std::abs(t), cfg);
}

Scalar lyapunov_energy(const Field& u, Scalar c0) {
    Field ux = spectral_derivative(u, 1);
    return u.grid.dx() * (0.5 * ux.values.square() - u.values.cube() / 3.0 +
                          0.5 * c0 * u.values.square())
                             .sum();
}

// ---------------------------------------------------------------------------
// Runge-Kutta tables for a diagonal stiff symbol L and step h.

namespace {

struct EtdTables {
    ArrayXc E, E2, Q, F1, F2, F3;
};

EtdTables build_tables(const ArrayXc& L, Scalar h) {
    const auto n = L.size();
    EtdTables t;
    t.E.resize(n);
    t.E2.resize(n);
    t.Q.resize(n);
    t.F1.resize(n);
    t.F2.resize(n);
    t.F3.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex z = h * L[k];
        t.E[k] = std::exp(z);
        t.E2[k] = std::exp(0.5 * z);
        t.Q[k] = 0.5 * h * phi1(0.5 * z);
        const Complex p1 = phi1(z), p2 = phi2(z), p3 = phi3(z);
        t.F1[k] = h * (p1 - 3.0 * p2 + 4.0 * p3);
        t.F2[k] = h * (2.0 * p2 - 4.0 * p3);
        t.F3[k] = h * (4.0 * p3 - p2);
    }
    return t;
}

ArrayX dealias_mask(const Grid1D& grid, bool on) {
    const int n = grid.n_points();
    ArrayX mask = ArrayX::Ones(n);
    if (!on) return mask;
    const Scalar base = M_PI / grid.half_length();
    for (int k = 0; k < n; ++k) {
        if (std::abs(grid.xi_fft()[k] / base) > Scalar(n) / 3) mask[k] = 0;
    }
    return mask;
}

ArrayX real_part(const ArrayXc& spectrum) { return fft_inverse(spectrum).real(); }

void check_finite(const ArrayXc& hat, const char* what) {
    if (!hat.isFinite().all()) {
        std::ostringstream os;
        os << what << ": non-finite values after step (blow-up or instability)";
        throw std::runtime_error(os.str());
    }
}

// One generic step of d/dt uhat = L uhat + N(uhat) for either scheme.
template <typename NFun>
ArrayXc rk4_step(const ArrayXc& uhat, const EtdTables& t,
                 EvolutionConfig::Scheme scheme, Scalar h, NFun&& N) {
    if (scheme == EvolutionConfig::Scheme::exponential_rk4) {
        const ArrayXc N1 = N(uhat);
        const ArrayXc a = t.E2 * uhat + t.Q * N1;
        const ArrayXc N2 = N(a);
        const ArrayXc b = t.E2 * uhat + t.Q * N2;
        const ArrayXc N3 = N(b);
        const ArrayXc c = t.E2 * a + t.Q * (2.0 * N3 - N1);
        const ArrayXc N4 = N(c);
        return t.E * uhat + t.F1 * N1 + t.F2 * (N2 + N3) + t.F3 * N4;
    }
    const ArrayXc N1 = N(uhat);
    const ArrayXc u2 = t.E2 * (uhat + 0.5 * h * N1);
    const ArrayXc N2 = N(u2);
    const ArrayXc u3 = t.E2 * uhat + 0.5 * h * N2;
    const ArrayXc N3 = N(u3);
    const ArrayXc u4 = t.E * uhat + h * t.E2 * N3;
    const ArrayXc N4 = N(u4);
    return t.E * uhat +
           h / 6.0 * (t.E * N1 + 2.0 * t.E2 * (N2 + N3) + N4);
}

}  // namespace

Field step_kdv(const Field& u, const EvolutionConfig& cfg) {
    cfg.validate();
    const Grid1D& grid = u.grid;
    const ArrayXc D = shifted_derivative_symbol(grid, 0);
    const ArrayX mask = dealias_mask(grid, cfg.dealias_on);
    const EtdTables tables = build_tables(kdv_linear_symbol(grid), cfg.dt);

    auto N = [&](const ArrayXc& uhat) -> ArrayXc {
        ArrayX ur = real_part(uhat);
        ArrayXc sq = fft_forward((ur * ur).cast<Complex>());
        return -D * (mask.cast<Complex>() * sq);
    };

    ArrayXc uhat = to_spectral(u).coeffs;
    uhat = rk4_step(uhat, tables, cfg.scheme, cfg.dt, N);
    check_finite(uhat, "step_kdv");
    return from_spectral(SpectralField{grid, uhat});
}

// ---------------------------------------------------------------------------
// Coupled modulated evolution.

CoupledStepper::CoupledStepper(const Grid1D& grid, const EvolutionConfig& cfg,
                               const SpectralPackage& pkg)
    : grid_(grid), cfg_(cfg), pkg_(pkg) {
    cfg.validate();
    D_ = shifted_derivative_symbol(grid, 0);
    S_ = shifted_derivative_symbol(grid, cfg.a);
    Lw_ = w_linear_symbol(grid, cfg);
    mask_ = dealias_mask(grid, cfg.dealias_on).cast<Complex>();
    EtdTables tv = build_tables(v_linear_symbol(grid, cfg), cfg.dt);
    Ev_ = tv.E; E2v_ = tv.E2; Qv_ = tv.Q; F1v_ = tv.F1; F2v_ = tv.F2; F3v_ = tv.F3;
    EtdTables tw = build_tables(w_linear_symbol(grid, cfg), cfg.dt);
    Ew_ = tw.E; E2w_ = tw.E2; Qw_ = tw.Q; F1w_ = tw.F1; F2w_ = tw.F2; F3w_ = tw.F3;
    psi0_ = psi(SolitonParams{cfg.c0, 0}, grid);
}

CoupledStepper::Rhs CoupledStepper::eval_rhs(const ArrayXc& vhat, const ArrayXc& what,
                                             Scalar c) const {
    Rhs out;
    ArrayX v = real_part(vhat);
    ArrayX w = real_part(what);

    if (!cfg_.couple_potential) {
        ArrayXc sq = fft_forward((v * v).cast<Complex>());
        out.nv = -D_ * (mask_ * sq);
        ArrayXc vw = fft_forward((v * w).cast<Complex>());
        out.nw = -S_ * (mask_ * vw) + (c - cfg_.c0) * (S_ * what);
        return out;
    }

    ModulationState st;
    st.c = c;
    st.c0 = cfg_.c0;
    st.a = cfg_.a;
    ModulationRates rates = solve_modulation_rates(Field{grid_, w}, Field{grid_, v},
                                                   st, pkg_);
    out.cdot = rates.cdot;
    out.gammadot = rates.gammadot;
    const Scalar drift = rates.gammadot + c - cfg_.c0;

    // v-equation pieces
    Field psic = psi(SolitonParams{c, 0}, grid_);
    Field dyp = dpsi_dy(SolitonParams{c, 0}, grid_);
    Field dcp = dpsi_dc(SolitonParams{c, 0}, grid_);
    ArrayXc prod_v = fft_forward((2 * psic.values * v + v * v).cast<Complex>());
    ArrayXc force_v = fft_forward(
        (rates.gammadot * dyp.values - rates.cdot * dcp.values).cast<Complex>());
    out.nv = -D_ * (mask_ * prod_v) + force_v + drift * (D_ * vhat);

    // w-equation pieces
    Field Z1 = weighted_dpsi_dy(c, cfg_.a, grid_);
    Field Z2 = weighted_dpsi_dc(c, cfg_.a, grid_);
    ArrayXc psi0w = fft_forward((psi0_.values * w).cast<Complex>());
    ArrayXc g1 = fft_forward(
        (-2 * (psic.values - psi0_.values) * w - v * w).cast<Complex>());
    ArrayXc G = S_ * (mask_ * g1) + drift * (S_ * what) +
                rates.gammadot * fft_forward(Z1.values.cast<Complex>()) -
                rates.cdot * fft_forward(Z2.values.cast<Complex>());
    // Remove the discrete-spectrum component of the whole right side,
    // A0 w included. On the constraint manifold P(A0 w) = 0 exactly in the
    // continuum, so this only cancels the discretization defect (the
    // trapezoid antiderivative inside eta1 is O(dx^2) off) and keeps
    // <w, eta_i> frozen to machine precision over arbitrarily long runs.
    const ArrayXc coupling = -2.0 * (S_ * (mask_ * psi0w));
    const ArrayXc a0w = Lw_ * what + coupling;
    const Scalar q1 = spectral_inner(grid_, a0w + G, pkg_.eta1_hat);
    const Scalar q2 = spectral_inner(grid_, a0w + G, pkg_.eta2_hat);
    out.nw = coupling + G - q1 * pkg_.zeta1_hat - q2 * pkg_.zeta2_hat;
    return out;
}

PerturbationState CoupledStepper::step(const PerturbationState& s) const {
    const Scalar h = cfg_.dt;
    const ArrayXc vhat = to_spectral(s.v).coeffs;
    const ArrayXc what = to_spectral(s.w).coeffs;
    const Scalar c = s.mod.c;

    ArrayXc vn, wn;
    Scalar cn = 0, gn = 0, thn = 0;
    Rhs k1, k4;

    if (cfg_.scheme == EvolutionConfig::Scheme::exponential_rk4) {
        k1 = eval_rhs(vhat, what, c);
        ArrayXc av = E2v_ * vhat + Qv_ * k1.nv;
        ArrayXc aw = E2w_ * what + Qw_ * k1.nw;
        Scalar ac = c + 0.5 * h * k1.cdot;
        Rhs k2 = eval_rhs(av, aw, ac);
        ArrayXc bv = E2v_ * vhat + Qv_ * k2.nv;
        ArrayXc bw = E2w_ * what + Qw_ * k2.nw;
        Scalar bc = c + 0.5 * h * k2.cdot;
        Rhs k3 = eval_rhs(bv, bw, bc);
        ArrayXc cv = E2v_ * av + Qv_ * (2.0 * k3.nv - k1.nv);
        ArrayXc cw = E2w_ * aw + Qw_ * (2.0 * k3.nw - k1.nw);
        Scalar cc = ac + 0.5 * h * (2.0 * k3.cdot - k1.cdot);
        k4 = eval_rhs(cv, cw, cc);

        vn = Ev_ * vhat + F1v_ * k1.nv + F2v_ * (k2.nv + k3.nv) + F3v_ * k4.nv;
        wn = Ew_ * what + F1w_ * k1.nw + F2w_ * (k2.nw + k3.nw) + F3w_ * k4.nw;
        cn = c + h * (k1.cdot + 2 * k2.cdot + 2 * k3.cdot + k4.cdot) / 6;
        gn = s.mod.gamma +
             h * (k1.gammadot + 2 * k2.gammadot + 2 * k3.gammadot + k4.gammadot) / 6;
        thn = s.theta + h * (c + 2 * ac + 2 * bc + cc) / 6;
    } else {
        k1 = eval_rhs(vhat, what, c);
        ArrayXc u2v = E2v_ * (vhat + 0.5 * h * k1.nv);
        ArrayXc u2w = E2w_ * (what + 0.5 * h * k1.nw);
        Scalar c2 = c + 0.5 * h * k1.cdot;
        Rhs k2 = eval_rhs(u2v, u2w, c2);
        ArrayXc u3v = E2v_ * vhat + 0.5 * h * k2.nv;
        ArrayXc u3w = E2w_ * what + 0.5 * h * k2.nw;
        Scalar c3 = c + 0.5 * h * k2.cdot;
        Rhs k3 = eval_rhs(u3v, u3w, c3);
        ArrayXc u4v = Ev_ * vhat + h * E2v_ * k3.nv;
        ArrayXc u4w = Ew_ * what + h * E2w_ * k3.nw;
        Scalar c4 = c + h * k3.cdot;
        k4 = eval_rhs(u4v, u4w, c4);

        vn = Ev_ * vhat + h / 6.0 * (Ev_ * k1.nv + 2.0 * E2v_ * (k2.nv + k3.nv) + k4.nv);
        wn = Ew_ * what + h / 6.0 * (Ew_ * k1.nw + 2.0 * E2w_ * (k2.nw + k3.nw) + k4.nw);
        cn = c + h * (k1.cdot + 2 * k2.cdot + 2 * k3.cdot + k4.cdot) / 6;
        gn = s.mod.gamma +
             h * (k1.gammadot + 2 * k2.gammadot + 2 * k3.gammadot + k4.gammadot) / 6;
        thn = s.theta + h * (c + 2 * c2 + 2 * c3 + c4) / 6;
    }

    check_finite(vn, "step_coupled (v)");
    check_finite(wn, "step_coupled (w)");

    PerturbationState out;
    out.v = from_spectral(SpectralField{grid_, vn});
    out.w = from_spectral(SpectralField{grid_, wn});
    out.mod = s.mod;
    out.mod.c = cn;
    out.mod.gamma = gn;
    out.mod.cdot = k4.cdot;
    out.mod.gammadot = k4.gammadot;
    out.t = s.t + h;
    out.theta = thn;
    return out;
}

PerturbationState step_coupled(const PerturbationState& s, const EvolutionConfig& cfg,
                               const SpectralPackage& pkg) {
    return CoupledStepper(s.v.grid, cfg, pkg).step(s);
}

// ---------------------------------------------------------------------------
// Frozen-parameter single-field steps.

Field step_v(const PerturbationState& s, const EvolutionConfig& cfg) {
    cfg.validate();
    const Grid1D& grid = s.v.grid;
    const ArrayXc D = shifted_derivative_symbol(grid, 0);
    const ArrayX mask = dealias_mask(grid, cfg.dealias_on);
    const EtdTables tables = build_tables(v_linear_symbol(grid, cfg), cfg.dt);
    const Scalar c = s.mod.c;
    const Scalar drift = s.mod.gammadot + c - cfg.c0;

    ArrayX psic = ArrayX::Zero(grid.n_points());
    ArrayXc force = ArrayXc::Zero(grid.n_points());
    if (cfg.couple_potential) {
        psic = psi(SolitonParams{c, 0}, grid).values;
        Field dyp = dpsi_dy(SolitonParams{c, 0}, grid);
        Field dcp = dpsi_dc(SolitonParams{c, 0}, grid);
        force = fft_forward(
            (s.mod.gammadot * dyp.values - s.mod.cdot * dcp.values).cast<Complex>());
    }

    auto N = [&](const ArrayXc& vhat) -> ArrayXc {
        ArrayX v = real_part(vhat);
        ArrayXc prod = fft_forward((2 * psic * v + v * v).cast<Complex>());
        return -D * (mask.cast<Complex>() * prod) + force + drift * (D * vhat);
    };

    ArrayXc vhat = rk4_step(to_spectral(s.v).coeffs, tables, cfg.scheme, cfg.dt, N);
    check_finite(vhat, "step_v");
    return from_spectral(SpectralField{grid, vhat});
}

Field step_w(const PerturbationState& s, const EvolutionConfig& cfg,
             const SpectralPackage& pkg) {
    cfg.validate();
    const Grid1D& grid = s.w.grid;
    const ArrayXc S = shifted_derivative_symbol(grid, cfg.a);
    const ArrayX mask = dealias_mask(grid, cfg.dealias_on);
    const EtdTables tables = build_tables(w_linear_symbol(grid, cfg), cfg.dt);
    const Scalar c = s.mod.c;
    const Scalar drift = s.mod.gammadot + c - cfg.c0;

    ArrayX psi0 = ArrayX::Zero(grid.n_points());
    ArrayX dpsi = ArrayX::Zero(grid.n_points());
    ArrayXc force = ArrayXc::Zero(grid.n_points());
    if (cfg.couple_potential) {
        psi0 = psi(SolitonParams{cfg.c0, 0}, grid).values;
        dpsi = psi(SolitonParams{c, 0}, grid).values - psi0;
        Field Z1 = weighted_dpsi_dy(c, cfg.a, grid);
        Field Z2 = weighted_dpsi_dc(c, cfg.a, grid);
        force = s.mod.gammadot * fft_forward(Z1.values.cast<Complex>()) -
                s.mod.cdot * fft_forward(Z2.values.cast<Complex>());
    }
    const ArrayX& v = s.v.values;
    const ArrayXc Lw = w_linear_symbol(grid, cfg);

    auto N = [&](const ArrayXc& what) -> ArrayXc {
        ArrayX w = real_part(what);
        ArrayXc psi0w = fft_forward((psi0 * w).cast<Complex>());
        ArrayXc g1 = fft_forward((-2 * dpsi * w - v * w).cast<Complex>());
        ArrayXc G = S * (mask.cast<Complex>() * g1) + drift * (S * what) + force;
        if (!cfg.couple_potential) return G;
        // as in the coupled stepper: project the discrete pair out of the
        // full right side, which is a continuum no-op on the constraint
        const ArrayXc coupling = -2.0 * (S * (mask.cast<Complex>() * psi0w));
        const ArrayXc a0w = Lw * what + coupling;
        const Scalar q1 = spectral_inner(grid, a0w + G, pkg.eta1_hat);
        const Scalar q2 = spectral_inner(grid, a0w + G, pkg.eta2_hat);
        return coupling + G - q1 * pkg.zeta1_hat - q2 * pkg.zeta2_hat;
    };

    ArrayXc what = rk4_step(to_spectral(s.w).coeffs, tables, cfg.scheme, cfg.dt, N);
    check_finite(what, "step_w");
    Field out = from_spectral(SpectralField{grid, what});

    if (cfg.couple_potential) {
        const Scalar wnorm = l2_norm(out);
        if (wnorm > 0) {
            const Scalar defect = l2_norm(project_P(out, pkg)) / wnorm;
            if (defect > 1e-4) {
                std::ostringstream os;
                os << "step_w: modulation constraint drifted, ||Pw||/||w|| = "
                   << defect;
                throw std::runtime_error(os.str());
            }
        }
    }
    return out;
}

Field reconstruct_lab_frame(const PerturbationState& s) {
    const Grid1D& grid = s.v.grid;
    Field prof{grid, psi(SolitonParams{s.mod.c, 0}, grid).values + s.v.values};
    return translate(prof, s.theta + s.mod.gamma);
}

}  // namespace wkdv
