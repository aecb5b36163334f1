#include "wkdv/modulation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wkdv {

ModulationRates solve_modulation_rates(const Field& w, const Field& v,
                                       const ModulationState& st,
                                       const SpectralPackage& pkg) {
    const Grid1D& grid = pkg.grid;
    const Scalar a = st.a;
    const Scalar c0 = st.c0;
    const Scalar c = st.c;

    const ArrayXc S = shifted_derivative_symbol(grid, a);
    const ArrayXc Lw = weighted_linear_symbol(grid, WeightParams{a, c0});

    const ArrayXc what = to_spectral(w).coeffs;
    const ArrayXc Swhat = S * what;

    Field Z1 = weighted_dpsi_dy(c, a, grid);
    Field Z2 = weighted_dpsi_dc(c, a, grid);

    Field psi0 = weighted_psi(c0, 0, grid);
    Field dpsi_w{grid, (weighted_psi(c, 0, grid).values - psi0.values) * w.values};
    Field psi0_w{grid, psi0.values * w.values};

    const ArrayXc Ahat0 = Lw * what - 2.0 * (S * to_spectral(psi0_w).coeffs).eval();
    const ArrayXc Ghat1 =
        S * to_spectral(Field{grid, -2 * dpsi_w.values - v.values * w.values}).coeffs;

    const ArrayXc* eta_hat[2] = {&pkg.eta1_hat, &pkg.eta2_hat};
    const Field* eta[2] = {&pkg.eta1, &pkg.eta2};
    Eigen::Matrix2d M;
    Eigen::Vector2d b;
    for (int i = 0; i < 2; ++i) {
        const Scalar sw = spectral_inner(grid, Swhat, *eta_hat[i]);
        M(i, 0) = inner(Z1, *eta[i]) + sw;
        M(i, 1) = -inner(Z2, *eta[i]);
        b(i) = -spectral_inner(grid, Ghat1, *eta_hat[i]) - (c - c0) * sw -
               spectral_inner(grid, Ahat0, *eta_hat[i]);
    }
    // orient the second row so the small-data limit of the matrix is the
    // identity (pure row scaling; the solution is unchanged)
    M.row(1) *= -1;
    b(1) *= -1;

    Eigen::JacobiSVD<Eigen::Matrix2d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Scalar cond = svd.singularValues()(0) / svd.singularValues()(1);
    if (!std::isfinite(cond) || cond >= 10) {
        std::ostringstream os;
        os << "solve_modulation_rates: modulation matrix condition number " << cond
           << " exceeds 10; the state has left the modulation tube";
        throw std::runtime_error(os.str());
    }
    const Eigen::Vector2d x = svd.solve(b);

    ModulationRates rates;
    rates.gammadot = x(0);
    rates.cdot = x(1);
    rates.matrix = M;
    rates.condition_number = cond;
    return rates;
}

ModulationState advance_modulation(const ModulationState& st, Scalar gammadot,
                                   Scalar cdot, Scalar dt) {
    ModulationState out = st;
    out.c += cdot * dt;
    out.gamma += gammadot * dt;
    out.cdot = cdot;
    out.gammadot = gammadot;
    return out;
}

namespace {

InitialProjection newton_split(const Field& u0, Scalar c_guess, Scalar a,
                               const SpectralPackage& pkg) {
    const Grid1D& grid = u0.grid;
    Scalar c = c_guess;
    Scalar gamma = 0;
    const Scalar tol = 1e-14 * std::max<Scalar>(1.0, l2_norm(u0));
    const int max_iter = 50;

    Field shifted = u0;
    Field resid = u0;
    auto evaluate = [&](Scalar cc, Scalar gg) -> Eigen::Vector2d {
        // a translate at roundoff scale only injects FFT noise into the far
        // tail (which the weight amplifies by e^{aL}); skip it
        shifted = (std::abs(gg) < 1e-12) ? u0 : translate(u0, -gg);  // u0(y + gamma)
        resid = Field{grid, shifted.values - psi(SolitonParams{cc, 0}, grid).values};
        return {inner(resid, pkg.adj1), inner(resid, pkg.adj2)};
    };

    Eigen::Vector2d F = evaluate(c, gamma);
    Scalar fnorm = F.norm();
    std::vector<Scalar> history{fnorm};
    int iter = 0;
    for (; iter < max_iter && fnorm > tol; ++iter) {
        Field du = spectral_derivative(shifted, 1);
        Field dpsi_c = dpsi_dc(SolitonParams{c, 0}, grid);
        Eigen::Matrix2d J;
        J(0, 0) = inner(du, pkg.adj1);
        J(1, 0) = inner(du, pkg.adj2);
        J(0, 1) = -inner(dpsi_c, pkg.adj1);
        J(1, 1) = -inner(dpsi_c, pkg.adj2);
        const Eigen::Vector2d step = J.colPivHouseholderQr().solve(F);

        auto guard_speed = [](Scalar cc) {
            if (!(cc > 0)) {
                std::ostringstream os;
                os << "project_initial: Newton left the family (c = " << cc << ")";
                throw std::runtime_error(os.str());
            }
        };
        Scalar damping = 1.0;
        Scalar g_next = gamma - damping * step(0);
        Scalar c_next = c - damping * step(1);
        guard_speed(c_next);
        Eigen::Vector2d F_next = evaluate(c_next, g_next);
        if (F_next.norm() >= fnorm && fnorm > tol) {
            damping = 0.5;  // halve on a non-decreasing residual
            g_next = gamma - damping * step(0);
            c_next = c - damping * step(1);
            guard_speed(c_next);
            F_next = evaluate(c_next, g_next);
        }
        gamma = g_next;
        c = c_next;
        F = F_next;
        fnorm = F.norm();
        history.push_back(fnorm);
    }
    if (fnorm > tol) {
        std::ostringstream os;
        os << "project_initial: Newton did not converge in " << max_iter
           << " iterations, final residual " << fnorm;
        throw std::runtime_error(os.str());
    }

    InitialProjection out;
    out.state = ModulationState{c, gamma, 0, 0, pkg.params.speed, a};
    out.v0 = resid;
    ArrayX weight = (a * grid.points()).exp();
    out.w0 = Field{grid, weight * resid.values};
    out.iterations = iter;
    out.residual = fnorm;
    out.residual_history = std::move(history);
    return out;
}

}  // namespace

InitialProjection project_initial(const Field& u0, Scalar c_guess, Scalar a,
                                  const SpectralPackage& pkg) {
    return newton_split(u0, c_guess, a, pkg);
}

InitialProjection project_initial(const Field& u0, Scalar c_guess, Scalar a) {
    SpectralPackage pkg = build_spectral_package(WeightParams{a, c_guess}, u0.grid);
    return newton_split(u0, c_guess, a, pkg);
}

InitialProjection reproject(const Field& v, const Field& w,
                            const ModulationState& st, const SpectralPackage& pkg) {
    const Grid1D& grid = pkg.grid;
    Field psi_old = psi(SolitonParams{st.c, 0}, grid);
    Field u_prof{grid, psi_old.values + v.values};
    InitialProjection p = newton_split(u_prof, st.c, st.a, pkg);
    const Scalar dgamma = p.state.gamma;

    // w is carried over intrinsically:
    //   w_new = e^{-a dg} T_dg (w + Wpsi_old) - Wpsi_new,
    // with Wpsi_* the stable weighted soliton profiles; recomputing e^{ay} v
    // would amplify far-field noise by e^{aL}.
    Field wpsi_old = weighted_psi(st.c, st.a, grid);
    Field wpsi_new = weighted_psi(p.state.c, st.a, grid);
    Field moved = translate(Field{grid, w.values + wpsi_old.values}, -dgamma);
    const Scalar scale = std::exp(-st.a * dgamma);
    p.w0 = Field{grid, scale * moved.values - wpsi_new.values};

    p.state.gamma += st.gamma;  // frame shifts compose
    p.state.c0 = st.c0;
    return p;
}

}  // namespace wkdv
