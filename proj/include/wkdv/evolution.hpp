#pragma once

// Time propagation. The stiff dispersive part is always integrated exactly
// through its Fourier symbol; nonlinear, coupling, and modulation-forcing
// terms go through fourth-order Runge-Kutta stages (exponential integrator
// by default, integrating-factor RK4 as the cross-check scheme).
//
// Symbols, under the e^{-i xi x} transform kernel used library-wide:
//   free flow        L(xi)  = i xi^3                      (u_t + u_xxx = 0)
//   co-moving v      Lv(xi) = i (xi^3 + c0 xi)
//   weighted w       Lw(xi) = s (c0 - s^2),  s = i xi - a
//                           = i (xi^3 + (c0 - 3a^2) xi) - p_a(xi)
//   dissipation      p_a(xi) = 3 a xi^2 + a (c0 - a^2) >= a (c0 - a^2)
//
// The perturbation pair (v, w) and the parameters (c, gamma) advance through
// one shared co-moving frame y = x - int_0^t c - gamma(t), so w = e^{ay} v
// holds pointwise along exact solutions.

#include "wkdv/modulation.hpp"

namespace wkdv {

struct EvolutionConfig {
    Scalar dt = 1e-3;
    enum class Scheme { exponential_rk4, integrating_factor_rk4 };
    Scheme scheme = Scheme::exponential_rk4;
    bool dealias_on = true;
    Scalar c0 = 1.0;
    Scalar a = 0.3;  // 0 = unweighted contrast mode
    // Soliton coupling and modulation forcing in the perturbation equations;
    // switched off for constant-coefficient verification runs.
    bool couple_potential = true;

    void validate() const;
};

// phi_k(z) = (e^z - sum_{j<k} z^j / j!) / z^k, series-evaluated near 0.
Complex phi1(Complex z);
Complex phi2(Complex z);
Complex phi3(Complex z);

/// p_a(xi) = 3 a xi^2 + a (c0 - a^2).
Scalar dissipation_rate(Scalar xi, Scalar a, Scalar c0);

/// Free dispersive group, multiplier e^{i t xi^3}; an L2 isometry.
Field apply_W1(const Field& f, Scalar t);

/// Dissipative group e^{i t xi^3 - p_a(xi) t}, defined for t >= 0 only;
/// strictly contractive on L2 for t > 0.
Field apply_W2(const Field& f, Scalar t, const EvolutionConfig& cfg);

/// Two-sided extension with e^{-p_a(xi) |t|}.
Field apply_W2_two_sided(const Field& f, Scalar t, const EvolutionConfig& cfg);

ArrayXc kdv_linear_symbol(const Grid1D& grid);
ArrayXc v_linear_symbol(const Grid1D& grid, const EvolutionConfig& cfg);
ArrayXc w_linear_symbol(const Grid1D& grid, const EvolutionConfig& cfg);

/// One step of u_t + u_xxx + (u^2)_x = 0 with the dealiased quadratic term.
/// Stable as long as the nonlinear advection obeys max|u| dt / dx << 1; the
/// dispersive part imposes no step restriction (it is exact).
Field step_kdv(const Field& u, const EvolutionConfig& cfg);

/// E[u] = int 1/2 u_x^2 - 1/3 u^3 + c0/2 u^2, conserved by the flow.
Scalar lyapunov_energy(const Field& u, Scalar c0);

struct PerturbationState {
    Field v, w;
    ModulationState mod;
    Scalar t = 0;
    Scalar theta = 0;  // int_0^t c(s) ds, for lab-frame reconstruction
};

/// One step of the v-equation with (c, gamma, cdot, gammadot) frozen at the
/// values in state.mod.
Field step_v(const PerturbationState& s, const EvolutionConfig& cfg);

/// One step of the modulated w-equation (frozen parameters, Q-projected
/// forcing). Rejects the step if the projection constraint has drifted:
/// ||P w|| / ||w|| > 1e-4 afterwards.
Field step_w(const PerturbationState& s, const EvolutionConfig& cfg,
             const SpectralPackage& pkg);

/// Advances (v, w, c, gamma) together; the modulation rates are re-solved at
/// every Runge-Kutta stage and (c, gamma) move by the same stage rule as the
/// fields.
class CoupledStepper {
  public:
    CoupledStepper(const Grid1D& grid, const EvolutionConfig& cfg,
                   const SpectralPackage& pkg);

    PerturbationState step(const PerturbationState& s) const;

  private:
    struct Rhs {
        ArrayXc nv, nw;
        Scalar cdot = 0, gammadot = 0;
    };
    Rhs eval_rhs(const ArrayXc& vhat, const ArrayXc& what, Scalar c) const;

    Grid1D grid_;
    EvolutionConfig cfg_;
    SpectralPackage pkg_;
    ArrayXc D_;              // i xi (Nyquist zeroed)
    ArrayXc S_;              // i xi - a
    ArrayXc Lw_;             // stiff w-symbol, for the projection compensation
    ArrayXc mask_;           // 2/3-rule mask (all ones when dealiasing is off)
    ArrayXc Ev_, E2v_, Qv_, F1v_, F2v_, F3v_;
    ArrayXc Ew_, E2w_, Qw_, F1w_, F2w_, F3w_;
    Field psi0_;             // psi_{c0}
};

PerturbationState step_coupled(const PerturbationState& s, const EvolutionConfig& cfg,
                               const SpectralPackage& pkg);

/// u(x) = psi_c(x - Theta) + v(x - Theta), Theta = theta + gamma.
Field reconstruct_lab_frame(const PerturbationState& s);

}  // namespace wkdv
