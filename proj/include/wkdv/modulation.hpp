#pragma once

// Modulation of the soliton parameters (c(t), gamma(t)) along the flow.
// The rates (gammadot, cdot) are the unique solution of the 2x2 system that
// keeps both pairings <w, eta_i> frozen, i.e. the weighted perturbation stays
// clear of the discrete spectrum. Initial (c, gamma) are extracted from raw
// data by a damped Newton solve of the two pairing equations.

#include "wkdv/linearized_operator.hpp"

namespace wkdv {

struct ModulationState {
    Scalar c = 1.0;
    Scalar gamma = 0.0;
    Scalar cdot = 0.0;
    Scalar gammadot = 0.0;
    Scalar c0 = 1.0;  // fixed reference speed of the projection package
    Scalar a = 0.3;   // exponential weight (0 = unweighted mode)
};

struct ModulationRates {
    Scalar gammadot = 0;
    Scalar cdot = 0;
    Eigen::Matrix2d matrix;      // assembled system (tends to I for small data)
    Scalar condition_number = 1; // spectral condition number of `matrix`
};

/// Solve the constraint-preservation system for (gammadot, cdot). Rejects
/// (with the condition number in the diagnostic) once the matrix condition
/// number reaches 10 — the state has left the tube where modulation is valid.
ModulationRates solve_modulation_rates(const Field& w, const Field& v,
                                       const ModulationState& st,
                                       const SpectralPackage& pkg);

/// Advance (c, gamma) by one stage increment at the given rates; this is the
/// primitive each Runge-Kutta stage of the field stepper applies, so the
/// parameter integration has the same order as the fields.
ModulationState advance_modulation(const ModulationState& st,
                                   Scalar gammadot, Scalar cdot, Scalar dt);

struct InitialProjection {
    ModulationState state;  // solved (c, gamma); rates zero
    Field v0, w0;
    int iterations = 0;
    Scalar residual = 0;
    std::vector<Scalar> residual_history;  // ||F|| per Newton iterate
};

/// Split u0 = psi_c(. - gamma) + v0 with <e^{ay} v0, eta_i> = 0, by damped
/// Newton on (c, gamma). The adjoint profiles are those of `pkg` (frozen
/// reference); the weight cancels exactly in the Newton functional, so the
/// solve is exponential-free. Throws after 50 iterations without convergence.
InitialProjection project_initial(const Field& u0, Scalar c_guess, Scalar a,
                                  const SpectralPackage& pkg);

/// Convenience overload: builds the package at (a, c_guess) internally.
InitialProjection project_initial(const Field& u0, Scalar c_guess, Scalar a);

/// Fresh split of the current state (called when the constraint has drifted).
/// w is updated intrinsically, w_new = e^{-a dgamma} T_{dgamma} (w + W_old)
/// - W_new with W_* the weighted soliton profiles; it is never recomputed as
/// e^{ay} v, which would amplify far-field noise by e^{aL}.
InitialProjection reproject(const Field& v, const Field& w,
                            const ModulationState& st, const SpectralPackage& pkg);

}  // namespace wkdv
