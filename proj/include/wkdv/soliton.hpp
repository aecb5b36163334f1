#pragma once

// The KdV soliton family psi_c(y) = (3c/2) sech^2(sqrt(c)/2 (y - x0)) and its
// closed-form derivatives in y and c, plus exponentially weighted samplings
// e^{+-ay} * (profile) evaluated without forming e^{ay} (the combined
// exponents are always <= 0 for |a| <= sqrt(c), so nothing overflows).

#include "wkdv/spectral_grid.hpp"

namespace wkdv {

struct SolitonParams {
    Scalar speed = 1.0;  // c > 0
    Scalar offset = 0.0; // x0

    void validate() const;
};

// Pointwise closed forms in the centered variable y (offset already removed).
Scalar psi_value(Scalar c, Scalar y);
Scalar dpsi_dy_value(Scalar c, Scalar y);
Scalar dpsi_dc_value(Scalar c, Scalar y);

/// e^{w y} * psi_c(y) and friends, assembled from a single stable exponent
/// w*y - sqrt(c)*|y|; valid for |w| <= sqrt(c).
Scalar weighted_psi_value(Scalar c, Scalar weight, Scalar y);
Scalar weighted_dpsi_dy_value(Scalar c, Scalar weight, Scalar y);
Scalar weighted_dpsi_dc_value(Scalar c, Scalar weight, Scalar y);

Field psi(const SolitonParams& p, const Grid1D& grid);
Field dpsi_dy(const SolitonParams& p, const Grid1D& grid);
Field dpsi_dc(const SolitonParams& p, const Grid1D& grid);

/// Samples of e^{weight * y} * (d/dy psi_c)(y), centered profile.
Field weighted_dpsi_dy(Scalar c, Scalar weight, const Grid1D& grid);
Field weighted_dpsi_dc(Scalar c, Scalar weight, const Grid1D& grid);
Field weighted_psi(Scalar c, Scalar weight, const Grid1D& grid);

/// Discrete L2 norm of -c psi' + psi''' + (psi^2)', assembled spectrally.
/// Vanishes (to grid accuracy) exactly on the soliton family.
Scalar soliton_residual(const SolitonParams& p, const Grid1D& grid);

/// Same residual evaluated on an arbitrary profile u with speed c.
Scalar traveling_wave_residual(const Field& u, Scalar c);

}  // namespace wkdv
