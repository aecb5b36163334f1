#pragma once

// The exponentially weighted linearization about the soliton,
//
//   A_a = (d/dy - a)(-(d/dy - a)^2 + c) - 2 (d/dy - a) (psi_c .),
//
// its two-dimensional (generalized) kernel, the biorthogonal adjoint pair,
// the rank-2 projections P and Q, the continuous-spectrum curve, and a dense
// discretized eigensolve. Weighted conjugations are always realized through
// the shifted derivative d/dy - a; the factors e^{+-ay} are never formed on
// the grid (e^{aL} would destroy conditioning), and every stored weighted
// profile is evaluated from stable combined-exponent closed forms.

#include <vector>

#include "wkdv/soliton.hpp"
#include "wkdv/spectral_grid.hpp"

namespace wkdv {

struct WeightParams {
    Scalar weight = 0.3;  // a, in (0, sqrt(c/3))
    Scalar speed = 1.0;   // c > 0

    void validate() const;
};

/// Shared hypothesis check; a = 0 (unweighted degenerate mode) is accepted
/// only where explicitly documented.
void check_weight_window(Scalar a, Scalar c, bool allow_zero);

/// (i xi - a) in FFT order; the Nyquist mode keeps only the -a part so the
/// symbol stays conjugate-even.
ArrayXc shifted_derivative_symbol(const Grid1D& grid, Scalar a);

/// Symbol of the constant-coefficient part (d-a)(-(d-a)^2 + c).
ArrayXc weighted_linear_symbol(const Grid1D& grid, const WeightParams& params);

/// (d/dy - a) f, assembled spectrally.
Field apply_shifted_derivative(const Field& f, Scalar a);

/// A_a f with the potential psi_{c} taken from params.speed.
Field apply_Aa(const Field& f, const WeightParams& params);

/// Kernel pair, adjoint pair, and the biorthogonality constants.
struct SpectralPackage {
    Grid1D grid;
    WeightParams params;
    Field zeta1, zeta2;  // e^{ay} dy psi_c, e^{ay} dc psi_c
    Field eta1, eta2;    // e^{-ay}[th1 * Iy(dc psi) + th2 * psi], e^{-ay} th3 psi
    Field deta1, deta2;  // dy eta_i, from closed forms
    Field adj1, adj2;    // e^{ay} eta_i (weight-free adjoint profiles)
    ArrayXc zeta1_hat, zeta2_hat, eta1_hat, eta2_hat;  // cached transforms
    Scalar theta1 = 0, theta2 = 0, theta3 = 0;
};

/// Solve the biorthogonality system <zeta_j, eta_k> = delta_jk for the theta
/// constants and sample all profiles. The antiderivative of dc psi is taken
/// by cumulative trapezoid quadrature from the left grid edge.
SpectralPackage build_spectral_package(const WeightParams& params, const Grid1D& grid);

/// P f = sum_i <f, eta_i> zeta_i ; Q = 1 - P.
Field project_P(const Field& f, const SpectralPackage& pkg);
Field project_Q(const Field& f, const SpectralPackage& pkg);

/// max_i |<f, eta_i>| / ||f||_{L2}; 0 for f = 0.
Scalar constraint_defect(const Field& f, const SpectralPackage& pkg);

/// The continuous-spectrum curve tau -> i tau^3 - 3a tau^2 + i(c-3a^2) tau
/// - a(c - a^2); its real part is at most -a(c - a^2).
Complex continuous_spectrum_curve(Scalar tau, const WeightParams& params);

/// min over tau of |lambda - curve(tau)| (coarse scan plus local refinement).
Scalar curve_distance(Complex lambda, const WeightParams& params);

/// Dense matrix of A_a in the sample basis (column j = A_a e_j).
Eigen::MatrixXd assemble_Aa_matrix(const WeightParams& params, const Grid1D& grid);

struct EigenMode {
    Complex lambda;
    Scalar boundary_mass = 0;  // |v|^2 fraction in the outer 10% of the grid
};

/// All eigenvalues of the discretized operator, sorted by real part
/// descending, each with the boundary-mass fraction of its eigenvector
/// (modes with > 1% boundary mass are periodic-truncation artifacts).
std::vector<EigenMode> discretized_spectrum(const WeightParams& params, const Grid1D& grid);

}  // namespace wkdv
