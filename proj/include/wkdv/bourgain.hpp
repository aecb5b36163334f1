#pragma once

// Dyadic space-time shells and the Besov-refined dispersive norms
//
//   ||u||_{X^{s,+-1/2,1}} = ( sum_j 2^{2sj} ( sum_k 2^{+-k/2} m_jk )^2 )^{1/2},
//
// where m_jk is the L2 mass of the space-time transform on the shell
// <xi> ~ 2^j, <tau - xi^3> ~ 2^k (half-open dyadic bins, so the shells
// partition the lattice exactly). Masses are normalized so that
// sum_jk m_jk^2 = ||u||^2_{L2(t,x)} = dt dx sum u^2.
//
// Also here: empirical ratio probes for the embedding into C_t H^s_x, the
// homogeneous/inhomogeneous group estimates and the derivative bilinear
// estimate. The probes measure constants; tests assert finiteness and
// stability under refinement, never specific continuum values.

#include "wkdv/evolution.hpp"

namespace wkdv {

struct SpaceTimeField {
    Grid1D grid;                 // space
    Scalar horizon = 0;          // time interval [0, T)
    int n_t = 0;                 // power of two
    Eigen::MatrixXd values;      // n_t x N samples u(t_n, x_m)
    Eigen::MatrixXcd transform;  // (tau_q, xi_k), both axes in FFT order

    Scalar dt() const { return horizon / n_t; }
    Scalar time_at(int n) const { return n * dt(); }
    /// tau_q = 2 pi q~ / T, signed FFT convention.
    Scalar tau_at(int q) const {
        const int signed_q = (q < n_t / 2) ? q : q - n_t;
        return 2 * M_PI * signed_q / horizon;
    }
};

/// Build from real samples; fills the 2-D transform.
SpaceTimeField make_space_time_field(const Grid1D& grid, Scalar T,
                                     const Eigen::MatrixXd& values);

/// ||u||_{L2(t,x)}^2 = dt dx sum u^2.
Scalar space_time_l2sq(const SpaceTimeField& F);

struct ShellDecomposition {
    Eigen::MatrixXd masses;  // (j_max+1) x (k_max+1)
    int j_max = 0, k_max = 0;

    Scalar total_mass_sq() const { return masses.array().square().sum(); }
};

ShellDecomposition shell_decompose(const SpaceTimeField& F);

/// sign = +1 or -1 selects b = +1/2 or -1/2.
Scalar xsb1_norm(const ShellDecomposition& shells, Scalar s, int sign);
Scalar xsb1_norm(const SpaceTimeField& F, Scalar s, int sign);

/// Smooth even cutoff: 1 on [-1,1], supported in [-2,2].
Scalar smooth_bump(Scalar t);

/// Approximate time-localized norm: minimum of xsb1_norm over the extension
/// family {F} u {F * rho(t / mu) : mu = T/2^{i+1} >= delta, i < n_ext}.
/// An upper bound on the true infimum; monotone in delta by construction.
Scalar timelocalized_norm(const SpaceTimeField& F, Scalar delta, Scalar s, int n_ext);

/// sup_n ||F(t_n, .)||_{H^s} / ||F||_{X^{s,1/2,1}}; rejects F = 0.
Scalar embedding_ratio(const SpaceTimeField& F, Scalar s);

/// Proven discrete bound for embedding_ratio under this normalization:
/// 2^s sqrt(2/pi + 2/T).
Scalar embedding_bound(Scalar s, Scalar T);

/// || (|D|u) v ||_{X^{s,-1/2,1}} / (||u|| ||v||), products formed on the
/// doubled (2 n_t) x (2 N) lattice so the frequency-side convolution is
/// alias-free for half-band inputs. Rejects zero denominators.
Scalar bilinear_ratio(const SpaceTimeField& f, const SpaceTimeField& g, Scalar s);

/// (tau1+tau2) - (xi1+xi2)^3 - (tau1-xi1^3) - (tau2-xi2^3) + 3 xi xi1 xi2
/// with xi = xi1 + xi2; identically zero.
Scalar resonance_defect(Scalar tau1, Scalar xi1, Scalar tau2, Scalar xi2);

enum class LinearEstimateKind { airy_hom, airy_inhom, diss_hom, diss_inhom };

/// Homogeneous kinds: || rho(t) W(t) f ||_{X^{s,1/2,1}} / ||f||_{H^s} with the
/// cutoff centered in the sampling window (the norms are translation
/// invariant in t).
Scalar linear_estimate_ratio(const Field& f, LinearEstimateKind kind, Scalar s,
                             const EvolutionConfig& cfg, Scalar T, int n_t);

/// Inhomogeneous kinds: || rho(t) int_0^t W(t-s) F(s) ds || / ||F||_{X^{s,-1/2,1}}.
/// The Duhamel integral is evaluated mode-exactly (phi1 of the resonance
/// denominator), so there is no quadrature error in time.
Scalar linear_estimate_ratio(const SpaceTimeField& forcing, LinearEstimateKind kind,
                             Scalar s, const EvolutionConfig& cfg);

/// Mode-exact Duhamel response of d/dt u = sigma u + F on [0, T): returns
/// uhat(t_n, xi_k) given the forcing field.
Eigen::MatrixXcd duhamel_response(const SpaceTimeField& forcing,
                                  const ArrayXc& sigma);

/// Samples of the same band-limited function on a grid/lattice with twice the
/// resolution (trigonometric interpolation; exact).
Field refine_grid2x(const Field& f);
SpaceTimeField refine_lattice2x(const SpaceTimeField& F);

}  // namespace wkdv
