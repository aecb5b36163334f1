#pragma once

// Uniform periodic grid on [-L, L) with FFT-based spectral calculus.
//
// Conventions used throughout the library:
//   * forward transform is the plain unnormalized DFT with kernel
//     e^{-i xi_k x_m}; the inverse divides by N,
//   * frequencies are xi_k = pi k / L for k = -N/2 .. N/2-1,
//   * quadrature is the periodic rectangle rule, integral(f) = dx * sum(f),
//     so ||f||_{L2}^2 = dx * sum f^2 = (dx/N) * sum |fhat|^2 (Parseval).

#include <complex>
#include <memory>

#include <Eigen/Dense>

namespace wkdv {

using Scalar = double;
using Complex = std::complex<Scalar>;
using ArrayX = Eigen::ArrayXd;
using ArrayXc = Eigen::ArrayXcd;

/// Immutable uniform periodic grid; cheap to copy (shared payload).
class Grid1D {
  public:
    Scalar half_length() const { return p_->L; }
    int n_points() const { return p_->N; }
    Scalar dx() const { return p_->dx; }
    /// Sample points x_m = -L + m dx, m = 0..N-1.
    const ArrayX& points() const { return p_->x; }
    /// Frequencies in monotone order, xi = pi k / L, k = -N/2..N/2-1.
    const ArrayX& frequencies() const { return p_->xi_sorted; }
    /// Frequencies in FFT storage order (k = 0..N/2-1, -N/2..-1),
    /// aligned with the coefficient layout of to_spectral().
    const ArrayX& xi_fft() const { return p_->xi_fft; }

    bool same_as(const Grid1D& other) const { return p_ == other.p_; }

  private:
    struct Payload {
        Scalar L = 0;
        int N = 0;
        Scalar dx = 0;
        ArrayX x, xi_sorted, xi_fft;
    };
    std::shared_ptr<const Payload> p_;
    friend Grid1D make_grid(Scalar, int);
};

/// Real samples of a function on a grid.
struct Field {
    Grid1D grid;
    ArrayX values;
};

/// Complex DFT coefficients of a function, FFT storage order.
struct SpectralField {
    Grid1D grid;
    ArrayXc coeffs;
};

/// Build a grid on [-L, L) with N points. N must be a power of two >= 16.
Grid1D make_grid(Scalar L, int N);

Field make_field(const Grid1D& grid);

/// Forward DFT (unnormalized).
SpectralField to_spectral(const Field& f);

/// Inverse DFT (divides by N). Rejects coefficient sets whose inverse has a
/// relative imaginary residue above 1e-10 (not the transform of a real field).
Field from_spectral(const SpectralField& f);

/// Plain complex-to-complex transforms on raw arrays (unnormalized fwd,
/// 1/N inv); used by the space-time machinery.
ArrayXc fft_forward(const ArrayXc& in);
ArrayXc fft_inverse(const ArrayXc& in);

/// order-th spectral derivative: multiplies coefficient k by (i xi_k)^order.
/// The caller is responsible for the input being band-limited well below
/// Nyquist; the Nyquist mode is zeroed for odd orders.
Field spectral_derivative(const Field& f, int order);
SpectralField spectral_derivative(const SpectralField& f, int order);

/// 2/3-rule dealiasing: zero every coefficient with |k| > N/3.
SpectralField dealias(const SpectralField& f);
void dealias_in_place(const Grid1D& grid, ArrayXc& coeffs);

/// Translate: returns g with g(x) = f(x - s), via the spectral phase shift.
Field translate(const Field& f, Scalar s);

/// Apply a diagonal Fourier multiplier (given in FFT storage order). The
/// multiplier must be conjugate-even for the result to be real.
Field apply_fourier_multiplier(const Field& f, const ArrayXc& symbol);

/// Trigonometric interpolation of the underlying band-limited function at an
/// arbitrary point. O(N) per evaluation.
Scalar evaluate(const SpectralField& f, Scalar x);

/// Sub-grid location of the global maximum (Newton refinement of the largest
/// sample through the trigonometric interpolant).
Scalar peak_location(const Field& f);

// --- quadrature and norms -------------------------------------------------

Scalar integrate(const Field& f);
Scalar inner(const Field& f, const Field& g);
/// <f, g> evaluated from transforms: (dx/N) Re sum fhat conj(ghat).
Scalar spectral_inner(const Grid1D& grid, const ArrayXc& fhat, const ArrayXc& ghat);
Scalar l2_norm(const Field& f);
Scalar h1_inner(const Field& f, const Field& g);
Scalar h1_norm(const Field& f);
/// ||f||_{H^s} with the Japanese-bracket weight <xi>^s = (1+xi^2)^{s/2}.
Scalar hs_norm(const Field& f, Scalar s);
Scalar sup_norm(const Field& f);

/// Cumulative trapezoid integral from the left grid edge, integrand assumed
/// zero outside the grid: g(x_m) = int_{-L}^{x_m} f.
Field cumulative_integral(const Field& f);

/// True iff every value is finite.
bool all_finite(const Field& f);

}  // namespace wkdv
