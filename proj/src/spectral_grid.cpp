#include "wkdv/spectral_grid.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace wkdv {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// One cached FFT engine per length. The library is single-threaded by
// design (deterministic outputs), so a plain static map is fine.
Eigen::FFT<Scalar>& fft_engine(int n) {
    static std::map<int, Eigen::FFT<Scalar>> engines;
    return engines[n];
}

}  // namespace

Grid1D make_grid(Scalar L, int N) {
    if (!(L > 0)) {
        std::ostringstream os;
        os << "make_grid: half-length must be positive, got " << L;
        throw std::invalid_argument(os.str());
    }
    if (!is_power_of_two(N) || N < 16) {
        std::ostringstream os;
        os << "make_grid: N must be a power of two >= 16, got " << N;
        throw std::invalid_argument(os.str());
    }
    auto p = std::make_shared<Grid1D::Payload>();
    p->L = L;
    p->N = N;
    p->dx = 2 * L / N;
    p->x = ArrayX::LinSpaced(N, 0, N - 1) * p->dx - L;
    p->xi_sorted.resize(N);
    p->xi_fft.resize(N);
    const Scalar base = M_PI / L;
    for (int k = 0; k < N; ++k) {
        int signed_k = (k < N / 2) ? k : k - N;
        p->xi_fft[k] = base * signed_k;
        p->xi_sorted[k] = base * (k - N / 2);
    }
    Grid1D g;
    g.p_ = std::move(p);
    return g;
}

Field make_field(const Grid1D& grid) {
    return Field{grid, ArrayX::Zero(grid.n_points())};
}

SpectralField to_spectral(const Field& f) {
    const int n = f.grid.n_points();
    Eigen::VectorXcd out(n);
    Eigen::VectorXd in = f.values.matrix();
    fft_engine(n).fwd(out, in);
    return SpectralField{f.grid, out.array()};
}

Field from_spectral(const SpectralField& f) {
    const int n = f.grid.n_points();
    Eigen::VectorXcd out(n);
    Eigen::VectorXcd in = f.coeffs.matrix();
    fft_engine(n).inv(out, in);
    const Scalar scale = out.array().abs().maxCoeff();
    const Scalar imag_res = out.array().imag().abs().maxCoeff();
    if (scale > 0 && imag_res > 1e-10 * scale) {
        std::ostringstream os;
        os << "from_spectral: coefficients are not conjugate-even "
              "(relative imaginary residue "
           << imag_res / scale << ")";
        throw std::invalid_argument(os.str());
    }
    return Field{f.grid, out.array().real()};
}

ArrayXc fft_forward(const ArrayXc& in) {
    const int n = static_cast<int>(in.size());
    Eigen::VectorXcd out(n);
    Eigen::VectorXcd v = in.matrix();
    fft_engine(n).fwd(out, v);
    return out.array();
}

ArrayXc fft_inverse(const ArrayXc& in) {
    const int n = static_cast<int>(in.size());
    Eigen::VectorXcd out(n);
    Eigen::VectorXcd v = in.matrix();
    fft_engine(n).inv(out, v);
    return out.array();
}

SpectralField spectral_derivative(const SpectralField& f, int order) {
    if (order < 0) throw std::invalid_argument("spectral_derivative: order must be >= 0");
    if (order == 0) return f;
    const int n = f.grid.n_points();
    ArrayXc out = f.coeffs;
    const ArrayX& xi = f.grid.xi_fft();
    for (int k = 0; k < n; ++k) {
        out[k] *= std::pow(Complex(0, xi[k]), order);
    }
    if (order % 2 == 1) out[n / 2] = 0;  // Nyquist has no well-defined sign
    return SpectralField{f.grid, std::move(out)};
}

Field spectral_derivative(const Field& f, int order) {
    if (order == 0) return f;
    return from_spectral(spectral_derivative(to_spectral(f), order));
}

void dealias_in_place(const Grid1D& grid, ArrayXc& coeffs) {
    const int n = grid.n_points();
    const Scalar cut = Scalar(n) / 3;
    const ArrayX& xi = grid.xi_fft();
    const Scalar base = M_PI / grid.half_length();
    for (int k = 0; k < n; ++k) {
        if (std::abs(xi[k] / base) > cut) coeffs[k] = 0;
    }
}

SpectralField dealias(const SpectralField& f) {
    SpectralField out = f;
    dealias_in_place(out.grid, out.coeffs);
    return out;
}

Field translate(const Field& f, Scalar s) {
    SpectralField sf = to_spectral(f);
    const ArrayX& xi = f.grid.xi_fft();
    const int n = f.grid.n_points();
    for (int k = 0; k < n; ++k) {
        sf.coeffs[k] *= std::exp(Complex(0, -xi[k] * s));
    }
    sf.coeffs[n / 2] = sf.coeffs[n / 2].real();  // keep the result real
    return from_spectral(sf);
}

Field apply_fourier_multiplier(const Field& f, const ArrayXc& symbol) {
    SpectralField sf = to_spectral(f);
    sf.coeffs *= symbol;
    return from_spectral(sf);
}

Scalar evaluate(const SpectralField& f, Scalar x) {
    // samples start at -L, so the stored coefficients represent the basis
    // e^{i xi_k (x + L)}
    const int n = f.grid.n_points();
    const Scalar shifted = x + f.grid.half_length();
    const ArrayX& xi = f.grid.xi_fft();
    Complex acc = 0;
    for (int k = 0; k < n; ++k) {
        if (k == n / 2) {
            acc += f.coeffs[k] * std::cos(xi[k] * shifted);
        } else {
            acc += f.coeffs[k] * std::exp(Complex(0, xi[k] * shifted));
        }
    }
    return acc.real() / n;
}

Scalar peak_location(const Field& f) {
    int m0 = 0;
    f.values.maxCoeff(&m0);
    SpectralField sf = to_spectral(f);
    SpectralField d1 = spectral_derivative(sf, 1);
    SpectralField d2 = spectral_derivative(sf, 2);
    Scalar x = f.grid.points()[m0];
    for (int it = 0; it < 40; ++it) {
        const Scalar g = evaluate(d1, x);
        const Scalar h = evaluate(d2, x);
        if (h == 0) break;
        const Scalar next = x - g / h;
        if (std::abs(next - x) < 1e-14 * (1 + std::abs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

Scalar integrate(const Field& f) { return f.grid.dx() * f.values.sum(); }

Scalar inner(const Field& f, const Field& g) {
    return f.grid.dx() * (f.values * g.values).sum();
}

Scalar spectral_inner(const Grid1D& grid, const ArrayXc& fhat, const ArrayXc& ghat) {
    return grid.dx() / grid.n_points() * (fhat * ghat.conjugate()).real().sum();
}

Scalar l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

Scalar h1_inner(const Field& f, const Field& g) {
    return inner(f, g) + inner(spectral_derivative(f, 1), spectral_derivative(g, 1));
}

Scalar h1_norm(const Field& f) { return std::sqrt(h1_inner(f, f)); }

Scalar hs_norm(const Field& f, Scalar s) {
    SpectralField sf = to_spectral(f);
    const ArrayX& xi = f.grid.xi_fft();
    Scalar acc = 0;
    for (int k = 0; k < f.grid.n_points(); ++k) {
        acc += std::pow(1 + xi[k] * xi[k], s) * std::norm(sf.coeffs[k]);
    }
    return std::sqrt(f.grid.dx() / f.grid.n_points() * acc);
}

Scalar sup_norm(const Field& f) { return f.values.abs().maxCoeff(); }

Field cumulative_integral(const Field& f) {
    const int n = f.grid.n_points();
    const Scalar dx = f.grid.dx();
    ArrayX out(n);
    // trapezoid from the left edge; f(-L) closes the first panel, values
    // outside the grid count as zero
    out[0] = 0.5 * dx * f.values[0];
    for (int m = 1; m < n; ++m) {
        out[m] = out[m - 1] + 0.5 * dx * (f.values[m - 1] + f.values[m]);
    }
    return Field{f.grid, std::move(out)};
}

bool all_finite(const Field& f) { return f.values.isFinite().all(); }

}  // namespace wkdv
