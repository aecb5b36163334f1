#include "wkdv/bourgain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace wkdv {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr int kMaxShells = 64;  // <.> up to 2^64; excess mass goes to the top shell

// zero-pad an FFT-ordered spectrum to twice the length (Nyquist split in half)
ArrayXc pad_spectrum(const ArrayXc& X) {
    const int n = static_cast<int>(X.size());
    ArrayXc Y = ArrayXc::Zero(2 * n);
    for (int k = 0; k < n / 2; ++k) Y[k] = X[k];
    for (int k = n / 2 + 1; k < n; ++k) Y[k + n] = X[k];
    Y[n / 2] = 0.5 * X[n / 2];
    Y[2 * n - n / 2] = 0.5 * X[n / 2];
    return Y;
}

// samples of the same band-limited function on the doubled lattice
Eigen::MatrixXd upsample2x(const Eigen::MatrixXd& coarse) {
    const int nt = static_cast<int>(coarse.rows());
    const int nx = static_cast<int>(coarse.cols());
    Eigen::MatrixXd xfine(nt, 2 * nx);
    for (int n = 0; n < nt; ++n) {
        ArrayXc X = fft_forward(coarse.row(n).array().cast<Complex>());
        xfine.row(n) = (2.0 * fft_inverse(pad_spectrum(X)).real()).matrix().transpose();
    }
    Eigen::MatrixXd out(2 * nt, 2 * nx);
    for (int k = 0; k < 2 * nx; ++k) {
        ArrayXc C = fft_forward(xfine.col(k).array().cast<Complex>());
        out.col(k) = (2.0 * fft_inverse(pad_spectrum(C)).real()).matrix();
    }
    return out;
}

void transform_rows_cols(SpaceTimeField& F) {
    const int nt = F.n_t;
    const int nx = F.grid.n_points();
    F.transform.resize(nt, nx);
    for (int n = 0; n < nt; ++n) {
        F.transform.row(n) =
            fft_forward(F.values.row(n).array().cast<Complex>()).matrix().transpose();
    }
    for (int k = 0; k < nx; ++k) {
        F.transform.col(k) = fft_forward(F.transform.col(k).array()).matrix();
    }
}

}  // namespace

SpaceTimeField make_space_time_field(const Grid1D& grid, Scalar T,
                                     const Eigen::MatrixXd& values) {
    if (!(T > 0)) throw std::invalid_argument("space-time field: T must be positive");
    const int nt = static_cast<int>(values.rows());
    if (!is_power_of_two(nt) || nt < 4) {
        std::ostringstream os;
        os << "space-time field: n_t must be a power of two >= 4, got " << nt;
        throw std::invalid_argument(os.str());
    }
    if (values.cols() != grid.n_points()) {
        throw std::invalid_argument("space-time field: column count != grid size");
    }
    SpaceTimeField F;
    F.grid = grid;
    F.horizon = T;
    F.n_t = nt;
    F.values = values;
    transform_rows_cols(F);
    return F;
}

Scalar space_time_l2sq(const SpaceTimeField& F) {
    return F.dt() * F.grid.dx() * F.values.array().square().sum();
}

ShellDecomposition shell_decompose(const SpaceTimeField& F) {
    const int nt = F.n_t;
    const int nx = F.grid.n_points();
    const Scalar cell = F.dt() * F.grid.dx() / (Scalar(nt) * nx);

    const ArrayX& xi = F.grid.xi_fft();
    std::vector<int> js(nx);
    int j_max = 0;
    for (int k = 0; k < nx; ++k) {
        const Scalar bracket = std::sqrt(1 + xi[k] * xi[k]);
        js[k] = static_cast<int>(std::floor(std::log2(bracket)));
        j_max = std::max(j_max, js[k]);
    }

    Eigen::MatrixXd mass_sq = Eigen::MatrixXd::Zero(j_max + 1, kMaxShells);
    int k_max = 0;
    for (int q = 0; q < nt; ++q) {
        const Scalar tau = F.tau_at(q);
        for (int k = 0; k < nx; ++k) {
            const Scalar mod = tau - xi[k] * xi[k] * xi[k];
            const Scalar bracket = std::sqrt(1 + mod * mod);
            int kk = static_cast<int>(std::floor(std::log2(bracket)));
            kk = std::min(kk, kMaxShells - 1);
            k_max = std::max(k_max, kk);
            mass_sq(js[k], kk) += cell * std::norm(F.transform(q, k));
        }
    }

    ShellDecomposition out;
    out.j_max = j_max;
    out.k_max = k_max;
    out.masses = mass_sq.leftCols(k_max + 1).array().sqrt();
    return out;
}

Scalar xsb1_norm(const ShellDecomposition& shells, Scalar s, int sign) {
    const Scalar half = sign >= 0 ? 0.5 : -0.5;
    Scalar acc = 0;
    for (int j = 0; j <= shells.j_max; ++j) {
        Scalar inner_sum = 0;
        for (int k = 0; k <= shells.k_max; ++k) {
            inner_sum += std::pow(2.0, half * k) * shells.masses(j, k);
        }
        acc += std::pow(2.0, 2 * s * j) * inner_sum * inner_sum;
    }
    return std::sqrt(acc);
}

Scalar xsb1_norm(const SpaceTimeField& F, Scalar s, int sign) {
    return xsb1_norm(shell_decompose(F), s, sign);
}

Scalar smooth_bump(Scalar t) {
    const Scalar at = std::abs(t);
    if (at <= 1) return 1;
    if (at >= 2) return 0;
    const auto f = [](Scalar x) { return std::exp(-1.0 / x); };
    return f(2 - at) / (f(2 - at) + f(at - 1));
}

Scalar timelocalized_norm(const SpaceTimeField& F, Scalar delta, Scalar s, int n_ext) {
    if (!(delta > 0) || delta > F.horizon) {
        throw std::invalid_argument("timelocalized_norm: need 0 < delta <= T");
    }
    Scalar best = xsb1_norm(F, s, +1);  // the identity extension
    for (int i = 0; i < n_ext; ++i) {
        const Scalar mu = F.horizon / std::pow(2.0, i + 1);
        if (mu < delta) break;
        Eigen::MatrixXd tapered = F.values;
        for (int n = 0; n < F.n_t; ++n) {
            tapered.row(n) *= smooth_bump(F.time_at(n) / mu);
        }
        best = std::min(
            best, xsb1_norm(make_space_time_field(F.grid, F.horizon, tapered), s, +1));
    }
    return best;
}

Scalar embedding_ratio(const SpaceTimeField& F, Scalar s) {
    Scalar sup = 0;
    for (int n = 0; n < F.n_t; ++n) {
        Field slice{F.grid, F.values.row(n).array()};
        sup = std::max(sup, hs_norm(slice, s));
    }
    const Scalar denom = xsb1_norm(F, s, +1);
    if (denom == 0) {
        throw std::invalid_argument("embedding_ratio: zero field");
    }
    return sup / denom;
}

Scalar embedding_bound(Scalar s, Scalar T) {
    return std::pow(2.0, s) * std::sqrt(2.0 / M_PI + 2.0 / T);
}

Scalar bilinear_ratio(const SpaceTimeField& f, const SpaceTimeField& g, Scalar s) {
    const Scalar denom = xsb1_norm(f, s, +1) * xsb1_norm(g, s, +1);
    if (denom == 0) {
        throw std::invalid_argument("bilinear_ratio: zero input norm");
    }
    if (!f.grid.same_as(g.grid) || f.n_t != g.n_t || f.horizon != g.horizon) {
        throw std::invalid_argument("bilinear_ratio: mismatched lattices");
    }

    // |D| f on the coarse lattice
    const int nx = f.grid.n_points();
    Eigen::MatrixXd df(f.n_t, nx);
    const ArrayX& xi = f.grid.xi_fft();
    for (int n = 0; n < f.n_t; ++n) {
        ArrayXc row = fft_forward(f.values.row(n).array().cast<Complex>());
        for (int k = 0; k < nx; ++k) row[k] *= std::abs(xi[k]);
        df.row(n) = fft_inverse(row).real().matrix().transpose();
    }

    // the pointwise product on the doubled lattice realizes the padded
    // frequency-side convolution without aliasing (for half-band inputs)
    Grid1D fine = make_grid(f.grid.half_length(), 2 * nx);
    Eigen::MatrixXd prod = upsample2x(df).array() * upsample2x(g.values).array();
    SpaceTimeField h = make_space_time_field(fine, f.horizon, prod);
    return xsb1_norm(h, s, -1) / denom;
}

Scalar resonance_defect(Scalar tau1, Scalar xi1, Scalar tau2, Scalar xi2) {
    const Scalar xi = xi1 + xi2;
    return std::abs((tau1 + tau2) - xi * xi * xi - (tau1 - xi1 * xi1 * xi1) -
                    (tau2 - xi2 * xi2 * xi2) + 3 * xi * xi1 * xi2);
}

namespace {

ArrayXc group_sigma(const Grid1D& grid, LinearEstimateKind kind,
                    const EvolutionConfig& cfg) {
    ArrayXc sigma = kdv_linear_symbol(grid);
    if (kind == LinearEstimateKind::diss_hom || kind == LinearEstimateKind::diss_inhom) {
        for (int k = 0; k < grid.n_points(); ++k) {
            sigma[k] -= dissipation_rate(grid.xi_fft()[k], cfg.a, cfg.c0);
        }
    }
    return sigma;
}

}  // namespace

Scalar linear_estimate_ratio(const Field& f, LinearEstimateKind kind, Scalar s,
                             const EvolutionConfig& cfg, Scalar T, int n_t) {
    if (kind == LinearEstimateKind::airy_inhom || kind == LinearEstimateKind::diss_inhom) {
        throw std::invalid_argument(
            "linear_estimate_ratio: inhomogeneous kinds take a space-time forcing");
    }
    const Scalar denom = hs_norm(f, s);
    if (denom == 0) throw std::invalid_argument("linear_estimate_ratio: zero data");

    const Grid1D& grid = f.grid;
    Eigen::MatrixXd values(n_t, grid.n_points());
    const Scalar dt = T / n_t;
    for (int n = 0; n < n_t; ++n) {
        const Scalar t = n * dt - T / 2;  // cutoff centered in the window
        Field moved = (kind == LinearEstimateKind::airy_hom)
                          ? apply_W1(f, t)
                          : apply_W2_two_sided(f, t, cfg);
        values.row(n) = (smooth_bump(t) * moved.values).matrix().transpose();
    }
    SpaceTimeField U = make_space_time_field(grid, T, values);
    return xsb1_norm(U, s, +1) / denom;
}

Eigen::MatrixXcd duhamel_response(const SpaceTimeField& forcing, const ArrayXc& sigma) {
    const int nt = forcing.n_t;
    const int nx = forcing.grid.n_points();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(nt, nx);
    for (int k = 0; k < nx; ++k) {
        const Complex sig = sigma[k];
        for (int q = 0; q < nt; ++q) {
            const Complex coeff = forcing.transform(q, k) / Scalar(nt);
            if (coeff == Complex(0, 0)) continue;
            const Complex itau(0, forcing.tau_at(q));
            for (int n = 0; n < nt; ++n) {
                const Scalar t = forcing.time_at(n);
                // int_0^t e^{sigma(t-s)} e^{i tau s} ds; the difference form is
                // stable whenever the group decays, the phi1 form handles the
                // near-resonant oscillatory case
                Complex duh;
                if (sig.real() < -1e-10) {
                    duh = (std::exp(itau * t) - std::exp(sig * t)) / (itau - sig);
                } else {
                    duh = t * std::exp(sig * t) * phi1((itau - sig) * t);
                }
                u(n, k) += coeff * duh;
            }
        }
    }
    return u;
}

Field refine_grid2x(const Field& f) {
    Grid1D fine = make_grid(f.grid.half_length(), 2 * f.grid.n_points());
    ArrayXc X = fft_forward(f.values.cast<Complex>());
    return Field{fine, 2.0 * fft_inverse(pad_spectrum(X)).real()};
}

SpaceTimeField refine_lattice2x(const SpaceTimeField& F) {
    Grid1D fine = make_grid(F.grid.half_length(), 2 * F.grid.n_points());
    return make_space_time_field(fine, F.horizon, upsample2x(F.values));
}

Scalar linear_estimate_ratio(const SpaceTimeField& forcing, LinearEstimateKind kind,
                             Scalar s, const EvolutionConfig& cfg) {
    if (kind == LinearEstimateKind::airy_hom || kind == LinearEstimateKind::diss_hom) {
        throw std::invalid_argument(
            "linear_estimate_ratio: homogeneous kinds take initial data");
    }
    const Scalar denom = xsb1_norm(forcing, s, -1);
    if (denom == 0) throw std::invalid_argument("linear_estimate_ratio: zero forcing");

    const ArrayXc sigma = group_sigma(forcing.grid, kind, cfg);
    Eigen::MatrixXcd uhat = duhamel_response(forcing, sigma);
    Eigen::MatrixXd values(forcing.n_t, forcing.grid.n_points());
    for (int n = 0; n < forcing.n_t; ++n) {
        values.row(n) = (smooth_bump(forcing.time_at(n)) *
                         fft_inverse(uhat.row(n).array()).real())
                            .matrix()
                            .transpose();
    }
    SpaceTimeField U = make_space_time_field(forcing.grid, forcing.horizon, values);
    return xsb1_norm(U, s, +1) / denom;
}

}  // namespace wkdv
