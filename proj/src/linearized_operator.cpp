#include "wkdv/linearized_operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace wkdv {

void check_weight_window(Scalar a, Scalar c, bool allow_zero) {
    if (!(c > 0)) {
        std::ostringstream os;
        os << "weight window: speed must be positive, got " << c;
        throw std::invalid_argument(os.str());
    }
    const Scalar cap = std::sqrt(c / 3);
    const bool low_ok = allow_zero ? a >= 0 : a > 0;
    if (!low_ok || !(a < cap)) {
        std::ostringstream os;
        os << "weight window: a must lie in " << (allow_zero ? "[0" : "(0")
           << ", sqrt(c/3)) = (.., " << cap << "), got " << a;
        throw std::invalid_argument(os.str());
    }
}

void WeightParams::validate() const { check_weight_window(weight, speed, false); }

ArrayXc shifted_derivative_symbol(const Grid1D& grid, Scalar a) {
    const int n = grid.n_points();
    ArrayXc s(n);
    const ArrayX& xi = grid.xi_fft();
    for (int k = 0; k < n; ++k) s[k] = Complex(-a, xi[k]);
    s[n / 2] = Complex(-a, 0);
    return s;
}

ArrayXc weighted_linear_symbol(const Grid1D& grid, const WeightParams& params) {
    ArrayXc s = shifted_derivative_symbol(grid, params.weight);
    return s * (params.speed - s.square());
}

Field apply_shifted_derivative(const Field& f, Scalar a) {
    return apply_fourier_multiplier(f, shifted_derivative_symbol(f.grid, a));
}

Field apply_Aa(const Field& f, const WeightParams& params) {
    params.validate();
    const ArrayXc sym = weighted_linear_symbol(f.grid, params);
    Field linear = apply_fourier_multiplier(f, sym);
    Field prod{f.grid, psi(SolitonParams{params.speed, 0}, f.grid).values * f.values};
    Field coupling = apply_shifted_derivative(prod, params.weight);
    return Field{f.grid, linear.values - 2 * coupling.values};
}

SpectralPackage build_spectral_package(const WeightParams& params, const Grid1D& grid) {
    check_weight_window(params.weight, params.speed, true);
    const Scalar a = params.weight;
    const Scalar c = params.speed;
    const SolitonParams sol{c, 0};

    SpectralPackage pkg;
    pkg.grid = grid;
    pkg.params = params;
    pkg.zeta1 = weighted_dpsi_dy(c, a, grid);
    pkg.zeta2 = weighted_dpsi_dc(c, a, grid);

    // Unweighted building blocks; the weight cancels in every pairing
    // <zeta_j, eta_k>, so the theta system is assembled exponential-free.
    Field psi0 = psi(sol, grid);
    Field dpsi = dpsi_dy(sol, grid);
    Field dcpsi = dpsi_dc(sol, grid);
    Field anti = cumulative_integral(dcpsi);  // Iy(dc psi), zero at the left edge

    Eigen::Matrix2d M;
    M << inner(dpsi, anti), inner(dpsi, psi0),
         inner(dcpsi, anti), inner(dcpsi, psi0);
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Scalar cond = svd.singularValues()(0) / svd.singularValues()(1);
    if (!std::isfinite(cond) || cond > 1e12) {
        std::ostringstream os;
        os << "build_spectral_package: singular biorthogonality system, "
              "condition number "
           << cond;
        throw std::runtime_error(os.str());
    }
    Eigen::Vector2d rhs(1, 0);
    Eigen::Vector2d theta = svd.solve(rhs);
    pkg.theta1 = theta(0);
    pkg.theta2 = theta(1);
    const Scalar pairing22 = inner(dcpsi, psi0);
    pkg.theta3 = 1 / pairing22;

    // eta = e^{-ay} (combination); psi-type pieces from stable closed forms,
    // the quadrature antiderivative weighted pointwise.
    Field wpsi_m = weighted_psi(c, -a, grid);
    Field wdpsi_m = weighted_dpsi_dy(c, -a, grid);
    Field wdcpsi_m = weighted_dpsi_dc(c, -a, grid);
    ArrayX decay = (-a * grid.points()).exp();

    pkg.eta1 = Field{grid, pkg.theta1 * decay * anti.values + pkg.theta2 * wpsi_m.values};
    pkg.eta2 = Field{grid, pkg.theta3 * wpsi_m.values};
    pkg.adj1 = Field{grid, pkg.theta1 * anti.values + pkg.theta2 * psi0.values};
    pkg.adj2 = Field{grid, pkg.theta3 * psi0.values};
    // dy eta1 = e^{-ay}[ -a(th1 anti + th2 psi) + th1 dc psi + th2 dy psi ]
    pkg.deta1 = Field{grid, -a * pkg.eta1.values + pkg.theta1 * wdcpsi_m.values +
                                pkg.theta2 * wdpsi_m.values};
    pkg.deta2 = Field{grid, pkg.theta3 * (wdpsi_m.values - a * wpsi_m.values)};

    pkg.zeta1_hat = to_spectral(pkg.zeta1).coeffs;
    pkg.zeta2_hat = to_spectral(pkg.zeta2).coeffs;
    pkg.eta1_hat = to_spectral(pkg.eta1).coeffs;
    pkg.eta2_hat = to_spectral(pkg.eta2).coeffs;
    return pkg;
}

Field project_P(const Field& f, const SpectralPackage& pkg) {
    const Scalar c1 = inner(f, pkg.eta1);
    const Scalar c2 = inner(f, pkg.eta2);
    return Field{f.grid, c1 * pkg.zeta1.values + c2 * pkg.zeta2.values};
}

Field project_Q(const Field& f, const SpectralPackage& pkg) {
    Field p = project_P(f, pkg);
    return Field{f.grid, f.values - p.values};
}

Scalar constraint_defect(const Field& f, const SpectralPackage& pkg) {
    const Scalar n = l2_norm(f);
    if (n == 0) return 0;
    return std::max(std::abs(inner(f, pkg.eta1)), std::abs(inner(f, pkg.eta2))) / n;
}

Complex continuous_spectrum_curve(Scalar tau, const WeightParams& params) {
    const Scalar a = params.weight;
    const Scalar c = params.speed;
    return Complex(-3 * a * tau * tau - a * (c - a * a),
                   tau * tau * tau + (c - 3 * a * a) * tau);
}

Scalar curve_distance(Complex lambda, const WeightParams& params) {
    // coarse scan over the representable curve range, then ternary refinement
    const Scalar tau_hi = std::cbrt(std::abs(lambda.imag())) + 5.0;
    const int n_scan = 4000;
    Scalar best_tau = 0, best = std::abs(lambda - continuous_spectrum_curve(0, params));
    for (int i = 0; i <= n_scan; ++i) {
        const Scalar tau = -tau_hi + 2 * tau_hi * i / n_scan;
        const Scalar d = std::abs(lambda - continuous_spectrum_curve(tau, params));
        if (d < best) {
            best = d;
            best_tau = tau;
        }
    }
    Scalar lo = best_tau - 2 * tau_hi / n_scan, hi = best_tau + 2 * tau_hi / n_scan;
    for (int it = 0; it < 80; ++it) {
        const Scalar m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        const Scalar d1 = std::abs(lambda - continuous_spectrum_curve(m1, params));
        const Scalar d2 = std::abs(lambda - continuous_spectrum_curve(m2, params));
        if (d1 < d2)
            hi = m2;
        else
            lo = m1;
    }
    const Scalar tau = 0.5 * (lo + hi);
    return std::min(best, std::abs(lambda - continuous_spectrum_curve(tau, params)));
}

Eigen::MatrixXd assemble_Aa_matrix(const WeightParams& params, const Grid1D& grid) {
    params.validate();
    const int n = grid.n_points();
    if (n > 2048) {
        throw std::invalid_argument(
            "assemble_Aa_matrix: dense assembly supported up to N = 2048");
    }
    Eigen::MatrixXd A(n, n);
    Field e = make_field(grid);
    for (int j = 0; j < n; ++j) {
        e.values.setZero();
        e.values[j] = 1;
        A.col(j) = apply_Aa(e, params).values.matrix();
    }
    return A;
}

std::vector<EigenMode> discretized_spectrum(const WeightParams& params, const Grid1D& grid) {
    Eigen::MatrixXd A = assemble_Aa_matrix(params, grid);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("discretized_spectrum: eigensolver failed to converge");
    }
    const int n = grid.n_points();
    const int edge = std::max(1, n / 20);  // outer 10% = 5% per side
    std::vector<EigenMode> modes(n);
    for (int j = 0; j < n; ++j) {
        modes[j].lambda = solver.eigenvalues()(j);
        Eigen::VectorXcd v = solver.eigenvectors().col(j);
        const Scalar total = v.squaredNorm();
        const Scalar outer =
            v.head(edge).squaredNorm() + v.tail(edge).squaredNorm();
        modes[j].boundary_mass = total > 0 ? outer / total : 0;
    }
    std::sort(modes.begin(), modes.end(), [](const EigenMode& x, const EigenMode& y) {
        return x.lambda.real() > y.lambda.real();
    });
    return modes;
}

}  // namespace wkdv
