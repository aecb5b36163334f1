#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "wkdv/linearized_operator.hpp"

using namespace wkdv;

namespace {

Grid1D prod_grid() { return make_grid(20 * M_PI, 1024); }

Field random_decaying(const Grid1D& grid, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<Scalar> gauss(0, 1);
    Field f = make_field(grid);
    const ArrayX& x = grid.points();
    for (int j = 0; j < 6; ++j) {
        const Scalar amp = gauss(rng), freq = 0.5 + 0.4 * j, phase = gauss(rng);
        f.values += amp * (freq * x + phase).cos() * (-0.05 * x.square()).exp();
    }
    return f;
}

// Formal adjoint (-d/dy - a)(-(-d/dy - a)^2 + c) - 2 psi (-d/dy - a),
// assembled independently of apply_Aa.
Field apply_Aa_adjoint(const Field& f, const WeightParams& params) {
    const Grid1D& g = f.grid;
    const int n = g.n_points();
    ArrayXc s(n);
    for (int k = 0; k < n; ++k) s[k] = Complex(-params.weight, -g.xi_fft()[k]);
    s[n / 2] = Complex(-params.weight, 0);
    ArrayXc cubic = s * (params.speed - s.square());
    Field linear = apply_fourier_multiplier(f, cubic);
    Field sdf = apply_fourier_multiplier(f, s);
    Field psi0 = psi(SolitonParams{params.speed, 0}, g);
    return Field{g, linear.values - 2 * psi0.values * sdf.values};
}

}  // namespace

TEST_CASE("WeightParams window (0, sqrt(c/3))") {
    CHECK_NOTHROW((WeightParams{0.3, 1.0}).validate());
    CHECK_NOTHROW((WeightParams{1e-8, 1.0}).validate());
    CHECK_THROWS_AS((WeightParams{0.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((WeightParams{std::sqrt(1.0 / 3.0), 1.0}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS((WeightParams{0.6, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((WeightParams{0.3, -1.0}).validate(), std::invalid_argument);
}

TEST_CASE("constant-coefficient symbol matches (i xi - a)(-(i xi - a)^2 + c)") {
    Grid1D g = make_grid(M_PI, 64);
    WeightParams params{0.3, 1.0};
    ArrayXc sym = weighted_linear_symbol(g, params);
    for (int k = 0; k < 64; ++k) {
        if (k == 32) continue;  // Nyquist handled separately
        const Complex s(-params.weight, g.xi_fft()[k]);
        const Complex expect = s * (params.speed - s * s);
        CHECK(std::abs(sym[k] - expect) < 1e-14 * (1.0 + std::abs(expect)));
    }
    // applying the multiplier to a pure mode reproduces the symbol action
    const Scalar xi0 = 5.0;
    Field u{g, (xi0 * g.points()).cos()};
    Field out = apply_fourier_multiplier(u, sym);
    const Complex s(-params.weight, xi0);
    const Complex sig = s * (params.speed - s * s);
    ArrayX expect = sig.real() * (xi0 * g.points()).cos() -
                    sig.imag() * (xi0 * g.points()).sin();
    CHECK((out.values - expect).abs().maxCoeff() < 1e-10);
}

TEST_CASE("weighted operator tends to the unweighted one as a -> 0") {
    Grid1D g = prod_grid();
    Field w = random_decaying(g, 11);
    WeightParams tiny{1e-8, 1.0};
    Field weighted = apply_Aa(w, tiny);
    // unweighted d/dy (-d^2 + c - 2 psi)
    Field psi0 = psi(SolitonParams{1.0, 0}, g);
    Field inner_part{g, -spectral_derivative(w, 2).values + 1.0 * w.values -
                            2 * psi0.values * w.values};
    Field unweighted = spectral_derivative(inner_part, 1);
    CHECK((weighted.values - unweighted.values).abs().maxCoeff() <
          1e-6 * (1 + unweighted.values.abs().maxCoeff()));
}

TEST_CASE("kernel pair of the weighted operator") {
    Grid1D g = prod_grid();
    WeightParams params{0.3, 1.0};
    SpectralPackage pkg = build_spectral_package(params, g);

    CHECK(l2_norm(apply_Aa(pkg.zeta1, params)) < 1e-6 * l2_norm(pkg.zeta1));
    Field once = apply_Aa(pkg.zeta2, params);
    CHECK(l2_norm(apply_Aa(once, params)) < 1e-4 * l2_norm(pkg.zeta2));
}

TEST_CASE("A_a zeta2 lies in span{zeta1}; coefficient recorded") {
    Grid1D g = prod_grid();
    WeightParams params{0.3, 1.0};
    SpectralPackage pkg = build_spectral_package(params, g);
    Field image = apply_Aa(pkg.zeta2, params);
    const Scalar alpha = inner(image, pkg.zeta1) / inner(pkg.zeta1, pkg.zeta1);
    Field resid{g, image.values - alpha * pkg.zeta1.values};
    CHECK(l2_norm(resid) < 1e-4 * l2_norm(image));
    MESSAGE("A_a zeta2 = alpha * zeta1 with alpha = ", alpha);
    CHECK(std::abs(std::abs(alpha) - 1.0) < 1e-3);  // magnitude is 1; sign recorded above
}

TEST_CASE("biorthogonality to 1e-8") {
    Grid1D g = prod_grid();
    SpectralPackage pkg = build_spectral_package(WeightParams{0.3, 1.0}, g);
    CHECK(std::abs(inner(pkg.zeta1, pkg.eta1) - 1) < 1e-8);
    CHECK(std::abs(inner(pkg.zeta2, pkg.eta2) - 1) < 1e-8);
    CHECK(std::abs(inner(pkg.zeta1, pkg.eta2)) < 1e-8);
    CHECK(std::abs(inner(pkg.zeta2, pkg.eta1)) < 1e-8);
}

TEST_CASE("the zeta1/eta2 pairing vanishes by symmetry, not by the solve") {
    // <e^{ay} dy psi, e^{-ay} psi> = integral of (psi^2/2)' = 0 for any a.
    Grid1D g = prod_grid();
    SpectralPackage pkg = build_spectral_package(WeightParams{0.3, 1.0}, g);
    CHECK(std::abs(inner(pkg.zeta1, pkg.eta2)) < 1e-9);
}

TEST_CASE("theta constants against hand-derived closed forms") {
    // theta1 = -2/(9 sqrt(c)), theta2 = 2/(9 c^2), theta3 = 2/(9 sqrt(c)),
    // obtained from int psi^2 = 6 c^{3/2}, int psi = 6 sqrt(c). The quadrature
    // antiderivative is second-order accurate, so agreement tightens with dx.
    WeightParams params{0.3, 1.0};
    SpectralPackage coarse = build_spectral_package(params, make_grid(20 * M_PI, 1024));
    CHECK(std::abs(coarse.theta1 + 2.0 / 9.0) < 1e-3);
    CHECK(std::abs(coarse.theta2 - 2.0 / 9.0) < 1e-3);
    CHECK(std::abs(coarse.theta3 - 2.0 / 9.0) < 1e-3);
    SpectralPackage fine = build_spectral_package(params, make_grid(20 * M_PI, 4096));
    const Scalar err_c = std::abs(coarse.theta1 + 2.0 / 9.0);
    const Scalar err_f = std::abs(fine.theta1 + 2.0 / 9.0);
    CHECK(err_f < 0.25 * err_c + 1e-12);

    WeightParams p2{0.3, 2.0};
    SpectralPackage pkg2 = build_spectral_package(p2, make_grid(20 * M_PI, 2048));
    CHECK(std::abs(pkg2.theta1 + 2.0 / (9.0 * std::sqrt(2.0))) < 1e-3);
    CHECK(std::abs(pkg2.theta2 - 2.0 / (9.0 * 4.0)) < 1e-3);
    CHECK(std::abs(pkg2.theta3 - 2.0 / (9.0 * std::sqrt(2.0))) < 1e-3);
}

TEST_CASE("doubling the domain at fixed resolution leaves theta1 unchanged") {
    WeightParams params{0.3, 1.0};
    SpectralPackage p1 = build_spectral_package(params, make_grid(20 * M_PI, 1024));
    SpectralPackage p2 = build_spectral_package(params, make_grid(40 * M_PI, 2048));
    CHECK(std::abs(p1.theta1 - p2.theta1) < 1e-6 * std::abs(p1.theta1));
}

TEST_CASE("projections: rank-2 identity on the kernel pair") {
    Grid1D g = prod_grid();
    SpectralPackage pkg = build_spectral_package(WeightParams{0.3, 1.0}, g);

    Field p1 = project_P(pkg.zeta1, pkg);
    CHECK(l2_norm(Field{g, p1.values - pkg.zeta1.values}) < 1e-8 * l2_norm(pkg.zeta1));

    Field w = random_decaying(g, 5);
    Field q = project_Q(w, pkg);
    CHECK(std::abs(inner(q, pkg.eta1)) < 1e-8 * l2_norm(w));
    CHECK(std::abs(inner(q, pkg.eta2)) < 1e-8 * l2_norm(w));

    Field pw = project_P(w, pkg);
    Field ppw = project_P(pw, pkg);
    CHECK(l2_norm(Field{g, ppw.values - pw.values}) < 1e-10 * l2_norm(w));

    CHECK(l2_norm(project_Q(pkg.zeta1, pkg)) < 1e-8 * l2_norm(pkg.zeta1));
    CHECK(l2_norm(project_Q(pkg.zeta2, pkg)) < 1e-8 * l2_norm(pkg.zeta2));

    Field orth{g, w.values - project_P(w, pkg).values};
    CHECK(l2_norm(project_P(orth, pkg)) < 1e-8 * l2_norm(w));
}

TEST_CASE("adjoint consistency on random decaying pairs") {
    Grid1D g = prod_grid();
    WeightParams params{0.3, 1.0};
    for (unsigned seed = 0; seed < 5; ++seed) {
        Field u = random_decaying(g, 100 + seed);
        Field v = random_decaying(g, 200 + seed);
        const Scalar lhs = inner(apply_Aa(u, params), v);
        const Scalar rhs = inner(u, apply_Aa_adjoint(v, params));
        CHECK(std::abs(lhs - rhs) < 1e-8 * (1 + std::abs(lhs)));
    }
}

TEST_CASE("continuous spectrum curve") {
    WeightParams params{0.3, 1.0};
    Complex at0 = continuous_spectrum_curve(0.0, params);
    CHECK(at0.real() == doctest::Approx(-0.273).epsilon(1e-12));
    CHECK(at0.imag() == 0.0);
    const Scalar gap = params.weight * (params.speed - params.weight * params.weight);
    for (Scalar tau : {-4.0, -0.5, 0.0, 0.1, 2.0, 9.0}) {
        CHECK(continuous_spectrum_curve(tau, params).real() <= -gap + 1e-14);
    }
    // a -> 0: purely imaginary Airy + transport symbol
    WeightParams nearly{1e-12, 1.0};
    for (Scalar tau : {-2.0, 0.3, 1.0}) {
        Complex lam = continuous_spectrum_curve(tau, nearly);
        CHECK(std::abs(lam.real()) < 1e-10);
        CHECK(lam.imag() == doctest::Approx(tau * tau * tau + tau).epsilon(1e-12));
    }
}

TEST_CASE("discretized spectrum: double kernel, gap, and curve placement") {
    Grid1D g = make_grid(20 * M_PI, 512);
    WeightParams params{0.3, 1.0};
    auto modes = discretized_spectrum(params, g);
    CHECK(modes.size() == 512);

    int near_zero = 0;
    for (const auto& m : modes)
        if (std::abs(m.lambda) < 1e-3) ++near_zero;
    CHECK(near_zero == 2);

    const Scalar gap = 0.273;
    int checked = 0;
    for (const auto& m : modes) {
        if (std::abs(m.lambda) < 1e-3) continue;
        if (m.boundary_mass > 0.01) continue;  // periodic-truncation artifact
        CHECK(m.lambda.real() <= -gap + 0.02);
        CHECK(curve_distance(m.lambda, params) < 0.05);
        ++checked;
    }
    MESSAGE("non-artifact continuous-branch eigenvalues checked: ", checked);
}

TEST_CASE("dense assembly rejects oversized grids") {
    CHECK_THROWS_AS(assemble_Aa_matrix(WeightParams{0.3, 1.0}, make_grid(20 * M_PI, 4096)),
                    std::invalid_argument);
}
