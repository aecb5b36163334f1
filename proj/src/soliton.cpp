#include "wkdv/soliton.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wkdv {

void SolitonParams::validate() const {
    if (!(speed > 0)) {
        std::ostringstream os;
        os << "SolitonParams: speed must be positive, got " << speed;
        throw std::invalid_argument(os.str());
    }
}

namespace {

// e^{w y} sech^2(sqrt(c)/2 y), combined exponent w y - sqrt(c)|y| <= 0
// whenever |w| <= sqrt(c).
Scalar weighted_sech2(Scalar c, Scalar w, Scalar y) {
    const Scalar rc = std::sqrt(c);
    const Scalar e = std::exp(w * y - rc * std::abs(y));
    const Scalar d = 1 + std::exp(-rc * std::abs(y));
    return 4 * e / (d * d);
}

}  // namespace

Scalar weighted_psi_value(Scalar c, Scalar w, Scalar y) {
    return 1.5 * c * weighted_sech2(c, w, y);
}

Scalar weighted_dpsi_dy_value(Scalar c, Scalar w, Scalar y) {
    const Scalar z = 0.5 * std::sqrt(c) * y;
    return -1.5 * c * std::sqrt(c) * weighted_sech2(c, w, y) * std::tanh(z);
}

Scalar weighted_dpsi_dc_value(Scalar c, Scalar w, Scalar y) {
    const Scalar z = 0.5 * std::sqrt(c) * y;
    return 1.5 * weighted_sech2(c, w, y) * (1 - z * std::tanh(z));
}

Scalar psi_value(Scalar c, Scalar y) { return weighted_psi_value(c, 0, y); }
Scalar dpsi_dy_value(Scalar c, Scalar y) { return weighted_dpsi_dy_value(c, 0, y); }
Scalar dpsi_dc_value(Scalar c, Scalar y) { return weighted_dpsi_dc_value(c, 0, y); }

namespace {

template <typename Fn>
Field sample_centered(const Grid1D& grid, Scalar offset, Fn&& fn) {
    Field f = make_field(grid);
    const ArrayX& x = grid.points();
    for (int m = 0; m < grid.n_points(); ++m) f.values[m] = fn(x[m] - offset);
    return f;
}

}  // namespace

Field psi(const SolitonParams& p, const Grid1D& grid) {
    p.validate();
    return sample_centered(grid, p.offset, [&](Scalar y) { return psi_value(p.speed, y); });
}

Field dpsi_dy(const SolitonParams& p, const Grid1D& grid) {
    p.validate();
    return sample_centered(grid, p.offset,
                           [&](Scalar y) { return dpsi_dy_value(p.speed, y); });
}

Field dpsi_dc(const SolitonParams& p, const Grid1D& grid) {
    p.validate();
    return sample_centered(grid, p.offset,
                           [&](Scalar y) { return dpsi_dc_value(p.speed, y); });
}

Field weighted_psi(Scalar c, Scalar w, const Grid1D& grid) {
    return sample_centered(grid, 0, [&](Scalar y) { return weighted_psi_value(c, w, y); });
}

Field weighted_dpsi_dy(Scalar c, Scalar w, const Grid1D& grid) {
    return sample_centered(grid, 0,
                           [&](Scalar y) { return weighted_dpsi_dy_value(c, w, y); });
}

Field weighted_dpsi_dc(Scalar c, Scalar w, const Grid1D& grid) {
    return sample_centered(grid, 0,
                           [&](Scalar y) { return weighted_dpsi_dc_value(c, w, y); });
}

Scalar traveling_wave_residual(const Field& u, Scalar c) {
    Field du = spectral_derivative(u, 1);
    Field d3u = spectral_derivative(u, 3);
    Field u2{u.grid, u.values * u.values};
    Field du2 = spectral_derivative(u2, 1);
    Field res{u.grid, -c * du.values + d3u.values + du2.values};
    return l2_norm(res);
}

Scalar soliton_residual(const SolitonParams& p, const Grid1D& grid) {
    return traveling_wave_residual(psi(p, grid), p.speed);
}

}  // namespace wkdv
