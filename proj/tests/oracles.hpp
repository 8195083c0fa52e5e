#pragma once

// Reference computations written independently of the library code paths
// they check.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

/// Power transmission by impedance translation from the outlet back to the
/// inlet: the load seen at the inlet gives the reflection coefficient and,
/// for a lossless chain, tau = 1 - |R|^2.
inline double impedance_transmission(std::span<const double> radii, double layer_length, double tube_radius,
                                     double frequency, double c, double rho) {
    using cd = std::complex<double>;
    const double pi = std::numbers::pi;
    const double z0 = rho * c / (pi * tube_radius * tube_radius);
    const double kl = 2.0 * pi * frequency / c * layer_length;
    cd load{z0, 0.0};
    for (std::size_t i = radii.size(); i-- > 0;) {
        const double zc = rho * c / (pi * radii[i] * radii[i]);
        const cd j{0.0, 1.0};
        load = zc * (load * std::cos(kl) + j * zc * std::sin(kl)) / (zc * std::cos(kl) + j * load * std::sin(kl));
    }
    const cd r = (load - z0) / (load + z0);
    return 1.0 - std::norm(r);
}

/// Single constriction of area ratio m, one quarter wavelength long.
inline double quarter_wave_transmission(double tube_radius, double radius) {
    const double m = (tube_radius / radius) * (tube_radius / radius);
    return 4.0 / ((m + 1.0 / m) * (m + 1.0 / m));
}

inline double gaussian(double z, double mu, double sigma) {
    const double u = (z - mu) / sigma;
    return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Direct sum_i pi_i prod_d N(z_d; mu_id, sigma_id) with no log-space tricks.
inline double naive_mixture(std::span<const double> weights, std::span<const double> means,
                            std::span<const double> devs, std::size_t d, std::span<const double> z) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double prod = weights[i];
        for (std::size_t k = 0; k < d; ++k) prod *= gaussian(z[k], means[i * d + k], devs[i * d + k]);
        total += prod;
    }
    return total;
}

/// Central difference of f with respect to x[k], restoring x[k] afterwards.
inline double central_difference(const std::function<double()>& f, double& x, double h = 1e-5) {
    const double saved = x;
    x = saved + h;
    const double up = f();
    x = saved - h;
    const double down = f();
    x = saved;
    return (up - down) / (2.0 * h);
}

/// Relative agreement with an absolute floor for near-zero gradients.
inline bool gradients_agree(double analytic, double numeric, double rel = 1e-4, double abs_floor = 1e-6) {
    return std::abs(analytic - numeric) <= rel * std::max(std::abs(analytic), std::abs(numeric)) + abs_floor;
}

}  // namespace oracle
