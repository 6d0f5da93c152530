#ifndef TPI_CIRCULAR_HPP
#define TPI_CIRCULAR_HPP

// Circular (periodic) probability weights on [-pi, pi]: the von Mises
// density with overflow-safe normalization, and the wrapped Gaussian as a
// truncated image sum.  Shared by the analytic noise paths, the quadrature
// oracle, and the Monte Carlo sampler.

#include <cmath>
#include <numbers>

namespace tpi::circ {

// log( I0(x) * exp(-x) ) for x >= 0, accurate over the full range.  The
// direct Bessel value overflows near x ~ 710, so the large-x branch uses the
// standard asymptotic series I0(x) ~ e^x / sqrt(2 pi x) * (1 + 1/(8x) + ...).
inline double log_bessel_i0_scaled(double x) {
    if (x < 30.0) {
        return std::log(std::cyl_bessel_i(0.0, x)) - x;
    }
    const double u = 1.0 / (8.0 * x);
    // (2k-1)!!^2 / k! * u^k
    const double series =
        u * (1.0 + u * (4.5 + u * (37.5 + u * (459.375 + u * 7441.875))));
    return -0.5 * std::log(2.0 * std::numbers::pi * x) + std::log1p(series);
}

// von Mises density with concentration 1/eta^2 on [-pi, pi]:
//   J(theta) = exp(cos(theta)/eta^2) / (2 pi I0(1/eta^2)).
// Computed in log space so that tiny eta (huge concentration) stays finite.
inline double von_mises_weight(double theta, double eta) {
    const double kappa = 1.0 / (eta * eta);
    // cos(theta) - 1 written as -2 sin^2(theta/2): the direct difference
    // loses all precision once kappa exceeds ~1e10.
    const double s = std::sin(0.5 * theta);
    const double log_w = -2.0 * kappa * s * s - log_bessel_i0_scaled(kappa) -
                         std::log(2.0 * std::numbers::pi);
    return std::exp(log_w);
}

// Wrapped Gaussian density on [-pi, pi]: sum over integer images of the
// N(0, eta^2) density.  Images are added (symmetrically) until the next
// image's largest value on the interval drops below 1e-16; at least
// ceil(6 eta / 2 pi) + 2 images each side are always included.
inline double wrapped_gaussian_weight(double theta, double eta) {
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * eta);
    auto gauss = [&](double x) { return norm * std::exp(-x * x / (2.0 * eta * eta)); };
    double sum = gauss(theta);
    const int k_floor =
        static_cast<int>(std::ceil(6.0 * eta / (2.0 * std::numbers::pi))) + 2;
    for (int k = 1;; ++k) {
        const double edge = 2.0 * std::numbers::pi * k - std::numbers::pi;
        sum += gauss(theta + 2.0 * std::numbers::pi * k) +
               gauss(theta - 2.0 * std::numbers::pi * k);
        if (k >= k_floor && gauss(edge) < 1e-16) break;
    }
    return sum;
}

} // namespace tpi::circ

#endif // TPI_CIRCULAR_HPP
