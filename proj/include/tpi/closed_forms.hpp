#ifndef TPI_CLOSED_FORMS_HPP
#define TPI_CLOSED_FORMS_HPP

// Hand-derived closed-form outcome probabilities and Fisher informations for
// the standard protocol variants (frequency-entangled pair, mode-correlated
// shifts on a single arm, Gaussian spectrum).  These are the fast paths and
// the independent cross-checks for the symbolic pipeline in protocols.hpp.
//
// All formulas are written with pump = wp, spectral width sigma, delay
// delta; fixed shifts (eps, theta); noise strengths (eta_eps, eta_theta).

#include <cmath>

#include "tpi/model.hpp"

namespace tpi::closed {

// ---------------------------------------------------------------------------
// Fixed-shift probabilities (no averaging).
// ---------------------------------------------------------------------------

// Two photons on one beam splitter; theta drops out entirely.
inline OutcomeDistribution hom_entangled(double alpha, double sigma, double delta,
                                         double eps) {
    const double u = delta - eps;
    const double E = std::exp(-2.0 * sigma * sigma * u * u);
    OutcomeDistribution d;
    d.p1 = 0.25 * (1.0 + alpha * E);
    d.p2 = d.p1;
    d.pc = 0.5 * (1.0 - alpha * E);
    return d;
}

// Two photons into one MZ port (alpha-independent for mode-correlated shifts).
inline OutcomeDistribution mz2s_entangled(double wp, double sigma, double delta,
                                          double eps, double theta) {
    const double u = delta - eps;
    const double s2u2 = sigma * sigma * u * u;
    const double E2 = std::exp(-2.0 * s2u2);
    const double Eh = std::exp(-0.5 * s2u2);
    const double c2 = std::cos(2.0 * theta - wp * u);
    const double c1 = std::cos(theta - 0.5 * wp * u);
    OutcomeDistribution d;
    d.p1 = 0.125 * (2.0 + E2 + c2 - 4.0 * Eh * c1);
    d.p2 = 0.125 * (2.0 + E2 + c2 + 4.0 * Eh * c1);
    d.pc = 0.25 * (2.0 - c2 - E2);
    return d;
}

// Photons into different MZ ports.
inline OutcomeDistribution mz2d_entangled(double alpha, double wp, double sigma,
                                          double delta, double eps, double theta) {
    const double u = delta - eps;
    const double E = std::exp(-2.0 * sigma * sigma * u * u);
    const double c = std::cos(wp * (eps - delta) + 2.0 * theta);
    OutcomeDistribution d;
    d.p1 = 0.125 * (2.0 - (1.0 - alpha) * E - (1.0 + alpha) * c);
    d.p2 = d.p1;
    d.pc = 0.25 * (2.0 + (1.0 - alpha) * E + (1.0 + alpha) * c);
    return d;
}

// Single photon through the MZ.
inline OutcomeDistribution mz1(double wp, double sigma, double delta, double eps,
                               double theta) {
    const double u = delta - eps;
    const double Eh = std::exp(-0.5 * sigma * sigma * u * u);
    OutcomeDistribution d;
    d.p1 = 0.5 - 0.5 * Eh * std::cos(theta - 0.5 * wp * u);
    d.p2 = 1.0 - d.p1;
    d.pc = 0.0;
    return d;
}

// Two MZ1 runs against identical shifts, outcomes paired across runs.
inline OutcomeDistribution mz1x2(double wp, double sigma, double delta, double eps,
                                 double theta) {
    const OutcomeDistribution q = mz1(wp, sigma, delta, eps, theta);
    OutcomeDistribution d;
    d.p1 = q.p1 * q.p1;
    d.p2 = q.p2 * q.p2;
    d.pc = 2.0 * q.p1 * q.p2;
    return d;
}

// Independent-pair variants used by tests (same layouts, separable spectrum).
inline OutcomeDistribution hom_independent(double alpha, double sigma, double delta,
                                           double eps) {
    const double u = delta - eps;
    const double E = std::exp(-sigma * sigma * u * u);
    OutcomeDistribution d;
    d.p1 = 0.25 * (1.0 + alpha * E);
    d.p2 = d.p1;
    d.pc = 0.5 * (1.0 - alpha * E);
    return d;
}

// ---------------------------------------------------------------------------
// Gaussian-noise averaged probabilities (mode-correlated, single arm).
// ---------------------------------------------------------------------------

// Spectral decay factor surviving an eps average of exp(-2 sigma^2 (delta-eps)^2).
inline double g2(double sigma, double delta, double eta_eps) {
    const double q = 4.0 * eta_eps * eta_eps * sigma * sigma + 1.0;
    return std::exp(-2.0 * delta * delta * sigma * sigma / q) / std::sqrt(q);
}

inline OutcomeDistribution hom_entangled_noisy(double alpha, double sigma,
                                               double delta, double eta_eps) {
    const double G = g2(sigma, delta, eta_eps);
    OutcomeDistribution d;
    d.p1 = 0.25 * (1.0 + alpha * G);
    d.p2 = d.p1;
    d.pc = 0.5 * (1.0 - alpha * G);
    return d;
}

// Shared exponent of the single-fringe terms in MZ1 / MZ2s after averaging.
inline double kappa(double wp, double sigma, double delta, double eta_eps,
                    double eta_theta) {
    const double s2 = sigma * sigma;
    const double he = eta_eps * eta_eps;
    const double ht = eta_theta * eta_theta;
    return (4.0 * (s2 * (delta * delta + ht * he) + ht) + he * wp * wp) /
           (8.0 * (1.0 + he * s2));
}

inline OutcomeDistribution mz2s_entangled_noisy(double wp, double sigma, double delta,
                                                double eta_eps, double eta_theta) {
    const double s2 = sigma * sigma;
    const double he = eta_eps * eta_eps;
    const double ht = eta_theta * eta_theta;
    const double G = g2(sigma, delta, eta_eps);
    const double two_fringe =
        std::cos(delta * wp) * std::exp(-2.0 * ht - 0.5 * he * wp * wp);
    const double k = kappa(wp, sigma, delta, eta_eps, eta_theta);
    const double one_fringe = std::cos(delta * wp / (2.0 * he * s2 + 2.0)) *
                              std::exp(-k) / std::sqrt(he * s2 + 1.0);
    OutcomeDistribution d;
    d.p1 = 0.125 * (2.0 + G + two_fringe - 4.0 * one_fringe);
    d.p2 = 0.125 * (2.0 + G + two_fringe + 4.0 * one_fringe);
    d.pc = 0.25 * (2.0 - G - two_fringe);
    return d;
}

inline OutcomeDistribution mz2d_entangled_noisy(double alpha, double wp, double sigma,
                                                double delta, double eta_eps,
                                                double eta_theta) {
    const double G = g2(sigma, delta, eta_eps);
    const double he = eta_eps * eta_eps;
    const double ht = eta_theta * eta_theta;
    const double two_fringe =
        std::cos(delta * wp) * std::exp(-2.0 * ht - 0.5 * he * wp * wp);
    OutcomeDistribution d;
    d.p1 = 0.125 * (2.0 - (1.0 - alpha) * G - (1.0 + alpha) * two_fringe);
    d.p2 = d.p1;
    d.pc = 0.25 * (2.0 + (1.0 - alpha) * G + (1.0 + alpha) * two_fringe);
    return d;
}

inline OutcomeDistribution mz1_noisy(double wp, double sigma, double delta,
                                     double eta_eps, double eta_theta) {
    const double s2 = sigma * sigma;
    const double he = eta_eps * eta_eps;
    const double k = kappa(wp, sigma, delta, eta_eps, eta_theta);
    const double fringe = std::cos(delta * wp / (2.0 * he * s2 + 2.0)) *
                          std::exp(-k) / std::sqrt(he * s2 + 1.0);
    OutcomeDistribution d;
    d.p1 = 0.5 * (1.0 - fringe);
    d.p2 = 0.5 * (1.0 + fringe);
    d.pc = 0.0;
    return d;
}

// ---------------------------------------------------------------------------
// Analytic Fisher informations about delta (Gaussian noise, mode-correlated,
// single arm).
// ---------------------------------------------------------------------------

inline double hom_entangled_fisher(double alpha, double sigma, double delta,
                                   double eta_eps) {
    const double s2 = sigma * sigma;
    const double q = 4.0 * eta_eps * eta_eps * s2 + 1.0;
    const double num = 16.0 * alpha * alpha * delta * delta * s2 * s2;
    const double den =
        q * q * (q * std::exp(4.0 * delta * delta * s2 / q) - alpha * alpha);
    return num / den;
}

inline double mz1_fisher(double wp, double sigma, double delta, double eta_eps,
                         double eta_theta) {
    const double s2 = sigma * sigma;
    const double he = eta_eps * eta_eps;
    const double q = he * s2 + 1.0;
    const double phase = delta * wp / (2.0 * q);
    const double k = kappa(wp, sigma, delta, eta_eps, eta_theta);
    const double num_root =
        wp * std::sin(phase) + 2.0 * delta * s2 * std::cos(phase);
    const double den =
        4.0 * q * q * (q * std::exp(2.0 * k) - std::cos(phase) * std::cos(phase));
    return num_root * num_root / den;
}

} // namespace tpi::closed

#endif // TPI_CLOSED_FORMS_HPP
