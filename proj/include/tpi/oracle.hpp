#ifndef TPI_ORACLE_HPP
#define TPI_ORACLE_HPP

// Brute-force numerical reference path: outcome probabilities computed by
// direct complex mode propagation and nested numerical quadrature over the
// optical frequencies and the noise variables.  Entirely independent of the
// symbolic Gaussian-term pipeline; used for validation and for generating
// reference values.  Performance is explicitly not a goal.
//
// Structure: Gaussian-weighted dimensions (frequencies, eps shifts, and
// theta shifts with the Gaussian distribution) use Gauss-Hermite tensor
// rules with a common order that escalates 8 -> 512 until two successive
// orders agree (the spectral dimension is separately floored by an
// oscillation budget in delta); bounded theta dimensions (wrapped Gaussian /
// von Mises) use a fixed uniform-node rule whose weights fold in the
// density's numerically computed Fourier moments — exact because each theta
// enters the interferometer phases an integer number of times, making every
// probability a low-degree trigonometric polynomial per theta variable.  For
// mode-uncorrelated placement the two rails carry independent shifts and
// every detection probability splits into products of per-rail noise
// averages, which this path exploits (exactly — no approximation) to keep
// the tensor dimension tractable; mode-correlated averages use plain nested
// tensors.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>


#include "tpi/circular.hpp"
#include "tpi/errors.hpp"
#include "tpi/model.hpp"
#include "tpi/quadrature.hpp"

namespace tpi::oracle {

struct OracleResult {
    OutcomeDistribution value;
    OutcomeDistribution error; // per-outcome absolute error estimate
};

namespace detail {

using C = std::complex<double>;
using V4 = std::array<C, 4>; // rail amplitudes (c arm1, c arm2, d arm1, d arm2)

inline constexpr C I{0.0, 1.0};
inline const double RT = 1.0 / std::numbers::sqrt2;

// ---------------------------------------------------------------------------
// Mode propagation at fixed numeric shifts
// ---------------------------------------------------------------------------

struct ShiftSet {
    double eps[2][2]{};   // [rail: c=0, d=1][arm]
    double theta[2][2]{};
};

// Detector-mode amplitudes (e1, e2, f1, f2) of one photon entering with rail
// amplitudes `in` at frequency nu.
inline V4 propagate(const V4& in, double nu, double delta, const ShiftSet& s) {
    auto phase = [&](int rail, int arm) {
        const double delay = arm == 1 ? delta : 0.0;
        return std::exp(
            C(0.0, -nu * (delay + s.eps[rail][arm]) - s.theta[rail][arm]));
    };
    const V4 mid{in[0] * phase(0, 0), in[1] * phase(0, 1), in[2] * phase(1, 0),
                 in[3] * phase(1, 1)};
    return {(I * mid[0] + mid[1]) * RT, (mid[0] + I * mid[1]) * RT,
            (I * mid[2] + mid[3]) * RT, (mid[2] + I * mid[3]) * RT};
}

struct Ports {
    V4 plain, keep, flip;
    double w_keep, w_flip;
};

inline Ports make_ports(ProtocolKind kind, double alpha) {
    const V4 a1{I * RT, C{RT, 0.0}, C{}, C{}};
    const V4 a2{C{RT, 0.0}, I * RT, C{}, C{}};
    const V4 b1{C{}, C{}, I * RT, C{RT, 0.0}};
    const V4 b2{C{}, C{}, C{RT, 0.0}, I * RT};
    const V4 c1{C{1.0, 0.0}, C{}, C{}, C{}};
    const V4 c2{C{}, C{1.0, 0.0}, C{}, C{}};
    const V4 d2{C{}, C{}, C{}, C{1.0, 0.0}};
    const double norm2 = kind == ProtocolKind::MZ2s ? 1.0 / (1.0 + alpha) : 1.0;
    Ports p;
    p.w_keep = std::sqrt(alpha * norm2);
    p.w_flip = std::sqrt((1.0 - alpha) * norm2);
    switch (kind) {
        case ProtocolKind::HOM: p.plain = c1; p.keep = c2; p.flip = d2; break;
        case ProtocolKind::MZ2s: p.plain = a1; p.keep = a1; p.flip = b1; break;
        case ProtocolKind::MZ2d: p.plain = a1; p.keep = a2; p.flip = b2; break;
        default: throw error("make_ports: not a two-photon layout");
    }
    return p;
}

inline double sq(const C& z) { return std::norm(z); }

// ---------------------------------------------------------------------------
// Fixed-shift probabilities by frequency quadrature
// ---------------------------------------------------------------------------

inline OutcomeDistribution fixed_entangled(const Ports& pv, const ShiftSet& s,
                                           double delta, double pump,
                                           const quad::Rule& r) {
    OutcomeDistribution d;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double w = r.x[k];
        const double wb = pump - w;
        const V4 P = propagate(pv.plain, wb, delta, s);
        const V4 K = propagate(pv.keep, w, delta, s);
        const V4 F = propagate(pv.flip, w, delta, s);
        const V4 Pm = propagate(pv.plain, w, delta, s);
        const V4 Km = propagate(pv.keep, wb, delta, s);
        auto ee = [&](int i, int j) { return pv.w_keep * P[i] * K[j]; };
        auto eem = [&](int i, int j) { return pv.w_keep * Pm[i] * Km[j]; };
        auto ef = [&](int i, int j) { return pv.w_flip * P[i] * F[2 + j]; };
        d.p1 += r.w[k] * (sq(ef(0, 0)) + 0.5 * sq(ee(0, 0) + eem(0, 0)));
        d.p2 += r.w[k] * (sq(ef(1, 1)) + 0.5 * sq(ee(1, 1) + eem(1, 1)));
        d.pc += r.w[k] *
                (sq(ef(0, 1)) + sq(ef(1, 0)) + sq(ee(0, 1) + eem(1, 0)));
    }
    return d;
}

inline OutcomeDistribution fixed_independent(const Ports& pv, const ShiftSet& s,
                                             double delta, const quad::Rule& r) {
    const std::size_t n = r.size();
    std::vector<V4> P(n), K(n), F(n);
    for (std::size_t k = 0; k < n; ++k) {
        P[k] = propagate(pv.plain, r.x[k], delta, s);
        K[k] = propagate(pv.keep, r.x[k], delta, s);
        F[k] = propagate(pv.flip, r.x[k], delta, s);
    }
    OutcomeDistribution d;
    for (std::size_t k1 = 0; k1 < n; ++k1)
        for (std::size_t k2 = 0; k2 < n; ++k2) {
            const double w = r.w[k1] * r.w[k2];
            auto ee = [&](std::size_t a, std::size_t b, int i, int j) {
                return pv.w_keep * P[b][i] * K[a][j];
            };
            auto ef = [&](std::size_t a, std::size_t b, int i, int j) {
                return pv.w_flip * P[b][i] * F[a][2 + j];
            };
            d.p1 += w * (sq(ef(k1, k2, 0, 0)) +
                         0.5 * sq(ee(k1, k2, 0, 0) + ee(k2, k1, 0, 0)));
            d.p2 += w * (sq(ef(k1, k2, 1, 1)) +
                         0.5 * sq(ee(k1, k2, 1, 1) + ee(k2, k1, 1, 1)));
            d.pc += w * (sq(ef(k2, k1, 0, 1)) + sq(ef(k1, k2, 1, 0)) +
                         sq(ee(k2, k1, 0, 1) + ee(k1, k2, 1, 0)));
        }
    return d;
}

// Single photon into the first splitter port: (p1, p2).
inline std::pair<double, double> single_run(const ShiftSet& s, double delta,
                                            const quad::Rule& r) {
    const V4 a1{I * RT, C{RT, 0.0}, C{}, C{}};
    double p1 = 0.0, p2 = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const V4 out = propagate(a1, r.x[k], delta, s);
        p1 += r.w[k] * sq(out[0]);
        p2 += r.w[k] * sq(out[1]);
    }
    return {p1, p2};
}

inline OutcomeDistribution fixed_single(ProtocolKind kind, const ShiftSet& s,
                                        double delta, const quad::Rule& r) {
    const auto [q1, q2] = single_run(s, delta, r);
    if (kind == ProtocolKind::MZ1) return {q1, q2, 0.0};
    return {q1 * q1, q2 * q2, 2.0 * q1 * q2};
}

// ---------------------------------------------------------------------------
// Noise dimensions
// ---------------------------------------------------------------------------

struct NoiseDim {
    int rail;      // -1 = both rails (shared shift), else 0 (c) or 1 (d)
    int arm;       // 0 or 1
    bool is_theta; // eps otherwise
    double eta;    // effective strength for this dimension
};

inline void apply_dim(ShiftSet& s, const NoiseDim& d, double v) {
    if (d.is_theta) {
        if (d.rail < 0) s.theta[0][d.arm] = s.theta[1][d.arm] = v;
        else s.theta[d.rail][d.arm] = v;
    } else {
        if (d.rail < 0) s.eps[0][d.arm] = s.eps[1][d.arm] = v;
        else s.eps[d.rail][d.arm] = v;
    }
}

// Active noise dimensions (zero-strength shifts are exact delta functions
// and are skipped).  Bounded theta dimensions are listed first so they form
// the outer adaptive layers.
inline std::vector<NoiseDim> make_noise_dims(const ProtocolSpec& spec,
                                             const NoiseSpec& noise) {
    const bool two_photon = spec.kind == ProtocolKind::HOM ||
                            spec.kind == ProtocolKind::MZ2s ||
                            spec.kind == ProtocolKind::MZ2d;
    const bool mu = two_photon &&
                    spec.placement == NoisePlacement::ModeUncorrelated;
    const bool both = spec.arms.both_arms;
    const double f_e = both ? spec.arms.f_eps : 1.0;
    const double f_t = both ? spec.arms.f_theta : 1.0;
    std::vector<NoiseDim> dims;
    auto add_pair = [&](int rail, int arm, double fe, double ft) {
        const double ee = noise.eta_eps * std::sqrt(fe);
        const double et = noise.eta_theta * std::sqrt(ft);
        if (ee > 0.0) dims.push_back({rail, arm, false, ee});
        if (et > 0.0) dims.push_back({rail, arm, true, et});
    };
    if (mu) {
        add_pair(0, 0, f_e, f_t);
        add_pair(1, 0, f_e, f_t);
        if (both) {
            add_pair(0, 1, 1.0 - f_e, 1.0 - f_t);
            add_pair(1, 1, 1.0 - f_e, 1.0 - f_t);
        }
    } else {
        add_pair(-1, 0, f_e, f_t);
        if (both) add_pair(-1, 1, 1.0 - f_e, 1.0 - f_t);
    }
    const bool gaussian_theta = noise.theta_dist == ThetaDistribution::Gaussian;
    std::stable_partition(dims.begin(), dims.end(), [&](const NoiseDim& d) {
        return d.is_theta && !gaussian_theta; // bounded dims first
    });
    return dims;
}

inline bool is_bounded(const NoiseDim& d, const NoiseSpec& noise) {
    return d.is_theta && noise.theta_dist != ThetaDistribution::Gaussian;
}

inline double theta_weight(const NoiseSpec& noise, double eta, double th) {
    return noise.theta_dist == ThetaDistribution::VonMises
               ? circ::von_mises_weight(th, eta)
               : circ::wrapped_gaussian_weight(th, eta);
}

// Fixed rule for one bounded (circular) theta dimension.  Every theta shift
// enters the interferometer phases an integer number of times with unit
// coefficient, so each outcome probability is a trigonometric polynomial of
// low degree in that variable; twelve uniform nodes integrate such
// polynomials exactly once the node weights fold in the circular density's
// Fourier moments.  The moments themselves come from a fine midpoint pass
// over the density, which keeps this rule a pointwise consumer of the actual
// distribution.
inline quad::Rule bounded_rule(const NoiseSpec& noise, double eta) {
    constexpr std::size_t N = 12;    // exact for harmonics up to 5
    constexpr std::size_t J = N / 2 - 1;
    const std::size_t fine = static_cast<std::size_t>(
        std::clamp(16.0 / std::max(eta, 1e-12), 4096.0, 262144.0));
    const double fstep = 2.0 * std::numbers::pi / static_cast<double>(fine);
    std::array<double, J + 1> m{}; // cosine moments (both densities are even)
    for (std::size_t l = 0; l < fine; ++l) {
        const double th =
            -std::numbers::pi + (static_cast<double>(l) + 0.5) * fstep;
        const double wd = theta_weight(noise, eta, th) * fstep;
        for (std::size_t j = 0; j <= J; ++j)
            m[j] += wd * std::cos(static_cast<double>(j) * th);
    }
    quad::Rule r;
    r.x.resize(N);
    r.w.resize(N);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(N);
    for (std::size_t l = 0; l < N; ++l) {
        const double th =
            -std::numbers::pi + (static_cast<double>(l) + 0.5) * step;
        double wl = m[0];
        for (std::size_t j = 1; j <= J; ++j)
            wl += 2.0 * m[j] * std::cos(static_cast<double>(j) * th);
        r.x[l] = th;
        r.w[l] = wl / static_cast<double>(N);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Mode-correlated path: nested tensor over the shared noise dimensions
// ---------------------------------------------------------------------------

struct McCtx {
    const std::vector<NoiseDim>* dims;
    const std::vector<quad::Rule>* rules; // one rule per dim, same order
};

// Recursion over noise dimensions with a prebuilt rule per dimension.
template <class Leaf>
OutcomeDistribution mc_recurse(const McCtx& c, const Leaf& leaf, std::size_t di,
                               ShiftSet s) {
    if (di == c.dims->size()) return leaf(s);
    const NoiseDim& dim = (*c.dims)[di];
    const quad::Rule& rule = (*c.rules)[di];
    OutcomeDistribution acc;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        ShiftSet sv = s;
        apply_dim(sv, dim, rule.x[k]);
        const OutcomeDistribution inner = mc_recurse(c, leaf, di + 1, sv);
        acc.p1 += rule.w[k] * inner.p1;
        acc.p2 += rule.w[k] * inner.p2;
        acc.pc += rule.w[k] * inner.pc;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Mode-uncorrelated path: per-rail noise averages (exact factorization)
// ---------------------------------------------------------------------------

// Average a vector-valued function of one rail's shifts over that rail's
// noise dimensions, using one prebuilt rule per dimension.
template <std::size_t K, class F>
std::array<double, K> rail_avg(const std::vector<NoiseDim>& dims,
                               const std::vector<quad::Rule>& rules,
                               std::size_t di, ShiftSet s, const F& f) {
    if (di == dims.size()) return f(s);
    const quad::Rule& rule = rules[di];
    std::array<double, K> acc{};
    for (std::size_t k = 0; k < rule.size(); ++k) {
        ShiftSet sv = s;
        apply_dim(sv, dims[di], rule.x[k]);
        const std::array<double, K> inner =
            rail_avg<K>(dims, rules, di + 1, sv, f);
        for (std::size_t c = 0; c < K; ++c) acc[c] += rule.w[k] * inner[c];
    }
    return acc;
}

struct MuCtx {
    Ports ports;
    double pump;
    double delta;
    std::vector<NoiseDim> rail_c;             // dims with rail == 0
    std::vector<NoiseDim> rail_d;             // dims with rail == 1
    std::vector<quad::Rule> rules_c, rules_d; // matching rules
};

inline OutcomeDistribution mu_compute_entangled(MuCtx& c, const quad::Rule& r) {
    const double wk2 = c.ports.w_keep * c.ports.w_keep;
    const double wf2 = c.ports.w_flip * c.ports.w_flip;
    OutcomeDistribution d;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double w = r.x[k];
        const double wb = c.pump - w;
        // c-rail blocks: plain/keep amplitudes and exchange combinations
        auto cblocks = [&](const ShiftSet& s) -> std::array<double, 5> {
            const V4 P = propagate(c.ports.plain, wb, c.delta, s);
            const V4 K = propagate(c.ports.keep, w, c.delta, s);
            const V4 Pm = propagate(c.ports.plain, w, c.delta, s);
            const V4 Km = propagate(c.ports.keep, wb, c.delta, s);
            return {sq(P[0]), sq(P[1]), sq(P[0] * K[0] + Pm[0] * Km[0]),
                    sq(P[1] * K[1] + Pm[1] * Km[1]),
                    sq(P[0] * K[1] + Pm[1] * Km[0])};
        };
        auto dblocks = [&](const ShiftSet& s) -> std::array<double, 2> {
            const V4 F = propagate(c.ports.flip, w, c.delta, s);
            return {sq(F[2]), sq(F[3])};
        };
        ShiftSet zero{};
        const std::array<double, 5> E1 =
            rail_avg<5>(c.rail_c, c.rules_c, 0, zero, cblocks);
        const std::array<double, 2> E2 =
            rail_avg<2>(c.rail_d, c.rules_d, 0, zero, dblocks);
        d.p1 += r.w[k] * (wf2 * E1[0] * E2[0] + 0.5 * wk2 * E1[2]);
        d.p2 += r.w[k] * (wf2 * E1[1] * E2[1] + 0.5 * wk2 * E1[3]);
        d.pc += r.w[k] * (wf2 * (E1[0] * E2[1] + E1[1] * E2[0]) + wk2 * E1[4]);
    }
    return d;
}

inline OutcomeDistribution mu_compute_independent(MuCtx& c, const quad::Rule& r) {
    const double wk2 = c.ports.w_keep * c.ports.w_keep;
    const double wf2 = c.ports.w_flip * c.ports.w_flip;
    const std::size_t n = r.size();
    ShiftSet zero{};

    // Per-node single-photon averages: A[i][k] = E1[|plain(w_k)[e_i]|^2],
    // B[j][k] = E2[|flip(w_k)[f_j]|^2].
    std::vector<std::array<double, 2>> A(n), B(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = r.x[k];
        A[k] = rail_avg<2>(
            c.rail_c, c.rules_c, 0, zero,
            [&](const ShiftSet& s) -> std::array<double, 2> {
                const V4 P = propagate(c.ports.plain, w, c.delta, s);
                return {sq(P[0]), sq(P[1])};
            });
        B[k] = rail_avg<2>(
            c.rail_d, c.rules_d, 0, zero,
            [&](const ShiftSet& s) -> std::array<double, 2> {
                const V4 F = propagate(c.ports.flip, w, c.delta, s);
                return {sq(F[2]), sq(F[3])};
            });
    }
    double sa0 = 0.0, sa1 = 0.0, sb0 = 0.0, sb1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sa0 += r.w[k] * A[k][0];
        sa1 += r.w[k] * A[k][1];
        sb0 += r.w[k] * B[k][0];
        sb1 += r.w[k] * B[k][1];
    }

    OutcomeDistribution d;
    d.p1 = wf2 * sa0 * sb0;
    d.p2 = wf2 * sa1 * sb1;
    d.pc = wf2 * (sa0 * sb1 + sa1 * sb0);

    // Exchange and cross blocks over unordered frequency pairs (all on the
    // interfering rail).  Components: |x0|^2, |x1|^2 (swap symmetric) and the
    // two orientations of the cross term.
    for (std::size_t k1 = 0; k1 < n; ++k1)
        for (std::size_t k2 = k1; k2 < n; ++k2) {
            const double wa = r.x[k1];
            const double wbf = r.x[k2];
            auto blocks = [&](const ShiftSet& s) -> std::array<double, 4> {
                const V4 P1 = propagate(c.ports.plain, wa, c.delta, s);
                const V4 P2 = propagate(c.ports.plain, wbf, c.delta, s);
                const V4 K1 = propagate(c.ports.keep, wa, c.delta, s);
                const V4 K2 = propagate(c.ports.keep, wbf, c.delta, s);
                return {sq(P2[0] * K1[0] + P1[0] * K2[0]),
                        sq(P2[1] * K1[1] + P1[1] * K2[1]),
                        sq(P1[0] * K2[1] + P2[1] * K1[0]),
                        sq(P2[0] * K1[1] + P1[1] * K2[0])};
            };
            const std::array<double, 4> E1 =
                rail_avg<4>(c.rail_c, c.rules_c, 0, zero, blocks);
            const double w = r.w[k1] * r.w[k2] * (k1 == k2 ? 1.0 : 2.0);
            d.p1 += w * 0.5 * wk2 * E1[0];
            d.p2 += w * 0.5 * wk2 * E1[1];
            // both cross orientations appear once per ordered pair
            const double wo = r.w[k1] * r.w[k2];
            if (k1 == k2) {
                d.pc += wo * wk2 * E1[2];
            } else {
                d.pc += wo * wk2 * (E1[2] + E1[3]);
            }
        }
    return d;
}

} // namespace detail

// Total integral dimension (frequency dims + active noise dims) of the
// brute-force formulation; must be <= 6 for oracle_distribution.
inline std::size_t oracle_dimension(const ProtocolSpec& spec,
                                    const SpectralModel& model,
                                    const NoiseSpec& noise) {
    const bool two_photon = spec.kind == ProtocolKind::HOM ||
                            spec.kind == ProtocolKind::MZ2s ||
                            spec.kind == ProtocolKind::MZ2d;
    std::size_t n_omega;
    if (two_photon)
        n_omega = model.correlation == PhotonCorrelation::Independent ? 2 : 1;
    else
        n_omega = spec.kind == ProtocolKind::MZ1 ? 1 : 2;
    return n_omega + detail::make_noise_dims(spec, noise).size();
}

inline OracleResult oracle_distribution(const ProtocolSpec& spec,
                                        const SpectralModel& model,
                                        const NoiseSpec& noise, double delta,
                                        const quad::QuadSpec& qs = {}) {
    spec.validate();
    model.validate();
    noise.validate();
    const std::size_t dim = oracle_dimension(spec, model, noise);
    if (dim > 6)
        throw DimensionTooHigh("oracle integral dimension " +
                               std::to_string(dim) + " exceeds 6");

    const bool two_photon = spec.kind == ProtocolKind::HOM ||
                            spec.kind == ProtocolKind::MZ2s ||
                            spec.kind == ProtocolKind::MZ2d;
    const bool mu = two_photon &&
                    spec.placement == NoisePlacement::ModeUncorrelated;
    const std::vector<detail::NoiseDim> dims = detail::make_noise_dims(spec, noise);

    detail::Ports ports{};
    if (two_photon) ports = detail::make_ports(spec.kind, spec.visibility);

    // Bounded-dimension rules are escalation-independent (exact for the
    // trigonometric-polynomial theta dependence), so they are built once.
    std::vector<quad::Rule> bounded(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (detail::is_bounded(dims[i], noise))
            bounded[i] = detail::bounded_rule(noise, dims[i].eta);

    auto compute = [&](std::size_t n) -> OutcomeDistribution {
        // The spectral dimension needs nodes in proportion to the phase span
        // sigma * (|delta| + mode-shift spread) of its oscillatory factor,
        // independent of how many nodes the (usually much smoother) noise
        // dimensions want, so it is floored separately instead of sharing
        // the escalating order.
        const std::size_t spectral = std::max<std::size_t>(
            n, 24 + static_cast<std::size_t>(
                        24.0 * model.sigma *
                        (std::abs(delta) + 4.0 * noise.eta_eps)));
        const quad::Rule wrule = quad::normal_rule(spectral, model.pump / 2.0,
                                                   model.sigma);
        std::vector<quad::Rule> rules(dims.size());
        for (std::size_t i = 0; i < dims.size(); ++i)
            rules[i] = detail::is_bounded(dims[i], noise)
                           ? bounded[i]
                           : quad::normal_rule(static_cast<int>(n), 0.0,
                                               dims[i].eta);
        if (mu) {
            detail::MuCtx c{ports, model.pump, delta, {}, {}, {}, {}};
            for (std::size_t i = 0; i < dims.size(); ++i) {
                (dims[i].rail == 0 ? c.rail_c : c.rail_d).push_back(dims[i]);
                (dims[i].rail == 0 ? c.rules_c : c.rules_d)
                    .push_back(rules[i]);
            }
            return model.correlation == PhotonCorrelation::Independent
                       ? detail::mu_compute_independent(c, wrule)
                       : detail::mu_compute_entangled(c, wrule);
        }
        detail::McCtx c{&dims, &rules};
        auto leaf = [&](const detail::ShiftSet& s) -> OutcomeDistribution {
            if (!two_photon)
                return detail::fixed_single(spec.kind, s, delta, wrule);
            return model.correlation == PhotonCorrelation::Independent
                       ? detail::fixed_independent(ports, s, delta, wrule)
                       : detail::fixed_entangled(ports, s, delta, model.pump,
                                                 wrule);
        };
        detail::ShiftSet zero{};
        return detail::mc_recurse(c, leaf, 0, zero);
    };

    // Gauss-Hermite orders escalate gently: successive sizes use distinct
    // node sets, so agreement between two passes is a genuine two-estimate
    // convergence check without the cost of doubling every rung.
    static constexpr std::array<std::size_t, 17> kOrders{
        8,  10,  13,  17,  22,  29,  38,  49, 64,
        84, 110, 143, 186, 242, 315, 410, 512};
    OutcomeDistribution prev = compute(kOrders[0]);
    for (std::size_t oi = 1; oi < kOrders.size(); ++oi) {
        OutcomeDistribution cur = compute(kOrders[oi]);
        const std::array<double, 3> diff{std::abs(cur.p1 - prev.p1),
                                         std::abs(cur.p2 - prev.p2),
                                         std::abs(cur.pc - prev.pc)};
        const std::array<double, 3> mag{std::abs(cur.p1), std::abs(cur.p2),
                                        std::abs(cur.pc)};
        bool ok = true;
        for (std::size_t i = 0; i < 3; ++i)
            ok = ok && diff[i] <= std::max(qs.abs_tol * 100.0,
                                           qs.rel_tol * std::max(mag[i], 1e-12));
        if (ok) {
            OracleResult out;
            out.value = cur;
            out.error = {diff[0], diff[1], diff[2]};
            return out;
        }
        prev = cur;
    }
    throw ToleranceNotMet(
        "Gauss-Hermite order escalation reached 512 without convergence");
}

} // namespace tpi::oracle

#endif // TPI_ORACLE_HPP
