#pragma once
// Delay metrology on top of the noise-averaged outcome model: classical
// Fisher information of the three-outcome statistics, Cramer-Rao bounds,
// peak-information search over a delay window, half-information noise
// thresholds, and noise-regime protocol classification.
//
// Fisher information uses the kernel's analytic delta-derivatives.  Outcomes
// whose probability vanishes need care: every probability here is smooth and
// nonnegative, so P -> 0 happens only at (or numerically near) a touching
// minimum, where the ratio (dP)^2 / P has the removable limit 2 * d2P.  We
// use that analytic limit whenever P is below measurement precision and the
// slope is negligible; it extends F continuously and reproduces the central
// interference peaks exactly.  A probability below threshold with a
// non-negligible slope cannot be classified (genuine zero crossings are
// impossible for probabilities); such points fall back to averaging the
// ratio evaluated a tiny step to either side.
//
// Near a touching minimum the probability is itself the small difference of
// O(1) exponential terms, so its absolute rounding floor is set by the SUM of
// term magnitudes, not by P.  In the band where P is positive but below that
// floor times a safety factor, the raw ratio (dP)^2 / P carries relative
// noise up to (term magnitude * eps) / P -- large enough to fake information
// spikes of order 1e-4 that a peak search would then report.  Points in the
// band that are consistent with a quadratic touching minimum ((dP)^2 = 2 P
// d2P with d2P > 0) therefore use the rounding-clean limit form 2 * d2P,
// which equals the ratio there up to O(P) corrections.  Inconsistent points
// (quartic minima, minima offset from zero) keep the ratio: in those cases
// the ratio's value and hence its absolute noise are both negligible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tpi/errors.hpp"
#include "tpi/model.hpp"
#include "tpi/noise.hpp"

namespace tpi::metro {

// ---------------------------------------------------------------------------
// Fisher information of the outcome triple with respect to the delay.

class FisherModel {
  public:
    FisherModel(const ProtocolSpec& spec, const SpectralModel& model,
                const NoiseSpec& ns)
        : kernel_(spec, model, ns) {}

    explicit FisherModel(noise::NoiseKernel kernel)
        : kernel_(std::move(kernel)) {}

    double operator()(double delta) const {
        const OutcomeDistribution p = kernel_.distribution(delta);
        const OutcomeDistribution d = kernel_.derivative(delta);
        std::optional<OutcomeDistribution> dd;
        const auto curvature = [&](int m) {
            if (!dd) dd = kernel_.second_derivative(delta);
            return pick(*dd, m);
        };
        double f = 0.0;
        for (int m = 0; m < 3; ++m) {
            const double pm = pick(p, m);
            const double dm = pick(d, m);
            if (pm >= kProbFloor && pm >= kTrustRel * magnitude(m, delta)) {
                f += dm * dm / pm;
            } else if (pm >= kProbFloor) {
                // Cancellation band: pm is far below the rounding floor of
                // its own term sum.  Use the quadratic-minimum limit when the
                // local jet is consistent with one; otherwise the ratio is
                // tiny and safe to keep (see header comment).
                const double ddm = curvature(m);
                const double scale =
                    std::max(dm * dm, std::abs(2.0 * pm * ddm));
                if (ddm > 0.0 &&
                    std::abs(dm * dm - 2.0 * pm * ddm) <= 0.05 * scale)
                    f += 2.0 * ddm;
                else
                    f += dm * dm / pm;
            } else if (std::abs(dm) < kSlopeFloor) {
                // Removable 0/0: limit of (dP)^2 / P at a touching minimum.
                f += std::max(0.0, 2.0 * curvature(m));
            } else {
                f += 0.5 * (side_ratio(m, delta + kSideStep) +
                            side_ratio(m, delta - kSideStep));
            }
        }
        return f;
    }

    const noise::NoiseKernel& kernel() const { return kernel_; }

  private:
    static constexpr double kProbFloor = 1e-15;
    static constexpr double kSlopeFloor = 1e-12;
    static constexpr double kSideStep = 1e-9;
    static constexpr double kTrustRel = 1e-8;

    static double pick(const OutcomeDistribution& v, int m) {
        return m == 0 ? v.p1 : (m == 1 ? v.p2 : v.pc);
    }

    // Sum of absolute term values of outcome m's probability at the given
    // delay: the scale whose rounding sets the absolute noise floor of pm.
    double magnitude(int m, double delta) const {
        const auto& s =
            kernel_.probability_terms(static_cast<std::size_t>(m));
        double total = 0.0;
        std::map<std::string, double> at;
        for (const auto& t : s.terms()) {
            at.clear();
            for (const auto& name : t.vars) at[name] = 0.0;
            at["delta"] = delta;
            total += std::abs(t.value(at));
        }
        return total;
    }

    double side_ratio(int m, double delta) const {
        const double pm = pick(kernel_.distribution(delta), m);
        if (pm < kProbFloor) return 0.0;
        const double dm = pick(kernel_.derivative(delta), m);
        return dm * dm / pm;
    }

    noise::NoiseKernel kernel_;
};

inline double fisher_information(const ProtocolSpec& spec,
                                 const SpectralModel& model,
                                 const NoiseSpec& ns, double delta) {
    return FisherModel(spec, model, ns)(delta);
}

// ---------------------------------------------------------------------------
// Cramer-Rao bound for N independent repetitions.

inline double cramer_rao_bound(double fisher, std::int64_t shots) {
    if (shots < 1) throw error("cramer_rao_bound: shot count must be >= 1");
    if (!(fisher > 0.0))
        throw ZeroInformation(
            "cramer_rao_bound: Fisher information must be positive");
    return 1.0 / (static_cast<double>(shots) * fisher);
}

// ---------------------------------------------------------------------------
// Peak search: coarse grid plus golden-section refinement.

struct DelayWindow {
    double lo = 0.0;
    double hi = 0.0;
};

struct FisherPeak {
    double delta = 0.0;
    double value = 0.0;
};

// Central-fringe default window.
inline DelayWindow default_peak_window(const SpectralModel& model) {
    const double edge = std::numbers::pi / model.pump;
    return {-edge, edge};
}

// Window that contains the protocol's information peak wherever the noise
// search needs it.  The dip's information lives on the spectral scale
// 1/sigma (its peak sits near sigma * delta ~ 0.4-0.7 and drifts outward as
// frequency-shift noise grows), and the two-photon interferometers inherit a
// dip-like residual on that same scale in the high phase-noise limit, so all
// two-photon protocols search out to the spectral scale.  The single-photon
// interferometer carries fringe information only, which peaks inside the
// central fringe and decays fully under noise.  Outputs are even in the
// delay, so the nonnegative half suffices.
inline DelayWindow information_window(const ProtocolSpec& spec,
                                      const SpectralModel& model) {
    switch (spec.kind) {
    case ProtocolKind::HOM:
    case ProtocolKind::MZ2s:
    case ProtocolKind::MZ2d:
        return {0.0, 1.5 / model.sigma};
    default:
        return {0.0, std::numbers::pi / model.pump};
    }
}

namespace detail {

// Golden-section maximization on [a, b]; assumes f is continuous.  Returns
// the better of the final bracket midpoint and the best probe seen.
template <typename F>
FisherPeak golden_max(const F& f, double a, double b, double xtol) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    FisherPeak best = f1 >= f2 ? FisherPeak{x1, f1} : FisherPeak{x2, f2};
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
            if (f2 > best.value) best = {x2, f2};
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
            if (f1 > best.value) best = {x1, f1};
        }
    }
    return best;
}

} // namespace detail

inline FisherPeak peak_fisher(const FisherModel& fm, const SpectralModel& model,
                              const DelayWindow& window) {
    if (!(window.hi > window.lo) || !std::isfinite(window.lo) ||
        !std::isfinite(window.hi))
        throw error("peak_fisher: window must be a finite interval");
    const double span = window.hi - window.lo;
    const double step = 0.05 / model.pump;
    const int n = std::max(2, static_cast<int>(std::ceil(span / step)));
    FisherPeak best{window.lo, fm(window.lo)};
    int best_i = 0;
    for (int i = 1; i <= n; ++i) {
        const double x = window.lo + span * i / n;
        const double v = fm(x);
        if (v > best.value) {
            best = {x, v};
            best_i = i;
        }
    }
    const double lo = window.lo + span * std::max(0, best_i - 1) / n;
    const double hi = window.lo + span * std::min(n, best_i + 1) / n;
    const FisherPeak refined =
        detail::golden_max(fm, lo, hi, 1e-6 / model.pump);
    return refined.value >= best.value ? refined : best;
}

inline FisherPeak peak_fisher(const ProtocolSpec& spec,
                              const SpectralModel& model, const NoiseSpec& ns,
                              const DelayWindow& window) {
    return peak_fisher(FisherModel(spec, model, ns), model, window);
}

inline FisherPeak peak_fisher(const ProtocolSpec& spec,
                              const SpectralModel& model, const NoiseSpec& ns) {
    return peak_fisher(spec, model, ns, default_peak_window(model));
}

// ---------------------------------------------------------------------------
// Noise threshold where the peak information halves (bisection).

enum class NoiseAxis { Eps, Theta };

inline std::string to_string(NoiseAxis a) {
    return a == NoiseAxis::Eps ? "eps" : "theta";
}

inline double half_noise_threshold(const ProtocolSpec& spec,
                                   const SpectralModel& model, NoiseAxis axis) {
    const DelayWindow window = information_window(spec, model);
    const auto peak_at = [&](double eta) {
        NoiseSpec ns;
        if (axis == NoiseAxis::Eps)
            ns.eta_eps = eta;
        else
            ns.eta_theta = eta;
        return peak_fisher(spec, model, ns, window).value;
    };
    const double p0 = peak_at(0.0);
    if (!(p0 > 0.0))
        throw ZeroInformation("half_noise_threshold: no information at zero "
                              "noise");
    // Natural strength scale: the shift spread couples through eta * pump,
    // the phase spread is already in radians.
    const double scale = axis == NoiseAxis::Eps ? 1.0 / model.pump : 1.0;
    double lo = 0.0;
    double hi = scale;
    double ratio_hi = peak_at(hi) / p0;
    while (ratio_hi > 0.5) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e4 * scale) {
            if (ratio_hi > 0.999)
                throw NoDecayAxis("half_noise_threshold: peak information "
                                  "does not decay along the " +
                                  to_string(axis) + " axis");
            throw error("half_noise_threshold: no halving found below the "
                        "search cap");
        }
        ratio_hi = peak_at(hi) / p0;
    }
    // The bisection assumes monotone decay on the bracket; verify it.
    double prev = peak_at(lo);
    for (int k = 1; k <= 8; ++k) {
        const double cur = peak_at(lo + (hi - lo) * k / 8.0);
        if (cur > prev * (1.0 + 1e-9) + 1e-300)
            throw error("half_noise_threshold: peak information is not "
                        "monotone on the bracket");
        prev = cur;
    }
    const double tol = 1e-3 * scale;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (peak_at(mid) / p0 > 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Noise-regime classification by computed peak-information comparison.

enum class NoiseRegime { Low, Moderate, High };

inline std::string to_string(NoiseRegime r) {
    switch (r) {
    case NoiseRegime::Low: return "low";
    case NoiseRegime::Moderate: return "moderate";
    default: return "high";
    }
}

struct RegimeChoice {
    NoiseRegime regime = NoiseRegime::Low;
    ProtocolKind protocol = ProtocolKind::MZ2d;
    double peak_mz2d = 0.0;     // different-port pair
    double peak_two_mz1 = 0.0;  // two classical single-photon runs
    double peak_hom = 0.0;      // best dip variant
};

inline RegimeChoice classify_regime(const NoiseSpec& ns, double alpha,
                                    const SpectralModel& model) {
    RegimeChoice out;
    ProtocolSpec mz2d;
    mz2d.kind = ProtocolKind::MZ2d;
    mz2d.visibility = alpha;
    out.peak_mz2d =
        peak_fisher(mz2d, model, ns, information_window(mz2d, model)).value;

    ProtocolSpec mz1;
    mz1.kind = ProtocolKind::MZ1;
    out.peak_two_mz1 =
        2.0 * peak_fisher(mz1, model, ns, information_window(mz1, model)).value;

    ProtocolSpec hom;
    hom.kind = ProtocolKind::HOM;
    hom.visibility = alpha;
    const DelayWindow hw = information_window(hom, model);
    SpectralModel entangled = model;
    entangled.correlation = PhotonCorrelation::FrequencyEntangled;
    SpectralModel independent = model;
    independent.correlation = PhotonCorrelation::Independent;
    out.peak_hom = std::max(peak_fisher(hom, entangled, ns, hw).value,
                            peak_fisher(hom, independent, ns, hw).value);

    // Ties go to the higher-noise regime's protocol (>=, checked from the
    // high-noise end), matching half-open regime boundaries.
    if (out.peak_hom >= out.peak_two_mz1 && out.peak_hom >= out.peak_mz2d) {
        out.regime = NoiseRegime::High;
        out.protocol = ProtocolKind::HOM;
    } else if (out.peak_two_mz1 >= out.peak_mz2d) {
        out.regime = NoiseRegime::Moderate;
        out.protocol = ProtocolKind::MZ1x2Correlated;
    } else {
        out.regime = NoiseRegime::Low;
        out.protocol = ProtocolKind::MZ2d;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regime boundaries: the noise levels along one axis where the ranking of
// the protocols' peak information changes hands.  The low/moderate boundary
// is where the different-port pair stops beating two classical single-photon
// runs; the moderate/high boundary is where two classical runs stop beating
// the dip protocol.  NaN marks a crossing that never happens below the
// search cap (100 x the axis scale).

struct RegimeBoundaries {
    double low_moderate = std::numeric_limits<double>::quiet_NaN();
    double moderate_high = std::numeric_limits<double>::quiet_NaN();
};

inline RegimeBoundaries regime_boundaries(NoiseAxis axis, double alpha,
                                          const SpectralModel& model) {
    const double scale = axis == NoiseAxis::Eps ? 1.0 / model.pump : 1.0;
    const auto noise_at = [&](double eta) {
        NoiseSpec ns;
        if (axis == NoiseAxis::Eps)
            ns.eta_eps = eta;
        else
            ns.eta_theta = eta;
        return ns;
    };
    const auto peak_of = [&](ProtocolKind kind, double vis,
                             PhotonCorrelation corr, double eta) {
        ProtocolSpec spec;
        spec.kind = kind;
        spec.visibility = vis;
        SpectralModel m = model;
        m.correlation = corr;
        return peak_fisher(spec, m, noise_at(eta), information_window(spec, m))
            .value;
    };
    const auto pair_peak = [&](double eta) {
        return peak_of(ProtocolKind::MZ2d, alpha, model.correlation, eta);
    };
    const auto two_single_peak = [&](double eta) {
        return 2.0 * peak_of(ProtocolKind::MZ1, 1.0, model.correlation, eta);
    };
    // The dip protocol ignores phase noise, so its peak is a constant along
    // the theta axis; cache it instead of re-searching per probe.
    double dip_cached = -1.0;
    const auto dip_peak = [&](double eta) {
        if (axis == NoiseAxis::Theta && dip_cached >= 0.0) return dip_cached;
        const double v =
            std::max(peak_of(ProtocolKind::HOM, alpha,
                             PhotonCorrelation::FrequencyEntangled, eta),
                     peak_of(ProtocolKind::HOM, alpha,
                             PhotonCorrelation::Independent, eta));
        if (axis == NoiseAxis::Theta) dip_cached = v;
        return v;
    };
    // First noise level where f drops to (or below) g: march until the
    // difference changes sign, then bisect.
    const auto crossing = [&](const auto& f, const auto& g) {
        if (f(0.0) - g(0.0) <= 0.0) return 0.0;
        const double step = 0.25 * scale;
        double lo = 0.0;
        double hi = step;
        while (f(hi) - g(hi) > 0.0) {
            lo = hi;
            hi += step;
            if (hi > 100.0 * scale)
                return std::numeric_limits<double>::quiet_NaN();
        }
        while (hi - lo > 1e-3 * scale) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) - g(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    RegimeBoundaries out;
    out.low_moderate = crossing(pair_peak, two_single_peak);
    out.moderate_high = crossing(two_single_peak, dip_peak);
    return out;
}

// ---------------------------------------------------------------------------
// Fisher-information scan over a delay grid (dimensionless units).

struct FisherScan {
    ProtocolSpec spec;
    SpectralModel model;
    NoiseSpec noise;
    std::vector<double> delta_wp; // delay times pump frequency
    std::vector<double> values;   // Fisher information over pump frequency^2
};

inline FisherScan fisher_scan(const ProtocolSpec& spec,
                              const SpectralModel& model, const NoiseSpec& ns,
                              double lo_wp, double hi_wp, double step_wp) {
    if (!(step_wp > 0.0) || !(hi_wp >= lo_wp))
        throw error("fisher_scan: need hi >= lo and a positive step");
    const FisherModel fm(spec, model, ns);
    FisherScan scan{spec, model, ns, {}, {}};
    const double wp2 = model.pump * model.pump;
    const int n = static_cast<int>(std::floor((hi_wp - lo_wp) / step_wp + 0.5));
    for (int i = 0; i <= n; ++i) {
        const double dwp = lo_wp + i * step_wp;
        const double f = fm(dwp / model.pump);
        if (!std::isfinite(f) || f < 0.0)
            throw error("fisher_scan: non-finite or negative value in scan");
        scan.delta_wp.push_back(dwp);
        scan.values.push_back(f / wp2);
    }
    return scan;
}

} // namespace tpi::metro
