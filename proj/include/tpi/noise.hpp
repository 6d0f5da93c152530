#ifndef TPI_NOISE_HPP
#define TPI_NOISE_HPP

// Noise-averaging kernel: averages the symbolic fixed-shift probability
// sums over per-shot shift distributions.
//
// Frequency-dependent shifts (eps) always carry a Gaussian distribution and
// integrate analytically.  Frequency-independent shifts (theta) integrate
// analytically for the Gaussian family; for the circular families (wrapped
// Gaussian, von Mises) each theta variable appears in every term's exponent
// only linearly with a purely imaginary coefficient i*k, so the average
// multiplies the term by m(k) = integral of w(theta) cos(k theta) over
// [-pi, pi], evaluated by error-driven adaptive Gauss-Legendre panels.
//
// The infinite-phase-noise limit is a distinct entry point that deletes
// every term carrying any theta dependence (their averaging factors decay
// to zero for every family) and then averages the eps variables as usual.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tpi/circular.hpp"
#include "tpi/errors.hpp"
#include "tpi/model.hpp"
#include "tpi/protocols.hpp"
#include "tpi/quadrature.hpp"
#include "tpi/term.hpp"

namespace tpi::noise {

using term::cplx;
using term::GaussTerm;
using term::TermSum;

namespace detail {

inline bool term_depends(const GaussTerm& t, const std::string& var) {
    const int k = t.index_of(var);
    if (k < 0) return false;
    const std::size_t uk = static_cast<std::size_t>(k);
    if (t.pow[uk] != 0) return true;
    if (t.lin[uk] != cplx{0.0, 0.0}) return true;
    for (std::size_t j = 0; j < t.size(); ++j)
        if (t.A(uk, j) != cplx{0.0, 0.0}) return true;
    return false;
}

inline bool sum_depends(const TermSum& s, const std::string& var) {
    for (const GaussTerm& t : s.terms())
        if (term_depends(t, var)) return true;
    return false;
}

// m(k) = \int_{-pi}^{pi} w(theta) cos(k theta) dtheta for the circular
// weight; panels seeded at the weight's peak so narrow concentrations are
// resolved, node budget 4096 per the kernel policy.
inline double circular_multiplier(ThetaDistribution dist, double eta, double k) {
    if (k == 0.0) return 1.0; // normalized weight, no oscillation
    const double pi = std::numbers::pi;
    auto f = [&](double th) {
        const double w = dist == ThetaDistribution::VonMises
                             ? circ::von_mises_weight(th, eta)
                             : circ::wrapped_gaussian_weight(th, eta);
        return w * std::cos(k * th);
    };
    std::vector<double> breaks{0.0};
    for (double m : {1.0, 3.0, 10.0}) {
        breaks.push_back(-m * eta);
        breaks.push_back(m * eta);
    }
    quad::QuadSpec qs;
    qs.rel_tol = 1e-12;
    qs.abs_tol = 1e-15;
    return quad::adaptive_legendre(f, -pi, pi, qs, 4096, breaks).value;
}

// Average one circular theta variable out of a sum.
inline TermSum average_circular(const TermSum& s, const std::string& var,
                                ThetaDistribution dist, double eta) {
    std::vector<GaussTerm> out;
    std::map<double, double> memo; // multiplier per oscillation index k
    for (const GaussTerm& t : s.terms()) {
        const int k = t.index_of(var);
        if (k < 0) {
            out.push_back(t);
            continue;
        }
        const std::size_t uk = static_cast<std::size_t>(k);
        if (t.pow[uk] != 0)
            throw error("circular average: polynomial shift dependence");
        for (std::size_t j = 0; j < t.size(); ++j)
            if (t.A(uk, j) != cplx{0.0, 0.0})
                throw error("circular average: quadratic shift dependence");
        const cplx c = t.lin[uk];
        if (std::abs(c.real()) >
            1e-12 * std::max(1.0, std::abs(c.imag())))
            throw error("circular average: non-oscillatory shift dependence");
        const double osc = std::abs(c.imag());
        auto it = memo.find(osc);
        const double mult = it != memo.end()
                                ? it->second
                                : (memo[osc] = circular_multiplier(dist, eta, osc));
        GaussTerm reduced = substituted(t, var, 0.0);
        reduced.z *= mult;
        out.push_back(std::move(reduced));
    }
    return merged(TermSum(std::move(out)));
}

inline TermSum strip_dependent(const TermSum& s, const std::string& var) {
    std::vector<GaussTerm> kept;
    for (const GaussTerm& t : s.terms())
        if (!term_depends(t, var)) kept.push_back(t);
    TermSum r{std::move(kept)};
    return substitute(r, var, 0.0); // drop zero-coefficient leftovers
}

} // namespace detail

// Precomputed noise-averaged probability sums (functions of delta only),
// with exact delta derivatives for downstream information calculations.
class NoiseKernel {
  public:
    NoiseKernel(const ProtocolSpec& spec, const SpectralModel& model,
                const NoiseSpec& ns)
        : NoiseKernel(spec, model, ns, /*high_theta=*/false) {}

    // Infinite phase-noise limit (distinct entry point, not a strength
    // sentinel): deletes every phase-dependent term, then averages the
    // frequency-dependent shifts.  Meaningful for the interferometer kinds
    // only; the dip layout has no phase dependence to erase.
    static NoiseKernel high_theta_limit(const ProtocolSpec& spec,
                                        const SpectralModel& model,
                                        const NoiseSpec& ns) {
        if (spec.kind == ProtocolKind::HOM)
            throw error("high-theta limit: the interference dip carries no "
                        "phase-shift dependence");
        return NoiseKernel(spec, model, ns, /*high_theta=*/true);
    }

    OutcomeDistribution distribution(double delta) const {
        const std::map<std::string, double> at{{"delta", delta}};
        return {evaluate(p_[0], at), evaluate(p_[1], at), evaluate(p_[2], at)};
    }

    // dP/d delta per outcome.
    OutcomeDistribution derivative(double delta) const {
        const std::map<std::string, double> at{{"delta", delta}};
        return {evaluate(d_[0], at), evaluate(d_[1], at), evaluate(d_[2], at)};
    }

    // d^2 P / d delta^2 per outcome.
    OutcomeDistribution second_derivative(double delta) const {
        const std::map<std::string, double> at{{"delta", delta}};
        return {evaluate(dd_[0], at), evaluate(dd_[1], at), evaluate(dd_[2], at)};
    }

    const TermSum& probability_terms(std::size_t outcome) const {
        return p_.at(outcome);
    }

  private:
    NoiseKernel(const ProtocolSpec& spec, const SpectralModel& model,
                const NoiseSpec& ns, bool high_theta) {
        ns.validate();
        proto::ProbabilityTerms pt = proto::build_probability_terms(spec, model);
        p_ = {std::move(pt.p1), std::move(pt.p2), std::move(pt.pc)};
        const std::vector<proto::NoiseChannel> channels =
            proto::noise_channels(spec);
        for (TermSum& s : p_) {
            for (const auto& ch : channels) {
                if (high_theta)
                    s = detail::strip_dependent(s, ch.theta_var);
                // Dimensions the outputs do not actually depend on are removed
                // by exact substitution; averaging them would only reshuffle
                // floating-point rounding (the dip outputs must be bit-equal
                // for every phase spread, not merely close).
                if (detail::sum_depends(s, ch.eps_var))
                    s = integrate_gaussian(s, ch.eps_var,
                                           ns.eta_eps * ch.eps_scale);
                else
                    s = substitute(s, ch.eps_var, 0.0);
                if (high_theta) continue;
                if (!detail::sum_depends(s, ch.theta_var)) {
                    s = substitute(s, ch.theta_var, 0.0);
                    continue;
                }
                const double et = ns.eta_theta * ch.theta_scale;
                if (ns.theta_dist == ThetaDistribution::Gaussian || et == 0.0)
                    s = integrate_gaussian(s, ch.theta_var, et);
                else
                    s = detail::average_circular(s, ch.theta_var, ns.theta_dist,
                                                 et);
            }
        }
        for (std::size_t i = 0; i < 3; ++i) {
            d_[i] = differentiate(p_[i], "delta");
            dd_[i] = differentiate(d_[i], "delta");
        }
    }

    std::array<TermSum, 3> p_, d_, dd_;
};

// One-shot noise-averaged outcome distribution.
inline OutcomeDistribution noisy_distribution(const ProtocolSpec& spec,
                                              const SpectralModel& model,
                                              const NoiseSpec& ns,
                                              double delta) {
    return NoiseKernel(spec, model, ns).distribution(delta);
}

// One-shot infinite-phase-noise limit distribution.
inline OutcomeDistribution high_theta_limit_distribution(
    const ProtocolSpec& spec, const SpectralModel& model, const NoiseSpec& ns,
    double delta) {
    return NoiseKernel::high_theta_limit(spec, model, ns).distribution(delta);
}

} // namespace tpi::noise

#endif // TPI_NOISE_HPP
