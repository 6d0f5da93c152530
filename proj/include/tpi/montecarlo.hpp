#ifndef TPI_MONTECARLO_HPP
#define TPI_MONTECARLO_HPP

// Shot-level stochastic simulator.  Each shot draws one set of per-channel
// shift values (a frequency shift and a phase shift per noise channel, shared
// or per-rail according to the placement), evaluates the fixed-shift outcome
// probabilities, and samples one of the three detection outcomes.  Draws come
// from a counter-based stream keyed by (seed, shot index), so the counts are
// bit-identical however the shots are partitioned across workers.
//
// The companion estimator recovers the delay from observed counts by
// maximizing the multinomial log-likelihood under the noise-averaged outcome
// model on a prior window (coarse grid, then golden-section refinement).

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "tpi/errors.hpp"
#include "tpi/metrology.hpp"
#include "tpi/model.hpp"
#include "tpi/noise.hpp"
#include "tpi/protocols.hpp"
#include "tpi/rng.hpp"

namespace tpi::mc {

// ---------------------------------------------------------------------------
// Configuration and results.

struct TrialConfig {
    std::int64_t shots = 1;
    std::uint64_t seed = 0;
    double delta = 0.0;
    ProtocolSpec spec;
    SpectralModel model;
    NoiseSpec noise;

    void validate() const {
        if (shots < 1) throw error("TrialConfig: shots must be >= 1");
        spec.validate();
        model.validate();
        noise.validate();
    }
};

struct ShotCounts {
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    std::int64_t nc = 0;

    std::int64_t total() const { return n1 + n2 + nc; }

    ShotCounts& operator+=(const ShotCounts& o) {
        n1 += o.n1;
        n2 += o.n2;
        nc += o.nc;
        return *this;
    }
};

// Worker count: explicit argument wins, then the TPI_WORKERS environment
// variable, then the logical core count.
inline int worker_count(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TPI_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace detail {

// True when the fixed-shift evaluation dispatches to a hand-derived closed
// form (cheap per shot); otherwise the symbolic probability terms are built
// once up front and evaluated per shot.
inline bool closed_form_shots(const ProtocolSpec& spec,
                              const SpectralModel& model) {
    if (spec.arms.both_arms) return false;
    const bool fe = model.correlation == PhotonCorrelation::FrequencyEntangled;
    const bool mc = spec.placement == NoisePlacement::ModeCorrelated;
    switch (spec.kind) {
        case ProtocolKind::MZ1:
        case ProtocolKind::MZ1x2Correlated:
            return true;
        case ProtocolKind::HOM:
            return mc;
        case ProtocolKind::MZ2s:
        case ProtocolKind::MZ2d:
            return mc && fe;
    }
    return false;
}

// Route a channel's drawn pair into the fixed-shift slot it feeds.
inline void assign_shift(FixedShifts& sh, const std::string& eps_var,
                         double eps, double theta) {
    if (eps_var == "eps" || eps_var == "eps1") {
        sh.mode1 = {eps, theta};
    } else if (eps_var == "eps2") {
        sh.mode2 = {eps, theta};
    } else if (eps_var == "eps_arm2" || eps_var == "eps1_arm2") {
        sh.mode1_arm2 = {eps, theta};
    } else if (eps_var == "eps2_arm2") {
        sh.mode2_arm2 = {eps, theta};
    } else {
        throw error("sample_outcomes: unknown noise channel '" + eps_var + "'");
    }
}

class ShotSampler {
  public:
    ShotSampler(const TrialConfig& cfg)
        : cfg_(cfg),
          channels_(proto::noise_channels(cfg.spec)),
          closed_(closed_form_shots(cfg.spec, cfg.model)) {
        if (!closed_)
            terms_ = proto::build_probability_terms(cfg_.spec, cfg_.model);
    }

    // Outcome of one shot: 0 -> detector 1, 1 -> detector 2, 2 -> coincidence.
    int draw(std::uint64_t shot) const {
        rng::Philox gen(cfg_.seed, shot);
        FixedShifts sh;
        for (const auto& ch : channels_) {
            const double se = cfg_.noise.eta_eps * ch.eps_scale;
            const double st = cfg_.noise.eta_theta * ch.theta_scale;
            const double eps = se > 0.0 ? se * gen.normal() : 0.0;
            double theta = 0.0;
            if (st > 0.0) {
                switch (cfg_.noise.theta_dist) {
                    case ThetaDistribution::Gaussian:
                        theta = st * gen.normal();
                        break;
                    case ThetaDistribution::WrappedGaussian:
                        theta = gen.wrapped_normal(st);
                        break;
                    case ThetaDistribution::VonMises:
                        theta = gen.von_mises(1.0 / (st * st));
                        break;
                }
            }
            assign_shift(sh, ch.eps_var, eps, theta);
        }
        const OutcomeDistribution p =
            closed_ ? proto::fixed_shift_distribution(cfg_.spec, cfg_.model,
                                                      cfg_.delta, sh)
                    : proto::evaluate_distribution(terms_, cfg_.delta, sh);
        const double u = gen.uniform();
        if (u < p.p1) return 0;
        if (u < p.p1 + p.p2) return 1;
        return 2;
    }

  private:
    const TrialConfig& cfg_;
    std::vector<proto::NoiseChannel> channels_;
    bool closed_;
    proto::ProbabilityTerms terms_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Outcome sampling.

inline ShotCounts sample_outcomes(const TrialConfig& cfg, int workers = 0) {
    cfg.validate();
    const detail::ShotSampler sampler(cfg);
    const std::int64_t n = cfg.shots;
    const int w = std::min<std::int64_t>(worker_count(workers), n);

    const auto run_range = [&sampler](std::int64_t begin, std::int64_t end,
                                      ShotCounts& out) {
        ShotCounts local;
        for (std::int64_t s = begin; s < end; ++s) {
            switch (sampler.draw(static_cast<std::uint64_t>(s))) {
                case 0: ++local.n1; break;
                case 1: ++local.n2; break;
                default: ++local.nc; break;
            }
        }
        out = local;
    };

    std::vector<ShotCounts> partial(static_cast<std::size_t>(w));
    if (w <= 1) {
        run_range(0, n, partial[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(w));
        for (int i = 0; i < w; ++i) {
            const std::int64_t begin = n * i / w;
            const std::int64_t end = n * (i + 1) / w;
            pool.emplace_back(run_range, begin, end,
                              std::ref(partial[static_cast<std::size_t>(i)]));
        }
        for (auto& t : pool) t.join();
    }

    ShotCounts counts;
    for (const ShotCounts& c : partial) counts += c;
    return counts;
}

// ---------------------------------------------------------------------------
// Maximum-likelihood delay estimation.

// Multinomial log-likelihood of the observed counts under the noise-averaged
// outcome model, maximized over the prior window by a coarse grid plus
// golden-section refinement.  The window must exclude sign-ambiguous mirror
// solutions (the dip statistics are even in the delay: restrict to delta >=
// 0).  Throws FlatLikelihood when the window cannot distinguish hypotheses.
inline double estimate_delay_mle(const ShotCounts& counts,
                                 const noise::NoiseKernel& kernel,
                                 const metro::DelayWindow& window) {
    if (counts.total() < 1)
        throw error("estimate_delay_mle: no shots recorded");
    if (!(window.hi > window.lo))
        throw error("estimate_delay_mle: empty prior window");

    const auto log_likelihood = [&](double d) {
        const OutcomeDistribution p = kernel.distribution(d);
        const auto term = [](std::int64_t n, double prob) {
            if (n == 0) return 0.0;
            return static_cast<double>(n) *
                   std::log(std::max(prob, 1e-300));
        };
        return term(counts.n1, p.p1) + term(counts.n2, p.p2) +
               term(counts.nc, p.pc);
    };

    constexpr int kGridPoints = 256;
    const double span = window.hi - window.lo;
    double best_x = window.lo;
    double best_ll = log_likelihood(window.lo);
    double worst_ll = best_ll;
    int best_i = 0;
    for (int i = 1; i <= kGridPoints; ++i) {
        const double x = window.lo + span * i / kGridPoints;
        const double ll = log_likelihood(x);
        if (ll > best_ll) {
            best_ll = ll;
            best_x = x;
            best_i = i;
        }
        if (ll < worst_ll) worst_ll = ll;
    }
    if (best_ll - worst_ll < 1e-12)
        throw FlatLikelihood(
            "estimate_delay_mle: all hypothesis likelihoods coincide on the "
            "prior window");

    const double lo =
        window.lo + span * std::max(0, best_i - 1) / kGridPoints;
    const double hi =
        window.lo + span * std::min(kGridPoints, best_i + 1) / kGridPoints;
    const auto refined =
        metro::detail::golden_max(log_likelihood, lo, hi, 1e-6 * span);
    return refined.value >= best_ll ? refined.delta : best_x;
}

inline double estimate_delay_mle(const ShotCounts& counts,
                                 const ProtocolSpec& spec,
                                 const SpectralModel& model,
                                 const NoiseSpec& ns,
                                 const metro::DelayWindow& window) {
    return estimate_delay_mle(counts, noise::NoiseKernel(spec, model, ns),
                              window);
}

} // namespace tpi::mc

#endif // TPI_MONTECARLO_HPP
