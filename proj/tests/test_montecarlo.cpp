// Shot sampler and maximum-likelihood delay estimator: determinism, agreement
// of empirical frequencies with the averaged outcome model, and estimator
// efficiency against the information bound.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "tpi/circular.hpp"
#include "tpi/metrology.hpp"
#include "tpi/montecarlo.hpp"
#include "tpi/noise.hpp"
#include "tpi/quadrature.hpp"
#include "tpi/rng.hpp"

using namespace tpi;
using mc::sample_outcomes;
using mc::ShotCounts;
using mc::TrialConfig;

namespace {

ProtocolSpec make_spec(ProtocolKind kind, double alpha,
                       NoisePlacement placement = NoisePlacement::ModeCorrelated) {
    ProtocolSpec s;
    s.kind = kind;
    s.visibility = alpha;
    s.placement = placement;
    return s;
}

SpectralModel make_model(
    PhotonCorrelation corr = PhotonCorrelation::FrequencyEntangled) {
    SpectralModel m;
    m.correlation = corr;
    return m;
}

NoiseSpec make_noise(double eta_eps, double eta_theta,
                     ThetaDistribution dist = ThetaDistribution::Gaussian) {
    NoiseSpec n;
    n.eta_eps = eta_eps;
    n.eta_theta = eta_theta;
    n.theta_dist = dist;
    return n;
}

TrialConfig make_config(ProtocolSpec spec, SpectralModel model, NoiseSpec ns,
                        double delta, std::int64_t shots, std::uint64_t seed) {
    TrialConfig cfg;
    cfg.spec = spec;
    cfg.model = model;
    cfg.noise = ns;
    cfg.delta = delta;
    cfg.shots = shots;
    cfg.seed = seed;
    return cfg;
}

// Largest |empirical - analytic| frequency deviation over the 3 outcomes.
double max_frequency_error(const ShotCounts& c, const OutcomeDistribution& p) {
    const double n = static_cast<double>(c.total());
    return std::max({std::abs(c.n1 / n - p.p1), std::abs(c.n2 / n - p.p2),
                     std::abs(c.nc / n - p.pc)});
}

// 4-sigma multinomial check of each outcome frequency.
void check_frequencies(const ShotCounts& c, const OutcomeDistribution& p) {
    const double n = static_cast<double>(c.total());
    const double probs[3] = {p.p1, p.p2, p.pc};
    const double freqs[3] = {c.n1 / n, c.n2 / n, c.nc / n};
    for (int m = 0; m < 3; ++m) {
        const double sd = std::sqrt(probs[m] * (1.0 - probs[m]) / n);
        CHECK(std::abs(freqs[m] - probs[m]) <= 4.0 * sd + 1e-12);
    }
}

} // namespace

TEST_CASE("generator streams are reproducible and well distributed") {
    rng::Philox a(42, 7);
    rng::Philox b(42, 7);
    for (int i = 0; i < 64; ++i) CHECK(a.next_u32() == b.next_u32());

    // Distinct streams from the same seed decorrelate immediately.
    rng::Philox c(42, 8);
    int agree = 0;
    for (int i = 0; i < 64; ++i)
        if (b.next_u32() == c.next_u32()) ++agree;
    CHECK(agree == 0);

    // Uniform and normal moments at 4-sigma statistical tolerance.
    rng::Philox g(123, 0);
    const int n = 100000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
        su += g.uniform();
        const double z = g.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
    CHECK(std::abs(sn / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sn2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));

    // Wrapped draws stay on the principal circle.
    for (int i = 0; i < 1000; ++i) {
        const double w = g.wrapped_normal(8.0);
        CHECK(w > -std::numbers::pi - 1e-15);
        CHECK(w <= std::numbers::pi + 1e-15);
    }
}

TEST_CASE("von Mises sampling matches the first circular moments") {
    // E[cos theta] = I1(kappa)/I0(kappa); check against a quadrature of the
    // same weight the averaging kernel uses, plus E[sin] = 0 by symmetry.
    for (const double eta : {0.3, 1.0, 2.5}) {
        const double kappa = 1.0 / (eta * eta);
        quad::QuadSpec qs;
        const auto moment = quad::adaptive_legendre(
            [&](double t) {
                return circ::von_mises_weight(t, eta) * std::cos(t);
            },
            -std::numbers::pi, std::numbers::pi, qs);
        rng::Philox g(7, static_cast<std::uint64_t>(eta * 1000));
        const int n = 200000;
        double sc = 0.0, ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = g.von_mises(kappa);
            sc += std::cos(t);
            ss += std::sin(t);
        }
        const double sd = 1.0 / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(sc / n - moment.value) < 4.0 * sd);
        CHECK(std::abs(ss / n) < 4.0 * sd);
    }
}

TEST_CASE("deterministic configurations produce deterministic counts") {
    const auto cfg = make_config(make_spec(ProtocolKind::MZ2s, 1.0),
                                 make_model(), make_noise(0.0, 0.0), 0.0,
                                 10000, 1);
    const ShotCounts c = sample_outcomes(cfg);
    CHECK(c.n1 == 0);
    CHECK(c.n2 == 10000);
    CHECK(c.nc == 0);
}

TEST_CASE("full-visibility dip never fires both detectors at zero delay") {
    const auto cfg = make_config(make_spec(ProtocolKind::HOM, 1.0),
                                 make_model(), make_noise(0.0, 0.0), 0.0,
                                 1000000, 2024);
    const ShotCounts c = sample_outcomes(cfg);
    CHECK(c.nc == 0);
    CHECK(c.total() == 1000000);
    // n1 ~ Binomial(N, 1/2).
    const double sd = std::sqrt(1000000.0 * 0.25);
    CHECK(std::abs(static_cast<double>(c.n1) - 500000.0) <= 4.0 * sd);
}

TEST_CASE("noisy dip frequencies match the averaged model") {
    const auto spec = make_spec(ProtocolKind::HOM, 0.9);
    const auto model = make_model();
    const auto ns = make_noise(5.0, 0.0);
    const double delta = 20.0 / model.pump;
    const auto cfg = make_config(spec, model, ns, delta, 1000000, 33);
    const ShotCounts c = sample_outcomes(cfg);
    const OutcomeDistribution p =
        noise::noisy_distribution(spec, model, ns, delta);
    check_frequencies(c, p);
}

TEST_CASE("counts are independent of the worker partition") {
    const auto cfg = make_config(make_spec(ProtocolKind::HOM, 0.9),
                                 make_model(), make_noise(5.0, 0.0), 20.0,
                                 20000, 99);
    const ShotCounts ref = sample_outcomes(cfg, 1);
    for (const int workers : {2, 3, 7, 16}) {
        const ShotCounts c = sample_outcomes(cfg, workers);
        CHECK(c.n1 == ref.n1);
        CHECK(c.n2 == ref.n2);
        CHECK(c.nc == ref.nc);
    }
    // A different seed genuinely changes the draw.
    auto other = cfg;
    other.seed = 100;
    const ShotCounts changed = sample_outcomes(other, 1);
    CHECK((changed.n1 != ref.n1 || changed.n2 != ref.n2 ||
           changed.nc != ref.nc));
}

TEST_CASE("frequency errors shrink as the square root of the shot count") {
    const auto spec = make_spec(ProtocolKind::HOM, 0.9);
    const auto model = make_model();
    const auto ns = make_noise(5.0, 0.0);
    const double delta = 20.0 / model.pump;
    const OutcomeDistribution p =
        noise::noisy_distribution(spec, model, ns, delta);
    const ShotCounts small = sample_outcomes(
        make_config(spec, model, ns, delta, 10000, 55));
    const ShotCounts large = sample_outcomes(
        make_config(spec, model, ns, delta, 1000000, 55));
    const double err_small = max_frequency_error(small, p);
    const double err_large = max_frequency_error(large, p);
    CHECK(err_large < 0.5 * err_small);
    CHECK(err_large < 4.0 * std::sqrt(0.25 / 1000000.0));
}

TEST_CASE("theta families sample against their averaged kernels") {
    const auto model = make_model();
    {
        const auto spec = make_spec(ProtocolKind::MZ2d, 0.3);
        const auto ns = make_noise(0.0, 2.0, ThetaDistribution::VonMises);
        const double delta = 7.0 / model.pump;
        const ShotCounts c =
            sample_outcomes(make_config(spec, model, ns, delta, 200000, 5));
        check_frequencies(c, noise::noisy_distribution(spec, model, ns, delta));
    }
    {
        const auto spec = make_spec(ProtocolKind::MZ1, 1.0);
        const auto ns = make_noise(0.0, 1.5, ThetaDistribution::WrappedGaussian);
        const double delta = 2.0 / model.pump;
        const ShotCounts c =
            sample_outcomes(make_config(spec, model, ns, delta, 200000, 6));
        check_frequencies(c, noise::noisy_distribution(spec, model, ns, delta));
    }
}

TEST_CASE("per-rail and split-arm placements sample against their kernels") {
    {
        const auto spec = make_spec(ProtocolKind::MZ2d, 0.6,
                                    NoisePlacement::ModeUncorrelated);
        const auto model = make_model(PhotonCorrelation::Independent);
        const auto ns = make_noise(0.8, 0.6);
        const double delta = 3.0 / model.pump;
        const ShotCounts c =
            sample_outcomes(make_config(spec, model, ns, delta, 200000, 11));
        check_frequencies(c, noise::noisy_distribution(spec, model, ns, delta));
    }
    {
        ProtocolSpec spec = make_spec(ProtocolKind::MZ2s, 1.0);
        spec.arms.both_arms = true;
        spec.arms.f_eps = 0.5;
        spec.arms.f_theta = 0.25;
        const auto model = make_model();
        const auto ns = make_noise(0.7, 0.9);
        const double delta = 4.0 / model.pump;
        const ShotCounts c =
            sample_outcomes(make_config(spec, model, ns, delta, 100000, 12));
        check_frequencies(c, noise::noisy_distribution(spec, model, ns, delta));
    }
}

TEST_CASE("likelihood estimator recovers the true delay") {
    const auto spec = make_spec(ProtocolKind::HOM, 0.9);
    const auto model = make_model();
    const auto ns = make_noise(0.0, 0.0);
    const double truth = 10.0 / model.pump;
    const std::int64_t shots = 100000;
    const ShotCounts c =
        sample_outcomes(make_config(spec, model, ns, truth, shots, 77));
    const auto window = metro::information_window(spec, model);
    const double estimate = mc::estimate_delay_mle(c, spec, model, ns, window);
    const double crb = metro::cramer_rao_bound(
        metro::fisher_information(spec, model, ns, truth), shots);
    CHECK(std::abs(estimate - truth) <= 3.0 * std::sqrt(crb));
}

TEST_CASE("likelihood estimator pins a deterministic outcome to its fixed point") {
    ShotCounts c;
    c.n2 = 5000;
    const double estimate = mc::estimate_delay_mle(
        c, make_spec(ProtocolKind::MZ2s, 1.0), make_model(),
        make_noise(0.0, 0.0), metro::DelayWindow{0.0, 0.1});
    CHECK(estimate == 0.0);
}

TEST_CASE("flat likelihoods are reported rather than maximized") {
    // Zero visibility makes every outcome probability delay-independent.
    ShotCounts c;
    c.n1 = 2500;
    c.n2 = 2500;
    c.nc = 5000;
    CHECK_THROWS_AS(
        mc::estimate_delay_mle(c, make_spec(ProtocolKind::HOM, 0.0),
                               make_model(), make_noise(0.0, 0.0),
                               metro::DelayWindow{0.0, 50.0}),
        FlatLikelihood);
}

TEST_CASE("repeated-trial variance sits just above the information bound") {
    const auto spec = make_spec(ProtocolKind::HOM, 0.9);
    const auto model = make_model();
    const auto ns = make_noise(0.0, 0.0);
    const double truth = 10.0 / model.pump;
    const std::int64_t shots = 10000;
    const int trials = 500;

    const noise::NoiseKernel kernel(spec, model, ns);
    const auto window = metro::information_window(spec, model);
    std::vector<double> estimates;
    estimates.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        const auto cfg = make_config(spec, model, ns, truth, shots,
                                     9000 + static_cast<std::uint64_t>(t));
        estimates.push_back(
            mc::estimate_delay_mle(sample_outcomes(cfg), kernel, window));
    }
    double mean = 0.0;
    for (const double e : estimates) mean += e;
    mean /= trials;
    double var = 0.0;
    for (const double e : estimates) var += (e - mean) * (e - mean);
    var /= trials - 1;

    const double crb = metro::cramer_rao_bound(
        metro::fisher_information(spec, model, ns, truth), shots);
    const double ratio = var / crb;
    INFO("variance/CRB = " << ratio);
    CHECK(ratio >= 0.9); // never beats the bound beyond noise
    CHECK(ratio >= 1.0);
    CHECK(ratio <= 1.5);
    CHECK(std::abs(mean - truth) <= 4.0 * std::sqrt(crb / trials));
}
