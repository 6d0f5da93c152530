// Tests for the analytic noise-averaging kernel: frozen hand-derived values,
// agreement with the printed noisy laws and the quadrature reference path,
// circular-family behavior, the infinite-phase-noise limit, and the
// structural invariants (immunity, erasure, arm splitting, continuity).

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tpi/closed_forms.hpp"
#include "tpi/errors.hpp"
#include "tpi/model.hpp"
#include "tpi/noise.hpp"
#include "tpi/oracle.hpp"
#include "tpi/protocols.hpp"

namespace {

using tpi::ArmConfig;
using tpi::FixedShifts;
using tpi::NoisePlacement;
using tpi::NoiseSpec;
using tpi::OutcomeDistribution;
using tpi::PhotonCorrelation;
using tpi::ProtocolKind;
using tpi::ProtocolSpec;
using tpi::SpectralModel;
using tpi::ThetaDistribution;
using tpi::noise::high_theta_limit_distribution;
using tpi::noise::NoiseKernel;
using tpi::noise::noisy_distribution;

ProtocolSpec make_spec(ProtocolKind kind, double alpha,
                       NoisePlacement placement = NoisePlacement::ModeCorrelated) {
    ProtocolSpec s;
    s.kind = kind;
    s.visibility = alpha;
    s.placement = placement;
    return s;
}

SpectralModel make_model(PhotonCorrelation corr) {
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

void check_triple(const OutcomeDistribution& got, const OutcomeDistribution& want,
                  double tol) {
    CHECK(std::abs(got.p1 - want.p1) < tol);
    CHECK(std::abs(got.p2 - want.p2) < tol);
    CHECK(std::abs(got.pc - want.pc) < tol);
}

const ProtocolKind kAllKinds[] = {
    ProtocolKind::HOM, ProtocolKind::MZ2s, ProtocolKind::MZ2d,
    ProtocolKind::MZ1, ProtocolKind::MZ1x2Correlated,
};

} // namespace

TEST_CASE("pinned noise-averaged reference values") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);

    // Dip with frequency-shift spread eta_eps * sigma = 1/2 at delta = 0:
    // coincidence rate (1 - 1/sqrt(2)) / 2.
    {
        const ProtocolSpec spec = make_spec(ProtocolKind::HOM, 1.0);
        const NoiseSpec noise = make_noise(0.5 / model.sigma, 0.0);
        const OutcomeDistribution got = noisy_distribution(spec, model, noise, 0.0);
        CHECK(std::abs(got.pc - 0.14644660940672627) < 1e-12);
        CHECK(std::abs(got.sum() - 1.0) < 1e-12);
    }
    // Same-port pair with no noise at delta = 0 is a deterministic outcome.
    {
        const ProtocolSpec spec = make_spec(ProtocolKind::MZ2s, 1.0);
        const NoiseSpec off = make_noise(0.0, 0.0);
        const OutcomeDistribution got = noisy_distribution(spec, model, off, 0.0);
        CHECK(std::abs(got.p1) < 1e-14);
        CHECK(std::abs(got.p2 - 1.0) < 1e-14);
        CHECK(std::abs(got.pc) < 1e-14);
    }
    // Same-port pair with Gaussian phase spread 1 at delta = 0:
    // coincidence rate (1 - exp(-2)) / 4.
    {
        const ProtocolSpec spec = make_spec(ProtocolKind::MZ2s, 1.0);
        const NoiseSpec noise = make_noise(0.0, 1.0);
        const OutcomeDistribution got = noisy_distribution(spec, model, noise, 0.0);
        CHECK(std::abs(got.pc - 0.21616617919084682) < 1e-12);
    }
}

TEST_CASE("kernel matches the printed noisy laws on random grids") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);
    std::mt19937 rng(20260816);
    std::uniform_real_distribution<double> du(0.0, 1.0);

    for (int i = 0; i < 40; ++i) {
        const double delta = -40.0 + 80.0 * du(rng);
        const double eta_e = 12.0 * du(rng);
        const double eta_t = 1.5 * du(rng);
        const double alpha = du(rng);
        const NoiseSpec noise = make_noise(eta_e, eta_t);

        const OutcomeDistribution hom = noisy_distribution(
            make_spec(ProtocolKind::HOM, alpha), model, noise, delta);
        check_triple(hom,
                     tpi::closed::hom_entangled_noisy(alpha, model.sigma, delta,
                                                      eta_e),
                     1e-10);

        const OutcomeDistribution mz2s = noisy_distribution(
            make_spec(ProtocolKind::MZ2s, alpha), model, noise, delta);
        check_triple(mz2s,
                     tpi::closed::mz2s_entangled_noisy(model.pump, model.sigma,
                                                       delta, eta_e, eta_t),
                     1e-10);

        const OutcomeDistribution mz2d = noisy_distribution(
            make_spec(ProtocolKind::MZ2d, alpha), model, noise, delta);
        check_triple(mz2d,
                     tpi::closed::mz2d_entangled_noisy(alpha, model.pump,
                                                       model.sigma, delta,
                                                       eta_e, eta_t),
                     1e-10);

        const OutcomeDistribution mz1 = noisy_distribution(
            make_spec(ProtocolKind::MZ1, 1.0), model, noise, delta);
        check_triple(mz1,
                     tpi::closed::mz1_noisy(model.pump, model.sigma, delta,
                                            eta_e, eta_t),
                     1e-10);
    }
}

TEST_CASE("wrapped Gaussian phase family equals the unbounded Gaussian") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);
    // The documented check point.
    {
        const ProtocolSpec spec = make_spec(ProtocolKind::MZ2d, 0.3);
        const OutcomeDistribution wrapped = noisy_distribution(
            spec, model, make_noise(0.0, 2.0, ThetaDistribution::WrappedGaussian),
            7.0);
        const OutcomeDistribution gauss =
            noisy_distribution(spec, model, make_noise(0.0, 2.0), 7.0);
        check_triple(wrapped, gauss, 1e-9);
    }
    // Random interferometer configurations, all kinds and placements.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> du(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const ProtocolKind kind =
            (i % 2 == 0) ? ProtocolKind::MZ2s : ProtocolKind::MZ2d;
        const NoisePlacement pl = (i % 3 == 0)
                                      ? NoisePlacement::ModeUncorrelated
                                      : NoisePlacement::ModeCorrelated;
        const ProtocolSpec spec = make_spec(kind, du(rng), pl);
        const double eta_t = 0.2 + 3.0 * du(rng);
        const double eta_e = 6.0 * du(rng);
        const double delta = 30.0 * du(rng);
        const OutcomeDistribution wrapped = noisy_distribution(
            spec, model,
            make_noise(eta_e, eta_t, ThetaDistribution::WrappedGaussian), delta);
        const OutcomeDistribution gauss = noisy_distribution(
            spec, model, make_noise(eta_e, eta_t), delta);
        check_triple(wrapped, gauss, 1e-9);
    }
}

TEST_CASE("von Mises endpoints: narrow matches Gaussian, wide matches the "
          "erased-phase limit") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);
    const ProtocolKind kinds[] = {ProtocolKind::MZ2s, ProtocolKind::MZ2d,
                                  ProtocolKind::MZ1};
    for (const ProtocolKind kind : kinds) {
        const double alpha = kind == ProtocolKind::MZ2d ? 0.4 : 1.0;
        const ProtocolSpec spec = make_spec(kind, alpha);
        // Narrow: eta_theta = 1e-3 agrees with the Gaussian family to 1e-6.
        {
            const OutcomeDistribution vm = noisy_distribution(
                spec, model, make_noise(2.0, 1e-3, ThetaDistribution::VonMises),
                5.0);
            const OutcomeDistribution gauss = noisy_distribution(
                spec, model, make_noise(2.0, 1e-3), 5.0);
            check_triple(vm, gauss, 1e-6);
        }
        // Wide: eta_theta = 25 approaches the deleted-phase limit to 1e-3.
        {
            const NoiseSpec wide = make_noise(2.0, 25.0, ThetaDistribution::VonMises);
            const OutcomeDistribution vm =
                noisy_distribution(spec, model, wide, 5.0);
            const OutcomeDistribution limit =
                high_theta_limit_distribution(spec, model, wide, 5.0);
            check_triple(vm, limit, 1e-3);
        }
    }
}

TEST_CASE("kernel agrees with the quadrature reference on unprinted variants") {
    // Mode-uncorrelated independent-photon spot check.
    {
        const ProtocolSpec spec =
            make_spec(ProtocolKind::MZ2d, 0.3, NoisePlacement::ModeUncorrelated);
        const SpectralModel model = make_model(PhotonCorrelation::Independent);
        const NoiseSpec noise = make_noise(1.0, 0.5);
        const OutcomeDistribution kernel =
            noisy_distribution(spec, model, noise, 2.0);
        const auto oracle =
            tpi::oracle::oracle_distribution(spec, model, noise, 2.0);
        check_triple(kernel, oracle.value, 1e-8);
    }
    // Von Mises phases, shared placement.
    {
        const ProtocolSpec spec = make_spec(ProtocolKind::MZ2s, 0.7);
        const SpectralModel model =
            make_model(PhotonCorrelation::FrequencyEntangled);
        const NoiseSpec noise = make_noise(3.0, 0.8, ThetaDistribution::VonMises);
        const OutcomeDistribution kernel =
            noisy_distribution(spec, model, noise, 6.0);
        const auto oracle =
            tpi::oracle::oracle_distribution(spec, model, noise, 6.0);
        check_triple(kernel, oracle.value, 1e-8);
    }
    // Wrapped Gaussian phases, per-rail placement, entangled photons.
    {
        const ProtocolSpec spec =
            make_spec(ProtocolKind::MZ2d, 0.55, NoisePlacement::ModeUncorrelated);
        const SpectralModel model =
            make_model(PhotonCorrelation::FrequencyEntangled);
        const NoiseSpec noise =
            make_noise(2.0, 0.9, ThetaDistribution::WrappedGaussian);
        const OutcomeDistribution kernel =
            noisy_distribution(spec, model, noise, 4.0);
        const auto oracle =
            tpi::oracle::oracle_distribution(spec, model, noise, 4.0);
        check_triple(kernel, oracle.value, 1e-8);
    }
}

TEST_CASE("dip outputs are exactly immune to phase noise") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);
    const ProtocolSpec spec = make_spec(ProtocolKind::HOM, 0.8);
    const OutcomeDistribution base =
        noisy_distribution(spec, model, make_noise(3.0, 0.0), 12.0);
    for (const double eta_t : {1.0, 10.0}) {
        const OutcomeDistribution with_theta =
            noisy_distribution(spec, model, make_noise(3.0, eta_t), 12.0);
        CHECK(with_theta.p1 == base.p1);
        CHECK(with_theta.p2 == base.p2);
        CHECK(with_theta.pc == base.pc);
    }
}

TEST_CASE("frequency-shift noise erases information monotonically at zero "
          "delay") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);
    const double grid[] = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 1000.0};
    for (const ProtocolKind kind : kAllKinds) {
        const double alpha = 0.9;
        const ProtocolSpec spec = make_spec(kind, alpha);
        const bool single = kind == ProtocolKind::MZ1;
        // Distance from the fully-erased (uniform) outcome must shrink as the
        // shift spread grows: |pc - 1/2| nonincreasing (|p1 - 1/2| for the
        // single-photon run, whose pc is identically zero).
        double prev = -1.0;
        for (const double eta_e : grid) {
            const OutcomeDistribution d =
                noisy_distribution(spec, model, make_noise(eta_e, 0.0), 0.0);
            const double dist = single ? std::abs(d.p1 - 0.5)
                                       : std::abs(d.pc - 0.5);
            if (prev >= 0.0) CHECK(dist <= prev + 1e-12);
            prev = dist;
        }
        CHECK(prev < 0.05); // close to uniform by eta_eps = 1000
    }
}

TEST_CASE("splitting the noise across both arms leaves the statistics "
          "unchanged") {
    const SpectralModel fe = make_model(PhotonCorrelation::FrequencyEntangled);
    const SpectralModel ind = make_model(PhotonCorrelation::Independent);
    const NoiseSpec noise = make_noise(4.0, 0.7);
    for (const ProtocolKind kind : kAllKinds) {
        for (const NoisePlacement pl : {NoisePlacement::ModeCorrelated,
                                        NoisePlacement::ModeUncorrelated}) {
            for (const auto* model : {&fe, &ind}) {
                const ProtocolSpec single = make_spec(kind, 0.8, pl);
                const OutcomeDistribution base =
                    noisy_distribution(single, *model, noise, 9.0);
                for (const double f : {0.0, 0.25, 0.5, 1.0}) {
                    ProtocolSpec split = single;
                    split.arms = ArmConfig{true, f, 1.0 - f};
                    const OutcomeDistribution got =
                        noisy_distribution(split, *model, noise, 9.0);
                    INFO("kind " << tpi::to_string(kind) << " placement "
                                 << tpi::to_string(pl) << " f " << f);
                    check_triple(got, base, 1e-9);
                }
            }
        }
    }
}

TEST_CASE("vanishing strengths reproduce the fixed-shift distribution") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);
    for (const ProtocolKind kind : kAllKinds) {
        const ProtocolSpec spec = make_spec(kind, 0.7);
        const OutcomeDistribution fixed =
            tpi::proto::fixed_shift_distribution(spec, model, 8.0, FixedShifts{});
        for (const ThetaDistribution dist :
             {ThetaDistribution::Gaussian, ThetaDistribution::WrappedGaussian,
              ThetaDistribution::VonMises}) {
            const OutcomeDistribution tiny = noisy_distribution(
                spec, model, make_noise(1e-6, 1e-6, dist), 8.0);
            INFO("kind " << tpi::to_string(kind) << " dist "
                         << tpi::to_string(dist));
            check_triple(tiny, fixed, 1e-10);
        }
    }
}

TEST_CASE("erased-phase limit reproduces the printed doubled-run "
          "expressions") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);
    const ProtocolSpec spec = make_spec(ProtocolKind::MZ1x2Correlated, 1.0);
    const double s = model.sigma;

    // At zero spread and zero delay: (3/8, 3/8, 1/4).
    {
        const OutcomeDistribution got = high_theta_limit_distribution(
            spec, model, make_noise(0.0, 0.0), 0.0);
        CHECK(std::abs(got.p1 - 0.375) < 1e-12);
        CHECK(std::abs(got.p2 - 0.375) < 1e-12);
        CHECK(std::abs(got.pc - 0.25) < 1e-12);
    }
    // Grid check against the printed limit laws.
    for (const double delta : {0.0, 5.0, 20.0, 60.0}) {
        for (const double eta_e : {0.0, 1.0, 8.0, 40.0}) {
            const OutcomeDistribution got = high_theta_limit_distribution(
                spec, model, make_noise(eta_e, 0.0), delta);
            const double den = 2.0 * eta_e * eta_e * s * s + 1.0;
            const double x =
                std::exp(-delta * delta * s * s / den) / std::sqrt(den);
            CHECK(std::abs(got.p1 - 0.125 * (2.0 + x)) < 1e-12);
            CHECK(std::abs(got.p2 - 0.125 * (2.0 + x)) < 1e-12);
            CHECK(std::abs(got.pc - 0.25 * (2.0 - x)) < 1e-12);
        }
    }
    // Single run: phase erasure leaves a coin flip at every delay.
    for (const double delta : {0.0, 3.0, 17.0}) {
        const OutcomeDistribution got = high_theta_limit_distribution(
            make_spec(ProtocolKind::MZ1, 1.0), model, make_noise(2.0, 0.0),
            delta);
        CHECK(std::abs(got.p1 - 0.5) < 1e-12);
        CHECK(std::abs(got.p2 - 0.5) < 1e-12);
        CHECK(std::abs(got.pc) < 1e-12);
    }
    // The dip has no phase dependence to erase.
    CHECK_THROWS_AS(high_theta_limit_distribution(
                        make_spec(ProtocolKind::HOM, 1.0), model,
                        make_noise(1.0, 0.0), 1.0),
                    tpi::error);
}

TEST_CASE("erased-phase same-port pair versus the independent-photon dip at "
          "half visibility") {
    // The two constructions are claimed to carry the same information; their
    // probability distributions are close but NOT identical.  Computed and
    // reported here rather than assumed.
    const SpectralModel fe = make_model(PhotonCorrelation::FrequencyEntangled);
    const SpectralModel ind = make_model(PhotonCorrelation::Independent);
    const ProtocolSpec mz2s = make_spec(ProtocolKind::MZ2s, 1.0);
    const ProtocolSpec hom_half = make_spec(ProtocolKind::HOM, 0.5);
    const NoiseSpec off = make_noise(0.0, 0.0);

    // Near the dip the curves nearly coincide ...
    {
        const OutcomeDistribution a =
            high_theta_limit_distribution(mz2s, fe, off, 2.0 / fe.pump);
        const OutcomeDistribution b =
            noisy_distribution(hom_half, ind, off, 2.0 / fe.pump);
        const double near_diff = std::abs(a.pc - b.pc);
        INFO("|pc difference| at delta * pump = 2: " << near_diff);
        CHECK(near_diff > 1e-5);  // genuinely different distributions
        CHECK(near_diff < 5e-4);  // but only slightly, close to the dip
    }
    // ... while at larger delay the different spectral widths separate them.
    double max_diff = 0.0;
    for (double dwp = 0.0; dwp <= 60.0; dwp += 2.0) {
        const OutcomeDistribution a =
            high_theta_limit_distribution(mz2s, fe, off, dwp);
        const OutcomeDistribution b = noisy_distribution(hom_half, ind, off, dwp);
        max_diff = std::max(max_diff, std::abs(a.pc - b.pc));
    }
    INFO("max |pc difference| over the delay grid: " << max_diff);
    CHECK(max_diff > 1e-2);
    CHECK(max_diff < 7e-2);
}

TEST_CASE("noise-averaged outputs stay normalized across random "
          "configurations") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> du(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        const ProtocolKind kind = kAllKinds[i % 5];
        const NoisePlacement pl = (i % 2 == 0)
                                      ? NoisePlacement::ModeCorrelated
                                      : NoisePlacement::ModeUncorrelated;
        const PhotonCorrelation corr = (i % 3 == 0)
                                           ? PhotonCorrelation::Independent
                                           : PhotonCorrelation::FrequencyEntangled;
        const ThetaDistribution dist =
            i % 4 == 1 ? ThetaDistribution::VonMises
                       : (i % 4 == 2 ? ThetaDistribution::WrappedGaussian
                                     : ThetaDistribution::Gaussian);
        const ProtocolSpec spec = make_spec(kind, du(rng), pl);
        const SpectralModel model = make_model(corr);
        const NoiseSpec noise =
            make_noise(10.0 * du(rng), 2.0 * du(rng), dist);
        const double delta = -50.0 + 100.0 * du(rng);
        const OutcomeDistribution d = noisy_distribution(spec, model, noise, delta);
        CHECK(std::abs(d.sum() - 1.0) < 1e-10);
        CHECK(d.p1 >= -1e-12);
        CHECK(d.p2 >= -1e-12);
        CHECK(d.pc >= -1e-12);
    }
}

TEST_CASE("kernel delta derivatives match finite differences") {
    const SpectralModel model = make_model(PhotonCorrelation::FrequencyEntangled);
    const ProtocolSpec spec = make_spec(ProtocolKind::MZ2s, 0.8);
    const NoiseKernel kernel(spec, model, make_noise(2.0, 0.3));
    const double h = 1e-5;
    for (const double delta : {0.5, 4.0, 11.0}) {
        const OutcomeDistribution d = kernel.derivative(delta);
        const OutcomeDistribution hi = kernel.distribution(delta + h);
        const OutcomeDistribution lo = kernel.distribution(delta - h);
        CHECK(std::abs(d.p1 - (hi.p1 - lo.p1) / (2.0 * h)) < 1e-6);
        CHECK(std::abs(d.p2 - (hi.p2 - lo.p2) / (2.0 * h)) < 1e-6);
        CHECK(std::abs(d.pc - (hi.pc - lo.pc) / (2.0 * h)) < 1e-6);
    }
}
