#ifndef TPI_MODEL_HPP
#define TPI_MODEL_HPP

// Domain types shared across the library: protocol selection, spectral model,
// noise description, fixed phase shifts, and outcome distributions.
//
// Unit conventions: internally the pump frequency is 1, so delays and
// frequency-dependent shift strengths are in pump periods (delta*wp,
// eta_eps*wp) and sigma is a fraction of the pump frequency.  All public I/O
// uses these dimensionless combinations.

#include <cmath>
#include <iostream>
#include <string>

#include "tpi/errors.hpp"

namespace tpi {

// Interferometer layout / photon-counting scheme.
enum class ProtocolKind {
    HOM,              // two photons meet directly at one beam splitter
    MZ2s,             // both photons into the same MZ input port
    MZ2d,             // photons into different MZ input ports
    MZ1,              // one photon through the MZ
    MZ1x2Correlated,  // two MZ1 runs sharing the same (unknown) shifts
};

// Joint spectrum of the photon pair.
enum class PhotonCorrelation {
    FrequencyEntangled, // anti-correlated frequencies summing to the pump
    Independent,        // separable pair, each photon with the same spectrum
};

// Whether the distinguishable mode component sees the same random shifts as
// the indistinguishable one.
enum class NoisePlacement {
    ModeCorrelated,   // one (eps, theta) pair applies to both mode rails
    ModeUncorrelated, // the two rails carry independent shift pairs
};

// Distribution family of the frequency-independent shift theta.
enum class ThetaDistribution {
    Gaussian,        // unbounded normal; fully analytic path
    WrappedGaussian, // normal wrapped onto [-pi, pi]; validation path
    VonMises,        // circular analogue; quadrature path
};

// Noise location along the interferometer arms.  Single-arm noise is the
// default; both_arms splits the total strengths between the arms with
// per-arm strengths (sqrt(f) * eta, sqrt(1-f) * eta), so f = 1 reproduces
// the single-arm model exactly.
struct ArmConfig {
    bool both_arms = false;
    double f_eps = 1.0;
    double f_theta = 1.0;
};

struct SpectralModel {
    double pump = 1.0;   // fixed normalization; kept explicit for clarity
    double sigma = 0.01; // spectral width in pump units
    PhotonCorrelation correlation = PhotonCorrelation::FrequencyEntangled;

    void validate() const {
        if (!(sigma > 0.0)) throw error("SpectralModel: sigma must be positive");
        if (sigma > pump / 4.0)
            std::cerr << "warning: spectral width sigma = " << sigma
                      << " exceeds pump/4; narrowband assumptions are strained\n";
    }
};

struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::HOM;
    double visibility = 1.0; // alpha in [0, 1]; ignored by MZ1
    NoisePlacement placement = NoisePlacement::ModeCorrelated;
    ArmConfig arms{};

    void validate() const {
        if (!(visibility >= 0.0 && visibility <= 1.0))
            throw error("ProtocolSpec: visibility must lie in [0, 1]");
        if (arms.both_arms &&
            !(arms.f_eps >= 0.0 && arms.f_eps <= 1.0 && arms.f_theta >= 0.0 &&
              arms.f_theta <= 1.0))
            throw error("ProtocolSpec: arm split fractions must lie in [0, 1]");
    }
};

// One (eps, theta) shift pair: eps multiplies the optical frequency in the
// phase, theta is frequency independent.
struct ShiftPair {
    double eps = 0.0;
    double theta = 0.0;
};

// Concrete shift values for one evaluation.  mode1 is the only pair read for
// ModeCorrelated placement; mode2 is the distinguishable rail's pair under
// ModeUncorrelated.  The *_arm2 pairs are read only when arms.both_arms.
struct FixedShifts {
    ShiftPair mode1{};
    ShiftPair mode2{};
    ShiftPair mode1_arm2{};
    ShiftPair mode2_arm2{};
};

struct NoiseSpec {
    double eta_eps = 0.0;   // strength of eps, in pump periods (eta_eps * wp)
    double eta_theta = 0.0; // strength of theta, radians
    ThetaDistribution theta_dist = ThetaDistribution::Gaussian;

    void validate() const {
        if (!(eta_eps >= 0.0) || !(eta_theta >= 0.0))
            throw error("NoiseSpec: noise strengths must be nonnegative");
    }
};

// Probabilities of the three counting outcomes: all photons at detector 1,
// all at detector 2, one at each (always 0 for single-photon running).
struct OutcomeDistribution {
    double p1 = 0.0;
    double p2 = 0.0;
    double pc = 0.0;

    double sum() const { return p1 + p2 + pc; }
};

inline std::string to_string(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::HOM: return "hom";
        case ProtocolKind::MZ2s: return "mz2s";
        case ProtocolKind::MZ2d: return "mz2d";
        case ProtocolKind::MZ1: return "mz1";
        case ProtocolKind::MZ1x2Correlated: return "mz1x2";
    }
    return "?";
}

inline std::string to_string(PhotonCorrelation c) {
    return c == PhotonCorrelation::FrequencyEntangled ? "entangled" : "independent";
}

inline std::string to_string(NoisePlacement p) {
    return p == NoisePlacement::ModeCorrelated ? "mode-correlated" : "mode-uncorrelated";
}

inline std::string to_string(ThetaDistribution d) {
    switch (d) {
        case ThetaDistribution::Gaussian: return "gaussian";
        case ThetaDistribution::WrappedGaussian: return "wrapped-gaussian";
        case ThetaDistribution::VonMises: return "von-mises";
    }
    return "?";
}

} // namespace tpi

#endif // TPI_MODEL_HPP
