#ifndef TPI_PROTOCOLS_HPP
#define TPI_PROTOCOLS_HPP

// Symbolic construction of the outcome probabilities for every protocol
// variant.  Each photon is propagated through the interferometer as a small
// sum of Gaussian-exponential terms (see term.hpp) whose variables are the
// unknown delay ("delta") and the random shifts; squaring the amplitudes,
// applying the photon-counting reduction and integrating out the optical
// frequencies yields closed TermSums over {delta} + shift variables.  The
// shift variables can then be bound to fixed values or averaged over noise
// distributions downstream.
//
// Mode layout: the interferometer has two arms (arm 1 carries no delay,
// arm 2 carries the signal delay delta), and each photon lives on one of two
// polarization-like rails: the interfering rail ("c") and the
// distinguishable rail ("d") introduced by imperfect visibility.  Detector
// modes e1/e2 collect the c rail, f1/f2 the d rail; a detector counts the
// sum of both rails at its port (1: e1+f1, 2: e2+f2).
//
// Shift variable names follow the placement:
//   mode-correlated:    "eps", "theta"            (+ "_arm2" when both arms)
//   mode-uncorrelated:  "eps1","theta1" (c rail), "eps2","theta2" (d rail)
//                                                  (+ "_arm2" variants)
// Single-photon runs never populate the d rail, so placement does not
// affect them and the mode-correlated names are used.

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tpi/closed_forms.hpp"
#include "tpi/errors.hpp"
#include "tpi/model.hpp"
#include "tpi/term.hpp"

namespace tpi::proto {

using term::cplx;
using term::GaussTerm;
using term::TermSum;

// A complex amplitude as an implicit sum of Gaussian-exponential terms.
using Amp = std::vector<GaussTerm>;

// Outcome probabilities as functions of "delta" and the shift variables.
struct ProbabilityTerms {
    TermSum p1;
    TermSum p2;
    TermSum pc;
};

// One independent random-shift pair, with the factors that multiply the
// global strengths (eta_eps, eta_theta) for this channel.  Splitting the
// noise over both arms gives arm 1 the factor sqrt(f) and arm 2 the factor
// sqrt(1-f), so the total variance is conserved.
struct NoiseChannel {
    std::string eps_var;
    std::string theta_var;
    double eps_scale = 1.0;
    double theta_scale = 1.0;
};

namespace detail {

inline bool has_two_photons(ProtocolKind k) {
    return k == ProtocolKind::HOM || k == ProtocolKind::MZ2s ||
           k == ProtocolKind::MZ2d;
}

// Detector-mode indices.
enum OutMode : int { E1 = 0, E2 = 1, F1 = 2, F2 = 3 };

// Frequency argument of a phase: nu = sign * var + offset.
struct Freq {
    std::string var;
    double sign;
    double offset;
};

// Shift variable names carried by one (rail, arm) slot; empty = no shift.
struct ShiftVars {
    std::string eps;
    std::string theta;
};

struct RailPlan {
    ShiftVars at[2][2]; // [rail: 0 = c, 1 = d][arm: 0, 1]
};

inline RailPlan make_rail_plan(const ProtocolSpec& spec) {
    RailPlan plan;
    const bool mu = has_two_photons(spec.kind) &&
                    spec.placement == NoisePlacement::ModeUncorrelated;
    const bool both = spec.arms.both_arms;
    if (mu) {
        plan.at[0][0] = {"eps1", "theta1"};
        plan.at[1][0] = {"eps2", "theta2"};
        if (both) {
            plan.at[0][1] = {"eps1_arm2", "theta1_arm2"};
            plan.at[1][1] = {"eps2_arm2", "theta2_arm2"};
        }
    } else {
        plan.at[0][0] = plan.at[1][0] = {"eps", "theta"};
        if (both) plan.at[0][1] = plan.at[1][1] = {"eps_arm2", "theta_arm2"};
    }
    return plan;
}

// Multiply a term by the propagation phase of one (rail, arm) slot:
// exp(-i * nu * (delay + eps)) * exp(-i * theta), with delay = 0 on arm 1
// and the symbolic "delta" on arm 2.
inline void apply_arm_phase(GaussTerm& t, const Freq& nu, int arm,
                            const ShiftVars& sv) {
    auto add_time = [&](const std::string& v) {
        if (nu.offset != 0.0) t.add_exp_linear(v, cplx{0.0, -nu.offset});
        if (nu.sign != 0.0) t.add_exp_quadratic(nu.var, v, cplx{0.0, -nu.sign});
    };
    if (arm == 1) add_time("delta");
    if (!sv.eps.empty()) add_time(sv.eps);
    if (!sv.theta.empty()) t.add_exp_linear(sv.theta, cplx{0.0, -1.0});
}

// Input ports.  A/B are the two ports of the input beam splitter feeding the
// c/d rails; C/D inject straight onto a rail-arm (no input splitter).
enum class InMode { A1, A2, B1, B2, C1, C2, D1, D2 };

struct PathCoeff {
    int rail;
    int arm;
    cplx coeff;
};

inline std::vector<PathCoeff> input_paths(InMode m) {
    const cplx I{0.0, 1.0};
    const cplx R{1.0 / std::numbers::sqrt2, 0.0};
    switch (m) {
        case InMode::A1: return {{0, 0, I * R}, {0, 1, R}};
        case InMode::A2: return {{0, 0, R}, {0, 1, I * R}};
        case InMode::B1: return {{1, 0, I * R}, {1, 1, R}};
        case InMode::B2: return {{1, 0, R}, {1, 1, I * R}};
        case InMode::C1: return {{0, 0, cplx{1.0, 0.0}}};
        case InMode::C2: return {{0, 1, cplx{1.0, 0.0}}};
        case InMode::D1: return {{1, 0, cplx{1.0, 0.0}}};
        case InMode::D2: return {{1, 1, cplx{1.0, 0.0}}};
    }
    throw error("input_paths: unknown input mode");
}

inline std::array<std::pair<int, cplx>, 2> output_paths(int rail, int arm) {
    const cplx I{0.0, 1.0};
    const cplx R{1.0 / std::numbers::sqrt2, 0.0};
    const int port1 = rail == 0 ? E1 : F1;
    const int port2 = rail == 0 ? E2 : F2;
    if (arm == 0) return {{{port1, I * R}, {port2, R}}};
    return {{{port1, R}, {port2, I * R}}};
}

// Amplitudes of one photon, entering at `m` with frequency `nu`, reaching
// each detector mode.
struct PhotonMap {
    std::array<Amp, 4> out;
};

inline PhotonMap photon_map(InMode m, const Freq& nu, const RailPlan& plan) {
    PhotonMap pm;
    for (const PathCoeff& in : input_paths(m)) {
        GaussTerm base = GaussTerm::constant(in.coeff);
        apply_arm_phase(base, nu, in.arm, plan.at[in.rail][in.arm]);
        for (const auto& [det, k] : output_paths(in.rail, in.arm)) {
            GaussTerm t = base;
            t.z *= k;
            pm.out[static_cast<std::size_t>(det)].push_back(std::move(t));
        }
    }
    return pm;
}

// Gaussian spectral amplitude of width sigma in the centered frequency
// variable nu = omega - pump/2.  Working with centered variables keeps every
// term amplitude O(1); the actual frequency enters the phases through the
// affine Freq arguments below.
inline GaussTerm jsa_factor(const std::string& var, double sigma) {
    const double s2 = sigma * sigma;
    GaussTerm t = GaussTerm::constant(
        cplx{std::pow(2.0 * std::numbers::pi * s2, -0.25), 0.0});
    t.add_exp_quadratic(var, var, cplx{-1.0 / (4.0 * s2), 0.0});
    return t;
}

inline Amp amp_scaled(Amp a, cplx s) {
    for (auto& t : a) t.z *= s;
    return a;
}

inline Amp amp_product(const Amp& a, const Amp& b) {
    Amp out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a)
        for (const auto& y : b) out.push_back(term::product(x, y));
    return out;
}

inline Amp amp_product(const GaussTerm& x, const Amp& b) {
    Amp out;
    out.reserve(b.size());
    for (const auto& y : b) out.push_back(term::product(x, y));
    return out;
}

inline Amp amp_sum(Amp a, const Amp& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline Amp amp_reflected(const Amp& a, const std::string& var, double c) {
    Amp out;
    out.reserve(a.size());
    for (const auto& t : a) out.push_back(term::reflected(t, var, c));
    return out;
}

inline Amp amp_swapped(const Amp& a, const std::string& v1,
                       const std::string& v2) {
    Amp out;
    out.reserve(a.size());
    for (const auto& t : a) out.push_back(term::swapped(t, v1, v2));
    return out;
}

// Accumulate |a|^2 * scale = sum_{x,y} x * conj(y) * scale.
inline void abs_squared_into(std::vector<GaussTerm>& acc, const Amp& a,
                             double scale = 1.0) {
    for (const auto& x : a)
        for (const auto& y : a) {
            GaussTerm t = term::product(x, term::conjugated(y));
            t.z *= scale;
            acc.push_back(std::move(t));
        }
}

// Which input port carries the plain photon, and which ports carry the
// interfering / distinguishable components of the split photon.
struct PortAssignment {
    InMode plain;
    InMode split_keep;
    InMode split_flip;
};

inline PortAssignment port_assignment(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::HOM:
            return {InMode::C1, InMode::C2, InMode::D2};
        case ProtocolKind::MZ2s:
            return {InMode::A1, InMode::A1, InMode::B1};
        case ProtocolKind::MZ2d:
            return {InMode::A1, InMode::A2, InMode::B2};
        default:
            throw error("port_assignment: not a two-photon layout");
    }
}

inline ProbabilityTerms build_two_photon(const ProtocolSpec& spec,
                                         const SpectralModel& model) {
    const PortAssignment ports = port_assignment(spec.kind);
    const double alpha = spec.visibility;
    // Same-port injection needs the bosonic norm 1/(1+alpha).
    const double norm2 =
        spec.kind == ProtocolKind::MZ2s ? 1.0 / (1.0 + alpha) : 1.0;
    const double w_keep = std::sqrt(alpha * norm2);
    const double w_flip = std::sqrt((1.0 - alpha) * norm2);
    const RailPlan plan = make_rail_plan(spec);

    Amp ee[2][2]; // C[e_i, e_j]: both photons on the interfering rail
    Amp ef[2][2]; // C[e_i, f_j]: split photon's distinguishable component

    std::vector<GaussTerm> t1, t2, tc;

    const double half_pump = model.pump / 2.0;

    if (model.correlation == PhotonCorrelation::FrequencyEntangled) {
        // Joint amplitude C(w), w = centered frequency of the split photon:
        // the split photon sits at pump/2 + w, the plain one at pump/2 - w.
        const std::string w = "w";
        const PhotonMap mp = photon_map(ports.plain, Freq{w, -1.0, half_pump}, plan);
        const PhotonMap mk = photon_map(ports.split_keep, Freq{w, 1.0, half_pump}, plan);
        const PhotonMap mf = photon_map(ports.split_flip, Freq{w, 1.0, half_pump}, plan);
        const GaussTerm J = jsa_factor(w, model.sigma);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                ee[i][j] = amp_scaled(
                    amp_product(J, amp_product(mp.out[i], mk.out[j])),
                    cplx{w_keep, 0.0});
                ef[i][j] = amp_scaled(
                    amp_product(J, amp_product(mp.out[i], mf.out[2 + j])),
                    cplx{w_flip, 0.0});
            }
        // Exchanging the photons' frequencies negates the centered variable.
        auto mirrored = [&](const Amp& a) { return amp_reflected(a, w, 0.0); };
        abs_squared_into(t1, ef[0][0]);
        abs_squared_into(t1, amp_sum(ee[0][0], mirrored(ee[0][0])), 0.5);
        abs_squared_into(t2, ef[1][1]);
        abs_squared_into(t2, amp_sum(ee[1][1], mirrored(ee[1][1])), 0.5);
        abs_squared_into(tc, ef[0][1]);
        abs_squared_into(tc, ef[1][0]);
        abs_squared_into(tc, amp_sum(ee[0][1], mirrored(ee[1][0])));

        ProbabilityTerms out;
        out.p1 = merged(integrate_unweighted(TermSum(std::move(t1)), w));
        out.p2 = merged(integrate_unweighted(TermSum(std::move(t2)), w));
        out.pc = merged(integrate_unweighted(TermSum(std::move(tc)), w));
        return out;
    }

    // Separable pair C(w1, w2), both frequencies centered: split photon at
    // pump/2 + w1, plain photon at pump/2 + w2.
    const std::string w1 = "w1";
    const std::string w2 = "w2";
    const PhotonMap mp = photon_map(ports.plain, Freq{w2, 1.0, half_pump}, plan);
    const PhotonMap mk = photon_map(ports.split_keep, Freq{w1, 1.0, half_pump}, plan);
    const PhotonMap mf = photon_map(ports.split_flip, Freq{w1, 1.0, half_pump}, plan);
    const GaussTerm J = term::product(jsa_factor(w1, model.sigma),
                                      jsa_factor(w2, model.sigma));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            ee[i][j] = amp_scaled(
                amp_product(J, amp_product(mp.out[i], mk.out[j])),
                cplx{w_keep, 0.0});
            ef[i][j] = amp_scaled(
                amp_product(J, amp_product(mp.out[i], mf.out[2 + j])),
                cplx{w_flip, 0.0});
        }
    auto exchanged = [&](const Amp& a) { return amp_swapped(a, w1, w2); };
    abs_squared_into(t1, ef[0][0]);
    abs_squared_into(t1, amp_sum(ee[0][0], exchanged(ee[0][0])), 0.5);
    abs_squared_into(t2, ef[1][1]);
    abs_squared_into(t2, amp_sum(ee[1][1], exchanged(ee[1][1])), 0.5);
    abs_squared_into(tc, exchanged(ef[0][1]));
    abs_squared_into(tc, ef[1][0]);
    abs_squared_into(tc, amp_sum(exchanged(ee[0][1]), ee[1][0]));

    auto reduce = [&](std::vector<GaussTerm> terms) {
        TermSum s(std::move(terms));
        s = integrate_unweighted(s, w1);
        s = integrate_unweighted(s, w2);
        return merged(s);
    };
    ProbabilityTerms out;
    out.p1 = reduce(std::move(t1));
    out.p2 = reduce(std::move(t2));
    out.pc = reduce(std::move(tc));
    return out;
}

inline ProbabilityTerms build_single_photon(const ProtocolSpec& spec,
                                            const SpectralModel& model) {
    const RailPlan plan = make_rail_plan(spec);
    const std::string w = "w"; // centered frequency: photon at pump/2 + w
    const PhotonMap m = photon_map(InMode::A1, Freq{w, 1.0, model.pump / 2.0}, plan);
    const GaussTerm J = jsa_factor(w, model.sigma);
    std::vector<GaussTerm> t1, t2;
    abs_squared_into(t1, amp_product(J, m.out[E1]));
    abs_squared_into(t2, amp_product(J, m.out[E2]));
    ProbabilityTerms out;
    out.p1 = merged(integrate_unweighted(TermSum(std::move(t1)), w));
    out.p2 = merged(integrate_unweighted(TermSum(std::move(t2)), w));
    out.pc = TermSum(); // identically zero
    return out;
}

} // namespace detail

// Independent random-shift channels for a protocol, with per-channel
// strength factors (see NoiseChannel).
inline std::vector<NoiseChannel> noise_channels(const ProtocolSpec& spec) {
    const bool mu = detail::has_two_photons(spec.kind) &&
                    spec.placement == NoisePlacement::ModeUncorrelated;
    const bool both = spec.arms.both_arms;
    const double f_e = both ? spec.arms.f_eps : 1.0;
    const double f_t = both ? spec.arms.f_theta : 1.0;
    const double a1e = std::sqrt(f_e);
    const double a1t = std::sqrt(f_t);
    const double a2e = std::sqrt(1.0 - f_e);
    const double a2t = std::sqrt(1.0 - f_t);
    std::vector<NoiseChannel> out;
    if (mu) {
        out.push_back({"eps1", "theta1", a1e, a1t});
        out.push_back({"eps2", "theta2", a1e, a1t});
        if (both) {
            out.push_back({"eps1_arm2", "theta1_arm2", a2e, a2t});
            out.push_back({"eps2_arm2", "theta2_arm2", a2e, a2t});
        }
    } else {
        out.push_back({"eps", "theta", a1e, a1t});
        if (both) out.push_back({"eps_arm2", "theta_arm2", a2e, a2t});
    }
    return out;
}

// Bindings for every shift variable any build can emit (unused entries are
// ignored by evaluation).  mode2 pairs feed the distinguishable rail under
// mode-uncorrelated placement.
inline std::map<std::string, double> shift_bindings(double delta,
                                                    const FixedShifts& sh) {
    return {
        {"delta", delta},
        {"eps", sh.mode1.eps},
        {"theta", sh.mode1.theta},
        {"eps_arm2", sh.mode1_arm2.eps},
        {"theta_arm2", sh.mode1_arm2.theta},
        {"eps1", sh.mode1.eps},
        {"theta1", sh.mode1.theta},
        {"eps2", sh.mode2.eps},
        {"theta2", sh.mode2.theta},
        {"eps1_arm2", sh.mode1_arm2.eps},
        {"theta1_arm2", sh.mode1_arm2.theta},
        {"eps2_arm2", sh.mode2_arm2.eps},
        {"theta2_arm2", sh.mode2_arm2.theta},
    };
}

// Build the symbolic outcome probabilities for a protocol variant.  The
// result's TermSums depend on "delta" and the shift variables named by
// noise_channels(spec).
inline ProbabilityTerms build_probability_terms(const ProtocolSpec& spec,
                                                const SpectralModel& model) {
    spec.validate();
    model.validate();
    switch (spec.kind) {
        case ProtocolKind::HOM:
        case ProtocolKind::MZ2s:
        case ProtocolKind::MZ2d:
            return detail::build_two_photon(spec, model);
        case ProtocolKind::MZ1:
            return detail::build_single_photon(spec, model);
        case ProtocolKind::MZ1x2Correlated: {
            ProtocolSpec single = spec;
            single.kind = ProtocolKind::MZ1;
            const ProbabilityTerms q = detail::build_single_photon(single, model);
            ProbabilityTerms out;
            out.p1 = merged(term::multiply(q.p1, q.p1));
            out.p2 = merged(term::multiply(q.p2, q.p2));
            out.pc = merged(scaled(term::multiply(q.p1, q.p2), 2.0));
            return out;
        }
    }
    throw error("build_probability_terms: unknown protocol");
}

inline OutcomeDistribution evaluate_distribution(const ProbabilityTerms& pt,
                                                 double delta,
                                                 const FixedShifts& shifts) {
    const auto at = shift_bindings(delta, shifts);
    OutcomeDistribution d;
    d.p1 = term::evaluate(pt.p1, at);
    d.p2 = term::evaluate(pt.p2, at);
    d.pc = term::evaluate(pt.pc, at);
    return d;
}

// Outcome probabilities at fixed shift values.  Canonical variants (single
// arm, and mode-correlated placement for two-photon layouts) use the
// hand-derived closed forms; everything else evaluates the symbolic build.
inline OutcomeDistribution fixed_shift_distribution(const ProtocolSpec& spec,
                                                    const SpectralModel& model,
                                                    double delta,
                                                    const FixedShifts& shifts) {
    spec.validate();
    model.validate();
    const bool single_arm = !spec.arms.both_arms;
    const bool fe = model.correlation == PhotonCorrelation::FrequencyEntangled;
    const bool mc = spec.placement == NoisePlacement::ModeCorrelated;
    const double a = spec.visibility;
    const double s = model.sigma;
    const double wp = model.pump;
    const ShiftPair& m1 = shifts.mode1;
    switch (spec.kind) {
        case ProtocolKind::MZ1:
            if (single_arm) return closed::mz1(wp, s, delta, m1.eps, m1.theta);
            break;
        case ProtocolKind::MZ1x2Correlated:
            if (single_arm) return closed::mz1x2(wp, s, delta, m1.eps, m1.theta);
            break;
        case ProtocolKind::HOM:
            if (single_arm && mc)
                return fe ? closed::hom_entangled(a, s, delta, m1.eps)
                          : closed::hom_independent(a, s, delta, m1.eps);
            break;
        case ProtocolKind::MZ2s:
            if (single_arm && mc && fe)
                return closed::mz2s_entangled(wp, s, delta, m1.eps, m1.theta);
            break;
        case ProtocolKind::MZ2d:
            if (single_arm && mc && fe)
                return closed::mz2d_entangled(a, wp, s, delta, m1.eps, m1.theta);
            break;
    }
    return evaluate_distribution(build_probability_terms(spec, model), delta, shifts);
}

} // namespace tpi::proto

#endif // TPI_PROTOCOLS_HPP
