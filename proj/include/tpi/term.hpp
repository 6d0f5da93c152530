#ifndef TPI_TERM_HPP
#define TPI_TERM_HPP

// Exact algebra over sums of complex Gaussian-exponential terms in named real
// variables.  A single term holds
//
//     value(v) = z * prod_i v_i^pow[i] * exp(-1/2 v^T A v + b^T v)
//
// with complex z, complex symmetric A and complex b.  A GaussTerm is a
// complex-valued object; a TermSum represents Re[sum of its terms] and is the
// public currency of the library: probabilities and their derivatives are
// TermSums.  Multiplication, Gaussian-weighted and unweighted integration
// (complete-the-square / Schur complement), differentiation, substitution and
// pointwise evaluation are all closed operations on TermSums.
//
// Polynomial prefactors are represented monomial-per-term: a general
// per-variable polynomial is the corresponding sum of monomial terms, which
// integration and differentiation produce and consume naturally.
//
// Everything here is immutable-after-construction and safe to share across
// threads.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "tpi/errors.hpp"

namespace tpi::term {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// GaussTerm
// ---------------------------------------------------------------------------

struct GaussTerm {
    std::vector<std::string> vars; // ordered variable names
    cplx z{1.0, 0.0};              // amplitude
    std::vector<cplx> quad;        // n*n symmetric matrix A, row-major
    std::vector<cplx> lin;         // n-vector b
    std::vector<int> pow;          // n monomial exponents, each >= 0

    GaussTerm() = default;

    static GaussTerm constant(cplx amplitude) {
        GaussTerm t;
        t.z = amplitude;
        return t;
    }

    std::size_t size() const { return vars.size(); }

    cplx& A(std::size_t i, std::size_t j) { return quad[i * size() + j]; }
    const cplx& A(std::size_t i, std::size_t j) const { return quad[i * size() + j]; }

    int index_of(std::string_view name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == name) return static_cast<int>(i);
        return -1;
    }

    // Add a variable (quadratic/linear coefficients zero) if not present;
    // returns its index either way.
    std::size_t ensure_var(std::string_view name) {
        int idx = index_of(name);
        if (idx >= 0) return static_cast<std::size_t>(idx);
        const std::size_t n = size();
        std::vector<cplx> grown((n + 1) * (n + 1), cplx{0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) grown[i * (n + 1) + j] = quad[i * n + j];
        quad = std::move(grown);
        lin.push_back(cplx{0.0, 0.0});
        pow.push_back(0);
        vars.emplace_back(name);
        return n;
    }

    // exponent += c * v
    void add_exp_linear(std::string_view var, cplx c) {
        lin[ensure_var(var)] += c;
    }

    // exponent += c * v1 * v2  (v1 == v2 allowed)
    void add_exp_quadratic(std::string_view v1, std::string_view v2, cplx c) {
        const std::size_t i = ensure_var(v1);
        const std::size_t j = ensure_var(v2);
        if (i == j) {
            A(i, i) += -2.0 * c;
        } else {
            A(i, j) += -c;
            A(j, i) += -c;
        }
    }

    // prefactor *= v^k
    void mul_power(std::string_view var, int k) {
        pow[ensure_var(var)] += k;
    }

    // Complex value of this single term at a real point (no Re[] taken).
    cplx value(const std::map<std::string, double>& at) const {
        const std::size_t n = size();
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto it = at.find(vars[i]);
            if (it == at.end())
                throw UnboundVariable("unbound variable '" + vars[i] + "' in evaluation");
            v[i] = it->second;
        }
        cplx expo{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            expo += lin[i] * v[i];
            for (std::size_t j = 0; j < n; ++j) expo -= 0.5 * A(i, j) * v[i] * v[j];
        }
        cplx val = z * std::exp(expo);
        for (std::size_t i = 0; i < n; ++i)
            for (int k = 0; k < pow[i]; ++k) val *= v[i];
        return val;
    }
};

namespace detail {

// Reorder a term's variables into sorted order (canonical form for merging).
inline GaussTerm canonical(const GaussTerm& t) {
    const std::size_t n = t.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return t.vars[a] < t.vars[b]; });
    GaussTerm out;
    out.z = t.z;
    out.vars.resize(n);
    out.lin.resize(n);
    out.pow.resize(n);
    out.quad.assign(n * n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        out.vars[i] = t.vars[perm[i]];
        out.lin[i] = t.lin[perm[i]];
        out.pow[i] = t.pow[perm[i]];
        for (std::size_t j = 0; j < n; ++j) out.quad[i * n + j] = t.A(perm[i], perm[j]);
    }
    return out;
}

inline bool close(cplx a, cplx b, double tol) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= tol * scale;
}

// Structural equality of two canonical terms up to `tol` on A and b entries;
// powers and variable sets must match exactly.
inline bool mergeable(const GaussTerm& a, const GaussTerm& b, double tol) {
    if (a.vars != b.vars || a.pow != b.pow) return false;
    for (std::size_t i = 0; i < a.lin.size(); ++i)
        if (!close(a.lin[i], b.lin[i], tol)) return false;
    for (std::size_t i = 0; i < a.quad.size(); ++i)
        if (!close(a.quad[i], b.quad[i], tol)) return false;
    return true;
}

// Multivariate polynomial over a fixed variable list: exponent vector -> coeff.
using Poly = std::map<std::vector<int>, cplx>;

inline Poly poly_mul(const Poly& p, const Poly& q) {
    Poly r;
    for (const auto& [ep, cp] : p)
        for (const auto& [eq, cq] : q) {
            std::vector<int> e(ep.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ep[i] + eq[i];
            r[e] += cp * cq;
        }
    return r;
}

inline void poly_axpy(Poly& r, cplx a, const Poly& p) {
    for (const auto& [e, c] : p) r[e] += a * c;
}

} // namespace detail

// Complex product of two terms (variable universes are merged).  This is the
// building block for |amplitude|^2 integrands; it carries no Re[] semantics.
inline GaussTerm product(const GaussTerm& a, const GaussTerm& b) {
    GaussTerm r = a;
    r.z *= b.z;
    for (std::size_t j = 0; j < b.size(); ++j) {
        const std::size_t idx = r.ensure_var(b.vars[j]);
        r.lin[idx] += b.lin[j];
        r.pow[idx] += b.pow[j];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        const std::size_t ri = r.ensure_var(b.vars[i]);
        for (std::size_t j = 0; j < b.size(); ++j) {
            const std::size_t rj = r.ensure_var(b.vars[j]);
            r.A(ri, rj) += b.A(i, j);
        }
    }
    return r;
}

// Complex conjugate of a term as a function of its (real) variables.
inline GaussTerm conjugated(const GaussTerm& t) {
    GaussTerm r = t;
    r.z = std::conj(r.z);
    for (auto& c : r.lin) c = std::conj(c);
    for (auto& c : r.quad) c = std::conj(c);
    return r;
}

// Substitute var := value and drop it from the variable set.
inline GaussTerm substituted(const GaussTerm& t, std::string_view var, double value) {
    const int k = t.index_of(var);
    if (k < 0) return t;
    const std::size_t n = t.size();
    const std::size_t uk = static_cast<std::size_t>(k);
    GaussTerm r;
    r.z = t.z;
    cplx expo = t.lin[uk] * value - 0.5 * t.A(uk, uk) * value * value;
    r.z *= std::exp(expo);
    for (int p = 0; p < t.pow[uk]; ++p) r.z *= value;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == uk) continue;
        r.vars.push_back(t.vars[i]);
        r.pow.push_back(t.pow[i]);
        r.lin.push_back(t.lin[i] - t.A(i, uk) * value);
    }
    const std::size_t m = r.vars.size();
    r.quad.assign(m * m, cplx{0.0, 0.0});
    std::size_t ri = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == uk) continue;
        std::size_t rj = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == uk) continue;
            r.quad[ri * m + rj] = t.A(i, j);
            ++rj;
        }
        ++ri;
    }
    return r;
}

// Substitute var := c - var (an affine reflection, used for the omega ->
// omega_p - omega symmetrisation of pair amplitudes).  Requires a monomial
// power of zero in `var`.
inline GaussTerm reflected(const GaussTerm& t, std::string_view var, double c) {
    const int k = t.index_of(var);
    if (k < 0) {
        return t;
    }
    const std::size_t uk = static_cast<std::size_t>(k);
    if (t.pow[uk] != 0)
        throw error("reflected(): monomial power in reflected variable unsupported");
    GaussTerm r = t;
    const std::size_t n = t.size();
    // exp(-1/2 A (c-u)^2 + b (c-u) + sum_j (-A_kj (c-u) v_j)) rewritten in u.
    r.z *= std::exp(-0.5 * t.A(uk, uk) * c * c + t.lin[uk] * c);
    r.lin[uk] = t.A(uk, uk) * c - t.lin[uk];
    for (std::size_t j = 0; j < n; ++j) {
        if (j == uk) continue;
        r.lin[j] -= t.A(uk, j) * c;
        r.A(uk, j) = -t.A(uk, j);
        r.A(j, uk) = -t.A(j, uk);
    }
    return r;
}

// Exchange the names of two variables (relabels arguments; used for the
// omega1 <-> omega2 exchange term of independent-photon amplitudes).
inline GaussTerm swapped(const GaussTerm& t, std::string_view v1, std::string_view v2) {
    GaussTerm r = t;
    const int i = r.index_of(v1);
    const int j = r.index_of(v2);
    if (i >= 0 && j >= 0) {
        std::swap(r.vars[static_cast<std::size_t>(i)], r.vars[static_cast<std::size_t>(j)]);
    } else if (i >= 0) {
        r.vars[static_cast<std::size_t>(i)] = std::string(v2);
    } else if (j >= 0) {
        r.vars[static_cast<std::size_t>(j)] = std::string(v1);
    }
    return r;
}

// ---------------------------------------------------------------------------
// TermSum: Re[ sum of GaussTerms ]
// ---------------------------------------------------------------------------

class TermSum {
public:
    TermSum() = default; // identically zero
    explicit TermSum(std::vector<GaussTerm> terms) : terms_(std::move(terms)) {}

    static TermSum constant(double value) {
        return TermSum({GaussTerm::constant(cplx{value, 0.0})});
    }

    const std::vector<GaussTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    // Union of variable names appearing with any nonzero coefficient/power.
    std::vector<std::string> free_variables() const {
        std::vector<std::string> out;
        for (const auto& t : terms_) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                bool used = t.pow[i] != 0 || t.lin[i] != cplx{0.0, 0.0};
                for (std::size_t j = 0; !used && j < t.size(); ++j)
                    used = t.A(i, j) != cplx{0.0, 0.0};
                if (used && std::find(out.begin(), out.end(), t.vars[i]) == out.end())
                    out.push_back(t.vars[i]);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    bool depends_on(std::string_view var) const {
        for (const auto& name : free_variables())
            if (name == var) return true;
        return false;
    }

private:
    std::vector<GaussTerm> terms_;
};

inline TermSum operator+(const TermSum& a, const TermSum& b) {
    std::vector<GaussTerm> terms = a.terms();
    terms.insert(terms.end(), b.terms().begin(), b.terms().end());
    return TermSum(std::move(terms));
}

inline TermSum scaled(const TermSum& s, double factor) {
    std::vector<GaussTerm> terms = s.terms();
    for (auto& t : terms) t.z *= factor;
    return TermSum(std::move(terms));
}

// Merge structurally identical terms (tolerance 1e-12 on A and b entries) and
// drop terms whose amplitude vanished.  Never changes the evaluation by more
// than ~1e-12 relative.
inline TermSum merged(const TermSum& s, double tol = 1e-12) {
    std::vector<GaussTerm> out;
    for (const auto& raw : s.terms()) {
        GaussTerm t = detail::canonical(raw);
        bool absorbed = false;
        for (auto& u : out) {
            if (detail::mergeable(u, t, tol)) {
                u.z += t.z;
                absorbed = true;
                break;
            }
        }
        if (!absorbed) out.push_back(std::move(t));
    }
    std::vector<GaussTerm> pruned;
    for (auto& t : out)
        if (std::abs(t.z) > 0.0) pruned.push_back(std::move(t));
    return TermSum(std::move(pruned));
}

// Product of two Re[.] sums, expanded exactly via
//   Re[x] Re[y] = 1/2 Re[x y] + 1/2 Re[x conj(y)].
inline TermSum multiply(const TermSum& a, const TermSum& b) {
    std::vector<GaussTerm> out;
    out.reserve(2 * a.size() * b.size());
    for (const auto& x : a.terms()) {
        for (const auto& y : b.terms()) {
            GaussTerm direct = product(x, y);
            direct.z *= 0.5;
            GaussTerm cross = product(x, conjugated(y));
            cross.z *= 0.5;
            out.push_back(std::move(direct));
            out.push_back(std::move(cross));
        }
    }
    return merged(TermSum(std::move(out)));
}

inline TermSum substitute(const TermSum& s, std::string_view var, double value) {
    std::vector<GaussTerm> out;
    out.reserve(s.size());
    for (const auto& t : s.terms()) out.push_back(substituted(t, var, value));
    return merged(TermSum(std::move(out)));
}

namespace detail {

// Integrate one term over `var` on the whole real line.  The term must decay:
// Re(A_kk) > 0.  Returns the list of resulting terms (one per monomial of the
// Gaussian-moment polynomial).
inline std::vector<GaussTerm> integrate_term(const GaussTerm& t, std::string_view var) {
    const int k = t.index_of(var);
    if (k < 0)
        throw NonConvergentIntegral("integral over '" + std::string(var) +
                                    "' diverges: integrand does not depend on it");
    const std::size_t uk = static_cast<std::size_t>(k);
    const std::size_t n = t.size();
    const cplx a = t.A(uk, uk);
    if (!(a.real() > 1e-300))
        throw NonConvergentIntegral(
            "integral over '" + std::string(var) +
            "' diverges: effective quadratic coefficient has non-positive real part");

    // Remaining variables and their indices in t.
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i)
        if (i != uk) rest.push_back(i);
    const std::size_t m = rest.size();

    // Base term: amplitude, Schur-complement quadratic form, shifted linear
    // part.  beta(v) = b_k - sum_j A_kj v_j is the linear coefficient of the
    // integration variable.
    GaussTerm base;
    base.z = t.z * std::sqrt(2.0 * std::numbers::pi / a) *
             std::exp(t.lin[uk] * t.lin[uk] / (2.0 * a));
    base.vars.resize(m);
    base.lin.resize(m);
    base.pow.assign(m, 0);
    base.quad.assign(m * m, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < m; ++i) {
        base.vars[i] = t.vars[rest[i]];
        base.lin[i] = t.lin[rest[i]] - t.lin[uk] * t.A(uk, rest[i]) / a;
        for (std::size_t j = 0; j < m; ++j)
            base.quad[i * m + j] =
                t.A(rest[i], rest[j]) - t.A(uk, rest[i]) * t.A(uk, rest[j]) / a;
    }

    // Gaussian moments of v_k about the complex mean mu(v) = beta(v)/a with
    // variance 1/a:  M_0 = 1, M_1 = mu, M_p = mu M_{p-1} + (p-1)/a M_{p-2}.
    const int p = t.pow[uk];
    std::vector<GaussTerm> out;
    if (p == 0) {
        base.pow = std::vector<int>(m, 0);
        for (std::size_t i = 0; i < m; ++i) base.pow[i] = t.pow[rest[i]];
        out.push_back(std::move(base));
        return out;
    }

    Poly mu; // linear polynomial in the remaining variables
    {
        std::vector<int> e0(m, 0);
        mu[e0] = t.lin[uk] / a;
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<int> ej(m, 0);
            ej[j] = 1;
            mu[ej] = -t.A(uk, rest[j]) / a;
        }
    }
    Poly m_prev;     // M_{p-2}
    Poly m_curr;     // M_{p-1}, start with M_0 = 1
    {
        std::vector<int> e0(m, 0);
        m_curr[e0] = cplx{1.0, 0.0};
    }
    for (int q = 1; q <= p; ++q) {
        Poly next = poly_mul(mu, m_curr);
        if (q >= 2) poly_axpy(next, cplx{static_cast<double>(q - 1), 0.0} / a, m_prev);
        m_prev = std::move(m_curr);
        m_curr = std::move(next);
    }

    for (const auto& [expo, coeff] : m_curr) {
        if (coeff == cplx{0.0, 0.0}) continue;
        GaussTerm term = base;
        term.z *= coeff;
        for (std::size_t i = 0; i < m; ++i) term.pow[i] = t.pow[rest[i]] + expo[i];
        out.push_back(std::move(term));
    }
    return out;
}

} // namespace detail

// Integrate `var` over the real line with no weight (the Gaussian damping must
// already be inside the terms, e.g. a squared spectral amplitude).
inline TermSum integrate_unweighted(const TermSum& s, std::string_view var) {
    std::vector<GaussTerm> out;
    for (const auto& t : s.terms()) {
        auto r = detail::integrate_term(t, var);
        out.insert(out.end(), r.begin(), r.end());
    }
    return merged(TermSum(std::move(out)));
}

// Average `var` against the normal weight exp(-x^2 / (2 eta^2)) / (sqrt(2 pi) eta).
// eta == 0 degenerates to substituting var = 0 exactly.
inline TermSum integrate_gaussian(const TermSum& s, std::string_view var, double eta) {
    if (eta < 0.0) throw error("integrate_gaussian: negative width");
    if (eta == 0.0) return substitute(s, var, 0.0);
    const double inv_norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * eta);
    std::vector<GaussTerm> out;
    for (const auto& t : s.terms()) {
        GaussTerm weighted = t;
        const std::size_t k = weighted.ensure_var(var);
        weighted.A(k, k) += 1.0 / (eta * eta);
        weighted.z *= inv_norm;
        auto r = detail::integrate_term(weighted, var);
        out.insert(out.end(), r.begin(), r.end());
    }
    return merged(TermSum(std::move(out)));
}

// Exact partial derivative with respect to `param`.
inline TermSum differentiate(const TermSum& s, std::string_view param) {
    std::vector<GaussTerm> out;
    for (const auto& t : s.terms()) {
        const int k = t.index_of(param);
        if (k < 0) continue;
        const std::size_t uk = static_cast<std::size_t>(k);
        // d/dx [v^p e^E] = p v^{p-1} e^E + v^p (b_x - sum_j A_xj v_j) e^E
        if (t.pow[uk] > 0) {
            GaussTerm down = t;
            down.z *= static_cast<double>(t.pow[uk]);
            down.pow[uk] -= 1;
            out.push_back(std::move(down));
        }
        if (t.lin[uk] != cplx{0.0, 0.0}) {
            GaussTerm lin_part = t;
            lin_part.z *= t.lin[uk];
            out.push_back(std::move(lin_part));
        }
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (t.A(uk, j) == cplx{0.0, 0.0}) continue;
            GaussTerm quad_part = t;
            quad_part.z *= -t.A(uk, j);
            quad_part.pow[j] += 1;
            out.push_back(std::move(quad_part));
        }
    }
    return merged(TermSum(std::move(out)));
}

// Re[ sum of terms ] at a real point.  Every free variable must be assigned.
inline double evaluate(const TermSum& s, const std::map<std::string, double>& at) {
    cplx acc{0.0, 0.0};
    for (const auto& t : s.terms()) acc += t.value(at);
    return acc.real();
}

// Complex value (no Re[]) — used where a term list is a complex amplitude.
inline cplx evaluate_complex(const std::vector<GaussTerm>& terms,
                             const std::map<std::string, double>& at) {
    cplx acc{0.0, 0.0};
    for (const auto& t : terms) acc += t.value(at);
    return acc;
}

} // namespace tpi::term

#endif // TPI_TERM_HPP
