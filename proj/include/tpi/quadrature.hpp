#ifndef TPI_QUADRATURE_HPP
#define TPI_QUADRATURE_HPP

// Gaussian quadrature rules (Golub–Welsch via Eigen's symmetric tridiagonal
// eigensolver), adaptive panel-based Gauss–Legendre integration on bounded
// intervals, and a thin wrapper over Boost's adaptive Gauss–Kronrod (G7K15).
//
// Conventions:
//   * gauss_hermite(n): physicists' rule, weight exp(-t^2) on the real line.
//   * gauss_legendre(n): weight 1 on [-1, 1].
//   * normal_rule(n, mu, eta): nodes/weights such that sum w_i f(x_i)
//     approximates the expectation of f under N(mu, eta^2), obtained from the
//     Hermite rule by the substitution x = mu + sqrt(2) eta t.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tpi/errors.hpp"

namespace tpi::quad {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

namespace detail {

// Golub–Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
inline Rule golub_welsch(const std::vector<double>& offdiag, double mu0) {
    const auto n = static_cast<Eigen::Index>(offdiag.size() + 1);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) sub[i] = offdiag[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    Rule rule;
    rule.x.resize(static_cast<std::size_t>(n));
    rule.w.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.x[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
        const double v0 = solver.eigenvectors()(0, i);
        rule.w[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

inline const Rule& cached(std::map<int, Rule>& cache, std::mutex& mtx, int n,
                          const std::function<Rule(int)>& make) {
    std::scoped_lock lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make(n)).first;
    return it->second;
}

} // namespace detail

// Physicists' Gauss–Hermite rule: integral of f(t) exp(-t^2) dt over R.
inline const Rule& gauss_hermite(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mtx;
    return detail::cached(cache, mtx, n, [](int m) {
        std::vector<double> off(static_cast<std::size_t>(m - 1));
        for (int k = 1; k < m; ++k) off[static_cast<std::size_t>(k - 1)] = std::sqrt(k / 2.0);
        return detail::golub_welsch(off, std::sqrt(std::numbers::pi));
    });
}

// Gauss–Legendre rule on [-1, 1].
inline const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mtx;
    return detail::cached(cache, mtx, n, [](int m) {
        std::vector<double> off(static_cast<std::size_t>(m - 1));
        for (int k = 1; k < m; ++k)
            off[static_cast<std::size_t>(k - 1)] = k / std::sqrt(4.0 * k * k - 1.0);
        return detail::golub_welsch(off, 2.0);
    });
}

// Expectation rule for N(mu, eta^2): sum w_i f(x_i) ~ E[f].  Requires eta > 0.
inline Rule normal_rule(int n, double mu, double eta) {
    const Rule& gh = gauss_hermite(n);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    Rule out;
    out.x.resize(gh.size());
    out.w.resize(gh.size());
    for (std::size_t i = 0; i < gh.size(); ++i) {
        out.x[i] = mu + std::numbers::sqrt2 * eta * gh.x[i];
        out.w[i] = gh.w[i] * inv_sqrt_pi;
    }
    return out;
}

// Gauss–Legendre rule mapped onto [a, b].
inline Rule legendre_on(int n, double a, double b) {
    const Rule& gl = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Rule out;
    out.x.resize(gl.size());
    out.w.resize(gl.size());
    for (std::size_t i = 0; i < gl.size(); ++i) {
        out.x[i] = mid + half * gl.x[i];
        out.w[i] = half * gl.w[i];
    }
    return out;
}

struct QuadSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    int max_depth = 15;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Gauss–Kronrod (G7K15) on a bounded interval.
inline Estimate kronrod_integrate(const std::function<double(double)>& f, double a,
                                  double b, const QuadSpec& spec = {}) {
    Estimate est;
    est.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, static_cast<unsigned>(spec.max_depth), spec.rel_tol, &est.error);
    return est;
}

namespace detail {

struct Panel {
    double a, b;
    double value;   // GL-64 estimate
    double error;   // |GL-64 - GL-32| embedded estimate
};

inline Panel make_panel(const std::function<double(double)>& f, double a, double b) {
    const Rule r64 = legendre_on(64, a, b);
    const Rule r32 = legendre_on(32, a, b);
    double i64 = 0.0, i32 = 0.0;
    for (std::size_t i = 0; i < r64.size(); ++i) i64 += r64.w[i] * f(r64.x[i]);
    for (std::size_t i = 0; i < r32.size(); ++i) i32 += r32.w[i] * f(r32.x[i]);
    return Panel{a, b, i64, std::abs(i64 - i32)};
}

} // namespace detail

namespace detail {

// Initial panel list from [a, b] plus interior break hints.  Break hints let
// a caller mark features (e.g. a weight peak) far narrower than a panel,
// which edge-clustered Gauss nodes would otherwise never sample.
inline std::vector<Panel> seed_panels(const std::function<double(double)>& f, double a,
                                      double b, const std::vector<double>& breaks) {
    std::vector<double> edges{a};
    for (double c : breaks)
        if (c > a && c < b) edges.push_back(c);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    std::vector<Panel> panels;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        if (edges[i + 1] > edges[i]) panels.push_back(make_panel(f, edges[i], edges[i + 1]));
    return panels;
}

// Refine the worst panel until the summed error estimate passes the
// tolerance; throws when the node budget (64 nodes per panel) runs out.
inline Estimate refine_panels(const std::function<double(double)>& f,
                              std::vector<Panel>& panels, const QuadSpec& spec,
                              std::size_t node_cap, const char* what) {
    std::size_t nodes = 64 * panels.size();
    for (;;) {
        double total = 0.0, err = 0.0, worst = -1.0;
        std::size_t worst_idx = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].error;
            if (panels[i].error > worst) {
                worst = panels[i].error;
                worst_idx = i;
            }
        }
        if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)))
            return Estimate{total, err};
        if (nodes + 64 > node_cap)
            throw QuadratureNotConverged(std::string(what) +
                                         " did not converge within the node budget");
        const Panel split = panels[worst_idx];
        const double mid = 0.5 * (split.a + split.b);
        panels[worst_idx] = make_panel(f, split.a, mid);
        panels.push_back(make_panel(f, mid, split.b));
        nodes += 64;
    }
}

} // namespace detail

// Error-driven adaptive Gauss–Legendre on [a, b]: panels of 64 nodes, the
// worst panel split in half until the summed error estimate meets the
// tolerance.  `node_cap` bounds the total node count; `breaks` seeds panel
// boundaries at known narrow features.
inline Estimate adaptive_legendre(const std::function<double(double)>& f, double a,
                                  double b, const QuadSpec& spec = {},
                                  std::size_t node_cap = 4096,
                                  const std::vector<double>& breaks = {}) {
    auto panels = detail::seed_panels(f, a, b, breaks);
    return detail::refine_panels(f, panels, spec, node_cap, "adaptive Gauss-Legendre");
}

// Node/weight list adapted to a fixed nonnegative weight function on [a, b]
// (panels refined until the weight's integral converges).  The returned
// weights already include the weight-function values, so
// sum w_i g(x_i) approximates the weighted integral of g.
inline Rule adaptive_weight_nodes(const std::function<double(double)>& weight, double a,
                                  double b, const QuadSpec& spec = {},
                                  std::size_t node_cap = 4096,
                                  const std::vector<double>& breaks = {}) {
    auto panels = detail::seed_panels(weight, a, b, breaks);
    detail::refine_panels(weight, panels, spec, node_cap, "weight-adapted panel refinement");
    Rule out;
    for (const auto& p : panels) {
        const Rule r = legendre_on(64, p.a, p.b);
        for (std::size_t i = 0; i < r.size(); ++i) {
            out.x.push_back(r.x[i]);
            out.w.push_back(r.w[i] * weight(r.x[i]));
        }
    }
    return out;
}

} // namespace tpi::quad

#endif // TPI_QUADRATURE_HPP
