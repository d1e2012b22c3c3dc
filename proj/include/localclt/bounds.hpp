#ifndef LOCALCLT_BOUNDS_HPP
#define LOCALCLT_BOUNDS_HPP

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "localclt/errors.hpp"
#include "localclt/normal.hpp"
#include "localclt/rsums.hpp"

namespace localclt {

// The underlying inequalities leave the constants C_p, C_{p,d}, C_{k+w}
// unspecified. The default policy sets all of them to 1 and labels every
// report a rate certificate; callers may override single constants by name.
struct ConstantPolicy {
    std::map<std::string, double> overrides;

    double get(const std::string& key) const {
        auto it = overrides.find(key);
        return it == overrides.end() ? 1.0 : it->second;
    }
    std::string note() const {
        return overrides.empty() ? "rate certificate, constants suppressed (all C = 1)"
                                 : "user-supplied constants";
    }
};

struct BoundParams {
    double p = 1.0;
    ConstantPolicy policy;

    int k() const { return static_cast<int>(std::ceil(p)); }
    double omega() const { return p + 1.0 - static_cast<double>(k()); }
};

struct BoundReport {
    std::string theorem;
    double value = 0.0;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::string constant_note;
    std::vector<std::string> warnings;
};

namespace detail {
inline std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

// Remainder-table Wasserstein bound (local-wp):
//   C_p ( sum_{j<=k-1} R_{j,1}^{1/j} + sum_{j<=k} R_{j,w}^{1/(j+w-1)} ),
// evaluated over the distinct entries of the remainder table (for integer p
// the two families coincide entrywise).
inline BoundReport bound_local_wp(const RemainderTable& table, const BoundParams& params) {
    const int k = params.k();
    const double omega = params.omega();
    BoundReport rep;
    rep.theorem = "local-wp";
    rep.constant_note = params.policy.note();
    double sum = 0.0;
    for (int j = 1; j <= k - 1; ++j) {
        const RemainderEntry* e = table.find(j, 1.0);
        if (e == nullptr) throw ConfigError("bound_local_wp: missing table entry (" +
                                            std::to_string(j) + ", 1)");
        if (omega != 1.0) sum += std::pow(e->value, 1.0 / j);
        rep.inputs.emplace_back("R_" + std::to_string(j) + "_1", detail::fmt_num(e->value));
    }
    for (int j = 1; j <= k; ++j) {
        const RemainderEntry* e = table.find(j, omega);
        if (e == nullptr) throw ConfigError("bound_local_wp: missing table entry (" +
                                            std::to_string(j) + ", omega)");
        sum += std::pow(e->value, 1.0 / (j + omega - 1.0));
        if (omega != 1.0)
            rep.inputs.emplace_back("R_" + std::to_string(j) + "_w", detail::fmt_num(e->value));
        else if (j == k)
            rep.inputs.emplace_back("R_" + std::to_string(j) + "_1", detail::fmt_num(e->value));
        if (!e->exact)
            rep.warnings.push_back("entry (" + std::to_string(j) + ") is a Monte Carlo estimate");
    }
    rep.inputs.emplace_back("p", detail::fmt_num(params.p));
    rep.value = params.policy.get("C_p") * sum;
    return rep;
}

// Neighborhood-size Wasserstein bound (local-wp2):
//   C_p (M^{1+w} s^-(w+2) S_{w+2})^{1/w} + C_p (M^{p+1} s^-(p+2) S_{p+2})^{1/p},
// where S_r = sum_i E|X_i|^r on the raw scale and s is sigma. The two
// asymptotic smallness hypotheses are flagged as warnings only.
inline BoundReport bound_local_wp2(double M, double sigma, double sum_abs_w2,
                                   double sum_abs_p2, const BoundParams& params) {
    const double omega = params.omega();
    const double p = params.p;
    if (!(sigma > 0.0)) throw ConfigError("bound_local_wp2: sigma must be positive");
    double base1 = std::pow(M, 1.0 + omega) * std::pow(sigma, -(omega + 2.0)) * sum_abs_w2;
    double base2 = std::pow(M, p + 1.0) * std::pow(sigma, -(p + 2.0)) * sum_abs_p2;
    BoundReport rep;
    rep.theorem = "local-wp2";
    rep.constant_note = params.policy.note();
    double c = params.policy.get("C_p");
    rep.value = c * std::pow(base1, 1.0 / omega) + c * std::pow(base2, 1.0 / p);
    rep.inputs.emplace_back("M", detail::fmt_num(M));
    rep.inputs.emplace_back("sigma", detail::fmt_num(sigma));
    rep.inputs.emplace_back("sum_abs_omega2", detail::fmt_num(sum_abs_w2));
    rep.inputs.emplace_back("sum_abs_p2", detail::fmt_num(sum_abs_p2));
    rep.inputs.emplace_back("p", detail::fmt_num(p));
    if (base1 >= 1.0)
        rep.warnings.push_back("hypothesis quantity M^{1+w} s^{-(w+2)} sum E|X|^{w+2} is not small");
    if (base2 >= 1.0)
        rep.warnings.push_back("hypothesis quantity M^{p+1} s^{-(p+2)} sum E|X|^{p+2} is not small");
    return rep;
}

// Bracket bound: R_{k,w} <= C_{k+w} M^{k+w} s^{-(k+1+w)} sum_i E|X_i|^{k+1+w}.
inline double bound_bracket(double M, double sigma, double moment_sum, int k, double omega,
                            const ConstantPolicy& policy = {}) {
    if (!(M > 0.0 && sigma > 0.0 && moment_sum > 0.0))
        throw ConfigError("bound_bracket: inputs must be positive");
    return policy.get("C_k_omega") * std::pow(M, k + omega) *
           std::pow(sigma, -(k + 1.0 + omega)) * moment_sum;
}

// m-dependent random field bound on Z^d:
//   C_{p,d} m^{(1+w)d/w} M^{(p-w)/(pw)} s^{-(p+2)/p} (sum E|X|^{p+2})^{1/p}.
inline BoundReport bound_mdep_field(int m, int d, double M_nondegen, double sigma,
                                    double sum_abs_p2, const BoundParams& params) {
    if (M_nondegen < 1.0) throw ConfigError("bound_mdep_field: non-degeneracy M must be >= 1");
    const double omega = params.omega();
    const double p = params.p;
    BoundReport rep;
    rep.theorem = "mdep-field";
    rep.constant_note = params.policy.note();
    rep.value = params.policy.get("C_p_d") *
                std::pow(static_cast<double>(m), (1.0 + omega) * d / omega) *
                std::pow(M_nondegen, (p - omega) / (p * omega)) *
                std::pow(sigma, -(p + 2.0) / p) * std::pow(sum_abs_p2, 1.0 / p);
    rep.inputs.emplace_back("m", std::to_string(m));
    rep.inputs.emplace_back("d", std::to_string(d));
    rep.inputs.emplace_back("M_nondegen", detail::fmt_num(M_nondegen));
    rep.inputs.emplace_back("sigma", detail::fmt_num(sigma));
    rep.inputs.emplace_back("sum_abs_p2", detail::fmt_num(sum_abs_p2));
    rep.inputs.emplace_back("p", detail::fmt_num(p));
    return rep;
}

// Final display of the tail-bound section: the uniform Berry-Esseen shape
//   C ( sum_i E|X_i|^3 / s^3 + sum_i (E|X_i|^{p+2})^{1/p} / s^{1+2/p} ),
// taking per-vertex raw absolute moments of orders 3 and p+2.
inline double uniform_be_from_wp(const std::vector<double>& abs3_per_vertex,
                                 const std::vector<double>& absp2_per_vertex, double sigma,
                                 double p, const ConstantPolicy& policy = {}) {
    if (!(sigma > 0.0)) throw ConfigError("uniform_be_from_wp: sigma must be positive");
    double t1 = 0.0;
    for (double v : abs3_per_vertex) t1 += v;
    t1 /= std::pow(sigma, 3.0);
    double t2 = 0.0;
    for (double v : absp2_per_vertex) t2 += std::pow(v, 1.0 / p);
    t2 /= std::pow(sigma, 1.0 + 2.0 / p);
    return policy.get("C") * (t1 + t2);
}

// ---- Stein equation machinery ----

struct QuadSpec {
    double panel_width = 0.5;
    double log_eps = 42.0;      // integrate until the Gaussian factor < e^-42
    double deriv_step = 1e-5;   // central-difference step, scaled by (1+|w|)
    double normal_range = 9.0;  // support cut for N-expectations
};

using RealFn = std::function<double(double)>;

// E[h(Z)] for standard normal Z by panel quadrature.
inline double normal_expectation(const RealFn& h, const QuadSpec& quad = {}) {
    return integrate_panels([&](double t) { return h(t) * norm_pdf(t); }, -quad.normal_range,
                            quad.normal_range, quad.panel_width);
}

// Solution f_h of the Stein equation f'(w) - w f(w) = h(w) - Nh, evaluated by
// quadrature of exp((w^2-t^2)/2)(h(t) - Nh) on the half-line that keeps the
// exponent nonpositive. Pass nh = NaN to have Nh computed.
inline double stein_solve(const RealFn& h, double nh, double w, const QuadSpec& quad = {}) {
    if (std::isnan(nh)) nh = normal_expectation(h, quad);
    const double reach = std::sqrt(w * w + 2.0 * quad.log_eps);
    auto integrand = [&](double t) {
        return std::exp(0.5 * (w * w - t * t)) * (h(t) - nh);
    };
    if (w <= 0.0) return integrate_panels(integrand, -reach, w, quad.panel_width);
    return -integrate_panels(integrand, w, reach, quad.panel_width);
}

inline double stein_derivative(const RealFn& h, double nh, double w, const QuadSpec& quad = {}) {
    const double s = quad.deriv_step * (1.0 + std::abs(w));
    return (stein_solve(h, nh, w + s, quad) - stein_solve(h, nh, w - s, quad)) / (2.0 * s);
}

// Test distribution for the Stein residual: a finite-atom law or N(0,1).
struct AtomicDist {
    std::vector<std::pair<double, double>> atoms;  // (location, weight)
};
struct StandardNormalDist {};
using SteinDist = std::variant<AtomicDist, StandardNormalDist>;

// E[f_h'(W) - W f_h(W)] - (E[h(W)] - Nh); ~0 for any W by the Stein identity,
// so this measures quadrature and differentiation error.
inline double stein_residual(const SteinDist& dist, const RealFn& h, const QuadSpec& quad = {}) {
    const double nh = normal_expectation(h, quad);
    auto pointwise = [&](double w) {
        return stein_derivative(h, nh, w, quad) - w * stein_solve(h, nh, w, quad) -
               (h(w) - nh);
    };
    if (const auto* a = std::get_if<AtomicDist>(&dist)) {
        double acc = 0.0;
        for (const auto& [x, wgt] : a->atoms) acc += wgt * pointwise(x);
        return acc;
    }
    return integrate_panels([&](double t) { return pointwise(t) * norm_pdf(t); },
                            -quad.normal_range, quad.normal_range, quad.panel_width);
}

// ---- Non-uniform tail bounds ----

// g_t(x) = (1-x)^{p+1} exp(-(xt)^2/2), a decreasing bijection of [0,1].
inline double g_function(double t, double x, double p) {
    return std::pow(1.0 - x, p + 1.0) * std::exp(-0.5 * x * x * t * t);
}

// Unique x in [0,1] with g_t(x) = y, by bisection.
inline double g_inverse(double t, double y, double p, double tol = 1e-13) {
    if (!(t > 0.0)) throw ConfigError("g_inverse: t must be positive");
    if (!(y >= 0.0 && y <= 1.0)) throw ConfigError("g_inverse: y must lie in [0,1]");
    if (y == 1.0) return 0.0;
    if (y == 0.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double g = g_function(t, mid, p);
        if (std::abs(g - y) <= tol && it > 52) return mid;
        if (g > y)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-17) break;
    }
    return 0.5 * (lo + hi);
}

struct TailBoundQuery {
    double t = 1.0;
    double beta = 1.0;
    double p = 1.0;
    double wp = 0.0;  // Wasserstein-p distance of W_n to N(0,1)
};

struct TailBoundResult {
    double upper = 0.0;  // bound on P(W >= t) - Phi^c(t)
    double lower = 0.0;  // bound on Phi^c(t) - P(W >= t)
    bool condition_ok = false;
};

// Deviation bounds with the explicit constant C = p^{1/(p+1)}(1+1/p) (the
// underlying inequality only asserts existence of some C):
//   upper = C wp^{p/(p+1)} / t^{1+beta p/(p+1)},
//   lower = (C/t) phi(t p/(p+1)) wp^{p/(p+1)},
// valid when (sqrt(2 pi) p)^{1/(p+1)} (1 - sqrt(2 beta log t)/t) t^{1-beta/(p+1)} >= wp.
// When the condition fails the values are still returned, flagged invalid.
inline TailBoundResult tail_bound(const TailBoundQuery& q) {
    if (!(q.t > 0.0) || !(q.beta > 0.0) || !(q.p >= 1.0) || !(q.wp >= 0.0))
        throw ConfigError("tail_bound: query out of domain");
    const double p = q.p;
    const double frac = p / (p + 1.0);
    const double c = std::pow(p, 1.0 / (p + 1.0)) * (1.0 + 1.0 / p);
    TailBoundResult res;
    res.upper = c * std::pow(q.wp, frac) / std::pow(q.t, 1.0 + q.beta * frac);
    res.lower = c / q.t * norm_pdf(q.t * frac) * std::pow(q.wp, frac);
    const double logt = std::log(q.t);
    if (logt > 0.0) {
        double slack = 1.0 - std::sqrt(2.0 * q.beta * logt) / q.t;
        double threshold = std::pow(std::sqrt(kTwoPi) * p, 1.0 / (p + 1.0)) * slack *
                           std::pow(q.t, 1.0 - q.beta / (p + 1.0));
        res.condition_ok = slack > 0.0 && threshold >= q.wp;
    }
    return res;
}

}  // namespace localclt

#endif
