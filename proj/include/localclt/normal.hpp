#ifndef LOCALCLT_NORMAL_HPP
#define LOCALCLT_NORMAL_HPP

#include <cmath>
#include <vector>

#include "localclt/errors.hpp"

namespace localclt {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
inline double norm_ccdf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// Inverse standard normal CDF: Acklam's rational approximation polished by
// Halley steps to ~1e-15 relative.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("norm_quantile: p must lie in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        double e = norm_cdf(x) - p;
        double u = e / norm_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);  // Halley
    }
    return x;
}

// Gauss-Legendre nodes and weights on [-1,1], computed once per order by
// Newton iteration on the Legendre polynomial.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        nodes.resize(static_cast<std::size_t>(n));
        weights.resize(static_cast<std::size_t>(n));
        const double pi = kTwoPi / 2.0;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[static_cast<std::size_t>(i)] = -x;
            nodes[static_cast<std::size_t>(n - 1 - i)] = x;
            double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[static_cast<std::size_t>(i)] = w;
            weights[static_cast<std::size_t>(n - 1 - i)] = w;
        }
    }
};

inline const GaussLegendre& gauss_legendre_16() {
    static const GaussLegendre gl(16);
    return gl;
}

// Integral of f over [a, b] by fixed-width 16-point Gauss-Legendre panels.
template <class F>
double integrate_panels(F&& f, double a, double b, double panel_width = 0.5) {
    if (b <= a) return 0.0;
    const GaussLegendre& gl = gauss_legendre_16();
    const int npanels = std::max(1, static_cast<int>(std::ceil((b - a) / panel_width)));
    const double h = (b - a) / npanels;
    double acc = 0.0;
    for (int p = 0; p < npanels; ++p) {
        double lo = a + h * p;
        double mid = lo + 0.5 * h;
        double half = 0.5 * h;
        double panel = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i)
            panel += gl.weights[i] * f(mid + half * gl.nodes[i]);
        acc += panel * half;
    }
    return acc;
}

}  // namespace localclt

#endif
