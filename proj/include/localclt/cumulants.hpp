#ifndef LOCALCLT_CUMULANTS_HPP
#define LOCALCLT_CUMULANTS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "localclt/errors.hpp"
#include "localclt/rng.hpp"

namespace localclt {

// Raw moment sequence (mu_0, ..., mu_N), mu_0 = 1.
template <class T>
struct MomentSeq {
    std::vector<T> values;
    int order() const { return static_cast<int>(values.size()) - 1; }
    const T& mu(int n) const { return values[static_cast<std::size_t>(n)]; }
};

// Cumulant sequence (kappa_1, ..., kappa_N).
template <class T>
struct CumulantSeq {
    std::vector<T> values;
    int order() const { return static_cast<int>(values.size()); }
    const T& kappa(int n) const { return values[static_cast<std::size_t>(n - 1)]; }
};

template <class T>
T binomial(int n, int k) {
    if (k < 0 || k > n) return T(0);
    T acc(1);
    for (int i = 1; i <= k; ++i) {
        acc *= T(n - k + i);
        acc /= T(i);
    }
    return acc;
}

// Partial exponential Bell polynomial B_{n,j}(x_1, ..., x_{n-j+1}) via the
// recurrence B_{n,j} = sum_i C(n-1, i-1) x_i B_{n-i,j-1}.
template <class T>
T bell_partial(int n, int j, const std::vector<T>& x) {
    if (n < 1 || j < 1 || j > n) throw ConfigError("bell_partial: need 1 <= j <= n");
    if (static_cast<int>(x.size()) < n - j + 1)
        throw ConfigError("bell_partial: x needs at least n-j+1 entries");
    // table[m][l] = B_{m,l}
    std::vector<std::vector<T>> table(static_cast<std::size_t>(n) + 1,
                                      std::vector<T>(static_cast<std::size_t>(j) + 1, T(0)));
    table[0][0] = T(1);
    for (int m = 1; m <= n; ++m) {
        for (int l = 1; l <= std::min(j, m); ++l) {
            T acc(0);
            for (int i = 1; i <= m - l + 1 && i <= static_cast<int>(x.size()); ++i) {
                acc += binomial<T>(m - 1, i - 1) * x[static_cast<std::size_t>(i - 1)] *
                       table[static_cast<std::size_t>(m - i)][static_cast<std::size_t>(l - 1)];
            }
            table[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] = acc;
        }
    }
    return table[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
}

// mu_n = sum_j B_{n,j}(kappa_1, ..., kappa_{n-j+1}), mu_0 = 1.
template <class T>
MomentSeq<T> moments_from_cumulants(const CumulantSeq<T>& k) {
    const int N = k.order();
    MomentSeq<T> m;
    m.values.assign(static_cast<std::size_t>(N) + 1, T(0));
    m.values[0] = T(1);
    for (int n = 1; n <= N; ++n) {
        T acc(0);
        for (int j = 1; j <= n; ++j) acc += bell_partial<T>(n, j, k.values);
        m.values[static_cast<std::size_t>(n)] = acc;
    }
    return m;
}

namespace detail {
template <class T>
void require_mu0_is_one(const MomentSeq<T>& m, const char* who) {
    if (m.values.empty()) throw ConfigError(std::string(who) + ": empty sequence");
    if constexpr (std::is_floating_point_v<T>) {
        if (std::abs(m.values[0] - T(1)) > T(1e-9))
            throw ConfigError(std::string(who) + ": mu_0 must be 1");
    } else {
        if (m.values[0] != T(1)) throw ConfigError(std::string(who) + ": mu_0 must be 1");
    }
}
}  // namespace detail

// The literal alternating Bell sum
//   kappa_n = sum_j (-1)^{j-1} (j-1)! B_{n,j}(mu_1, ..., mu_{n-j+1}).
// Exact in rational mode, but its factorial-weighted terms cancel violently
// in binary64 at higher orders.
template <class T>
CumulantSeq<T> cumulants_from_moments_bell(const MomentSeq<T>& m) {
    detail::require_mu0_is_one(m, "cumulants_from_moments");
    const int N = m.order();
    std::vector<T> mu1(m.values.begin() + 1, m.values.end());
    CumulantSeq<T> k;
    k.values.assign(static_cast<std::size_t>(N), T(0));
    for (int n = 1; n <= N; ++n) {
        T acc(0);
        T factorial(1);  // (j-1)!
        for (int j = 1; j <= n; ++j) {
            if (j > 1) factorial *= T(j - 1);
            T term = factorial * bell_partial<T>(n, j, mu1);
            if (j % 2 == 0)
                acc -= term;
            else
                acc += term;
        }
        k.values[static_cast<std::size_t>(n - 1)] = acc;
    }
    return k;
}

// Inverse of moments_from_cumulants: the triangular solve of the moment
// recursion mu_n = sum_j C(n-1, j-1) kappa_j mu_{n-j}. Identical values to
// the Bell sum (exactly so in rational mode), better conditioned in binary64.
template <class T>
CumulantSeq<T> cumulants_from_moments(const MomentSeq<T>& m) {
    detail::require_mu0_is_one(m, "cumulants_from_moments");
    const int N = m.order();
    CumulantSeq<T> k;
    k.values.assign(static_cast<std::size_t>(N), T(0));
    for (int n = 1; n <= N; ++n) {
        T acc = m.mu(n);
        for (int j = 1; j <= n - 1; ++j)
            acc -= binomial<T>(n - 1, j - 1) * k.kappa(j) * m.mu(n - j);
        k.values[static_cast<std::size_t>(n - 1)] = acc;
    }
    return k;
}

// Right-hand side of the moment recursion
// mu_n = sum_{j=1}^{n} C(n-1, j-1) kappa_j mu_{n-j}; an independent route
// used to cross-check the Bell-polynomial conversions.
template <class T>
T moment_recursion(const CumulantSeq<T>& k, const MomentSeq<T>& m, int n) {
    if (n < 1 || k.order() < n || m.order() < n - 1)
        throw ConfigError("moment_recursion: insufficient prefix");
    T acc(0);
    for (int j = 1; j <= n; ++j)
        acc += binomial<T>(n - 1, j - 1) * k.kappa(j) * m.mu(n - j);
    return acc;
}

namespace detail {

template <class T>
T abs_value(const T& x) {
    return x < T(0) ? T(-x) : x;
}

}  // namespace detail

// Determinant by Gaussian elimination with partial pivoting; exact when T is
// a rational type.
template <class T>
T determinant(std::vector<std::vector<T>> a) {
    const std::size_t n = a.size();
    T det(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (detail::abs_value(a[r][c]) > detail::abs_value(a[pivot][c])) pivot = r;
        if (a[pivot][c] == T(0)) return T(0);
        if (pivot != c) {
            std::swap(a[pivot], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            T f = a[r][c] / a[c][c];
            for (std::size_t cc = c; cc < n; ++cc) a[r][cc] -= f * a[c][cc];
        }
    }
    return det;
}

// Upper-left (j+1) x (j+1) Hankel determinant H_j(mu_0, ..., mu_2j).
template <class T>
T hankel_det(const MomentSeq<T>& m, int j) {
    if (m.order() < 2 * j) throw ConfigError("hankel_det: moments through order 2j required");
    std::vector<std::vector<T>> h(static_cast<std::size_t>(j) + 1,
                                  std::vector<T>(static_cast<std::size_t>(j) + 1));
    for (int a = 0; a <= j; ++a)
        for (int b = 0; b <= j; ++b)
            h[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = m.mu(a + b);
    return determinant(std::move(h));
}

struct HamburgerReport {
    bool feasible = true;
    bool boundary = false;   // some H_j = 0: a finite-atom (determinate) law
    int first_failing = -1;  // first j with H_j < 0, or first zero when boundary
};

// Sylvester criterion on the Hankel minors: feasible iff H_j >= 0 for every j
// with 2j <= order, with zeros flagged as the finite-atom boundary. A
// positive determinant after a zero one is impossible for a moment sequence
// and is reported as infeasible.
template <class T>
HamburgerReport hamburger_feasible(const MomentSeq<T>& m, const T& tol = T(0)) {
    if (m.values.empty() || !(detail::abs_value(m.values[0] - T(1)) <= tol))
        throw ConfigError("hamburger_feasible: mu_0 must be 1");
    HamburgerReport rep;
    bool seen_zero = false;
    for (int j = 0; 2 * j <= m.order(); ++j) {
        T h = hankel_det(m, j);
        if (h < -tol || (seen_zero && h > tol)) {
            rep.feasible = false;
            rep.first_failing = j;
            return rep;
        }
        if (detail::abs_value(h) <= tol) {
            if (!seen_zero) {
                rep.boundary = true;
                rep.first_failing = j;
            }
            seen_zero = true;
        }
    }
    return rep;
}

// Plug-in raw moments of W from Monte Carlo replicates, with standard errors
// of each moment mean (bias of derived plug-in cumulants is O(1/reps)).
// Replicate r draws through a generator seeded with derive_seed(seed, r).
struct MomentsWithErrors {
    MomentSeq<double> moments;
    std::vector<double> stderrs;  // aligned with moments.values, se[0] = 0
};

inline MomentsWithErrors estimate_moments_mc(
    const std::function<double(Rng&)>& sample_w, int order, std::int64_t reps,
    std::uint64_t seed) {
    if (reps < 2) throw ConfigError("estimate_moments_mc: reps must be >= 2");
    if (order < 1) throw ConfigError("estimate_moments_mc: order must be >= 1");
    std::vector<double> sum(static_cast<std::size_t>(2 * order) + 1, 0.0);
    for (std::int64_t r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        double w = sample_w(rng);
        if (!std::isfinite(w)) throw NumericError("estimate_moments_mc: sampler returned non-finite value");
        double pw = 1.0;
        for (int k = 1; k <= 2 * order; ++k) {
            pw *= w;
            sum[static_cast<std::size_t>(k)] += pw;
        }
    }
    const double n = static_cast<double>(reps);
    MomentsWithErrors out;
    out.moments.values.assign(static_cast<std::size_t>(order) + 1, 0.0);
    out.moments.values[0] = 1.0;
    out.stderrs.assign(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 1; k <= order; ++k) {
        double mean = sum[static_cast<std::size_t>(k)] / n;
        double mean2 = sum[static_cast<std::size_t>(2 * k)] / n;
        double var = std::max(0.0, (mean2 - mean * mean) * n / (n - 1.0));
        out.moments.values[static_cast<std::size_t>(k)] = mean;
        out.stderrs[static_cast<std::size_t>(k)] = std::sqrt(var / n);
    }
    return out;
}

}  // namespace localclt

#endif
