#ifndef LOCALCLT_SIM_HPP
#define LOCALCLT_SIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "localclt/errors.hpp"
#include "localclt/models.hpp"
#include "localclt/normal.hpp"
#include "localclt/parallel.hpp"
#include "localclt/rng.hpp"

namespace localclt {

// Innovation / base laws, all standardized to mean 0, variance 1.
enum class InnovationLaw { Rademacher, Uniform, ShiftedExponential };

inline InnovationLaw parse_law(const std::string& s) {
    if (s == "rademacher") return InnovationLaw::Rademacher;
    if (s == "uniform") return InnovationLaw::Uniform;
    if (s == "exponential") return InnovationLaw::ShiftedExponential;
    throw ConfigError("unknown innovation law '" + s + "'");
}

inline std::string law_name(InnovationLaw law) {
    switch (law) {
        case InnovationLaw::Rademacher: return "rademacher";
        case InnovationLaw::Uniform: return "uniform";
        default: return "exponential";
    }
}

inline double draw_law(InnovationLaw law, Rng& rng) {
    switch (law) {
        case InnovationLaw::Rademacher: return rng.rademacher();
        case InnovationLaw::Uniform: return (rng.uniform01() - 0.5) * 3.4641016151377545871;
        default: return rng.exponential() - 1.0;
    }
}

// m-dependent moving-average field on a box in Z^d:
//   X_i = (m+1)^{-d/2} sum_{j in i + {0..m}^d} eps_j,
// so variables whose indices differ by more than m in max norm share no
// innovation. Rademacher innovations are defined bitwise off 64-bit blocks,
// which both the field sampler and the fast W path consume identically.
struct MdepMASpec {
    std::vector<long long> box{256};  // side lengths; vertices are 1-based
    int m = 1;
    InnovationLaw law = InnovationLaw::Rademacher;

    long long field_size() const {
        long long n = 1;
        for (long long b : box) n *= b;
        return n;
    }
};

// Hoeffding U-statistic of order 2 over an i.i.d. base sample:
//   W = (U - E[U]) / sigma,  U = sum_{1<=i<=j<=n} h(x_i, x_j).
// Builtin kernels evaluate through power sums; all are non-degenerate with
// g(x) = E[h | X_1 = x] a non-constant function of x.
enum class UStatKernel { Sum, ProdMix, VarianceCentered };

inline UStatKernel parse_kernel(const std::string& s) {
    if (s == "sum") return UStatKernel::Sum;           // h(x,y) = x + y
    if (s == "prodmix") return UStatKernel::ProdMix;   // h(x,y) = xy + x + y
    if (s == "variance") return UStatKernel::VarianceCentered;  // h = (x-y)^2/2 - 1
    throw ConfigError("unknown U-statistic kernel '" + s + "'");
}

struct UStatSpec {
    UStatKernel kernel = UStatKernel::Sum;
    InnovationLaw base = InnovationLaw::Rademacher;
    long long n = 64;
};

struct GeneratorSpec {
    std::variant<MdepMASpec, UStatSpec> gen;
    static GeneratorSpec mdep_ma(MdepMASpec s) { return {std::move(s)}; }
    static GeneratorSpec ustat(UStatSpec s) { return {std::move(s)}; }
};

// Replaces the size parameter (box side for mdepMA lines, n for U-statistics).
inline GeneratorSpec with_size(GeneratorSpec spec, long long size) {
    if (auto* ma = std::get_if<MdepMASpec>(&spec.gen)) {
        for (auto& b : ma->box) b = size;
    } else {
        std::get<UStatSpec>(spec.gen).n = size;
    }
    return spec;
}

namespace detail {

// Innovation weight per extended-box coordinate: the count of field points
// whose window covers it, factorized per dimension.
inline std::vector<long long> ma_axis_weights(long long len, int m) {
    std::vector<long long> w(static_cast<std::size_t>(len + m));
    for (long long j = 1; j <= len + m; ++j)
        w[static_cast<std::size_t>(j - 1)] =
            std::min(std::min(j, len), std::min<long long>(m + 1, len + m + 1 - j));
    return w;
}

inline std::vector<long long> ma_weights(const MdepMASpec& spec) {
    std::vector<long long> w{1};
    for (long long len : spec.box) {  // last axis ends up fastest
        auto axis = ma_axis_weights(len, spec.m);
        std::vector<long long> next;
        next.reserve(w.size() * axis.size());
        for (long long b : w)
            for (long long a : axis) next.push_back(b * a);
        w = std::move(next);
    }
    return w;
}

inline double ma_sigma_raw(const MdepMASpec& spec) {
    double c2 = std::pow(static_cast<double>(spec.m + 1), -static_cast<double>(spec.box.size()));
    double s = 0.0;
    for (long long w : ma_weights(spec)) s += static_cast<double>(w) * static_cast<double>(w);
    return std::sqrt(c2 * s);
}

// One unnormalized draw of W = c sum_j w_j eps_j. Rademacher runs on 64-bit
// blocks; a block with constant weight reduces to a popcount.
inline double ma_draw_w(const MdepMASpec& spec, const std::vector<long long>& weights, Rng& rng) {
    const std::size_t n = weights.size();
    const double c = std::pow(static_cast<double>(spec.m + 1),
                              -0.5 * static_cast<double>(spec.box.size()));
    if (spec.law == InnovationLaw::Rademacher) {
        long long acc = 0;
        std::size_t j = 0;
        while (j < n) {
            std::uint64_t bits = rng.bits();
            std::size_t block = std::min<std::size_t>(64, n - j);
            bool uniform = true;
            for (std::size_t i = 1; i < block; ++i)
                if (weights[j + i] != weights[j]) {
                    uniform = false;
                    break;
                }
            if (uniform && block == 64) {
                acc += weights[j] * (2 * static_cast<long long>(__builtin_popcountll(bits)) - 64);
            } else {
                for (std::size_t i = 0; i < block; ++i)
                    acc += (bits >> i & 1ULL) ? weights[j + i] : -weights[j + i];
            }
            j += block;
        }
        return c * static_cast<double>(acc);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        acc += static_cast<double>(weights[j]) * draw_law(spec.law, rng);
    return c * acc;
}

// Innovations in the same order ma_draw_w consumes them.
inline void ma_draw_innovations(const MdepMASpec& spec, std::size_t n, Rng& rng,
                                std::vector<double>& eps) {
    eps.resize(n);
    if (spec.law == InnovationLaw::Rademacher) {
        std::size_t j = 0;
        while (j < n) {
            std::uint64_t bits = rng.bits();
            std::size_t block = std::min<std::size_t>(64, n - j);
            for (std::size_t i = 0; i < block; ++i)
                eps[j + i] = (bits >> i & 1ULL) ? 1.0 : -1.0;
            j += block;
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) eps[j] = draw_law(spec.law, rng);
    }
}

// Full field draw: X_i = c sum over the window of i.
inline void ma_draw_field(const MdepMASpec& spec, Rng& rng, std::vector<double>& x) {
    const std::size_t d = spec.box.size();
    std::vector<long long> ext(d);
    std::size_t total_ext = 1;
    for (std::size_t a = 0; a < d; ++a) {
        ext[a] = spec.box[a] + spec.m;
        total_ext *= static_cast<std::size_t>(ext[a]);
    }
    std::vector<double> eps;
    ma_draw_innovations(spec, total_ext, rng, eps);
    const double c = std::pow(static_cast<double>(spec.m + 1), -0.5 * static_cast<double>(d));
    x.assign(static_cast<std::size_t>(spec.field_size()), 0.0);
    // strides of the extended box, last axis fastest (matches weight order)
    std::vector<std::size_t> stride(d, 1);
    for (std::size_t a = d; a-- > 1;)
        stride[a - 1] = stride[a] * static_cast<std::size_t>(ext[a]);
    std::vector<long long> idx(d, 1);
    std::vector<long long> off(d, 0);
    for (std::size_t out = 0;; ++out) {
        double s = 0.0;
        std::fill(off.begin(), off.end(), 0);
        for (;;) {
            std::size_t pos = 0;
            for (std::size_t a = 0; a < d; ++a)
                pos += static_cast<std::size_t>(idx[a] - 1 + off[a]) * stride[a];
            s += eps[pos];
            std::size_t a = d;
            for (; a-- > 0;) {
                if (off[a] < spec.m) {
                    ++off[a];
                    break;
                }
                off[a] = 0;
            }
            if (a == static_cast<std::size_t>(-1)) break;
        }
        x[out] = c * s;
        std::size_t a = d;
        for (; a-- > 0;) {
            if (idx[a] < spec.box[a]) {
                ++idx[a];
                for (std::size_t b = a + 1; b < d; ++b) idx[b] = 1;
                break;
            }
        }
        if (a == static_cast<std::size_t>(-1)) break;
    }
}

struct UStatMoments {
    double mean = 0.0;
    double sigma = 0.0;
    bool estimated = false;
};

// U = sum_{i<=j} h(x_i, x_j) through power sums S1, S2.
inline double ustat_value(const UStatSpec& spec, double s1, double s2) {
    const double n = static_cast<double>(spec.n);
    switch (spec.kernel) {
        case UStatKernel::Sum: return (n + 1.0) * s1;
        case UStatKernel::ProdMix: return 0.5 * (s1 * s1 + s2) + (n + 1.0) * s1;
        default: return 0.5 * (n * s2 - s1 * s1) - 0.5 * n * (n + 1.0);
    }
}

inline UStatMoments ustat_moments(const UStatSpec& spec, std::uint64_t seed) {
    const double n = static_cast<double>(spec.n);
    UStatMoments out;
    switch (spec.kernel) {
        case UStatKernel::Sum:
            out.mean = 0.0;
            out.sigma = (n + 1.0) * std::sqrt(n);
            return out;
        case UStatKernel::ProdMix: out.mean = n; break;       // E[(S1^2+S2)/2] = n
        default: out.mean = -n; break;                        // n diagonal terms of -1
    }
    // pilot estimate of sigma, flagged
    const std::int64_t pilot = 8192;
    double a1 = 0.0, a2 = 0.0;
    for (std::int64_t r = 0; r < pilot; ++r) {
        Rng rng(derive_seed(seed ^ 0x70696c6f74ULL, static_cast<std::uint64_t>(r)));
        double s1 = 0.0, s2 = 0.0;
        for (long long i = 0; i < spec.n; ++i) {
            double v = draw_law(spec.base, rng);
            s1 += v;
            s2 += v * v;
        }
        double u = ustat_value(spec, s1, s2);
        a1 += u;
        a2 += u * u;
    }
    double pn = static_cast<double>(pilot);
    out.sigma = std::sqrt(std::max(0.0, (a2 - a1 * a1 / pn) / (pn - 1.0)));
    out.estimated = true;
    return out;
}

}  // namespace detail

// Sorted sample of standardized W draws.
struct EmpiricalDist {
    std::vector<double> sorted;
    double sigma_raw = 0.0;
    bool sigma_estimated = false;

    std::size_t size() const { return sorted.size(); }
};

// reps i.i.d. draws of W = sigma^{-1} sum_i X_i, in replicate order.
// Replicate r always runs on derive_seed(seed, r), so the output is identical
// for any worker count.
inline EmpiricalDist sample_w_raw(const GeneratorSpec& spec, std::int64_t reps,
                                  std::uint64_t seed, int workers = 1) {
    if (reps < 1) throw ConfigError("sample_w: reps must be >= 1");
    EmpiricalDist out;
    out.sorted.assign(static_cast<std::size_t>(reps), 0.0);
    const int nchunks = std::max(1, std::min<int>(256, static_cast<int>((reps + 1023) / 1024)));
    const std::int64_t per = (reps + nchunks - 1) / nchunks;

    if (const auto* ma = std::get_if<MdepMASpec>(&spec.gen)) {
        const auto weights = detail::ma_weights(*ma);
        out.sigma_raw = detail::ma_sigma_raw(*ma);
        if (!(out.sigma_raw > 0.0)) throw NumericError("sample_w: sigma = 0");
        parallel_chunks(nchunks, workers, [&](int c) {
            for (std::int64_t r = c * per; r < std::min<std::int64_t>(reps, (c + 1) * per); ++r) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
                out.sorted[static_cast<std::size_t>(r)] =
                    detail::ma_draw_w(*ma, weights, rng) / out.sigma_raw;
            }
        });
    } else {
        const auto& us = std::get<UStatSpec>(spec.gen);
        const auto mom = detail::ustat_moments(us, seed);
        out.sigma_raw = mom.sigma;
        out.sigma_estimated = mom.estimated;
        if (!(out.sigma_raw > 0.0)) throw NumericError("sample_w: sigma = 0");
        parallel_chunks(nchunks, workers, [&](int c) {
            for (std::int64_t r = c * per; r < std::min<std::int64_t>(reps, (c + 1) * per); ++r) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
                double s1 = 0.0, s2 = 0.0;
                for (long long i = 0; i < us.n; ++i) {
                    double v = draw_law(us.base, rng);
                    s1 += v;
                    s2 += v * v;
                }
                out.sorted[static_cast<std::size_t>(r)] =
                    (detail::ustat_value(us, s1, s2) - mom.mean) / mom.sigma;
            }
        });
    }
    return out;
}

inline EmpiricalDist sample_w(const GeneratorSpec& spec, std::int64_t reps, std::uint64_t seed,
                              int workers = 1) {
    EmpiricalDist out = sample_w_raw(spec, reps, seed, workers);
    std::sort(out.sorted.begin(), out.sorted.end());
    return out;
}

// Quantile-coupling estimate of W_p(empirical, N(0,1)) with midpoint
// quantiles: ((1/N) sum_i |X_(i) - Phi^{-1}((i-1/2)/N)|^p)^{1/p}.
inline double wasserstein_to_normal(const EmpiricalDist& d, double p) {
    if (d.size() < 2) throw ConfigError("wasserstein_to_normal: need N >= 2");
    const double n = static_cast<double>(d.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double q = norm_quantile((static_cast<double>(i) + 0.5) / n);
        acc += std::pow(std::abs(d.sorted[i] - q), p);
    }
    return std::pow(acc / n, 1.0 / p);
}

// Two-sample variant for equally sized sorted samples.
inline double wasserstein_two_sample(const EmpiricalDist& a, const EmpiricalDist& b, double p) {
    if (a.size() != b.size() || a.size() == 0)
        throw ConfigError("wasserstein_two_sample: need equal nonzero sizes");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::pow(std::abs(a.sorted[i] - b.sorted[i]), p);
    return std::pow(acc / static_cast<double>(a.size()), 1.0 / p);
}

struct RateFit {
    std::vector<long long> sizes;
    std::vector<double> distances;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    bool normal_convergence = false;  // slope significantly negative
};

// Log-log least squares of distance against size.
inline RateFit fit_rate(const std::vector<long long>& sizes,
                        const std::vector<double>& distances) {
    if (sizes.size() < 3 || sizes.size() != distances.size())
        throw ConfigError("fit_rate: need at least 3 (size, distance) points");
    RateFit fit;
    fit.sizes = sizes;
    fit.distances = distances;
    const std::size_t n = sizes.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(distances[i] > 0.0)) throw NumericError("fit_rate: nonpositive distance");
        xs[i] = std::log(static_cast<double>(sizes[i]));
        ys[i] = std::log(distances[i]);
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw NumericError("fit_rate: degenerate size spread");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = ys[i] - fit.intercept - fit.slope * xs[i];
        rss += e * e;
    }
    fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    fit.normal_convergence = fit.slope + 2.0 * fit.slope_se < 0.0;
    return fit;
}

inline RateFit rate_experiment(const GeneratorSpec& proto, const std::vector<long long>& sizes,
                               double p, std::int64_t reps, std::uint64_t seed,
                               int workers = 1) {
    if (sizes.size() < 3) throw ConfigError("rate_experiment: need at least 3 sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1]) throw ConfigError("rate_experiment: sizes must increase");
    std::vector<double> distances;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        GeneratorSpec spec = with_size(proto, sizes[i]);
        std::uint64_t size_seed = derive_seed(seed, 0x53495a45ULL + i);
        EmpiricalDist d = sample_w(spec, reps, size_seed, workers);
        distances.push_back(wasserstein_to_normal(d, p));
    }
    return fit_rate(sizes, distances);
}

struct TailPoint {
    double t = 0.0;
    double prob = 0.0;  // P(W >= t)
    double se = 0.0;
    bool reliable = true;  // expected tail count >= 10
};

inline std::vector<TailPoint> tail_probability(const GeneratorSpec& spec,
                                               const std::vector<double>& t_grid,
                                               std::int64_t reps, std::uint64_t seed,
                                               int workers = 1) {
    EmpiricalDist d = sample_w(spec, reps, seed, workers);
    const double n = static_cast<double>(d.size());
    std::vector<TailPoint> out;
    for (double t : t_grid) {
        auto it = std::lower_bound(d.sorted.begin(), d.sorted.end(), t);
        double count = static_cast<double>(d.sorted.end() - it);
        TailPoint pt;
        pt.t = t;
        pt.prob = count / n;
        pt.se = std::sqrt(pt.prob * (1.0 - pt.prob) / n);
        pt.reliable = count >= 10.0;
        out.push_back(pt);
    }
    return out;
}

// JointModel adapters so the remainder/bound machinery can run against the
// simulation generators (sampler backend, pilot sigma flagged for kernels
// without a closed form).
inline JointModel joint_model_from_generator(const GeneratorSpec& spec,
                                             std::uint64_t pilot_seed = 0x6d6f64656cULL) {
    if (const auto* ma = std::get_if<MdepMASpec>(&spec.gen)) {
        std::vector<int> dims(ma->box.begin(), ma->box.end());
        DependencyGraph g = DependencyGraph::m_dependent_box(dims, ma->m);
        MdepMASpec copy = *ma;
        return JointModel(
            std::move(g),
            [copy](Rng& rng, std::vector<double>& x) { detail::ma_draw_field(copy, rng, x); },
            detail::ma_sigma_raw(*ma));
    }
    const auto& us = std::get<UStatSpec>(spec.gen);
    DependencyGraph g = DependencyGraph::u_stat_graph(static_cast<int>(us.n), 2);
    // per-tuple values h(x_i, x_j), centered on the diagonal
    double diag_shift = 0.0;
    if (us.kernel == UStatKernel::ProdMix) diag_shift = 1.0;
    if (us.kernel == UStatKernel::VarianceCentered) diag_shift = -1.0;
    UStatSpec copy = us;
    std::vector<VertexId> tuples = g.vertices();
    auto sampler = [copy, diag_shift, tuples](Rng& rng, std::vector<double>& out) {
        std::vector<double> x(static_cast<std::size_t>(copy.n));
        for (auto& v : x) v = draw_law(copy.base, rng);
        out.resize(tuples.size());
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            double a = x[static_cast<std::size_t>(tuples[t][0] - 1)];
            double b = x[static_cast<std::size_t>(tuples[t][1] - 1)];
            double h;
            switch (copy.kernel) {
                case UStatKernel::Sum: h = a + b; break;
                case UStatKernel::ProdMix: h = a * b + a + b; break;
                default: h = 0.5 * (a - b) * (a - b) - 1.0; break;
            }
            if (tuples[t][0] == tuples[t][1]) h -= diag_shift;
            out[t] = h;
        }
    };
    double sigma = std::numeric_limits<double>::quiet_NaN();
    if (us.kernel == UStatKernel::Sum)
        sigma = (static_cast<double>(us.n) + 1.0) * std::sqrt(static_cast<double>(us.n));
    return JointModel(std::move(g), std::move(sampler), sigma, pilot_seed);
}

}  // namespace localclt

#endif
