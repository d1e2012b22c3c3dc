#ifndef LOCALCLT_MODELS_HPP
#define LOCALCLT_MODELS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "localclt/cumulants.hpp"
#include "localclt/depgraph.hpp"
#include "localclt/errors.hpp"
#include "localclt/rng.hpp"

namespace localclt {

// One joint outcome of an exact finite model: probability and the value of
// every X_i, aligned with the graph's vertex order.
struct Outcome {
    double prob = 0.0;
    std::vector<double> x;
};

// Draws one replicate of the raw field (X_i)_i, aligned with vertex order.
using FieldSampler = std::function<void(Rng&, std::vector<double>&)>;

// Source of the random vector (X_i) over a dependency graph. Values are
// normalized by sigma at construction, so every downstream sum can assume
// sigma = 1; sigma_raw() carries the original scale for reports.
class JointModel {
public:
    JointModel(DependencyGraph graph, std::vector<Outcome> outcomes,
               double mean_tol = 1e-9)
        : graph_(std::move(graph)), outcomes_(std::move(outcomes)) {
        if (outcomes_.empty()) throw ConfigError("exact model: no outcomes");
        double ptot = 0.0;
        for (const auto& o : outcomes_) {
            if (!(o.prob > 0.0)) throw ConfigError("exact model: probabilities must be positive");
            if (static_cast<int>(o.x.size()) != graph_.size())
                throw ConfigError("exact model: outcome value count != vertex count");
            ptot += o.prob;
        }
        if (std::abs(ptot - 1.0) > 1e-9)
            throw ConfigError("exact model: probabilities must sum to 1");
        for (int i = 0; i < graph_.size(); ++i) {
            double mean = 0.0;
            for (const auto& o : outcomes_) mean += o.prob * o.x[static_cast<std::size_t>(i)];
            if (std::abs(mean) > mean_tol)
                throw ConfigError("exact model: X_" + format_vertex(graph_.vertex(i)) +
                                  " has nonzero mean " + std::to_string(mean));
        }
        double m2 = 0.0;
        for (const auto& o : outcomes_) {
            double s = 0.0;
            for (double v : o.x) s += v;
            m2 += o.prob * s * s;
        }
        sigma_raw_ = std::sqrt(m2);
        if (!(sigma_raw_ > 0.0)) throw NumericError("exact model: sigma = 0 (degenerate W)");
        for (auto& o : outcomes_)
            for (double& v : o.x) v /= sigma_raw_;
    }

    // Sampler-backed model. sigma_raw > 0 must be supplied (closed form) or
    // left NaN to be pilot-estimated, in which case sigma_estimated() flags
    // the report.
    JointModel(DependencyGraph graph, FieldSampler sampler, double sigma_raw,
               std::uint64_t pilot_seed = 0x9a3c0ffee117ULL, std::int64_t pilot_reps = 4096)
        : graph_(std::move(graph)), sampler_(std::move(sampler)) {
        if (std::isnan(sigma_raw)) {
            sigma_raw_ = pilot_sigma(pilot_seed, pilot_reps);
            sigma_estimated_ = true;
        } else {
            sigma_raw_ = sigma_raw;
        }
        if (!(sigma_raw_ > 0.0)) throw NumericError("sampler model: sigma = 0 (degenerate W)");
    }

    bool exact() const { return sampler_ == nullptr; }
    const DependencyGraph& graph() const { return graph_; }
    double sigma_raw() const { return sigma_raw_; }
    bool sigma_estimated() const { return sigma_estimated_; }

    const std::vector<Outcome>& outcomes() const {
        require_exact("outcomes");
        return outcomes_;
    }

    // One normalized field replicate; replicate index + master seed fix the
    // stream, independent of any worker partitioning.
    std::vector<double> field(std::uint64_t master_seed, std::uint64_t replicate) const {
        if (exact()) throw ConfigError("field(): exact model has no sampler");
        Rng rng(derive_seed(master_seed, replicate));
        std::vector<double> x;
        sampler_(rng, x);
        if (static_cast<int>(x.size()) != graph_.size())
            throw NumericError("sampler produced wrong field size");
        for (double& v : x) v /= sigma_raw_;
        return x;
    }

    // E|X_i|^order of the normalized variable; exact backend only.
    double abs_moment(int vertex, double order) const {
        require_exact("abs_moment");
        double acc = 0.0;
        for (const auto& o : outcomes_)
            acc += o.prob * std::pow(std::abs(o.x[static_cast<std::size_t>(vertex)]), order);
        return acc;
    }

    double abs_moment_sum(double order) const {
        double acc = 0.0;
        for (int i = 0; i < graph_.size(); ++i) acc += abs_moment(i, order);
        return acc;
    }

    std::vector<double> abs_moments_per_vertex(double order) const {
        std::vector<double> out(static_cast<std::size_t>(graph_.size()));
        for (int i = 0; i < graph_.size(); ++i) out[static_cast<std::size_t>(i)] = abs_moment(i, order);
        return out;
    }

    // E[W^n] for W = sum_i X_i (normalized), exact backend only.
    double w_moment(int n) const {
        require_exact("w_moment");
        double acc = 0.0;
        for (const auto& o : outcomes_) {
            double s = 0.0;
            for (double v : o.x) s += v;
            acc += o.prob * std::pow(s, n);
        }
        return acc;
    }

    MomentSeq<double> w_moments(int order) const {
        MomentSeq<double> m;
        m.values.assign(static_cast<std::size_t>(order) + 1, 0.0);
        m.values[0] = 1.0;
        for (int n = 1; n <= order; ++n) m.values[static_cast<std::size_t>(n)] = w_moment(n);
        return m;
    }

    CumulantSeq<double> w_cumulants(int order) const {
        return cumulants_from_moments(w_moments(order));
    }

private:
    void require_exact(const char* op) const {
        if (!exact())
            throw ConfigError(std::string(op) + ": needs the exact backend (no moment oracle registered)");
    }

    double pilot_sigma(std::uint64_t seed, std::int64_t reps) {
        double s1 = 0.0, s2 = 0.0;
        std::vector<double> x;
        for (std::int64_t r = 0; r < reps; ++r) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
            sampler_(rng, x);
            double s = 0.0;
            for (double v : x) s += v;
            s1 += s;
            s2 += s * s;
        }
        const double n = static_cast<double>(reps);
        double var = (s2 - s1 * s1 / n) / (n - 1.0);
        return std::sqrt(std::max(0.0, var));
    }

    DependencyGraph graph_;
    std::vector<Outcome> outcomes_;  // normalized values
    FieldSampler sampler_;
    double sigma_raw_ = 0.0;
    bool sigma_estimated_ = false;
};

// Raw moments of W = sum_i X_i under a sampler-backed model, with standard
// errors; replicate r draws through derive_seed(seed, r).
inline MomentsWithErrors estimate_w_moments(const JointModel& model, int order,
                                            std::int64_t reps, std::uint64_t seed) {
    if (reps < 2) throw ConfigError("estimate_w_moments: reps must be >= 2");
    if (order < 1) throw ConfigError("estimate_w_moments: order must be >= 1");
    std::vector<double> sum(static_cast<std::size_t>(2 * order) + 1, 0.0);
    for (std::int64_t r = 0; r < reps; ++r) {
        auto x = model.field(seed, static_cast<std::uint64_t>(r));
        double w = 0.0;
        for (double v : x) w += v;
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
