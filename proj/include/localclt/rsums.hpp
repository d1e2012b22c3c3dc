#ifndef LOCALCLT_RSUMS_HPP
#define LOCALCLT_RSUMS_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "localclt/combinat.hpp"
#include "localclt/cumulants.hpp"
#include "localclt/errors.hpp"
#include "localclt/models.hpp"
#include "localclt/parallel.hpp"

namespace localclt {

// Chain enumeration cap. Exceeding it is an error, never a silent
// approximation.
struct EvalBudget {
    std::uint64_t max_chain_visits = 50'000'000;
};

struct McOptions {
    std::int64_t replicates = 65536;
    int batches = 16;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct ValueWithError {
    double value = 0.0;
    double se = 0.0;   // 0 when exact
    bool exact = true;
};

namespace detail {

// Evaluation plan shared by remainder terms, S-sums and R-sums: a sum over
// neighborhood index chains of compositional expectations of per-slot
// quantities. Slots 1..t-1 (or 1..t without pow_last) carry X or |X| at the
// chain index; with pow_last the final slot is (sum_{i in N_t} |X_i|)^omega.
struct SumSpec {
    int order = 0;                      // slot count t
    const SignSequence* signs = nullptr;  // null: default chains N(i_{1:j-1})
    std::vector<Composition> comps;
    bool abs_values = true;
    bool pow_last = true;
    double omega = 1.0;
};

// Per-outcome (or per-replicate) value of one slot given a fixed chain.
inline double slot_value(const SumSpec& spec, const std::vector<int>& chain,
                         const std::vector<int>& last_set, int slot,
                         const std::vector<double>& x) {
    const int chain_len = spec.order - (spec.pow_last ? 1 : 0);
    if (slot <= chain_len) {
        double v = x[static_cast<std::size_t>(chain[static_cast<std::size_t>(slot - 1)])];
        return spec.abs_values ? std::abs(v) : v;
    }
    double s = 0.0;
    for (int idx : last_set) s += std::abs(x[static_cast<std::size_t>(idx)]);
    return std::pow(s, spec.omega);
}

// E[prod_{slot=a..b} value] over a block of slots, either exactly over the
// outcome table or as a plug-in mean over replicate fields.
class BlockEvaluator {
public:
    BlockEvaluator(const JointModel& model, const std::vector<std::vector<double>>* fields)
        : model_(model), fields_(fields) {}

    double operator()(const SumSpec& spec, const std::vector<int>& chain,
                      const std::vector<int>& last_set, int a, int b) const {
        double acc = 0.0;
        if (fields_ == nullptr) {
            for (const auto& o : model_.outcomes()) {
                double prod = o.prob;
                for (int s = a; s <= b; ++s) prod *= slot_value(spec, chain, last_set, s, o.x);
                acc += prod;
            }
        } else {
            for (const auto& x : *fields_) {
                double prod = 1.0;
                for (int s = a; s <= b; ++s) prod *= slot_value(spec, chain, last_set, s, x);
                acc += prod;
            }
            acc /= static_cast<double>(fields_->size());
        }
        return acc;
    }

private:
    const JointModel& model_;
    const std::vector<std::vector<double>>* fields_;  // null for exact backend
};

// Sum over all chains with first index i1 of the composition values.
inline double eval_for_first_index(const JointModel& model, const SumSpec& spec,
                                   const BlockEvaluator& blocks, int i1,
                                   std::atomic<std::uint64_t>& visits,
                                   std::uint64_t max_visits) {
    const DependencyGraph& g = model.graph();
    const int chain_len = spec.order - (spec.pow_last ? 1 : 0);
    double total = 0.0;
    std::vector<int> chain{i1};
    std::vector<double> block_exp;

    auto handle_chain = [&]() {
        std::vector<int> last_set;
        if (spec.pow_last) {
            int span = spec.signs != nullptr
                           ? std::abs((*spec.signs)[static_cast<std::size_t>(spec.order - 1)])
                           : chain_len;
            if (span == 0) return;  // empty last index set: the term vanishes
            std::vector<int> base(chain.begin(), chain.begin() + span);
            last_set = g.neighborhood_idx(base);
        }
        for (const auto& eta : spec.comps) {
            double prod = 1.0;
            int a = 1;
            for (int part : eta.parts) {
                prod *= blocks(spec, chain, last_set, a, a + part - 1);
                if (prod == 0.0) break;
                a += part;
            }
            total += prod;
        }
    };

    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == chain_len) {
            handle_chain();
            return;
        }
        int span = spec.signs != nullptr
                       ? std::abs((*spec.signs)[static_cast<std::size_t>(depth)])
                       : depth;
        if (span == 0) return;  // sum over an empty set
        std::vector<int> base(chain.begin(), chain.begin() + span);
        for (int next : g.neighborhood_idx(base)) {
            if (visits.fetch_add(1) + 1 > max_visits)
                throw NumericError("rsums: chain visit budget exceeded");
            chain.push_back(next);
            self(self, depth + 1);
            chain.pop_back();
        }
    };
    rec(rec, 1);
    return total;
}

inline double eval_exact(const JointModel& model, const SumSpec& spec,
                         const EvalBudget& budget, int workers) {
    BlockEvaluator blocks(model, nullptr);
    const int n = model.graph().size();
    std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
    std::atomic<std::uint64_t> visits{0};
    parallel_chunks(n, workers, [&](int i1) {
        partial[static_cast<std::size_t>(i1)] =
            eval_for_first_index(model, spec, blocks, i1, visits, budget.max_chain_visits);
    });
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

inline ValueWithError eval_mc(const JointModel& model, const SumSpec& spec,
                              const EvalBudget& budget, const McOptions& mc) {
    if (mc.batches < 2) throw ConfigError("rsums: MC needs at least 2 batches");
    const std::int64_t per_batch = mc.replicates / mc.batches;
    if (per_batch < 1) throw ConfigError("rsums: fewer replicates than batches");
    const int n = model.graph().size();
    std::vector<double> totals(static_cast<std::size_t>(mc.batches), 0.0);
    parallel_chunks(mc.batches, mc.workers, [&](int b) {
        std::vector<std::vector<double>> fields;
        fields.reserve(static_cast<std::size_t>(per_batch));
        for (std::int64_t r = 0; r < per_batch; ++r) {
            std::uint64_t rep = static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(per_batch) +
                                static_cast<std::uint64_t>(r);
            fields.push_back(model.field(mc.seed, rep));
        }
        BlockEvaluator blocks(model, &fields);
        std::atomic<std::uint64_t> visits{0};
        double t = 0.0;
        for (int i1 = 0; i1 < n; ++i1)
            t += eval_for_first_index(model, spec, blocks, i1, visits, budget.max_chain_visits);
        totals[static_cast<std::size_t>(b)] = t;
    });
    double mean = 0.0;
    for (double t : totals) mean += t;
    mean /= static_cast<double>(mc.batches);
    double ss = 0.0;
    for (double t : totals) ss += (t - mean) * (t - mean);
    double se = std::sqrt(ss / (static_cast<double>(mc.batches) - 1.0) /
                          static_cast<double>(mc.batches));
    return {mean, se, false};
}

inline ValueWithError eval_spec(const JointModel& model, const SumSpec& spec,
                                const EvalBudget& budget, const McOptions& mc,
                                int workers) {
    if (model.exact()) return {eval_exact(model, spec, budget, workers), 0.0, true};
    return eval_mc(model, spec, budget, mc);
}

}  // namespace detail

// Order-t compositional expectation [eta_1,...,eta_l] |> (Y_1,...,Y_t) for
// quantities given per-slot as vertex indices; abs_values selects |X| vs X.
// Exact backend only; the compositional structure inside remainder/S/R sums
// handles the sampler backend with common random numbers.
inline double comp_expectation(const JointModel& model, const Composition& eta,
                               const std::vector<int>& slots, bool abs_values = true) {
    if (eta.total() != static_cast<int>(slots.size()))
        throw ConfigError("comp_expectation: composition total != slot count");
    detail::SumSpec spec;
    spec.order = static_cast<int>(slots.size());
    spec.abs_values = abs_values;
    spec.pow_last = false;
    detail::BlockEvaluator blocks(model, nullptr);
    double prod = 1.0;
    int a = 1;
    std::vector<int> chain = slots;
    for (int part : eta.parts) {
        prod *= blocks(spec, chain, {}, a, a + part - 1);
        a += part;
    }
    return prod;
}

// Remainder term R_{k,omega}: the sum over C*(k+2) and dependency-neighborhood
// chains i_2 in N(i_1), ..., i_{k+1} in N(i_{1:k}) of compositional
// expectations of (|X_{i_1}|, ..., |X_{i_{k+1}}|, (sum_{N(i_{1:k+1})} |X|)^omega).
// The model is already normalized to sigma = 1.
inline ValueWithError remainder(const JointModel& model, int k, double omega,
                                const EvalBudget& budget = {}, const McOptions& mc = {},
                                int workers = 1) {
    if (k < 1) throw ConfigError("remainder: k must be >= 1");
    if (!(omega > 0.0 && omega <= 1.0)) throw ConfigError("remainder: omega must lie in (0,1]");
    detail::SumSpec spec;
    spec.order = k + 2;
    spec.comps = compositions_star(k + 2);
    spec.abs_values = true;
    spec.pow_last = true;
    spec.omega = omega;
    return detail::eval_spec(model, spec, budget, mc, workers);
}

// Signed S-sum over a general sign sequence (t_1, ..., t_k), t_1 = 0,
// |t_j| <= j-1. Factorization blocks are read off the positive positions.
inline ValueWithError s_sum(const JointModel& model, const SignSequence& t,
                            const EvalBudget& budget = {}, const McOptions& mc = {},
                            int workers = 1) {
    if (t.empty() || t[0] != 0) throw ConfigError("s_sum: t_1 must be 0");
    for (std::size_t j = 0; j < t.size(); ++j)
        if (std::abs(t[j]) > static_cast<int>(j))
            throw ConfigError("s_sum: |t_j| must be <= j-1");
    detail::SumSpec spec;
    spec.order = static_cast<int>(t.size());
    spec.signs = &t;
    spec.comps = {composition_for(t)};
    spec.abs_values = false;
    spec.pow_last = false;
    return detail::eval_spec(model, spec, budget, mc, workers);
}

// R-sum: absolute-value S-sum whose final slot is (sum_{i in N_k} |X_i|)^omega.
inline ValueWithError r_sum(const JointModel& model, const SignSequence& t, double omega,
                            const EvalBudget& budget = {}, const McOptions& mc = {},
                            int workers = 1) {
    if (t.size() < 2) throw ConfigError("r_sum: order must be >= 2");
    if (t[0] != 0) throw ConfigError("r_sum: t_1 must be 0");
    for (std::size_t j = 0; j < t.size(); ++j)
        if (std::abs(t[j]) > static_cast<int>(j))
            throw ConfigError("r_sum: |t_j| must be <= j-1");
    if (!(omega > 0.0 && omega <= 1.0)) throw ConfigError("r_sum: omega must lie in (0,1]");
    detail::SumSpec spec;
    spec.order = static_cast<int>(t.size());
    spec.signs = &t;
    spec.comps = {composition_for(t)};
    spec.abs_values = true;
    spec.pow_last = true;
    spec.omega = omega;
    return detail::eval_spec(model, spec, budget, mc, workers);
}

struct RemainderEntry {
    int j = 0;
    double omega = 1.0;
    double value = 0.0;
    double se = 0.0;
    bool exact = true;
};

struct RemainderTable {
    std::vector<RemainderEntry> entries;

    const RemainderEntry* find(int j, double omega) const {
        for (const auto& e : entries)
            if (e.j == j && std::abs(e.omega - omega) < 1e-12) return &e;
        return nullptr;
    }
};

// Fills the entries the local-wp bound needs: (j, 1) for j <= ceil(p)-1 and
// (j, omega) for j <= ceil(p), omega = p+1-ceil(p). For integer p the two
// families coincide and each entry appears once.
inline RemainderTable remainder_table(const JointModel& model, double p,
                                      const EvalBudget& budget = {}, const McOptions& mc = {},
                                      int workers = 1) {
    if (!(p >= 1.0)) throw ConfigError("remainder_table: p must be >= 1");
    const int k = static_cast<int>(std::ceil(p));
    const double omega = p + 1.0 - static_cast<double>(k);
    RemainderTable table;
    for (int j = 1; j <= k - 1; ++j) {
        auto v = remainder(model, j, 1.0, budget, mc, workers);
        table.entries.push_back({j, 1.0, v.value, v.se, v.exact});
    }
    for (int j = 1; j <= k; ++j) {
        if (table.find(j, omega) != nullptr) continue;
        auto v = remainder(model, j, omega, budget, mc, workers);
        table.entries.push_back({j, omega, v.value, v.se, v.exact});
    }
    return table;
}

// Residual of the exact-polynomial expansion of E[W f(W)]:
//   E[W f(W)] - sum_{j=1}^{deg} kappa_{j+1}(W)/j! E[f^(j)(W)],  f = x^deg.
// For polynomial f the Hoelder remainder vanishes, so this is ~0 up to
// roundoff on any exact model.
inline double verify_wf_expansion(const JointModel& model, int f_degree) {
    if (f_degree < 1) throw ConfigError("verify_wf_expansion: degree must be >= 1");
    MomentSeq<double> mu = model.w_moments(f_degree + 1);
    CumulantSeq<double> kap = cumulants_from_moments(mu);
    double lhs = mu.mu(f_degree + 1);
    double rhs = 0.0;
    double jfact = 1.0;
    for (int j = 1; j <= f_degree; ++j) {
        jfact *= static_cast<double>(j);
        double fall = 1.0;  // deg! / (deg-j)!
        for (int i = 0; i < j; ++i) fall *= static_cast<double>(f_degree - i);
        rhs += kap.kappa(j + 1) / jfact * fall * mu.mu(f_degree - j);
    }
    return lhs - rhs;
}

struct CumulantBoundResult {
    double lhs = 0.0;  // |kappa_{k+2}(W)|
    double rhs = 0.0;  // 4^k R_{k,1}
    bool pass = false;
};

// Checks |kappa_{k+2}(W)| <= 4^k R_{k,1} on an exact model.
inline CumulantBoundResult cumulant_bound_check(const JointModel& model, int k,
                                                const EvalBudget& budget = {},
                                                int workers = 1) {
    CumulantBoundResult res;
    res.lhs = std::abs(model.w_cumulants(k + 2).kappa(k + 2));
    res.rhs = std::pow(4.0, k) * remainder(model, k, 1.0, budget, {}, workers).value;
    res.pass = res.lhs <= res.rhs;
    return res;
}

}  // namespace localclt

#endif
