#ifndef LOCALCLT_TESTS_ORACLES_HPP
#define LOCALCLT_TESTS_ORACLES_HPP

// Brute-force reference implementations kept independent of the library code
// paths they check, plus seeded random-model builders for the batteries.

#include <cstdint>
#include <vector>

#include "localclt/combinat.hpp"
#include "localclt/models.hpp"
#include "localclt/rng.hpp"

namespace oracles {

// All compositions of t via the 2^(t-1) gap bitmasks.
inline std::vector<std::vector<int>> compositions_bitmask(int t) {
    std::vector<std::vector<int>> out;
    for (std::uint32_t mask = 0; mask < (1u << (t - 1)); ++mask) {
        std::vector<int> parts;
        int run = 1;
        for (int g = 0; g < t - 1; ++g) {
            if (mask & (1u << g)) {
                parts.push_back(run);
                run = 1;
            } else {
                ++run;
            }
        }
        parts.push_back(run);
        out.push_back(parts);
    }
    return out;
}

// Partial Bell polynomial by direct multi-index enumeration:
// sum over i_1 + ... + i_{n-j+1} = j, i_1 + 2 i_2 + ... = n of
// n!/(prod i_l!) prod (x_l / l!)^{i_l}.
template <class T>
T bell_bruteforce(int n, int j, const std::vector<T>& x) {
    const int len = n - j + 1;
    std::vector<int> idx(static_cast<std::size_t>(len), 0);
    T total(0);
    auto rec = [&](auto&& self, int pos, int sum_i, int sum_li) -> void {
        if (pos == len) {
            if (sum_i != j || sum_li != n) return;
            T term(1);
            // n! / prod(i_l!) * prod (x_l/l!)^{i_l}
            T nfact(1);
            for (int v = 2; v <= n; ++v) nfact *= T(v);
            term = nfact;
            for (int l = 1; l <= len; ++l) {
                int il = idx[static_cast<std::size_t>(l - 1)];
                T ifact(1);
                for (int v = 2; v <= il; ++v) ifact *= T(v);
                term /= ifact;
                T lfact(1);
                for (int v = 2; v <= l; ++v) lfact *= T(v);
                for (int rep = 0; rep < il; ++rep)
                    term *= x[static_cast<std::size_t>(l - 1)] / lfact;
            }
            total += term;
            return;
        }
        for (int v = 0; sum_i + v <= j && sum_li + v * (pos + 1) <= n; ++v) {
            idx[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, sum_i + v, sum_li + (pos + 1) * v);
        }
        idx[static_cast<std::size_t>(pos)] = 0;
    };
    rec(rec, 0, 0, 0);
    return total;
}

// Raw ingredients of a random model: graph plus a mean-centered outcome
// table (values not yet normalized by sigma).
struct RawModel {
    localclt::DependencyGraph graph;
    std::vector<localclt::Outcome> outcomes;
};

inline RawModel random_raw(std::uint64_t seed, int max_vertices = 5, int max_outcomes = 8) {
    localclt::Rng rng(seed);
    for (;;) {
        int nv = 1 + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(max_vertices));
        int no = 2 + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(max_outcomes - 1));
        std::vector<std::pair<localclt::VertexId, localclt::VertexId>> edges;
        std::vector<localclt::VertexId> verts;
        for (int v = 1; v <= nv; ++v) verts.push_back({v});
        for (int a = 1; a <= nv; ++a)
            for (int b = a + 1; b <= nv; ++b)
                if (rng.uniform01() < 0.45) edges.push_back({{a}, {b}});
        std::vector<localclt::Outcome> outs(static_cast<std::size_t>(no));
        double ptot = 0.0;
        for (auto& o : outs) {
            o.prob = 0.05 + rng.uniform01();
            ptot += o.prob;
            o.x.resize(static_cast<std::size_t>(nv));
            for (auto& v : o.x) v = 2.0 * rng.uniform01() - 1.0;
        }
        for (auto& o : outs) o.prob /= ptot;
        for (int v = 0; v < nv; ++v) {
            double mean = 0.0;
            for (auto& o : outs) mean += o.prob * o.x[static_cast<std::size_t>(v)];
            for (auto& o : outs) o.x[static_cast<std::size_t>(v)] -= mean;
        }
        try {
            localclt::JointModel probe(localclt::DependencyGraph::from_edge_list(edges, verts),
                                       outs);
            if (probe.sigma_raw() > 0.2)
                return {localclt::DependencyGraph::from_edge_list(edges, verts), outs};
        } catch (const localclt::NumericError&) {
        }
    }
}

// Arbitrary random exact model: random graph, random joint outcome table,
// per-vertex means forced to zero. Suitable for the combinatorial identities
// (route equivalences, polynomial expansions), which hold for any joint law.
inline localclt::JointModel random_model(std::uint64_t seed, int max_vertices = 5,
                                         int max_outcomes = 8) {
    RawModel raw = random_raw(seed, max_vertices, max_outcomes);
    return localclt::JointModel(std::move(raw.graph), std::move(raw.outcomes));
}

// Sampler-backed twin of an exact model built from the same raw table, with
// the closed-form sigma supplied so both share one normalized law.
inline localclt::JointModel sampler_twin(const RawModel& raw) {
    localclt::JointModel exact(raw.graph, raw.outcomes);
    auto outs = raw.outcomes;
    return localclt::JointModel(
        raw.graph,
        [outs](localclt::Rng& rng, std::vector<double>& x) {
            double u = rng.uniform01();
            double acc = 0.0;
            for (const auto& o : outs) {
                acc += o.prob;
                if (u < acc || &o == &outs.back()) {
                    x = o.x;
                    return;
                }
            }
        },
        exact.sigma_raw());
}

// Random model that genuinely satisfies the dependency-graph condition:
// vertices are partitioned into blocks, blocks are independent (the joint
// table is a product over blocks), and the graph is complete inside each
// block. Used for theorem checks that need the local dependence to hold.
inline localclt::JointModel random_ld_model(std::uint64_t seed, int max_vertices = 5) {
    localclt::Rng rng(seed);
    for (;;) {
        int nv = 1 + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(max_vertices));
        // partition into blocks
        std::vector<std::vector<int>> blocks;
        int v = 1;
        while (v <= nv) {
            int bs = 1 + static_cast<int>(rng.bits() % 3ULL);
            bs = std::min(bs, nv - v + 1);
            std::vector<int> blk;
            for (int i = 0; i < bs; ++i) blk.push_back(v++);
            blocks.push_back(blk);
        }
        // per-block outcome tables, centered per vertex
        struct BlockLaw {
            std::vector<double> probs;
            std::vector<std::vector<double>> values;  // outcome -> vertex value
        };
        std::vector<BlockLaw> laws;
        std::size_t total_outcomes = 1;
        for (const auto& blk : blocks) {
            BlockLaw law;
            int no = 2;
            if (total_outcomes * 4 <= 8 && rng.uniform01() < 0.4) no = 3;
            total_outcomes *= static_cast<std::size_t>(no);
            double ptot = 0.0;
            for (int o = 0; o < no; ++o) {
                law.probs.push_back(0.1 + rng.uniform01());
                ptot += law.probs.back();
                std::vector<double> vals;
                for (std::size_t i = 0; i < blk.size(); ++i)
                    vals.push_back(2.0 * rng.uniform01() - 1.0);
                law.values.push_back(vals);
            }
            for (auto& p : law.probs) p /= ptot;
            for (std::size_t i = 0; i < blk.size(); ++i) {
                double mean = 0.0;
                for (std::size_t o = 0; o < law.probs.size(); ++o)
                    mean += law.probs[o] * law.values[o][i];
                for (std::size_t o = 0; o < law.probs.size(); ++o) law.values[o][i] -= mean;
            }
            laws.push_back(law);
        }
        if (total_outcomes > 8) continue;
        // product law over blocks
        std::vector<localclt::Outcome> outs(1);
        outs[0].prob = 1.0;
        outs[0].x.assign(static_cast<std::size_t>(nv), 0.0);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            std::vector<localclt::Outcome> next;
            for (const auto& base : outs) {
                for (std::size_t o = 0; o < laws[b].probs.size(); ++o) {
                    localclt::Outcome cur = base;
                    cur.prob *= laws[b].probs[o];
                    for (std::size_t i = 0; i < blocks[b].size(); ++i)
                        cur.x[static_cast<std::size_t>(blocks[b][i] - 1)] = laws[b].values[o][i];
                    next.push_back(cur);
                }
            }
            outs = std::move(next);
        }
        std::vector<std::pair<localclt::VertexId, localclt::VertexId>> edges;
        std::vector<localclt::VertexId> verts;
        for (int i = 1; i <= nv; ++i) verts.push_back({i});
        for (const auto& blk : blocks)
            for (std::size_t a = 0; a < blk.size(); ++a)
                for (std::size_t b = a + 1; b < blk.size(); ++b)
                    edges.push_back({{blk[a]}, {blk[b]}});
        try {
            localclt::JointModel model(
                localclt::DependencyGraph::from_edge_list(edges, verts), outs);
            if (model.sigma_raw() > 0.2) return model;
        } catch (const localclt::NumericError&) {
        }
    }
}

// Literal nested-loop implementations of the two displayed remainder terms,
// written directly off the triple/quadruple sums (the model is normalized,
// so sigma = 1 here).
inline double r11_nested_loops(const localclt::JointModel& model) {
    const auto& g = model.graph();
    const auto& outs = model.outcomes();
    auto eabs = [&](const std::vector<int>& vs) {
        double acc = 0.0;
        for (const auto& o : outs) {
            double prod = o.prob;
            for (int v : vs) prod *= std::abs(o.x[static_cast<std::size_t>(v)]);
            acc += prod;
        }
        return acc;
    };
    double total = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        for (int j : g.neighborhood_idx({i})) {
            for (int k : g.neighborhood_idx({i, j})) {
                total += eabs({i, j, k}) + eabs({i, j}) * eabs({k});
            }
        }
    }
    return total;
}

inline double r21_nested_loops(const localclt::JointModel& model) {
    const auto& g = model.graph();
    const auto& outs = model.outcomes();
    auto eabs = [&](const std::vector<int>& vs) {
        double acc = 0.0;
        for (const auto& o : outs) {
            double prod = o.prob;
            for (int v : vs) prod *= std::abs(o.x[static_cast<std::size_t>(v)]);
            acc += prod;
        }
        return acc;
    };
    double total = 0.0;
    for (int i = 0; i < g.size(); ++i)
        for (int j : g.neighborhood_idx({i}))
            for (int k : g.neighborhood_idx({i, j}))
                for (int l : g.neighborhood_idx({i, j, k}))
                    total += eabs({i, j, k, l}) + eabs({i, j, k}) * eabs({l}) +
                             eabs({i, j}) * eabs({k, l});
    return total;
}

}  // namespace oracles

#endif
