#ifndef LOCALCLT_COMBINAT_HPP
#define LOCALCLT_COMBINAT_HPP

#include <vector>

#include "localclt/depgraph.hpp"
#include "localclt/errors.hpp"

namespace localclt {

// Integer composition (eta_1, ..., eta_l) of t: positive parts summing to t.
struct Composition {
    std::vector<int> parts;
    int total() const {
        int s = 0;
        for (int p : parts) s += p;
        return s;
    }
};

// All 2^(t-1) compositions of t, first part descending, then recursively.
inline std::vector<Composition> compositions(int t) {
    if (t <= 0) throw ConfigError("compositions: t must be >= 1");
    std::vector<Composition> out;
    Composition cur;
    auto rec = [&](auto&& self, int rest) -> void {
        if (rest == 0) {
            out.push_back(cur);
            return;
        }
        for (int a = rest; a >= 1; --a) {
            cur.parts.push_back(a);
            self(self, rest - a);
            cur.parts.pop_back();
        }
    };
    rec(rec, t);
    return out;
}

// C*(t): compositions with every part except possibly the last >= 2.
inline std::vector<Composition> compositions_star(int t) {
    if (t < 2) throw ConfigError("compositions_star: t must be >= 2");
    std::vector<Composition> out;
    Composition cur;
    auto rec = [&](auto&& self, int rest) -> void {
        if (rest == 0) {
            out.push_back(cur);
            return;
        }
        for (int a = rest; a >= 1; --a) {
            if (a == 1 && rest != 1) continue;  // a 1-part may only close the composition
            cur.parts.push_back(a);
            self(self, rest - a);
            cur.parts.pop_back();
        }
    };
    rec(rec, t);
    return out;
}

// Sign sequence (t_1, ..., t_len) with t_1 = 0 and |t_j| <= j-1, steering the
// index sets of S-, R- and remainder sums: position j draws its index from
// N(i_{1:|t_j|}) (empty set if t_j = 0, the whole vertex set at j = 1).
using SignSequence = std::vector<int>;

// Members of M_{1,k+2}: length k+2, t_{j+1} = +-j with min(t_j, t_{j+1}) < 0
// for every consecutive pair. Positive branch first at each position.
inline std::vector<SignSequence> sign_sequences(int k) {
    if (k < 1) throw ConfigError("sign_sequences: k must be >= 1");
    std::vector<SignSequence> out;
    SignSequence cur{0};
    auto rec = [&](auto&& self, int j) -> void {
        if (j == k + 2) {
            out.push_back(cur);
            return;
        }
        for (int sign : {+1, -1}) {
            int tj = sign * j;
            if (std::min(cur.back(), tj) >= 0) continue;
            cur.push_back(tj);
            self(self, j + 1);
            cur.pop_back();
        }
    };
    rec(rec, 1);
    return out;
}

// Bijection between C*(t) and M_{1,t}: the positive positions of the sign
// sequence are the block boundaries 1 + eta_1 + ... + eta_j.
inline SignSequence sign_sequence_for(const Composition& eta) {
    const int t = eta.total();
    SignSequence s(static_cast<std::size_t>(t));
    for (int j = 0; j < t; ++j) s[static_cast<std::size_t>(j)] = -j;
    int boundary = 1;
    for (std::size_t b = 0; b + 1 < eta.parts.size(); ++b) {
        boundary += eta.parts[b];
        s[static_cast<std::size_t>(boundary - 1)] = boundary - 1;
    }
    return s;
}

inline Composition composition_for(const SignSequence& t) {
    Composition eta;
    int prev = 1;
    for (std::size_t j = 1; j < t.size(); ++j) {
        if (t[j] > 0) {
            eta.parts.push_back(static_cast<int>(j) + 1 - prev);
            prev = static_cast<int>(j) + 1;
        }
    }
    eta.parts.push_back(static_cast<int>(t.size()) + 1 - prev);
    return eta;
}

// Streams index chains (i_1, ..., i_q). With no sign sequence, position j+1
// draws from N(i_{1:j}) (the default chains of the remainder sums). With a
// sign sequence, position j draws from N(i_{1:|t_j|}); a zero entry past the
// first position makes the stream empty. Chains are visited in lexicographic
// vertex order per position. The visitor gets a span of vertex indices; a
// false return aborts the enumeration.
//
// visited counts enumeration nodes and is checked against node_budget so
// callers can enforce evaluation budgets instead of silently truncating.
template <class Visitor>
bool enumerate_chains(const DependencyGraph& g, int q, const SignSequence* signs,
                      Visitor&& visit, std::uint64_t node_budget = UINT64_MAX,
                      std::uint64_t* visited = nullptr) {
    if (q < 1) throw ConfigError("enumerate_chains: q must be >= 1");
    if (signs != nullptr && static_cast<int>(signs->size()) < q)
        throw ConfigError("enumerate_chains: sign sequence shorter than q");
    std::uint64_t local_count = 0;
    std::uint64_t& count = visited != nullptr ? *visited : local_count;
    std::vector<int> chain;
    chain.reserve(static_cast<std::size_t>(q));
    auto rec = [&](auto&& self, int depth) -> bool {
        if (depth == q) return visit(static_cast<const std::vector<int>&>(chain));
        std::vector<int> candidates;
        if (depth == 0) {
            candidates.resize(static_cast<std::size_t>(g.size()));
            for (int i = 0; i < g.size(); ++i) candidates[static_cast<std::size_t>(i)] = i;
        } else {
            int span = signs != nullptr ? std::abs((*signs)[static_cast<std::size_t>(depth)]) : depth;
            if (span == 0) return true;  // empty index set: nothing to stream
            std::vector<int> base(chain.begin(), chain.begin() + span);
            candidates = g.neighborhood_idx(base);
        }
        for (int c : candidates) {
            if (++count > node_budget)
                throw NumericError("enumerate_chains: node budget exceeded");
            chain.push_back(c);
            bool keep = self(self, depth + 1);
            chain.pop_back();
            if (!keep) return false;
        }
        return true;
    };
    return rec(rec, 0);
}

}  // namespace localclt

#endif
