#ifndef LOCALCLT_MATCHING_HPP
#define LOCALCLT_MATCHING_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "localclt/cumulants.hpp"
#include "localclt/errors.hpp"

namespace localclt {

// Target for the cumulant-matching construction: u_j is the intended
// kappa_{j+2}(W) ratio for j = 1..k-1, k = ceil(p).
struct MatchTarget {
    std::vector<double> u;
    double p = 2.0;
    double c_p = 0.5;               // must lie in (0,1); shrunk on Hankel failure
    long long index_set_size = 0;   // optional |I|, only used by the Gaussian branch

    int k() const { return static_cast<int>(std::ceil(p)); }
};

struct ChooseQResult {
    bool gaussian = false;  // all u_j = 0: take xi ~ N(0,1), q >> |I|
    long long q = 0;
};

// q = floor( min over j with u_j != 0 of C_p^2 |u_j|^{-2/j} ). A zero floor
// means the targets are too large for matching at this C_p (the matching
// construction only works once the targets are small enough).
inline ChooseQResult choose_q(const MatchTarget& target) {
    if (!(target.c_p > 0.0 && target.c_p <= 1.0))
        throw ConfigError("choose_q: C_p must lie in (0,1]");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j <= target.u.size(); ++j) {
        double uj = target.u[j - 1];
        if (uj == 0.0) continue;
        best = std::min(best, target.c_p * target.c_p *
                                  std::pow(std::abs(uj), -2.0 / static_cast<double>(j)));
    }
    if (std::isinf(best)) return {true, 0};
    if (best < 1.0)
        throw NumericError("choose_q: targets too large for matching at this C_p (q = 0)");
    if (best > 9.0e15)
        throw NumericError("choose_q: q overflows; targets are effectively Gaussian");
    return {false, static_cast<long long>(std::floor(best))};
}

// One moment-extension step: given |mu_l| <= C for l <= 2j+1 and
// H_j(mu_0..mu_2j) >= 1, the choice mu_{2j+2} = (j+1)(j+1)! C^{j+2} + 1
// keeps H_{j+1} >= 1.
inline double extend_moments(const MomentSeq<double>& m, double bound_c) {
    const int order = m.order();
    if (order < 1 || order % 2 != 1)
        throw ConfigError("extend_moments: need moments through an odd order 2j+1");
    const int j = (order - 1) / 2;
    for (int l = 1; l <= order; ++l)
        if (std::abs(m.mu(l)) > bound_c + 1e-12)
            throw ConfigError("extend_moments: |mu_" + std::to_string(l) + "| exceeds C");
    double hj = hankel_det(m, j);
    if (hj < 1.0 - 1e-9)
        throw NumericError("extend_moments: H_" + std::to_string(j) + " = " +
                           std::to_string(hj) + " < 1");
    double fact = 1.0;
    for (int i = 2; i <= j + 1; ++i) fact *= static_cast<double>(i);
    return static_cast<double>(j + 1) * fact * std::pow(bound_c, j + 2) + 1.0;
}

// (s+1)-atom law matching mu_0..mu_{2s+1}: three-term recurrence from a
// partial Cholesky of the Hankel matrix, then nodes/weights off the Jacobi
// matrix. A zero pivot means the sequence is exactly representable with
// fewer atoms and the rule is truncated there; a negative pivot reports the
// offending order.
inline std::vector<std::pair<double, double>> realize_atomic(const MomentSeq<double>& m) {
    const int order = m.order();
    if (order < 1 || order % 2 != 1)
        throw ConfigError("realize_atomic: need moments through an odd order 2s+1");
    const int s = (order - 1) / 2;
    int n = s + 1;  // target atom count

    // R is upper triangular, rows 0..s, columns 0..s+1; column s+1 only needs
    // rows 0..s, so mu_{2s+2} never enters.
    std::vector<std::vector<double>> r(static_cast<std::size_t>(s) + 1,
                                       std::vector<double>(static_cast<std::size_t>(s) + 2, 0.0));
    double scale = 1.0;
    for (int l = 0; l <= order; ++l) scale = std::max(scale, std::abs(m.mu(l)));
    int rank = n;
    for (int i = 0; i <= s; ++i) {
        double diag2 = m.mu(2 * i);
        for (int k = 0; k < i; ++k) diag2 -= r[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                                             r[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        if (diag2 < -1e-10 * scale)
            throw NumericError("realize_atomic: Hankel breakdown at order " + std::to_string(2 * i));
        if (diag2 <= 1e-12 * scale) {
            rank = i;  // law supported on i atoms
            break;
        }
        r[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = std::sqrt(diag2);
        for (int j = i + 1; j <= s + 1; ++j) {
            double v = m.mu(i + j);
            for (int k = 0; k < i; ++k)
                v -= r[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                     r[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                v / r[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        }
    }
    n = std::min(n, rank);
    if (n == 0) throw NumericError("realize_atomic: empty rule");

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int j = 1; j <= n; ++j) {
        double alpha = r[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(j)] /
                       r[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(j - 1)];
        if (j >= 2)
            alpha -= r[static_cast<std::size_t>(j - 2)][static_cast<std::size_t>(j - 1)] /
                     r[static_cast<std::size_t>(j - 2)][static_cast<std::size_t>(j - 2)];
        jac(j - 1, j - 1) = alpha;
        if (j <= n - 1) {
            double beta = r[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] /
                          r[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(j - 1)];
            jac(j - 1, j) = beta;
            jac(j, j - 1) = beta;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
    if (eig.info() != Eigen::Success)
        throw NumericError("realize_atomic: Jacobi eigensolve failed");
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double w = eig.eigenvectors()(0, i);
        atoms.emplace_back(eig.eigenvalues()(i), w * w * m.mu(0));
    }
    return atoms;
}

struct MatchResult {
    bool gaussian_branch = false;
    long long q = 0;
    std::string q_note;
    CumulantSeq<double> xi_cumulants;  // kappa_1..kappa_{k+1} of xi
    MomentSeq<double> xi_moments;      // through realize_order
    std::vector<std::pair<double, double>> atoms;
    double c_p_used = 0.0;
    int retries = 0;
    double kappa_lower_bound = 0.0;  // C_p^p / 2^{p/2} when not Gaussian
};

namespace detail {

// Moments of xi through realize_order: Bell conversion of the matched
// cumulants up to order k+1, free odd moments set to 0, even moments from
// extend_moments. Throws NumericError if a Hankel determinant drops below 1.
inline MomentSeq<double> assemble_moments(const CumulantSeq<double>& kappa, int k,
                                          int realize_order) {
    MomentSeq<double> m = moments_from_cumulants(kappa);  // through k+1
    if (k % 2 == 1) m.values.push_back(0.0);              // mu_{k+2} := 0 for odd k
    // now defined through the odd order 2*ceil(k/2)+1
    while (m.order() < realize_order) {
        double c = 1.0;
        for (int l = 1; l <= m.order(); ++l) c = std::max(c, std::abs(m.mu(l)));
        m.values.push_back(extend_moments(m, c));  // even order
        if (m.order() < realize_order) m.values.push_back(0.0);
    }
    for (int j = 1; 2 * j <= realize_order; ++j) {
        double h = hankel_det(m, j);
        if (h < 1.0 - 1e-9)
            throw NumericError("assemble_moments: H_" + std::to_string(j) + " = " +
                               std::to_string(h) + " < 1");
    }
    return m;
}

}  // namespace detail

// Full construction: choose q, match cumulants kappa_{j+2} = q^{j/2} u_j,
// convert to a feasible moment sequence, extend it to realize_order, and
// realize a concrete atomic law. No closed form pins a workable C_p, so the
// construction verifies the Hankel determinants at runtime and halves C_p on
// failure (bounded retries).
inline MatchResult build_match(const MatchTarget& target, int realize_order,
                               int max_retries = 20) {
    const int k = target.k();
    if (realize_order < k + 3 || realize_order % 2 != 0)
        throw ConfigError("build_match: realize_order must be even and >= k+3");
    if (static_cast<int>(target.u.size()) != k - 1)
        throw ConfigError("build_match: expected " + std::to_string(k - 1) + " targets for p = " +
                          std::to_string(target.p));

    MatchTarget cur = target;
    for (int attempt = 0;; ++attempt) {
        ChooseQResult cq = choose_q(cur);
        MatchResult res;
        res.c_p_used = cur.c_p;
        res.retries = attempt;
        if (cq.gaussian) {
            res.gaussian_branch = true;
            double expo = std::ceil(2.0 * (target.p + 1.0) / target.p);
            res.q_note = "any q >> |I|; default q = |I|^" +
                         std::to_string(static_cast<long long>(expo));
            if (target.index_set_size > 0)
                res.q = static_cast<long long>(
                    std::pow(static_cast<double>(target.index_set_size), expo));
            res.xi_cumulants.values.assign(static_cast<std::size_t>(k) + 1, 0.0);
            res.xi_cumulants.values[1] = 1.0;
            res.xi_moments = moments_from_cumulants(res.xi_cumulants);
            while (res.xi_moments.order() < realize_order) {
                // true standard normal moments: (2l-1)!! at even orders
                int next = res.xi_moments.order() + 1;
                double v = 0.0;
                if (next % 2 == 0) {
                    v = 1.0;
                    for (int l = 1; l <= next - 1; l += 2) v *= static_cast<double>(l);
                }
                res.xi_moments.values.push_back(v);
            }
            MomentSeq<double> head;
            head.values.assign(res.xi_moments.values.begin(),
                               res.xi_moments.values.begin() + realize_order);
            res.atoms = realize_atomic(head);
            return res;
        }

        res.q = cq.q;
        res.kappa_lower_bound =
            std::pow(cur.c_p, target.p) / std::pow(2.0, target.p / 2.0);
        res.xi_cumulants.values.assign(static_cast<std::size_t>(k) + 1, 0.0);
        res.xi_cumulants.values[1] = 1.0;
        for (int j = 1; j <= k - 1; ++j)
            res.xi_cumulants.values[static_cast<std::size_t>(j + 1)] =
                std::pow(static_cast<double>(cq.q), 0.5 * j) * cur.u[static_cast<std::size_t>(j - 1)];
        try {
            res.xi_moments = detail::assemble_moments(res.xi_cumulants, k, realize_order);
        } catch (const NumericError&) {
            if (attempt >= max_retries)
                throw NumericError("build_match: matching infeasible at given targets");
            cur.c_p *= 0.5;
            continue;
        }
        MomentSeq<double> head;
        head.values.assign(res.xi_moments.values.begin(),
                           res.xi_moments.values.begin() + realize_order);
        res.atoms = realize_atomic(head);
        return res;
    }
}

// Raw moments of an atomic law; shared by tests and reports.
inline MomentSeq<double> atom_moments(const std::vector<std::pair<double, double>>& atoms,
                                      int order) {
    MomentSeq<double> m;
    m.values.assign(static_cast<std::size_t>(order) + 1, 0.0);
    for (int n = 0; n <= order; ++n) {
        double acc = 0.0;
        for (const auto& [x, w] : atoms) acc += w * std::pow(x, n);
        m.values[static_cast<std::size_t>(n)] = acc;
    }
    return m;
}

inline double atom_abs_moment(const std::vector<std::pair<double, double>>& atoms, double order) {
    double acc = 0.0;
    for (const auto& [x, w] : atoms) acc += w * std::pow(std::abs(x), order);
    return acc;
}

}  // namespace localclt

#endif
