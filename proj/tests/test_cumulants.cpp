#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "localclt/cumulants.hpp"
#include "localclt/rational.hpp"
#include "localclt/rng.hpp"
#include "support/oracles.hpp"

using namespace localclt;

TEST_CASE("partial Bell polynomials") {
    std::vector<double> ones{1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK(bell_partial(3, 2, ones) == 3.0);  // coefficient of the partition 1+2

    std::vector<double> x4{2.0};
    CHECK(bell_partial(4, 4, x4) == 16.0);  // B_{n,n} = x_1^n

    std::vector<double> x5{0.0, 0.0, 0.0, 0.0, 7.0};
    CHECK(bell_partial(5, 1, x5) == 7.0);  // B_{n,1} = x_n

    CHECK_THROWS_AS(bell_partial(3, 4, ones), ConfigError);

    SECTION("recurrence equals the multi-index sum, exactly") {
        Rng rng(99);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<Rational> x;
            for (int i = 0; i < 9; ++i)
                x.push_back(Rational(static_cast<long long>(rng.bits() % 21) - 10, 1 + rng.bits() % 4));
            for (int n = 1; n <= 9; ++n)
                for (int j = 1; j <= n; ++j)
                    CHECK(bell_partial(n, j, x) == oracles::bell_bruteforce(n, j, x));
        }
    }
}

TEST_CASE("moments from cumulants") {
    CumulantSeq<Rational> gauss{{0, 1, 0, 0, 0, 0, 0, 0, 0, 0}};
    auto m = moments_from_cumulants(gauss);
    // mu_{2l} = (2l-1)!!
    CHECK(m.values == std::vector<Rational>{1, 0, 1, 0, 3, 0, 15, 0, 105, 0, 945});

    CumulantSeq<Rational> onesk{{1, 1, 1, 1}};
    auto bell = moments_from_cumulants(onesk);
    CHECK(bell.values == std::vector<Rational>{1, 1, 2, 5, 15});  // Bell numbers

    // point mass at c: kappa_1 = c, all higher cumulants vanish
    CumulantSeq<double> pt{{2.5, 0, 0, 0, 0}};
    auto mp = moments_from_cumulants(pt);
    for (int n = 1; n <= 5; ++n)
        CHECK(mp.mu(n) == Catch::Approx(std::pow(2.5, n)).epsilon(1e-12));
}

TEST_CASE("cumulants from moments") {
    MomentSeq<Rational> gaussm{{1, 0, 1, 0, 3, 0, 15}};
    auto k = cumulants_from_moments(gaussm);
    CHECK(k.values == std::vector<Rational>{0, 1, 0, 0, 0, 0});

    // Bernoulli(1/2) on {0,1}: mu_j = 1/2 for all j >= 1
    MomentSeq<Rational> bern{{1, Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)}};
    auto kb = cumulants_from_moments(bern);
    CHECK(kb.kappa(1) == Rational(1, 2));
    CHECK(kb.kappa(2) == Rational(1, 4));
    CHECK(kb.kappa(3) == 0);
    CHECK(kb.kappa(4) == Rational(-1, 8));
}

TEST_CASE("round trips and the recursion cross-check") {
    SECTION("exact rational round trip through order 12") {
        Rng rng(7);
        for (int trial = 0; trial < 3; ++trial) {
            CumulantSeq<Rational> k;
            for (int i = 0; i < 12; ++i)
                k.values.push_back(
                    Rational(static_cast<long long>(rng.bits() % 11) - 5, 1 + rng.bits() % 3));
            auto m = moments_from_cumulants(k);
            auto back = cumulants_from_moments(m);
            CHECK(back.values == k.values);
            // the literal alternating Bell sum is the same map, exactly
            CHECK(cumulants_from_moments_bell(m).values == k.values);
            for (int n = 1; n <= 12; ++n) CHECK(moment_recursion(k, m, n) == m.mu(n));
        }
    }
    SECTION("binary64 round trip to 1e-10 relative") {
        Rng rng(8);
        for (int trial = 0; trial < 4; ++trial) {
            CumulantSeq<double> k;
            for (int i = 0; i < 10; ++i) k.values.push_back(2.0 * rng.uniform01() - 1.0);
            auto m = moments_from_cumulants(k);
            auto back = cumulants_from_moments(m);
            for (int n = 1; n <= 10; ++n) {
                double tol = 1e-10 * std::max(1.0, std::abs(k.kappa(n)));
                CHECK(std::abs(back.kappa(n) - k.kappa(n)) <= tol);
            }
        }
    }
    SECTION("Gaussian recursion values") {
        CumulantSeq<double> k{{0, 1, 0, 0}};
        MomentSeq<double> m{{1, 0, 1, 0}};
        CHECK(moment_recursion(k, m, 2) == 1.0);
        CHECK(moment_recursion(k, m, 4) == 3.0);
        CHECK_THROWS_AS(moment_recursion(k, m, 5), ConfigError);
    }
}

TEST_CASE("Hankel determinants") {
    MomentSeq<Rational> gauss{{1, 0, 1, 0, 3, 0, 15}};
    CHECK(hankel_det(gauss, 0) == 1);
    CHECK(hankel_det(gauss, 1) == 1);
    CHECK(hankel_det(gauss, 2) == 2);  // det [[1,0,1],[0,1,0],[1,0,3]]

    SECTION("Gaussian parity: positive even integers at j = 2, 3") {
        MomentSeq<Rational> g8{{1, 0, 1, 0, 3, 0, 15, 0, 105}};
        for (int j : {2, 3}) {
            Rational h = hankel_det(g8, j);
            CHECK(h > 0);
            CHECK(boost::multiprecision::denominator(h) == 1);
            CHECK(boost::multiprecision::numerator(h) % 2 == 0);
        }
    }
    CHECK_THROWS_AS(hankel_det(gauss, 4), ConfigError);
}

TEST_CASE("Hamburger feasibility") {
    MomentSeq<double> gauss{{1, 0, 1, 0, 3, 0, 15, 0, 105}};
    auto rep = hamburger_feasible(gauss, 1e-12);
    CHECK(rep.feasible);
    CHECK_FALSE(rep.boundary);

    MomentSeq<double> twopoint{{1, 0, 1, 0, 1}};  // +-1 with weight 1/2
    auto rep2 = hamburger_feasible(twopoint, 1e-12);
    CHECK(rep2.feasible);
    CHECK(rep2.boundary);
    CHECK(rep2.first_failing == 2);

    MomentSeq<double> bad{{1, 0, 0.5, 0, 0.1}};
    auto rep3 = hamburger_feasible(bad, 1e-12);
    CHECK_FALSE(rep3.feasible);
    CHECK(rep3.first_failing == 2);

    SECTION("finite-atom law with enough distinct atoms stays strictly positive") {
        // three atoms {-1, 0, 2} with weights {.3, .5, .2}: H_1, H_2 > 0
        auto mu = [&](int n) {
            return 0.3 * std::pow(-1.0, n) + 0.5 * std::pow(0.0, n) + 0.2 * std::pow(2.0, n);
        };
        MomentSeq<double> m{{1, mu(1), mu(2), mu(3), mu(4)}};
        CHECK(hankel_det(m, 1) > 0.0);
        CHECK(hankel_det(m, 2) > 0.0);
    }
}

TEST_CASE("Monte Carlo moment estimation") {
    SECTION("constant sampler") {
        auto out = estimate_moments_mc([](Rng&) { return 0.0; }, 4, 100, 42);
        CHECK(out.moments.values == std::vector<double>{1, 0, 0, 0, 0});
        for (double se : out.stderrs) CHECK(se == 0.0);
    }
    SECTION("standard normal fourth moment") {
        auto out = estimate_moments_mc([](Rng& rng) { return rng.normal(); }, 4, 200000, 2024);
        CHECK(std::abs(out.moments.mu(4) - 3.0) <= 5.0 * out.stderrs[4]);
        CHECK(std::abs(out.moments.mu(2) - 1.0) <= 5.0 * out.stderrs[2]);
    }
    SECTION("seed determinism") {
        auto a = estimate_moments_mc([](Rng& rng) { return rng.normal(); }, 3, 1000, 7);
        auto b = estimate_moments_mc([](Rng& rng) { return rng.normal(); }, 3, 1000, 7);
        CHECK(a.moments.values == b.moments.values);
        CHECK(a.stderrs == b.stderrs);
    }
    CHECK_THROWS_AS(estimate_moments_mc([](Rng&) { return 0.0; }, 4, 1, 1), ConfigError);
}
