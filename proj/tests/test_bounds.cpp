#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "localclt/bounds.hpp"
#include "support/oracles.hpp"

using namespace localclt;

namespace {
RemainderTable table_of(std::initializer_list<RemainderEntry> entries) {
    RemainderTable t;
    t.entries = entries;
    return t;
}
}  // namespace

TEST_CASE("normal helpers") {
    CHECK(norm_cdf(0.0) == Catch::Approx(0.5));
    CHECK(norm_ccdf(1.96) == Catch::Approx(0.0249979).epsilon(1e-4));
    for (double p : {1e-9, 0.001, 0.025, 0.31, 0.5, 0.77, 0.975, 0.999, 1 - 1e-9})
        CHECK(norm_cdf(norm_quantile(p)) == Catch::Approx(p).margin(1e-12));
    CHECK_THROWS_AS(norm_quantile(0.0), ConfigError);
}

TEST_CASE("local-wp bound over remainder tables") {
    BoundParams p1{1.0, {}};
    auto rep1 = bound_local_wp(table_of({{1, 1.0, 2.0, 0.0, true}}), p1);
    CHECK(rep1.value == Catch::Approx(2.0));

    BoundParams p2{2.0, {}};
    auto rep2 = bound_local_wp(
        table_of({{1, 1.0, std::sqrt(2.0), 0.0, true}, {2, 1.0, 0.49, 0.0, true}}), p2);
    CHECK(rep2.value == Catch::Approx(std::sqrt(2.0) + 0.7));

    BoundParams p15{1.5, {}};
    auto rep15 = bound_local_wp(table_of({{1, 1.0, 0.3, 0.0, true},
                                          {1, 0.5, 0.2, 0.0, true},
                                          {2, 0.5, 0.1, 0.0, true}}),
                                p15);
    CHECK(rep15.value ==
          Catch::Approx(0.3 + std::pow(0.2, 2.0) + std::pow(0.1, 2.0 / 3.0)));

    CHECK_THROWS_AS(bound_local_wp(table_of({{1, 1.0, 1.0, 0.0, true}}), p2), ConfigError);

    SECTION("two independent vertices at p = 2 through the exact engine") {
        const double v = 1.0 / std::sqrt(2.0);
        std::vector<Outcome> outs{
            {0.25, {v, v}}, {0.25, {v, -v}}, {0.25, {-v, v}}, {0.25, {-v, -v}}};
        JointModel two(DependencyGraph::from_edge_list({}, {{1}, {2}}), outs);
        auto table = remainder_table(two, 2.0);
        auto rep = bound_local_wp(table, p2);
        CHECK(rep.value == Catch::Approx(std::sqrt(2.0) + std::sqrt(1.5)).margin(1e-12));
    }
}

TEST_CASE("local-wp2 bound") {
    BoundParams p2{2.0, {}};
    // p = 2, omega = 1: C (M^2 s^-3 S3 + (M^3 s^-4 S4)^{1/2})
    auto rep = bound_local_wp2(3.0, 2.0, 0.7, 0.9, p2);
    double want = 9.0 / 8.0 * 0.7 + std::sqrt(27.0 / 16.0 * 0.9);
    CHECK(rep.value == Catch::Approx(want));

    SECTION("homogeneity: pre-dividing by sigma changes nothing") {
        BoundParams p{1.5, {}};
        double M = 4.0, sigma = 1.7, s1 = 0.41, s2 = 0.13;
        double direct = bound_local_wp2(M, sigma, s1, s2, p).value;
        double scaled = bound_local_wp2(M, 1.0, s1 / std::pow(sigma, p.omega() + 2.0),
                                        s2 / std::pow(sigma, p.p + 2.0), p)
                            .value;
        CHECK(direct == Catch::Approx(scaled).epsilon(1e-12));
    }
    SECTION("sigma rescaling matches re-evaluation") {
        BoundParams p{2.0, {}};
        double v1 = bound_local_wp2(2.0, 1.0, 0.5, 0.5, p).value;
        double v2 = bound_local_wp2(2.0, 2.0, 0.5, 0.5, p).value;
        double t1 = std::pow(2.0, 2.0) * 0.5, t2 = std::sqrt(std::pow(2.0, 3.0) * 0.5);
        CHECK(v1 == Catch::Approx(t1 + t2));
        CHECK(v2 == Catch::Approx(t1 / 8.0 + t2 / 4.0));
    }
    SECTION("M = 1, i.i.d. standardized summands: both terms scale n^{-1/2}") {
        BoundParams p{2.0, {}};
        auto at = [&](double n) {
            // per-vertex absolute moments fixed, sigma = sqrt(n)
            return bound_local_wp2(1.0, std::sqrt(n), 0.4 * n, 0.9 * n, p).value;
        };
        CHECK(at(4096.0) / at(1024.0) == Catch::Approx(0.5).epsilon(1e-9));
    }
    SECTION("non-vanishing hypothesis is warned about") {
        auto noisy = bound_local_wp2(10.0, 1.0, 5.0, 5.0, p2);
        CHECK(noisy.warnings.size() == 2);
    }
}

TEST_CASE("bracket bound") {
    CHECK(bound_bracket(1.0, 1.0, 2.0, 1, 1.0) == Catch::Approx(2.0));
    SECTION("value 2 from the unit-policy inputs matches R_{1,1} = 2") {
        std::vector<Outcome> outs{{0.5, {1.0}}, {0.5, {-1.0}}};
        JointModel one(DependencyGraph::from_edge_list({}, {{1}}), outs);
        double r = remainder(one, 1, 1.0).value;
        CHECK(bound_bracket(1.0, 1.0, 2.0, 1, 1.0) >= r - 1e-12);
    }
    SECTION("remainder / bracket ratio stays bounded at fixed M") {
        // measured stand-in for the unspecified C_{k+omega}
        for (std::uint64_t seed = 91; seed <= 98; ++seed) {
            auto model = oracles::random_ld_model(seed);
            int M = model.graph()
                        .max_neighborhood_size(1, DependencyGraph::SizeBoundMode::Exact)
                        .value;
            double r = remainder(model, 1, 1.0).value;
            double base = std::pow(static_cast<double>(M), 2.0) * model.abs_moment_sum(3.0);
            CHECK(r / base < 50.0);
        }
    }
    SECTION("M scaling") {
        double base = bound_bracket(1.0, 1.0, 1.0, 2, 0.5);
        CHECK(bound_bracket(2.0, 1.0, 1.0, 2, 0.5) == Catch::Approx(base * std::pow(2.0, 2.5)));
    }
}

TEST_CASE("m-dependent field bound") {
    BoundParams p2{2.0, {}};
    auto rep = bound_mdep_field(2, 1, 4.0, 3.0, 0.5, p2);
    // p = 2, omega = 1: m^{2d} M^{1/2} s^{-2} S^{1/2}
    double want = std::pow(2.0, 2.0) * std::sqrt(4.0) * std::pow(3.0, -2.0) * std::sqrt(0.5);
    CHECK(rep.value == Catch::Approx(want));

    SECTION("stationary scaling is |T|^{-1/2}") {
        // sigma^2 ~ T, per-vertex moments bounded: value ~ T^{-1/2}
        BoundParams p{2.0, {}};
        auto at = [&](double T) {
            return bound_mdep_field(1, 1, 2.0, std::sqrt(T), 0.3 * T, p).value;
        };
        CHECK(at(400.0) / at(100.0) == Catch::Approx(0.5).epsilon(1e-9));
    }
    CHECK_THROWS_AS(bound_mdep_field(1, 1, 0.5, 1.0, 1.0, p2), ConfigError);
}

TEST_CASE("uniform Berry-Esseen shape") {
    SECTION("p = 1 collapses to twice the order-3 term") {
        std::vector<double> m3{0.1, 0.2};
        double v = uniform_be_from_wp(m3, m3, 2.0, 1.0);
        CHECK(v == Catch::Approx(2.0 * (0.3 / 8.0)));
    }
    SECTION("i.i.d. scaling is n^{-1/2} at p = 1") {
        auto value = [&](int n) {
            // standardized summands: E|X|^3 = c, sigma = sqrt(n)
            std::vector<double> m3(static_cast<std::size_t>(n), 1.2);
            return uniform_be_from_wp(m3, m3, std::sqrt(static_cast<double>(n)), 1.0);
        };
        CHECK(value(400) / value(100) == Catch::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("Stein equation solver") {
    QuadSpec quad;
    SECTION("h(t) = t has f == -1") {
        for (double w : {-3.0, -1.0, 0.0, 0.7, 2.5})
            CHECK(stein_solve([](double t) { return t; }, 0.0, w, quad) ==
                  Catch::Approx(-1.0).margin(1e-10));
    }
    SECTION("h(t) = t^2 has f(w) = -w") {
        for (double w : {-2.0, -0.5, 0.0, 1.0, 3.0})
            CHECK(stein_solve([](double t) { return t * t; }, 1.0, w, quad) ==
                  Catch::Approx(-w).margin(1e-10));
    }
    SECTION("constant h gives f == 0") {
        for (double w : {-1.0, 0.0, 2.0})
            CHECK(stein_solve([](double) { return 4.2; }, 4.2, w, quad) ==
                  Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("Nh is computed when not supplied") {
        double nan = std::numeric_limits<double>::quiet_NaN();
        CHECK(stein_solve([](double t) { return t * t; }, nan, 1.3, quad) ==
              Catch::Approx(-1.3).margin(1e-9));
    }
}

TEST_CASE("Stein residuals vanish") {
    QuadSpec quad;
    AtomicDist twopoint{{{-1.0, 0.5}, {1.0, 0.5}}};
    AtomicDist skewed{{{-0.5, 0.8}, {2.0, 0.2}}};
    StandardNormalDist normal;

    std::vector<RealFn> hs{
        [](double t) { return t; },
        [](double t) { return t * t; },
        [](double t) { return t * t * t; },
        [](double t) { return std::abs(t); },
        [](double t) { return std::cos(t); },
    };
    for (const auto& h : hs) {
        CHECK(std::abs(stein_residual(SteinDist{twopoint}, h, quad)) < 1e-6);
        CHECK(std::abs(stein_residual(SteinDist{skewed}, h, quad)) < 1e-6);
        CHECK(std::abs(stein_residual(SteinDist{normal}, h, quad)) < 1e-6);
    }
}

TEST_CASE("g_t inversion") {
    CHECK(g_inverse(2.0, 1.0, 1.0) == 0.0);
    CHECK(g_inverse(2.0, 0.0, 1.0) == 1.0);
    SECTION("round trip on a grid") {
        for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            for (double y : {0.001, 0.05, 0.2, 0.5, 0.8, 0.99}) {
                for (double p : {1.0, 2.0}) {
                    double x = g_inverse(t, y, p, 1e-13);
                    CHECK(std::abs(g_function(t, x, p) - y) <= 1e-12);
                }
            }
        }
    }
    SECTION("monotone decreasing in y") {
        double prev = 1.0;
        for (double y : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            double x = g_inverse(3.0, y, 1.0);
            CHECK(x <= prev + 1e-15);
            prev = x;
        }
    }
    CHECK_THROWS_AS(g_inverse(1.0, 1.5, 1.0), ConfigError);
}

TEST_CASE("non-uniform tail bound") {
    SECTION("wp = 0 gives zero deviations") {
        auto res = tail_bound({2.0, 1.0, 1.0, 0.0});
        CHECK(res.upper == 0.0);
        CHECK(res.lower == 0.0);
    }
    SECTION("condition threshold at p = beta = 1, t = e") {
        double t = std::exp(1.0);
        double threshold = std::pow(kTwoPi, 0.25) * (1.0 - std::sqrt(2.0) / t) * std::sqrt(t);
        auto ok = tail_bound({t, 1.0, 1.0, threshold * 0.999});
        auto bad = tail_bound({t, 1.0, 1.0, threshold * 1.001});
        CHECK(ok.condition_ok);
        CHECK_FALSE(bad.condition_ok);
    }
    SECTION("upper bound decreasing in t") {
        double prev = std::numeric_limits<double>::infinity();
        for (double t : {1.5, 2.0, 2.5, 3.0, 4.0}) {
            auto res = tail_bound({t, 1.0, 2.0, 0.05});
            CHECK(res.upper < prev);
            prev = res.upper;
        }
    }
    SECTION("explicit constant") {
        auto res = tail_bound({2.0, 1.0, 1.0, 0.04});
        double c = std::pow(1.0, 0.5) * 2.0;  // p^{1/(p+1)} (1 + 1/p) at p = 1
        CHECK(res.upper == Catch::Approx(c * std::sqrt(0.04) / std::pow(2.0, 1.5)));
        CHECK(res.lower == Catch::Approx(c / 2.0 * norm_pdf(1.0) * std::sqrt(0.04)));
    }
}
