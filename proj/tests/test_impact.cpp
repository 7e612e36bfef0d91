#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "volterra/impact.hpp"
#include "volterra/rng.hpp"

#include <cmath>

using namespace volterra;

TEST_CASE("impact function values") {
    SUBCASE("linear inside the knot") {
        const ImpactParams p = PiecewisePower{0.5, 0.8};
        CHECK(impact_h(p, 0.3) == 0.3);
        CHECK(impact_h(p, -0.5) == -0.5);
    }
    SUBCASE("c = 1 collapses to the identity") {
        const ImpactParams p = PiecewisePower{0.7, 1.0};
        for (double x : {-3.0, -0.2, 0.0, 1.4, 9.0})
            CHECK(impact_h(p, x) == doctest::Approx(x).epsilon(1e-14));
    }
    SUBCASE("square-root branch closed form") {
        const ImpactParams p = PiecewisePower{0.01, 0.5};
        // sign(x) sqrt(2|x| x0 - x0^2) outside the knot
        CHECK(impact_h(p, 1.0) ==
              doctest::Approx(std::sqrt(2.0 * 0.01 - 0.0001)).epsilon(1e-14));
        CHECK(impact_h(p, 1.0) == doctest::Approx(0.1410674).epsilon(1e-5));
    }
    SUBCASE("identity variant") {
        CHECK(impact_h(IdentityImpact{}, 3.7) == 3.7);
        CHECK(impact_h_prime(IdentityImpact{}, -2.0) == 1.0);
        CHECK(impact_h_second(IdentityImpact{}, 5.0) == 0.0);
    }
}

TEST_CASE("first derivative") {
    const ImpactParams p = PiecewisePower{0.5, 0.8};
    SUBCASE("one inside the knot, continuous across it") {
        CHECK(impact_h_prime(p, 0.2) == 1.0);
        CHECK(impact_h_prime(p, -0.5) == 1.0);
        CHECK(impact_h_prime(p, 0.5 * (1.0 + 1e-8)) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("c = 1 has unit slope everywhere") {
        const ImpactParams lin = PiecewisePower{0.5, 1.0};
        for (double x : {-4.0, 0.1, 2.0}) CHECK(impact_h_prime(lin, x) == doctest::Approx(1.0));
    }
    SUBCASE("bounded by one") {
        CounterRng rng(3, 0);
        for (int i = 0; i < 10000; ++i) {
            const double x = 2e3 * (2.0 * rng.next_uniform() - 1.0);
            CHECK(impact_h_prime(p, x) <= 1.0 + 1e-15);
            CHECK(impact_h_prime(p, x) > 0.0);
        }
    }
    SUBCASE("matches central differences of h") {
        CounterRng rng(5, 0);
        for (int i = 0; i < 4000; ++i) {
            const double x = 6.0 * (2.0 * rng.next_uniform() - 1.0);
            if (std::abs(std::abs(x) - 0.5) < 1e-3) continue;
            const double eps = 1e-7 * std::max(1.0, std::abs(x));
            const double fd = (impact_h(p, x + eps) - impact_h(p, x - eps)) / (2.0 * eps);
            CHECK(fd == doctest::Approx(impact_h_prime(p, x)).epsilon(1e-6));
        }
    }
}

TEST_CASE("second derivative") {
    SUBCASE("zero inside, concave outside") {
        const ImpactParams p = PiecewisePower{0.5, 0.8};
        CHECK(impact_h_second(p, 0.3) == 0.0);
        CounterRng rng(7, 0);
        for (int i = 0; i < 2000; ++i) {
            const double x = 0.5 + 10.0 * rng.next_uniform();
            CHECK(impact_h_second(p, x + 1e-9) <= 0.0);
        }
    }
    SUBCASE("c = 1 vanishes off the knot") {
        const ImpactParams p = PiecewisePower{0.5, 1.0};
        CHECK(impact_h_second(p, 0.1) == 0.0);
        CHECK(impact_h_second(p, 2.0) == 0.0);
    }
    SUBCASE("finite-difference oracle on the square-root family") {
        const ImpactParams p = PiecewisePower{0.01, 0.5};
        const double x = 1.0;
        const double eps = 1e-5;
        const double fd = (impact_h_prime(p, x + eps) - impact_h_prime(p, x - eps)) / (2.0 * eps);
        CHECK(impact_h_second(p, x) == doctest::Approx(fd).epsilon(1e-4));
    }
    SUBCASE("undefined at the knot") {
        const ImpactParams p = PiecewisePower{0.5, 0.8};
        CHECK_THROWS(impact_h_second(p, 0.5));
        CHECK_THROWS(impact_h_second(p, -0.5));
        CHECK_THROWS(arrow_pratt_ratio(p, 0.5));
    }
}

TEST_CASE("arrow-pratt ratio") {
    SUBCASE("approaches one at the knot for c = 1/2") {
        const ImpactParams p = PiecewisePower{0.2, 0.5};
        CHECK(arrow_pratt_ratio(p, 0.2 * (1.0 + 1e-8)) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("identically zero for linear impact") {
        const ImpactParams p = PiecewisePower{0.2, 1.0};
        for (double x : {0.1, 0.5, 3.0}) CHECK(arrow_pratt_ratio(p, x) == 0.0);
        CHECK(arrow_pratt_ratio(IdentityImpact{}, 1.0) == 0.0);
    }
    SUBCASE("closed-form value at twice the knot") {
        const ImpactParams p = PiecewisePower{0.3, 0.8};
        CHECK(arrow_pratt_ratio(p, 0.6) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
    }
    SUBCASE("supremum is (1-c)/c against a dense scan") {
        const PiecewisePower pp{0.3, 0.7};
        const ImpactParams p = pp;
        double sup = 0.0;
        for (int i = 1; i <= 100000; ++i) {
            const double x = pp.x0 * (1.0 + 1e-7 + 10.0 * i / 100000.0);
            sup = std::max(sup, arrow_pratt_ratio(p, x));
        }
        CHECK(sup <= (1.0 - pp.c) / pp.c + 1e-9);
        CHECK(sup == doctest::Approx((1.0 - pp.c) / pp.c).epsilon(1e-4));
    }
}

TEST_CASE("oddness holds exactly") {
    const ImpactParams p = PiecewisePower{0.01, 0.5};
    CounterRng rng(11, 0);
    for (int i = 0; i < 10000; ++i) {
        const double x = 1e4 * (2.0 * rng.next_uniform() - 1.0);
        CHECK(impact_h(p, -x) == -impact_h(p, x));
    }
}

TEST_CASE("sublinear growth bound") {
    const PiecewisePower pp{0.5, 0.8};
    const ImpactParams p = pp;
    // |h(x)| <= K (1 + |x|^c) with K from the closed form's leading coefficient.
    const double lead = std::pow(std::pow(pp.x0, 1.0 / pp.c - 1.0) / pp.c, pp.c);
    const double K = std::max(1.0, lead) + pp.x0;
    CounterRng rng(13, 0);
    for (int i = 0; i < 5000; ++i) {
        const double x = 1e6 * (2.0 * rng.next_uniform() - 1.0);
        CHECK(std::abs(impact_h(p, x)) <= K * (1.0 + std::pow(std::abs(x), pp.c)));
    }
}

TEST_CASE("lipschitz constant of the derivative") {
    CHECK(impact_h_prime_lipschitz(IdentityImpact{}) == 0.0);
    CHECK(impact_h_prime_lipschitz(PiecewisePower{0.5, 1.0}) == 0.0);
    const PiecewisePower pp{0.5, 0.8};
    CHECK(impact_h_prime_lipschitz(pp) == doctest::Approx(0.5));
    // one-sided |h''| at the knot approaches the reported constant
    CHECK(std::abs(impact_h_second(pp, 0.5 * (1.0 + 1e-10))) ==
          doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("monotonicity conditions for the exponential-kernel criterion") {
    SUBCASE("square-root family passes at c = 1/2") {
        const auto rep =
            check_exponential_monotonicity_conditions(PiecewisePower{0.01, 0.5}, 4000, 5.0, 17);
        CHECK(rep.passed);
    }
    SUBCASE("identity passes") {
        const auto rep = check_exponential_monotonicity_conditions(IdentityImpact{}, 1000, 5.0, 17);
        CHECK(rep.passed);
    }
    SUBCASE("c below one half fails on x h'(x)") {
        // brute-force oracle: x h'(x) decreases somewhere past the knot
        const ImpactParams p = PiecewisePower{1.0, 0.3};
        bool decreasing_somewhere = false;
        double prev = 0.0;
        for (int i = 0; i <= 100000; ++i) {
            const double x = 1.0 + 1e-6 + 4.0 * i / 100000.0;
            const double v = x * impact_h_prime(p, x);
            if (i > 0 && v < prev - 1e-12) decreasing_somewhere = true;
            prev = v;
        }
        REQUIRE(decreasing_somewhere);
        const auto rep = check_exponential_monotonicity_conditions(p, 20000, 5.0, 17);
        CHECK_FALSE(rep.passed);
    }
}
