#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rrlab/sensitivity.hpp"

using namespace rrlab;

static AnalyticalParams params_of(double n, double h, double p) {
    AnalyticalParams params;
    params.nodes = n;
    params.hops = h;
    params.forward_prob = p;
    return params;
}

// Test-side oracle: hello total with every route's T and t shifted together.
static double hello_total_shifted(const std::vector<RouteDescriptor>& routes, double d_life,
                                  double d_interval) {
    std::vector<RouteDescriptor> shifted = routes;
    for (auto& r : shifted) {
        r.route_life += d_life;
        r.hello_interval += d_interval;
    }
    return hello_overhead_total(shifted);
}

// Test-side oracle: full overhead at a displaced parameter point.
static double aggregate_shifted(const AnalyticalParams& params, const CoverageIndexTable& cov,
                                const std::vector<double>& tiers,
                                const std::vector<RouteDescriptor>& routes,
                                const SensitivityDeltas& d) {
    AnalyticalParams p = params;
    p.nodes += d.d_nodes;
    p.hops += d.d_hops;
    std::vector<RouteDescriptor> r = routes;
    for (auto& route : r) {
        route.route_life += d.d_route_life;
        route.hello_interval += d.d_hello_interval;
    }
    return aggregate_overhead(p, cov, tiers, r).aggregate;
}

static std::vector<RouteDescriptor> random_routes(std::mt19937_64& rng, int max_routes) {
    std::uniform_int_distribution<int> count_d(1, max_routes), links_d(1, 8);
    std::uniform_real_distribution<double> life_d(2.0, 40.0), interval_d(0.2, 1.9);
    std::vector<RouteDescriptor> routes;
    int count = count_d(rng);
    for (int i = 0; i < count; ++i) routes.push_back({links_d(rng), life_d(rng), interval_d(rng)});
    return routes;
}

TEST_CASE("partial_route_life hand checks") {
    CHECK(partial_route_life({{3, 10.0, 2.0}}) == doctest::Approx(3.0));
    CHECK(partial_route_life({{3, 10.0, 2.0}, {5, 10.0, 2.0}}) == doctest::Approx(8.0));
    CHECK(partial_route_life({}) == 0.0);
}

TEST_CASE("partial_route_life matches finite differences of the hello total") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        auto routes = random_routes(rng, 5);
        double step = 1e-6 * routes.front().route_life;
        double fd = (hello_total_shifted(routes, step, 0.0) -
                     hello_total_shifted(routes, -step, 0.0)) /
                    (2.0 * step);
        double exact = partial_route_life(routes);
        CHECK(std::abs(fd - exact) <= 1e-9 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("partial_hello_interval hand checks") {
    CHECK(partial_hello_interval({{3, 10.0, 2.0}}) == doctest::Approx(-15.0));
    CHECK(partial_hello_interval({}) == 0.0);
}

TEST_CASE("partial_hello_interval matches finite differences") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 100; ++i) {
        auto routes = random_routes(rng, 5);
        double min_interval = routes.front().hello_interval;
        for (auto& r : routes) min_interval = std::min(min_interval, r.hello_interval);
        double step = 1e-5 * min_interval;
        double fd = (hello_total_shifted(routes, 0.0, step) -
                     hello_total_shifted(routes, 0.0, -step)) /
                    (2.0 * step);
        double exact = partial_hello_interval(routes);
        CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("literal partials collapse to their constant terms at p = 0") {
    for (double h : {1.0, 2.0, 4.0}) {
        AnalyticalParams params = params_of(20, h, 0.0);
        std::vector<double> tiers(3, 3.0);
        CHECK(partial_nodes_literal(params, CoverageIndexTable::defaults(), tiers) ==
              doctest::Approx(h));
        CHECK(partial_hops_literal(params, CoverageIndexTable::defaults(), tiers) ==
              doctest::Approx(1.0));
    }
}

TEST_CASE("literal partials golden values") {
    // Direct evaluation of the printed expressions at n=10, H=1, p=1, C=1,
    // frozen after first computation. The d/dn expression's clamped tier
    // brackets vanish, leaving H + (H/2)(-H-2)p = -0.5; the d/dH expression
    // keeps the Eq.-1-shaped brackets: 4*18 + 1 + 3.5 = 76.5.
    AnalyticalParams params = params_of(10, 1, 1.0);
    CHECK(partial_nodes_literal(params, CoverageIndexTable::uniform(1.0), {}) ==
          doctest::Approx(-0.5));
    CHECK(partial_hops_literal(params, CoverageIndexTable::uniform(1.0), {}) ==
          doctest::Approx(76.5));
}

TEST_CASE("exact node partial vanishes at p = 0") {
    ExactPartial p = partial_nodes_exact(params_of(20, 3, 0.0),
                                         CoverageIndexTable::defaults(), {3.0, 3.0});
    CHECK(p.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(p.analytic == 0.0);
}

TEST_CASE("exact node partial is affine in the coverage table") {
    AnalyticalParams params = params_of(25, 3, 0.6);
    std::vector<double> tiers{3.0, 3.0};
    double at_zero =
        partial_nodes_exact(params, CoverageIndexTable::uniform(0.0), tiers).value;
    double at_one =
        partial_nodes_exact(params, CoverageIndexTable{0.1, 0.2, 0.3}, tiers).value;
    double at_two =
        partial_nodes_exact(params, CoverageIndexTable{0.2, 0.4, 0.6}, tiers).value;
    // doubling the table doubles the coverage-driven slope component
    CHECK(at_two - at_zero == doctest::Approx(2.0 * (at_one - at_zero)).epsilon(1e-6));
}

TEST_CASE("exact partials agree with their analytic forms away from clamps") {
    ExactPartial pn = partial_nodes_exact(params_of(20, 3, 0.5),
                                          CoverageIndexTable::defaults(), {3.0, 3.0});
    CHECK_FALSE(pn.boundary_warning);
    CHECK(pn.value == doctest::Approx(pn.analytic).epsilon(1e-6));

    ExactPartial ph = partial_hops_exact(params_of(20, 3, 0.5),
                                         CoverageIndexTable::defaults(), {3.0, 3.0});
    CHECK_FALSE(ph.boundary_warning);
    CHECK(ph.value == doctest::Approx(ph.analytic).epsilon(1e-6));
}

TEST_CASE("exact partials flag clamp boundaries") {
    // n - H - 2 = 0 puts the reply clamp right under the stencil
    ExactPartial pn = partial_nodes_exact(params_of(5, 3, 0.5),
                                          CoverageIndexTable::defaults(), {3.0, 3.0});
    CHECK(pn.boundary_warning);
}

TEST_CASE("total_differential trivials") {
    AnalyticalParams params = params_of(20, 3, 0.5);
    std::vector<double> tiers{3.0, 3.0};
    std::vector<RouteDescriptor> routes{{3, 10.0, 2.0}};

    SensitivityReport zero = total_differential(params, CoverageIndexTable::defaults(), tiers,
                                                routes, {}, SensitivityMode::Exact);
    CHECK(zero.dy == 0.0);

    SensitivityDeltas only_life;
    only_life.d_route_life = 0.7;
    SensitivityReport life = total_differential(params, CoverageIndexTable::defaults(), tiers,
                                                routes, only_life, SensitivityMode::Exact);
    CHECK(life.dz == doctest::Approx(3.0 * 0.7));
    // hello total is linear in T, so the first-order prediction is exact
    double actual = hello_total_shifted(routes, 0.7, 0.0) - hello_total_shifted(routes, 0, 0);
    CHECK(life.dz == doctest::Approx(actual));
}

TEST_CASE("total_differential interval shift first-order error") {
    AnalyticalParams params = params_of(20, 3, 0.5);
    std::vector<double> tiers{3.0, 3.0};
    std::vector<RouteDescriptor> routes{{3, 10.0, 2.0}};
    SensitivityDeltas d;
    d.d_hello_interval = 0.01;

    SensitivityReport r = total_differential(params, CoverageIndexTable::defaults(), tiers,
                                             routes, d, SensitivityMode::Exact);
    CHECK(r.dz == doctest::Approx(-0.15));
    double actual = hello_total_shifted(routes, 0.0, 0.01) - hello_total_shifted(routes, 0, 0);
    CHECK(actual == doctest::Approx(2.0 * 10.0 * 3.0 * (1.0 / 2.01 - 1.0 / 2.0)));
    double err = std::abs(actual - r.dz);
    CHECK(err < 1e-3);

    d.d_hello_interval = 0.005;
    SensitivityReport half = total_differential(params, CoverageIndexTable::defaults(), tiers,
                                                routes, d, SensitivityMode::Exact);
    double actual_half = hello_total_shifted(routes, 0.0, 0.005) - hello_total_shifted(routes, 0, 0);
    double err_half = std::abs(actual_half - half.dz);
    CHECK(err / err_half > 3.5);  // quadratic shrink when the delta halves
}

TEST_CASE("dz always equals the monitoring partial combination") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> delta_d(-0.5, 0.5);
    for (int i = 0; i < 50; ++i) {
        auto routes = random_routes(rng, 4);
        SensitivityDeltas d;
        d.d_route_life = delta_d(rng);
        d.d_hello_interval = delta_d(rng) * 0.05;
        SensitivityReport r =
            total_differential(params_of(20, 2, 0.5), CoverageIndexTable::defaults(), {3.0},
                               routes, d, SensitivityMode::PaperLiteral);
        CHECK(r.dz == doctest::Approx(partial_route_life(routes) * d.d_route_life +
                                      partial_hello_interval(routes) * d.d_hello_interval));
        CHECK(partial_route_life(routes) >= 0.0);
        CHECK(partial_hello_interval(routes) <= 0.0);
    }
}

TEST_CASE("dy prediction error shrinks quadratically under delta halving") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> nd(15.0, 40.0), pd(0.2, 1.0);
    std::uniform_int_distribution<int> hd(2, 3);
    CoverageIndexTable cov = CoverageIndexTable::defaults();
    for (int pt = 0; pt < 20; ++pt) {
        AnalyticalParams params = params_of(nd(rng), hd(rng), pd(rng));
        std::vector<double> tiers{3.0, 3.0};
        auto routes = random_routes(rng, 3);

        SensitivityDeltas d;
        d.d_nodes = 0.5;
        d.d_hops = 0.1;
        d.d_route_life = 0.2;
        d.d_hello_interval = 0.02;

        double base = aggregate_shifted(params, cov, tiers, routes, {});
        double prev_err = -1.0;
        for (int halving = 0; halving <= 3; ++halving) {
            SensitivityReport r =
                total_differential(params, cov, tiers, routes, d, SensitivityMode::Exact);
            double actual = aggregate_shifted(params, cov, tiers, routes, d) - base;
            double err = std::abs(actual - r.dy);
            if (prev_err >= 0.0) CHECK(prev_err / err > 3.5);
            prev_err = err;
            d.d_nodes *= 0.5;
            d.d_hops *= 0.5;
            d.d_route_life *= 0.5;
            d.d_hello_interval *= 0.5;
        }
    }
}
