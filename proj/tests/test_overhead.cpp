#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rrlab/grid.hpp"
#include "rrlab/overhead.hpp"

using namespace rrlab;

static AnalyticalParams params_of(double n, double h, double p) {
    AnalyticalParams params;
    params.nodes = n;
    params.hops = h;
    params.forward_prob = p;
    return params;
}

TEST_CASE("rreq_overhead single-tier hand check") {
    // 4 * ((9-2) + (9-3) + (9-4)) with unit coverage indexes
    CHECK(rreq_overhead(params_of(10, 1, 1.0), CoverageIndexTable::uniform(1.0), {}) ==
          doctest::Approx(72.0));
}

TEST_CASE("rreq_overhead annihilators") {
    CHECK(rreq_overhead(params_of(30, 3, 0.0), CoverageIndexTable::defaults(), {3.0, 3.0}) == 0.0);
    CHECK(rreq_overhead(params_of(5, 1, 1.0), CoverageIndexTable::uniform(0.0), {}) == 0.0);
}

TEST_CASE("rreq_overhead requires the tier expectations") {
    CHECK_THROWS_AS(rreq_overhead(params_of(20, 3, 1.0), CoverageIndexTable::defaults(), {3.0}),
                    std::invalid_argument);
    CHECK_NOTHROW(rreq_overhead(params_of(20, 3, 1.0), CoverageIndexTable::defaults(), {3.0, 3.0}));
}

TEST_CASE("rreq_overhead clamps deep-tier brackets at zero") {
    // n small enough that n-1-i < sum N_j at the second tier
    double v = rreq_overhead(params_of(6, 2, 1.0), CoverageIndexTable::uniform(1.0), {4.0});
    // tier 1: (3 + 2 + 1) * 4 = 24; tier 2 brackets (5-i)-4 -> (-1, -2, -3) all clamp
    CHECK(v == doctest::Approx(24.0));
}

TEST_CASE("rrep_overhead direct substitutions") {
    CHECK(rrep_overhead(params_of(25, 4, 1.0)) == doctest::Approx(42.0));
    CHECK(rrep_overhead(params_of(25, 4, 0.0)) == doctest::Approx(4.0));
    CHECK(rrep_overhead(params_of(4, 2, 1.0)) == doctest::Approx(2.0));
    // clamp: n - H - 2 < 0 must not pull the reply below its H reverse hops
    CHECK(rrep_overhead(params_of(3, 2, 1.0)) == doctest::Approx(2.0));
}

TEST_CASE("discovery_overhead sums the two evaluators") {
    double d = discovery_overhead(params_of(10, 1, 1.0), CoverageIndexTable::uniform(1.0), {});
    CHECK(d == doctest::Approx(76.5));

    CHECK(discovery_overhead(params_of(25, 4, 0.0), CoverageIndexTable::defaults(),
                             {3, 3, 3}) == doctest::Approx(4.0));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> nd(5.0, 60.0), hd(1.0, 4.0), pd(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        AnalyticalParams params = params_of(nd(rng), std::floor(hd(rng)), pd(rng));
        std::vector<double> tiers(3, 3.0);
        CHECK(discovery_overhead(params, CoverageIndexTable::defaults(), tiers) ==
              doctest::Approx(rreq_overhead(params, CoverageIndexTable::defaults(), tiers) +
                              rrep_overhead(params)));
    }
}

TEST_CASE("hello_overhead_route substitutions") {
    CHECK(hello_overhead_route({3, 10.0, 2.0}) == doctest::Approx(30.0));
    CHECK(hello_overhead_route({1, 2.0, 2.0}) == doctest::Approx(2.0));
    CHECK(hello_overhead_route({2, 7.0, 2.0}) == doctest::Approx(14.0));  // fractional period kept
    CHECK(hello_overhead_route_integer({2, 7.0, 2.0}) == doctest::Approx(12.0));
    CHECK_THROWS_AS(hello_overhead_route({2, 7.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(hello_overhead_route({0, 7.0, 1.0}), std::invalid_argument);
}

TEST_CASE("hello_overhead_total additivity") {
    CHECK(hello_overhead_total({}) == 0.0);
    CHECK(hello_overhead_total({{3, 10.0, 2.0}, {5, 10.0, 2.0}}) == doctest::Approx(80.0));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> td(1.0, 50.0), id(0.1, 5.0);
    std::uniform_int_distribution<int> ld(1, 9);
    for (int i = 0; i < 100; ++i) {
        RouteDescriptor r{ld(rng), td(rng), id(rng)};
        CHECK(hello_overhead_total({r}) == doctest::Approx(hello_overhead_route(r)));
    }
}

TEST_CASE("aggregate_overhead composition and invariants") {
    OverheadBreakdown b = aggregate_overhead(params_of(10, 1, 1.0),
                                             CoverageIndexTable::uniform(1.0), {},
                                             {{3, 10.0, 2.0}});
    CHECK(b.discovery == doctest::Approx(76.5));
    CHECK(b.aggregate == doctest::Approx(106.5));

    OverheadBreakdown floor_case =
        aggregate_overhead(params_of(25, 4, 0.0), CoverageIndexTable::defaults(), {3, 3, 3}, {});
    CHECK(floor_case.aggregate == doctest::Approx(4.0));

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> nd(4.0, 80.0), pd(0.0, 1.0), td(1.0, 40.0),
        id(0.05, 1.0), cd(0.0, 1.0);
    std::uniform_int_distribution<int> hd(1, 4), ld(1, 8), routes_d(0, 4);
    for (int i = 0; i < 1000; ++i) {
        AnalyticalParams params = params_of(nd(rng), hd(rng), pd(rng));
        CoverageIndexTable cov{cd(rng), cd(rng), cd(rng)};
        std::vector<double> tiers(3, 3.0);
        std::vector<RouteDescriptor> routes;
        int count = routes_d(rng);
        for (int k = 0; k < count; ++k) {
            double t = id(rng);
            routes.push_back({ld(rng), t + td(rng), t});
        }
        OverheadBreakdown bd = aggregate_overhead(params, cov, tiers, routes);
        CHECK(bd.discovery == doctest::Approx(bd.rreq + bd.rrep));
        CHECK(bd.aggregate == doctest::Approx(bd.discovery + bd.hello));
        CHECK(bd.rreq >= 0.0);
        CHECK(bd.rrep >= 0.0);
        CHECK(bd.hello >= 0.0);
    }
}

TEST_CASE("monotonicity in n, T, t and l") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> nd(8.0, 60.0), pd(0.0, 1.0), td(2.0, 40.0),
        id(0.1, 1.9);
    std::uniform_int_distribution<int> hd(1, 4), ld(1, 8);
    for (int i = 0; i < 400; ++i) {
        AnalyticalParams params = params_of(nd(rng), hd(rng), pd(rng));
        std::vector<double> tiers(3, 3.0);
        CoverageIndexTable cov = CoverageIndexTable::defaults();
        RouteDescriptor route{ld(rng), td(rng), id(rng)};

        AnalyticalParams more_nodes = params;
        more_nodes.nodes += 5.0;
        CHECK(aggregate_overhead(more_nodes, cov, tiers, {route}).aggregate >=
              aggregate_overhead(params, cov, tiers, {route}).aggregate);

        RouteDescriptor longer_life = route;
        longer_life.route_life += 3.0;
        CHECK(hello_overhead_route(longer_life) >= hello_overhead_route(route));

        RouteDescriptor slower_probe = route;
        slower_probe.hello_interval += 0.5;
        CHECK(hello_overhead_route(slower_probe) <= hello_overhead_route(route));

        RouteDescriptor more_links = route;
        more_links.links += 1;
        CHECK(hello_overhead_route(more_links) >= hello_overhead_route(route));
    }
}

TEST_CASE("rreq_overhead is linear in p and in each coverage entry") {
    AnalyticalParams params = params_of(30, 3, 0.4);
    std::vector<double> tiers{3.0, 3.0};
    CoverageIndexTable cov{0.2, 0.3, 0.4};
    double base = rreq_overhead(params, cov, tiers);

    AnalyticalParams double_p = params;
    double_p.forward_prob = 0.8;
    CHECK(rreq_overhead(double_p, cov, tiers) == doctest::Approx(2.0 * base));

    CoverageIndexTable double_c{0.4, 0.6, 0.8};
    CHECK(rreq_overhead(params, double_c, tiers) == doctest::Approx(2.0 * base));

    // per-entry linearity: scaling one C_i scales only that term
    CoverageIndexTable zero_c3{0.2, 0.0, 0.4};
    CoverageIndexTable only_c3{0.0, 0.3, 0.0};
    CHECK(rreq_overhead(params, zero_c3, tiers) + rreq_overhead(params, only_c3, tiers) ==
          doctest::Approx(base));
}

TEST_CASE("analytic rreq and flood oracle grow together with grid side") {
    double prev_rreq = -1.0;
    std::int64_t prev_flood = -1;
    for (int side = 3; side <= 8; ++side) {
        GridNetwork g = build_grid(side, side, 100.0);
        NodeId src = g.corner_nw(), dst = g.corner_se();
        int hops = *hop_count(g, src, dst);

        std::vector<double> tiers;
        for (int j = 1; j < hops; ++j)
            tiers.push_back(*expected_neighbors_at_tier(g, src, j));
        AnalyticalParams params = params_of(g.node_count(), hops, 1.0);
        double rreq = rreq_overhead(params, CoverageIndexTable::defaults(), tiers);
        std::int64_t flood = flood_oracle(g, src, kUnlimitedTtl, dst).transmissions;

        CHECK(rreq > prev_rreq);
        CHECK(flood > prev_flood);
        prev_rreq = rreq;
        prev_flood = flood;
    }
}
