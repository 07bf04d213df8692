#pragma once

#include <vector>

namespace rrlab {

/// Inputs to the closed-form overhead evaluators. Node count and hop count
/// are kept real-valued so the sensitivity module can differentiate in them;
/// tier sums round the hop count to an integer tier count.
struct AnalyticalParams {
    double nodes = 2.0;           // n, >= 2
    double hops = 1.0;            // H, >= 1
    double route_life = 10.0;     // T seconds, > 0
    double hello_interval = 1.0;  // t seconds, > 0, <= T
    double forward_prob = 1.0;    // p in [0, 1]

    /// Throws std::invalid_argument when any bound above is violated.
    void validate() const;
};

/// Additional-coverage index C_i for a rebroadcasting node with i neighbors,
/// i in {2, 3, 4}. The index values are data, not code: callers pin their own
/// table and the defaults are only a convenience.
struct CoverageIndexTable {
    double c2 = 0.19;
    double c3 = 0.33;
    double c4 = 0.41;

    static CoverageIndexTable defaults() { return {}; }
    static CoverageIndexTable uniform(double c) { return {c, c, c}; }
    double at(int i) const;

    /// Throws std::invalid_argument unless every entry is in [0, 1].
    void validate() const;
};

/// One monitored route: l links, alive for T seconds, probed every t seconds.
struct RouteDescriptor {
    int links = 1;                // l >= 1
    double route_life = 10.0;     // T > 0
    double hello_interval = 1.0;  // t > 0

    void validate() const;
};

struct OverheadBreakdown {
    double rreq = 0.0;
    double rrep = 0.0;
    double discovery = 0.0;  // rreq + rrep
    double hello = 0.0;
    double aggregate = 0.0;  // discovery + hello
};

/// Expected RREQ flood overhead: sum over hop tiers h = 1..H of
/// 4 * 3^(h-1) * sum_{i=2..4} max(0, (n-1-i) - sum_{j<h} N_j) * p * C_i.
/// tier_neighbors supplies N_j for j = 1..H-1; too few entries is an
/// invalid-argument error. Negative bracket terms clamp to zero since a tier
/// cannot contribute negative packets.
double rreq_overhead(const AnalyticalParams& params, const CoverageIndexTable& cov,
                     const std::vector<double>& tier_neighbors);

/// Expected RREP overhead H + (H/2)(n - H - 2)p, clamped below at H: a reply
/// always traverses the H reverse hops.
double rrep_overhead(const AnalyticalParams& params);

/// rreq_overhead + rrep_overhead.
double discovery_overhead(const AnalyticalParams& params, const CoverageIndexTable& cov,
                          const std::vector<double>& tier_neighbors);

/// Link-monitoring cost of one route, 2 (T/t) l, in real arithmetic.
double hello_overhead_route(const RouteDescriptor& route);

/// Integer-period variant, 2 floor(T/t) l.
double hello_overhead_route_integer(const RouteDescriptor& route);

/// Sum over routes; zero for an empty list.
double hello_overhead_total(const std::vector<RouteDescriptor>& routes);

/// Full breakdown; satisfies discovery = rreq + rrep and
/// aggregate = discovery + hello.
OverheadBreakdown aggregate_overhead(const AnalyticalParams& params,
                                     const CoverageIndexTable& cov,
                                     const std::vector<double>& tier_neighbors,
                                     const std::vector<RouteDescriptor>& routes);

}  // namespace rrlab
