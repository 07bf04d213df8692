#include "rrlab/overhead.hpp"

#include <cmath>
#include <stdexcept>

namespace rrlab {

namespace {

int tier_count_of(double hops) { return static_cast<int>(std::llround(hops)); }

}  // namespace

void AnalyticalParams::validate() const {
    if (!std::isfinite(nodes) || nodes < 2.0)
        throw std::invalid_argument("node count must be finite and >= 2");
    if (!std::isfinite(hops) || hops < 1.0)
        throw std::invalid_argument("hop count must be finite and >= 1");
    if (!std::isfinite(route_life) || route_life <= 0.0)
        throw std::invalid_argument("route life time must be > 0");
    if (!std::isfinite(hello_interval) || hello_interval <= 0.0)
        throw std::invalid_argument("hello interval must be > 0");
    if (hello_interval > route_life)
        throw std::invalid_argument("hello interval must not exceed route life time");
    if (!std::isfinite(forward_prob) || forward_prob < 0.0 || forward_prob > 1.0)
        throw std::invalid_argument("forwarding probability must be in [0, 1]");
}

double CoverageIndexTable::at(int i) const {
    switch (i) {
        case 2: return c2;
        case 3: return c3;
        case 4: return c4;
        default: throw std::invalid_argument("coverage index defined for i in {2,3,4}");
    }
}

void CoverageIndexTable::validate() const {
    for (int i = 2; i <= 4; ++i) {
        double c = at(i);
        if (!std::isfinite(c) || c < 0.0 || c > 1.0)
            throw std::invalid_argument("coverage index entries must be in [0, 1]");
    }
}

void RouteDescriptor::validate() const {
    if (links < 1) throw std::invalid_argument("route must have at least one link");
    if (!(route_life > 0.0)) throw std::invalid_argument("route life time must be > 0");
    if (!(hello_interval > 0.0)) throw std::invalid_argument("hello interval must be > 0");
}

double rreq_overhead(const AnalyticalParams& params, const CoverageIndexTable& cov,
                     const std::vector<double>& tier_neighbors) {
    params.validate();
    cov.validate();
    int tiers = tier_count_of(params.hops);
    if (static_cast<int>(tier_neighbors.size()) < tiers - 1)
        throw std::invalid_argument("need tier neighbor expectations N_j for j = 1..H-1");

    double total = 0.0;
    double upstream = 0.0;  // sum of N_j over tiers already crossed
    double ring = 4.0;      // 4 * 3^(h-1)
    for (int h = 1; h <= tiers; ++h) {
        for (int i = 2; i <= 4; ++i) {
            double bracket = (params.nodes - 1.0 - i) - upstream;
            if (bracket < 0.0) bracket = 0.0;
            total += ring * bracket * params.forward_prob * cov.at(i);
        }
        if (h < tiers) upstream += tier_neighbors[static_cast<size_t>(h - 1)];
        ring *= 3.0;
    }
    return total;
}

double rrep_overhead(const AnalyticalParams& params) {
    params.validate();
    double h = params.hops;
    double multipath = 0.5 * h * (params.nodes - h - 2.0) * params.forward_prob;
    double value = h + multipath;
    return value < h ? h : value;
}

double discovery_overhead(const AnalyticalParams& params, const CoverageIndexTable& cov,
                          const std::vector<double>& tier_neighbors) {
    return rreq_overhead(params, cov, tier_neighbors) + rrep_overhead(params);
}

double hello_overhead_route(const RouteDescriptor& route) {
    route.validate();
    return 2.0 * (route.route_life / route.hello_interval) * route.links;
}

double hello_overhead_route_integer(const RouteDescriptor& route) {
    route.validate();
    return 2.0 * std::floor(route.route_life / route.hello_interval) * route.links;
}

double hello_overhead_total(const std::vector<RouteDescriptor>& routes) {
    double total = 0.0;
    for (const auto& r : routes) total += hello_overhead_route(r);
    return total;
}

OverheadBreakdown aggregate_overhead(const AnalyticalParams& params,
                                     const CoverageIndexTable& cov,
                                     const std::vector<double>& tier_neighbors,
                                     const std::vector<RouteDescriptor>& routes) {
    OverheadBreakdown breakdown;
    breakdown.rreq = rreq_overhead(params, cov, tier_neighbors);
    breakdown.rrep = rrep_overhead(params);
    breakdown.discovery = breakdown.rreq + breakdown.rrep;
    breakdown.hello = hello_overhead_total(routes);
    breakdown.aggregate = breakdown.discovery + breakdown.hello;
    return breakdown;
}

}  // namespace rrlab
