#include "rrlab/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

namespace rrlab {

namespace {

constexpr double kRelStep = 1e-6;
constexpr double kAbsStepFloor = 1e-9;
constexpr double kAgreementTol = 1e-6;

double fd_step(double at) { return std::max(kRelStep * std::abs(at), kAbsStepFloor); }

double rel_diff(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) / scale;
}

int tier_count_of(double hops) { return static_cast<int>(std::llround(hops)); }

}  // namespace

double partial_route_life(const std::vector<RouteDescriptor>& routes) {
    double total = 0.0;
    for (const auto& r : routes) {
        r.validate();
        total += 2.0 / r.hello_interval * r.links;
    }
    return total;
}

double partial_hello_interval(const std::vector<RouteDescriptor>& routes) {
    double total = 0.0;
    for (const auto& r : routes) {
        r.validate();
        total += -2.0 * (r.route_life / (r.hello_interval * r.hello_interval)) * r.links;
    }
    return total;
}

double partial_nodes_literal(const AnalyticalParams& params, const CoverageIndexTable& cov,
                             const std::vector<double>& tier_neighbors) {
    params.validate();
    cov.validate();
    int tiers = tier_count_of(params.hops);
    if (static_cast<int>(tier_neighbors.size()) < tiers - 1)
        throw std::invalid_argument("need tier neighbor expectations N_j for j = 1..H-1");

    // Printed bracket is (-i) - sum N_j; under the shared clamping rule it
    // never goes positive, so the tier sum contributes nothing. Kept as an
    // explicit loop so the expression stays recognizable.
    double total = 0.0;
    double upstream = 0.0;
    double ring = 4.0;
    for (int h = 1; h <= tiers; ++h) {
        for (int i = 2; i <= 4; ++i) {
            double bracket = -static_cast<double>(i) - upstream;
            if (bracket < 0.0) bracket = 0.0;
            total += ring * bracket * params.forward_prob * cov.at(i);
        }
        if (h < tiers) upstream += tier_neighbors[static_cast<size_t>(h - 1)];
        ring *= 3.0;
    }
    double h = params.hops;
    total += h + 0.5 * h * (-h - 2.0) * params.forward_prob;
    return total;
}

double partial_hops_literal(const AnalyticalParams& params, const CoverageIndexTable& cov,
                            const std::vector<double>& tier_neighbors) {
    params.validate();
    cov.validate();
    int tiers = tier_count_of(params.hops);
    if (static_cast<int>(tier_neighbors.size()) < tiers - 1)
        throw std::invalid_argument("need tier neighbor expectations N_j for j = 1..H-1");

    double total = 0.0;
    double upstream = 0.0;
    double pow3 = 1.0;  // 3^(h-1)
    for (int h = 1; h <= tiers; ++h) {
        double coeff = 4.0 * pow3 + (h - 1) * pow3;
        double inner = 0.0;
        for (int i = 2; i <= 4; ++i) {
            double bracket = (params.nodes - 1.0 - i) - upstream;
            if (bracket < 0.0) bracket = 0.0;
            inner += bracket * params.forward_prob * cov.at(i);
        }
        total += coeff * inner;
        if (h < tiers) upstream += tier_neighbors[static_cast<size_t>(h - 1)];
        pow3 *= 3.0;
    }
    total += 1.0 + 0.5 * (params.nodes - 3.0) * params.forward_prob;
    return total;
}

ExactPartial partial_nodes_exact(const AnalyticalParams& params, const CoverageIndexTable& cov,
                                 const std::vector<double>& tier_neighbors) {
    params.validate();
    cov.validate();
    ExactPartial out;
    double step = fd_step(params.nodes);

    AnalyticalParams hi = params, lo = params;
    hi.nodes += step;
    lo.nodes -= step;
    out.value = (discovery_overhead(hi, cov, tier_neighbors) -
                 discovery_overhead(lo, cov, tier_neighbors)) /
                (2.0 * step);

    // Analytic counterpart: each unclamped bracket contributes p*C_i per
    // tier; the reply term contributes (H/2)p while its clamp is inactive.
    int tiers = tier_count_of(params.hops);
    double analytic = 0.0;
    double upstream = 0.0;
    double ring = 4.0;
    for (int h = 1; h <= tiers; ++h) {
        for (int i = 2; i <= 4; ++i) {
            double bracket = (params.nodes - 1.0 - i) - upstream;
            if (std::abs(bracket) <= 2.0 * step) out.boundary_warning = true;
            if (bracket > 0.0) analytic += ring * params.forward_prob * cov.at(i);
        }
        if (h < tiers) upstream += tier_neighbors[static_cast<size_t>(h - 1)];
        ring *= 3.0;
    }
    double reply_margin = params.nodes - params.hops - 2.0;
    if (params.forward_prob > 0.0 && std::abs(reply_margin) <= 2.0 * step)
        out.boundary_warning = true;
    if (reply_margin > 0.0) analytic += 0.5 * params.hops * params.forward_prob;
    out.analytic = analytic;

    if (rel_diff(out.value, out.analytic) > kAgreementTol) out.boundary_warning = true;
    return out;
}

ExactPartial partial_hops_exact(const AnalyticalParams& params, const CoverageIndexTable& cov,
                                const std::vector<double>& tier_neighbors) {
    params.validate();
    cov.validate();
    ExactPartial out;
    double step = fd_step(params.hops);

    // The tier count is round(H); a stencil straddling a half-integer would
    // jump tiers, which is a kink, not a derivative.
    double frac = params.hops - std::floor(params.hops);
    if (std::abs(frac - 0.5) <= 2.0 * step) out.boundary_warning = true;

    AnalyticalParams hi = params, lo = params;
    hi.hops += step;
    lo.hops -= step;
    out.value = (discovery_overhead(hi, cov, tier_neighbors) -
                 discovery_overhead(lo, cov, tier_neighbors)) /
                (2.0 * step);

    double reply_margin = params.nodes - params.hops - 2.0;
    if (params.forward_prob > 0.0 && std::abs(reply_margin) <= 2.0 * step)
        out.boundary_warning = true;
    if (reply_margin > 0.0) {
        out.analytic =
            1.0 + 0.5 * params.forward_prob * (params.nodes - 2.0 * params.hops - 2.0);
    } else {
        out.analytic = 1.0;  // clamped branch: reply overhead equals H
    }

    if (rel_diff(out.value, out.analytic) > kAgreementTol) out.boundary_warning = true;
    return out;
}

SensitivityReport total_differential(const AnalyticalParams& params,
                                     const CoverageIndexTable& cov,
                                     const std::vector<double>& tier_neighbors,
                                     const std::vector<RouteDescriptor>& routes,
                                     const SensitivityDeltas& deltas, SensitivityMode mode) {
    if (!std::isfinite(deltas.d_nodes) || !std::isfinite(deltas.d_hops) ||
        !std::isfinite(deltas.d_route_life) || !std::isfinite(deltas.d_hello_interval))
        throw std::invalid_argument("sensitivity deltas must be finite");

    SensitivityReport report;
    report.mode = mode;
    if (mode == SensitivityMode::Exact) {
        ExactPartial pn = partial_nodes_exact(params, cov, tier_neighbors);
        ExactPartial ph = partial_hops_exact(params, cov, tier_neighbors);
        report.dy_dn = pn.value;
        report.dy_dH = ph.value;
        report.boundary_warning = pn.boundary_warning || ph.boundary_warning;
    } else {
        report.dy_dn = partial_nodes_literal(params, cov, tier_neighbors);
        report.dy_dH = partial_hops_literal(params, cov, tier_neighbors);
    }
    report.dy_dT = partial_route_life(routes);
    report.dy_dt = partial_hello_interval(routes);
    report.dx = report.dy_dn * deltas.d_nodes + report.dy_dH * deltas.d_hops;
    report.dz = report.dy_dT * deltas.d_route_life + report.dy_dt * deltas.d_hello_interval;
    report.dy = report.dx + report.dz;
    return report;
}

}  // namespace rrlab
