#pragma once

#include <vector>

#include "rrlab/overhead.hpp"

namespace rrlab {

/// The printed derivative expressions in the source model repeat most of the
/// overhead function instead of differentiating it. Both readings are kept:
/// PaperLiteral evaluates the printed expressions verbatim, Exact evaluates
/// the numerically correct derivatives of the implemented overhead function.
enum class SensitivityMode { PaperLiteral, Exact };

struct SensitivityDeltas {
    double d_nodes = 0.0;
    double d_hops = 0.0;
    double d_route_life = 0.0;
    double d_hello_interval = 0.0;
};

struct SensitivityReport {
    double dy_dn = 0.0;
    double dy_dH = 0.0;
    double dy_dT = 0.0;
    double dy_dt = 0.0;
    double dx = 0.0;  // discovery part: dy_dn * dn + dy_dH * dH
    double dz = 0.0;  // monitoring part: dy_dT * dT + dy_dt * dt
    double dy = 0.0;  // dx + dz
    SensitivityMode mode = SensitivityMode::Exact;
    bool boundary_warning = false;
};

/// d(hello total)/dT for a shared shift of every route's life time:
/// sum_i 2 l_i / t_i. Always >= 0.
double partial_route_life(const std::vector<RouteDescriptor>& routes);

/// d(hello total)/dt for a shared shift of every route's probe interval:
/// sum_i -2 (T_i / t_i^2) l_i. Always <= 0.
double partial_hello_interval(const std::vector<RouteDescriptor>& routes);

/// Printed d/dn expression, evaluated verbatim under the same tier-sum
/// interpretation and bracket clamping as the RREQ evaluator. Not the
/// calculus derivative of the overhead function.
double partial_nodes_literal(const AnalyticalParams& params, const CoverageIndexTable& cov,
                             const std::vector<double>& tier_neighbors);

/// Printed d/dH expression, same caveats as above.
double partial_hops_literal(const AnalyticalParams& params, const CoverageIndexTable& cov,
                            const std::vector<double>& tier_neighbors);

struct ExactPartial {
    double value = 0.0;            // central finite difference of the discovery evaluator
    double analytic = 0.0;         // closed-form derivative away from clamp boundaries
    bool boundary_warning = false; // set when the evaluation point sits on or
                                   // within a step of a clamp/rounding kink,
                                   // or analytic and numeric disagree
};

/// Central finite difference of discovery_overhead in the node count
/// (relative step 1e-6, absolute floor 1e-9), cross-checked against the
/// analytic tier-sum derivative.
ExactPartial partial_nodes_exact(const AnalyticalParams& params, const CoverageIndexTable& cov,
                                 const std::vector<double>& tier_neighbors);

/// Central finite difference of discovery_overhead in the hop count, treated
/// as a real parameter; the tier count is held at round(H) across the stencil.
ExactPartial partial_hops_exact(const AnalyticalParams& params, const CoverageIndexTable& cov,
                                const std::vector<double>& tier_neighbors);

/// First-order total change dy = dx + dz for the supplied parameter deltas;
/// dx uses the literal or exact discovery partials per mode, dz always uses
/// the exact monitoring partials (the printed ones are already exact).
SensitivityReport total_differential(const AnalyticalParams& params,
                                     const CoverageIndexTable& cov,
                                     const std::vector<double>& tier_neighbors,
                                     const std::vector<RouteDescriptor>& routes,
                                     const SensitivityDeltas& deltas, SensitivityMode mode);

}  // namespace rrlab
