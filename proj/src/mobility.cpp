#include "rrlab/sim/mobility.hpp"

#include <algorithm>
#include <cmath>

namespace rrlab::sim {

double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

Vec2 draw_waypoint(const Arena& arena, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(0.0, arena.width);
    std::uniform_real_distribution<double> uy(0.0, arena.height);
    double x = ux(rng);
    double y = uy(rng);
    return {x, y};
}

MobileNode move(MobileNode node, double dt, const Arena& arena, std::mt19937_64& rng) {
    if (dt < 0.0) dt = 0.0;
    if (node.speed <= 0.0) return node;

    double budget = node.speed * dt;
    while (budget > 0.0) {
        double leg = distance(node.pos, node.waypoint);
        if (leg <= budget) {
            node.pos = node.waypoint;
            budget -= leg;
            node.waypoint = draw_waypoint(arena, rng);
            if (leg == 0.0 && distance(node.pos, node.waypoint) == 0.0) break;
        } else {
            double frac = budget / leg;
            node.pos.x += (node.waypoint.x - node.pos.x) * frac;
            node.pos.y += (node.waypoint.y - node.pos.y) * frac;
            budget = 0.0;
        }
    }
    node.pos.x = std::clamp(node.pos.x, 0.0, arena.width);
    node.pos.y = std::clamp(node.pos.y, 0.0, arena.height);
    return node;
}

}  // namespace rrlab::sim
