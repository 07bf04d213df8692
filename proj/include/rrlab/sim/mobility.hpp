#pragma once

#include <random>

#include "rrlab/sim/packet.hpp"

namespace rrlab::sim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Vec2& a, const Vec2& b);

struct Arena {
    double width = 1000.0;
    double height = 1000.0;
    bool contains(const Vec2& p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
};

struct MobileNode {
    NodeId id = kNoNode;
    Vec2 pos;
    Vec2 waypoint;
    double speed = 0.0;        // m/s
    double radio_range = 250.0;
};

/// Random-waypoint step with zero pause time: advance toward the waypoint at
/// the node's speed; on arrival draw a fresh uniform waypoint and keep
/// walking until dt is used up. Draws from rng only on waypoint arrival.
MobileNode move(MobileNode node, double dt, const Arena& arena, std::mt19937_64& rng);

Vec2 draw_waypoint(const Arena& arena, std::mt19937_64& rng);

}  // namespace rrlab::sim
