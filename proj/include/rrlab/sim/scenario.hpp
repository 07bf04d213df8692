#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrlab/sim/mobility.hpp"

namespace rrlab::sim {

struct Flow {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    double rate_pps = 4.0;
    double start = 0.0;
    double stop = -1.0;  // -1: run until the simulation ends
};

/// Protocol timing and mechanism parameters shared by the three presets.
/// The named defaults (hello 1 s, route timeout 10 s, ERS TTLs 1/3/7/full,
/// backoff base 0.5 s, 3 retries) are deliberate and config-overridable.
struct ProtocolParams {
    double hello_interval = 1.0;
    double route_timeout = 10.0;
    std::vector<int> ers_ttls = {1, 3, 7, 0};  // 0 means network-wide
    double backoff_base = 0.5;
    int max_retries = 3;

    // Ring walk pacing: a scoped ring waits 2 * ttl * node_traversal before
    // escalating; binary-exponential backoff applies to the full-TTL retries
    // after the ring sequence is exhausted.
    double node_traversal = 0.01;

    double ack_timeout = 0.05;
    int ack_retries = 1;

    // Missed-probe link-break threshold, in hello intervals.
    double hello_loss_factor = 2.5;
    // A route entry counts as active for link monitoring while it carried
    // traffic within this window.
    double hello_active_window = 2.0;

    int control_size = 64;  // bytes for RREQ/RREP/RERR/HELLO/ACK
    int data_ttl = 64;
    int repair_max_hops = 3;   // local repair only near the destination
    int repair_ttl_slack = 1;
    int repair_attempts = 2;
    int max_cached_routes = 4;
    int multipath_replies = 2;  // RREQ copies a DSR destination answers
    int queue_limit = 512;      // per-destination pending data
    // Packets queued while a discovery runs are dropped, not delivered,
    // once they age past this (send-buffer lifetime).
    double queue_lifetime = 1.5;
};

enum class PlacementKind { Random, Grid, Chain, Explicit };

struct Placement {
    PlacementKind kind = PlacementKind::Random;
    int rows = 0;
    int cols = 0;
    double spacing = 200.0;
    std::vector<Vec2> positions;  // Explicit
};

struct FlowSpec {
    bool random = true;
    int count = 10;
    double rate_pps = 4.0;
    std::vector<Flow> flows;  // explicit list when !random
};

struct ScriptedMove {
    double time = 0.0;
    NodeId node = kNoNode;
    double x = 0.0;
    double y = 0.0;
};

struct ScenarioConfig {
    int node_count = 50;
    Arena arena{1000.0, 1000.0};
    double speed = 2.0;          // m/s, 0 disables mobility
    double bandwidth_bps = 2e6;
    int data_size = 512;         // bytes
    double duration = 300.0;     // seconds
    std::uint64_t seed = 1;
    std::string protocol = "aodv";
    double radio_range = 250.0;
    double broadcast_jitter = 0.001;  // max uniform extra delay on broadcasts
    double mobility_step = 0.1;
    Placement placement;
    FlowSpec flows;
    ProtocolParams params;
    std::vector<ScriptedMove> moves;  // deterministic test hook

    /// Throws std::invalid_argument on non-positive sizes/durations, a
    /// missing seed-sensitive field, or inconsistent placement.
    void validate() const;
};

}  // namespace rrlab::sim
