#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "rrlab/sim/packet.hpp"

namespace rrlab::sim {

enum class EventKind { PacketDelivery, TimerExpiry, TrafficGeneration, MobilityUpdate };

enum class TimerKind { DiscoveryRetry, AckWait, HelloRound };

/// Armed by a protocol node; validity is checked against the node's own
/// generation counters when it fires, so cancellation is just a counter bump.
struct TimerPayload {
    TimerKind kind = TimerKind::DiscoveryRetry;
    NodeId dst = kNoNode;          // discovery target
    std::uint64_t data_uid = 0;    // ack wait subject
    std::uint64_t generation = 0;
};

struct SimEvent {
    double time = 0.0;
    std::uint64_t sequence = 0;  // unique per run; breaks time ties
    EventKind kind = EventKind::PacketDelivery;

    // PacketDelivery
    Packet packet;
    NodeId receiver = kNoNode;
    NodeId transmitter = kNoNode;
    bool addressed = true;  // false: promiscuous overhear

    // TimerExpiry
    NodeId owner = kNoNode;
    TimerPayload timer;

    // TrafficGeneration
    int flow_index = -1;

    // MobilityUpdate: scripted relocation when scripted_node >= 0,
    // otherwise the periodic random-waypoint step.
    NodeId scripted_node = kNoNode;
    double scripted_x = 0.0;
    double scripted_y = 0.0;
};

struct EventAfter {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.sequence > b.sequence;
    }
};

/// Min-queue over (time, sequence). The engine assigns sequences in
/// scheduling order, which makes the execution order a deterministic
/// function of the schedule alone.
class EventQueue {
public:
    void push(SimEvent ev) {
        ev.sequence = next_sequence_++;
        heap_.push(std::move(ev));
    }
    bool empty() const { return heap_.empty(); }
    const SimEvent& top() const { return heap_.top(); }
    SimEvent pop() {
        SimEvent ev = heap_.top();
        heap_.pop();
        return ev;
    }
    std::size_t size() const { return heap_.size(); }

private:
    std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> heap_;
    std::uint64_t next_sequence_ = 0;
};

}  // namespace rrlab::sim
