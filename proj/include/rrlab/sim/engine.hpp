#pragma once

#include <iosfwd>
#include <map>
#include <random>
#include <vector>

#include "rrlab/metrics.hpp"
#include "rrlab/protocol.hpp"
#include "rrlab/sim/event.hpp"
#include "rrlab/sim/scenario.hpp"

namespace rrlab::sim {

/// One deterministic discrete-event run: unit-disk radio, idealized MAC
/// (serialization + propagation delay, optional seeded broadcast jitter,
/// no collisions), random-waypoint mobility, CBR traffic, and the protocol
/// state machines. Everything random flows through one seeded stream, so a
/// (config, seed) pair fixes the entire event trace.
class Simulator {
public:
    Simulator(ScenarioConfig config, proto::ProtocolFeatureSet features,
              std::ostream* trace = nullptr);

    MetricsReport run();

    // Post-run introspection for tests and validation reports.
    const std::vector<MobileNode>& mobiles() const { return mobiles_; }
    const proto::ProtocolNode& protocol_node(NodeId id) const;
    const std::vector<Flow>& flows() const { return flows_; }

private:
    struct DataRecord {
        double generated_at = 0.0;
        bool sent = false;
        int state = 0;  // 0 pending, 1 delivered, 2 dropped
    };

    void setup_topology();
    void setup_flows();
    void schedule(SimEvent ev, double now);
    void apply_actions(NodeId node, std::vector<proto::Action> actions, double now);
    void transmit(NodeId sender, Packet pkt, NodeId link_dst, double now);
    void handle_event(const SimEvent& ev);
    void trace_event(const SimEvent& ev);

    ScenarioConfig config_;
    proto::ProtocolFeatureSet features_;
    std::ostream* trace_;

    std::mt19937_64 rng_;
    std::vector<MobileNode> mobiles_;
    std::vector<proto::ProtocolNode> nodes_;
    std::vector<Flow> flows_;
    EventQueue queue_;
    std::uint64_t uid_counter_ = 0;
    double now_ = 0.0;

    MetricsReport report_;
    std::map<std::uint64_t, DataRecord> data_;
};

/// Convenience wrapper: build, run, return the report.
MetricsReport run(const ScenarioConfig& config, const proto::ProtocolFeatureSet& features,
                  std::ostream* trace = nullptr);

}  // namespace rrlab::sim
