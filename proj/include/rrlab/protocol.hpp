#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rrlab/sim/event.hpp"
#include "rrlab/sim/scenario.hpp"

namespace rrlab::proto {

using sim::kNoNode;
using sim::Packet;
using sim::PacketKind;
using sim::ProtocolParams;
using sim::TimerKind;
using sim::TimerPayload;

enum class RouteStore { RoutingTable, RouteCache };

struct BackoffPolicy {
    double base = 0.5;    // seconds, doubles per retry
    int max_retries = 3;  // full-TTL retries after the ring sequence
};

/// Behavioral switches for one reactive protocol. The three presets encode
/// the comparison table and prose behaviors of AODV, DSR and DYMO; custom
/// sets can be built field by field for ablation runs.
struct ProtocolFeatureSet {
    std::string name = "custom";
    bool source_routing = false;   // RREQ/RREP accumulate a route record
    RouteStore store = RouteStore::RoutingTable;
    bool multiple_routes = false;  // destination answers several RREQ copies
    bool gratuitous_rrep = false;
    bool periodic_hello = false;
    bool ack_link_monitor = false;
    bool promiscuous = false;
    bool local_repair = false;
    bool check_store_before_discovery = false;
    bool ers_enabled = true;
    BackoffPolicy backoff;

    static ProtocolFeatureSet aodv();
    static ProtocolFeatureSet dsr();
    static ProtocolFeatureSet dymo();
    /// Throws std::invalid_argument for unknown names.
    static ProtocolFeatureSet by_name(const std::string& name);
};

struct RouteEntry {
    NodeId dst = kNoNode;
    NodeId next_hop = kNoNode;
    std::vector<NodeId> path;  // full source route, cache store only
    int hops = 0;
    double expiry = 0.0;
    double last_used = 0.0;
    bool valid = false;
    bool self_discovered = false;      // answered one of this node's own RREQs
    std::uint64_t discovery_uid = 0;   // freshness ordering
    std::set<NodeId> precursors;       // flow origins forwarded through here
};

/// Expanding ring search plan: strictly increasing scoped TTLs, then
/// binary-exponential full-TTL retries.
struct ErsSchedule {
    std::vector<int> ttls;
    BackoffPolicy backoff;
    double node_traversal = 0.04;

    /// Normalizes a raw TTL list against the network-wide cap: 0 becomes the
    /// cap, values clamp to it, duplicates collapse, order is ascending.
    static ErsSchedule make(const std::vector<int>& raw, int ttl_cap, BackoffPolicy backoff,
                            double node_traversal, bool ers_enabled);

    int attempts_allowed() const { return static_cast<int>(ttls.size()) + backoff.max_retries; }
    int ttl_for_attempt(int attempt) const;
    /// Scoped rings wait out the ring traversal; exhausted-ring retries back
    /// off exponentially.
    double timeout_for_attempt(int attempt) const;
};

enum class DropReason {
    QueueOverflow,
    QueueTimeout,
    DiscoveryFailure,
    RepairFailure,
    NoRoute,
    TtlExpired,
    LinkLost
};

struct Action {
    enum class Type { Send, ArmTimer, Deliver, Drop } type = Type::Send;
    // Send
    Packet pkt;
    NodeId link_dst = kNoNode;  // kNoNode: broadcast
    // ArmTimer
    TimerPayload timer;
    double delay = 0.0;
    // Deliver / Drop
    std::uint64_t uid = 0;
    DropReason reason = DropReason::NoRoute;

    static Action send(Packet p, NodeId to);
    static Action arm(TimerPayload t, double delay);
    static Action deliver(std::uint64_t uid);
    static Action drop(std::uint64_t uid, DropReason r);
};

/// One node's control plane. Handlers mutate local state and return the
/// outward effects as an action list, so the state machine is unit-testable
/// without the event loop. The uid counter is shared with the hosting run to
/// keep packet ids globally unique and freshness-ordered.
class ProtocolNode {
public:
    ProtocolNode(NodeId self, ProtocolFeatureSet features, ProtocolParams params, int ttl_cap,
                 int data_size, std::uint64_t* uid_counter);

    /// A locally generated DATA packet wants to reach dst.
    std::vector<Action> on_traffic(NodeId dst, std::uint64_t uid, double now);

    /// A transmission reached this node. addressed=false is a promiscuous
    /// overhear and only used when the feature set enables it.
    std::vector<Action> on_packet(const Packet& pkt, NodeId transmitter, bool addressed,
                                  double now);

    /// Periodic link-monitoring tick: emit one HELLO per active link and
    /// declare breaks for neighbors that went silent.
    std::vector<Action> hello_tick(double now);

    std::vector<Action> on_timer(const TimerPayload& timer, double now);

    /// Link-layer break notification (used directly by tests; the simulator
    /// reaches it through missed probes or exhausted retransmissions).
    std::vector<Action> on_link_break(NodeId neighbor, double now);

    // Introspection for tests and validation.
    const std::map<NodeId, std::vector<RouteEntry>>& store() const { return store_; }
    const RouteEntry* find_route(NodeId dst, double now) const;
    bool discovery_pending(NodeId dst) const { return pending_.count(dst) != 0; }
    int discovery_failures() const { return discovery_failures_; }
    const ErsSchedule& ers() const { return ers_; }

private:
    struct Pending {
        std::uint64_t rreq_uid = 0;
        int attempt = 0;
        std::uint64_t generation = 0;
        bool is_repair = false;
        int repair_hops = 0;
        std::set<NodeId> repair_origins;
        std::vector<Packet> queued;
    };
    struct PendingAck {
        NodeId next_hop = kNoNode;
        int attempt = 0;
        std::uint64_t generation = 0;
        Packet pkt;
    };

    std::uint64_t fresh_uid() { return ++*uid_counter_; }

    Packet make_data(NodeId dst, std::uint64_t uid, double now) const;
    bool entry_fresh(const RouteEntry& e, double now) const {
        return e.valid && now < e.expiry;
    }
    bool entry_active(const RouteEntry& e, double now) const {
        return entry_fresh(e, now) && now - e.last_used <= params_.hello_active_window;
    }

    RouteEntry* usable_route(NodeId dst, double now, bool require_self_discovered);
    const RouteEntry* active_route(NodeId dst, double now) const;
    RouteEntry* fresh_table_entry(NodeId dst, double now);
    void install_table_entry(NodeId dst, NodeId next, int hops, double now,
                             std::uint64_t discovery_uid, bool self_discovered);
    void install_cache_path(const std::vector<NodeId>& path, double now,
                            std::uint64_t discovery_uid, bool self_discovered);
    void harvest_record(const std::vector<NodeId>& record, NodeId transmitter, double now,
                        std::uint64_t discovery_uid);
    void purge_cache_link(NodeId from, NodeId to);
    void note_heard(NodeId neighbor, double now) { last_heard_[neighbor] = now; }

    void send_data_via(std::vector<Action>& out, Packet pkt, RouteEntry& entry, double now);
    void start_discovery(std::vector<Action>& out, NodeId dst, double now, bool is_repair,
                         int repair_hops, std::set<NodeId> repair_origins);
    void broadcast_rreq(std::vector<Action>& out, Pending& pending, NodeId dst, double now);
    void fail_discovery(std::vector<Action>& out, NodeId dst, Pending& pending, double now);
    void answer_rreq(std::vector<Action>& out, const Packet& rreq, NodeId transmitter,
                     double now);
    void send_rerr_towards(std::vector<Action>& out, NodeId flow_origin, NodeId unreachable,
                           NodeId broken_from, NodeId broken_to, double now);

    void handle_rreq(std::vector<Action>& out, const Packet& pkt, NodeId transmitter, double now);
    void handle_rrep(std::vector<Action>& out, const Packet& pkt, NodeId transmitter,
                     bool addressed, double now);
    void handle_rerr(std::vector<Action>& out, const Packet& pkt, NodeId transmitter,
                     bool addressed, double now);
    void handle_data(std::vector<Action>& out, const Packet& pkt, NodeId transmitter,
                     bool addressed, double now);
    void handle_ack(const Packet& pkt, NodeId transmitter, bool addressed, double now);

    NodeId self_;
    ProtocolFeatureSet features_;
    ProtocolParams params_;
    int ttl_cap_;
    int data_size_;
    std::uint64_t* uid_counter_;
    ErsSchedule ers_;

    std::map<NodeId, std::vector<RouteEntry>> store_;
    std::set<std::pair<NodeId, std::uint64_t>> rreq_seen_;
    std::map<std::pair<NodeId, std::uint64_t>, int> rreq_replies_;
    std::set<std::uint64_t> data_seen_;
    std::map<NodeId, Pending> pending_;
    std::map<std::uint64_t, PendingAck> pending_acks_;
    std::map<NodeId, double> last_heard_;
    std::uint64_t timer_generation_ = 0;
    int discovery_failures_ = 0;
};

}  // namespace rrlab::proto
