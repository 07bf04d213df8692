#include "rrlab/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace rrlab::proto {

ProtocolFeatureSet ProtocolFeatureSet::aodv() {
    ProtocolFeatureSet f;
    f.name = "aodv";
    f.source_routing = false;
    f.store = RouteStore::RoutingTable;
    f.multiple_routes = false;
    f.gratuitous_rrep = true;
    f.periodic_hello = true;
    f.ack_link_monitor = false;
    f.promiscuous = false;
    f.local_repair = true;
    f.check_store_before_discovery = true;
    f.ers_enabled = true;
    return f;
}

ProtocolFeatureSet ProtocolFeatureSet::dsr() {
    ProtocolFeatureSet f;
    f.name = "dsr";
    f.source_routing = true;
    f.store = RouteStore::RouteCache;
    f.multiple_routes = true;
    f.gratuitous_rrep = true;
    f.periodic_hello = false;
    f.ack_link_monitor = true;
    f.promiscuous = true;
    f.local_repair = false;
    f.check_store_before_discovery = true;
    f.ers_enabled = true;
    return f;
}

ProtocolFeatureSet ProtocolFeatureSet::dymo() {
    ProtocolFeatureSet f;
    f.name = "dymo";
    f.source_routing = true;  // route records ride in RREQ/RREP only
    f.store = RouteStore::RoutingTable;
    f.multiple_routes = false;
    f.gratuitous_rrep = false;
    f.periodic_hello = true;
    f.ack_link_monitor = false;
    f.promiscuous = false;
    f.local_repair = false;
    f.check_store_before_discovery = false;
    f.ers_enabled = true;
    return f;
}

ProtocolFeatureSet ProtocolFeatureSet::by_name(const std::string& name) {
    if (name == "aodv") return aodv();
    if (name == "dsr") return dsr();
    if (name == "dymo") return dymo();
    throw std::invalid_argument("unknown protocol preset: " + name);
}

ErsSchedule ErsSchedule::make(const std::vector<int>& raw, int ttl_cap, BackoffPolicy backoff,
                              double node_traversal, bool ers_enabled) {
    ErsSchedule s;
    s.backoff = backoff;
    s.node_traversal = node_traversal;
    if (ttl_cap < 1) ttl_cap = 1;
    if (ers_enabled) {
        for (int ttl : raw) {
            int t = (ttl == 0) ? ttl_cap : std::min(ttl, ttl_cap);
            if (t >= 1 && (s.ttls.empty() || t > s.ttls.back())) s.ttls.push_back(t);
        }
    }
    if (s.ttls.empty()) s.ttls.push_back(ttl_cap);
    return s;
}

int ErsSchedule::ttl_for_attempt(int attempt) const {
    if (attempt < static_cast<int>(ttls.size())) return ttls[static_cast<size_t>(attempt)];
    return ttls.back();
}

double ErsSchedule::timeout_for_attempt(int attempt) const {
    if (attempt < static_cast<int>(ttls.size()))
        return 2.0 * ttls[static_cast<size_t>(attempt)] * node_traversal;
    double wait = backoff.base;
    for (int k = static_cast<int>(ttls.size()); k < attempt; ++k) wait *= 2.0;
    return wait;
}

Action Action::send(Packet p, NodeId to) {
    Action a;
    a.type = Type::Send;
    a.pkt = std::move(p);
    a.link_dst = to;
    return a;
}

Action Action::arm(TimerPayload t, double delay) {
    Action a;
    a.type = Type::ArmTimer;
    a.timer = t;
    a.delay = delay;
    return a;
}

Action Action::deliver(std::uint64_t uid) {
    Action a;
    a.type = Type::Deliver;
    a.uid = uid;
    return a;
}

Action Action::drop(std::uint64_t uid, DropReason r) {
    Action a;
    a.type = Type::Drop;
    a.uid = uid;
    a.reason = r;
    return a;
}

ProtocolNode::ProtocolNode(NodeId self, ProtocolFeatureSet features, ProtocolParams params,
                           int ttl_cap, int data_size, std::uint64_t* uid_counter)
    : self_(self),
      features_(std::move(features)),
      params_(std::move(params)),
      ttl_cap_(ttl_cap),
      data_size_(data_size),
      uid_counter_(uid_counter),
      ers_(ErsSchedule::make(params_.ers_ttls, ttl_cap, features_.backoff,
                             params_.node_traversal, features_.ers_enabled)) {}

Packet ProtocolNode::make_data(NodeId dst, std::uint64_t uid, double now) const {
    Packet pkt;
    pkt.kind = PacketKind::Data;
    pkt.uid = uid;
    pkt.origin = self_;
    pkt.target = dst;
    pkt.ttl = params_.data_ttl;
    pkt.size_bytes = data_size_;
    pkt.created_at = now;
    return pkt;
}

const RouteEntry* ProtocolNode::find_route(NodeId dst, double now) const {
    auto it = store_.find(dst);
    if (it == store_.end()) return nullptr;
    const RouteEntry* best = nullptr;
    for (const auto& e : it->second) {
        if (!entry_fresh(e, now)) continue;
        if (!best || e.hops < best->hops) best = &e;
    }
    return best;
}

const RouteEntry* ProtocolNode::active_route(NodeId dst, double now) const {
    auto it = store_.find(dst);
    if (it == store_.end()) return nullptr;
    const RouteEntry* best = nullptr;
    for (const auto& e : it->second) {
        if (!entry_active(e, now)) continue;
        if (!best || e.hops < best->hops) best = &e;
    }
    return best;
}

RouteEntry* ProtocolNode::usable_route(NodeId dst, double now, bool require_self_discovered) {
    auto it = store_.find(dst);
    if (it == store_.end()) return nullptr;
    RouteEntry* best = nullptr;
    for (auto& e : it->second) {
        if (!entry_fresh(e, now)) continue;
        if (require_self_discovered && !e.self_discovered) continue;
        if (!best || e.hops < best->hops) best = &e;
    }
    return best;
}

RouteEntry* ProtocolNode::fresh_table_entry(NodeId dst, double now) {
    auto it = store_.find(dst);
    if (it == store_.end() || it->second.empty()) return nullptr;
    RouteEntry& e = it->second.front();
    return entry_fresh(e, now) ? &e : nullptr;
}

void ProtocolNode::install_table_entry(NodeId dst, NodeId next, int hops, double now,
                                       std::uint64_t discovery_uid, bool self_discovered) {
    if (dst == self_ || next == self_) return;
    auto& entries = store_[dst];
    if (entries.empty()) entries.emplace_back();
    RouteEntry& e = entries.front();  // routing table keeps one entry per destination
    bool replace = !entry_fresh(e, now) || discovery_uid > e.discovery_uid;
    if (!replace) {
        if (e.next_hop == next) e.last_used = now;  // liveness refresh only
        return;
    }
    e.dst = dst;
    e.next_hop = next;
    e.path.clear();
    e.hops = hops;
    e.expiry = now + params_.route_timeout;
    e.last_used = now;
    e.valid = true;
    e.self_discovered = self_discovered;
    e.discovery_uid = discovery_uid;
    e.precursors.clear();
    last_heard_.emplace(next, now);
}

void ProtocolNode::install_cache_path(const std::vector<NodeId>& path, double now,
                                      std::uint64_t discovery_uid, bool self_discovered) {
    // path runs from this node to some reachable target; cache a sub-route
    // to every node along it.
    if (path.size() < 2 || path.front() != self_) return;
    for (size_t cut = 1; cut < path.size(); ++cut) {
        std::vector<NodeId> sub(path.begin(), path.begin() + cut + 1);
        NodeId dst = sub.back();
        if (dst == self_) continue;
        auto& entries = store_[dst];
        bool known = false;
        for (auto& e : entries) {
            if (e.path == sub) {
                // hearing about a path is not using it, so last_used stays
                // put; a purged path only comes back on evidence generated
                // after the purge (the purge stamped a fresher uid)
                if (e.valid || discovery_uid > e.discovery_uid) {
                    e.valid = true;
                    e.expiry = now + params_.route_timeout;
                    if (discovery_uid > e.discovery_uid) e.discovery_uid = discovery_uid;
                    e.self_discovered = e.self_discovered || self_discovered;
                }
                known = true;
                break;
            }
        }
        if (known) continue;
        RouteEntry e;
        e.dst = dst;
        e.next_hop = sub[1];
        e.path = sub;
        e.hops = static_cast<int>(sub.size()) - 1;
        e.expiry = now + params_.route_timeout;
        e.last_used = now;
        e.valid = true;
        e.self_discovered = self_discovered;
        e.discovery_uid = discovery_uid;
        entries.push_back(std::move(e));
        std::sort(entries.begin(), entries.end(),
                  [](const RouteEntry& a, const RouteEntry& b) { return a.hops < b.hops; });
        if (static_cast<int>(entries.size()) > params_.max_cached_routes) entries.pop_back();
        last_heard_.emplace(sub[1], now);
    }
}

void ProtocolNode::harvest_record(const std::vector<NodeId>& record, NodeId transmitter,
                                  double now, std::uint64_t discovery_uid) {
    if (features_.store != RouteStore::RouteCache) return;
    if (record.size() < 2) return;
    if (std::find(record.begin(), record.end(), self_) != record.end()) {
        // already on the path: cache both directions from own position
        auto at = std::find(record.begin(), record.end(), self_);
        std::vector<NodeId> forward(at, record.end());
        install_cache_path(forward, now, discovery_uid, false);
        std::vector<NodeId> backward(record.begin(), at + 1);
        std::reverse(backward.begin(), backward.end());
        install_cache_path(backward, now, discovery_uid, false);
        return;
    }
    auto at = std::find(record.begin(), record.end(), transmitter);
    if (at == record.end()) return;
    // reach everything on the record through the overheard transmitter
    std::vector<NodeId> forward{self_};
    forward.insert(forward.end(), at, record.end());
    install_cache_path(forward, now, discovery_uid, false);
    std::vector<NodeId> backward{self_};
    std::vector<NodeId> prefix(record.begin(), at + 1);
    std::reverse(prefix.begin(), prefix.end());
    backward.insert(backward.end(), prefix.begin(), prefix.end());
    install_cache_path(backward, now, discovery_uid, false);
}

void ProtocolNode::purge_cache_link(NodeId from, NodeId to) {
    // the radio is symmetric, so a dead link is dead in both directions;
    // stamping the entry with a fresh uid means only evidence generated
    // after this purge can bring the path back
    for (auto& [dst, entries] : store_) {
        for (auto& e : entries) {
            if (!e.valid || e.path.size() < 2) continue;
            for (size_t i = 0; i + 1 < e.path.size(); ++i) {
                bool hit = (e.path[i] == from && e.path[i + 1] == to) ||
                           (e.path[i] == to && e.path[i + 1] == from);
                if (hit) {
                    e.valid = false;
                    e.discovery_uid = fresh_uid();
                    break;
                }
            }
        }
    }
}

void ProtocolNode::send_data_via(std::vector<Action>& out, Packet pkt, RouteEntry& entry,
                                 double now) {
    entry.last_used = now;
    if (features_.check_store_before_discovery)
        entry.expiry = now + params_.route_timeout;  // reuse extends the lease
    if (features_.store == RouteStore::RouteCache) {
        pkt.route_record = entry.path;
        if (features_.ack_link_monitor) {
            PendingAck pa;
            pa.next_hop = entry.next_hop;
            pa.attempt = 0;
            pa.generation = ++timer_generation_;
            pa.pkt = pkt;
            pending_acks_[pkt.uid] = pa;
            TimerPayload t;
            t.kind = TimerKind::AckWait;
            t.data_uid = pkt.uid;
            t.generation = pa.generation;
            out.push_back(Action::arm(t, params_.ack_timeout));
        }
    }
    out.push_back(Action::send(std::move(pkt), entry.next_hop));
}

std::vector<Action> ProtocolNode::on_traffic(NodeId dst, std::uint64_t uid, double now) {
    std::vector<Action> out;
    Packet pkt = make_data(dst, uid, now);

    auto pending_it = pending_.find(dst);
    if (pending_it != pending_.end()) {
        if (static_cast<int>(pending_it->second.queued.size()) >= params_.queue_limit) {
            out.push_back(Action::drop(uid, DropReason::QueueOverflow));
        } else {
            pending_it->second.queued.push_back(std::move(pkt));
        }
        return out;
    }

    // A protocol that checks its store may reuse any fresh route; one that
    // does not (DYMO) only trusts routes answering its own discoveries and
    // otherwise starts an expanding ring search even when a fresh entry
    // exists.
    RouteEntry* route = usable_route(dst, now, !features_.check_store_before_discovery);
    if (route) {
        send_data_via(out, std::move(pkt), *route, now);
        return out;
    }
    start_discovery(out, dst, now, false, 0, {});
    pending_[dst].queued.push_back(std::move(pkt));
    return out;
}

void ProtocolNode::start_discovery(std::vector<Action>& out, NodeId dst, double now,
                                   bool is_repair, int repair_hops,
                                   std::set<NodeId> repair_origins) {
    Pending pending;
    pending.attempt = 0;
    pending.is_repair = is_repair;
    pending.repair_hops = repair_hops;
    pending.repair_origins = std::move(repair_origins);
    pending.generation = ++timer_generation_;
    pending_[dst] = std::move(pending);
    broadcast_rreq(out, pending_[dst], dst, now);
}

void ProtocolNode::broadcast_rreq(std::vector<Action>& out, Pending& pending, NodeId dst,
                                  double now) {
    (void)now;
    Packet rreq;
    rreq.kind = PacketKind::Rreq;
    rreq.uid = fresh_uid();
    rreq.origin = self_;
    rreq.target = dst;
    rreq.sought = dst;
    rreq.size_bytes = params_.control_size;
    rreq.hops = 0;
    int ttl = pending.is_repair
                  ? std::min(ttl_cap_, pending.repair_hops + params_.repair_ttl_slack)
                  : ers_.ttl_for_attempt(pending.attempt);
    rreq.ttl = ttl;
    if (features_.source_routing) rreq.route_record = {self_};
    pending.rreq_uid = rreq.uid;
    rreq_seen_.insert({self_, rreq.uid});

    double timeout = pending.is_repair
                         ? (pending.attempt == 0
                                ? 2.0 * ttl * ers_.node_traversal
                                : features_.backoff.base * (1 << (pending.attempt - 1)))
                         : ers_.timeout_for_attempt(pending.attempt);
    TimerPayload t;
    t.kind = TimerKind::DiscoveryRetry;
    t.dst = dst;
    t.generation = pending.generation;
    out.push_back(Action::send(std::move(rreq), kNoNode));
    out.push_back(Action::arm(t, timeout));
}

void ProtocolNode::fail_discovery(std::vector<Action>& out, NodeId dst, Pending& pending,
                                  double now) {
    ++discovery_failures_;
    DropReason reason = pending.is_repair ? DropReason::RepairFailure
                                          : DropReason::DiscoveryFailure;
    for (auto& pkt : pending.queued) out.push_back(Action::drop(pkt.uid, reason));
    if (pending.is_repair) {
        for (NodeId origin : pending.repair_origins)
            send_rerr_towards(out, origin, dst, self_, kNoNode, now);
    }
    pending_.erase(dst);
}

std::vector<Action> ProtocolNode::on_timer(const TimerPayload& timer, double now) {
    std::vector<Action> out;
    if (timer.kind == TimerKind::DiscoveryRetry) {
        auto it = pending_.find(timer.dst);
        if (it == pending_.end() || it->second.generation != timer.generation) return out;
        Pending& pending = it->second;
        ++pending.attempt;
        int allowed = pending.is_repair ? params_.repair_attempts : ers_.attempts_allowed();
        if (pending.attempt >= allowed) {
            fail_discovery(out, timer.dst, pending, now);
            return out;
        }
        pending.generation = ++timer_generation_;
        broadcast_rreq(out, pending, timer.dst, now);
        return out;
    }

    // AckWait
    auto it = pending_acks_.find(timer.data_uid);
    if (it == pending_acks_.end() || it->second.generation != timer.generation) return out;
    PendingAck& pa = it->second;
    if (pa.attempt < params_.ack_retries) {
        ++pa.attempt;
        pa.generation = ++timer_generation_;
        TimerPayload t;
        t.kind = TimerKind::AckWait;
        t.data_uid = timer.data_uid;
        t.generation = pa.generation;
        out.push_back(Action::send(pa.pkt, pa.next_hop));
        out.push_back(Action::arm(t, params_.ack_timeout));
        return out;
    }
    // retransmission went unanswered: the link is gone
    Packet lost = pa.pkt;
    NodeId dead_hop = pa.next_hop;
    pending_acks_.erase(it);
    out.push_back(Action::drop(lost.uid, DropReason::LinkLost));
    purge_cache_link(self_, dead_hop);
    auto broken_actions = on_link_break(dead_hop, now);
    out.insert(out.end(), broken_actions.begin(), broken_actions.end());
    if (lost.origin != self_)
        send_rerr_towards(out, lost.origin, lost.target, self_, dead_hop, now);
    return out;
}

std::vector<Action> ProtocolNode::on_packet(const Packet& pkt, NodeId transmitter,
                                            bool addressed, double now) {
    std::vector<Action> out;
    note_heard(transmitter, now);
    switch (pkt.kind) {
        case PacketKind::Rreq:
            if (addressed) handle_rreq(out, pkt, transmitter, now);
            break;
        case PacketKind::Rrep:
            handle_rrep(out, pkt, transmitter, addressed, now);
            break;
        case PacketKind::Rerr:
            handle_rerr(out, pkt, transmitter, addressed, now);
            break;
        case PacketKind::Data:
            handle_data(out, pkt, transmitter, addressed, now);
            break;
        case PacketKind::Ack:
            handle_ack(pkt, transmitter, addressed, now);
            break;
        case PacketKind::Hello:
            break;  // liveness refresh above is the whole job
    }
    return out;
}

void ProtocolNode::answer_rreq(std::vector<Action>& out, const Packet& rreq, NodeId transmitter,
                               double now) {
    (void)now;
    Packet rrep;
    rrep.kind = PacketKind::Rrep;
    rrep.uid = fresh_uid();
    rrep.origin = self_;
    rrep.target = rreq.origin;
    rrep.sought = self_;
    rrep.dist_to_sought = 0;
    rrep.hops = 0;
    rrep.ttl = ttl_cap_ + 1;
    rrep.size_bytes = params_.control_size;
    rrep.answers_uid = rreq.uid;
    if (features_.source_routing) {
        rrep.route_record = rreq.route_record;
        rrep.route_record.push_back(self_);
    }
    out.push_back(Action::send(std::move(rrep), transmitter));
}

void ProtocolNode::handle_rreq(std::vector<Action>& out, const Packet& pkt, NodeId transmitter,
                               double now) {
    auto key = std::make_pair(pkt.origin, pkt.uid);
    bool duplicate = !rreq_seen_.insert(key).second;

    if (self_ == pkt.sought) {
        // The destination answers the first copy; a multiple-route protocol
        // answers a few differently-routed copies. It never re-broadcasts.
        int& replies = rreq_replies_[key];
        int allowed = features_.multiple_routes ? params_.multipath_replies : 1;
        if (replies >= allowed) return;
        ++replies;
        if (features_.store == RouteStore::RouteCache) {
            std::vector<NodeId> back = pkt.route_record;
            back.push_back(self_);
            std::reverse(back.begin(), back.end());
            install_cache_path(back, now, pkt.uid, false);
        } else if (!duplicate) {
            install_table_entry(pkt.origin, transmitter, pkt.hops + 1, now, pkt.uid, false);
        }
        answer_rreq(out, pkt, transmitter, now);
        return;
    }
    if (duplicate) return;

    // learn the reverse route toward the requester
    if (features_.store == RouteStore::RouteCache) {
        harvest_record(pkt.route_record, transmitter, now, pkt.uid);
    } else {
        install_table_entry(pkt.origin, transmitter, pkt.hops + 1, now, pkt.uid, false);
    }

    if (features_.gratuitous_rrep) {
        // only routes in active use are trustworthy enough to advertise;
        // answering out of a stale cache floods the network with replies
        // and poisons the requester with dead paths
        const RouteEntry* route = active_route(pkt.sought, now);
        // never advertise a route that runs back through the asker
        if (route && route->next_hop == transmitter) route = nullptr;
        if (route) {
            Packet rrep;
            rrep.kind = PacketKind::Rrep;
            rrep.uid = fresh_uid();
            rrep.origin = self_;
            rrep.target = pkt.origin;
            rrep.sought = pkt.sought;
            rrep.dist_to_sought = route->hops;
            rrep.hops = 0;
            rrep.ttl = ttl_cap_ + 1;
            rrep.size_bytes = params_.control_size;
            rrep.answers_uid = pkt.uid;
            rrep.gratuitous = true;
            bool usable = true;
            if (features_.source_routing) {
                rrep.route_record = pkt.route_record;
                rrep.route_record.push_back(self_);
                if (!route->path.empty()) {
                    rrep.route_record.insert(rrep.route_record.end(), route->path.begin() + 1,
                                             route->path.end());
                } else {
                    usable = false;
                }
                std::set<NodeId> uniq(rrep.route_record.begin(), rrep.route_record.end());
                if (uniq.size() != rrep.route_record.size()) usable = false;  // looped splice
            }
            if (usable) {
                out.push_back(Action::send(std::move(rrep), transmitter));
                return;  // answered from the store: the flood stops here
            }
        }
    }

    Packet fwd = pkt;
    fwd.ttl -= 1;
    if (fwd.ttl <= 0) return;
    fwd.hops += 1;
    if (features_.source_routing) fwd.route_record.push_back(self_);
    out.push_back(Action::send(std::move(fwd), kNoNode));
}

void ProtocolNode::handle_rrep(std::vector<Action>& out, const Packet& pkt, NodeId transmitter,
                               bool addressed, double now) {
    if (!addressed) {
        if (features_.promiscuous)
            harvest_record(pkt.route_record, transmitter, now, pkt.uid);
        return;
    }

    if (features_.store == RouteStore::RouteCache) {
        harvest_record(pkt.route_record, transmitter, now, pkt.uid);
    } else {
        install_table_entry(pkt.sought, transmitter, pkt.dist_to_sought + 1, now,
                            pkt.answers_uid, false);
    }

    if (self_ == pkt.target) {
        auto it = pending_.find(pkt.sought);
        if (it == pending_.end()) return;
        Pending pending = std::move(it->second);
        pending_.erase(it);
        ++timer_generation_;
        if (features_.store == RouteStore::RoutingTable) {
            if (RouteEntry* e = fresh_table_entry(pkt.sought, now)) e->self_discovered = true;
        } else {
            auto sit = store_.find(pkt.sought);
            if (sit != store_.end())
                for (auto& e : sit->second) e.self_discovered = true;
        }
        for (auto& data : pending.queued) {
            if (now - data.created_at > params_.queue_lifetime) {
                out.push_back(Action::drop(data.uid, DropReason::QueueTimeout));
                continue;
            }
            RouteEntry* route = usable_route(pkt.sought, now, false);
            if (!route) {
                out.push_back(Action::drop(data.uid, DropReason::NoRoute));
                continue;
            }
            send_data_via(out, std::move(data), *route, now);
        }
        return;
    }

    // relay toward the requester
    Packet fwd = pkt;
    fwd.hops += 1;
    fwd.dist_to_sought += 1;
    fwd.ttl -= 1;
    if (fwd.ttl <= 0) return;
    NodeId next = kNoNode;
    if (features_.source_routing && !fwd.route_record.empty()) {
        auto at = std::find(fwd.route_record.begin(), fwd.route_record.end(), self_);
        if (at != fwd.route_record.end() && at != fwd.route_record.begin())
            next = *(at - 1);
    }
    if (next == kNoNode) {
        if (const RouteEntry* back = find_route(fwd.target, now)) next = back->next_hop;
    }
    if (next == kNoNode) return;  // reverse path evaporated; the origin retries
    out.push_back(Action::send(std::move(fwd), next));
}

void ProtocolNode::send_rerr_towards(std::vector<Action>& out, NodeId flow_origin,
                                     NodeId unreachable, NodeId broken_from, NodeId broken_to,
                                     double now) {
    if (flow_origin == self_ || flow_origin == kNoNode) return;
    Packet rerr;
    rerr.kind = PacketKind::Rerr;
    rerr.uid = fresh_uid();
    rerr.origin = self_;
    rerr.target = flow_origin;
    rerr.unreachable = unreachable;
    rerr.broken_from = broken_from;
    rerr.broken_to = broken_to;
    rerr.ttl = ttl_cap_ + 1;
    rerr.size_bytes = params_.control_size;
    NodeId next = kNoNode;
    if (const RouteEntry* back = find_route(flow_origin, now)) {
        next = back->next_hop;
        if (!back->path.empty()) rerr.route_record = back->path;
    }
    if (next == kNoNode) return;  // nobody to tell
    out.push_back(Action::send(std::move(rerr), next));
}

void ProtocolNode::handle_rerr(std::vector<Action>& out, const Packet& pkt, NodeId transmitter,
                               bool addressed, double now) {
    if (!addressed) return;

    if (features_.store == RouteStore::RouteCache) {
        if (pkt.broken_from != kNoNode && pkt.broken_to != kNoNode)
            purge_cache_link(pkt.broken_from, pkt.broken_to);
    } else {
        auto it = store_.find(pkt.unreachable);
        if (it != store_.end()) {
            for (auto& e : it->second)
                if (e.valid && e.next_hop == transmitter) e.valid = false;
        }
    }

    if (self_ == pkt.target) return;  // the source re-enters discovery on next send

    Packet fwd = pkt;
    fwd.ttl -= 1;
    if (fwd.ttl <= 0) return;
    NodeId next = kNoNode;
    if (!fwd.route_record.empty()) {
        auto at = std::find(fwd.route_record.begin(), fwd.route_record.end(), self_);
        if (at != fwd.route_record.end() && at + 1 != fwd.route_record.end()) next = *(at + 1);
    }
    if (next == kNoNode) {
        if (const RouteEntry* back = find_route(fwd.target, now)) next = back->next_hop;
    }
    if (next == kNoNode) return;
    out.push_back(Action::send(std::move(fwd), next));
}

void ProtocolNode::handle_data(std::vector<Action>& out, const Packet& pkt, NodeId transmitter,
                               bool addressed, double now) {
    if (!addressed) {
        if (!features_.promiscuous) return;
        auto it = pending_acks_.find(pkt.uid);
        if (it != pending_acks_.end() && it->second.next_hop == transmitter) {
            pending_acks_.erase(it);  // passive acknowledgment: next hop forwarded
            ++timer_generation_;
        }
        harvest_record(pkt.route_record, transmitter, now, pkt.uid);
        return;
    }

    // refresh the reverse route toward the data source
    if (features_.store == RouteStore::RoutingTable && transmitter != pkt.origin) {
        install_table_entry(pkt.origin, transmitter, pkt.hops + 1, now, 0, false);
    }
    if (auto sit = store_.find(pkt.origin); sit != store_.end()) {
        for (auto& e : sit->second) {
            if (!e.valid || e.next_hop != transmitter) continue;
            e.last_used = now;
            if (features_.check_store_before_discovery)
                e.expiry = std::max(e.expiry, now + params_.route_timeout);
        }
    }

    bool duplicate = !data_seen_.insert(pkt.uid).second;
    if (self_ == pkt.target) {
        if (!duplicate) out.push_back(Action::deliver(pkt.uid));
        if (features_.ack_link_monitor) {
            Packet ack;
            ack.kind = PacketKind::Ack;
            ack.uid = fresh_uid();
            ack.origin = self_;
            ack.target = transmitter;
            ack.acked_uid = pkt.uid;
            ack.ttl = 1;
            ack.size_bytes = params_.control_size;
            out.push_back(Action::send(std::move(ack), transmitter));
        }
        return;
    }
    if (duplicate) {
        // never forward twice; re-acknowledge so a retransmitting upstream
        // stops waiting
        if (features_.ack_link_monitor) {
            Packet ack;
            ack.kind = PacketKind::Ack;
            ack.uid = fresh_uid();
            ack.origin = self_;
            ack.target = transmitter;
            ack.acked_uid = pkt.uid;
            ack.ttl = 1;
            ack.size_bytes = params_.control_size;
            out.push_back(Action::send(std::move(ack), transmitter));
        }
        return;
    }

    Packet fwd = pkt;
    fwd.ttl -= 1;
    if (fwd.ttl < 0) {
        out.push_back(Action::drop(pkt.uid, DropReason::TtlExpired));
        return;
    }
    fwd.hops += 1;

    if (features_.store == RouteStore::RouteCache) {
        // a carried source route teaches the forwarder paths both ways,
        // including the reverse route any later RERR will need
        harvest_record(fwd.route_record, transmitter, now, pkt.uid);
        auto at = std::find(fwd.route_record.begin(), fwd.route_record.end(), self_);
        if (at == fwd.route_record.end() || at + 1 == fwd.route_record.end()) {
            out.push_back(Action::drop(pkt.uid, DropReason::NoRoute));
            return;
        }
        NodeId next = *(at + 1);
        if (features_.ack_link_monitor) {
            PendingAck pa;
            pa.next_hop = next;
            pa.attempt = 0;
            pa.generation = ++timer_generation_;
            pa.pkt = fwd;
            pending_acks_[fwd.uid] = pa;
            TimerPayload t;
            t.kind = TimerKind::AckWait;
            t.data_uid = fwd.uid;
            t.generation = pa.generation;
            out.push_back(Action::arm(t, params_.ack_timeout));
        }
        out.push_back(Action::send(std::move(fwd), next));
        return;
    }

    RouteEntry* route = fresh_table_entry(pkt.target, now);
    if (!route) {
        auto pending_it = pending_.find(pkt.target);
        if (pending_it != pending_.end()) {
            // a local repair is in flight: hold the packet instead of erring
            if (static_cast<int>(pending_it->second.queued.size()) < params_.queue_limit) {
                pending_it->second.queued.push_back(std::move(fwd));
            } else {
                out.push_back(Action::drop(pkt.uid, DropReason::QueueOverflow));
            }
            return;
        }
        out.push_back(Action::drop(pkt.uid, DropReason::NoRoute));
        send_rerr_towards(out, pkt.origin, pkt.target, self_, kNoNode, now);
        return;
    }
    route->last_used = now;
    if (features_.check_store_before_discovery) route->expiry = now + params_.route_timeout;
    route->precursors.insert(pkt.origin);
    out.push_back(Action::send(std::move(fwd), route->next_hop));
}

void ProtocolNode::handle_ack(const Packet& pkt, NodeId transmitter, bool addressed,
                              double now) {
    (void)now;
    if (!addressed) return;
    auto it = pending_acks_.find(pkt.acked_uid);
    if (it != pending_acks_.end() && it->second.next_hop == transmitter) {
        pending_acks_.erase(it);
        ++timer_generation_;
    }
}

std::vector<Action> ProtocolNode::hello_tick(double now) {
    std::vector<Action> out;
    if (!features_.periodic_hello) return out;

    std::set<NodeId> monitored;
    for (const auto& [dst, entries] : store_)
        for (const auto& e : entries)
            if (entry_active(e, now)) monitored.insert(e.next_hop);

    for (NodeId nbr : monitored) {
        Packet hello;
        hello.kind = PacketKind::Hello;
        hello.uid = fresh_uid();
        hello.origin = self_;
        hello.target = nbr;
        hello.ttl = 1;
        hello.size_bytes = params_.control_size;
        out.push_back(Action::send(std::move(hello), nbr));
    }

    double silence_limit = params_.hello_loss_factor * params_.hello_interval;
    std::vector<NodeId> dead;
    for (NodeId nbr : monitored) {
        auto heard = last_heard_.find(nbr);
        double last = heard == last_heard_.end() ? 0.0 : heard->second;
        if (now - last > silence_limit) dead.push_back(nbr);
    }
    for (NodeId nbr : dead) {
        auto actions = on_link_break(nbr, now);
        out.insert(out.end(), actions.begin(), actions.end());
    }
    return out;
}

std::vector<Action> ProtocolNode::on_link_break(NodeId neighbor, double now) {
    std::vector<Action> out;
    last_heard_.erase(neighbor);

    if (features_.store == RouteStore::RouteCache) {
        purge_cache_link(self_, neighbor);
        return out;  // the ack machinery notifies the source per lost packet
    }

    for (auto& [dst, entries] : store_) {
        for (auto& e : entries) {
            if (!e.valid || e.next_hop != neighbor) continue;
            e.valid = false;
            bool carried_traffic = now - e.last_used <= params_.hello_active_window;
            bool near_destination = e.hops <= params_.repair_max_hops;
            if (features_.local_repair && carried_traffic && near_destination &&
                dst != kNoNode && !pending_.count(dst) && !e.precursors.empty()) {
                start_discovery(out, dst, now, true, e.hops, e.precursors);
            } else {
                for (NodeId origin : e.precursors)
                    send_rerr_towards(out, origin, dst, self_, neighbor, now);
            }
        }
    }
    return out;
}

}  // namespace rrlab::proto
