#include "rrlab/sim/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rrlab::sim {

namespace {
constexpr double kPropagationDelay = 1e-6;  // seconds, fixed
}

void ScenarioConfig::validate() const {
    if (node_count < 1) throw std::invalid_argument("node count must be >= 1");
    if (!(arena.width > 0.0) || !(arena.height > 0.0))
        throw std::invalid_argument("arena dimensions must be positive");
    if (speed < 0.0) throw std::invalid_argument("speed must be >= 0");
    if (!(bandwidth_bps > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (data_size < 1) throw std::invalid_argument("data packet size must be positive");
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (!(radio_range > 0.0)) throw std::invalid_argument("radio range must be positive");
    if (broadcast_jitter < 0.0) throw std::invalid_argument("jitter must be >= 0");
    if (!(mobility_step > 0.0)) throw std::invalid_argument("mobility step must be positive");
    if (!(params.hello_interval > 0.0) || !(params.route_timeout > 0.0) ||
        !(params.backoff_base > 0.0) || !(params.node_traversal > 0.0) ||
        !(params.ack_timeout > 0.0))
        throw std::invalid_argument("protocol timers must be positive");
    if (params.max_retries < 0 || params.ack_retries < 0 || params.repair_attempts < 1)
        throw std::invalid_argument("retry limits must be non-negative");
    if (flows.random) {
        if (flows.count < 0) throw std::invalid_argument("flow count must be >= 0");
        if (!(flows.rate_pps > 0.0)) throw std::invalid_argument("flow rate must be positive");
        if (flows.count > 0 && node_count < 2)
            throw std::invalid_argument("random flows need at least two nodes");
    } else {
        for (const auto& f : flows.flows) {
            if (f.src < 0 || f.dst < 0 || f.src == f.dst)
                throw std::invalid_argument("flow endpoints must be distinct node ids");
            if (!(f.rate_pps > 0.0)) throw std::invalid_argument("flow rate must be positive");
            if (f.start < 0.0) throw std::invalid_argument("flow start must be >= 0");
        }
    }
    if (placement.kind == PlacementKind::Grid && (placement.rows < 1 || placement.cols < 1))
        throw std::invalid_argument("grid placement needs rows and cols >= 1");
    if (placement.kind == PlacementKind::Explicit && placement.positions.empty())
        throw std::invalid_argument("explicit placement needs positions");
}

Simulator::Simulator(ScenarioConfig config, proto::ProtocolFeatureSet features,
                     std::ostream* trace)
    : config_(std::move(config)), features_(std::move(features)), trace_(trace),
      rng_(config_.seed) {
    config_.validate();
    setup_topology();
    setup_flows();

    nodes_.reserve(mobiles_.size());
    int ttl_cap = static_cast<int>(mobiles_.size());
    for (NodeId id = 0; id < static_cast<NodeId>(mobiles_.size()); ++id)
        nodes_.emplace_back(id, features_, config_.params, ttl_cap, config_.data_size,
                            &uid_counter_);
}

const proto::ProtocolNode& Simulator::protocol_node(NodeId id) const {
    return nodes_.at(static_cast<size_t>(id));
}

void Simulator::setup_topology() {
    const Placement& p = config_.placement;
    std::vector<Vec2> positions;
    switch (p.kind) {
        case PlacementKind::Random: {
            std::uniform_real_distribution<double> ux(0.0, config_.arena.width);
            std::uniform_real_distribution<double> uy(0.0, config_.arena.height);
            for (int i = 0; i < config_.node_count; ++i) {
                double x = ux(rng_);
                double y = uy(rng_);
                positions.push_back({x, y});
            }
            break;
        }
        case PlacementKind::Grid:
            for (int r = 0; r < p.rows; ++r)
                for (int c = 0; c < p.cols; ++c)
                    positions.push_back({c * p.spacing, r * p.spacing});
            break;
        case PlacementKind::Chain:
            for (int i = 0; i < config_.node_count; ++i)
                positions.push_back({i * p.spacing, 0.0});
            break;
        case PlacementKind::Explicit:
            positions = p.positions;
            break;
    }
    config_.node_count = static_cast<int>(positions.size());
    for (const Vec2& pos : positions) {
        config_.arena.width = std::max(config_.arena.width, pos.x);
        config_.arena.height = std::max(config_.arena.height, pos.y);
    }

    mobiles_.reserve(positions.size());
    for (NodeId id = 0; id < static_cast<NodeId>(positions.size()); ++id) {
        MobileNode m;
        m.id = id;
        m.pos = positions[static_cast<size_t>(id)];
        m.speed = config_.speed;
        m.radio_range = config_.radio_range;
        m.waypoint = m.pos;
        mobiles_.push_back(m);
    }
    if (config_.speed > 0.0)
        for (auto& m : mobiles_) m.waypoint = draw_waypoint(config_.arena, rng_);
}

void Simulator::setup_flows() {
    if (config_.flows.random) {
        std::uniform_int_distribution<int> pick(0, config_.node_count - 1);
        std::uniform_real_distribution<double> start(0.1, 1.1);
        for (int i = 0; i < config_.flows.count; ++i) {
            Flow f;
            f.src = pick(rng_);
            do {
                f.dst = pick(rng_);
            } while (f.dst == f.src);
            f.rate_pps = config_.flows.rate_pps;
            f.start = start(rng_);
            f.stop = -1.0;
            flows_.push_back(f);
        }
    } else {
        flows_ = config_.flows.flows;
        for (const auto& f : flows_)
            if (f.src >= config_.node_count || f.dst >= config_.node_count)
                throw std::invalid_argument("flow endpoint outside the node set");
    }
    for (auto& f : flows_)
        if (f.stop < 0.0) f.stop = config_.duration;
}

void Simulator::schedule(SimEvent ev, double now) {
    assert(ev.time >= now - 1e-12 && "an event may not precede its cause");
    if (ev.time < now) ev.time = now;
    queue_.push(std::move(ev));
}

void Simulator::transmit(NodeId sender, Packet pkt, NodeId link_dst, double now) {
    switch (pkt.kind) {
        case PacketKind::Rreq: ++report_.rreq_tx; break;
        case PacketKind::Rrep:
            ++report_.rrep_tx;
            if (pkt.gratuitous) ++report_.grat_rrep_tx;
            break;
        case PacketKind::Rerr: ++report_.rerr_tx; break;
        case PacketKind::Hello: ++report_.hello_tx; break;
        case PacketKind::Ack: ++report_.ack_tx; break;
        case PacketKind::Data: {
            ++report_.data_tx;
            auto it = data_.find(pkt.uid);
            if (it != data_.end() && sender == pkt.origin && !it->second.sent) {
                it->second.sent = true;
                ++report_.data_sent;
            }
            break;
        }
    }

    double delay = pkt.size_bytes * 8.0 / config_.bandwidth_bps + kPropagationDelay;
    bool broadcast = link_dst == kNoNode;
    if (broadcast && config_.broadcast_jitter > 0.0) {
        std::uniform_real_distribution<double> jitter(0.0, config_.broadcast_jitter);
        delay += jitter(rng_);
    }

    const Vec2 from = mobiles_[static_cast<size_t>(sender)].pos;
    bool reached_link_dst = false;
    for (NodeId id = 0; id < static_cast<NodeId>(mobiles_.size()); ++id) {
        if (id == sender) continue;
        if (distance(from, mobiles_[static_cast<size_t>(id)].pos) > config_.radio_range)
            continue;
        bool addressed = broadcast || id == link_dst;
        if (id == link_dst) reached_link_dst = true;
        if (!addressed && !features_.promiscuous) continue;
        SimEvent ev;
        ev.time = now + delay;
        ev.kind = EventKind::PacketDelivery;
        ev.packet = pkt;
        ev.receiver = id;
        ev.transmitter = sender;
        ev.addressed = addressed;
        schedule(std::move(ev), now);
    }

    // A unicast DATA launched at a vanished next hop is gone for good unless
    // the protocol's own retransmission logic owns the copy.
    if (!broadcast && !reached_link_dst && pkt.kind == PacketKind::Data &&
        !features_.ack_link_monitor) {
        auto it = data_.find(pkt.uid);
        if (it != data_.end() && it->second.state == 0) {
            it->second.state = 2;
            ++report_.data_dropped;
        }
    }

    if (trace_) {
        *trace_ << "{\"t\":" << format_double(now) << ",\"ev\":\"tx\",\"node\":" << sender
                << ",\"kind\":\"" << to_string(pkt.kind) << "\",\"uid\":" << pkt.uid
                << ",\"to\":" << link_dst << "}\n";
    }
}

void Simulator::apply_actions(NodeId node, std::vector<proto::Action> actions, double now) {
    for (auto& action : actions) {
        switch (action.type) {
            case proto::Action::Type::Send:
                transmit(node, std::move(action.pkt), action.link_dst, now);
                break;
            case proto::Action::Type::ArmTimer: {
                SimEvent ev;
                ev.time = now + action.delay;
                ev.kind = EventKind::TimerExpiry;
                ev.owner = node;
                ev.timer = action.timer;
                schedule(std::move(ev), now);
                break;
            }
            case proto::Action::Type::Deliver: {
                auto it = data_.find(action.uid);
                if (it != data_.end() && it->second.state == 0) {
                    it->second.state = 1;
                    ++report_.data_delivered;
                    report_.delivered_bytes += config_.data_size;
                    report_.latencies.push_back(now - it->second.generated_at);
                }
                break;
            }
            case proto::Action::Type::Drop: {
                auto it = data_.find(action.uid);
                if (it != data_.end() && it->second.state == 0) {
                    it->second.state = 2;
                    ++report_.data_dropped;
                }
                break;
            }
        }
    }
}

void Simulator::trace_event(const SimEvent& ev) {
    if (!trace_) return;
    const char* kind = "?";
    switch (ev.kind) {
        case EventKind::PacketDelivery: kind = "rx"; break;
        case EventKind::TimerExpiry: kind = "timer"; break;
        case EventKind::TrafficGeneration: kind = "traffic"; break;
        case EventKind::MobilityUpdate: kind = "move"; break;
    }
    *trace_ << "{\"t\":" << format_double(ev.time) << ",\"ev\":\"" << kind << "\"";
    if (ev.kind == EventKind::PacketDelivery)
        *trace_ << ",\"node\":" << ev.receiver << ",\"kind\":\"" << to_string(ev.packet.kind)
                << "\",\"uid\":" << ev.packet.uid << ",\"addressed\":" << ev.addressed;
    *trace_ << "}\n";
}

void Simulator::handle_event(const SimEvent& ev) {
    now_ = ev.time;
    trace_event(ev);
    switch (ev.kind) {
        case EventKind::PacketDelivery: {
            auto actions = nodes_[static_cast<size_t>(ev.receiver)].on_packet(
                ev.packet, ev.transmitter, ev.addressed, now_);
            apply_actions(ev.receiver, std::move(actions), now_);
            break;
        }
        case EventKind::TimerExpiry: {
            if (ev.timer.kind == TimerKind::HelloRound) {
                for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id)
                    apply_actions(id, nodes_[static_cast<size_t>(id)].hello_tick(now_), now_);
                SimEvent next = ev;
                next.time = now_ + config_.params.hello_interval;
                if (next.time <= config_.duration) schedule(std::move(next), now_);
                break;
            }
            auto actions = nodes_[static_cast<size_t>(ev.owner)].on_timer(ev.timer, now_);
            apply_actions(ev.owner, std::move(actions), now_);
            break;
        }
        case EventKind::TrafficGeneration: {
            const Flow& flow = flows_[static_cast<size_t>(ev.flow_index)];
            std::uint64_t uid = ++uid_counter_;
            data_[uid] = DataRecord{now_, false, 0};
            ++report_.data_generated;
            auto actions =
                nodes_[static_cast<size_t>(flow.src)].on_traffic(flow.dst, uid, now_);
            apply_actions(flow.src, std::move(actions), now_);
            SimEvent next = ev;
            next.time = now_ + 1.0 / flow.rate_pps;
            if (next.time <= std::min(flow.stop, config_.duration))
                schedule(std::move(next), now_);
            break;
        }
        case EventKind::MobilityUpdate: {
            if (ev.scripted_node != kNoNode) {
                MobileNode& m = mobiles_[static_cast<size_t>(ev.scripted_node)];
                m.pos = {ev.scripted_x, ev.scripted_y};
                m.waypoint = m.pos;
                break;
            }
            for (auto& m : mobiles_) m = move(m, config_.mobility_step, config_.arena, rng_);
            SimEvent next = ev;
            next.time = now_ + config_.mobility_step;
            if (next.time <= config_.duration) schedule(std::move(next), now_);
            break;
        }
    }
}

MetricsReport Simulator::run() {
    for (int i = 0; i < static_cast<int>(flows_.size()); ++i) {
        if (flows_[static_cast<size_t>(i)].start > config_.duration) continue;
        SimEvent ev;
        ev.time = flows_[static_cast<size_t>(i)].start;
        ev.kind = EventKind::TrafficGeneration;
        ev.flow_index = i;
        schedule(std::move(ev), 0.0);
    }
    if (config_.speed > 0.0) {
        SimEvent ev;
        ev.time = config_.mobility_step;
        ev.kind = EventKind::MobilityUpdate;
        schedule(std::move(ev), 0.0);
    }
    if (features_.periodic_hello) {
        SimEvent ev;
        ev.time = config_.params.hello_interval;
        ev.kind = EventKind::TimerExpiry;
        ev.owner = kNoNode;
        ev.timer.kind = TimerKind::HelloRound;
        schedule(std::move(ev), 0.0);
    }
    for (const auto& mv : config_.moves) {
        if (mv.node < 0 || mv.node >= config_.node_count)
            throw std::invalid_argument("scripted move for unknown node");
        SimEvent ev;
        ev.time = mv.time;
        ev.kind = EventKind::MobilityUpdate;
        ev.scripted_node = mv.node;
        ev.scripted_x = mv.x;
        ev.scripted_y = mv.y;
        schedule(std::move(ev), 0.0);
    }

    while (!queue_.empty() && queue_.top().time <= config_.duration) {
        SimEvent ev = queue_.pop();
        assert(ev.time >= now_ && "event order must respect causality");
        handle_event(ev);
    }

    report_.sim_duration = config_.duration;
    std::int64_t pending = 0;
    for (const auto& [uid, rec] : data_)
        if (rec.state == 0) ++pending;
    report_.in_flight = pending;
    assert(report_.data_generated ==
               report_.data_delivered + report_.data_dropped + report_.in_flight &&
           "every generated packet ends delivered, dropped, or in flight");
    return report_;
}

MetricsReport run(const ScenarioConfig& config, const proto::ProtocolFeatureSet& features,
                  std::ostream* trace) {
    Simulator sim(config, features, trace);
    return sim.run();
}

}  // namespace rrlab::sim
