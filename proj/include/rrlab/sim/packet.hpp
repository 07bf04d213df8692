#pragma once

#include <cstdint>
#include <vector>

#include "rrlab/grid.hpp"  // NodeId

namespace rrlab::sim {

inline constexpr NodeId kNoNode = -1;

enum class PacketKind { Rreq, Rrep, Rerr, Hello, Ack, Data };

inline const char* to_string(PacketKind kind) {
    switch (kind) {
        case PacketKind::Rreq: return "RREQ";
        case PacketKind::Rrep: return "RREP";
        case PacketKind::Rerr: return "RERR";
        case PacketKind::Hello: return "HELLO";
        case PacketKind::Ack: return "ACK";
        case PacketKind::Data: return "DATA";
    }
    return "?";
}

/// One simulated packet. uid is globally unique per run; together with
/// `origin` it is the RREQ duplicate-suppression key and the identity a DATA
/// packet keeps across hops and retransmissions.
struct Packet {
    PacketKind kind = PacketKind::Data;
    std::uint64_t uid = 0;
    NodeId origin = kNoNode;   // creator of the packet
    NodeId target = kNoNode;   // logical final destination
    int ttl = 0;
    int size_bytes = 0;
    int hops = 0;              // hops traveled from origin to the transmitter
    double created_at = 0.0;   // DATA: generation time (queue aging)

    // RREQ: destination being sought. RREP: destination being advertised.
    NodeId sought = kNoNode;
    // RREP: hop distance from the current transmitter to `sought`.
    int dist_to_sought = 0;
    // RREP: uid of the RREQ being answered (freshness ordering).
    std::uint64_t answers_uid = 0;
    // RREP originated by an intermediate node out of its stored route.
    bool gratuitous = false;

    // RERR payload: the failed directed link and the now-unreachable
    // destination the receiver should invalidate.
    NodeId broken_from = kNoNode;
    NodeId broken_to = kNoNode;
    NodeId unreachable = kNoNode;

    // ACK payload: the DATA uid being acknowledged.
    std::uint64_t acked_uid = 0;

    // Source-routing protocols accumulate the traversed path in RREQ/RREP
    // and carry the full path in DATA; empty otherwise.
    std::vector<NodeId> route_record;
};

}  // namespace rrlab::sim
