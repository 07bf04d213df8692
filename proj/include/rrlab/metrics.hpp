#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rrlab {

/// Per-run counters plus the derived study metrics. Transmission counters
/// count emissions (every forward and retransmission), data_* counters count
/// unique data packets.
struct MetricsReport {
    std::int64_t rreq_tx = 0;
    std::int64_t rrep_tx = 0;
    std::int64_t grat_rrep_tx = 0;  // subset of rrep_tx originated from stores
    std::int64_t rerr_tx = 0;
    std::int64_t hello_tx = 0;
    std::int64_t ack_tx = 0;
    std::int64_t data_tx = 0;

    std::int64_t data_generated = 0;
    std::int64_t data_sent = 0;       // unique packets that left their source
    std::int64_t data_delivered = 0;
    std::int64_t data_dropped = 0;
    std::int64_t in_flight = 0;       // queued or airborne when the run ended
    std::int64_t delivered_bytes = 0;

    std::vector<double> latencies;  // one entry per delivered packet, delivery order
    double sim_duration = 0.0;
};

/// RREQ + RREP + RERR + HELLO + ACK emissions.
std::int64_t routing_tx_total(const MetricsReport& report);

/// Delivered bytes per second. Throws std::invalid_argument for a
/// non-positive duration.
double throughput_bytes_per_s(const MetricsReport& report);

struct DelayPair {
    std::optional<double> conventional;  // mean per-packet latency
    std::optional<double> paper;         // transmitted * RTT / received,
                                         // RTT = 2 * conventional mean
};
DelayPair e2e_delay(const MetricsReport& report);

struct RoutingLoadPair {
    std::optional<double> conventional;  // routing emissions per delivered packet
    double paper = 0.0;                  // (routing + data emissions) - data sent
};
RoutingLoadPair routing_load(const MetricsReport& report);

double delivery_ratio(const MetricsReport& report);

/// Stable textual form used for byte-identical CSV rows: fixed field order,
/// shortest round-trip float formatting, "nan" for undefined metrics.
std::string metrics_csv_fields(const MetricsReport& report);
std::string metrics_csv_header();

/// Round-trip-safe double formatting shared by every CSV writer.
std::string format_double(double v);

}  // namespace rrlab
