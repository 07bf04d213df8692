#include "rrlab/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rrlab {

std::int64_t routing_tx_total(const MetricsReport& r) {
    return r.rreq_tx + r.rrep_tx + r.rerr_tx + r.hello_tx + r.ack_tx;
}

double throughput_bytes_per_s(const MetricsReport& r) {
    if (!(r.sim_duration > 0.0))
        throw std::invalid_argument("throughput needs a positive simulation duration");
    return static_cast<double>(r.delivered_bytes) / r.sim_duration;
}

DelayPair e2e_delay(const MetricsReport& r) {
    DelayPair out;
    if (r.data_delivered <= 0 || r.latencies.empty()) return out;
    double sum = 0.0;
    for (double v : r.latencies) sum += v;
    double mean = sum / static_cast<double>(r.latencies.size());
    out.conventional = mean;
    double rtt = 2.0 * mean;
    out.paper = static_cast<double>(r.data_sent) * rtt / static_cast<double>(r.data_delivered);
    return out;
}

RoutingLoadPair routing_load(const MetricsReport& r) {
    RoutingLoadPair out;
    std::int64_t routing = routing_tx_total(r);
    out.paper = static_cast<double>(routing + r.data_tx - r.data_sent);
    if (r.data_delivered > 0)
        out.conventional = static_cast<double>(routing) / static_cast<double>(r.data_delivered);
    return out;
}

double delivery_ratio(const MetricsReport& r) {
    if (r.data_generated <= 0) return 0.0;
    return static_cast<double>(r.data_delivered) / static_cast<double>(r.data_generated);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string metrics_csv_header() {
    return "rreq_tx,rrep_tx,grat_rrep_tx,rerr_tx,hello_tx,ack_tx,data_tx,"
           "data_generated,data_sent,data_delivered,data_dropped,in_flight,"
           "delivered_bytes,throughput_Bps,delay_mean_s,delay_paper_s,"
           "nrl,routing_load_paper,delivery_ratio";
}

std::string metrics_csv_fields(const MetricsReport& r) {
    DelayPair delay = e2e_delay(r);
    RoutingLoadPair load = routing_load(r);
    double nan = std::nan("");
    std::string out;
    auto add_int = [&](std::int64_t v) {
        out += std::to_string(v);
        out += ',';
    };
    add_int(r.rreq_tx);
    add_int(r.rrep_tx);
    add_int(r.grat_rrep_tx);
    add_int(r.rerr_tx);
    add_int(r.hello_tx);
    add_int(r.ack_tx);
    add_int(r.data_tx);
    add_int(r.data_generated);
    add_int(r.data_sent);
    add_int(r.data_delivered);
    add_int(r.data_dropped);
    add_int(r.in_flight);
    add_int(r.delivered_bytes);
    out += format_double(r.sim_duration > 0.0 ? throughput_bytes_per_s(r) : nan);
    out += ',';
    out += format_double(delay.conventional.value_or(nan));
    out += ',';
    out += format_double(delay.paper.value_or(nan));
    out += ',';
    out += format_double(load.conventional.value_or(nan));
    out += ',';
    out += format_double(load.paper);
    out += ',';
    out += format_double(delivery_ratio(r));
    return out;
}

}  // namespace rrlab
