#include "rrlab/config.hpp"

#include <fstream>
#include <set>

namespace rrlab::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& ctx, const std::string& message) {
    throw ConfigError(ctx + ": " + message);
}

void reject_unknown_keys(const json& obj, const std::string& ctx,
                         std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(ctx, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) fail(ctx, "unknown key '" + it.key() + "'");
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(key, "wrong value type");
    }
}

template <typename T>
T get_required(const json& obj, const std::string& ctx, const char* key) {
    if (!obj.contains(key)) fail(ctx, std::string("missing required key '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ctx + "." + key, "wrong value type");
    }
}

sim::Placement placement_from_json(const json& j) {
    reject_unknown_keys(j, "scenario.placement", {"kind", "rows", "cols", "spacing", "positions"});
    sim::Placement p;
    std::string kind = get_required<std::string>(j, "scenario.placement", "kind");
    if (kind == "random") {
        p.kind = sim::PlacementKind::Random;
    } else if (kind == "grid") {
        p.kind = sim::PlacementKind::Grid;
        p.rows = get_required<int>(j, "scenario.placement", "rows");
        p.cols = get_required<int>(j, "scenario.placement", "cols");
    } else if (kind == "chain") {
        p.kind = sim::PlacementKind::Chain;
    } else if (kind == "explicit") {
        p.kind = sim::PlacementKind::Explicit;
        if (!j.contains("positions")) fail("scenario.placement", "explicit needs positions");
        for (const auto& pos : j.at("positions")) {
            if (!pos.is_array() || pos.size() != 2)
                fail("scenario.placement.positions", "each position is [x, y]");
            p.positions.push_back({pos[0].get<double>(), pos[1].get<double>()});
        }
    } else {
        fail("scenario.placement.kind", "expected random|grid|chain|explicit");
    }
    p.spacing = get_or<double>(j, "spacing", p.spacing);
    return p;
}

json placement_to_json(const sim::Placement& p) {
    json j;
    switch (p.kind) {
        case sim::PlacementKind::Random: j["kind"] = "random"; break;
        case sim::PlacementKind::Grid:
            j["kind"] = "grid";
            j["rows"] = p.rows;
            j["cols"] = p.cols;
            break;
        case sim::PlacementKind::Chain: j["kind"] = "chain"; break;
        case sim::PlacementKind::Explicit: {
            j["kind"] = "explicit";
            json positions = json::array();
            for (const auto& pos : p.positions) positions.push_back({pos.x, pos.y});
            j["positions"] = positions;
            break;
        }
    }
    j["spacing"] = p.spacing;
    return j;
}

sim::FlowSpec flows_from_json(const json& j) {
    reject_unknown_keys(j, "scenario.flows", {"random", "count", "rate", "list"});
    sim::FlowSpec f;
    f.random = get_or<bool>(j, "random", true);
    if (f.random) {
        f.count = get_or<int>(j, "count", f.count);
        f.rate_pps = get_or<double>(j, "rate", f.rate_pps);
    } else {
        if (!j.contains("list")) fail("scenario.flows", "explicit flows need a list");
        for (const auto& fj : j.at("list")) {
            reject_unknown_keys(fj, "scenario.flows.list", {"src", "dst", "rate", "start", "stop"});
            sim::Flow flow;
            flow.src = get_required<int>(fj, "scenario.flows.list", "src");
            flow.dst = get_required<int>(fj, "scenario.flows.list", "dst");
            flow.rate_pps = get_or<double>(fj, "rate", flow.rate_pps);
            flow.start = get_or<double>(fj, "start", flow.start);
            flow.stop = get_or<double>(fj, "stop", flow.stop);
            f.flows.push_back(flow);
        }
    }
    return f;
}

json flows_to_json(const sim::FlowSpec& f) {
    json j;
    j["random"] = f.random;
    if (f.random) {
        j["count"] = f.count;
        j["rate"] = f.rate_pps;
    } else {
        json list = json::array();
        for (const auto& flow : f.flows) {
            json fj;
            fj["src"] = flow.src;
            fj["dst"] = flow.dst;
            fj["rate"] = flow.rate_pps;
            fj["start"] = flow.start;
            fj["stop"] = flow.stop;
            list.push_back(fj);
        }
        j["list"] = list;
    }
    return j;
}

sim::ProtocolParams params_from_json(const json& j) {
    reject_unknown_keys(j, "scenario.protocol_params",
                        {"hello_interval", "route_timeout", "ers_ttls", "backoff_base",
                         "max_retries", "node_traversal", "ack_timeout", "ack_retries",
                         "hello_loss_factor", "hello_active_window", "control_size", "data_ttl",
                         "repair_max_hops", "repair_ttl_slack", "repair_attempts",
                         "max_cached_routes", "multipath_replies", "queue_limit",
                         "queue_lifetime"});
    sim::ProtocolParams p;
    p.hello_interval = get_or<double>(j, "hello_interval", p.hello_interval);
    p.route_timeout = get_or<double>(j, "route_timeout", p.route_timeout);
    p.ers_ttls = get_or<std::vector<int>>(j, "ers_ttls", p.ers_ttls);
    p.backoff_base = get_or<double>(j, "backoff_base", p.backoff_base);
    p.max_retries = get_or<int>(j, "max_retries", p.max_retries);
    p.node_traversal = get_or<double>(j, "node_traversal", p.node_traversal);
    p.ack_timeout = get_or<double>(j, "ack_timeout", p.ack_timeout);
    p.ack_retries = get_or<int>(j, "ack_retries", p.ack_retries);
    p.hello_loss_factor = get_or<double>(j, "hello_loss_factor", p.hello_loss_factor);
    p.hello_active_window = get_or<double>(j, "hello_active_window", p.hello_active_window);
    p.control_size = get_or<int>(j, "control_size", p.control_size);
    p.data_ttl = get_or<int>(j, "data_ttl", p.data_ttl);
    p.repair_max_hops = get_or<int>(j, "repair_max_hops", p.repair_max_hops);
    p.repair_ttl_slack = get_or<int>(j, "repair_ttl_slack", p.repair_ttl_slack);
    p.repair_attempts = get_or<int>(j, "repair_attempts", p.repair_attempts);
    p.max_cached_routes = get_or<int>(j, "max_cached_routes", p.max_cached_routes);
    p.multipath_replies = get_or<int>(j, "multipath_replies", p.multipath_replies);
    p.queue_limit = get_or<int>(j, "queue_limit", p.queue_limit);
    p.queue_lifetime = get_or<double>(j, "queue_lifetime", p.queue_lifetime);
    return p;
}

json params_to_json(const sim::ProtocolParams& p) {
    json j;
    j["hello_interval"] = p.hello_interval;
    j["route_timeout"] = p.route_timeout;
    j["ers_ttls"] = p.ers_ttls;
    j["backoff_base"] = p.backoff_base;
    j["max_retries"] = p.max_retries;
    j["node_traversal"] = p.node_traversal;
    j["ack_timeout"] = p.ack_timeout;
    j["ack_retries"] = p.ack_retries;
    j["hello_loss_factor"] = p.hello_loss_factor;
    j["hello_active_window"] = p.hello_active_window;
    j["control_size"] = p.control_size;
    j["data_ttl"] = p.data_ttl;
    j["repair_max_hops"] = p.repair_max_hops;
    j["repair_ttl_slack"] = p.repair_ttl_slack;
    j["repair_attempts"] = p.repair_attempts;
    j["max_cached_routes"] = p.max_cached_routes;
    j["multipath_replies"] = p.multipath_replies;
    j["queue_limit"] = p.queue_limit;
    j["queue_lifetime"] = p.queue_lifetime;
    return j;
}

AnalyticalParams analytic_params_from_json(const json& j) {
    reject_unknown_keys(j, "analytic.params", {"n", "H", "T", "t", "p"});
    AnalyticalParams p;
    p.nodes = get_or<double>(j, "n", p.nodes);
    p.hops = get_or<double>(j, "H", p.hops);
    p.route_life = get_or<double>(j, "T", p.route_life);
    p.hello_interval = get_or<double>(j, "t", p.hello_interval);
    p.forward_prob = get_or<double>(j, "p", p.forward_prob);
    return p;
}

CoverageIndexTable coverage_from_json(const json& j) {
    reject_unknown_keys(j, "coverage", {"c2", "c3", "c4"});
    CoverageIndexTable c;
    c.c2 = get_or<double>(j, "c2", c.c2);
    c.c3 = get_or<double>(j, "c3", c.c3);
    c.c4 = get_or<double>(j, "c4", c.c4);
    return c;
}

}  // namespace

const char* to_string(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::Analytic: return "analytic";
        case ExperimentMode::Simulate: return "simulate";
        case ExperimentMode::Sensitivity: return "sensitivity";
        case ExperimentMode::Compare: return "compare";
        case ExperimentMode::Validate: return "validate";
    }
    return "?";
}

ExperimentMode mode_from_string(const std::string& name) {
    if (name == "analytic") return ExperimentMode::Analytic;
    if (name == "simulate") return ExperimentMode::Simulate;
    if (name == "sensitivity") return ExperimentMode::Sensitivity;
    if (name == "compare") return ExperimentMode::Compare;
    if (name == "validate") return ExperimentMode::Validate;
    throw ConfigError("mode: expected analytic|simulate|sensitivity|compare|validate, got '" +
                      name + "'");
}

sim::ScenarioConfig preset_paper() {
    sim::ScenarioConfig cfg;
    cfg.node_count = 50;
    cfg.arena = {1000.0, 1000.0};
    cfg.speed = 2.0;
    cfg.bandwidth_bps = 2e6;
    cfg.data_size = 512;
    cfg.duration = 300.0;
    cfg.seed = 1;
    cfg.flows.random = true;
    cfg.flows.count = 10;
    cfg.flows.rate_pps = 4.0;
    return cfg;
}

sim::ScenarioConfig preset_ci() {
    sim::ScenarioConfig cfg = preset_paper();
    cfg.node_count = 25;
    cfg.duration = 300.0;
    return cfg;
}

sim::ScenarioConfig scenario_from_json(const json& j) {
    reject_unknown_keys(j, "scenario",
                        {"preset", "nodes", "arena", "speed", "bandwidth_bps", "data_size",
                         "duration", "seed", "protocol", "radio_range", "broadcast_jitter",
                         "mobility_step", "placement", "flows", "protocol_params", "moves"});
    sim::ScenarioConfig cfg;
    if (j.contains("preset")) {
        std::string preset = j.at("preset").get<std::string>();
        if (preset == "paper")
            cfg = preset_paper();
        else if (preset == "ci")
            cfg = preset_ci();
        else
            fail("scenario.preset", "expected paper|ci, got '" + preset + "'");
    }
    cfg.node_count = get_or<int>(j, "nodes", cfg.node_count);
    if (j.contains("arena")) {
        const auto& a = j.at("arena");
        if (!a.is_array() || a.size() != 2) fail("scenario.arena", "expected [width, height]");
        cfg.arena = {a[0].get<double>(), a[1].get<double>()};
    }
    cfg.speed = get_or<double>(j, "speed", cfg.speed);
    cfg.bandwidth_bps = get_or<double>(j, "bandwidth_bps", cfg.bandwidth_bps);
    cfg.data_size = get_or<int>(j, "data_size", cfg.data_size);
    cfg.duration = get_or<double>(j, "duration", cfg.duration);
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.protocol = get_or<std::string>(j, "protocol", cfg.protocol);
    cfg.radio_range = get_or<double>(j, "radio_range", cfg.radio_range);
    cfg.broadcast_jitter = get_or<double>(j, "broadcast_jitter", cfg.broadcast_jitter);
    cfg.mobility_step = get_or<double>(j, "mobility_step", cfg.mobility_step);
    if (j.contains("placement")) cfg.placement = placement_from_json(j.at("placement"));
    if (j.contains("flows")) cfg.flows = flows_from_json(j.at("flows"));
    if (j.contains("protocol_params")) cfg.params = params_from_json(j.at("protocol_params"));
    if (j.contains("moves")) {
        for (const auto& mj : j.at("moves")) {
            reject_unknown_keys(mj, "scenario.moves", {"time", "node", "x", "y"});
            sim::ScriptedMove mv;
            mv.time = get_required<double>(mj, "scenario.moves", "time");
            mv.node = get_required<int>(mj, "scenario.moves", "node");
            mv.x = get_required<double>(mj, "scenario.moves", "x");
            mv.y = get_required<double>(mj, "scenario.moves", "y");
            cfg.moves.push_back(mv);
        }
    }
    return cfg;
}

json scenario_to_json(const sim::ScenarioConfig& cfg) {
    json j;
    j["nodes"] = cfg.node_count;
    j["arena"] = {cfg.arena.width, cfg.arena.height};
    j["speed"] = cfg.speed;
    j["bandwidth_bps"] = cfg.bandwidth_bps;
    j["data_size"] = cfg.data_size;
    j["duration"] = cfg.duration;
    j["seed"] = cfg.seed;
    j["protocol"] = cfg.protocol;
    j["radio_range"] = cfg.radio_range;
    j["broadcast_jitter"] = cfg.broadcast_jitter;
    j["mobility_step"] = cfg.mobility_step;
    j["placement"] = placement_to_json(cfg.placement);
    j["flows"] = flows_to_json(cfg.flows);
    j["protocol_params"] = params_to_json(cfg.params);
    if (!cfg.moves.empty()) {
        json moves = json::array();
        for (const auto& mv : cfg.moves) {
            json mj;
            mj["time"] = mv.time;
            mj["node"] = mv.node;
            mj["x"] = mv.x;
            mj["y"] = mv.y;
            moves.push_back(mj);
        }
        j["moves"] = moves;
    }
    return j;
}

void Experiment::check() const {
    bool needs_seeds = mode == ExperimentMode::Simulate || mode == ExperimentMode::Compare;
    if (needs_seeds && seeds.empty()) throw ConfigError("seeds: must be non-empty for " +
                                                        std::string(to_string(mode)));
    if (!sweep.parameter.empty() && sweep.values.empty())
        throw ConfigError("sweep.values: must be non-empty when a parameter is named");
    for (double v : sweep.values)
        if (!std::isfinite(v)) throw ConfigError("sweep.values: must be finite");
    if (mode == ExperimentMode::Compare && protocols.empty())
        throw ConfigError("protocols: must be non-empty for compare");
    if (parallelism < 1) throw ConfigError("parallelism: must be >= 1");
    if (mode == ExperimentMode::Validate && validate.sides.empty())
        throw ConfigError("validate.sides: must be non-empty");
}

Experiment load_experiment_json(const json& root, std::optional<ExperimentMode> forced_mode) {
    reject_unknown_keys(root, "experiment",
                        {"name", "mode", "output", "records", "trace", "seeds", "parallelism",
                         "protocols", "sweep", "scenario", "analytic", "sensitivity",
                         "validate"});
    Experiment e;
    e.name = get_or<std::string>(root, "name", e.name);
    if (root.contains("mode")) {
        e.mode = mode_from_string(root.at("mode").get<std::string>());
        if (forced_mode && *forced_mode != e.mode)
            throw ConfigError("mode: config says '" + std::string(to_string(e.mode)) +
                              "' but the command asked for '" +
                              std::string(to_string(*forced_mode)) + "'");
    } else if (forced_mode) {
        e.mode = *forced_mode;
    } else {
        throw ConfigError("mode: missing (give it in the config or pick a subcommand)");
    }
    e.output_csv = get_or<std::string>(root, "output", e.output_csv);
    e.record_stream = get_or<std::string>(root, "records", e.record_stream);
    e.trace_path = get_or<std::string>(root, "trace", e.trace_path);
    e.seeds = get_or<std::vector<std::uint64_t>>(root, "seeds", e.seeds);
    if (e.seeds.empty()) e.seeds = {1};
    e.parallelism = get_or<int>(root, "parallelism", e.parallelism);
    e.protocols = get_or<std::vector<std::string>>(root, "protocols", e.protocols);
    if (root.contains("sweep")) {
        const auto& sj = root.at("sweep");
        reject_unknown_keys(sj, "sweep", {"parameter", "values"});
        e.sweep.parameter = get_required<std::string>(sj, "sweep", "parameter");
        e.sweep.values = get_required<std::vector<double>>(sj, "sweep", "values");
    }
    if (root.contains("scenario")) e.scenario = scenario_from_json(root.at("scenario"));
    if (root.contains("analytic")) {
        const auto& aj = root.at("analytic");
        reject_unknown_keys(aj, "analytic", {"params", "coverage", "tiers", "grid", "routes"});
        if (aj.contains("params")) e.analytic.params = analytic_params_from_json(aj.at("params"));
        if (aj.contains("coverage")) e.analytic.coverage = coverage_from_json(aj.at("coverage"));
        if (aj.contains("tiers"))
            e.analytic.tiers = aj.at("tiers").get<std::vector<double>>();
        if (aj.contains("grid")) {
            const auto& gj = aj.at("grid");
            reject_unknown_keys(gj, "analytic.grid", {"rows", "cols", "spacing", "source"});
            e.analytic.from_grid = true;
            e.analytic.grid_rows = get_required<int>(gj, "analytic.grid", "rows");
            e.analytic.grid_cols = get_required<int>(gj, "analytic.grid", "cols");
            e.analytic.grid_spacing = get_or<double>(gj, "spacing", e.analytic.grid_spacing);
            std::string source = get_or<std::string>(gj, "source", std::string("corner"));
            if (source != "corner" && source != "center")
                fail("analytic.grid.source", "expected corner|center");
            e.analytic.grid_source_corner = source == "corner";
        }
        if (aj.contains("routes")) {
            for (const auto& rj : aj.at("routes")) {
                reject_unknown_keys(rj, "analytic.routes", {"links", "T", "t"});
                RouteDescriptor r;
                r.links = get_required<int>(rj, "analytic.routes", "links");
                r.route_life = get_required<double>(rj, "analytic.routes", "T");
                r.hello_interval = get_required<double>(rj, "analytic.routes", "t");
                e.analytic.routes.push_back(r);
            }
        }
    }
    if (root.contains("sensitivity")) {
        const auto& sj = root.at("sensitivity");
        reject_unknown_keys(sj, "sensitivity", {"mode", "deltas"});
        std::string mode = get_or<std::string>(sj, "mode", std::string("exact"));
        if (mode == "exact")
            e.sensitivity.mode = SensitivityMode::Exact;
        else if (mode == "paper-literal")
            e.sensitivity.mode = SensitivityMode::PaperLiteral;
        else
            fail("sensitivity.mode", "expected exact|paper-literal");
        if (sj.contains("deltas")) {
            const auto& dj = sj.at("deltas");
            reject_unknown_keys(dj, "sensitivity.deltas", {"dn", "dH", "dT", "dt"});
            e.sensitivity.deltas.d_nodes = get_or<double>(dj, "dn", 0.0);
            e.sensitivity.deltas.d_hops = get_or<double>(dj, "dH", 0.0);
            e.sensitivity.deltas.d_route_life = get_or<double>(dj, "dT", 0.0);
            e.sensitivity.deltas.d_hello_interval = get_or<double>(dj, "dt", 0.0);
        }
    }
    if (root.contains("validate")) {
        const auto& vj = root.at("validate");
        reject_unknown_keys(vj, "validate", {"sides", "spacing", "p", "coverage", "blackout"});
        e.validate.sides = get_or<std::vector<int>>(vj, "sides", e.validate.sides);
        e.validate.spacing = get_or<double>(vj, "spacing", e.validate.spacing);
        e.validate.forward_prob = get_or<double>(vj, "p", e.validate.forward_prob);
        if (vj.contains("coverage")) e.validate.coverage = coverage_from_json(vj.at("coverage"));
        if (vj.contains("blackout")) {
            const auto& bj = vj.at("blackout");
            reject_unknown_keys(bj, "validate.blackout", {"row_lo", "row_hi", "col_lo", "col_hi"});
            BlackoutRegion region;
            region.row_lo = get_required<int>(bj, "validate.blackout", "row_lo");
            region.row_hi = get_required<int>(bj, "validate.blackout", "row_hi");
            region.col_lo = get_required<int>(bj, "validate.blackout", "col_lo");
            region.col_hi = get_required<int>(bj, "validate.blackout", "col_hi");
            e.validate.blackout = region;
        }
    }
    e.check();
    return e;
}

Experiment load_experiment_file(const std::string& path,
                                std::optional<ExperimentMode> forced_mode) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError(path + ": " + err.what());
    }
    return load_experiment_json(root, forced_mode);
}

}  // namespace rrlab::cli
