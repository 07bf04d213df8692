#include "rrlab/grid.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace rrlab {

GridNetwork::GridNetwork(int rows, int cols, double spacing)
    : rows_(rows), cols_(cols), spacing_(spacing) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("grid dimensions must be >= 1");
    if (!(spacing > 0.0))
        throw std::invalid_argument("grid spacing must be > 0");
    alive_.assign(static_cast<size_t>(rows) * cols, 1);
    alive_count_ = rows * cols;
}

bool GridNetwork::alive(NodeId id) const {
    if (id < 0 || id >= static_cast<NodeId>(alive_.size())) return false;
    return alive_[static_cast<size_t>(id)] != 0;
}

std::vector<NodeId> GridNetwork::neighbors(NodeId id) const {
    std::vector<NodeId> out;
    auto [r, c] = cell_of(id);
    const int dr[4] = {-1, 0, 0, 1};
    const int dc[4] = {0, -1, 1, 0};
    for (int k = 0; k < 4; ++k) {
        int nr = r + dr[k], nc = c + dc[k];
        if (in_bounds(nr, nc) && alive(id_at(nr, nc))) out.push_back(id_at(nr, nc));
    }
    return out;
}

std::vector<NodeId> GridNetwork::alive_nodes() const {
    std::vector<NodeId> out;
    out.reserve(alive_count_);
    for (NodeId id = 0; id < static_cast<NodeId>(alive_.size()); ++id)
        if (alive_[static_cast<size_t>(id)]) out.push_back(id);
    return out;
}

void GridNetwork::bfs(NodeId src, std::vector<int>& tier, std::vector<NodeId>& parent) const {
    tier.assign(alive_.size(), -1);
    parent.assign(alive_.size(), -1);
    if (!alive(src)) return;
    std::deque<NodeId> queue{src};
    tier[static_cast<size_t>(src)] = 0;
    while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        for (NodeId v : neighbors(u)) {
            if (tier[static_cast<size_t>(v)] < 0) {
                tier[static_cast<size_t>(v)] = tier[static_cast<size_t>(u)] + 1;
                parent[static_cast<size_t>(v)] = u;
                queue.push_back(v);
            }
        }
    }
}

GridNetwork build_grid(int rows, int cols, double spacing) {
    return GridNetwork(rows, cols, spacing);
}

GridNetwork apply_blackout(const GridNetwork& g, const BlackoutRegion& r) {
    if (r.row_lo > r.row_hi || r.col_lo > r.col_hi)
        throw std::invalid_argument("blackout region is empty");
    if (!g.in_bounds(r.row_lo, r.col_lo) || !g.in_bounds(r.row_hi, r.col_hi))
        throw std::invalid_argument("blackout region out of grid bounds");
    GridNetwork out = g;
    for (int row = r.row_lo; row <= r.row_hi; ++row) {
        for (int col = r.col_lo; col <= r.col_hi; ++col) {
            size_t idx = static_cast<size_t>(out.id_at(row, col));
            if (out.alive_[idx]) {
                out.alive_[idx] = 0;
                --out.alive_count_;
            }
        }
    }
    return out;
}

std::optional<int> hop_count(const GridNetwork& g, NodeId src, NodeId dst) {
    if (!g.alive(src) || !g.alive(dst))
        throw std::invalid_argument("hop_count endpoints must be alive");
    std::vector<int> tier;
    std::vector<NodeId> parent;
    g.bfs(src, tier, parent);
    int d = tier[static_cast<size_t>(dst)];
    if (d < 0) return std::nullopt;
    return d;
}

std::optional<double> expected_neighbors_at_tier(const GridNetwork& g, NodeId src, int tier_idx) {
    if (!g.alive(src)) throw std::invalid_argument("tier source must be alive");
    if (tier_idx < 1) throw std::invalid_argument("tier index must be >= 1");
    std::vector<int> tier;
    std::vector<NodeId> parent;
    g.bfs(src, tier, parent);
    double sum = 0.0;
    int count = 0;
    for (NodeId id = 0; id < static_cast<NodeId>(tier.size()); ++id) {
        if (tier[static_cast<size_t>(id)] != tier_idx) continue;
        int degree = static_cast<int>(g.neighbors(id).size());
        sum += degree - 1;  // exclude the upstream node the packet arrived from
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

FloodTrace flood_oracle(const GridNetwork& g, NodeId src, int ttl, std::optional<NodeId> dst) {
    if (!g.alive(src)) throw std::invalid_argument("flood source must be alive");

    FloodTrace trace;
    std::vector<char> heard(static_cast<size_t>(g.rows()) * g.cols(), 0);
    heard[static_cast<size_t>(src)] = 1;

    // Tier-synchronous flood: emitters at tier d broadcast; a node hearing
    // the packet for the first time lands at tier d+1 and re-emits iff
    // d+1 <= ttl and it is not the destination. The source always emits.
    std::vector<NodeId> frontier{src};
    int d = 0;
    while (!frontier.empty()) {
        trace.transmissions += static_cast<std::int64_t>(frontier.size());
        trace.per_tier.emplace_back(d, static_cast<std::int64_t>(frontier.size()));
        std::vector<NodeId> next;
        for (NodeId u : frontier) {
            for (NodeId nb : g.neighbors(u)) {
                if (heard[static_cast<size_t>(nb)]) continue;
                heard[static_cast<size_t>(nb)] = 1;
                bool reemits = (ttl == kUnlimitedTtl || d + 1 <= ttl) && (!dst || *dst != nb);
                if (reemits) next.push_back(nb);
            }
        }
        std::sort(next.begin(), next.end());
        frontier = std::move(next);
        ++d;
    }
    for (NodeId id = 0; id < static_cast<NodeId>(heard.size()); ++id)
        if (heard[static_cast<size_t>(id)]) trace.reached.push_back(id);
    return trace;
}

}  // namespace rrlab
