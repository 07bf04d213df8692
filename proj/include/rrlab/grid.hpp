#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace rrlab {

using NodeId = int32_t;

/// Inclusive rectangular region of grid cells to disable (power failure,
/// radio jamming). Rows/cols are zero-based.
struct BlackoutRegion {
    int row_lo = 0;
    int row_hi = 0;
    int col_lo = 0;
    int col_hi = 0;
};

/// Result of one brute-force RREQ flood.
struct FloodTrace {
    std::int64_t transmissions = 0;          // total broadcast emissions
    std::vector<NodeId> reached;             // sorted, includes the source
    std::vector<std::pair<int, std::int64_t>> per_tier;  // (hop tier, emissions by that tier)
};

/// Regular lattice of nodes with 4-connectivity between alive cells.
/// Node ids are row-major (id = row*cols + col) and stable: killing a cell
/// never renumbers the others. Immutable after construction; apply_blackout
/// returns a new value.
class GridNetwork {
public:
    GridNetwork(int rows, int cols, double spacing);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double spacing() const { return spacing_; }

    /// Number of alive cells.
    int node_count() const { return alive_count_; }

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < rows_ && col >= 0 && col < cols_;
    }
    NodeId id_at(int row, int col) const { return static_cast<NodeId>(row) * cols_ + col; }
    std::pair<int, int> cell_of(NodeId id) const { return {id / cols_, id % cols_}; }

    bool alive(NodeId id) const;
    /// Alive 4-neighbors in row-major scan order (up, left, right, down).
    std::vector<NodeId> neighbors(NodeId id) const;
    /// All alive node ids, ascending.
    std::vector<NodeId> alive_nodes() const;

    /// Breadth-first hop tiers from src over alive cells. tier[id] = -1 for
    /// unreachable or dead cells; parent[id] = first-discovered predecessor
    /// (-1 for src and unreachable). Deterministic: neighbors scanned in the
    /// fixed order above.
    void bfs(NodeId src, std::vector<int>& tier, std::vector<NodeId>& parent) const;

    NodeId corner_nw() const { return id_at(0, 0); }
    NodeId corner_se() const { return id_at(rows_ - 1, cols_ - 1); }

private:
    friend GridNetwork apply_blackout(const GridNetwork&, const BlackoutRegion&);

    int rows_;
    int cols_;
    double spacing_;
    int alive_count_;
    std::vector<char> alive_;
};

/// All cells alive. Throws std::invalid_argument on zero dimensions or
/// non-positive spacing.
GridNetwork build_grid(int rows, int cols, double spacing);

/// Returns a copy with the region's cells dead. Idempotent. Throws
/// std::invalid_argument if the region is malformed or out of bounds.
GridNetwork apply_blackout(const GridNetwork& g, const BlackoutRegion& r);

/// Shortest-path hop count over alive cells, or nullopt when no path exists.
/// Throws std::invalid_argument if either endpoint is dead.
std::optional<int> hop_count(const GridNetwork& g, NodeId src, NodeId dst);

/// Mean effective forward neighbor count over the alive nodes at BFS tier j
/// from src: each node's alive-neighbor count minus the one neighbor it was
/// reached from. nullopt when the tier is empty (beyond the eccentricity).
/// Throws std::invalid_argument if src is dead or j < 1.
std::optional<double> expected_neighbors_at_tier(const GridNetwork& g, NodeId src, int tier);

inline constexpr int kUnlimitedTtl = -1;

/// Blind flood with duplicate suppression. The source always emits once.
/// A node at BFS tier d that receives the packet for the first time re-emits
/// iff d <= ttl (always, when ttl is kUnlimitedTtl) and it is not dst.
/// reached = every node that hears at least one emission, source included.
FloodTrace flood_oracle(const GridNetwork& g, NodeId src, int ttl,
                        std::optional<NodeId> dst = std::nullopt);

}  // namespace rrlab
