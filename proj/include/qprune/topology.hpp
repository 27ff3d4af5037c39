#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace qprune {

/// Undirected coupling graph of physical qubits with precomputed all-pairs
/// shortest-path distances (edge counts, BFS at construction). Immutable
/// after construction.
class Topology {
public:
    /// Builds a topology from an explicit edge list; the graph must be
    /// connected and free of self-loops.
    Topology(std::uint32_t num_physical,
             std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

    std::uint32_t num_physical() const { return num_physical_; }
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges() const { return edges_; }
    const std::vector<std::uint32_t>& neighbors(std::uint32_t p) const { return adj_[p]; }

    /// Shortest-path distance in edges.
    std::uint32_t distance(std::uint32_t p, std::uint32_t q) const {
        return dist_[static_cast<std::size_t>(p) * num_physical_ + q];
    }

    bool adjacent(std::uint32_t p, std::uint32_t q) const { return distance(p, q) == 1; }

    std::uint32_t diameter() const;

    /// Grid shape when built by make_grid, nullopt for explicit edge lists.
    std::optional<std::pair<std::uint32_t, std::uint32_t>> grid_shape() const {
        return grid_shape_;
    }

private:
    friend Topology make_grid(std::uint32_t rows, std::uint32_t cols);

    std::uint32_t num_physical_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
    std::vector<std::vector<std::uint32_t>> adj_;
    std::vector<std::uint32_t> dist_;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> grid_shape_;
};

/// Rectangular lattice with nearest-neighbor edges; node (r, c) has index
/// r * cols + c. Requires rows, cols >= 1 and rows * cols >= 2.
Topology make_grid(std::uint32_t rows, std::uint32_t cols);

/// Number of SWAP gates needed to make p and q adjacent: distance - 1.
/// Zero for neighboring qubits; p == q is an error.
std::uint32_t swap_distance(const Topology& topology, std::uint32_t p, std::uint32_t q);

/// Canonical grid for a circuit width: the fixed shapes for widths
/// 4 -> 2x2, 6 -> 2x3, 8 -> 2x4, 10 -> 2x5, 12 -> 3x4, 14 -> 2x7; otherwise
/// the most-square exact factorization when one exists, else the smallest
/// (most-square) grid with at least n nodes. Requires n >= 2.
Topology grid_for_width(std::uint32_t n);

} // namespace qprune
