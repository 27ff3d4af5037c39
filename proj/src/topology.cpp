#include "qprune/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qprune {

namespace {
constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();
}

Topology::Topology(std::uint32_t num_physical,
                   std::vector<std::pair<std::uint32_t, std::uint32_t>> edges)
    : num_physical_(num_physical), edges_(std::move(edges)) {
    if (num_physical_ < 2) {
        throw std::invalid_argument("Topology: need at least two physical qubits");
    }
    adj_.resize(num_physical_);
    for (auto& [a, b] : edges_) {
        if (a == b) {
            throw std::invalid_argument("Topology: self-loop edge");
        }
        if (a >= num_physical_ || b >= num_physical_) {
            throw std::invalid_argument("Topology: edge endpoint out of range");
        }
        if (a > b) {
            std::swap(a, b);
        }
        adj_[a].push_back(b);
        adj_[b].push_back(a);
    }
    for (auto& nbrs : adj_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }

    // all-pairs distances by BFS from every node
    dist_.assign(static_cast<std::size_t>(num_physical_) * num_physical_, kUnreached);
    std::vector<std::uint32_t> frontier;
    for (std::uint32_t s = 0; s < num_physical_; ++s) {
        auto* row = &dist_[static_cast<std::size_t>(s) * num_physical_];
        row[s] = 0;
        frontier.assign(1, s);
        std::uint32_t level = 0;
        while (!frontier.empty()) {
            std::vector<std::uint32_t> next;
            ++level;
            for (std::uint32_t v : frontier) {
                for (std::uint32_t w : adj_[v]) {
                    if (row[w] == kUnreached) {
                        row[w] = level;
                        next.push_back(w);
                    }
                }
            }
            frontier = std::move(next);
        }
        for (std::uint32_t v = 0; v < num_physical_; ++v) {
            if (row[v] == kUnreached) {
                throw std::invalid_argument("Topology: coupling graph is not connected");
            }
        }
    }
}

std::uint32_t Topology::diameter() const {
    return *std::max_element(dist_.begin(), dist_.end());
}

Topology make_grid(std::uint32_t rows, std::uint32_t cols) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("make_grid: dimensions must be positive");
    }
    if (static_cast<std::uint64_t>(rows) * cols < 2) {
        throw std::invalid_argument("make_grid: need at least two nodes");
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(static_cast<std::size_t>(rows) * (cols - 1) +
                  static_cast<std::size_t>(cols) * (rows - 1));
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            const std::uint32_t id = r * cols + c;
            if (c + 1 < cols) {
                edges.emplace_back(id, id + 1);
            }
            if (r + 1 < rows) {
                edges.emplace_back(id, id + cols);
            }
        }
    }
    Topology t(rows * cols, std::move(edges));
    t.grid_shape_ = {rows, cols};
    return t;
}

std::uint32_t swap_distance(const Topology& topology, std::uint32_t p, std::uint32_t q) {
    if (p == q) {
        throw std::invalid_argument("swap_distance: identical qubits");
    }
    if (p >= topology.num_physical() || q >= topology.num_physical()) {
        throw std::invalid_argument("swap_distance: index out of range");
    }
    return topology.distance(p, q) - 1;
}

Topology grid_for_width(std::uint32_t n) {
    if (n < 2) {
        throw std::invalid_argument("grid_for_width: need at least two qubits");
    }
    // canonical shapes for the benchmark widths
    switch (n) {
    case 4:
        return make_grid(2, 2);
    case 6:
        return make_grid(2, 3);
    case 8:
        return make_grid(2, 4);
    case 10:
        return make_grid(2, 5);
    case 12:
        return make_grid(3, 4);
    case 14:
        return make_grid(2, 7);
    default:
        break;
    }
    // most-square exact factorization r <= c, preferring the largest r
    for (std::uint32_t r = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(n))); r >= 1;
         --r) {
        if (n % r == 0) {
            if (r == 1 && n > 3) {
                break; // a 1xN line for composite-free n is handled below
            }
            return make_grid(r, n / r);
        }
    }
    // smallest proper (r >= 2) grid with >= n nodes, most-square tie-break
    std::uint32_t best_r = 2;
    std::uint32_t best_c = (n + 1) / 2;
    std::uint64_t best_nodes = std::numeric_limits<std::uint64_t>::max();
    for (std::uint32_t r = 2; r <= n; ++r) {
        const std::uint32_t c = (n + r - 1) / r;
        if (c < r) {
            break;
        }
        const std::uint64_t nodes = static_cast<std::uint64_t>(r) * c;
        if (nodes < best_nodes || (nodes == best_nodes && r > best_r)) {
            best_nodes = nodes;
            best_r = r;
            best_c = c;
        }
    }
    return make_grid(best_r, best_c);
}

} // namespace qprune
