#pragma once

#include <cstdint>
#include <vector>

#include "lavgap/mesh.hpp"

namespace lavgap {

/// Budgeted deterministic enumeration of ordered node pairs.  All pairs
/// closer than local_radius_factor * h are always visited (the extremal pairs
/// of the weight-class ratios live there); the remaining budget is spent on a
/// global sweep strided by a power of two, so coarser budgets are nested
/// subsets of finer ones.
struct PairBudget {
    std::size_t max_pairs = 2000000;
    double local_radius_factor = 5.0;
};

template <class Fn>
void for_each_node_pair(const Mesh& mesh, const PairBudget& budget, Fn&& fn) {
    const std::size_t n = mesh.node_count();
    const std::uint64_t total = static_cast<std::uint64_t>(n) * n;
    if (total <= budget.max_pairs) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) fn(static_cast<int>(i), static_cast<int>(j));
        return;
    }

    // Shrink the local radius until the expected local pair count fits in
    // half the budget.
    const double area = mesh.total_volume();
    const double density = static_cast<double>(n) / area;
    double factor = budget.local_radius_factor;
    auto est = [&](double f) {
        double r = f * mesh.h;
        return static_cast<double>(n) * pi * r * r * density;
    };
    while (factor > 1.5 && est(factor) > 0.5 * static_cast<double>(budget.max_pairs))
        factor *= 0.7;
    const double rloc = factor * mesh.h;

    // Bin nodes once; scan the 3x3 neighborhood of each node's bin.
    const double bin = rloc;
    double lo_x = mesh.nodes[0].x, lo_y = mesh.nodes[0].y, hi_x = lo_x, hi_y = lo_y;
    for (const auto& p : mesh.nodes) {
        lo_x = std::min(lo_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_x = std::max(hi_x, p.x);
        hi_y = std::max(hi_y, p.y);
    }
    const int nx = std::max(1, static_cast<int>((hi_x - lo_x) / bin) + 1);
    const int ny = std::max(1, static_cast<int>((hi_y - lo_y) / bin) + 1);
    std::vector<std::vector<int>> bins(static_cast<std::size_t>(nx) * ny);
    auto bin_index = [&](const Vec2& p) {
        int bx = std::min(nx - 1, static_cast<int>((p.x - lo_x) / bin));
        int by = std::min(ny - 1, static_cast<int>((p.y - lo_y) / bin));
        return std::pair<int, int>{bx, by};
    };
    for (std::size_t i = 0; i < n; ++i) {
        auto [bx, by] = bin_index(mesh.nodes[i]);
        bins[static_cast<std::size_t>(by) * nx + bx].push_back(static_cast<int>(i));
    }

    std::uint64_t emitted = 0;
    const double r2 = rloc * rloc;
    for (std::size_t i = 0; i < n; ++i) {
        auto [bx, by] = bin_index(mesh.nodes[i]);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int cx = bx + dx, cy = by + dy;
                if (cx < 0 || cy < 0 || cx >= nx || cy >= ny) continue;
                for (int j : bins[static_cast<std::size_t>(cy) * nx + cx]) {
                    if (j == static_cast<int>(i)) continue;
                    if (norm2(mesh.nodes[i] - mesh.nodes[j]) > r2) continue;
                    fn(static_cast<int>(i), j);
                    ++emitted;
                }
            }
    }

    const std::uint64_t remaining =
        emitted < budget.max_pairs ? budget.max_pairs - emitted : 1;
    std::uint64_t stride = 1;
    while (total / stride > remaining) stride <<= 1;
    for (std::uint64_t k = 0; k < total; k += stride)
        fn(static_cast<int>(k / n), static_cast<int>(k % n));
}

/// Node pairs as point pairs, for seminorm estimation on a mesh.
inline std::vector<std::pair<Vec2, Vec2>> mesh_node_pairs(const Mesh& mesh,
                                                          const PairBudget& budget = {}) {
    std::vector<std::pair<Vec2, Vec2>> pairs;
    for_each_node_pair(mesh, budget, [&](int i, int j) {
        if (i < j) pairs.push_back({mesh.nodes[i], mesh.nodes[j]});
    });
    return pairs;
}

} // namespace lavgap
