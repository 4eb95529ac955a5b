#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lavgap/geometry.hpp"

namespace lavgap {

class geometry_error : public std::runtime_error {
public:
    explicit geometry_error(const std::string& w) : std::runtime_error(w) {}
};

class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& w) : std::runtime_error(w) {}
};

/// Planar domain star-shaped with respect to a ball B(star_center, star_radius).
/// For a disk the star ball is concentric; star_radius < radius leaves the
/// shrinking mollifier a positive support margin.
struct Domain {
    enum class Kind { Ball, StarPolygon };
    Kind kind = Kind::Ball;
    Vec2 center{0.0, 0.0};
    double radius = 1.0;
    Vec2 star_center{0.0, 0.0};
    double star_radius = 0.9;
    int dimension = 2;

    double diameter() const { return 2.0 * radius; }
};

inline Domain make_ball_domain(double radius, double star_radius_fraction = 0.9) {
    if (radius <= 0.0) throw std::invalid_argument("domain radius must be positive");
    if (star_radius_fraction <= 0.0 || star_radius_fraction > 1.0)
        throw std::invalid_argument("star radius fraction must lie in (0, 1]");
    Domain d;
    d.kind = Domain::Kind::Ball;
    d.radius = radius;
    d.star_radius = star_radius_fraction * radius;
    return d;
}

/// Quadrature rule on the reference triangle {(0,0),(1,0),(0,1)} in barycentric
/// coordinates; weights sum to the reference area 1/2.
struct QuadratureRule {
    std::vector<std::array<double, 3>> barycentric;
    std::vector<double> weights;
    int order = 1;
};

inline QuadratureRule triangle_rule(int order) {
    QuadratureRule r;
    if (order <= 1) {
        r.order = 1;
        r.barycentric = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
        r.weights = {0.5};
    } else if (order <= 2) {
        r.order = 2;
        r.barycentric = {{2.0 / 3, 1.0 / 6, 1.0 / 6},
                         {1.0 / 6, 2.0 / 3, 1.0 / 6},
                         {1.0 / 6, 1.0 / 6, 2.0 / 3}};
        r.weights = {1.0 / 6, 1.0 / 6, 1.0 / 6};
    } else {
        // 7-point degree-5 rule.
        r.order = 5;
        const double a = 0.059715871789770, b = 0.470142064105115;
        const double c = 0.797426985353087, d = 0.101286507323456;
        const double wc = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
        r.barycentric = {{1.0 / 3, 1.0 / 3, 1.0 / 3},
                         {a, b, b}, {b, a, b}, {b, b, a},
                         {c, d, d}, {d, c, d}, {d, d, c}};
        r.weights = {0.5 * wc, 0.5 * w1, 0.5 * w1, 0.5 * w1, 0.5 * w2, 0.5 * w2, 0.5 * w2};
    }
    return r;
}

/// Conforming triangulation built from concentric rings around the domain
/// center; ring k carries 6k nodes, so angular spacing stays comparable to the
/// radial spacing on every ring.
struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> cells;
    std::vector<int> boundary_nodes; // sorted node indices on the outer ring
    double h = 0.0;                  // maximum cell diameter
    Domain domain;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t cell_count() const { return cells.size(); }

    // Concentric-ring structure (set by build_disk_mesh); enables O(1)
    // analytic point location.  rings == 0 means unstructured.
    int rings = 0;
    double ring_dr = 0.0;

    bool is_boundary(int node) const {
        return std::binary_search(boundary_nodes.begin(), boundary_nodes.end(), node);
    }

    double cell_area(std::size_t c) const {
        const auto& t = cells[c];
        return 0.5 * cross(nodes[t[1]] - nodes[t[0]], nodes[t[2]] - nodes[t[0]]);
    }

    double cell_diameter(std::size_t c) const {
        const auto& t = cells[c];
        return std::max({dist(nodes[t[0]], nodes[t[1]]), dist(nodes[t[1]], nodes[t[2]]),
                         dist(nodes[t[2]], nodes[t[0]])});
    }

    Vec2 cell_centroid(std::size_t c) const {
        const auto& t = cells[c];
        return (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
    }

    Vec2 point_at(std::size_t c, const std::array<double, 3>& bary) const {
        const auto& t = cells[c];
        return nodes[t[0]] * bary[0] + nodes[t[1]] * bary[1] + nodes[t[2]] * bary[2];
    }

    double total_volume() const {
        double v = 0.0;
        for (std::size_t c = 0; c < cells.size(); ++c) v += cell_area(c);
        return v;
    }

    // --- point location ------------------------------------------------

    /// Returns the index of a cell containing p (ties broken by lowest cell
    /// index) or -1 if p lies outside the triangulation.
    int locate(const Vec2& p, std::array<double, 3>* bary = nullptr) const {
        if (rings > 0) {
            const int c = locate_structured(p, bary);
            if (c != -2) return c;
        }
        if (bins_.empty()) build_locator();
        int bx = bin_of(p.x - bbox_lo_.x);
        int by = bin_of(p.y - bbox_lo_.y);
        if (bx < 0 || by < 0 || bx >= nbins_ || by >= nbins_) return -1;
        std::array<double, 3> l{};
        for (int c : bins_[static_cast<std::size_t>(by) * nbins_ + bx]) {
            if (barycentric_in(static_cast<std::size_t>(c), p, l)) {
                if (bary) *bary = l;
                return c;
            }
        }
        return -1;
    }

    /// Analytic location in the ring structure.  Returns the cell, -1 for
    /// points clearly outside, or -2 to request the generic fallback.
    int locate_structured(const Vec2& p, std::array<double, 3>* bary) const {
        const Vec2 rel = p - domain.center;
        const double rho = norm(rel);
        if (rho > domain.radius + 1e-12) return -1;
        const double theta = polar_angle(rel);
        const int k0 = std::clamp(static_cast<int>(rho / ring_dr) + 1, 1, rings);
        std::array<double, 3> l{};
        for (int dk : {0, -1, 1}) {
            const int k = k0 + dk;
            if (k < 1 || k > rings) continue;
            // strip k holds cells [start, start + count)
            const int count = k == 1 ? 6 : 12 * k - 6;
            const int start = k == 1 ? 0 : 6 * (k - 1) * (k - 1);
            const int guess =
                static_cast<int>(theta / (2.0 * pi) * count) % count;
            for (int dj = -3; dj <= 3; ++dj) {
                const int c = start + (guess + dj + count) % count;
                if (barycentric_in(static_cast<std::size_t>(c), p, l)) {
                    if (bary) *bary = l;
                    return c;
                }
            }
        }
        return -2;
    }

    bool barycentric_in(std::size_t c, const Vec2& p, std::array<double, 3>& l) const {
        const auto& t = cells[c];
        const Vec2 a = nodes[t[0]], b = nodes[t[1]], d = nodes[t[2]];
        double det = cross(b - a, d - a);
        if (det <= 0.0) return false;
        double l1 = cross(p - a, d - a) / det;
        double l2 = cross(b - a, p - a) / det;
        double l0 = 1.0 - l1 - l2;
        const double tol = -1e-10;
        if (l0 < tol || l1 < tol || l2 < tol) return false;
        l = {l0, l1, l2};
        return true;
    }

    /// Warm-start variant: walks the neighbor graph from `hint` and falls back
    /// to the bin search.  Amortized O(1) when successive queries are close.
    int locate_from(const Vec2& p, int hint, std::array<double, 3>* bary = nullptr) const {
        if (rings > 0) return locate(p, bary); // structured path is already O(1)
        if (hint < 0 || static_cast<std::size_t>(hint) >= cells.size())
            return locate(p, bary);
        if (neighbors_.empty()) build_neighbors();
        int c = hint;
        std::array<double, 3> l{};
        for (int step = 0; step < 256; ++step) {
            const auto& t = cells[static_cast<std::size_t>(c)];
            const Vec2 a = nodes[t[0]], b = nodes[t[1]], d = nodes[t[2]];
            const double det = cross(b - a, d - a);
            const double l1 = cross(p - a, d - a) / det;
            const double l2 = cross(b - a, p - a) / det;
            const double l0 = 1.0 - l1 - l2;
            if (l0 >= -1e-10 && l1 >= -1e-10 && l2 >= -1e-10) {
                if (bary) *bary = {l0, l1, l2};
                return c;
            }
            // cross the edge opposite the most negative coordinate
            int worst = l0 < l1 ? (l0 < l2 ? 0 : 2) : (l1 < l2 ? 1 : 2);
            const int next = neighbors_[static_cast<std::size_t>(c)][worst];
            if (next < 0) return locate(p, bary);
            c = next;
        }
        return locate(p, bary);
    }

    void build_neighbors() const {
        neighbors_.assign(cells.size(), {-1, -1, -1});
        // edge key -> (cell, local edge); local edge e is opposite vertex e
        std::vector<std::pair<std::uint64_t, std::pair<int, int>>> edges;
        edges.reserve(cells.size() * 3);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& t = cells[c];
            for (int e = 0; e < 3; ++e) {
                const int u = t[(e + 1) % 3], v = t[(e + 2) % 3];
                const std::uint64_t key =
                    (static_cast<std::uint64_t>(std::min(u, v)) << 32) |
                    static_cast<std::uint64_t>(std::max(u, v));
                edges.push_back({key, {static_cast<int>(c), e}});
            }
        }
        std::sort(edges.begin(), edges.end());
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            if (edges[i].first != edges[i + 1].first) continue;
            const auto [c1, e1] = edges[i].second;
            const auto [c2, e2] = edges[i + 1].second;
            neighbors_[static_cast<std::size_t>(c1)][e1] = c2;
            neighbors_[static_cast<std::size_t>(c2)][e2] = c1;
        }
    }

    void build_locator() const {
        bbox_lo_ = nodes.front();
        Vec2 hi = nodes.front();
        for (const auto& p : nodes) {
            bbox_lo_.x = std::min(bbox_lo_.x, p.x);
            bbox_lo_.y = std::min(bbox_lo_.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
        double ext = std::max(hi.x - bbox_lo_.x, hi.y - bbox_lo_.y);
        nbins_ = std::max(1, static_cast<int>(std::floor(ext / std::max(h, 1e-12))));
        bin_w_ = ext / nbins_ * (1.0 + 1e-12);
        bins_.assign(static_cast<std::size_t>(nbins_) * nbins_, {});
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& t = cells[c];
            double x0 = std::min({nodes[t[0]].x, nodes[t[1]].x, nodes[t[2]].x});
            double x1 = std::max({nodes[t[0]].x, nodes[t[1]].x, nodes[t[2]].x});
            double y0 = std::min({nodes[t[0]].y, nodes[t[1]].y, nodes[t[2]].y});
            double y1 = std::max({nodes[t[0]].y, nodes[t[1]].y, nodes[t[2]].y});
            for (int by = bin_of(y0 - bbox_lo_.y); by <= bin_of(y1 - bbox_lo_.y); ++by)
                for (int bx = bin_of(x0 - bbox_lo_.x); bx <= bin_of(x1 - bbox_lo_.x); ++bx)
                    if (bx >= 0 && by >= 0 && bx < nbins_ && by < nbins_)
                        bins_[static_cast<std::size_t>(by) * nbins_ + bx].push_back(
                            static_cast<int>(c));
        }
    }

private:
    int bin_of(double offset) const {
        return static_cast<int>(std::floor(offset / bin_w_));
    }

    mutable std::vector<std::vector<int>> bins_;
    mutable std::vector<std::array<int, 3>> neighbors_;
    mutable Vec2 bbox_lo_;
    mutable double bin_w_ = 1.0;
    mutable int nbins_ = 0;
};

/// Triangulates the disk B(0, radius) with ring spacing close to `h`.
inline Mesh build_disk_mesh(double radius, double h, std::size_t node_budget = 4000000) {
    if (radius <= 0.0) throw std::invalid_argument("build_disk_mesh: radius must be positive");
    if (h <= 0.0 || h >= radius)
        throw std::invalid_argument("build_disk_mesh: need 0 < h < radius");
    const int rings = std::max(1, static_cast<int>(std::lround(radius / h)));
    const std::size_t n_nodes = 1 + 3ull * rings * (rings + 1);
    if (n_nodes > node_budget)
        throw resource_error("build_disk_mesh: " + std::to_string(n_nodes) +
                             " nodes exceed the budget of " + std::to_string(node_budget));

    Mesh mesh;
    mesh.domain = make_ball_domain(radius);
    mesh.rings = rings;
    mesh.ring_dr = radius / rings;
    mesh.nodes.reserve(n_nodes);
    mesh.nodes.push_back({0.0, 0.0});
    std::vector<int> ring_start{0};
    for (int k = 1; k <= rings; ++k) {
        ring_start.push_back(static_cast<int>(mesh.nodes.size()));
        const int nk = 6 * k;
        const double rk = radius * k / rings;
        for (int j = 0; j < nk; ++j) {
            double t = 2.0 * pi * j / nk;
            mesh.nodes.push_back({rk * std::cos(t), rk * std::sin(t)});
        }
    }

    // Center fan.
    for (int j = 0; j < 6; ++j)
        mesh.cells.push_back({0, ring_start[1] + j, ring_start[1] + (j + 1) % 6});

    // Strips between consecutive rings, marching by angle.
    for (int k = 2; k <= rings; ++k) {
        const int m = 6 * (k - 1), n = 6 * k;
        const int in0 = ring_start[k - 1], out0 = ring_start[k];
        int i = 0, j = 0;
        while (i < m || j < n) {
            double a_next = (i + 1) * 2.0 * pi / m;
            double b_next = (j + 1) * 2.0 * pi / n;
            if (j < n && (i == m || b_next <= a_next + 1e-14)) {
                mesh.cells.push_back({out0 + j % n, out0 + (j + 1) % n, in0 + i % m});
                ++j;
            } else {
                mesh.cells.push_back({in0 + i % m, out0 + j % n, in0 + (i + 1) % m});
                ++i;
            }
        }
    }

    for (int j = 0; j < 6 * rings; ++j) mesh.boundary_nodes.push_back(ring_start[rings] + j);
    std::sort(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end());

    double hmax = 0.0;
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        if (mesh.cell_area(c) <= 0.0)
            throw geometry_error("build_disk_mesh produced a degenerate cell");
        hmax = std::max(hmax, mesh.cell_diameter(c));
    }
    mesh.h = hmax;
    return mesh;
}

// --- JSON export/import ------------------------------------------------

inline nlohmann::ordered_json mesh_to_json(const Mesh& mesh) {
    nlohmann::ordered_json j;
    j["radius"] = mesh.domain.radius;
    j["star_radius"] = mesh.domain.star_radius;
    j["h"] = mesh.h;
    j["rings"] = mesh.rings;
    auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& p : mesh.nodes) nodes.push_back({p.x, p.y});
    auto& cells = j["cells"] = nlohmann::ordered_json::array();
    for (const auto& t : mesh.cells) cells.push_back({t[0], t[1], t[2]});
    j["boundary"] = mesh.boundary_nodes;
    return j;
}

inline Mesh mesh_from_json(const nlohmann::json& j) {
    Mesh mesh;
    mesh.domain = make_ball_domain(j.at("radius").get<double>());
    if (j.contains("star_radius"))
        mesh.domain.star_radius = j.at("star_radius").get<double>();
    if (j.contains("rings")) {
        mesh.rings = j.at("rings").get<int>();
        if (mesh.rings > 0) mesh.ring_dr = mesh.domain.radius / mesh.rings;
    }
    for (const auto& p : j.at("nodes"))
        mesh.nodes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto& t : j.at("cells"))
        mesh.cells.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    mesh.boundary_nodes = j.at("boundary").get<std::vector<int>>();
    std::sort(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end());
    double hmax = 0.0;
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        if (mesh.cell_area(c) <= 0.0) throw geometry_error("mesh_from_json: degenerate cell");
        hmax = std::max(hmax, mesh.cell_diameter(c));
    }
    mesh.h = j.contains("h") ? j.at("h").get<double>() : hmax;
    mesh.h = hmax;
    return mesh;
}

} // namespace lavgap
