#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lavgap/mesh.hpp"
#include "lavgap/summation.hpp"

namespace lavgap {

class evaluation_error : public std::runtime_error {
public:
    explicit evaluation_error(const std::string& w) : std::runtime_error(w) {}
};

/// Piecewise-linear scalar field on mesh nodes.  The interpolant is extended
/// by zero outside the triangulation, matching the zero-extension of W_0
/// fields used throughout.
struct GridFunction {
    const Mesh* mesh = nullptr;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Mesh& m, double fill = 0.0)
        : mesh(&m), values(m.node_count(), fill) {}

    static GridFunction sample(const Mesh& m, const std::function<double(Vec2)>& f) {
        GridFunction u(m);
        for (std::size_t i = 0; i < m.node_count(); ++i) u.values[i] = f(m.nodes[i]);
        return u;
    }

    double eval_extended(const Vec2& p) const {
        std::array<double, 3> l{};
        int c = mesh->locate(p, &l);
        if (c < 0) return 0.0;
        const auto& t = mesh->cells[static_cast<std::size_t>(c)];
        return l[0] * values[t[0]] + l[1] * values[t[1]] + l[2] * values[t[2]];
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Exact gradient of the piecewise-linear reconstruction, constant per cell.
inline std::vector<Vec2> gradient(const GridFunction& u) {
    const Mesh& mesh = *u.mesh;
    std::vector<Vec2> g(mesh.cell_count());
    for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
        const auto& t = mesh.cells[c];
        const Vec2 e1 = mesh.nodes[t[1]] - mesh.nodes[t[0]];
        const Vec2 e2 = mesh.nodes[t[2]] - mesh.nodes[t[0]];
        const double det = cross(e1, e2);
        if (std::abs(det) < 1e-14 * mesh.h * mesh.h)
            throw geometry_error("gradient: degenerate cell " + std::to_string(c));
        const double d1 = u.values[t[1]] - u.values[t[0]];
        const double d2 = u.values[t[2]] - u.values[t[0]];
        g[c] = {(d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det};
    }
    return g;
}

/// Quadrature of a point-evaluable field over the whole mesh; deterministic
/// pairwise reduction over cells in index order.
template <class F>
double integrate(const Mesh& mesh, const QuadratureRule& rule, F&& f) {
    std::vector<double> per_cell(mesh.cell_count());
    for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
        const double scale = 2.0 * mesh.cell_area(c); // physical/reference area
        CompensatedSum s;
        for (std::size_t k = 0; k < rule.weights.size(); ++k) {
            const double v = f(mesh.point_at(c, rule.barycentric[k]));
            if (!std::isfinite(v))
                throw evaluation_error("integrate: non-finite integrand value");
            s.add(rule.weights[k] * v);
        }
        per_cell[c] = s.value() * scale;
    }
    return pairwise_sum(per_cell);
}

/// Variant receiving (cell index, point); used for piecewise-defined fields.
template <class F>
double integrate_cellwise(const Mesh& mesh, const QuadratureRule& rule, F&& f) {
    std::vector<double> per_cell(mesh.cell_count());
    for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
        const double scale = 2.0 * mesh.cell_area(c);
        CompensatedSum s;
        for (std::size_t k = 0; k < rule.weights.size(); ++k) {
            const double v = f(c, mesh.point_at(c, rule.barycentric[k]));
            if (!std::isfinite(v))
                throw evaluation_error("integrate_cellwise: non-finite integrand value");
            s.add(rule.weights[k] * v);
        }
        per_cell[c] = s.value() * scale;
    }
    return pairwise_sum(per_cell);
}

namespace detail {

template <class F>
double rule_on_triangle(const QuadratureRule& rule, const Vec2& a, const Vec2& b,
                        const Vec2& c, F&& f) {
    const double area = 0.5 * cross(b - a, c - a);
    CompensatedSum s;
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
        const auto& l = rule.barycentric[k];
        s.add(rule.weights[k] * f(a * l[0] + b * l[1] + c * l[2]));
    }
    return s.value() * 2.0 * area;
}

template <class F>
double adaptive_triangle(const QuadratureRule& rule, const Vec2& a, const Vec2& b,
                         const Vec2& c, F&& f, double abs_tol, int depth, int max_depth) {
    const double whole = rule_on_triangle(rule, a, b, c, f);
    const Vec2 ab = (a + b) * 0.5, bc = (b + c) * 0.5, ca = (c + a) * 0.5;
    const double split = rule_on_triangle(rule, a, ab, ca, f) +
                         rule_on_triangle(rule, ab, b, bc, f) +
                         rule_on_triangle(rule, ca, bc, c, f) +
                         rule_on_triangle(rule, ab, bc, ca, f);
    if (std::abs(whole - split) <= abs_tol || depth >= max_depth) return split;
    return adaptive_triangle(rule, a, ab, ca, f, 0.25 * abs_tol, depth + 1, max_depth) +
           adaptive_triangle(rule, ab, b, bc, f, 0.25 * abs_tol, depth + 1, max_depth) +
           adaptive_triangle(rule, ca, bc, c, f, 0.25 * abs_tol, depth + 1, max_depth) +
           adaptive_triangle(rule, ab, bc, ca, f, 0.25 * abs_tol, depth + 1, max_depth);
}

} // namespace detail

/// Mesh quadrature with per-cell recursive subdivision; handles integrable
/// point singularities (e.g. at the disk center) by refining toward them.
template <class F>
double integrate_adaptive(const Mesh& mesh, F&& f, double rel_tol = 1e-8,
                          int max_depth = 30) {
    const QuadratureRule rule = triangle_rule(5);
    std::vector<double> coarse(mesh.cell_count());
    double total_abs = 0.0;
    for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
        const auto& t = mesh.cells[c];
        coarse[c] = detail::rule_on_triangle(rule, mesh.nodes[t[0]], mesh.nodes[t[1]],
                                             mesh.nodes[t[2]], f);
        total_abs += std::abs(coarse[c]);
    }
    const double base = std::max(total_abs, 1e-300);
    std::vector<double> per_cell(mesh.cell_count());
    for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
        const double tol_c =
            rel_tol * (std::abs(coarse[c]) + base / static_cast<double>(mesh.cell_count()));
        const auto& t = mesh.cells[c];
        per_cell[c] = detail::adaptive_triangle(rule, mesh.nodes[t[0]], mesh.nodes[t[1]],
                                                mesh.nodes[t[2]], f, tol_c, 0, max_depth);
    }
    return pairwise_sum(per_cell);
}

/// Lower estimate of the Hoelder seminorm sup |f(x)-f(y)| / |x-y|^gamma over
/// the given sample pairs; nondecreasing under sample enrichment.
template <class F>
double holder_seminorm_estimate(F&& f, double gamma,
                                std::span<const std::pair<Vec2, Vec2>> pairs) {
    if (gamma <= 0.0 || gamma > 1.0)
        throw std::invalid_argument("holder_seminorm_estimate: gamma must be in (0, 1]");
    double best = 0.0;
    for (const auto& [x, y] : pairs) {
        const double d = dist(x, y);
        if (d <= 0.0) continue;
        best = std::max(best, std::abs(f(x) - f(y)) / std::pow(d, gamma));
    }
    return best;
}

/// Dense pair grid on the segment [a, b]; helper for 1D seminorm estimates.
inline std::vector<std::pair<Vec2, Vec2>> segment_pairs(double a, double b, int n) {
    std::vector<std::pair<Vec2, Vec2>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
    for (int i = 0; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            pairs.push_back({Vec2{a + (b - a) * i / n, 0.0}, Vec2{a + (b - a) * j / n, 0.0}});
    return pairs;
}

// --- CSV field I/O -------------------------------------------------------

inline std::string field_to_csv(const GridFunction& u) {
    std::string out = "node,value\n";
    char buf[64];
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, u.values[i]);
        out += buf;
    }
    return out;
}

inline GridFunction field_from_csv(const Mesh& mesh, const std::string& csv) {
    GridFunction u(mesh);
    std::size_t pos = csv.find('\n'); // skip header
    if (pos == std::string::npos) throw std::invalid_argument("field_from_csv: empty input");
    ++pos;
    while (pos < csv.size()) {
        std::size_t e = csv.find('\n', pos);
        if (e == std::string::npos) e = csv.size();
        const std::string line = csv.substr(pos, e - pos);
        pos = e + 1;
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("field_from_csv: malformed line: " + line);
        const std::size_t idx = std::stoul(line.substr(0, comma));
        if (idx >= u.values.size())
            throw std::invalid_argument("field_from_csv: node index out of range");
        u.values[idx] = std::stod(line.substr(comma + 1));
    }
    return u;
}

} // namespace lavgap
