#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lavgap/grid_function.hpp"
#include "lavgap/mesh.hpp"
#include "lavgap/sampling.hpp"
#include "lavgap/weights.hpp"

namespace lavgap {

class unbounded_error : public std::runtime_error {
public:
    explicit unbounded_error(const std::string& w) : std::runtime_error(w) {}
};

/// M(x, t) = t^p + a(x) t^q with 1 < p < q and bounded a >= 0.
struct DoublePhaseIntegrand {
    double p;
    double q;
    Weight a;
};

inline DoublePhaseIntegrand make_double_phase(double p, double q, Weight a) {
    if (!(p > 1.0 && q > p))
        throw std::invalid_argument("double phase integrand needs 1 < p < q");
    return {p, q, std::move(a)};
}

inline double m_eval(const DoublePhaseIntegrand& di, Vec2 x, double t) {
    if (t < 0.0) throw std::domain_error("m_eval: t must be nonnegative");
    return std::pow(t, di.p) + di.a.eval(x) * std::pow(t, di.q);
}

struct EnergyBreakdown {
    double p_part = 0.0;
    double q_part = 0.0;
    double total() const { return p_part + q_part; }
};

/// Double-phase energy of the piecewise-linear reconstruction of u.
inline EnergyBreakdown energy(const DoublePhaseIntegrand& di, const GridFunction& u,
                              const QuadratureRule& rule = triangle_rule(2)) {
    const Mesh& mesh = *u.mesh;
    const auto grads = gradient(u);
    EnergyBreakdown out;
    out.p_part = integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2) {
        return std::pow(norm(grads[c]), di.p);
    });
    out.q_part = integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2 x) {
        return di.a.eval(x) * std::pow(norm(grads[c]), di.q);
    });
    return out;
}

/// Energy of an analytically given gradient field; the q-part vanishes
/// pointwise wherever either factor does, without interpolation smearing.
template <class GradField>
EnergyBreakdown energy_gradient_field(const DoublePhaseIntegrand& di, const Mesh& mesh,
                                      GradField&& grad,
                                      const QuadratureRule& rule = triangle_rule(2)) {
    EnergyBreakdown out;
    out.p_part =
        integrate(mesh, rule, [&](Vec2 x) { return std::pow(norm(grad(x)), di.p); });
    out.q_part = integrate(mesh, rule, [&](Vec2 x) {
        const double a = di.a.eval(x);
        return a == 0.0 ? 0.0 : a * std::pow(norm(grad(x)), di.q);
    });
    return out;
}

/// Modular distance of two cell-constant vector fields.
inline double modular_distance(const DoublePhaseIntegrand& di, const Mesh& mesh,
                               std::span<const Vec2> xi1, std::span<const Vec2> xi2,
                               const QuadratureRule& rule = triangle_rule(2)) {
    if (xi1.size() != mesh.cell_count() || xi2.size() != mesh.cell_count())
        throw std::invalid_argument("modular_distance: fields must be per cell");
    return integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2 x) {
        return m_eval(di, x, norm(xi1[c] - xi2[c]));
    });
}

/// Modular distance of a point-evaluable field against a cell-constant one.
template <class F>
double modular_distance_field(const DoublePhaseIntegrand& di, const Mesh& mesh, F&& xi1,
                              std::span<const Vec2> xi2,
                              const QuadratureRule& rule = triangle_rule(2)) {
    return integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2 x) {
        return m_eval(di, x, norm(xi1(x) - xi2[c]));
    });
}

inline double modular(const DoublePhaseIntegrand& di, const Mesh& mesh,
                      std::span<const Vec2> xi,
                      const QuadratureRule& rule = triangle_rule(2)) {
    return integrate_cellwise(mesh, rule,
                              [&](std::size_t c, Vec2 x) { return m_eval(di, x, norm(xi[c])); });
}

/// Luxemburg norm inf{lambda : modular(xi / lambda) <= 1} by bisection;
/// the modular is decreasing in lambda, bracketed in [1e-12, 1e12].
inline double luxemburg_norm(const DoublePhaseIntegrand& di, const Mesh& mesh,
                             std::span<const Vec2> xi,
                             const QuadratureRule& rule = triangle_rule(2),
                             double rel_tol = 1e-8) {
    bool all_zero = true;
    for (const auto& v : xi)
        if (v.x != 0.0 || v.y != 0.0) { all_zero = false; break; }
    if (all_zero) return 0.0;

    auto modular_at = [&](double lambda) {
        return integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2 x) {
            return m_eval(di, x, norm(xi[c]) / lambda);
        });
    };
    double lo = 1e-12, hi = 1e12;
    if (modular_at(hi) > 1.0)
        throw unbounded_error("luxemburg_norm: modular exceeds 1 for every tested lambda");
    if (modular_at(lo) <= 1.0) return lo;
    while ((hi - lo) > rel_tol * lo) {
        const double mid = std::sqrt(lo * hi);
        (modular_at(mid) <= 1.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Tail-mass profile of a family of cell-constant scalar fields: for each
/// area fraction eps, the supremum over the family of the integral over the
/// greedily chosen worst cells of total measure eps * |Omega|.
struct TailProfile {
    std::vector<double> eps_fractions;
    std::vector<double> sup_tail;
};

inline TailProfile uniform_integrability_probe(
    const Mesh& mesh, std::span<const std::vector<double>> cell_fields,
    std::span<const double> eps_fractions) {
    if (cell_fields.empty())
        throw std::invalid_argument("uniform_integrability_probe: empty family");
    const double area_total = mesh.total_volume();
    TailProfile profile;
    profile.eps_fractions.assign(eps_fractions.begin(), eps_fractions.end());
    profile.sup_tail.assign(eps_fractions.size(), 0.0);

    std::vector<std::size_t> order(mesh.cell_count());
    std::vector<double> contribution(mesh.cell_count());
    for (const auto& field : cell_fields) {
        if (field.size() != mesh.cell_count())
            throw std::invalid_argument("uniform_integrability_probe: field size mismatch");
        for (std::size_t c = 0; c < mesh.cell_count(); ++c)
            contribution[c] = std::abs(field[c]) * mesh.cell_area(c);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return contribution[a] > contribution[b];
        });
        for (std::size_t e = 0; e < eps_fractions.size(); ++e) {
            const double cap = eps_fractions[e] * area_total;
            double used = 0.0, mass = 0.0;
            for (std::size_t c : order) {
                const double cell_area = mesh.cell_area(c);
                if (used + cell_area > cap) break;
                used += cell_area;
                mass += contribution[c];
            }
            profile.sup_tail[e] = std::max(profile.sup_tail[e], mass);
        }
    }
    return profile;
}

/// Nodal truncation to [-k, k].
inline GridFunction truncate(const GridFunction& u, double k) {
    if (k <= 0.0) throw std::invalid_argument("truncate: k must be positive");
    GridFunction out = u;
    for (double& v : out.values) v = std::min(k, std::max(-k, v));
    return out;
}

// --- sandwich class -------------------------------------------------------

/// General integrand G(x, z, xi) pinched between nu * M and L * (M + Lambda).
struct SandwichIntegrand {
    std::function<double(Vec2, double, Vec2)> G;
    double nu = 0.5;
    double L = 2.0;
    std::function<double(Vec2)> Lambda = [](Vec2) { return 0.0; };
};

struct SandwichReport {
    bool pass = true;
    double worst_lower_margin = std::numeric_limits<double>::infinity();
    double worst_upper_margin = std::numeric_limits<double>::infinity();
    std::size_t witness = 0; // index of the violating triple
};

inline SandwichReport sandwich_check(
    const SandwichIntegrand& si, const DoublePhaseIntegrand& di,
    std::span<const std::tuple<Vec2, double, Vec2>> triples) {
    if (!(si.nu > 0.0 && si.nu < 1.0 && si.L > 1.0))
        throw std::invalid_argument("sandwich_check: need 0 < nu < 1 < L");
    SandwichReport r;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const auto& [x, z, xi] = triples[i];
        const double m = m_eval(di, x, norm(xi));
        const double g = si.G(x, z, xi);
        const double lower_margin = g - si.nu * m;
        const double upper_margin = si.L * (m + si.Lambda(x)) - g;
        if (lower_margin < r.worst_lower_margin) r.worst_lower_margin = lower_margin;
        if (upper_margin < r.worst_upper_margin) r.worst_upper_margin = upper_margin;
        if ((lower_margin < 0.0 || upper_margin < 0.0) && r.pass) {
            r.pass = false;
            r.witness = i;
        }
    }
    return r;
}

// --- variable exponents and the orthotropic variant ------------------------

struct VariableExponentIntegrand {
    std::function<double(Vec2)> p;
    std::function<double(Vec2)> q;
    Weight a;
    std::function<double(Vec2, double)> b = [](Vec2, double) { return 1.0; };
};

namespace detail {

/// Value of the piecewise-linear reconstruction at a point known to lie in
/// cell c.
inline double value_in_cell(const GridFunction& u, std::size_t c, Vec2 x) {
    const auto& t = u.mesh->cells[c];
    const Vec2 A = u.mesh->nodes[t[0]], B = u.mesh->nodes[t[1]], C = u.mesh->nodes[t[2]];
    const double det = cross(B - A, C - A);
    const double l1 = cross(x - A, C - A) / det;
    const double l2 = cross(B - A, x - A) / det;
    return (1.0 - l1 - l2) * u.values[t[0]] + l1 * u.values[t[1]] + l2 * u.values[t[2]];
}

} // namespace detail

inline double energy_variable_exponent(const VariableExponentIntegrand& ve,
                                       const GridFunction& u,
                                       const QuadratureRule& rule = triangle_rule(2)) {
    const Mesh& mesh = *u.mesh;
    const auto grads = gradient(u);
    return integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2 x) {
        const double px = ve.p(x), qx = ve.q(x);
        if (!(px > 1.0))
            throw std::invalid_argument("energy_variable_exponent: p(x) <= 1");
        if (!(qx > px))
            throw std::invalid_argument("energy_variable_exponent: q(x) <= p(x)");
        const double z = detail::value_in_cell(u, c, x);
        const double g = norm(grads[c]);
        return ve.b(x, z) * (std::pow(g, px) + ve.a.eval(x) * std::pow(g, qx));
    });
}

/// sup over close pairs of |p(x) - p(y)| log(1 / |x - y|).
inline double log_holder_seminorm(const std::function<double(Vec2)>& p, const Mesh& mesh,
                                  const PairBudget& budget = {}) {
    std::vector<double> pv(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) pv[i] = p(mesh.nodes[i]);
    double best = 0.0;
    for_each_node_pair(mesh, budget, [&](int i, int j) {
        if (i >= j) return;
        const double d = dist(mesh.nodes[i], mesh.nodes[j]);
        if (d <= 0.0 || d >= 0.5) return;
        best = std::max(best, std::abs(pv[i] - pv[j]) * std::log(1.0 / d));
    });
    return best;
}

struct OrthotropicComponent {
    double p;
    double q;
    Weight a;
    std::function<double(Vec2, double)> b = [](Vec2, double) { return 1.0; };
};

struct OrthotropicIntegrand {
    std::array<OrthotropicComponent, 2> coord;
};

inline double energy_orthotropic(const OrthotropicIntegrand& oi, const GridFunction& u,
                                 const QuadratureRule& rule = triangle_rule(2)) {
    for (const auto& c : oi.coord)
        if (!(c.p > 1.0 && c.q > c.p))
            throw std::invalid_argument("energy_orthotropic: need 1 < p_i < q_i");
    const Mesh& mesh = *u.mesh;
    const auto grads = gradient(u);
    double sum = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
        const auto& comp = oi.coord[static_cast<std::size_t>(axis)];
        sum += integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2 x) {
            const double gi = std::abs(axis == 0 ? grads[c].x : grads[c].y);
            const double z = detail::value_in_cell(u, c, x);
            return comp.b(x, z) *
                   (std::pow(gi, comp.p) + comp.a.eval(x) * std::pow(gi, comp.q));
        });
    }
    return sum;
}

// --- regime classification -------------------------------------------------

enum class Regime { NoGapI, NoGapHoelder, NoGapMorrey, GapSharpness, OutsideTheorems };

struct RegimeVerdict {
    int n = 2;
    double p = 0.0, q = 0.0, kappa = 0.0;
    std::optional<double> gamma;
    Regime verdict = Regime::OutsideTheorems;
    std::string tag; // the inequality that fired
};

inline std::string regime_name(Regime r) {
    switch (r) {
        case Regime::NoGapI: return "NoGap-I";
        case Regime::NoGapHoelder: return "NoGap-Hoelder";
        case Regime::NoGapMorrey: return "NoGap-Morrey";
        case Regime::GapSharpness: return "Gap-Sharpness";
        case Regime::OutsideTheorems: return "Outside-Theorems";
    }
    return "?";
}

/// Decides which range the parameters fall into, most specific first:
/// the direct range q <= p + kappa, the Hoelder-interpolated range
/// kappa >= (q - p)(1 - gamma), the Morrey range q <= p + kappa max(p/n, 1),
/// and the sharpness range p < n < n + kappa < q.
inline RegimeVerdict regime_classify(int n, double p, double q, double kappa,
                                     std::optional<double> gamma = {}) {
    if (n < 2) throw std::invalid_argument("regime_classify: n must be >= 2");
    if (!(p > 1.0 && q > p)) throw std::invalid_argument("regime_classify: need 1 < p < q");
    if (!(kappa > 0.0)) throw std::invalid_argument("regime_classify: kappa must be positive");
    if (gamma && !(*gamma > 0.0 && *gamma <= 1.0))
        throw std::invalid_argument("regime_classify: gamma must lie in (0, 1]");

    RegimeVerdict v;
    v.n = n;
    v.p = p;
    v.q = q;
    v.kappa = kappa;
    v.gamma = gamma;
    if (q <= p + kappa) {
        v.verdict = Regime::NoGapI;
        v.tag = "q <= p + kappa";
    } else if (gamma && kappa >= (q - p) * (1.0 - *gamma)) {
        v.verdict = Regime::NoGapHoelder;
        v.tag = "kappa >= (q - p)(1 - gamma)";
    } else if (q <= p + kappa * std::max(p / n, 1.0)) {
        v.verdict = Regime::NoGapMorrey;
        v.tag = "q <= p + kappa max(p/n, 1)";
    } else if (p < n && n + kappa < q) {
        v.verdict = Regime::GapSharpness;
        v.tag = "p < n < n + kappa < q";
    } else {
        v.verdict = Regime::OutsideTheorems;
        v.tag = "no covered range applies";
    }
    return v;
}

} // namespace lavgap
