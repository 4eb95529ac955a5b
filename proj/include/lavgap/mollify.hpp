#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lavgap/energy.hpp"
#include "lavgap/grid_function.hpp"
#include "lavgap/mesh.hpp"
#include "lavgap/quadrature.hpp"
#include "lavgap/weights.hpp"

namespace lavgap {

/// Smooth bump exp(-1/(1-|z|^2)) on the unit ball, normalized to unit mass.
/// grad_l1 is the L1 norm of the kernel gradient, the constant entering the
/// mollified-gradient bounds.
struct Kernel {
    int dim = 2;
    double normalization = 1.0;
    double grad_l1 = 0.0;

    double profile(double r) const {
        if (r >= 1.0) return 0.0;
        return normalization * std::exp(-1.0 / (1.0 - r * r));
    }
    double eval(Vec2 z) const { return profile(norm(z)); }
};

inline Kernel make_kernel(int n) {
    if (n != 2 && n != 3) throw std::invalid_argument("make_kernel: n must be 2 or 3");
    Kernel k;
    k.dim = n;
    auto bump = [](double r) { return std::exp(-1.0 / (1.0 - r * r)); };
    const double surface = n == 2 ? 2.0 * pi : 4.0 * pi;
    const double mass = surface * adaptive_integrate(
                                      [&](double r) {
                                          return bump(r) * std::pow(r, n - 1);
                                      },
                                      0.0, 1.0, 1e-12);
    k.normalization = 1.0 / mass;
    // |grad rho|(r) = normalization * bump(r) * 2 r / (1 - r^2)^2
    k.grad_l1 = surface * k.normalization *
                adaptive_integrate(
                    [&](double r) {
                        const double s = 1.0 - r * r;
                        return bump(r) * 2.0 * r / (s * s) * std::pow(r, n - 1);
                    },
                    0.0, 1.0, 1e-12);
    return k;
}

/// Convolution at scale delta composed with the dilation by
/// kappa_delta = 1 - delta / R toward the star center.
struct ShrinkMollifier {
    double delta = 0.0;
    Vec2 x0{0.0, 0.0};
    double R = 0.0;
    double kappa_delta = 1.0;
    Kernel kernel;
};

inline ShrinkMollifier make_shrink_mollifier(double delta, const Domain& domain,
                                             const Kernel& kernel) {
    if (!(delta > 0.0 && delta < domain.star_radius / 4.0))
        throw std::invalid_argument("shrink mollifier requires delta in (0, R/4)");
    ShrinkMollifier m;
    m.delta = delta;
    m.x0 = domain.star_center;
    m.R = domain.star_radius;
    m.kappa_delta = 1.0 - delta / domain.star_radius;
    m.kernel = kernel;
    return m;
}

/// Guaranteed vanishing margin of mollified zero-boundary fields near the
/// boundary of a ball domain.
inline double support_margin(const ShrinkMollifier& m, const Domain& domain) {
    return m.delta * (domain.radius - m.R) / m.R;
}

/// Fixed quadrature stencil for S_delta: offsets are pre-divided by
/// kappa_delta so that an evaluation is sum_i w_i f(x / kappa_delta - o_i),
/// and the weights are normalized to sum exactly to one (discrete probability
/// kernel, so sup norms never grow).
struct ConvolutionStencil {
    std::vector<Vec2> offsets;
    std::vector<double> weights;
};

inline ConvolutionStencil make_stencil(const ShrinkMollifier& m, double spacing) {
    if (spacing <= 0.0) throw std::invalid_argument("make_stencil: spacing must be positive");
    const int cells = std::max(4, static_cast<int>(std::ceil(2.0 * m.delta / spacing)));
    const double s = 2.0 * m.delta / cells;
    ConvolutionStencil st;
    double wsum = 0.0;
    for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
            const Vec2 y{-m.delta + (i + 0.5) * s, -m.delta + (j + 0.5) * s};
            const double w = m.kernel.eval(y / m.delta);
            if (w <= 0.0) continue;
            st.offsets.push_back(y / m.kappa_delta);
            st.weights.push_back(w);
            wsum += w;
        }
    }
    for (double& w : st.weights) w /= wsum;
    return st;
}

/// One evaluation of S_delta f at x; `f` must be the zero-extended field.
template <class F>
double shrink_convolve(const ShrinkMollifier& m, const ConvolutionStencil& st, F&& f,
                       Vec2 x) {
    const Vec2 base = m.x0 + (x - m.x0) / m.kappa_delta;
    double acc = 0.0;
    for (std::size_t i = 0; i < st.offsets.size(); ++i)
        acc += st.weights[i] * f(base - st.offsets[i]);
    return acc;
}

namespace detail {

/// Zero-extended piecewise-linear evaluation with a warm-started cell walk.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const GridFunction& u) : u_(&u) {}

    double operator()(Vec2 p) {
        std::array<double, 3> l{};
        const int c = u_->mesh->locate_from(p, hint_, &l);
        if (c < 0) return 0.0;
        hint_ = c;
        const auto& t = u_->mesh->cells[static_cast<std::size_t>(c)];
        return l[0] * u_->values[t[0]] + l[1] * u_->values[t[1]] + l[2] * u_->values[t[2]];
    }

private:
    const GridFunction* u_;
    int hint_ = 0;
};

/// Zero-extended cell-constant field (e.g. a gradient component).
class CellFieldEvaluator {
public:
    CellFieldEvaluator(const Mesh& mesh, std::span<const double> values)
        : mesh_(&mesh), values_(values) {}

    double operator()(Vec2 p) {
        const int c = mesh_->locate_from(p, hint_, nullptr);
        if (c < 0) return 0.0;
        hint_ = c;
        return values_[static_cast<std::size_t>(c)];
    }

private:
    const Mesh* mesh_;
    std::span<const double> values_;
    int hint_ = 0;
};

inline double default_spacing(const ShrinkMollifier& m, const Mesh& mesh) {
    return std::min(mesh.h, m.delta / 8.0);
}

inline void require_zero_boundary(const GridFunction& v) {
    for (int b : v.mesh->boundary_nodes)
        if (std::abs(v.values[static_cast<std::size_t>(b)]) > 1e-12)
            throw std::invalid_argument(
                "shrink mollifier input must vanish on the boundary");
}

} // namespace detail

/// Nodal mollification of a zero-boundary grid function.
inline GridFunction apply(const ShrinkMollifier& m, const GridFunction& v,
                          double spacing = 0.0) {
    detail::require_zero_boundary(v);
    const Mesh& mesh = *v.mesh;
    if (spacing <= 0.0) spacing = detail::default_spacing(m, mesh);
    const ConvolutionStencil st = make_stencil(m, spacing);
    detail::FieldEvaluator f(v);
    GridFunction out(mesh);
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
        out.values[i] = shrink_convolve(m, st, f, mesh.nodes[i]);
    return out;
}

/// Mollified gradient via the exact identity grad(S_delta v) =
/// S_delta(grad v) / kappa_delta, evaluated pointwise (one cell lookup per
/// stencil point for both components).
class MollifiedGradient {
public:
    MollifiedGradient(const ShrinkMollifier& m, const GridFunction& v, double spacing = 0.0)
        : m_(m),
          mesh_(v.mesh),
          grads_(gradient(v)),
          st_(make_stencil(m, spacing > 0.0 ? spacing : detail::default_spacing(m, *v.mesh))) {}

    Vec2 operator()(Vec2 x) {
        const Vec2 base = m_.x0 + (x - m_.x0) / m_.kappa_delta;
        Vec2 acc{0.0, 0.0};
        for (std::size_t i = 0; i < st_.offsets.size(); ++i) {
            const int c = mesh_->locate_from(base - st_.offsets[i], hint_, nullptr);
            if (c < 0) continue;
            hint_ = c;
            acc += st_.weights[i] * grads_[static_cast<std::size_t>(c)];
        }
        return acc / m_.kappa_delta;
    }

private:
    ShrinkMollifier m_;
    const Mesh* mesh_;
    std::vector<Vec2> grads_;
    ConvolutionStencil st_;
    int hint_ = 0;
};

/// Max-norm discrepancy between the per-cell gradient of the mollified nodal
/// field and the mollified gradient field, relative to the field magnitude.
/// The identity is exact in the continuum; the residual is discretization
/// error and must shrink under h-refinement.
inline double gradient_identity_residual(const ShrinkMollifier& m, const GridFunction& v,
                                         double spacing = 0.0) {
    const Mesh& mesh = *v.mesh;
    const GridFunction sv = apply(m, v, spacing);
    const auto direct = gradient(sv);
    MollifiedGradient identity(m, v, spacing);
    double worst = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
        const Vec2 b = identity(mesh.cell_centroid(c));
        worst = std::max(worst, norm(direct[c] - b));
        scale = std::max(scale, norm(b));
    }
    return scale > 0.0 ? worst / scale : worst;
}

struct BoundReport {
    double measured = 0.0;
    double bound = 0.0;
    bool pass = true;
};

/// Checks ||grad S_delta v||_inf <= ||v||_inf ||grad rho||_L1 / delta.
inline BoundReport linf_grad_bound_check(const ShrinkMollifier& m, const GridFunction& v,
                                         double tol = 0.05) {
    BoundReport r;
    r.bound = v.max_abs() * m.kernel.grad_l1 / m.delta;
    const auto g = gradient(apply(m, v));
    for (const Vec2& gc : g) r.measured = std::max(r.measured, norm(gc));
    r.pass = r.measured <= r.bound * (1.0 + tol) + 1e-14;
    return r;
}

/// Checks ||grad S_delta v||_inf <= delta^{gamma-1} kappa^{-gamma} [v]_gamma
/// ||grad rho||_L1.  For gamma = 1 the seminorm of the reconstruction is the
/// exact cell-gradient maximum; otherwise it is the sampled-pair estimate.
inline BoundReport holder_grad_bound_check(const ShrinkMollifier& m, const GridFunction& v,
                                           double gamma, double tol = 0.05) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("holder_grad_bound_check: gamma must be in (0, 1]");
    double seminorm = 0.0;
    if (gamma == 1.0) {
        for (const Vec2& g : gradient(v)) seminorm = std::max(seminorm, norm(g));
    } else {
        auto pairs = mesh_node_pairs(*v.mesh, PairBudget{500000, 5.0});
        seminorm = holder_seminorm_estimate([&](Vec2 p) { return v.eval_extended(p); },
                                            gamma, std::span(pairs.data(), pairs.size()));
    }
    BoundReport r;
    r.bound = std::pow(m.delta, gamma - 1.0) / std::pow(m.kappa_delta, gamma) * seminorm *
              m.kernel.grad_l1;
    const auto g = gradient(apply(m, v));
    for (const Vec2& gc : g) r.measured = std::max(r.measured, norm(gc));
    r.pass = r.measured <= r.bound * (1.0 + tol) + 1e-14;
    return r;
}

struct JensenReport {
    bool pass = true;
    double c_tau = 0.0;
    double tau = 0.0;
    double worst_excess = 0.0; // max of lhs - rhs (1 + tol), negative when passing
    std::size_t worst_node = 0;
    double lhs_integral = 0.0;
    double rhs_integral = 0.0;
};

/// Pointwise domination M(x, |grad S_delta phi|) <= 2^q C_tau S_delta(M(.,
/// |grad phi|)) at the mesh nodes, with C_tau assembled from the certified
/// class constant of the weight:
///   C_tau = C_a (1 + C_a max(1, tau^kappa) C_S^{q-p}),
///   tau = (1 + diam / (2R)) / kappa_delta.
/// `gamma` selects the C_S route: 0 uses the sup bound, (0,1] the seminorm
/// bound.  The weight certificate must be stable.
inline JensenReport jensen_domination_check(const ShrinkMollifier& m,
                                            const GridFunction& phi,
                                            const DoublePhaseIntegrand& di,
                                            const ZkEstimate& cert, bool cert_stable,
                                            double gamma = 1.0, double tol = 0.02) {
    if (!cert_stable)
        throw std::invalid_argument(
            "jensen_domination_check: weight is not certified at this scale");
    const Mesh& mesh = *phi.mesh;
    const Domain& dom = mesh.domain;

    double c_s = 0.0;
    if (gamma == 0.0) {
        c_s = phi.max_abs() * m.kernel.grad_l1;
    } else {
        double lip = 0.0;
        for (const Vec2& g : gradient(phi)) lip = std::max(lip, norm(g));
        double seminorm = lip;
        if (gamma < 1.0) {
            auto pairs = mesh_node_pairs(mesh, PairBudget{500000, 5.0});
            seminorm =
                holder_seminorm_estimate([&](Vec2 p) { return phi.eval_extended(p); },
                                         gamma, std::span(pairs.data(), pairs.size()));
        }
        c_s = 2.0 * seminorm * m.kernel.grad_l1;
    }

    JensenReport rep;
    rep.tau = (1.0 + dom.diameter() / (2.0 * m.R)) / m.kappa_delta;
    rep.c_tau = cert.constant *
                (1.0 + cert.constant * std::max(1.0, std::pow(rep.tau, cert.kappa)) *
                           std::pow(c_s, di.q - di.p));

    const double spacing = detail::default_spacing(m, mesh);
    MollifiedGradient gmol(m, phi, spacing);
    const auto grads = gradient(phi);

    // zero-extended field M(y, |grad phi(y)|) with a evaluated at the point
    const ConvolutionStencil st = make_stencil(m, spacing);
    int hint = 0;
    auto m_field = [&](Vec2 y) {
        const int c = mesh.locate_from(y, hint, nullptr);
        if (c < 0) return 0.0;
        hint = c;
        return m_eval(di, y, norm(grads[static_cast<std::size_t>(c)]));
    };

    const double factor = std::pow(2.0, di.q) * rep.c_tau;
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const Vec2 x = mesh.nodes[i];
        const double lhs = m_eval(di, x, norm(gmol(x)));
        const double rhs = factor * shrink_convolve(m, st, m_field, x);
        const double excess = lhs - rhs * (1.0 + tol) - 1e-12;
        if (excess > rep.worst_excess) {
            rep.worst_excess = excess;
            rep.worst_node = i;
        }
        if (excess > 0.0) rep.pass = false;
    }

    const QuadratureRule rule = triangle_rule(2);
    rep.lhs_integral = integrate(mesh, rule, [&](Vec2 x) {
        return m_eval(di, x, norm(gmol(x)));
    });
    rep.rhs_integral =
        factor * integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2 x) {
            return m_eval(di, x, norm(grads[c]));
        });
    return rep;
}

/// L1 distance of two nodal fields (quadrature of the absolute value of the
/// piecewise-linear difference).
inline double l1_distance(const GridFunction& u, const GridFunction& v) {
    const Mesh& mesh = *u.mesh;
    GridFunction d(mesh);
    for (std::size_t i = 0; i < d.values.size(); ++i)
        d.values[i] = u.values[i] - v.values[i];
    const QuadratureRule rule = triangle_rule(2);
    return integrate_cellwise(mesh, rule, [&](std::size_t c, Vec2 x) {
        return std::abs(detail::value_in_cell(d, c, x));
    });
}

} // namespace lavgap
