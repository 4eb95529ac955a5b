#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lavgap/grid_function.hpp"
#include "lavgap/mesh.hpp"
#include "lavgap/sampling.hpp"

namespace lavgap {

class invalid_weight_error : public std::runtime_error {
public:
    explicit invalid_weight_error(const std::string& w) : std::runtime_error(w) {}
};

class invalid_modulus_error : public std::runtime_error {
public:
    explicit invalid_modulus_error(const std::string& w) : std::runtime_error(w) {}
};

/// Bounded nonnegative weight a(x).  `grad` is optional and only needed by
/// glaeser_check.
struct Weight {
    std::function<double(Vec2)> eval;
    double sup_bound = 0.0;
    std::string label;
    std::function<Vec2(Vec2)> grad;
};

inline Weight power_weight(double kappa, Vec2 x0 = {0.0, 0.0}) {
    if (kappa <= 0.0) throw std::invalid_argument("power_weight: kappa must be positive");
    Weight w;
    w.eval = [kappa, x0](Vec2 p) { return std::pow(dist(p, x0), kappa); };
    w.grad = [kappa, x0](Vec2 p) {
        const double r = dist(p, x0);
        if (r == 0.0) return Vec2{0.0, 0.0};
        return (p - x0) * (kappa * std::pow(r, kappa - 2.0));
    };
    w.sup_bound = std::numeric_limits<double>::infinity();
    w.label = "|x-x0|^" + std::to_string(kappa);
    return w;
}

inline Weight constant_weight(double c) {
    if (c < 0.0) throw std::invalid_argument("constant_weight: must be nonnegative");
    Weight w;
    w.eval = [c](Vec2) { return c; };
    w.grad = [](Vec2) { return Vec2{0.0, 0.0}; };
    w.sup_bound = c;
    w.label = "const " + std::to_string(c);
    return w;
}

/// Weight decaying like exp(-1/|x|^2) at the origin; below any power scale.
inline Weight superpolynomial_decay_weight() {
    Weight w;
    w.eval = [](Vec2 p) {
        const double r2 = norm2(p);
        return r2 == 0.0 ? 0.0 : std::exp(-1.0 / r2);
    };
    w.sup_bound = 1.0;
    w.label = "exp(-1/|x|^2)";
    return w;
}

/// Increasing modulus with omega(0) = 0, for the generalized weight class.
struct Modulus {
    std::function<double(double)> omega;
    std::string label;
};

inline Modulus power_modulus(double kappa) {
    return {[kappa](double t) { return std::pow(t, kappa); },
            "t^" + std::to_string(kappa)};
}

/// Best constant of a(x) <= C (a(y) + |x-y|^kappa) over sampled node pairs;
/// the diagonal pair contributes 1 (0/0 convention), so C >= 1 always.
struct ZkEstimate {
    double kappa = 0.0;
    double constant = 1.0;
    std::pair<int, int> witness{0, 0};
    double grid_h = 0.0;
};

namespace detail {

template <class Denominator>
ZkEstimate ratio_sup_over_pairs(const Weight& a, const Mesh& mesh, Denominator&& den,
                                const PairBudget& budget) {
    std::vector<double> av(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        av[i] = a.eval(mesh.nodes[i]);
        if (!(av[i] >= 0.0))
            throw invalid_weight_error("weight is negative or NaN at node " +
                                       std::to_string(i));
    }
    ZkEstimate est;
    est.grid_h = mesh.h;
    for_each_node_pair(mesh, budget, [&](int i, int j) {
        const double num = av[static_cast<std::size_t>(i)];
        if (num == 0.0) return; // contributes ratio <= 1 by convention
        const double d = den(av[static_cast<std::size_t>(j)],
                             dist(mesh.nodes[i], mesh.nodes[j]));
        const double ratio = num / d;
        if (ratio > est.constant) {
            est.constant = ratio;
            est.witness = {i, j};
        }
    });
    return est;
}

} // namespace detail

inline ZkEstimate zk_constant_estimate(const Weight& a, double kappa, const Mesh& mesh,
                                       const PairBudget& budget = {}) {
    if (kappa <= 0.0)
        throw std::invalid_argument("zk_constant_estimate: kappa must be positive");
    ZkEstimate est = detail::ratio_sup_over_pairs(
        a, mesh, [kappa](double ay, double d) { return ay + std::pow(d, kappa); },
        budget);
    est.kappa = kappa;
    return est;
}

inline ZkEstimate zomega_constant_estimate(const Weight& a, const Modulus& m,
                                           const Mesh& mesh,
                                           const PairBudget& budget = {}) {
    if (m.omega(0.0) != 0.0)
        throw invalid_modulus_error("modulus must satisfy omega(0) = 0");
    if (m.omega(0.5) > m.omega(1.0))
        throw invalid_modulus_error("modulus must be increasing");
    return detail::ratio_sup_over_pairs(
        a, mesh, [&m](double ay, double d) { return ay + m.omega(d); }, budget);
}

/// Refinement study of the class constant.  Membership is undecidable from
/// finitely many samples, so the result is the list of constants, the fitted
/// growth exponent of C(h) ~ h^{-s}, and a stable/diverging verdict from the
/// last two refinements.
struct MembershipVerdict {
    std::vector<std::pair<double, double>> constants; // (h, C)
    bool stable = false;
    double fitted_exponent = 0.0;  // least-squares slope over all levels
    double last_exponent = 0.0;    // slope of the final refinement step
};

struct MembershipOptions {
    double exponent_threshold = 0.1;
    double radius = 1.0;
    PairBudget budget{};
};

inline MembershipVerdict zk_membership_verdict(const Weight& a, double kappa,
                                               std::span<const double> h_list,
                                               const MembershipOptions& opt = {}) {
    if (h_list.size() < 3)
        throw std::invalid_argument("zk_membership_verdict: need at least 3 spacings");
    for (std::size_t i = 0; i + 1 < h_list.size(); ++i)
        if (!(h_list[i] > h_list[i + 1]))
            throw std::invalid_argument(
                "zk_membership_verdict: h list must be strictly decreasing");

    MembershipVerdict v;
    for (double h : h_list) {
        Mesh mesh = build_disk_mesh(opt.radius, h);
        v.constants.push_back({h, zk_constant_estimate(a, kappa, mesh, opt.budget).constant});
    }
    // least-squares fit of log C against log(1/h)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(v.constants.size());
    for (const auto& [h, c] : v.constants) {
        const double x = std::log(1.0 / h), y = std::log(std::max(c, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    v.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const auto& [h1, c1] = v.constants[v.constants.size() - 2];
    const auto& [h2, c2] = v.constants.back();
    v.last_exponent = std::log(c2 / c1) / std::log(h1 / h2);
    v.stable = v.last_exponent <= opt.exponent_threshold;
    return v;
}

/// Consistency of membership under a -> a^beta, kappa -> beta * kappa.
struct PowerRuleReport {
    ZkEstimate base;
    ZkEstimate powered;
    MembershipVerdict base_verdict;
    MembershipVerdict powered_verdict;
    bool consistent = false;
};

inline PowerRuleReport power_rule_check(const Weight& a, double kappa, double beta,
                                        std::span<const double> h_list,
                                        const MembershipOptions& opt = {}) {
    if (kappa <= 0.0 || beta <= 0.0)
        throw std::invalid_argument("power_rule_check: kappa, beta must be positive");
    Weight ab;
    ab.eval = [&a, beta](Vec2 p) { return std::pow(a.eval(p), beta); };
    ab.sup_bound = std::pow(a.sup_bound, beta);
    ab.label = a.label + "^" + std::to_string(beta);

    PowerRuleReport r;
    Mesh finest = build_disk_mesh(opt.radius, h_list.back());
    r.base = zk_constant_estimate(a, kappa, finest, opt.budget);
    r.powered = zk_constant_estimate(ab, beta * kappa, finest, opt.budget);
    r.base_verdict = zk_membership_verdict(a, kappa, h_list, opt);
    r.powered_verdict = zk_membership_verdict(ab, beta * kappa, h_list, opt);
    r.consistent = r.base_verdict.stable == r.powered_verdict.stable;
    return r;
}

/// Lipschitz seminorm estimate of a^{1/kappa} over node pairs; a bounded
/// value under refinement certifies membership at level kappa.
inline double root_lipschitz_check(const Weight& a, double kappa, const Mesh& mesh,
                                   const PairBudget& budget = {}) {
    if (kappa <= 0.0)
        throw std::invalid_argument("root_lipschitz_check: kappa must be positive");
    auto pairs = mesh_node_pairs(mesh, budget);
    return holder_seminorm_estimate(
        [&](Vec2 p) { return std::pow(a.eval(p), 1.0 / kappa); }, 1.0,
        std::span(pairs.data(), pairs.size()));
}

/// Smallest C with |da/dnu(z)| <= C a(z)^{alpha/(1+alpha)} over mesh nodes and
/// 16 fixed directions.  A finite value supports membership at level 1+alpha;
/// a zero of a with nonvanishing gradient is a violation and yields infinity.
inline double glaeser_check(const Weight& a, double alpha, const Mesh& mesh) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("glaeser_check: alpha must be in (0, 1]");
    if (!a.grad)
        throw std::invalid_argument("glaeser_check: weight needs an analytic gradient");
    const double expo = alpha / (1.0 + alpha);
    double best = 0.0;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const Vec2 z = mesh.nodes[i];
        const double az = a.eval(z);
        const Vec2 g = a.grad(z);
        for (int k = 0; k < 16; ++k) {
            const double t = 2.0 * pi * k / 16.0;
            const double dn = std::abs(g.x * std::cos(t) + g.y * std::sin(t));
            if (az == 0.0) {
                if (dn > 1e-12) return std::numeric_limits<double>::infinity();
                continue;
            }
            best = std::max(best, dn / std::pow(az, expo));
        }
    }
    return best;
}

} // namespace lavgap
