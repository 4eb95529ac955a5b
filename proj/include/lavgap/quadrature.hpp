#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lavgap/geometry.hpp"
#include "lavgap/summation.hpp"

namespace lavgap {

/// Thrown when an integral is detected to be infinite (power exponent <= -1).
class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

class quadrature_error : public std::runtime_error {
public:
    explicit quadrature_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1, 1].
inline constexpr double gk15_x[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double gk15_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double gk15_wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GKEstimate {
    double value;
    double error;
};

template <class F>
GKEstimate gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fc = f(c);
    double resk = fc * gk15_wk[7];
    double resg = fc * gk15_wg[3];
    for (int i = 0; i < 7; ++i) {
        double off = half * gk15_x[i];
        double f1 = f(c - off);
        double f2 = f(c + off);
        resk += gk15_wk[i] * (f1 + f2);
        if (i % 2 == 1) resg += gk15_wg[i / 2] * (f1 + f2);
    }
    double value = resk * half;
    double error = std::abs((resk - resg) * half);
    return {value, error};
}

template <class F>
void adaptive_gk_rec(F&& f, double a, double b, double abs_tol, int depth, int max_depth,
                     std::vector<double>& pieces) {
    GKEstimate e = gk15(f, a, b);
    if (e.error <= abs_tol || depth >= max_depth) {
        pieces.push_back(e.value);
        return;
    }
    double m = 0.5 * (a + b);
    adaptive_gk_rec(f, a, m, 0.5 * abs_tol, depth + 1, max_depth, pieces);
    adaptive_gk_rec(f, m, b, 0.5 * abs_tol, depth + 1, max_depth, pieces);
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration on (a, b).  Nodes are interior, so
/// integrable endpoint behaviour is tolerated, but resolving a genuine power
/// singularity this way is slow; see integrate_power_singular below.
template <class F>
double adaptive_integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                          int max_depth = 48) {
    if (a == b) return 0.0;
    auto coarse = detail::gk15(f, a, b);
    double scale = std::max(std::abs(coarse.value), 1e-300);
    std::vector<double> pieces;
    detail::adaptive_gk_rec(f, a, b, rel_tol * scale, 0, max_depth, pieces);
    return pairwise_sum(pieces);
}

/// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        nodes.resize(n);
        weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double c = 0.5 * (a + b), half = 0.5 * (b - a);
        CompensatedSum s;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            s.add(weights[i] * f(c + half * nodes[i]));
        return s.value() * half;
    }
};

/// A power behaviour f ~ (t - location)^exponent (one-sided) of an integrand.
struct PowerSingularity {
    double location;
    double exponent;
};

namespace detail {

/// Substitution exponent removing an endpoint singularity t^e: with t = s^m,
/// the transformed integrand behaves like s^{m(1+e)-1}; m is chosen so that
/// power is >= 2.
inline double substitution_order(double exponent) {
    if (exponent >= 0.0) return 1.0;
    return std::max(1.0, 3.0 / (1.0 + exponent));
}

/// Integrate f over [a, b] where f may have integrable power singularities at
/// one or both endpoints.  `ea`/`eb` are the local exponents (0 if regular).
template <class F, class Integrator>
double integrate_with_endpoint_powers(F&& f, double a, double b, double ea, double eb,
                                      Integrator&& integrate1d) {
    if (ea <= -1.0 || eb <= -1.0)
        throw divergence_error("power singularity with exponent <= -1 is not integrable");
    if (ea > 0.0) ea = 0.0;
    if (eb > 0.0) eb = 0.0;
    const bool sa = ea < 0.0, sb = eb < 0.0;
    if (!sa && !sb) return integrate1d(f, a, b);
    if (sa && sb) {
        double m = 0.5 * (a + b);
        return integrate_with_endpoint_powers(f, a, m, ea, 0.0, integrate1d) +
               integrate_with_endpoint_powers(f, m, b, 0.0, eb, integrate1d);
    }
    if (sa) {
        const double m = substitution_order(ea);
        const double len = b - a;
        auto g = [&](double s) {
            double t = a + len * std::pow(s, m);
            return f(t) * len * m * std::pow(s, m - 1.0);
        };
        return integrate1d(g, 0.0, 1.0);
    }
    const double m = substitution_order(eb);
    const double len = b - a;
    auto g = [&](double s) {
        double t = b - len * std::pow(s, m);
        return f(t) * len * m * std::pow(s, m - 1.0);
    };
    return integrate1d(g, 0.0, 1.0);
}

} // namespace detail

/// Integrate f over (a, b) with known interior/endpoint power singularities,
/// using the s^m substitution to regularize each one, then adaptive GK.
template <class F>
double integrate_power_singular(F&& f, double a, double b,
                                std::span<const PowerSingularity> singularities,
                                double rel_tol = 1e-10) {
    // Collect split points: singular locations strictly inside, plus endpoints.
    std::vector<double> cuts{a, b};
    for (const auto& s : singularities) {
        if (s.location > a && s.location < b) cuts.push_back(s.location);
        if (s.exponent <= -1.0)
            throw divergence_error("integrand ~ t^e with e <= -1 at t = " +
                                   std::to_string(s.location));
    }
    std::sort(cuts.begin(), cuts.end());
    auto exponent_at = [&](double t) {
        for (const auto& s : singularities)
            if (s.location == t) return s.exponent;
        return 0.0;
    };
    auto integ = [&](auto&& g, double lo, double hi) {
        return adaptive_integrate(g, lo, hi, rel_tol);
    };
    CompensatedSum total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total.add(detail::integrate_with_endpoint_powers(f, cuts[i], cuts[i + 1],
                                                         exponent_at(cuts[i]),
                                                         exponent_at(cuts[i + 1]), integ));
    return total.value();
}

/// Same integral evaluated with a fixed-order Gauss-Legendre rule on each
/// regularized piece; an independent scheme used for cross checks.
template <class F>
double integrate_power_singular_gauss(F&& f, double a, double b,
                                      std::span<const PowerSingularity> singularities,
                                      int order) {
    std::vector<double> cuts{a, b};
    for (const auto& s : singularities) {
        if (s.location > a && s.location < b) cuts.push_back(s.location);
        if (s.exponent <= -1.0)
            throw divergence_error("integrand ~ t^e with e <= -1 at t = " +
                                   std::to_string(s.location));
    }
    std::sort(cuts.begin(), cuts.end());
    auto exponent_at = [&](double t) {
        for (const auto& s : singularities)
            if (s.location == t) return s.exponent;
        return 0.0;
    };
    GaussLegendre gl(order);
    auto integ = [&](auto&& g, double lo, double hi) { return gl.integrate(g, lo, hi); };
    CompensatedSum total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total.add(detail::integrate_with_endpoint_powers(f, cuts[i], cuts[i + 1],
                                                         exponent_at(cuts[i]),
                                                         exponent_at(cuts[i + 1]), integ));
    return total.value();
}

/// Result of a singular spherical-coordinate integral, with the two
/// refinement levels used to certify it.
struct SphericalResult {
    double value;
    double coarse;
    bool converged;
};

/// Integral over the unit ball in spherical coordinates,
///   n = 2: (rho, theta) in (0,1) x (0,2*pi),
///   n = 3: (rho, theta, phi) in (0,1) x (0,2*pi) x (0,pi),
/// where `f` receives (rho, angles) and must already contain the Jacobian.
/// `radial_exponent` is the power behaviour of f at rho = 0;
/// `angular` lists power singularities on the last angular axis.
/// Radial/angular substitutions remove the singularities; the integral is
/// evaluated at tolerance rel_tol and rel_tol/10 and both levels must agree.
inline SphericalResult spherical_quadrature(
    int n, const std::function<double(double, std::span<const double>)>& f,
    double radial_exponent, std::span<const PowerSingularity> angular,
    double rel_tol = 1e-6) {
    if (n != 2 && n != 3) throw std::invalid_argument("spherical_quadrature: n must be 2 or 3");
    if (radial_exponent <= -1.0)
        throw divergence_error("radial exponent <= -1: integral diverges at rho = 0");
    for (const auto& s : angular)
        if (s.exponent <= -1.0)
            throw divergence_error("angular exponent <= -1: integral diverges");

    auto run = [&](double tol) {
        const double inner_tol = 0.25 * tol;
        PowerSingularity rad{0.0, radial_exponent};
        std::vector<PowerSingularity> radial_sing{rad};
        if (n == 2) {
            auto outer = [&](double rho) {
                auto g = [&](double th) {
                    double angles[1] = {th};
                    return f(rho, std::span<const double>(angles, 1));
                };
                return integrate_power_singular(g, 0.0, 2.0 * pi, angular, inner_tol);
            };
            return integrate_power_singular(outer, 0.0, 1.0,
                                            std::span<const PowerSingularity>(radial_sing), tol);
        }
        auto outer = [&](double rho) {
            auto mid = [&](double th) {
                auto g = [&](double ph) {
                    double angles[2] = {th, ph};
                    return f(rho, std::span<const double>(angles, 2));
                };
                return integrate_power_singular(g, 0.0, pi, angular, inner_tol);
            };
            return adaptive_integrate(mid, 0.0, 2.0 * pi, inner_tol);
        };
        return integrate_power_singular(outer, 0.0, 1.0,
                                        std::span<const PowerSingularity>(radial_sing), tol);
    };

    double coarse = run(rel_tol);
    double fine = run(0.1 * rel_tol);
    double scale = std::max({std::abs(coarse), std::abs(fine), 1e-300});
    bool ok = std::abs(fine - coarse) <= rel_tol * scale;
    return {fine, coarse, ok};
}

} // namespace lavgap
