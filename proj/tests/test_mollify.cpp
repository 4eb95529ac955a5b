#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lavgap/mollify.hpp"
#include "lavgap/quadrature.hpp"

using namespace lavgap;

namespace {

double tent(Vec2 p) { return std::max(0.0, 1.0 - 2.0 * norm(p)); }

double bump(Vec2 p) {
    const double r2 = norm2(p) / 0.36; // support radius 0.6
    return r2 >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - r2));
}

GridFunction random_zero_boundary_field(const Mesh& mesh, std::mt19937& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    GridFunction v(mesh);
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
        v.values[i] = unif(rng) * std::max(0.0, 1.0 - norm2(mesh.nodes[i]));
    for (int b : mesh.boundary_nodes) v.values[static_cast<std::size_t>(b)] = 0.0;
    return v;
}

} // namespace

TEST_CASE("kernel normalization and gradient mass") {
    for (int n : {2, 3}) {
        Kernel k = make_kernel(n);
        const double surface = n == 2 ? 2.0 * pi : 4.0 * pi;
        const double mass = surface * adaptive_integrate(
                                          [&](double r) {
                                              return k.profile(r) * std::pow(r, n - 1);
                                          },
                                          0.0, 1.0, 1e-12);
        CHECK(mass == Catch::Approx(1.0).margin(1e-6));
        CHECK(k.profile(0.0) <= 1.0);
        CHECK(k.profile(0.0) > 0.0);
        CHECK(k.profile(1.0) == 0.0);
        CHECK(k.eval({0.3, 0.0}) == k.eval({-0.3, 0.0}));
        CHECK(k.grad_l1 > 0.0);
    }
    SECTION("gradient mass reproduced at two quadrature resolutions") {
        Kernel k = make_kernel(2);
        auto radial = [&](double r) {
            const double s = 1.0 - r * r;
            return k.profile(r) * 2.0 * r / (s * s) * r;
        };
        const double a = GaussLegendre(40).integrate(radial, 0.0, 1.0) * 2.0 * pi;
        const double b = GaussLegendre(80).integrate(radial, 0.0, 1.0) * 2.0 * pi;
        CHECK(std::abs(a - b) <= 1e-4 * std::abs(b));
        CHECK(k.grad_l1 == Catch::Approx(b).epsilon(1e-6));
    }
}

TEST_CASE("mollifier parameter validation") {
    Domain dom = make_ball_domain(1.0); // star radius 0.9
    Kernel k = make_kernel(2);
    CHECK_THROWS_AS(make_shrink_mollifier(0.3, dom, k), std::invalid_argument);
    CHECK_THROWS_AS(make_shrink_mollifier(0.0, dom, k), std::invalid_argument);
    ShrinkMollifier m = make_shrink_mollifier(0.1, dom, k);
    CHECK(m.kappa_delta == Catch::Approx(1.0 - 0.1 / 0.9));
    CHECK(m.kappa_delta > 0.75);
    CHECK(m.kappa_delta < 1.0);
}

TEST_CASE("nodal mollification") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 32);
    Kernel k = make_kernel(2);

    SECTION("zero maps to zero") {
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        GridFunction z(mesh);
        GridFunction sz = apply(m, z);
        CHECK(sz.max_abs() == 0.0);
    }
    SECTION("boundary-violating input is rejected") {
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        GridFunction v = GridFunction::sample(mesh, [](Vec2) { return 1.0; });
        CHECK_THROWS_AS(apply(m, v), std::invalid_argument);
    }
    SECTION("L1 convergence of the tent family") {
        GridFunction v = GridFunction::sample(mesh, tent);
        double prev = std::numeric_limits<double>::infinity();
        for (double delta : {0.2, 0.1, 0.05}) {
            ShrinkMollifier m = make_shrink_mollifier(delta, mesh.domain, k);
            const double err = l1_distance(apply(m, v), v);
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev <= 0.08); // delta = 0.05 is already close
    }
    SECTION("compact support: zero at all nodes within h of the boundary") {
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        GridFunction sv = apply(m, GridFunction::sample(mesh, tent));
        for (std::size_t i = 0; i < mesh.node_count(); ++i)
            if (norm(mesh.nodes[i]) >= 1.0 - mesh.h - 1e-12)
                CHECK(sv.values[i] == 0.0);
    }
    SECTION("full-support fields vanish outside the shrunk radius") {
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        GridFunction v =
            GridFunction::sample(mesh, [](Vec2 p) { return 1.0 - norm2(p); });
        for (int b : mesh.boundary_nodes) v.values[static_cast<std::size_t>(b)] = 0.0;
        GridFunction sv = apply(m, v);
        const double reach = m.kappa_delta + m.delta; // support bound for ball data
        for (std::size_t i = 0; i < mesh.node_count(); ++i) {
            if (norm(mesh.nodes[i]) > reach + 1e-12) CHECK(sv.values[i] == 0.0);
        }
        // margin formula for ball domains
        CHECK(support_margin(m, mesh.domain) ==
              Catch::Approx(1.0 - reach).epsilon(1e-12));
    }
    SECTION("linearity and sup-norm contraction") {
        std::mt19937 rng(99u);
        ShrinkMollifier m = make_shrink_mollifier(0.08, mesh.domain, k);
        GridFunction a = random_zero_boundary_field(mesh, rng);
        GridFunction b = random_zero_boundary_field(mesh, rng);
        GridFunction combo(mesh);
        for (std::size_t i = 0; i < mesh.node_count(); ++i)
            combo.values[i] = 2.0 * a.values[i] - 0.5 * b.values[i];
        GridFunction sa = apply(m, a), sb = apply(m, b), sc = apply(m, combo);
        for (std::size_t i = 0; i < mesh.node_count(); ++i)
            CHECK(sc.values[i] ==
                  Catch::Approx(2.0 * sa.values[i] - 0.5 * sb.values[i]).margin(1e-12));
        CHECK(sa.max_abs() <= a.max_abs() + 1e-12);
        CHECK(sb.max_abs() <= b.max_abs() + 1e-12);
    }
}

TEST_CASE("gradient identity residual") {
    Kernel k = make_kernel(2);

    SECTION("zero field gives zero residual") {
        Mesh mesh = build_disk_mesh(1.0, 1.0 / 16);
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        CHECK(gradient_identity_residual(m, GridFunction(mesh)) == 0.0);
    }
    SECTION("residual shrinks under h-refinement for the smooth bump") {
        Mesh coarse = build_disk_mesh(1.0, 1.0 / 32);
        Mesh fine = build_disk_mesh(1.0, 1.0 / 64);
        ShrinkMollifier m = make_shrink_mollifier(0.2, coarse.domain, k);
        const double rc =
            gradient_identity_residual(m, GridFunction::sample(coarse, bump));
        const double rf = gradient_identity_residual(m, GridFunction::sample(fine, bump));
        CHECK(rf <= rc / 1.5);
    }
}

TEST_CASE("sup-norm gradient bound") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 32);
    Kernel k = make_kernel(2);

    SECTION("bound formula") {
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        GridFunction v = GridFunction::sample(mesh, tent);
        BoundReport r = linf_grad_bound_check(m, v);
        CHECK(r.bound == Catch::Approx(10.0 * k.grad_l1).epsilon(1e-12));
        CHECK(r.pass);
    }
    SECTION("random fields at two scales never violate the bound") {
        std::mt19937 rng(20240811u);
        for (double delta : {0.05, 0.1}) {
            ShrinkMollifier m = make_shrink_mollifier(delta, mesh.domain, k);
            for (int trial = 0; trial < 3; ++trial) {
                GridFunction v = random_zero_boundary_field(mesh, rng);
                CHECK(linf_grad_bound_check(m, v).pass);
            }
        }
    }
    SECTION("zero field passes trivially") {
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        BoundReport r = linf_grad_bound_check(m, GridFunction(mesh));
        CHECK(r.measured == 0.0);
        CHECK(r.pass);
    }
}

TEST_CASE("Hoelder gradient bound") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 32);
    Kernel k = make_kernel(2);

    SECTION("Lipschitz tent at gamma 1: bound is delta-free up to kappa") {
        GridFunction v = GridFunction::sample(mesh, tent);
        double scaled_bound = 0.0;
        for (double delta : {0.05, 0.1}) {
            ShrinkMollifier m = make_shrink_mollifier(delta, mesh.domain, k);
            BoundReport r = holder_grad_bound_check(m, v, 1.0);
            CHECK(r.pass);
            // bound = [v]_1 ||grad rho||_L1 / kappa_delta with [v]_1 fixed
            if (scaled_bound == 0.0)
                scaled_bound = r.bound * m.kappa_delta;
            else
                CHECK(r.bound * m.kappa_delta ==
                      Catch::Approx(scaled_bound).epsilon(1e-12));
        }
    }
    SECTION("square-root profile at gamma 1/2") {
        GridFunction v = GridFunction::sample(
            mesh, [](Vec2 p) { return std::sqrt(std::max(0.0, 0.5 - norm(p))); });
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        CHECK(holder_grad_bound_check(m, v, 0.5).pass);
    }
    SECTION("zero field") {
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        BoundReport r = holder_grad_bound_check(m, GridFunction(mesh), 1.0);
        CHECK(r.measured == 0.0);
        CHECK(r.pass);
    }
}

TEST_CASE("Jensen-type domination at the nodes") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 32);
    Kernel k = make_kernel(2);
    GridFunction phi = GridFunction::sample(mesh, tent);

    SECTION("pure p-phase reduces to the plain Jensen bound") {
        DoublePhaseIntegrand di = make_double_phase(2.0, 3.0, constant_weight(0.0));
        ZkEstimate cert = zk_constant_estimate(di.a, 1.0, mesh);
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        JensenReport r = jensen_domination_check(m, phi, di, cert, true);
        CHECK(r.pass);
    }
    SECTION("double phase with |x| at its own scale") {
        DoublePhaseIntegrand di = make_double_phase(2.0, 3.0, power_weight(1.0));
        ZkEstimate cert = zk_constant_estimate(di.a, 1.0, mesh);
        for (double delta : {0.05, 0.1}) {
            ShrinkMollifier m = make_shrink_mollifier(delta, mesh.domain, k);
            JensenReport r = jensen_domination_check(m, phi, di, cert, true);
            CHECK(r.pass);
            CHECK(r.lhs_integral <= r.rhs_integral * 1.02 + 1e-12);
        }
    }
    SECTION("zero field is trivially dominated") {
        DoublePhaseIntegrand di = make_double_phase(2.0, 3.0, power_weight(1.0));
        ZkEstimate cert = zk_constant_estimate(di.a, 1.0, mesh);
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        JensenReport r = jensen_domination_check(m, GridFunction(mesh), di, cert, true);
        CHECK(r.pass);
    }
    SECTION("uncertified weights are refused") {
        DoublePhaseIntegrand di = make_double_phase(2.0, 3.0, power_weight(1.0));
        ZkEstimate cert = zk_constant_estimate(di.a, 1.0, mesh);
        ShrinkMollifier m = make_shrink_mollifier(0.1, mesh.domain, k);
        CHECK_THROWS_AS(jensen_domination_check(m, phi, di, cert, false),
                        std::invalid_argument);
    }
}
