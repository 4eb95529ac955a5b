#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lavgap/weights.hpp"

using namespace lavgap;

namespace {
const PairBudget kFull{std::size_t(-1), 5.0}; // brute force over all pairs
}

TEST_CASE("power weights evaluate the distance power") {
    Weight w1 = power_weight(1.0);
    CHECK(w1.eval({0.3, 0.4}) == Catch::Approx(0.5).epsilon(1e-14));
    Weight w2 = power_weight(2.0);
    CHECK(w2.eval({1.0, 0.0}) == Catch::Approx(1.0).epsilon(1e-14));
    Weight wh = power_weight(0.5);
    CHECK(wh.eval({0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(power_weight(0.0), std::invalid_argument);
}

TEST_CASE("class-constant estimation") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 32);

    SECTION("constant weights have constant exactly 1") {
        for (double kappa : {0.5, 1.0, 3.0}) {
            ZkEstimate e = zk_constant_estimate(constant_weight(1.0), kappa, mesh);
            CHECK(e.constant == 1.0);
        }
    }
    SECTION("|x| at kappa 1: triangle inequality gives 1, brute-force oracle") {
        ZkEstimate impl = zk_constant_estimate(power_weight(1.0), 1.0, mesh);
        ZkEstimate oracle = zk_constant_estimate(power_weight(1.0), 1.0, mesh, kFull);
        CHECK(oracle.constant >= 1.0);
        CHECK(oracle.constant <= 1.02);
        CHECK(impl.constant == Catch::Approx(oracle.constant).margin(0.02));
    }
    SECTION("|x|^2 at kappa 2: maximizer y = x/2 gives 2, brute-force oracle") {
        ZkEstimate impl = zk_constant_estimate(power_weight(2.0), 2.0, mesh);
        ZkEstimate oracle = zk_constant_estimate(power_weight(2.0), 2.0, mesh, kFull);
        CHECK(oracle.constant == Catch::Approx(2.0).margin(0.05));
        CHECK(impl.constant == Catch::Approx(oracle.constant).margin(0.05));
    }
    SECTION("negative weights are rejected") {
        Weight bad;
        bad.eval = [](Vec2 p) { return p.x; };
        CHECK_THROWS_AS(zk_constant_estimate(bad, 1.0, mesh), invalid_weight_error);
    }
    SECTION("estimate is monotone under budget enrichment") {
        const Weight w = power_weight(2.0);
        const double small =
            zk_constant_estimate(w, 2.0, mesh, PairBudget{200000, 5.0}).constant;
        const double large =
            zk_constant_estimate(w, 2.0, mesh, PairBudget{2000000, 5.0}).constant;
        CHECK(small <= large + 1e-15);
        CHECK(large <= zk_constant_estimate(w, 2.0, mesh, kFull).constant + 1e-15);
    }
}

TEST_CASE("scale monotonicity on a domain of diameter one") {
    Mesh mesh = build_disk_mesh(0.5, 1.0 / 16);
    Weight lin;
    lin.eval = [](Vec2 p) { return 1.0 + std::sin(p.x) * std::sin(p.x); };
    lin.sup_bound = 2.0;
    for (const Weight& w : {power_weight(1.0), power_weight(2.0), lin}) {
        double prev = 0.0;
        for (double kappa : {0.5, 1.0, 2.0, 4.0}) {
            const double c = zk_constant_estimate(w, kappa, mesh).constant;
            CHECK(c >= prev - 1e-15);
            prev = c;
        }
    }
}

TEST_CASE("weights bounded below never diverge") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 24);
    Weight w;
    w.eval = [](Vec2 p) { return 1.0 + norm(p); };
    w.sup_bound = 2.0;
    for (double kappa : {0.5, 2.0, 5.0}) {
        const double c = zk_constant_estimate(w, kappa, mesh).constant;
        CHECK(c <= 2.0 + 1e-12); // sup a / inf a
    }
    const double hs[] = {1.0 / 8, 1.0 / 12, 1.0 / 16};
    CHECK(zk_membership_verdict(w, 3.0, hs).stable);
}

TEST_CASE("membership refinement studies") {
    const double hs[] = {1.0 / 8, 1.0 / 16, 1.0 / 32};

    SECTION("|x| at its own scale is stable") {
        MembershipVerdict v = zk_membership_verdict(power_weight(1.0), 1.0, hs);
        CHECK(v.stable);
        CHECK(std::abs(v.fitted_exponent) <= 0.05);
    }
    SECTION("|x| tested half a scale too high diverges like h^{-1/2}") {
        MembershipVerdict v = zk_membership_verdict(power_weight(1.0), 1.5, hs);
        CHECK_FALSE(v.stable);
        CHECK(v.fitted_exponent == Catch::Approx(0.5).margin(0.15));
    }
    SECTION("superpolynomial decay passes every power scale") {
        MembershipVerdict v = zk_membership_verdict(superpolynomial_decay_weight(), 5.0, hs);
        CHECK(v.stable);
    }
    SECTION("parameter validation") {
        const double bad_order[] = {1.0 / 16, 1.0 / 8, 1.0 / 32};
        CHECK_THROWS_AS(zk_membership_verdict(power_weight(1.0), 1.0, bad_order),
                        std::invalid_argument);
        const double too_few[] = {1.0 / 8, 1.0 / 16};
        CHECK_THROWS_AS(zk_membership_verdict(power_weight(1.0), 1.0, too_few),
                        std::invalid_argument);
    }
}

TEST_CASE("generalized modulus constants") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 16);

    SECTION("power modulus reproduces the power-scale constant exactly") {
        const Weight w = power_weight(1.0);
        ZkEstimate a = zk_constant_estimate(w, 1.0, mesh);
        ZkEstimate b = zomega_constant_estimate(w, power_modulus(1.0), mesh);
        CHECK(a.constant == b.constant);
        CHECK(a.witness == b.witness);
    }
    SECTION("zero weight gives the 0/0 convention value 1") {
        CHECK(zomega_constant_estimate(constant_weight(0.0), power_modulus(2.0), mesh)
                  .constant == 1.0);
    }
    SECTION("|x| against t^2 diverges under refinement") {
        const Weight w = power_weight(1.0);
        const Modulus m = power_modulus(2.0);
        const double c16 =
            zomega_constant_estimate(w, m, build_disk_mesh(1.0, 1.0 / 16)).constant;
        const double c32 =
            zomega_constant_estimate(w, m, build_disk_mesh(1.0, 1.0 / 32)).constant;
        CHECK(c32 >= 1.5 * c16); // ratio with y = 0 scales like 1/h
    }
    SECTION("invalid modulus") {
        Modulus bad{[](double) { return 1.0; }, "const"};
        CHECK_THROWS_AS(zomega_constant_estimate(power_weight(1.0), bad, mesh),
                        invalid_modulus_error);
    }
}

TEST_CASE("power rule consistency") {
    const double hs[] = {1.0 / 8, 1.0 / 16, 1.0 / 32};

    SECTION("|x| with beta = 2") {
        PowerRuleReport r = power_rule_check(power_weight(1.0), 1.0, 2.0, hs);
        CHECK(r.consistent);
        CHECK(r.base_verdict.stable);
        CHECK(r.powered_verdict.stable);
        CHECK(r.powered.constant == Catch::Approx(2.0).margin(0.05));
    }
    SECTION("constant weight") {
        PowerRuleReport r = power_rule_check(constant_weight(1.0), 2.0, 0.5, hs);
        CHECK(r.consistent);
        CHECK(r.base.constant == 1.0);
        CHECK(r.powered.constant == 1.0);
    }
}

TEST_CASE("root Lipschitz certificate") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 24);

    SECTION("|x|^kappa roots back to |x| with seminorm 1") {
        const double s = root_lipschitz_check(power_weight(1.5), 1.5, mesh);
        CHECK(s == Catch::Approx(1.0).margin(0.02));
    }
    SECTION("square-root cusp diverges under refinement") {
        const Weight w = power_weight(0.75); // a^{1/1.5} = |x|^{1/2}
        const double s16 = root_lipschitz_check(w, 1.5, build_disk_mesh(1.0, 1.0 / 16));
        const double s32 = root_lipschitz_check(w, 1.5, build_disk_mesh(1.0, 1.0 / 32));
        CHECK(s32 >= 1.2 * s16);
    }
}

TEST_CASE("derivative-decay (Glaeser) check") {
    Mesh mesh = build_disk_mesh(1.0, 1.0 / 16);

    SECTION("|x|^2 at alpha 1: |grad a| = 2 a^{1/2}") {
        const double c = glaeser_check(power_weight(2.0), 1.0, mesh);
        CHECK(c == Catch::Approx(2.0).margin(0.01));
    }
    SECTION("positive constants have zero constant") {
        CHECK(glaeser_check(constant_weight(3.0), 1.0, mesh) == 0.0);
    }
    SECTION("zero with nonvanishing gradient is a violation") {
        Weight w;
        w.eval = [](Vec2 p) { return norm(p); };
        w.grad = [](Vec2 p) {
            const double r = norm(p);
            return r == 0.0 ? Vec2{1.0, 0.0} : p / r;
        };
        CHECK(std::isinf(glaeser_check(w, 1.0, mesh)));
    }
    SECTION("smooth example is exactly quadratic, not better") {
        // stable at scale 2, diverging at 2.2
        const double hs[] = {1.0 / 8, 1.0 / 16, 1.0 / 32};
        CHECK(zk_membership_verdict(power_weight(2.0), 2.0, hs).stable);
        CHECK_FALSE(zk_membership_verdict(power_weight(2.0), 2.2, hs).stable);
    }
}
