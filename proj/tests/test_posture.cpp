#include "hpmc/posture.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "hpmc/arm_model.hpp"

using namespace hpmc;

namespace {

Vec2 dir(double phi) { return Vec2(std::cos(phi), std::sin(phi)); }

double cross2(const Vec2& a, const Vec2& b) {
    return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

TEST_CASE("wrist target backs the hand link off along the task direction") {
    const Pose2 hand{0.3, 0.0, 0.0};
    const Pose2 w = wrist_target(hand, Vec2(1.0, 0.0), 0.044);
    CHECK(w.x == doctest::Approx(0.256).epsilon(1e-12));
    CHECK(w.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(w.phi == doctest::Approx(0.0));

    const Pose2 hand2{0.3, 0.1, 0.0};
    const Pose2 w2 = wrist_target(hand2, Vec2(0.0, 1.0), 0.044);
    CHECK(w2.x == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(w2.y == doctest::Approx(0.056).epsilon(1e-12));
    CHECK(w2.phi == doctest::Approx(kPi / 2.0));
}

TEST_CASE("wrist target offset property for random directions") {
    std::mt19937 rng(71u);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::uniform_real_distribution<double> pos(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
        const Pose2 hand{pos(rng), pos(rng), 0.0};
        const Vec2 w_t = dir(ang(rng));
        const Pose2 w = wrist_target(hand, w_t, 0.044);
        const Vec2 back = hand.position() - w.position();
        CHECK((back - 0.044 * w_t).norm() < 1e-15);
        CHECK(std::abs(wrap_angle(w.phi - std::atan2(w_t.y(), w_t.x()))) < 1e-15);
    }
}

TEST_CASE("wrist target rejects bad inputs") {
    CHECK_THROWS_AS(wrist_target(Pose2{}, Vec2(0.5, 0.0), 0.044), ConfigError);
    CHECK_THROWS_AS(wrist_target(Pose2{}, Vec2(1.0, 0.0), 0.0), ConfigError);
    CHECK_THROWS_AS(wrist_target(Pose2{}, Vec2(1.0, 0.0), -0.01), ConfigError);
}

TEST_CASE("inverse kinematics reference postures") {
    const ArmParams params = ArmParams::defaults();
    const double l_a = params.link_lengths[0];
    const double l_fa = params.link_lengths[1];

    SUBCASE("full extension along +x") {
        const PostureTarget t = arm_ik(Pose2{l_a + l_fa, 0.0, 0.0}, 0.0, params);
        CHECK(std::abs(t.q_d[0]) < 1e-7);
        CHECK(std::abs(t.q_d[1]) < 1e-7);
        CHECK(std::abs(t.q_d[2]) < 1e-7);
        CHECK_FALSE(t.rate_limited);
    }

    SUBCASE("right-angle elbow") {
        const PostureTarget t = arm_ik(Pose2{l_a, l_fa, 0.0}, kPi / 2.0, params);
        CHECK(std::abs(t.q_d[0]) < 1e-9);
        CHECK(t.q_d[1] == doctest::Approx(kPi / 2.0).epsilon(1e-12));
        CHECK(std::abs(t.q_d[2]) < 1e-9);
    }

    SUBCASE("mirrored elbow branch") {
        IkOptions opt;
        opt.elbow_branch = -1;
        const PostureTarget t = arm_ik(Pose2{l_a, l_fa, 0.0}, kPi / 2.0, params, opt);
        CHECK(t.q_d[1] == doctest::Approx(-kPi / 2.0).epsilon(1e-12));
        const LinkPoses fk = forward_kinematics(params, t.q_d);
        CHECK(std::abs(fk.wrist.x - l_a) < 1e-12);
        CHECK(std::abs(fk.wrist.y - l_fa) < 1e-12);
    }
}

TEST_CASE("inverse kinematics rejects unreachable wrist points") {
    const ArmParams params = ArmParams::defaults();
    CHECK_THROWS_AS(arm_ik(Pose2{0.6, 0.0, 0.0}, 0.0, params), UnreachableTargetError);
    CHECK_THROWS_AS(arm_ik(Pose2{0.0, 0.01, 0.0}, 0.0, params), UnreachableTargetError);
    CHECK_THROWS_AS(arm_ik(Pose2{0.0, 0.0, 0.0}, 0.0, params), UnreachableTargetError);

    IkOptions opt;
    opt.elbow_branch = 2;
    CHECK_THROWS_AS(arm_ik(Pose2{0.3, 0.0, 0.0}, 0.0, params, opt), ConfigError);
}

TEST_CASE("inverse kinematics round-trips through forward kinematics") {
    const ArmParams params = ArmParams::defaults();
    const double l_a = params.link_lengths[0];
    const double l_fa = params.link_lengths[1];
    const double l_h = params.link_lengths[2];
    std::mt19937 rng(1234u);
    std::uniform_real_distribution<double> rad(std::abs(l_a - l_fa) + 1e-6,
                                               l_a + l_fa - 1e-6);
    std::uniform_real_distribution<double> ang(-kPi, kPi);

    for (int i = 0; i < 500; ++i) {
        const double r = rad(rng);
        const double theta = ang(rng);
        const double phi_wt = ang(rng);
        const Pose2 x_w{r * std::cos(theta), r * std::sin(theta), 0.0};
        for (int branch : {1, -1}) {
            IkOptions opt;
            opt.elbow_branch = branch;
            const PostureTarget t = arm_ik(x_w, phi_wt, params, opt);
            const LinkPoses fk = forward_kinematics(params, t.q_d);
            CHECK((fk.wrist.position() - x_w.position()).norm() < 1e-9);
            CHECK((fk.elbow.position() - t.x_a.position()).norm() < 1e-12);
            const Vec2 hand_expect = x_w.position() + l_h * dir(phi_wt);
            CHECK((fk.hand.position() - hand_expect).norm() < 1e-9);
            CHECK(std::abs(wrap_angle(fk.hand.phi - phi_wt)) < 1e-9);
            CHECK(std::abs(wrap_angle(t.phi_wt - phi_wt)) < 1e-9);
        }
    }
}

TEST_CASE("rate limiter clamps joint motion per call") {
    const ArmParams params = ArmParams::defaults();
    const Pose2 x_w{0.25, 0.25, 0.0};
    const PostureTarget free_t = arm_ik(x_w, 0.8, params);

    SUBCASE("far previous posture gets clamped toward the solution") {
        IkOptions opt;
        opt.q_prev = Vec3(0.0, 0.0, 0.0);
        const PostureTarget t = arm_ik(x_w, 0.8, params, opt);
        CHECK(t.rate_limited);
        for (int i = 0; i < 3; ++i) {
            const double step = wrap_angle(t.q_d[i] - (*opt.q_prev)[i]);
            CHECK(std::abs(step) <= opt.max_step + 1e-15);
            const double full = wrap_angle(free_t.q_d[i] - (*opt.q_prev)[i]);
            if (std::abs(full) > opt.max_step) {
                CHECK(step == doctest::Approx(sign_of(full) * opt.max_step));
            } else {
                CHECK(t.q_d[i] == free_t.q_d[i]);
            }
        }
        // reported poses describe the clamped posture, not the request
        const LinkPoses fk = forward_kinematics(params, t.q_d);
        CHECK((fk.wrist.position() - t.x_w.position()).norm() < 1e-15);
        CHECK((fk.elbow.position() - t.x_a.position()).norm() < 1e-15);
        CHECK(t.phi_wt == fk.hand.phi);
    }

    SUBCASE("near previous posture passes through bit-exact") {
        IkOptions opt;
        opt.q_prev = Vec3(free_t.q_d[0] + 0.001, free_t.q_d[1] - 0.015,
                          free_t.q_d[2] + 0.019);
        const PostureTarget t = arm_ik(x_w, 0.8, params, opt);
        CHECK_FALSE(t.rate_limited);
        CHECK(t.q_d[0] == free_t.q_d[0]);
        CHECK(t.q_d[1] == free_t.q_d[1]);
        CHECK(t.q_d[2] == free_t.q_d[2]);
    }

    SUBCASE("steps chain to the solution in the expected number of calls") {
        Vec3 q = Vec3(0.0, 0.0, 0.0);
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            worst = std::max(worst, std::abs(wrap_angle(free_t.q_d[i] - q[i])));
        }
        const int expect_calls = static_cast<int>(std::ceil(worst / 0.02));
        int calls = 0;
        for (; calls < expect_calls + 2; ++calls) {
            IkOptions opt;
            opt.q_prev = q;
            const PostureTarget t = arm_ik(x_w, 0.8, params, opt);
            q = t.q_d;
            if (!t.rate_limited) break;
        }
        CHECK(calls <= expect_calls);
        CHECK(q[0] == free_t.q_d[0]);
        CHECK(q[1] == free_t.q_d[1]);
        CHECK(q[2] == free_t.q_d[2]);
    }

    SUBCASE("limit respects angle wrapping across the pi seam") {
        // build a wrist point whose solution has the shoulder near +pi, then
        // start from a previous posture just past the seam on the -pi side
        const Vec3 q_seam(3.13, 1.0, 0.5);
        const LinkPoses fk_seam = forward_kinematics(params, q_seam);
        const double phi_seam = fk_seam.hand.phi;
        const PostureTarget seam = arm_ik(fk_seam.wrist, phi_seam, params);
        REQUIRE(seam.q_d[0] == doctest::Approx(3.13).epsilon(1e-9));

        IkOptions opt;
        opt.q_prev = Vec3(wrap_angle(3.13 + 0.04), seam.q_d[1], seam.q_d[2]);
        REQUIRE((*opt.q_prev)[0] < 0.0);  // wrapped to the other side
        const PostureTarget t = arm_ik(fk_seam.wrist, phi_seam, params, opt);
        CHECK(t.rate_limited);
        const double step = wrap_angle(t.q_d[0] - (*opt.q_prev)[0]);
        CHECK(std::abs(step) <= opt.max_step + 1e-15);
        // moved the short way around: remaining gap shrank by the step size
        const double gap_before = std::abs(wrap_angle((*opt.q_prev)[0] - seam.q_d[0]));
        const double gap_after = std::abs(wrap_angle(t.q_d[0] - seam.q_d[0]));
        CHECK(gap_after == doctest::Approx(gap_before - opt.max_step).epsilon(1e-9));
        CHECK(std::abs(t.q_d[0]) <= kPi);
    }
}

TEST_CASE("inverse kinematics is continuous along a reaching path") {
    const ArmParams params = ArmParams::defaults();
    const Vec2 home(0.3, 0.0);
    const Vec2 goal(0.3 + 0.1 / std::sqrt(2.0), 0.1 / std::sqrt(2.0));
    const Vec2 w_t = (goal - home).normalized();
    const double phi_wt = std::atan2(w_t.y(), w_t.x());

    Vec3 prev;
    bool have_prev = false;
    for (int k = 0; k <= 1000; ++k) {
        const double s = static_cast<double>(k) / 1000.0;
        const Vec2 hand = home + s * (goal - home);
        const Pose2 x_w = wrist_target(Pose2{hand.x(), hand.y(), 0.0}, w_t,
                                       params.link_lengths[2]);
        const PostureTarget t = arm_ik(x_w, phi_wt, params);
        if (have_prev) {
            for (int i = 0; i < 3; ++i) {
                CHECK(std::abs(wrap_angle(t.q_d[i] - prev[i])) < 0.02);
            }
        }
        prev = t.q_d;
        have_prev = true;
    }
}

TEST_CASE("posture objective matches the manipulability eigenstructure") {
    const ArmParams params = ArmParams::defaults();
    const Vec3 q(kPi / 4.0, -kPi / 2.0, kPi / 4.0);
    const ManipulabilityEllipsoid ell = manipulability_ellipsoid(params, q);
    REQUIRE_FALSE(ell.degenerate);

    const double along_major = posture_objective(q, ell.axes.col(0), params);
    const double along_minor = posture_objective(q, ell.axes.col(1), params);
    CHECK(along_major ==
          doctest::Approx(ell.axis_lengths[0] * ell.axis_lengths[0]).epsilon(1e-10));
    CHECK(along_minor ==
          doctest::Approx(ell.axis_lengths[1] * ell.axis_lengths[1]).epsilon(1e-10));
    CHECK(along_minor <= along_major);

    // Rayleigh quotient bounds for arbitrary directions
    std::mt19937 rng(9u);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 100; ++i) {
        const double g = posture_objective(q, dir(ang(rng)), params);
        CHECK(g >= along_minor - 1e-12);
        CHECK(g <= along_major + 1e-12);
    }

    CHECK(posture_objective(q, Vec2(0.0, 1.0), params) ==
          posture_objective(q, Vec2(0.0, -1.0), params));
    CHECK_THROWS_AS(posture_objective(q, Vec2(0.3, 0.3), params), ConfigError);
}

TEST_CASE("aligned posture zeroes the hand-link term of the objective") {
    const ArmParams params = ArmParams::defaults();
    std::mt19937 rng(55u);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::uniform_real_distribution<double> rad(0.2, 0.42);
    for (int i = 0; i < 100; ++i) {
        const double phi = ang(rng);
        const Vec2 w_t = dir(phi);
        const Vec2 hand = rad(rng) * dir(ang(rng));
        const Pose2 x_w =
            wrist_target(Pose2{hand.x(), hand.y(), 0.0}, w_t, params.link_lengths[2]);
        const PostureTarget t = arm_ik(x_w, x_w.phi, params);
        const LinkPoses fk = forward_kinematics(params, t.q_d);
        const Vec2 hand_link = fk.hand.position() - fk.wrist.position();
        CHECK(std::abs(cross2(hand_link, w_t)) < 1e-12);
    }
}

TEST_CASE("objective of the aligned posture across the hand self-motion circle") {
    // Hand position held at (0.4, 0), task direction +x. The wrist may sit
    // anywhere on the circle of radius l_H around the hand, parameterized by
    // the hand-link angle psi; each psi admits two elbow branches. Sampling
    // that one-parameter family shows where the aligned choice sits in it.
    const ArmParams params = ArmParams::defaults();
    const Vec2 hand(0.4, 0.0);
    const Vec2 w_t(1.0, 0.0);

    const Pose2 x_w = wrist_target(Pose2{hand.x(), hand.y(), 0.0}, w_t,
                                   params.link_lengths[2]);
    const PostureTarget aligned = arm_ik(x_w, x_w.phi, params);
    const double g_aligned = posture_objective(aligned.q_d, w_t, params);
    CHECK(g_aligned == doctest::Approx(0.044157288).epsilon(1e-6));

    std::mt19937 rng(2026u);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
    std::bernoulli_distribution coin(0.5);
    double g_min = g_aligned;
    int accepted = 0;
    while (accepted < 10000) {
        const double psi = ang(rng);
        const Vec2 wrist = hand - params.link_lengths[2] * dir(psi);
        const double r = wrist.norm();
        if (r < std::abs(params.link_lengths[0] - params.link_lengths[1]) + 1e-6 ||
            r > params.link_lengths[0] + params.link_lengths[1] - 1e-6) {
            continue;
        }
        IkOptions opt;
        opt.elbow_branch = coin(rng) ? 1 : -1;
        const PostureTarget s = arm_ik(Pose2{wrist.x(), wrist.y(), 0.0}, psi,
                                       params, opt);
        const LinkPoses fk = forward_kinematics(params, s.q_d);
        REQUIRE((fk.hand.position() - hand).norm() < 1e-9);
        g_min = std::min(g_min, posture_objective(s.q_d, w_t, params));
        ++accepted;
    }

    // The family's true minimum bends the hand link backward (hand link at
    // about 147 degrees to the task direction); the aligned posture is not
    // the family minimizer, it trades this score for facing the task.
    CHECK(g_min == doctest::Approx(0.0245014).epsilon(2e-3));
    CHECK(g_min < g_aligned - 0.015);

    // Restricted to postures whose hand link faces the task direction, the
    // two elbow branches tie here by up-down symmetry.
    IkOptions mirror;
    mirror.elbow_branch = -1;
    const PostureTarget other = arm_ik(x_w, x_w.phi, params, mirror);
    CHECK(posture_objective(other.q_d, w_t, params) ==
          doctest::Approx(g_aligned).epsilon(1e-12));

    // Off-axis target: the branches split and the default wins clearly.
    const Vec2 hand45(0.3 + 0.1 / std::sqrt(2.0), 0.1 / std::sqrt(2.0));
    const Vec2 w45 = (hand45 - Vec2(0.3, 0.0)).normalized();
    const Pose2 xw45 = wrist_target(Pose2{hand45.x(), hand45.y(), 0.0}, w45,
                                    params.link_lengths[2]);
    const PostureTarget b_plus = arm_ik(xw45, xw45.phi, params);
    const PostureTarget b_minus = arm_ik(xw45, xw45.phi, params, mirror);
    const double g_plus = posture_objective(b_plus.q_d, w45, params);
    const double g_minus = posture_objective(b_minus.q_d, w45, params);
    CHECK(g_plus == doctest::Approx(0.049864349).epsilon(1e-6));
    CHECK(g_minus == doctest::Approx(0.117295397).epsilon(1e-6));
    CHECK(g_plus < g_minus);
}
