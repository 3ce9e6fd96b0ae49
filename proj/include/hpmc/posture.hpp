#pragma once

#include <optional>

#include "hpmc/arm_model.hpp"
#include "hpmc/types.hpp"

namespace hpmc {

// Joint-space realization of a hand target: where the wrist and elbow should
// sit so the hand link faces the task direction.
struct PostureTarget {
    Pose2 x_w;          // wrist position (and carried hand orientation)
    Pose2 x_a;          // elbow position
    Vec3 q_d;           // joint angles realizing the chain
    double phi_wt = 0;  // task direction angle
    bool rate_limited = false;  // true when q_d was clamped toward q_prev
};

// Hand-link alignment: pull the wrist back from the hand target along the
// task direction so the hand link points with it.
Pose2 wrist_target(const Pose2& x_d, const Vec2& w_t, double l_h);

struct IkOptions {
    int elbow_branch = 1;          // +1 or -1, the two elbow solutions
    double max_step = 0.02;        // per-call joint motion clamp, rad
    std::optional<Vec3> q_prev;    // previous posture for the rate limit
};

// Closed-form two-link inverse kinematics for the wrist point, then the hand
// angle; throws UnreachableTargetError outside the reachable annulus.
PostureTarget arm_ik(const Pose2& x_w, double phi_wt, const ArmParams& params,
                     const IkOptions& options = {});

// Transmissibility of the task direction through the translational Jacobian:
// w_t' * Jv * Jv' * w_t. Small values mean joint motion barely couples into
// the task direction, which is what the posture choice drives toward.
double posture_objective(const Vec3& q, const Vec2& w_t, const ArmParams& params);

}  // namespace hpmc
