#pragma once

#include <array>

#include "hpmc/arm_model.hpp"
#include "hpmc/fic.hpp"
#include "hpmc/posture.hpp"
#include "hpmc/types.hpp"

namespace hpmc {

// Gains for the lower control hierarchy: per-link task-space controllers
// pulling each link end toward its posture target, plus per-joint torque
// controllers tracking the resulting posture.
struct StackParams {
    // task-space effort curves for the elbow, wrist and hand end points
    std::array<ForceProfile, 3> link_profiles;
    std::array<double, 3> joint_x1{0.01, 0.01, 0.01};  // rad, first-plateau onset
    std::array<double, 3> joint_x2{0.05, 0.05, 0.05};  // rad, first-plateau end
    std::array<double, 3> t_amax{60.0, 30.0, 10.0};    // N*m actuation ceilings
    double control_rate = 1000.0;                      // Hz
    // torque-limit rows from the full hand Jacobian instead of per-link ones
    bool literal_limit_rows = false;

    static StackParams defaults();
    void validate() const;
};

// Controller memory carried between ticks: one FIC per link axis, one per
// joint, and the previous errors used for error-rate estimates.
struct StackState {
    std::array<std::array<FicState, 2>, 3> link_fics{};
    std::array<std::array<double, 2>, 3> link_prev_err{};
    std::array<FicState, 3> joint_fics{};
    std::array<double, 3> joint_prev_err{};
    bool primed = false;
};

StackState make_stack_state();

// Desired wrenches at the three link end points (moments stay zero; the
// attractors act on positions).
struct LinkWrenches {
    Wrench2 arm;
    Wrench2 forearm;
    Wrench2 hand;
};

struct ControlOutput {
    Vec3 tau_applied = Vec3::Zero();  // joint torques handed to the plant
    LinkWrenches w_ld;                // per-link desired wrenches
    Vec3 t_d = Vec3::Zero();          // coordination torques
    Vec3 t_max = Vec3::Zero();        // live torque ceilings
    Vec3 q_d = Vec3::Zero();          // posture joint targets
    Vec2 hand_error = Vec2::Zero();   // hand target minus hand position
    Vec3 joint_error = Vec3::Zero();  // q_d minus q
};

// Per-link attractors: each link end is pulled toward its posture target
// (hand toward the planned hand point x_d) through a saturating FIC per axis.
LinkWrenches region_of_attraction(const StackParams& params, StackState& state,
                                  const ArmParams& arm, const ArmState& arm_state,
                                  const PostureTarget& posture, const Pose2& x_d);

// Torque coordination: anticipative hand-wrench tracking through the hand
// Jacobian, plus live per-joint torque ceilings derived from the link
// wrenches each joint actually carries.
void joints_coordination(const StackParams& params, const ArmParams& arm,
                         const ArmState& arm_state, const LinkWrenches& w_ld,
                         const Wrench2& w_measured, Vec3* t_d, Vec3* t_max);

// Per-joint FIC with a two-plateau torque profile: hold |t_d| while the joint
// error is acceptable, escalate to t_max when it grows.
Vec3 joint_controllers(const StackParams& params, StackState& state,
                       const ArmState& arm_state, const Vec3& q_d,
                       const Vec3& t_d, const Vec3& t_max);

// One 1 kHz control-law evaluation composing the three stages above.
ControlOutput control_tick(const StackParams& params, StackState& state,
                           const ArmParams& arm, const ArmState& arm_state,
                           const PostureTarget& posture, const Pose2& x_d,
                           const Wrench2& w_measured);

}  // namespace hpmc
