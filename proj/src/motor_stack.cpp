#include "hpmc/motor_stack.hpp"

#include <cmath>

namespace hpmc {

namespace {

Vec2 perp(const Vec2& r) { return Vec2(-r.y(), r.x()); }

// FIC update for one axis with an error-rate estimate from the previous
// error; first tick after reset uses zero rate.
double axis_effort(const ForceProfile& profile, FicState& fic, double& prev_err,
                   bool primed, double err, double dt) {
    const double d_err = primed ? (err - prev_err) / dt : 0.0;
    prev_err = err;
    const FicResult r = fic_effort(profile, fic, err, d_err);
    fic = r.state;
    return r.effort;
}

}  // namespace

StackParams StackParams::defaults() {
    StackParams p;
    // hand gains tuned for sub-mm reference tracking on 0.1 m reaches; the
    // proximal links run at half strength, all with the knee at f_max / k0
    const double k0_hand = 24000.0;
    const double f_hand = 50.0;
    const double knee = f_hand / k0_hand;
    p.link_profiles[0] = ForceProfile::tanh_saturated(k0_hand / 2, f_hand / 2, knee);
    p.link_profiles[1] = ForceProfile::tanh_saturated(k0_hand / 2, f_hand / 2, knee);
    p.link_profiles[2] = ForceProfile::tanh_saturated(k0_hand, f_hand, knee);
    p.joint_x1 = {0.002, 0.002, 0.002};
    return p;
}

void StackParams::validate() const {
    for (const ForceProfile& profile : link_profiles) {
        profile.validate();
    }
    for (int i = 0; i < 3; ++i) {
        if (!(joint_x1[i] > 0.0) || !(joint_x2[i] > joint_x1[i])) {
            throw ConfigError("StackParams: joint plateau breakpoints need 0 < x1 < x2");
        }
        if (!(t_amax[i] > 0.0)) {
            throw ConfigError("StackParams: actuation torque limits must be positive");
        }
    }
    if (!(control_rate >= 100.0)) {
        throw ConfigError("StackParams: control_rate must be at least 100 Hz");
    }
}

StackState make_stack_state() { return StackState{}; }

LinkWrenches region_of_attraction(const StackParams& params, StackState& state,
                                  const ArmParams& arm, const ArmState& arm_state,
                                  const PostureTarget& posture, const Pose2& x_d) {
    const LinkPoses fk = forward_kinematics(arm, arm_state.q);
    const std::array<Vec2, 3> targets = {posture.x_a.position(), posture.x_w.position(),
                                         x_d.position()};
    const std::array<Vec2, 3> current = {fk.elbow.position(), fk.wrist.position(),
                                         fk.hand.position()};
    const double dt = 1.0 / params.control_rate;

    std::array<Wrench2, 3> w{};
    for (int link = 0; link < 3; ++link) {
        // errors run actual minus desired so positive effort pushes back
        const Vec2 err = current[link] - targets[link];
        double f[2];
        for (int axis = 0; axis < 2; ++axis) {
            f[axis] = axis_effort(params.link_profiles[link], state.link_fics[link][axis],
                                  state.link_prev_err[link][axis], state.primed,
                                  err[axis], dt);
        }
        w[link].fx = f[0];
        w[link].fy = f[1];
    }
    return LinkWrenches{w[0], w[1], w[2]};
}

void joints_coordination(const StackParams& params, const ArmParams& arm,
                         const ArmState& arm_state, const LinkWrenches& w_ld,
                         const Wrench2& w_measured, Vec3* t_d, Vec3* t_max) {
    const Mat3 j = geometric_jacobian(arm, arm_state.q);
    const Vec3 hand_wrench(2.0 * w_ld.hand.fx - w_measured.fx,
                           2.0 * w_ld.hand.fy - w_measured.fy, -w_measured.mz);
    *t_d = j.transpose() * hand_wrench;

    double lever1;
    double lever2;
    if (params.literal_limit_rows) {
        lever1 = j.col(0).head<2>().dot(w_ld.arm.force());
        lever2 = j.col(1).head<2>().dot(w_ld.forearm.force());
    } else {
        // each limit row uses the Jacobian of the link its wrench acts on
        const LinkPoses fk = forward_kinematics(arm, arm_state.q);
        lever1 = perp(fk.elbow.position()).dot(w_ld.arm.force());
        lever2 = perp(fk.wrist.position() - fk.elbow.position()).dot(w_ld.forearm.force());
    }
    const double lever3 = j.col(2).head<2>().dot(w_ld.hand.force());

    (*t_max)[0] = std::min(params.t_amax[0], std::abs(lever1));
    (*t_max)[1] = std::min(params.t_amax[1], std::abs(lever2));
    (*t_max)[2] = std::min(params.t_amax[2], 2.0 * std::abs(lever3));
}

Vec3 joint_controllers(const StackParams& params, StackState& state,
                       const ArmState& arm_state, const Vec3& q_d,
                       const Vec3& t_d, const Vec3& t_max) {
    const double dt = 1.0 / params.control_rate;
    Vec3 tau = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        if (t_max[i] <= 1e-12) {
            // ceiling closed: no authority for this joint, drop its memory
            state.joint_fics[i] = FicState{};
            state.joint_prev_err[i] = arm_state.q[i] - q_d[i];
            continue;
        }
        const double f_mid = std::min(std::abs(t_d[i]), t_max[i]);
        const ForceProfile profile = ForceProfile::two_plateau(
            f_mid, t_max[i], params.joint_x1[i], params.joint_x2[i]);
        const double err = arm_state.q[i] - q_d[i];
        tau[i] = axis_effort(profile, state.joint_fics[i], state.joint_prev_err[i],
                             state.primed, err, dt);
    }
    return tau;
}

ControlOutput control_tick(const StackParams& params, StackState& state,
                           const ArmParams& arm, const ArmState& arm_state,
                           const PostureTarget& posture, const Pose2& x_d,
                           const Wrench2& w_measured) {
    ControlOutput out;
    out.q_d = posture.q_d;
    out.w_ld = region_of_attraction(params, state, arm, arm_state, posture, x_d);
    joints_coordination(params, arm, arm_state, out.w_ld, w_measured, &out.t_d,
                        &out.t_max);
    out.tau_applied =
        joint_controllers(params, state, arm_state, posture.q_d, out.t_d, out.t_max);
    state.primed = true;

    const LinkPoses fk = forward_kinematics(arm, arm_state.q);
    out.hand_error = x_d.position() - fk.hand.position();
    out.joint_error = posture.q_d - arm_state.q;
    return out;
}

}  // namespace hpmc
