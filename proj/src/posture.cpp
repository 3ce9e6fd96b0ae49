#include "hpmc/posture.hpp"

#include <algorithm>
#include <cmath>

namespace hpmc {

namespace {

Vec2 unit_from_angle(double phi) {
    return Vec2(std::cos(phi), std::sin(phi));
}

void check_unit(const Vec2& w_t, const char* where) {
    if (!w_t.allFinite() || std::abs(w_t.norm() - 1.0) > 1e-9) {
        throw ConfigError(std::string(where) + ": task direction must be a unit vector");
    }
}

}  // namespace

Pose2 wrist_target(const Pose2& x_d, const Vec2& w_t, double l_h) {
    check_unit(w_t, "wrist_target");
    if (!(l_h > 0.0) || !std::isfinite(l_h)) {
        throw ConfigError("wrist_target: hand length must be positive");
    }
    Pose2 out;
    out.phi = std::atan2(w_t.y(), w_t.x());
    const Vec2 p = x_d.position() - l_h * unit_from_angle(out.phi);
    out.x = p.x();
    out.y = p.y();
    return out;
}

PostureTarget arm_ik(const Pose2& x_w, double phi_wt, const ArmParams& params,
                     const IkOptions& options) {
    params.validate();
    if (options.elbow_branch != 1 && options.elbow_branch != -1) {
        throw ConfigError("arm_ik: elbow_branch must be +1 or -1");
    }
    if (!(options.max_step > 0.0)) {
        throw ConfigError("arm_ik: max_step must be positive");
    }
    const double l_a = params.link_lengths[0];
    const double l_fa = params.link_lengths[1];
    const double r = x_w.position().norm();
    const double r_min = std::abs(l_a - l_fa) + 1e-9;
    const double r_max = l_a + l_fa + 1e-9;
    if (!std::isfinite(r) || r < r_min || r > r_max) {
        throw UnreachableTargetError("arm_ik: wrist point outside the reachable annulus");
    }

    const double c2 = std::clamp(
        (r * r - l_a * l_a - l_fa * l_fa) / (2.0 * l_a * l_fa), -1.0, 1.0);
    const double q2 = static_cast<double>(options.elbow_branch) * std::acos(c2);
    const double q1 = std::atan2(x_w.y, x_w.x) -
                      std::atan2(l_fa * std::sin(q2), l_a + l_fa * std::cos(q2));

    Vec3 q;
    q << wrap_angle(q1), wrap_angle(q2), wrap_angle(phi_wt - q1 - q2);

    PostureTarget out;
    out.rate_limited = false;
    if (options.q_prev) {
        const Vec3& prev = *options.q_prev;
        for (int i = 0; i < 3; ++i) {
            const double step = wrap_angle(q[i] - prev[i]);
            if (std::abs(step) > options.max_step) {
                out.rate_limited = true;
                q[i] = wrap_angle(prev[i] + std::clamp(step, -options.max_step,
                                                       options.max_step));
            }
        }
    }
    out.q_d = q;

    // report the pose the (possibly clamped) joint command actually reaches
    const LinkPoses fk = forward_kinematics(params, q);
    out.x_a = fk.elbow;
    out.x_w = fk.wrist;
    out.phi_wt = fk.hand.phi;
    return out;
}

double posture_objective(const Vec3& q, const Vec2& w_t, const ArmParams& params) {
    check_unit(w_t, "posture_objective");
    const Eigen::Matrix<double, 2, 3> jv =
        geometric_jacobian(params, q).topRows<2>();
    return (jv.transpose() * w_t).squaredNorm();
}

}  // namespace hpmc
