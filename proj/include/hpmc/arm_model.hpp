#pragma once

// Planar 3-link arm: kinematics, differential kinematics, manipulability and
// forward dynamics with adaptive-step integration. The chain is three revolute
// joints in the xy-plane; all joint angles zero means the chain is stretched
// along +x from the origin. Gravity acts out of plane and is therefore absent
// from the dynamics.

#include <array>

#include "hpmc/types.hpp"

namespace hpmc {

struct ArmParams {
    std::array<double, 3> link_lengths{0.282, 0.269, 0.044};   // m: arm, forearm, hand
    std::array<double, 3> link_masses{4.0, 2.5, 1.0};          // kg
    std::array<double, 3> link_inertias{};                     // kg*m^2 about each COM
    std::array<double, 3> com_offsets{};                       // m from proximal joint
    std::array<double, 3> joint_damping{0.1, 0.1, 0.1};        // N*m*s/rad
    std::array<double, 3> joint_torque_limits{60.0, 30.0, 10.0};  // N*m
    double hand_tip_offset = 0.0;  // m, perpendicular offset of the hand point

    /// Default parameters: slender-rod links (COM at mid-length, I = m*l^2/12).
    static ArmParams defaults();

    /// Throws ConfigError if any length/mass/inertia is non-positive or any
    /// damping/limit is negative.
    void validate() const;
};

struct ArmState {
    Vec3 q = Vec3::Zero();   // rad
    Vec3 dq = Vec3::Zero();  // rad/s
    double t = 0.0;          // s
};

/// End points of the three links. Orientations are the cumulative joint sums,
/// wrapped to (-pi, pi].
struct LinkPoses {
    Pose2 elbow;
    Pose2 wrist;
    Pose2 hand;
};

LinkPoses forward_kinematics(const ArmParams& params, const Vec3& q);

/// 3x3 geometric Jacobian of the hand point: rows map dq to (xdot, ydot, phidot).
Mat3 geometric_jacobian(const ArmParams& params, const Vec3& q);

struct ManipulabilityEllipsoid {
    Vec2 axis_lengths;  // semi-axes, descending
    Mat2 axes;          // columns are the matching unit directions
    bool degenerate = false;
};

/// Eigen-decomposition of the 2x2 translational block of J*J^T.
ManipulabilityEllipsoid manipulability_ellipsoid(const ArmParams& params, const Vec3& q);

/// Joint-space inertia matrix M(q); symmetric positive definite.
Mat3 mass_matrix(const ArmParams& params, const Vec3& q);

/// dM/dq_k, k in {0,1,2}. Zero matrix for k = 0 (M depends on q2, q3 only).
Mat3 mass_matrix_partial(const ArmParams& params, const Vec3& q, int k);

/// Coriolis/centrifugal matrix built from Christoffel symbols, so that
/// Mdot - 2C is skew-symmetric.
Mat3 coriolis_matrix(const ArmParams& params, const Vec3& q, const Vec3& dq);

/// Kinetic energy 0.5*dq^T*M(q)*dq. This is the total mechanical energy of the
/// arm (no gravity in plane).
double kinetic_energy(const ArmParams& params, const ArmState& state);

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double min_step = 1e-5;  // s
    double max_step = 1e-3;  // s
};

/// Integrates M(q)*qddot + C(q,dq)*dq + D*dq = tau + J^T*w_ext from state.t to
/// state.t + dt_target with an embedded Dormand-Prince 4(5) scheme. tau and
/// w_ext are held constant over the interval. Throws IntegrationError when the
/// error control cannot meet tolerance at the minimum step, and ConfigError if
/// dt_target is outside [min_step, max_step].
ArmState step_dynamics(const ArmParams& params, const ArmState& state, const Vec3& tau,
                       const Wrench2& external_wrench, double dt_target,
                       const IntegratorOptions& options = {});

}  // namespace hpmc
