#include "hpmc/arm_model.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace hpmc {

ArmParams ArmParams::defaults() {
    ArmParams p;
    for (int i = 0; i < 3; ++i) {
        p.com_offsets[i] = 0.5 * p.link_lengths[i];
        p.link_inertias[i] = p.link_masses[i] * p.link_lengths[i] * p.link_lengths[i] / 12.0;
    }
    return p;
}

void ArmParams::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (!(link_lengths[i] > 0.0)) throw ConfigError("arm: link length must be positive");
        if (!(link_masses[i] > 0.0)) throw ConfigError("arm: link mass must be positive");
        if (!(link_inertias[i] > 0.0)) throw ConfigError("arm: link inertia must be positive");
        if (!(com_offsets[i] > 0.0 && com_offsets[i] <= link_lengths[i]))
            throw ConfigError("arm: COM offset must lie within the link");
        if (joint_damping[i] < 0.0) throw ConfigError("arm: joint damping must be non-negative");
        if (joint_torque_limits[i] < 0.0) throw ConfigError("arm: torque limit must be non-negative");
    }
    if (!std::isfinite(hand_tip_offset)) throw ConfigError("arm: hand tip offset must be finite");
}

namespace {

struct JointPoints {
    Vec2 shoulder;  // joint 1, at the origin
    Vec2 elbow;     // joint 2
    Vec2 wrist;     // joint 3
    Vec2 hand;      // hand point (tip of link 3 plus perpendicular offset)
};

JointPoints chain_points(const ArmParams& p, const Vec3& q) {
    const double t1 = q[0];
    const double t12 = q[0] + q[1];
    const double t123 = q[0] + q[1] + q[2];
    JointPoints pts;
    pts.shoulder = Vec2::Zero();
    pts.elbow = pts.shoulder + p.link_lengths[0] * Vec2(std::cos(t1), std::sin(t1));
    pts.wrist = pts.elbow + p.link_lengths[1] * Vec2(std::cos(t12), std::sin(t12));
    pts.hand = pts.wrist + p.link_lengths[2] * Vec2(std::cos(t123), std::sin(t123)) +
               p.hand_tip_offset * Vec2(-std::sin(t123), std::cos(t123));
    return pts;
}

// Inertia-matrix coefficients: 2*KE = A1*w1^2 + A2*w2^2 + A3*w3^2
//   + 2*h1*cos(q2)*w1*w2 + 2*h2*cos(q2+q3)*w1*w3 + 2*h3*cos(q3)*w2*w3
// with w_i the absolute link angular rates.
struct InertiaCoeffs {
    double a1, a2, a3, h1, h2, h3;
};

InertiaCoeffs inertia_coeffs(const ArmParams& p) {
    const auto& l = p.link_lengths;
    const auto& m = p.link_masses;
    const auto& lc = p.com_offsets;
    const auto& ii = p.link_inertias;
    InertiaCoeffs c;
    c.a1 = ii[0] + m[0] * lc[0] * lc[0] + (m[1] + m[2]) * l[0] * l[0];
    c.a2 = ii[1] + m[1] * lc[1] * lc[1] + m[2] * l[1] * l[1];
    c.a3 = ii[2] + m[2] * lc[2] * lc[2];
    c.h1 = l[0] * (m[1] * lc[1] + m[2] * l[1]);
    c.h2 = l[0] * m[2] * lc[2];
    c.h3 = l[1] * m[2] * lc[2];
    return c;
}

}  // namespace

LinkPoses forward_kinematics(const ArmParams& params, const Vec3& q) {
    const JointPoints pts = chain_points(params, q);
    LinkPoses out;
    out.elbow = {pts.elbow.x(), pts.elbow.y(), wrap_angle(q[0])};
    out.wrist = {pts.wrist.x(), pts.wrist.y(), wrap_angle(q[0] + q[1])};
    out.hand = {pts.hand.x(), pts.hand.y(), wrap_angle(q[0] + q[1] + q[2])};
    return out;
}

Mat3 geometric_jacobian(const ArmParams& params, const Vec3& q) {
    const JointPoints pts = chain_points(params, q);
    const std::array<Vec2, 3> joints{pts.shoulder, pts.elbow, pts.wrist};
    Mat3 jac;
    for (int i = 0; i < 3; ++i) {
        const Vec2 r = pts.hand - joints[i];
        jac(0, i) = -r.y();
        jac(1, i) = r.x();
        jac(2, i) = 1.0;
    }
    return jac;
}

ManipulabilityEllipsoid manipulability_ellipsoid(const ArmParams& params, const Vec3& q) {
    const Mat3 jac = geometric_jacobian(params, q);
    const Eigen::Matrix<double, 2, 3> jv = jac.topRows<2>();
    const Mat2 jjt = jv * jv.transpose();

    Eigen::SelfAdjointEigenSolver<Mat2> eig(jjt);
    ManipulabilityEllipsoid out;
    // Eigen returns eigenvalues ascending; report descending.
    const double lo = std::max(eig.eigenvalues()(0), 0.0);
    const double hi = std::max(eig.eigenvalues()(1), 0.0);
    out.axis_lengths = {std::sqrt(hi), std::sqrt(lo)};
    out.axes.col(0) = eig.eigenvectors().col(1);
    out.axes.col(1) = eig.eigenvectors().col(0);
    out.degenerate = lo < 1e-12;
    return out;
}

Mat3 mass_matrix(const ArmParams& params, const Vec3& q) {
    const InertiaCoeffs c = inertia_coeffs(params);
    const double c2 = std::cos(q[1]);
    const double c3 = std::cos(q[2]);
    const double c23 = std::cos(q[1] + q[2]);
    Mat3 m;
    m(0, 0) = c.a1 + c.a2 + c.a3 + 2.0 * (c.h1 * c2 + c.h2 * c23 + c.h3 * c3);
    m(0, 1) = c.a2 + c.a3 + c.h1 * c2 + c.h2 * c23 + 2.0 * c.h3 * c3;
    m(0, 2) = c.a3 + c.h2 * c23 + c.h3 * c3;
    m(1, 1) = c.a2 + c.a3 + 2.0 * c.h3 * c3;
    m(1, 2) = c.a3 + c.h3 * c3;
    m(2, 2) = c.a3;
    m(1, 0) = m(0, 1);
    m(2, 0) = m(0, 2);
    m(2, 1) = m(1, 2);
    return m;
}

Mat3 mass_matrix_partial(const ArmParams& params, const Vec3& q, int k) {
    const InertiaCoeffs c = inertia_coeffs(params);
    const double s2 = std::sin(q[1]);
    const double s3 = std::sin(q[2]);
    const double s23 = std::sin(q[1] + q[2]);
    Mat3 d = Mat3::Zero();
    if (k == 1) {
        d(0, 0) = -2.0 * (c.h1 * s2 + c.h2 * s23);
        d(0, 1) = -(c.h1 * s2 + c.h2 * s23);
        d(0, 2) = -c.h2 * s23;
    } else if (k == 2) {
        d(0, 0) = -2.0 * (c.h2 * s23 + c.h3 * s3);
        d(0, 1) = -(c.h2 * s23 + 2.0 * c.h3 * s3);
        d(0, 2) = -(c.h2 * s23 + c.h3 * s3);
        d(1, 1) = -2.0 * c.h3 * s3;
        d(1, 2) = -c.h3 * s3;
    }
    d(1, 0) = d(0, 1);
    d(2, 0) = d(0, 2);
    d(2, 1) = d(1, 2);
    return d;
}

Mat3 coriolis_matrix(const ArmParams& params, const Vec3& q, const Vec3& dq) {
    std::array<Mat3, 3> dm;
    for (int k = 0; k < 3; ++k) dm[k] = mass_matrix_partial(params, q, k);
    Mat3 cor;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double cij = 0.0;
            for (int k = 0; k < 3; ++k) {
                cij += 0.5 * (dm[k](i, j) + dm[j](i, k) - dm[i](j, k)) * dq[k];
            }
            cor(i, j) = cij;
        }
    }
    return cor;
}

double kinetic_energy(const ArmParams& params, const ArmState& state) {
    return 0.5 * state.dq.dot(mass_matrix(params, state.q) * state.dq);
}

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 dynamics_rhs(const ArmParams& p, const Vec6& y, const Vec3& tau, const Wrench2& w_ext) {
    const Vec3 q = y.head<3>();
    const Vec3 dq = y.tail<3>();
    const Mat3 m = mass_matrix(p, q);
    const Mat3 cor = coriolis_matrix(p, q, dq);
    Vec3 rhs = tau - cor * dq;
    for (int i = 0; i < 3; ++i) rhs[i] -= p.joint_damping[i] * dq[i];
    if (w_ext.fx != 0.0 || w_ext.fy != 0.0 || w_ext.mz != 0.0) {
        const Mat3 jac = geometric_jacobian(p, q);
        rhs += jac.transpose() * Vec3(w_ext.fx, w_ext.fy, w_ext.mz);
    }
    Vec6 dy;
    dy.head<3>() = dq;
    dy.tail<3>() = m.llt().solve(rhs);
    return dy;
}

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

}  // namespace

ArmState step_dynamics(const ArmParams& params, const ArmState& state, const Vec3& tau,
                       const Wrench2& external_wrench, double dt_target,
                       const IntegratorOptions& options) {
    if (!(dt_target >= options.min_step && dt_target <= options.max_step))
        throw ConfigError("step_dynamics: dt_target outside [min_step, max_step]");
    if (!tau.allFinite()) throw ConfigError("step_dynamics: non-finite torque");

    Vec6 y;
    y.head<3>() = state.q;
    y.tail<3>() = state.dq;

    double remaining = dt_target;
    double h = dt_target;
    Vec6 k1 = dynamics_rhs(params, y, tau, external_wrench);

    while (remaining > 0.0) {
        h = std::min({h, options.max_step, remaining});
        const bool at_min = h <= options.min_step;

        const Vec6 k2 = dynamics_rhs(params, y + h * (kA21 * k1), tau, external_wrench);
        const Vec6 k3 = dynamics_rhs(params, y + h * (kA31 * k1 + kA32 * k2), tau, external_wrench);
        const Vec6 k4 =
            dynamics_rhs(params, y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3), tau, external_wrench);
        const Vec6 k5 = dynamics_rhs(
            params, y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4), tau, external_wrench);
        const Vec6 k6 = dynamics_rhs(
            params, y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5), tau,
            external_wrench);
        const Vec6 y_new = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
        const Vec6 k7 = dynamics_rhs(params, y_new, tau, external_wrench);  // FSAL

        const Vec6 err_vec =
            h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);
        double err = 0.0;
        for (int i = 0; i < 6; ++i) {
            const double scale =
                options.abs_tol + options.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err = std::max(err, std::abs(err_vec[i]) / scale);
        }

        if (err <= 1.0 || at_min) {
            if (err > 1.0)
                throw IntegrationError("step_dynamics: tolerance unmet at minimum step size");
            y = y_new;
            k1 = k7;
            remaining -= h;
        }
        const double factor =
            err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
        h = std::max(h * factor, options.min_step);
        if (!y.allFinite()) throw IntegrationError("step_dynamics: state diverged");
    }

    ArmState out;
    out.q = y.head<3>();
    out.dq = y.tail<3>();
    out.t = state.t + dt_target;
    return out;
}

}  // namespace hpmc
