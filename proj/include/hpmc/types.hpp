#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hpmc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Planar pose: position in meters, orientation in rad.
/// phi is meaningful only where a caller needs orientation; it is kept
/// wrapped to (-pi, pi] by wrap_angle().
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double phi = 0.0;

    Vec2 position() const { return {x, y}; }
};

/// Planar wrench: force in N, moment about z in N*m.
struct Wrench2 {
    double fx = 0.0;
    double fy = 0.0;
    double mz = 0.0;

    Vec2 force() const { return {fx, fy}; }
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::fmod(a + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Error hierarchy. Everything thrown by this library derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidProfileError : public Error {
public:
    using Error::Error;
};

class UnreachableTargetError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace hpmc
