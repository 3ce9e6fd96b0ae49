#pragma once

#include <span>
#include <utility>

#include "hpmc/types.hpp"

namespace hpmc {

enum class ProfileVariant { LinearSaturated, TanhSaturated, TwoPlateau };

// Odd, saturating effort-vs-error curve. Units are N per m of error for
// task-space use and N·m per rad for joint-space use.
struct ForceProfile {
    ProfileVariant variant = ProfileVariant::LinearSaturated;
    double k0 = 0.0;     // linear-region stiffness
    double f_max = 0.0;  // final saturation effort
    double x_b = 0.0;    // saturation onset error (tanh variant)
    double f_mid = 0.0;  // first-plateau effort (two-plateau variant)
    double x_1 = 0.0;    // error where the ramp reaches f_mid
    double x_2 = 0.0;    // error where the first plateau ends

    static ForceProfile linear_saturated(double k0, double f_max);
    static ForceProfile tanh_saturated(double k0, double f_max, double x_b);
    static ForceProfile two_plateau(double f_mid, double f_max, double x_1, double x_2);

    void validate() const;  // throws InvalidProfileError
};

double profile_force(const ForceProfile& profile, double err);

enum class FicPhase { Divergence, Convergence };

// Attractor memory of one scalar controller: which phase the error excursion
// is in, how far it got, and which side of zero it is on.
struct FicState {
    FicPhase phase = FicPhase::Divergence;
    double x_max = 0.0;
    int sign = 0;
};

struct FicResult {
    double effort = 0.0;
    FicState state;
};

// One sampled evaluation of the controller. Divergence pushes back along the
// force profile; convergence rides a linear spring anchored at the midpoint
// of the recorded excursion, which returns the mass to zero error with zero
// velocity and zero net work.
FicResult fic_effort(const ForceProfile& profile, const FicState& state, double err, double d_err);

// Net work injected into the plant by a sampled (error, effort) trace,
// trapezoidal rule. Passivity means this never ends up positive once the
// excursion returns to zero error.
double fic_energy_audit(std::span<const std::pair<double, double>> trace);

}  // namespace hpmc
