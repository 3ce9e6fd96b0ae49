#include "hpmc/fic.hpp"

#include <algorithm>
#include <cmath>

namespace hpmc {

ForceProfile ForceProfile::linear_saturated(double k0, double f_max) {
    ForceProfile p;
    p.variant = ProfileVariant::LinearSaturated;
    p.k0 = k0;
    p.f_max = f_max;
    p.validate();
    return p;
}

ForceProfile ForceProfile::tanh_saturated(double k0, double f_max, double x_b) {
    ForceProfile p;
    p.variant = ProfileVariant::TanhSaturated;
    p.k0 = k0;
    p.f_max = f_max;
    p.x_b = x_b;
    p.validate();
    return p;
}

ForceProfile ForceProfile::two_plateau(double f_mid, double f_max, double x_1, double x_2) {
    ForceProfile p;
    p.variant = ProfileVariant::TwoPlateau;
    p.f_mid = f_mid;
    p.f_max = f_max;
    p.x_1 = x_1;
    p.x_2 = x_2;
    p.validate();
    return p;
}

void ForceProfile::validate() const {
    if (!std::isfinite(k0) || !std::isfinite(f_max) || !std::isfinite(x_b) ||
        !std::isfinite(f_mid) || !std::isfinite(x_1) || !std::isfinite(x_2))
        throw InvalidProfileError("force profile: non-finite parameter");
    if (!(f_max > 0.0)) throw InvalidProfileError("force profile: f_max must be positive");
    switch (variant) {
        case ProfileVariant::LinearSaturated:
            if (k0 < 0.0) throw InvalidProfileError("force profile: k0 must be non-negative");
            break;
        case ProfileVariant::TanhSaturated:
            if (k0 < 0.0) throw InvalidProfileError("force profile: k0 must be non-negative");
            if (!(x_b > 0.0)) throw InvalidProfileError("force profile: x_b must be positive");
            if (k0 > f_max / x_b)
                throw InvalidProfileError("force profile: k0 exceeds f_max/x_b");
            break;
        case ProfileVariant::TwoPlateau:
            if (!(x_1 > 0.0 && x_1 < x_2))
                throw InvalidProfileError("force profile: need 0 < x_1 < x_2");
            if (f_mid < 0.0) throw InvalidProfileError("force profile: f_mid must be non-negative");
            if (f_mid > f_max) throw InvalidProfileError("force profile: f_mid exceeds f_max");
            break;
    }
}

double profile_force(const ForceProfile& p, double err) {
    p.validate();
    const double mag = std::abs(err);
    const double dir = static_cast<double>(sign_of(err));
    switch (p.variant) {
        case ProfileVariant::LinearSaturated:
            return std::clamp(p.k0 * err, -p.f_max, p.f_max);
        case ProfileVariant::TanhSaturated: {
            const double knee = 0.95 * p.x_b;
            if (mag <= knee) return p.k0 * err;
            const double f0 = 0.95 * p.k0 * p.x_b;
            const double df = p.f_max - f0;
            return dir * (f0 + df * std::tanh((mag - knee) / (0.1353 * p.x_b)));
        }
        case ProfileVariant::TwoPlateau: {
            double f;
            if (mag <= p.x_1)
                f = p.f_mid * (mag / p.x_1);
            else if (mag <= p.x_2)
                f = p.f_mid;
            else if (mag <= 2.0 * p.x_2)
                f = p.f_mid + (p.f_max - p.f_mid) * ((mag - p.x_2) / p.x_2);
            else
                f = p.f_max;
            return dir * f;
        }
    }
    return 0.0;
}

FicResult fic_effort(const ForceProfile& profile, const FicState& state, double err,
                     double d_err) {
    FicState s = state;
    const int err_sign = sign_of(err);

    // Crossing zero completes the half cycle; the attractor restarts.
    if (err_sign == 0 || (s.sign != 0 && err_sign != s.sign)) {
        s.phase = FicPhase::Divergence;
        s.x_max = 0.0;
    }
    s.sign = err_sign != 0 ? err_sign : s.sign;

    if (s.phase == FicPhase::Convergence) {
        if (std::abs(err) > s.x_max) {
            // Pushed past the recorded excursion: divergence resumes.
            s.phase = FicPhase::Divergence;
        } else if (err * d_err > 0.0) {
            // Error magnitude growing again. The previous half cycle is over
            // (this is how the graze at zero ends, since the approach is
            // quadratic and need not produce a sign flip), so a fresh
            // excursion starts from here.
            s.phase = FicPhase::Divergence;
            s.x_max = std::abs(err);
        }
    }

    if (s.phase == FicPhase::Divergence) {
        s.x_max = std::max(s.x_max, std::abs(err));
        if (err * d_err < -1e-9) s.phase = FicPhase::Convergence;
    }

    double effort;
    if (s.phase == FicPhase::Divergence || s.x_max <= 0.0) {
        effort = -profile_force(profile, err);
    } else {
        const double k = 2.0 * profile_force(profile, s.x_max) / s.x_max;
        effort = -k * (err - s.sign * 0.5 * s.x_max);
    }
    return {effort, s};
}

double fic_energy_audit(std::span<const std::pair<double, double>> trace) {
    double work = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        work += 0.5 * (trace[i - 1].second + trace[i].second) *
                (trace[i].first - trace[i - 1].first);
    }
    return work;
}

}  // namespace hpmc
