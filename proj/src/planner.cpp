#include "hpmc/planner.hpp"

#include <cmath>

namespace hpmc {

ForceProfile PlannerParams::profile() const {
    return ForceProfile::linear_saturated(k0, f_max());
}

void PlannerParams::validate() const {
    if (!(m_d > 0.0)) throw ConfigError("planner: m_d must be positive");
    if (!(a_max > 0.0)) throw ConfigError("planner: a_max must be positive");
    if (!(planner_rate >= 100.0)) throw ConfigError("planner: rate must be at least 100 Hz");
    if (!(k0 > 0.0)) throw ConfigError("planner: k0 must be positive");
}

namespace {

FicState fresh_divergence(double err) {
    FicState s;
    s.phase = FicPhase::Divergence;
    s.x_max = std::abs(err);
    s.sign = sign_of(err);
    return s;
}

}  // namespace

PlannerState make_planner(const PlannerParams& params, const Pose2& start) {
    params.validate();
    PlannerState s;
    s.x_d = start;
    s.x_t = start;
    return s;
}

PlannerState set_target(const PlannerParams& params, const PlannerState& state,
                        const Pose2& x_t_new) {
    if (x_t_new.x == state.x_t.x && x_t_new.y == state.x_t.y) return state;
    params.validate();
    PlannerState s = state;
    s.x_t = x_t_new;

    const double err_x = s.x_d.x - s.x_t.x;
    const double err_y = s.x_d.y - s.x_t.y;
    s.fic_x = fresh_divergence(err_x);
    s.fic_y = fresh_divergence(err_y);

    const ForceProfile band = params.profile();
    s.a_d[0] = -profile_force(band, err_x) / params.m_d;
    s.a_d[1] = -profile_force(band, err_y) / params.m_d;
    return s;
}

PlannerState planner_step(const PlannerParams& params, const PlannerState& state, double dt) {
    params.validate();
    if (std::abs(dt * params.planner_rate - 1.0) > 1e-9)
        throw ConfigError("planner: dt must equal 1/planner_rate");

    const ForceProfile band = params.profile();
    PlannerState s = state;

    s.x_d.x += s.v_d[0] * dt + 0.5 * s.a_d[0] * dt * dt;
    s.x_d.y += s.v_d[1] * dt + 0.5 * s.a_d[1] * dt * dt;

    const Vec2 err(s.x_d.x - s.x_t.x, s.x_d.y - s.x_t.y);
    const Vec2 d_err = s.v_d + dt * s.a_d;

    const FicResult rx = fic_effort(band, s.fic_x, err[0], d_err[0]);
    const FicResult ry = fic_effort(band, s.fic_y, err[1], d_err[1]);
    s.fic_x = rx.state;
    s.fic_y = ry.state;

    const Vec2 a_new(rx.effort / params.m_d, ry.effort / params.m_d);
    s.v_d += 0.5 * dt * (s.a_d + a_new);
    s.a_d = a_new;
    return s;
}

}  // namespace hpmc
