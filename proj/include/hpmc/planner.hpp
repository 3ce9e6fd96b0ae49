#pragma once

#include "hpmc/fic.hpp"
#include "hpmc/types.hpp"

namespace hpmc {

// Virtual point mass pulled toward the target by a saturated elastic band.
// In the saturated regime a target step of length D comes out as a half-cycle
// harmonic: duration pi*sqrt(D/(2*a_max)), peak speed sqrt(a_max*D/2).
struct PlannerParams {
    double m_d = 1.0;              // virtual mass, kg
    double a_max = 1.0;            // acceleration ceiling, m/s^2
    double planner_rate = 1000.0;  // Hz, synchronous with the control loop
    double k0 = 1000.0;            // band stiffness in the linear region, N/m

    double f_max() const { return m_d * a_max; }
    ForceProfile profile() const;
    void validate() const;
};

struct PlannerState {
    Pose2 x_d;                 // planned hand position
    Vec2 v_d = Vec2::Zero();   // planned hand velocity
    Vec2 a_d = Vec2::Zero();   // acceleration at x_d, carried for the velocity update
    FicState fic_x, fic_y;     // per-axis band attractors
    Pose2 x_t;                 // active target
};

// Planner at rest on `start`, with the target also at `start`.
PlannerState make_planner(const PlannerParams& params, const Pose2& start);

// Swap the target; the band re-enters divergence from the new error while the
// reference position and velocity carry over untouched (C1 reference).
PlannerState set_target(const PlannerParams& params, const PlannerState& state,
                        const Pose2& x_t_new);

// Advance the reference one sample (velocity Verlet on the virtual mass).
PlannerState planner_step(const PlannerParams& params, const PlannerState& state, double dt);

}  // namespace hpmc
