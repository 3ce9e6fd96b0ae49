#pragma once

#include <span>
#include <string>
#include <vector>

#include "hpmc/experiment.hpp"
#include "hpmc/types.hpp"

namespace hpmc {

enum class ReferenceKind { MinimumJerk, Harmonic };

// Canonical point-to-point profile of distance d over duration delta_t.
struct ReferenceTrajectory {
    ReferenceKind kind = ReferenceKind::MinimumJerk;
    double d = 0.0;        // m
    double delta_t = 0.0;  // s
    void validate() const;
};

struct RefSample {
    double position = 0.0;
    double velocity = 0.0;
};

// Closed-form evaluation; throws DataError outside [0, delta_t].
RefSample reference_eval(const ReferenceTrajectory& ref, double t);

// The canonical profile matching one clock movement. The planner's band
// saturates per axis, so the duration follows the largest axis excursion of
// the commanded step while the distance stays the full step length.
ReferenceTrajectory movement_reference(const ExperimentConfig& config,
                                       int target_id, ReferenceKind kind);

// Peak speed over mean speed, after trimming leading and trailing samples
// below trim_fraction of the peak. 1.875 for minimum jerk, pi/2 for a
// harmonic half-cycle. Needs at least 10 samples and a nonzero peak.
double r_value(std::span<const double> speeds, double trim_fraction = 0.01);

// Per-movement summary; expected_samples (when > 0) marks shorter windows as
// flagged instead of failing.
MovementRecord movement_metrics(std::span<const TrajectorySample> window,
                                int expected_samples = 0);

struct GroupStats {
    int count = 0;
    double r_planned_mean = 0.0, r_planned_std = 0.0;
    double r_executed_mean = 0.0, r_executed_std = 0.0;
    double rmse_pos_mean = 0.0, rmse_pos_std = 0.0;
    double rmse_vel_mean = 0.0, rmse_vel_std = 0.0;
};

struct AggregateStats {
    std::vector<GroupStats> per_target;
    GroupStats overall;
};

// Mean and sample standard deviation per target and overall; flagged records
// are excluded. Throws DataError if any target group ends up empty.
AggregateStats aggregate(const std::vector<MovementRecord>& records, int n_targets);

// Pearson correlation coefficient of two equal-length series.
double pearson(std::span<const double> a, std::span<const double> b);

// Contiguous runs of equal movement id, in file order.
std::vector<std::span<const TrajectorySample>> split_movements(
    const std::vector<TrajectorySample>& samples);

// Figure-data emission: per-target r and RMSE tables, speed overlays against
// the two canonical profiles, executed trajectories, and manipulability
// ellipses at the home and target postures.
void emit_plot_data(const ExperimentConfig& config,
                    const std::vector<MovementRecord>& records,
                    const std::vector<TrajectorySample>& samples,
                    const std::string& out_dir);

// Plain-text summary table mirroring the figure data.
std::string summary_report(const ExperimentConfig& config,
                           const std::vector<MovementRecord>& records);

}  // namespace hpmc
