#include "hpmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "hpmc/posture.hpp"

namespace hpmc {

namespace {

constexpr double kSettleRadius = 1e-3;  // m, tracking error considered settled

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct FileHandle {
    std::FILE* f = nullptr;
    std::string path;
    explicit FileHandle(const std::string& p) : path(p) {
        f = std::fopen(p.c_str(), "w");
        if (!f) throw DataError("cannot open for writing: " + p);
    }
    ~FileHandle() {
        if (f) std::fclose(f);
    }
};

}  // namespace

void ReferenceTrajectory::validate() const {
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw ConfigError("reference trajectory: distance must be positive");
    }
    if (!(delta_t > 0.0) || !std::isfinite(delta_t)) {
        throw ConfigError("reference trajectory: duration must be positive");
    }
}

RefSample reference_eval(const ReferenceTrajectory& ref, double t) {
    ref.validate();
    const double slack = 1e-12 * ref.delta_t;
    if (!(t >= -slack) || !(t <= ref.delta_t + slack)) {
        throw DataError("reference_eval: time outside the movement window");
    }
    const double s = std::clamp(t / ref.delta_t, 0.0, 1.0);
    RefSample out;
    if (ref.kind == ReferenceKind::MinimumJerk) {
        out.position = ref.d * (10.0 * s * s * s - 15.0 * s * s * s * s +
                                6.0 * s * s * s * s * s);
        out.velocity = ref.d / ref.delta_t *
                       (30.0 * s * s - 60.0 * s * s * s + 30.0 * s * s * s * s);
    } else {
        out.position = 0.5 * ref.d * (1.0 - std::cos(kPi * s));
        out.velocity = 0.5 * ref.d * kPi / ref.delta_t * std::sin(kPi * s);
    }
    return out;
}

ReferenceTrajectory movement_reference(const ExperimentConfig& config,
                                       int target_id, ReferenceKind kind) {
    const Vec2 delta = config.target(target_id) - config.home();
    const double d_ax = std::max(std::abs(delta.x()), std::abs(delta.y()));
    ReferenceTrajectory ref;
    ref.kind = kind;
    ref.d = delta.norm();
    ref.delta_t = kPi * std::sqrt(d_ax / (2.0 * config.planner.a_max));
    ref.validate();
    return ref;
}

double r_value(std::span<const double> speeds, double trim_fraction) {
    if (!(trim_fraction >= 0.0) || !(trim_fraction <= 0.05)) {
        throw ConfigError("r_value: trim fraction must be within [0, 0.05]");
    }
    if (speeds.size() < 10) {
        throw DataError("r_value: need at least 10 speed samples");
    }
    double peak = 0.0;
    for (double v : speeds) {
        if (!std::isfinite(v) || v < 0.0) {
            throw DataError("r_value: speeds must be finite and non-negative");
        }
        peak = std::max(peak, v);
    }
    if (peak <= 0.0) {
        throw DataError("r_value: all-zero speed series");
    }
    const double cut = trim_fraction * peak;
    std::size_t a = 0;
    std::size_t b = speeds.size();
    while (a < b && speeds[a] < cut) ++a;
    while (b > a && speeds[b - 1] < cut) --b;
    double mean = 0.0;
    for (std::size_t i = a; i < b; ++i) mean += speeds[i];
    mean /= static_cast<double>(b - a);
    return peak / mean;
}

MovementRecord movement_metrics(std::span<const TrajectorySample> window,
                                int expected_samples) {
    if (window.empty()) {
        throw DataError("movement_metrics: empty movement window");
    }
    MovementRecord rec;
    rec.movement_id = window.front().movement_id;
    rec.target_id = window.front().target_id;
    rec.phase = window.front().phase;
    if (expected_samples > 0 &&
        window.size() != static_cast<std::size_t>(expected_samples)) {
        rec.flagged = true;
    }

    const std::size_t n = window.size();
    std::vector<double> sp_planned(n), sp_executed(n);
    double sq_pos = 0.0, sq_vel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const TrajectorySample& s = window[i];
        sp_planned[i] = s.v_d.norm();
        sp_executed[i] = s.v.norm();
        sq_pos += (s.x_d - s.x).squaredNorm();
        sq_vel += (s.v_d - s.v).squaredNorm();
    }
    rec.rmse_pos = std::sqrt(sq_pos / static_cast<double>(n));
    rec.rmse_vel = std::sqrt(sq_vel / static_cast<double>(n));
    rec.peak_speed = *std::max_element(sp_executed.begin(), sp_executed.end());

    if (n >= 10) {
        try {
            rec.r_planned = r_value(sp_planned);
            rec.r_executed = r_value(sp_executed);
        } catch (const DataError&) {
            rec.flagged = true;  // degenerate speed content
        }
    } else {
        rec.flagged = true;
    }

    // settle and final error relative to where the plan ends up
    const Vec2 goal = window.back().x_d;
    rec.final_error = (window.back().x - goal).norm();
    const double t0 = window.front().t;
    const double dt = n > 1 ? (window.back().t - t0) / static_cast<double>(n - 1)
                            : 1e-3;
    std::size_t k = n;
    while (k > 0 && (window[k - 1].x - goal).norm() < kSettleRadius) --k;
    rec.settle_time = k == n ? static_cast<double>(n) * dt
                             : static_cast<double>(k + 1) * dt;
    return rec;
}

AggregateStats aggregate(const std::vector<MovementRecord>& records, int n_targets) {
    if (n_targets < 1) {
        throw ConfigError("aggregate: n_targets must be positive");
    }
    struct Bucket {
        std::vector<double> rp, re, ep, ev;
    };
    std::vector<Bucket> buckets(static_cast<std::size_t>(n_targets));
    Bucket all;
    for (const MovementRecord& r : records) {
        if (r.flagged) continue;
        if (r.target_id < 0 || r.target_id >= n_targets) {
            throw DataError("aggregate: record target out of range");
        }
        Bucket& b = buckets[static_cast<std::size_t>(r.target_id)];
        for (Bucket* dst : {&b, &all}) {
            dst->rp.push_back(r.r_planned);
            dst->re.push_back(r.r_executed);
            dst->ep.push_back(r.rmse_pos);
            dst->ev.push_back(r.rmse_vel);
        }
    }
    const auto fill = [](const Bucket& b) {
        if (b.rp.empty()) {
            throw DataError("aggregate: empty record group");
        }
        GroupStats g;
        g.count = static_cast<int>(b.rp.size());
        g.r_planned_mean = mean_of(b.rp);
        g.r_planned_std = sample_std(b.rp, g.r_planned_mean);
        g.r_executed_mean = mean_of(b.re);
        g.r_executed_std = sample_std(b.re, g.r_executed_mean);
        g.rmse_pos_mean = mean_of(b.ep);
        g.rmse_pos_std = sample_std(b.ep, g.rmse_pos_mean);
        g.rmse_vel_mean = mean_of(b.ev);
        g.rmse_vel_std = sample_std(b.ev, g.rmse_vel_mean);
        return g;
    };
    AggregateStats out;
    out.overall = fill(all);
    out.per_target.reserve(buckets.size());
    for (const Bucket& b : buckets) out.per_target.push_back(fill(b));
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw DataError("pearson: need two equal series of at least 2 samples");
    }
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        throw DataError("pearson: a series has zero variance");
    }
    return sab / std::sqrt(saa * sbb);
}

std::vector<std::span<const TrajectorySample>> split_movements(
    const std::vector<TrajectorySample>& samples) {
    std::vector<std::span<const TrajectorySample>> out;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= samples.size(); ++i) {
        if (i == samples.size() || samples[i].movement_id != samples[begin].movement_id) {
            out.push_back(std::span<const TrajectorySample>(samples).subspan(begin, i - begin));
            begin = i;
        }
    }
    return out;
}

namespace {

struct PosturePair {
    PostureTarget home;
    PostureTarget target;
    Vec2 w_t;
};

PosturePair block_postures(const ExperimentConfig& config, int target_id) {
    const Vec2 home = config.home();
    const Vec2 tgt = config.target(target_id);
    PosturePair pp;
    pp.w_t = (tgt - home).normalized();
    const double l_h = config.arm.link_lengths[2];
    const Pose2 wh = wrist_target(Pose2{home.x(), home.y(), 0.0}, pp.w_t, l_h);
    const Pose2 wt = wrist_target(Pose2{tgt.x(), tgt.y(), 0.0}, pp.w_t, l_h);
    pp.home = arm_ik(wh, wh.phi, config.arm);
    pp.target = arm_ik(wt, wt.phi, config.arm);
    return pp;
}

}  // namespace

void emit_plot_data(const ExperimentConfig& config,
                    const std::vector<MovementRecord>& records,
                    const std::vector<TrajectorySample>& samples,
                    const std::string& out_dir) {
    const AggregateStats stats = aggregate(records, config.n_targets);

    {
        FileHandle f(out_dir + "/r_per_target.csv");
        std::fprintf(f.f,
                     "target,angle_deg,r_planned_mean,r_planned_std,"
                     "r_executed_mean,r_executed_std\n");
        for (int k = 0; k < config.n_targets; ++k) {
            const GroupStats& g = stats.per_target[static_cast<std::size_t>(k)];
            std::fprintf(f.f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", k,
                         360.0 * k / config.n_targets, g.r_planned_mean,
                         g.r_planned_std, g.r_executed_mean, g.r_executed_std);
        }
    }
    {
        FileHandle f(out_dir + "/rmse_per_target.csv");
        std::fprintf(f.f,
                     "target,angle_deg,rmse_pos_mean,rmse_pos_std,"
                     "rmse_vel_mean,rmse_vel_std\n");
        for (int k = 0; k < config.n_targets; ++k) {
            const GroupStats& g = stats.per_target[static_cast<std::size_t>(k)];
            std::fprintf(f.f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", k,
                         360.0 * k / config.n_targets, g.rmse_pos_mean,
                         g.rmse_pos_std, g.rmse_vel_mean, g.rmse_vel_std);
        }
    }
    {
        FileHandle f(out_dir + "/manipulability.csv");
        std::fprintf(f.f,
                     "target,place,center_x,center_y,major,minor,"
                     "major_dir_x,major_dir_y,along_direction\n");
        for (int k = 0; k < config.n_targets; ++k) {
            const PosturePair pp = block_postures(config, k);
            const struct {
                const char* place;
                const PostureTarget* posture;
                Vec2 center;
            } rows[2] = {{"home", &pp.home, config.home()},
                         {"target", &pp.target, config.target(k)}};
            for (const auto& row : rows) {
                const ManipulabilityEllipsoid ell =
                    manipulability_ellipsoid(config.arm, row.posture->q_d);
                const double along =
                    posture_objective(row.posture->q_d, pp.w_t, config.arm);
                std::fprintf(f.f, "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                             k, row.place, row.center.x(), row.center.y(),
                             ell.axis_lengths[0], ell.axis_lengths[1],
                             ell.axes(0, 0), ell.axes(1, 0), along);
            }
        }
    }

    const auto windows = split_movements(samples);
    {
        FileHandle f(out_dir + "/speed_overlays.csv");
        std::fprintf(f.f,
                     "target,movement,t,v_planned,v_executed,v_minjerk,v_harmonic\n");
        std::vector<bool> done(static_cast<std::size_t>(config.n_targets), false);
        for (const auto& w : windows) {
            const int tgt = w.front().target_id;
            if (w.front().phase != 0 || done[static_cast<std::size_t>(tgt)]) continue;
            done[static_cast<std::size_t>(tgt)] = true;
            const ReferenceTrajectory mj = movement_reference(
                config, tgt, ReferenceKind::MinimumJerk);
            const ReferenceTrajectory h =
                movement_reference(config, tgt, ReferenceKind::Harmonic);
            const double dur = mj.delta_t;
            const double dt = w.size() > 1 ? (w[1].t - w[0].t) : 1e-3;
            for (std::size_t i = 0; i < w.size(); ++i) {
                // samples are stamped after the step, so the first sits at dt
                const double tr = static_cast<double>(i + 1) * dt;
                const double v_mj =
                    tr <= dur ? reference_eval(mj, tr).velocity : 0.0;
                const double v_h = tr <= dur ? reference_eval(h, tr).velocity : 0.0;
                std::fprintf(f.f, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", tgt,
                             w.front().movement_id, tr, w[i].v_d.norm(),
                             w[i].v.norm(), v_mj, v_h);
            }
        }
    }
    {
        FileHandle f(out_dir + "/trajectories.csv");
        std::fprintf(f.f, "target,movement,phase,t,xd_x,xd_y,x_x,x_y\n");
        std::vector<int> emitted(static_cast<std::size_t>(config.n_targets), 0);
        for (const auto& w : windows) {
            const int tgt = w.front().target_id;
            // first out-and-back pair per target is plenty for the figure
            if (emitted[static_cast<std::size_t>(tgt)] >= 2) continue;
            ++emitted[static_cast<std::size_t>(tgt)];
            for (const TrajectorySample& s : w) {
                std::fprintf(f.f, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", tgt,
                             s.movement_id, s.phase, s.t, s.x_d.x(), s.x_d.y(),
                             s.x.x(), s.x.y());
            }
        }
    }
    {
        FileHandle f(out_dir + "/report.txt");
        const std::string rep = summary_report(config, records);
        std::fwrite(rep.data(), 1, rep.size(), f.f);
    }
}

std::string summary_report(const ExperimentConfig& config,
                           const std::vector<MovementRecord>& records) {
    const AggregateStats stats = aggregate(records, config.n_targets);
    std::vector<double> rmses;
    for (const MovementRecord& r : records) {
        if (!r.flagged) rmses.push_back(r.rmse_pos);
    }
    std::sort(rmses.begin(), rmses.end());
    const double rmse_median = rmses[rmses.size() / 2];

    // canonical window-rule numbers for the same sampling and trim
    const int n = 1000;
    std::vector<double> mj_speed(n), h_speed(n);
    const ReferenceTrajectory mj{ReferenceKind::MinimumJerk, 0.1, 1.0};
    const ReferenceTrajectory h{ReferenceKind::Harmonic, 0.1, 1.0};
    for (int i = 0; i < n; ++i) {
        const double t = (i + 0.5) / n;
        mj_speed[static_cast<std::size_t>(i)] = reference_eval(mj, t).velocity;
        h_speed[static_cast<std::size_t>(i)] = reference_eval(h, t).velocity;
    }

    char buf[512];
    std::string out;
    out += "reaching summary\n";
    out += "================\n";
    std::snprintf(buf, sizeof buf, "movements analyzed: %d (flagged excluded)\n\n",
                  stats.overall.count);
    out += buf;
    std::snprintf(buf, sizeof buf, "r planned : %.4f +/- %.4f\n",
                  stats.overall.r_planned_mean, stats.overall.r_planned_std);
    out += buf;
    std::snprintf(buf, sizeof buf, "r executed: %.4f +/- %.4f\n",
                  stats.overall.r_executed_mean, stats.overall.r_executed_std);
    out += buf;
    std::snprintf(buf, sizeof buf, "rmse pos  : median %.6f m, mean %.6f m\n",
                  rmse_median, stats.overall.rmse_pos_mean);
    out += buf;
    std::snprintf(buf, sizeof buf, "rmse vel  : mean %.6f m/s\n\n",
                  stats.overall.rmse_vel_mean);
    out += buf;
    out += "r window rule: trim samples below 1% of peak speed at both ends\n";
    std::snprintf(buf, sizeof buf,
                  "r references: min jerk 1.875 analytic, %.4f under the window "
                  "rule; harmonic %.6f analytic, %.4f under the window rule\n\n",
                  r_value(mj_speed), kPi / 2.0, r_value(h_speed));
    out += buf;
    out += "per-target means (r planned, r executed, rmse pos m, rmse vel m/s):\n";
    for (int k = 0; k < config.n_targets; ++k) {
        const GroupStats& g = stats.per_target[static_cast<std::size_t>(k)];
        std::snprintf(buf, sizeof buf, "  target %d: %.4f  %.4f  %.6f  %.6f\n", k,
                      g.r_planned_mean, g.r_executed_mean, g.rmse_pos_mean,
                      g.rmse_vel_mean);
        out += buf;
    }
    return out;
}

}  // namespace hpmc
