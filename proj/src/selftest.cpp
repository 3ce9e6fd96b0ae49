#include "hpmc/selftest.hpp"

#include "hpmc/analysis.hpp"
#include "hpmc/arm_model.hpp"
#include "hpmc/experiment.hpp"
#include "hpmc/fic.hpp"
#include "hpmc/posture.hpp"
#include "hpmc/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <utility>
#include <vector>

namespace hpmc {
namespace {

void report(std::FILE* out, SelfTestResult& r, bool ok, const char* name,
            const std::string& detail) {
    ++r.properties;
    if (!ok) ++r.failures;
    std::fprintf(out, "%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

// Inverse kinematics then forward kinematics over random reachable wrist
// poses, both elbow branches.
void check_kinematics_round_trip(std::FILE* out, SelfTestResult& r) {
    const ArmParams p = ArmParams::defaults();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> radius(0.05, 0.52);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        Pose2 x_w;
        const double rr = radius(rng);
        const double th = angle(rng);
        x_w.x = rr * std::cos(th);
        x_w.y = rr * std::sin(th);
        const double phi_wt = angle(rng);
        for (int branch : {1, -1}) {
            IkOptions opt;
            opt.elbow_branch = branch;
            const PostureTarget pt = arm_ik(x_w, phi_wt, p, opt);
            const LinkPoses fk = forward_kinematics(p, pt.q_d);
            const double pos_err = std::hypot(fk.wrist.x - x_w.x, fk.wrist.y - x_w.y);
            const double ang_err = std::abs(wrap_angle(fk.hand.phi - phi_wt));
            worst = std::max({worst, pos_err, ang_err});
        }
    }
    report(out, r, worst < 1e-9, "kinematics round trip",
           fmt("worst residual %.3g over 500 poses, both elbow branches (limit 1e-9)",
               worst));
}

// Analytic Jacobian against central finite differences of the hand pose.
void check_jacobian(std::FILE* out, SelfTestResult& r) {
    const ArmParams p = ArmParams::defaults();
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 q(angle(rng), angle(rng), angle(rng));
        const Mat3 j = geometric_jacobian(p, q);
        const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
        for (int i = 0; i < 3; ++i) {
            Vec3 qp = q, qm = q;
            qp[i] += h;
            qm[i] -= h;
            const LinkPoses fp = forward_kinematics(p, qp);
            const LinkPoses fm = forward_kinematics(p, qm);
            const double fx = (fp.hand.x - fm.hand.x) / (2 * h);
            const double fy = (fp.hand.y - fm.hand.y) / (2 * h);
            const double fw = wrap_angle(fp.hand.phi - fm.hand.phi) / (2 * h);
            worst = std::max(worst, std::abs(j(0, i) - fx) / scale);
            worst = std::max(worst, std::abs(j(1, i) - fy) / scale);
            worst = std::max(worst, std::abs(j(2, i) - fw) / scale);
        }
    }
    report(out, r, worst < 1e-5, "jacobian finite difference",
           fmt("worst relative deviation %.3g over 1000 postures (limit 1e-5)", worst));
}

// Undriven, undamped arm keeps its kinetic energy through the integrator.
void check_energy_drift(std::FILE* out, SelfTestResult& r) {
    ArmParams p = ArmParams::defaults();
    p.joint_damping = {0.0, 0.0, 0.0};
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    std::uniform_real_distribution<double> rate(-3.0, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        ArmState s;
        s.q = Vec3(angle(rng), angle(rng), angle(rng));
        s.dq = Vec3(rate(rng), rate(rng), rate(rng));
        const double e0 = kinetic_energy(p, s);
        if (e0 < 1e-6) continue;
        for (int i = 0; i < 1000; ++i) {
            s = step_dynamics(p, s, Vec3::Zero(), Wrench2{}, 1e-3);
        }
        const double drift = std::abs(kinetic_energy(p, s) - e0) / (e0 * s.t);
        worst = std::max(worst, drift);
    }
    report(out, r, worst < 1e-6, "energy conservation",
           fmt("worst undriven drift %.3g per second over 5 trajectories (limit 1e-6)",
               worst));
}

// Random controller excursion sequences must never inject net energy.
void check_controller_net_work(std::FILE* out, SelfTestResult& r) {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> amp_dist(0.01, 0.2);
    std::uniform_int_distribution<int> count_dist(1, 5);
    std::uniform_int_distribution<int> which(0, 1);
    double worst_ratio = -1e300;
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const ForceProfile p = which(rng) == 0
                                   ? ForceProfile::linear_saturated(100.0, 5.0)
                                   : ForceProfile::tanh_saturated(150.0, 10.0, 0.05);
        FicState st;
        std::vector<std::pair<double, double>> trace;
        double peak_stored = 0.0;
        const int excursions = count_dist(rng);
        for (int e = 0; e < excursions; ++e) {
            const double amp = (which(rng) == 0 ? 1.0 : -1.0) * amp_dist(rng);
            const double dt = 1e-3;
            for (int i = 0; i <= 1000; ++i) {
                const double t = i * dt;
                const double err = amp * std::sin(kPi * t);
                const double d_err = amp * kPi * std::cos(kPi * t);
                const FicResult res = fic_effort(p, st, err, d_err);
                st = res.state;
                trace.emplace_back(err, res.effort);
            }
            double stored = 0.0;
            const int n = 2000;
            const double hh = std::abs(amp) / n;
            for (int i = 0; i < n; ++i) {
                stored += 0.5 * (profile_force(p, i * hh) + profile_force(p, (i + 1) * hh)) * hh;
            }
            peak_stored = std::max(peak_stored, stored);
        }
        const double net = fic_energy_audit(trace);
        worst_ratio = std::max(worst_ratio, net / peak_stored);
        if (net > 1e-9 * peak_stored) ok = false;
    }
    report(out, r, ok, "controller passivity",
           fmt("worst net-work ratio %.3g over 100 excursion traces (limit 1e-9)",
               worst_ratio));
}

// Applied torques stay inside the per-joint ceilings across a scaled run.
void check_torque_ceiling(std::FILE* out, SelfTestResult& r) {
    ExperimentConfig c = ExperimentConfig::defaults();
    c.cycles_per_target = 5;
    double worst = 0.0;
    bool ok = true;
    const auto limits = c.arm.joint_torque_limits;
    run_experiment(c, [&](const TrajectorySample& s) {
        for (int i = 0; i < 3; ++i) {
            const double ratio = std::abs(s.tau[i]) / limits[i];
            worst = std::max(worst, ratio);
            if (std::abs(s.tau[i]) > limits[i] + 1e-12) ok = false;
        }
    });
    report(out, r, ok, "torque ceiling",
           fmt("worst |torque|/limit %.6f across a 5-cycle clock run (limit 1)", worst));
}

// Two identical runs must produce byte-identical sample streams.
void check_determinism(std::FILE* out, SelfTestResult& r) {
    ExperimentConfig c = ExperimentConfig::defaults();
    c.cycles_per_target = 1;
    auto run_once = [&](std::uint64_t& hash, std::vector<MovementRecord>& recs) {
        SampleWriter w("");
        const ExperimentResult res =
            run_experiment(c, [&](const TrajectorySample& s) { w.push(s); });
        w.close();
        hash = w.content_hash();
        recs = res.records;
    };
    std::uint64_t h1 = 0, h2 = 0;
    std::vector<MovementRecord> r1, r2;
    run_once(h1, r1);
    run_once(h2, r2);
    bool ok = h1 == h2 && r1.size() == r2.size();
    if (ok) {
        for (std::size_t i = 0; i < r1.size(); ++i) {
            const MovementRecord& a = r1[i];
            const MovementRecord& b = r2[i];
            if (a.r_planned != b.r_planned || a.r_executed != b.r_executed ||
                a.rmse_pos != b.rmse_pos || a.rmse_vel != b.rmse_vel ||
                a.peak_speed != b.peak_speed || a.settle_time != b.settle_time ||
                a.final_error != b.final_error || a.flagged != b.flagged) {
                ok = false;
                break;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "repeated runs hash to %016llx and %016llx with %zu records each",
                  static_cast<unsigned long long>(h1),
                  static_cast<unsigned long long>(h2), r1.size());
    report(out, r, ok, "determinism", buf);
}

// Untrimmed speed-ratio values for densely sampled analytic references.
void check_ratio_oracles(std::FILE* out, SelfTestResult& r) {
    ReferenceTrajectory mj_ref{ReferenceKind::MinimumJerk, 0.1, 1.0};
    ReferenceTrajectory ha_ref{ReferenceKind::Harmonic, 0.1, 1.0};
    const int n = 200000;
    std::vector<double> mj(n), ha(n);
    for (int i = 0; i < n; ++i) {
        const double t = (i + 0.5) / n;
        mj[i] = reference_eval(mj_ref, t).velocity;
        ha[i] = reference_eval(ha_ref, t).velocity;
    }
    const double r_mj = r_value(mj, 0.0);
    const double r_ha = r_value(ha, 0.0);
    const bool ok = std::abs(r_mj - 1.875) < 1e-3 && std::abs(r_ha - kPi / 2) < 1e-3;
    report(out, r, ok, "speed ratio oracles",
           fmt("minimum jerk %.6f (expect 1.875), harmonic %.6f (expect pi/2)", r_mj,
               r_ha));
}

}  // namespace

SelfTestResult run_selftest(std::FILE* out) {
    SelfTestResult result;
    check_kinematics_round_trip(out, result);
    check_jacobian(out, result);
    check_energy_drift(out, result);
    check_controller_net_work(out, result);
    check_torque_ceiling(out, result);
    check_determinism(out, result);
    check_ratio_oracles(out, result);
    return result;
}

}  // namespace hpmc
