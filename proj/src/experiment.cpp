#include "hpmc/experiment.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "hpmc/analysis.hpp"
#include "hpmc/posture.hpp"

namespace hpmc {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

const char* const kSampleHeader =
    "t,movement,target,phase,xd_x,xd_y,vd_x,vd_y,x_x,x_y,v_x,v_y,"
    "q_1,q_2,q_3,dq_1,dq_2,dq_3,tau_1,tau_2,tau_3,"
    "w_arm_x,w_arm_y,w_forearm_x,w_forearm_y,w_hand_x,w_hand_y";
constexpr int kSampleColumns = 27;

const char* const kRecordHeader =
    "movement,target,phase,r_planned,r_executed,rmse_pos,rmse_vel,"
    "peak_speed,settle_time,final_error,flagged";
constexpr int kRecordColumns = 11;

// doubles of one sample in column order, after the three integer columns
std::array<double, 23> sample_doubles(const TrajectorySample& s) {
    return {s.x_d.x(),      s.x_d.y(),      s.v_d.x(),      s.v_d.y(),
            s.x.x(),        s.x.y(),        s.v.x(),        s.v.y(),
            s.q[0],         s.q[1],         s.q[2],         s.dq[0],
            s.dq[1],        s.dq[2],        s.tau[0],       s.tau[1],
            s.tau[2],       s.w_arm.x(),    s.w_arm.y(),    s.w_forearm.x(),
            s.w_forearm.y(), s.w_hand.x(),  s.w_hand.y()};
}

void append_num(std::string* line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line->append(buf);
}

struct FileHandle {
    std::FILE* f = nullptr;
    explicit FileHandle(const std::string& path, const char* mode) {
        f = std::fopen(path.c_str(), mode);
        if (!f) throw DataError("cannot open: " + path);
    }
    ~FileHandle() {
        if (f) std::fclose(f);
    }
};

[[noreturn]] void row_error(const std::string& path, std::size_t row,
                            const std::string& what) {
    throw DataError(path + " row " + std::to_string(row) + ": " + what);
}

// splits a mutable line on commas; returns the field count actually found
int split_fields(char* line, char** fields, int max_fields) {
    int n = 0;
    char* p = line;
    while (n < max_fields) {
        fields[n++] = p;
        char* c = std::strchr(p, ',');
        if (!c) return n;
        *c = '\0';
        p = c + 1;
    }
    return max_fields + 1;  // a separator past the last expected field
}

double parse_double(const char* s, const std::string& path, std::size_t row) {
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !std::isfinite(v)) {
        row_error(path, row, std::string("malformed number '") + s + "'");
    }
    return v;
}

long parse_int(const char* s, const std::string& path, std::size_t row) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0') {
        row_error(path, row, std::string("malformed integer '") + s + "'");
    }
    return v;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    c.arm = ArmParams::defaults();
    c.stack = StackParams::defaults();
    return c;
}

Vec2 ExperimentConfig::target(int k) const {
    const double ang = 2.0 * kPi * static_cast<double>(k) /
                       static_cast<double>(n_targets);
    return home() + clock_radius * Vec2{std::cos(ang), std::sin(ang)};
}

int ExperimentConfig::ticks_per_movement() const {
    return static_cast<int>(std::lround(target_period * stack.control_rate));
}

void ExperimentConfig::validate() const {
    arm.validate();
    planner.validate();
    stack.validate();
    if (!(clock_radius > 0.0) || !std::isfinite(clock_radius)) {
        throw ConfigError("experiment: clock radius must be positive");
    }
    if (n_targets < 1) {
        throw ConfigError("experiment: need at least one target");
    }
    if (cycles_per_target < 1) {
        throw ConfigError("experiment: need at least one cycle per target");
    }
    if (!(target_period > 0.0) || !std::isfinite(target_period)) {
        throw ConfigError("experiment: target period must be positive");
    }
    const double ticks = target_period * stack.control_rate;
    if (std::abs(ticks - std::lround(ticks)) > 1e-9 * std::max(1.0, ticks) ||
        std::lround(ticks) < 1) {
        throw ConfigError(
            "experiment: target period must be a whole number of control ticks");
    }
    if (std::abs(planner.planner_rate - stack.control_rate) > 1e-12) {
        throw ConfigError("experiment: planner and control rates must match");
    }
    // every hand point the protocol commands must have a posture
    const Vec2 h = home();
    for (int k = 0; k < n_targets; ++k) {
        const Vec2 tgt = target(k);
        const Vec2 w_t = (tgt - h).normalized();
        try {
            const Pose2 wh = wrist_target(Pose2{h.x(), h.y(), 0.0}, w_t,
                                          arm.link_lengths[2]);
            const Pose2 wt = wrist_target(Pose2{tgt.x(), tgt.y(), 0.0}, w_t,
                                          arm.link_lengths[2]);
            arm_ik(wh, wh.phi, arm);
            arm_ik(wt, wt.phi, arm);
        } catch (const UnreachableTargetError&) {
            throw ConfigError("experiment: target " + std::to_string(k) +
                              " is outside the reachable workspace");
        }
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const SampleSink& sink) {
    config.validate();
    const double dt = 1.0 / config.stack.control_rate;
    const int ticks = config.ticks_per_movement();
    const double l_h = config.arm.link_lengths[2];
    const Vec2 home = config.home();

    ExperimentResult result;
    result.records.reserve(static_cast<std::size_t>(config.n_targets) * 2u *
                           static_cast<std::size_t>(config.cycles_per_target));
    std::vector<TrajectorySample> window;
    window.reserve(static_cast<std::size_t>(ticks));

    int movement_id = 0;
    for (int k = 0; k < config.n_targets; ++k) {
        const Vec2 tgt = config.target(k);
        const Vec2 w_t = (tgt - home).normalized();

        // each block starts parked at home in the block's task direction
        const Pose2 wrist_home =
            wrist_target(Pose2{home.x(), home.y(), 0.0}, w_t, l_h);
        PostureTarget posture = arm_ik(wrist_home, wrist_home.phi, config.arm);
        ArmState arm_state;
        arm_state.q = posture.q_d;
        arm_state.t = config.target_period * movement_id;
        PlannerState plan =
            make_planner(config.planner, Pose2{home.x(), home.y(), 0.0});
        StackState stack = make_stack_state();
        Vec3 q_prev = posture.q_d;

        for (int cycle = 0; cycle < config.cycles_per_target; ++cycle) {
            for (int phase = 0; phase < 2; ++phase) {
                const Vec2 goal = phase == 0 ? tgt : home;
                const double t0 = config.target_period * movement_id;
                plan = set_target(config.planner, plan,
                                  Pose2{goal.x(), goal.y(), 0.0});
                window.clear();
                bool aborted = false;
                try {
                    for (int j = 0; j < ticks; ++j) {
                        plan = planner_step(config.planner, plan, dt);
                        const Pose2 wr = wrist_target(plan.x_d, w_t, l_h);
                        IkOptions opt;
                        opt.q_prev = q_prev;
                        posture = arm_ik(wr, wr.phi, config.arm, opt);
                        q_prev = posture.q_d;
                        const ControlOutput out =
                            control_tick(config.stack, stack, config.arm,
                                         arm_state, posture, plan.x_d, Wrench2{});
                        arm_state = step_dynamics(config.arm, arm_state,
                                                  out.tau_applied, Wrench2{}, dt);

                        TrajectorySample s;
                        s.t = t0 + dt * (j + 1);
                        s.movement_id = movement_id;
                        s.target_id = k;
                        s.phase = phase;
                        s.x_d = plan.x_d.position();
                        s.v_d = plan.v_d;
                        const LinkPoses fk =
                            forward_kinematics(config.arm, arm_state.q);
                        s.x = fk.hand.position();
                        s.v = (geometric_jacobian(config.arm, arm_state.q) *
                               arm_state.dq)
                                  .head<2>();
                        s.q = arm_state.q;
                        s.dq = arm_state.dq;
                        s.tau = out.tau_applied;
                        s.w_arm = out.w_ld.arm.force();
                        s.w_forearm = out.w_ld.forearm.force();
                        s.w_hand = out.w_ld.hand.force();
                        window.push_back(s);
                        if (sink) sink(s);
                    }
                } catch (const UnreachableTargetError&) {
                    aborted = true;
                } catch (const IntegrationError&) {
                    aborted = true;
                }

                MovementRecord rec;
                if (!window.empty()) {
                    rec = movement_metrics(window, ticks);
                } else {
                    rec.flagged = true;
                }
                rec.movement_id = movement_id;
                rec.target_id = k;
                rec.phase = phase;
                if (aborted) {
                    rec.flagged = true;
                    ++result.aborted_movements;
                    // park the plant on the goal posture and resume the schedule
                    const Pose2 wg =
                        wrist_target(Pose2{goal.x(), goal.y(), 0.0}, w_t, l_h);
                    posture = arm_ik(wg, wg.phi, config.arm);
                    arm_state.q = posture.q_d;
                    arm_state.dq = Vec3::Zero();
                    arm_state.t = config.target_period * (movement_id + 1);
                    plan = make_planner(config.planner,
                                        Pose2{goal.x(), goal.y(), 0.0});
                    stack = make_stack_state();
                    q_prev = posture.q_d;
                }
                result.records.push_back(rec);
                ++movement_id;
            }
        }
    }
    return result;
}

SampleWriter::SampleWriter(const std::string& path)
    : path_(path), hash_(kFnvOffset) {
    if (!path_.empty()) {
        file_ = std::fopen(path_.c_str(), "wb");
        if (!file_) throw DataError("cannot open for writing: " + path_);
    }
    emit(std::string(kSampleHeader) + "\n");
}

SampleWriter::~SampleWriter() {
    if (file_) {
        std::fclose(file_);
        file_ = nullptr;
    }
}

void SampleWriter::emit(const std::string& line) {
    for (unsigned char c : line) {
        hash_ ^= c;
        hash_ *= kFnvPrime;
    }
    if (file_ && std::fwrite(line.data(), 1, line.size(), file_) != line.size()) {
        throw DataError("short write: " + path_);
    }
}

void SampleWriter::push(const TrajectorySample& s) {
    const std::array<double, 23> nums = sample_doubles(s);
    if (!std::isfinite(s.t)) {
        throw DataError("sample has a non-finite timestamp");
    }
    for (double v : nums) {
        if (!std::isfinite(v)) {
            throw DataError("sample contains a non-finite value");
        }
    }
    std::string line;
    line.reserve(512);
    append_num(&line, s.t);
    line += ',';
    line += std::to_string(s.movement_id);
    line += ',';
    line += std::to_string(s.target_id);
    line += ',';
    line += std::to_string(s.phase);
    for (double v : nums) {
        line += ',';
        append_num(&line, v);
    }
    line += '\n';
    emit(line);
    ++rows_;
}

void SampleWriter::close() {
    if (file_) {
        const int rc = std::fclose(file_);
        file_ = nullptr;
        if (rc != 0) throw DataError("close failed: " + path_);
    }
}

void write_samples(const std::vector<TrajectorySample>& samples,
                   const std::string& path) {
    SampleWriter w(path);
    for (const TrajectorySample& s : samples) w.push(s);
    w.close();
}

std::vector<TrajectorySample> read_samples(const std::string& path) {
    FileHandle fh(path, "rb");
    char buf[4096];
    if (!std::fgets(buf, sizeof buf, fh.f)) {
        throw DataError(path + ": empty file");
    }
    buf[std::strcspn(buf, "\r\n")] = '\0';
    if (std::strcmp(buf, kSampleHeader) != 0) {
        throw DataError(path + ": unrecognized sample header");
    }
    std::vector<TrajectorySample> out;
    std::size_t row = 1;
    while (std::fgets(buf, sizeof buf, fh.f)) {
        ++row;
        buf[std::strcspn(buf, "\r\n")] = '\0';
        if (buf[0] == '\0') continue;
        char* fields[kSampleColumns];
        if (split_fields(buf, fields, kSampleColumns) != kSampleColumns) {
            row_error(path, row, "expected 27 fields");
        }
        TrajectorySample s;
        s.t = parse_double(fields[0], path, row);
        s.movement_id = static_cast<int>(parse_int(fields[1], path, row));
        s.target_id = static_cast<int>(parse_int(fields[2], path, row));
        s.phase = static_cast<int>(parse_int(fields[3], path, row));
        double d[23];
        for (int i = 0; i < 23; ++i) {
            d[i] = parse_double(fields[4 + i], path, row);
        }
        s.x_d = {d[0], d[1]};
        s.v_d = {d[2], d[3]};
        s.x = {d[4], d[5]};
        s.v = {d[6], d[7]};
        s.q = {d[8], d[9], d[10]};
        s.dq = {d[11], d[12], d[13]};
        s.tau = {d[14], d[15], d[16]};
        s.w_arm = {d[17], d[18]};
        s.w_forearm = {d[19], d[20]};
        s.w_hand = {d[21], d[22]};
        out.push_back(s);
    }
    return out;
}

void write_records(const std::vector<MovementRecord>& records,
                   const std::string& path) {
    FileHandle fh(path, "wb");
    std::fprintf(fh.f, "%s\n", kRecordHeader);
    for (const MovementRecord& r : records) {
        const double nums[7] = {r.r_planned,  r.r_executed, r.rmse_pos,
                                r.rmse_vel,   r.peak_speed, r.settle_time,
                                r.final_error};
        for (double v : nums) {
            if (!std::isfinite(v)) {
                throw DataError("record contains a non-finite value");
            }
        }
        std::fprintf(fh.f,
                     "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                     r.movement_id, r.target_id, r.phase, r.r_planned,
                     r.r_executed, r.rmse_pos, r.rmse_vel, r.peak_speed,
                     r.settle_time, r.final_error, r.flagged ? 1 : 0);
    }
}

std::vector<MovementRecord> read_records(const std::string& path) {
    FileHandle fh(path, "rb");
    char buf[1024];
    if (!std::fgets(buf, sizeof buf, fh.f)) {
        throw DataError(path + ": empty file");
    }
    buf[std::strcspn(buf, "\r\n")] = '\0';
    if (std::strcmp(buf, kRecordHeader) != 0) {
        throw DataError(path + ": unrecognized record header");
    }
    std::vector<MovementRecord> out;
    std::size_t row = 1;
    while (std::fgets(buf, sizeof buf, fh.f)) {
        ++row;
        buf[std::strcspn(buf, "\r\n")] = '\0';
        if (buf[0] == '\0') continue;
        char* fields[kRecordColumns];
        if (split_fields(buf, fields, kRecordColumns) != kRecordColumns) {
            row_error(path, row, "expected 11 fields");
        }
        MovementRecord r;
        r.movement_id = static_cast<int>(parse_int(fields[0], path, row));
        r.target_id = static_cast<int>(parse_int(fields[1], path, row));
        r.phase = static_cast<int>(parse_int(fields[2], path, row));
        r.r_planned = parse_double(fields[3], path, row);
        r.r_executed = parse_double(fields[4], path, row);
        r.rmse_pos = parse_double(fields[5], path, row);
        r.rmse_vel = parse_double(fields[6], path, row);
        r.peak_speed = parse_double(fields[7], path, row);
        r.settle_time = parse_double(fields[8], path, row);
        r.final_error = parse_double(fields[9], path, row);
        const long fl = parse_int(fields[10], path, row);
        if (fl != 0 && fl != 1) row_error(path, row, "flagged must be 0 or 1");
        r.flagged = fl == 1;
        out.push_back(r);
    }
    return out;
}

}  // namespace hpmc
