#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hpmc/arm_model.hpp"
#include "hpmc/motor_stack.hpp"
#include "hpmc/planner.hpp"
#include "hpmc/types.hpp"

namespace hpmc {

// Reaching protocol: eight targets on a circle around a home point, the hand
// alternating home-to-target and target-to-home once per period.
struct ExperimentConfig {
    Pose2 clock_center{0.3, 0.0, 0.0};
    double clock_radius = 0.1;      // m
    int n_targets = 8;
    int cycles_per_target = 100;    // out-and-back pairs per target
    double target_period = 1.0;     // s per movement
    ArmParams arm;
    PlannerParams planner;
    StackParams stack;
    unsigned seed = 0;  // reserved; the pipeline is deterministic
    std::string output_path;

    static ExperimentConfig defaults();
    void validate() const;

    Vec2 home() const { return clock_center.position(); }
    Vec2 target(int k) const;          // k in [0, n_targets)
    int ticks_per_movement() const;    // period * control rate, exact
};

// One logged control tick. Planned and executed quantities are both stamped
// at the end of the tick they describe.
struct TrajectorySample {
    double t = 0.0;
    int movement_id = 0;
    int target_id = 0;
    int phase = 0;       // 0 = home to target, 1 = target to home
    Vec2 x_d{0, 0};      // planned hand position
    Vec2 v_d{0, 0};      // planned hand velocity
    Vec2 x{0, 0};        // executed hand position
    Vec2 v{0, 0};        // executed hand velocity (Jacobian * dq)
    Vec3 q = Vec3::Zero();
    Vec3 dq = Vec3::Zero();
    Vec3 tau = Vec3::Zero();  // torque held during this tick
    Vec2 w_arm{0, 0};         // per-link desired forces
    Vec2 w_forearm{0, 0};
    Vec2 w_hand{0, 0};
};

struct MovementRecord {
    int movement_id = 0;
    int target_id = 0;
    int phase = 0;
    double r_planned = 1.0;
    double r_executed = 1.0;
    double rmse_pos = 0.0;   // m
    double rmse_vel = 0.0;   // m/s
    double peak_speed = 0.0; // m/s
    double settle_time = 0.0;  // s from movement start
    double final_error = 0.0;  // m
    bool flagged = false;      // aborted or truncated movement
};

using SampleSink = std::function<void(const TrajectorySample&)>;

struct ExperimentResult {
    std::vector<MovementRecord> records;
    int aborted_movements = 0;
};

// Runs the full protocol. Every sample is handed to the sink in order (pass
// an empty function to drop them); per-movement records come back. A failed
// movement is flagged and the run continues from its goal posture.
ExperimentResult run_experiment(const ExperimentConfig& config, const SampleSink& sink);

// Streaming sample writer: columnar text, header row, 17 significant digits.
// Accumulates an FNV-1a hash of the exact bytes written; pass an empty path
// to hash without touching the filesystem.
class SampleWriter {
public:
    explicit SampleWriter(const std::string& path);
    ~SampleWriter();
    SampleWriter(const SampleWriter&) = delete;
    SampleWriter& operator=(const SampleWriter&) = delete;

    void push(const TrajectorySample& s);
    void close();
    std::uint64_t content_hash() const { return hash_; }
    std::size_t rows() const { return rows_; }

private:
    void emit(const std::string& line);
    std::FILE* file_ = nullptr;
    std::string path_;
    std::uint64_t hash_;
    std::size_t rows_ = 0;
};

void write_samples(const std::vector<TrajectorySample>& samples, const std::string& path);
std::vector<TrajectorySample> read_samples(const std::string& path);

void write_records(const std::vector<MovementRecord>& records, const std::string& path);
std::vector<MovementRecord> read_records(const std::string& path);

}  // namespace hpmc
