#include "hpmc/experiment.hpp"

#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "hpmc/analysis.hpp"

using namespace hpmc;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c = ExperimentConfig::defaults();
    c.cycles_per_target = 1;
    return c;
}

template <typename A, typename B>
bool same_bits(const A& a, const B& b) {
    return (a.array() == b.array()).all();
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/hpmc_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

// runs the protocol collecting both samples and the byte hash of the stream
struct RunCapture {
    std::vector<TrajectorySample> samples;
    ExperimentResult result;
    std::uint64_t hash = 0;
};

RunCapture capture_run(const ExperimentConfig& config) {
    RunCapture cap;
    SampleWriter hasher("");
    cap.result = run_experiment(config, [&](const TrajectorySample& s) {
        cap.samples.push_back(s);
        hasher.push(s);
    });
    cap.hash = hasher.content_hash();
    return cap;
}

// the one-cycle run several cases inspect; computed once
const RunCapture& shared_run() {
    static const RunCapture cap = capture_run(small_config());
    return cap;
}

}  // namespace

TEST_CASE("experiment geometry and schedule constants") {
    const ExperimentConfig c = ExperimentConfig::defaults();
    CHECK_NOTHROW(c.validate());
    CHECK(c.ticks_per_movement() == 1000);
    CHECK(c.home().x() == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(c.home().y() == doctest::Approx(0.0).epsilon(1e-15));

    CHECK(c.target(0).x() == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(c.target(0).y() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(c.target(2).x() == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(c.target(2).y() == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(c.target(4).x() == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(c.target(6).y() == doctest::Approx(-0.1).epsilon(1e-14));
}

TEST_CASE("experiment configuration validation") {
    ExperimentConfig c = ExperimentConfig::defaults();
    c.clock_radius = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = ExperimentConfig::defaults();
    c.cycles_per_target = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = ExperimentConfig::defaults();
    c.target_period = 0.0105;  // 10.5 control ticks
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = ExperimentConfig::defaults();
    c.planner.planner_rate = 500.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = ExperimentConfig::defaults();
    c.clock_radius = 0.5;  // pushes targets past the reachable annulus
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("a one-cycle run walks the full schedule") {
    const ExperimentConfig c = small_config();
    const RunCapture& cap = shared_run();

    CHECK(cap.result.records.size() == 16);
    CHECK(cap.result.aborted_movements == 0);
    CHECK(cap.samples.size() == 16000u);

    const double dt = 1.0 / c.stack.control_rate;
    int idx = 0;
    for (int m = 0; m < 16; ++m) {
        const MovementRecord& rec = cap.result.records[static_cast<std::size_t>(m)];
        CHECK(rec.movement_id == m);
        CHECK(rec.target_id == m / 2);
        CHECK(rec.phase == m % 2);
        CHECK(!rec.flagged);
        // each movement owns exactly one period of samples, stamped from its
        // own integer start time
        const double t0 = c.target_period * m;
        for (int j = 0; j < 1000; ++j, ++idx) {
            const TrajectorySample& s = cap.samples[static_cast<std::size_t>(idx)];
            CHECK(s.movement_id == m);
            if (j == 0) CHECK(s.t == t0 + dt);
            if (j == 999) CHECK(s.t == doctest::Approx(t0 + 1.0).epsilon(1e-12));
        }
    }
    for (std::size_t i = 1; i < cap.samples.size(); ++i) {
        REQUIRE(cap.samples[i].t > cap.samples[i - 1].t);
    }
}

TEST_CASE("every return leg parks the hand back at home") {
    const RunCapture& cap = shared_run();
    for (const MovementRecord& rec : cap.result.records) {
        if (rec.phase == 1) {
            CHECK(rec.final_error < 1e-3);
        }
        CHECK(rec.rmse_pos < 5e-3);
        CHECK(rec.r_planned > 1.4);
        CHECK(rec.r_planned < 1.7);
        CHECK(rec.r_executed > rec.r_planned);
    }
}

TEST_CASE("repeated runs are byte-identical") {
    const RunCapture& a = shared_run();
    const RunCapture b = capture_run(small_config());
    CHECK(a.hash == b.hash);
    REQUIRE(a.result.records.size() == b.result.records.size());
    for (std::size_t i = 0; i < a.result.records.size(); ++i) {
        CHECK(a.result.records[i].r_executed == b.result.records[i].r_executed);
        CHECK(a.result.records[i].rmse_pos == b.result.records[i].rmse_pos);
    }
}

TEST_CASE("sample files round-trip exactly") {
    ExperimentConfig c = small_config();
    c.n_targets = 2;  // a shorter run keeps the file small
    const RunCapture cap = capture_run(c);

    TempFile tmp("samples.csv");
    write_samples(cap.samples, tmp.path);
    const std::vector<TrajectorySample> back = read_samples(tmp.path);
    REQUIRE(back.size() == cap.samples.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        const TrajectorySample& x = cap.samples[i];
        const TrajectorySample& y = back[i];
        REQUIRE(x.t == y.t);
        REQUIRE(x.movement_id == y.movement_id);
        REQUIRE(x.target_id == y.target_id);
        REQUIRE(x.phase == y.phase);
        REQUIRE(same_bits(x.x_d, y.x_d));
        REQUIRE(same_bits(x.v_d, y.v_d));
        REQUIRE(same_bits(x.x, y.x));
        REQUIRE(same_bits(x.v, y.v));
        REQUIRE(same_bits(x.q, y.q));
        REQUIRE(same_bits(x.dq, y.dq));
        REQUIRE(same_bits(x.tau, y.tau));
        REQUIRE(same_bits(x.w_arm, y.w_arm));
        REQUIRE(same_bits(x.w_forearm, y.w_forearm));
        REQUIRE(same_bits(x.w_hand, y.w_hand));
    }

    // the streamed hash matches a writer fed from the decoded samples
    SampleWriter rehash("");
    for (const TrajectorySample& s : back) rehash.push(s);
    CHECK(rehash.content_hash() == cap.hash);
}

TEST_CASE("record files round-trip exactly") {
    const RunCapture& cap = shared_run();

    TempFile tmp("records.csv");
    write_records(cap.result.records, tmp.path);
    const std::vector<MovementRecord> back = read_records(tmp.path);
    REQUIRE(back.size() == cap.result.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        const MovementRecord& x = cap.result.records[i];
        const MovementRecord& y = back[i];
        CHECK(x.movement_id == y.movement_id);
        CHECK(x.target_id == y.target_id);
        CHECK(x.phase == y.phase);
        CHECK(x.r_planned == y.r_planned);
        CHECK(x.r_executed == y.r_executed);
        CHECK(x.rmse_pos == y.rmse_pos);
        CHECK(x.rmse_vel == y.rmse_vel);
        CHECK(x.peak_speed == y.peak_speed);
        CHECK(x.settle_time == y.settle_time);
        CHECK(x.final_error == y.final_error);
        CHECK(x.flagged == y.flagged);
    }
}

TEST_CASE("sample writer refuses non-finite values") {
    SampleWriter w("");
    TrajectorySample s;
    s.q[1] = std::nan("");
    CHECK_THROWS_AS(w.push(s), DataError);
    s.q[1] = 0.0;
    s.t = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(w.push(s), DataError);
}

TEST_CASE("sample reader reports malformed input by row") {
    TempFile tmp("bad.csv");

    const auto write_text = [&](const std::string& text) {
        std::FILE* f = std::fopen(tmp.path.c_str(), "wb");
        REQUIRE(f != nullptr);
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    };

    write_text("not,a,header\n");
    CHECK_THROWS_AS(read_samples(tmp.path), DataError);

    // a valid single-sample file to mutate
    TrajectorySample s;
    s.t = 0.001;
    write_samples({s}, tmp.path);
    const std::vector<TrajectorySample> ok = read_samples(tmp.path);
    CHECK(ok.size() == 1);

    std::string good;
    {
        std::FILE* f = std::fopen(tmp.path.c_str(), "rb");
        REQUIRE(f != nullptr);
        char buf[4096];
        std::size_t n = std::fread(buf, 1, sizeof buf, f);
        std::fclose(f);
        good.assign(buf, n);
    }

    write_text(good + "1,2\n");
    CHECK_THROWS_WITH_AS(read_samples(tmp.path),
                         doctest::Contains("row 3"), DataError);

    write_text(good.substr(0, good.size() - 4) + "oops\n");
    CHECK_THROWS_WITH_AS(read_samples(tmp.path),
                         doctest::Contains("row 2"), DataError);

    // header-only file decodes to an empty sample set
    const std::size_t header_end = good.find('\n');
    write_text(good.substr(0, header_end + 1));
    CHECK(read_samples(tmp.path).empty());
}
