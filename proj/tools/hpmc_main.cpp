#include "CLI11.hpp"

#include "hpmc/analysis.hpp"
#include "hpmc/config.hpp"
#include "hpmc/experiment.hpp"
#include "hpmc/selftest.hpp"
#include "hpmc/types.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

namespace {

constexpr const char* kVersion = "hpmc 1.0.0";

std::uint64_t fnv1a_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw hpmc::DataError("manifest: cannot reopen " + path);
    std::uint64_t h = 1469598103934665603ull;
    unsigned char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= buf[i];
            h *= 1099511628211ull;
        }
    }
    std::fclose(f);
    return h;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> sets;
    int cycles = 0;
    bool quiet = false;
};

// Defaults, then the config file, then the --cycles shortcut, then each
// --set assignment in command-line order (so --set wins over --cycles).
hpmc::ExperimentConfig build_config(const CommonOpts& opts) {
    hpmc::ExperimentConfig config = opts.config_path.empty()
                                        ? hpmc::ExperimentConfig::defaults()
                                        : hpmc::load_config(opts.config_path);
    if (opts.cycles > 0) config.cycles_per_target = opts.cycles;
    for (const std::string& s : opts.sets) hpmc::apply_override(&config, s);
    config.validate();
    return config;
}

int cmd_run(const CommonOpts& opts) {
    const hpmc::ExperimentConfig config = build_config(opts);
    std::filesystem::create_directories(opts.out_dir);
    const std::string samples_path = opts.out_dir + "/samples.csv";
    const std::string records_path = opts.out_dir + "/records.csv";
    const std::string manifest_path = opts.out_dir + "/manifest.txt";

    hpmc::SampleWriter writer(samples_path);
    const hpmc::ExperimentResult result = hpmc::run_experiment(
        config, [&](const hpmc::TrajectorySample& s) { writer.push(s); });
    writer.close();
    hpmc::write_records(result.records, records_path);

    std::string manifest;
    manifest += std::string("tool: ") + kVersion + "\n";
    manifest += "created: " + utc_timestamp() + "\n";
    char line[160];
    std::snprintf(line, sizeof line, "samples: samples.csv rows=%zu fnv1a=%016llx\n",
                  writer.rows(),
                  static_cast<unsigned long long>(writer.content_hash()));
    manifest += line;
    std::snprintf(line, sizeof line, "records: records.csv rows=%zu fnv1a=%016llx\n",
                  result.records.size(),
                  static_cast<unsigned long long>(fnv1a_file(records_path)));
    manifest += line;
    std::snprintf(line, sizeof line, "aborted_movements: %d\n",
                  result.aborted_movements);
    manifest += line;
    manifest += "config:\n";
    manifest += hpmc::config_to_text(config);
    std::FILE* mf = std::fopen(manifest_path.c_str(), "w");
    if (!mf) throw hpmc::DataError("manifest: cannot open " + manifest_path);
    std::fwrite(manifest.data(), 1, manifest.size(), mf);
    if (std::fclose(mf) != 0) throw hpmc::DataError("manifest: write failed");

    if (!opts.quiet) {
        std::fprintf(stderr, "%s",
                     hpmc::summary_report(config, result.records).c_str());
        std::fprintf(stderr, "wrote %s, %s, %s\n", samples_path.c_str(),
                     records_path.c_str(), manifest_path.c_str());
    }
    return 0;
}

int cmd_analyze(const CommonOpts& opts, const std::string& samples_path) {
    const hpmc::ExperimentConfig config = build_config(opts);
    const std::vector<hpmc::TrajectorySample> samples =
        hpmc::read_samples(samples_path);
    if (samples.empty()) {
        throw hpmc::DataError("analyze: no movements in " + samples_path);
    }
    const auto windows = hpmc::split_movements(samples);
    std::size_t expected = 0;
    for (const auto& w : windows) expected = std::max(expected, w.size());
    std::vector<hpmc::MovementRecord> records;
    records.reserve(windows.size());
    for (const auto& w : windows) {
        records.push_back(hpmc::movement_metrics(w, static_cast<int>(expected)));
    }

    std::filesystem::create_directories(opts.out_dir);
    hpmc::write_records(records, opts.out_dir + "/records.csv");
    hpmc::emit_plot_data(config, records, samples, opts.out_dir);
    if (!opts.quiet) {
        std::fprintf(stderr, "%s", hpmc::summary_report(config, records).c_str());
        std::fprintf(stderr, "wrote records and figure data under %s\n",
                     opts.out_dir.c_str());
    }
    return 0;
}

int cmd_selftest() {
    const hpmc::SelfTestResult r = hpmc::run_selftest(stdout);
    std::fprintf(stderr, "%d of %d properties passed\n", r.properties - r.failures,
                 r.properties);
    return r.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"planar reaching experiments with passive cartesian control"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "simulate the clock experiment");
    run->add_option("--config", run_opts.config_path,
                    "key=value config file (defaults apply when omitted)");
    run->add_option("--out", run_opts.out_dir, "output directory")
        ->capture_default_str();
    run->add_option("--set", run_opts.sets, "override one config key, repeatable");
    run->add_option("--cycles", run_opts.cycles,
                    "shortcut for experiment.cycles_per_target");
    run->add_flag("--quiet", run_opts.quiet, "suppress the summary on stderr");

    CommonOpts an_opts;
    std::string samples_path;
    CLI::App* an = app.add_subcommand(
        "analyze", "recompute movement records and figure data from samples");
    an->add_option("--samples", samples_path, "sample file from a previous run")
        ->required();
    an->add_option("--config", an_opts.config_path,
                   "config file matching the run (for geometry)");
    an->add_option("--out", an_opts.out_dir, "output directory")
        ->capture_default_str();
    an->add_option("--set", an_opts.sets, "override one config key, repeatable");
    an->add_flag("--quiet", an_opts.quiet, "suppress the summary on stderr");

    CLI::App* self = app.add_subcommand("selftest", "run the built-in property checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            if (!run_opts.config_path.empty() &&
                !std::filesystem::exists(run_opts.config_path)) {
                std::fprintf(stderr, "hpmc: config file not found: %s\n",
                             run_opts.config_path.c_str());
                return 2;
            }
            return cmd_run(run_opts);
        }
        if (*an) {
            if (!an_opts.config_path.empty() &&
                !std::filesystem::exists(an_opts.config_path)) {
                std::fprintf(stderr, "hpmc: config file not found: %s\n",
                             an_opts.config_path.c_str());
                return 2;
            }
            return cmd_analyze(an_opts, samples_path);
        }
        if (*self) return cmd_selftest();
    } catch (const hpmc::Error& e) {
        std::fprintf(stderr, "hpmc: %s\n", e.what());
        return 1;
    }
    return 0;
}
