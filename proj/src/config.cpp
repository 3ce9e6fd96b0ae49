#include "hpmc/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

namespace hpmc {

namespace {

struct KeyEntry {
    std::string key;
    std::string doc;
    std::function<double(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, double)> set;
};

void set_int(int* dst, double v, const char* key) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
        throw ConfigError(std::string("config: ") + key +
                          " needs a positive integer");
    }
    *dst = static_cast<int>(v);
}

// the three per-link task controllers all use the saturating tanh curve, so
// the keys expose its raw fields; validation happens once the full config is
// assembled, keeping assignments order-independent
void set_profile_field(ForceProfile* p, double ForceProfile::*field, double v) {
    p->variant = ProfileVariant::TanhSaturated;
    p->*field = v;
}

const std::vector<KeyEntry>& key_table() {
    static const std::vector<KeyEntry> table = [] {
        std::vector<KeyEntry> t;
        const auto add = [&](const std::string& key, const std::string& doc,
                             auto get, auto set) {
            t.push_back({key, doc,
                         std::function<double(const ExperimentConfig&)>(get),
                         std::function<void(ExperimentConfig&, double)>(set)});
        };

        add("experiment.clock_center_x", "clock circle center x, m",
            [](const ExperimentConfig& c) { return c.clock_center.x; },
            [](ExperimentConfig& c, double v) { c.clock_center.x = v; });
        add("experiment.clock_center_y", "clock circle center y, m",
            [](const ExperimentConfig& c) { return c.clock_center.y; },
            [](ExperimentConfig& c, double v) { c.clock_center.y = v; });
        add("experiment.clock_radius", "target circle radius, m",
            [](const ExperimentConfig& c) { return c.clock_radius; },
            [](ExperimentConfig& c, double v) { c.clock_radius = v; });
        add("experiment.n_targets", "targets on the circle",
            [](const ExperimentConfig& c) { return double(c.n_targets); },
            [](ExperimentConfig& c, double v) {
                set_int(&c.n_targets, v, "experiment.n_targets");
            });
        add("experiment.cycles_per_target", "out-and-back pairs per target",
            [](const ExperimentConfig& c) { return double(c.cycles_per_target); },
            [](ExperimentConfig& c, double v) {
                set_int(&c.cycles_per_target, v, "experiment.cycles_per_target");
            });
        add("experiment.target_period", "seconds per movement",
            [](const ExperimentConfig& c) { return c.target_period; },
            [](ExperimentConfig& c, double v) { c.target_period = v; });
        add("experiment.seed", "reserved, the pipeline is deterministic",
            [](const ExperimentConfig& c) { return double(c.seed); },
            [](ExperimentConfig& c, double v) {
                if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0) {
                    throw ConfigError("config: experiment.seed needs a non-negative integer");
                }
                c.seed = static_cast<unsigned>(v);
            });

        add("planner.m_d", "virtual mass, kg",
            [](const ExperimentConfig& c) { return c.planner.m_d; },
            [](ExperimentConfig& c, double v) { c.planner.m_d = v; });
        add("planner.a_max", "reference acceleration ceiling, m/s^2",
            [](const ExperimentConfig& c) { return c.planner.a_max; },
            [](ExperimentConfig& c, double v) { c.planner.a_max = v; });
        add("planner.rate", "planner sample rate, Hz",
            [](const ExperimentConfig& c) { return c.planner.planner_rate; },
            [](ExperimentConfig& c, double v) { c.planner.planner_rate = v; });
        add("planner.k0", "elastic band linear stiffness, N/m",
            [](const ExperimentConfig& c) { return c.planner.k0; },
            [](ExperimentConfig& c, double v) { c.planner.k0 = v; });

        static const char* const kArmTriples[6] = {
            "link_length", "link_mass", "link_inertia",
            "com_offset",  "joint_damping", "torque_limit"};
        static const char* const kArmDocs[6] = {
            "link length, m",       "link mass, kg", "link inertia about COM, kg*m^2",
            "COM distance from proximal joint, m", "viscous damping, N*m*s/rad",
            "actuation ceiling, N*m"};
        for (int f = 0; f < 6; ++f) {
            for (int i = 0; i < 3; ++i) {
                const std::string name =
                    std::string("arm.") + kArmTriples[f] + "_" + char('1' + i);
                const int fi = f;
                const int ii = i;
                add(name, kArmDocs[f],
                    [fi, ii](const ExperimentConfig& c) {
                        const std::array<double, 3>* arr[6] = {
                            &c.arm.link_lengths,  &c.arm.link_masses,
                            &c.arm.link_inertias, &c.arm.com_offsets,
                            &c.arm.joint_damping, &c.arm.joint_torque_limits};
                        return (*arr[fi])[static_cast<std::size_t>(ii)];
                    },
                    [fi, ii](ExperimentConfig& c, double v) {
                        std::array<double, 3>* arr[6] = {
                            &c.arm.link_lengths,  &c.arm.link_masses,
                            &c.arm.link_inertias, &c.arm.com_offsets,
                            &c.arm.joint_damping, &c.arm.joint_torque_limits};
                        (*arr[fi])[static_cast<std::size_t>(ii)] = v;
                    });
            }
        }
        add("arm.hand_tip_offset", "perpendicular hand-point offset, m",
            [](const ExperimentConfig& c) { return c.arm.hand_tip_offset; },
            [](ExperimentConfig& c, double v) { c.arm.hand_tip_offset = v; });

        static const char* const kLinks[3] = {"elbow", "wrist", "hand"};
        for (int l = 0; l < 3; ++l) {
            const int li = l;
            const std::string nk = std::string("stack.") + kLinks[l] + "_k0";
            const std::string nf = std::string("stack.") + kLinks[l] + "_f_max";
            const std::string nx = std::string("stack.") + kLinks[l] + "_x_b";
            add(nk, "link controller linear stiffness, N/m",
                [li](const ExperimentConfig& c) {
                    return c.stack.link_profiles[static_cast<std::size_t>(li)].k0;
                },
                [li](ExperimentConfig& c, double v) {
                    set_profile_field(
                        &c.stack.link_profiles[static_cast<std::size_t>(li)],
                        &ForceProfile::k0, v);
                });
            add(nf, "link controller force ceiling, N",
                [li](const ExperimentConfig& c) {
                    return c.stack.link_profiles[static_cast<std::size_t>(li)].f_max;
                },
                [li](ExperimentConfig& c, double v) {
                    set_profile_field(
                        &c.stack.link_profiles[static_cast<std::size_t>(li)],
                        &ForceProfile::f_max, v);
                });
            add(nx, "link controller saturation onset, m",
                [li](const ExperimentConfig& c) {
                    return c.stack.link_profiles[static_cast<std::size_t>(li)].x_b;
                },
                [li](ExperimentConfig& c, double v) {
                    set_profile_field(
                        &c.stack.link_profiles[static_cast<std::size_t>(li)],
                        &ForceProfile::x_b, v);
                });
        }

        static const char* const kJointTriples[3] = {"joint_x1", "joint_x2", "t_amax"};
        static const char* const kJointDocs[3] = {
            "joint torque plateau onset, rad", "joint torque escalation start, rad",
            "joint actuation ceiling, N*m"};
        for (int f = 0; f < 3; ++f) {
            for (int i = 0; i < 3; ++i) {
                const std::string name =
                    std::string("stack.") + kJointTriples[f] + "_" + char('1' + i);
                const int fi = f;
                const int ii = i;
                add(name, kJointDocs[f],
                    [fi, ii](const ExperimentConfig& c) {
                        const std::array<double, 3>* arr[3] = {
                            &c.stack.joint_x1, &c.stack.joint_x2, &c.stack.t_amax};
                        return (*arr[fi])[static_cast<std::size_t>(ii)];
                    },
                    [fi, ii](ExperimentConfig& c, double v) {
                        std::array<double, 3>* arr[3] = {
                            &c.stack.joint_x1, &c.stack.joint_x2, &c.stack.t_amax};
                        (*arr[fi])[static_cast<std::size_t>(ii)] = v;
                    });
            }
        }
        add("stack.control_rate", "control loop rate, Hz",
            [](const ExperimentConfig& c) { return c.stack.control_rate; },
            [](ExperimentConfig& c, double v) { c.stack.control_rate = v; });
        add("stack.literal_limit_rows",
            "0/1: torque ceilings from full hand-Jacobian rows",
            [](const ExperimentConfig& c) {
                return c.stack.literal_limit_rows ? 1.0 : 0.0;
            },
            [](ExperimentConfig& c, double v) {
                if (v != 0.0 && v != 1.0) {
                    throw ConfigError("config: stack.literal_limit_rows needs 0 or 1");
                }
                c.stack.literal_limit_rows = v == 1.0;
            });
        return t;
    }();
    return table;
}

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

void apply_assignment(ExperimentConfig& config, const std::string& key,
                      const std::string& raw) {
    for (const KeyEntry& e : key_table()) {
        if (key == e.key) {
            char* end = nullptr;
            const double v = std::strtod(raw.c_str(), &end);
            if (end == raw.c_str() || *end != '\0' || !std::isfinite(v)) {
                throw ConfigError("config: bad value '" + raw + "' for " + key);
            }
            e.set(config, v);
            return;
        }
    }
    throw ConfigError("config: unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const ExperimentConfig& base) {
    ExperimentConfig config = base;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(
            pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key=value");
        }
        try {
            apply_assignment(config, trim(line.substr(0, eq)),
                             trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " +
                              e.what());
        }
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw ConfigError("config: cannot open " + path);
    std::string text;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
    std::fclose(f);
    return parse_config(text, ExperimentConfig::defaults());
}

void apply_override(ExperimentConfig* config, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("config: override '" + assignment +
                          "' is not key=value");
    }
    apply_assignment(*config, trim(assignment.substr(0, eq)),
                     trim(assignment.substr(eq + 1)));
}

std::string config_to_text(const ExperimentConfig& config) {
    std::string out;
    char buf[160];
    for (const KeyEntry& e : key_table()) {
        std::snprintf(buf, sizeof buf, "%s = %.17g\n", e.key.c_str(),
                      e.get(config));
        out += buf;
    }
    return out;
}

std::string config_schema() {
    const ExperimentConfig defaults = ExperimentConfig::defaults();
    std::string out = "recognized keys (name = default  # meaning):\n";
    char buf[200];
    for (const KeyEntry& e : key_table()) {
        std::snprintf(buf, sizeof buf, "  %s = %.9g  # %s\n", e.key.c_str(),
                      e.get(defaults), e.doc.c_str());
        out += buf;
    }
    return out;
}

}  // namespace hpmc
