#pragma once

#include <cstdio>

namespace hpmc {

// Outcome of the built-in property checks: how many ran and how many failed.
struct SelfTestResult {
    int properties = 0;
    int failures = 0;
};

// Runs the physics and pipeline invariants end to end, printing one
// "PASS name: detail" or "FAIL name: detail" line per property to `out`.
// The whole suite is deterministic and finishes in a few seconds.
SelfTestResult run_selftest(std::FILE* out);

}  // namespace hpmc
