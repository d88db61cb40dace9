// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "criteria.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

using namespace texfuse::testing;

int main() {
    struct Criterion {
        const char* name;
        std::function<CheckResult()> run;
    };
    const Criterion criteria[] = {
        {"oracle equivalence", [] { return check_oracle_equivalence(50); }},
        {"DLBP threshold", [] { return check_dlbp_threshold(1000); }},
        {"scLBP encoding example", check_sclbp_example},
        {"filter checks", check_filters},
        {"SVM (KKT, XOR, 3-blob)", check_svm},
        {"fusion algebra", check_fusion_algebra},
        {"determinism", check_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %s: %s (%.1fs)\n", r.pass ? "PASS" : "FAIL", c.name, r.detail.c_str(), secs);
        failed += r.pass ? 0 : 1;
    }
    if (std::getenv("TEXFUSE_VIRUS_DATASET")) {
        std::printf("[----] dataset reproduction: see the acceptance_dataset test\n");
    } else {
        std::printf("[NOT RUN] dataset reproduction: TEXFUSE_VIRUS_DATASET is unset; see the acceptance_dataset test\n");
    }
    std::fflush(stdout);
    return failed ? 1 : 0;
}
