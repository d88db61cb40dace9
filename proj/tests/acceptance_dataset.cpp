// Full 10-fold reproduction on the virus texture dataset.
// TEXFUSE_VIRUS_DATASET: dataset root (one directory per class). Exit 77 (skip) when unset.
// TEXFUSE_VIRUS_FOLDS: optional folds file. argv[1]: output directory for the run.

#include "texfuse/experiment.hpp"
#include "texfuse/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using namespace texfuse;

namespace {

const std::map<std::string, double> kReference = {
    {"JET", 58.93},      {"scLBP", 69.47},        {"AHP", 76.60},          {"HASC", 68.40},
    {"Gradient+ARCSLBP", 61.00}, {"ARCSLBP", 79.93}, {"AlphaLBP", 64.13}, {"SigmaARCSLBP", 75.40},
    {"DLBP", 70.33},     {"LCvMSP", 64.67},
};
constexpr double kNewSet = 85.40;

bool line(bool pass, const std::string& what) {
    std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", what.c_str());
    return pass;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    const char* dataset = std::getenv("TEXFUSE_VIRUS_DATASET");
    if (!dataset || !*dataset) {
        std::printf("[NOT RUN] dataset reproduction: TEXFUSE_VIRUS_DATASET is unset\n");
        return 77;
    }
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "texfuse-virus-run";
    fs::create_directories(out);

    nlohmann::json cfg = {{"dataset", fs::absolute(dataset).string()},
                          {"folds", 10},
                          {"seed", 1},
                          {"output", fs::absolute(out).string()},
                          {"workers", static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))},
                          {"descriptors", "standard"},
                          {"fusions", {{{"name", "NewSet"}, {"members", "descriptors"}}}}};
    if (const char* folds = std::getenv("TEXFUSE_VIRUS_FOLDS")) cfg["folds_file"] = fs::absolute(folds).string();
    const fs::path cfg_path = out / "virus.json";
    std::ofstream(cfg_path) << cfg.dump(2) << '\n';

    const std::string cfg_arg = cfg_path.string();
    const char* args[] = {"texfuse", "all", "--config", cfg_arg.c_str()};
    if (const int code = run_cli(4, args); code != 0) {
        std::printf("[FAIL] dataset reproduction: pipeline exited with %d\n", code);
        return 1;
    }
    const ExperimentReport report = read_report(out / "results.txt");

    std::map<std::string, double> acc;
    for (const auto& row : report.descriptors) acc[row.id] = row.mean_accuracy;
    bool ok = true;

    const double arcs = acc.count("ARCSLBP") ? acc["ARCSLBP"] : NAN;
    ok &= line(std::abs(arcs - 79.93) <= 6.0, "ARCSLBP " + fmt(arcs) + " within 6 of 79.93");

    int close = 0;
    std::string detail;
    for (const auto& [id, reference] : kReference) {
        const double got = acc.count(id) ? acc[id] : NAN;
        const bool near = std::abs(got - reference) <= 8.0;
        close += near ? 1 : 0;
        detail += " " + id + "=" + fmt(got) + (near ? "" : "*");
    }
    ok &= line(close >= 7, std::to_string(close) + "/10 descriptors within 8 of reference (* = outside):" + detail);

    double newset = NAN;
    for (const auto& row : report.fusions) {
        if (row.id == "NewSet") newset = row.mean_accuracy;
    }
    double best = 0.0;
    for (const auto& [id, a] : acc) best = std::max(best, a);
    ok &= line(std::abs(newset - kNewSet) <= 5.0 && newset >= best,
               "NewSet " + fmt(newset) + " within 5 of 85.40 and >= best member " + fmt(best));

    double worst = 100.0;
    for (const auto& [id, a] : acc) worst = std::min(worst, a);
    ok &= line(acc.size() == kReference.size() && worst >= 6.67 + 20.0,
               "every descriptor >= 26.67 (worst " + fmt(worst) + ")");
    return ok ? 0 : 1;
}
