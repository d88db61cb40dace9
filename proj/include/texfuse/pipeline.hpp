#pragma once

#include "texfuse/ensemble.hpp"
#include "texfuse/experiment.hpp"
#include "texfuse/registry.hpp"
#include "texfuse/svm.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace texfuse {

struct ExternalFeatureSource {
    std::string id;
    std::filesystem::path csv;
};

/// Parsed run configuration. Relative paths are resolved against the config file's directory.
struct RunConfig {
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> folds_file;
    int folds = 10;
    std::uint64_t seed = 0;
    std::filesystem::path output;
    std::filesystem::path cache;
    int workers = 1;
    SvmParams svm;
    std::vector<DescriptorConfig> descriptors;
    std::vector<ExternalFeatureSource> external_features;
    std::vector<FusionConfig> fusions;
    std::string snapshot;  // canonical single-line JSON of the input config
};

/// Throws ConfigError naming the offending key.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Stages of the batch pipeline; each one resumes from artifacts under `output`.
void stage_extract(const RunConfig& cfg);
void stage_train_eval(const RunConfig& cfg);
void stage_fuse(const RunConfig& cfg);
ExperimentReport stage_report(const RunConfig& cfg);

/// Command-line entry point. Exit codes: 0 success, 1 runtime failure,
/// 2 bad config or usage, 3 missing dataset.
int run_cli(int argc, const char* const* argv);

}  // namespace texfuse
