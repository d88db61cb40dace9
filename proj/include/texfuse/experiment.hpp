#pragma once

#include "texfuse/ensemble.hpp"
#include "texfuse/registry.hpp"
#include "texfuse/svm.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace texfuse {

struct ManifestEntry {
    std::string path;  // relative to the dataset root, '/' separated
    std::size_t label = 0;
    int fold = 0;
    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    std::filesystem::path root;
    std::vector<std::string> classes;
    std::vector<ManifestEntry> entries;
    int folds = 10;

    std::vector<std::size_t> train_indices(int fold) const;
    std::vector<std::size_t> test_indices(int fold) const;
    std::vector<std::string> paths() const;
    std::vector<std::size_t> labels() const;
};

/// Scans `<root>/<class>/*.png` (classes sorted lexicographically). Without a
/// folds file, entries get stratified folds from `seed`; otherwise the file
/// (`<relative_path>\t<fold>` per line) must list every image exactly once.
DatasetManifest load_manifest(const std::filesystem::path& root,
                              const std::optional<std::filesystem::path>& folds_file = std::nullopt,
                              int folds = 10, std::uint64_t seed = 0);

void write_folds_file(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Decodes every manifest image; errors name the offending path.
std::vector<GrayImage> load_images(const DatasetManifest& manifest);

/// Per-image vectors keyed by relative path, aligned to a manifest.
struct ExternalFeatureSet {
    std::string source_id;
    std::size_t dim = 0;
    Matrix features;  // rows in manifest order
};

/// CSV with header `path,f0,f1,...` and one row per manifest image.
ExternalFeatureSet import_external_features(const std::filesystem::path& csv, const DatasetManifest& manifest,
                                            std::string source_id = "external");

/// On-disk cache of feature matrices and codebooks; writes are atomic renames,
/// so concurrent inserts of distinct keys are safe.
class FeatureCache {
public:
    explicit FeatureCache(std::filesystem::path dir);

    std::optional<Matrix> load_features(const std::string& key, std::span<const std::string> paths) const;
    void store_features(const std::string& key, std::span<const std::string> paths, const Matrix& features) const;
    std::filesystem::path codebook_path(const std::string& key) const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

    std::size_t hits() const noexcept { return hits_.load(); }

private:
    std::filesystem::path dir_;
    mutable std::atomic<std::size_t> hits_{0};
};

/// Which training inputs fed each fitted object of one fold.
struct FoldAudit {
    int fold = 0;
    std::uint64_t codebook_inputs = 0;  // 0 when the descriptor needs no training
    std::uint64_t svm_inputs = 0;
};

/// Order-independent fingerprint of a set of relative paths.
std::uint64_t path_set_checksum(std::span<const std::string> paths);

struct CvResult {
    std::string id;
    ScoreMatrix scores;  // manifest order; each row scored by the fold holding it out
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
    std::vector<FoldAudit> audits;
};

struct CvOptions {
    std::uint64_t seed = 0;
    FeatureCache* cache = nullptr;
};

/// Features for every image; trainable descriptors are fitted on `fold`'s
/// training split first. Uses and fills the cache when given.
Matrix extract_features(const DatasetManifest& manifest, std::span<const GrayImage> images,
                        const DescriptorConfig& config, std::optional<int> fold, const CvOptions& opts,
                        std::uint64_t* codebook_checksum = nullptr);

CvResult run_descriptor_cv(const DatasetManifest& manifest, std::span<const GrayImage> images,
                           const DescriptorConfig& config, const SvmParams& svm, const CvOptions& opts = {});

/// Same protocol on precomputed features (e.g. imported deep features).
CvResult run_feature_cv(const DatasetManifest& manifest, const Matrix& features, const std::string& id,
                        const SvmParams& svm);

/// Percentage of correct predictions on each fold's test rows.
std::vector<double> fold_accuracies(const DatasetManifest& manifest, std::span<const std::size_t> predictions);

struct AccuracyRow {
    std::string id;
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
    std::vector<std::string> members;  // fusions only
    bool operator==(const AccuracyRow&) const = default;
};

struct ExperimentReport {
    std::uint64_t seed = 0;
    int folds = 0;
    std::string config_snapshot;  // single-line JSON
    std::vector<AccuracyRow> descriptors;
    std::vector<AccuracyRow> fusions;
    bool operator==(const ExperimentReport&) const = default;
};

struct FusionOutcome {
    AccuracyRow row;
    FusedPrediction prediction;
};

/// Evaluates fusions in order. Each fusion's fused scores join the pool under
/// its name, so later fusions may build on earlier ones.
std::vector<FusionOutcome> run_fusion_experiment(const DatasetManifest& manifest,
                                                 std::span<const FusionConfig> fusions,
                                                 std::map<std::string, ScoreMatrix> scores);

/// results.txt (machine readable) and table.txt (plain-text tables).
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);
ExperimentReport read_report(const std::filesystem::path& results_file);
std::string render_tables(const ExperimentReport& report);

/// Score CSV with path, fold and label columns, used between CLI stages.
void write_cv_scores(const DatasetManifest& manifest, const ScoreMatrix& scores, const std::filesystem::path& path,
                     const std::string& fingerprint);
/// Returns nullopt if the file is missing or was produced under another fingerprint.
std::optional<ScoreMatrix> read_cv_scores(const DatasetManifest& manifest, const std::filesystem::path& path,
                                          const std::string& fingerprint = {});

}  // namespace texfuse
