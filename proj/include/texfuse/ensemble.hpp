#pragma once

#include "texfuse/svm.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace texfuse {

enum class Normalization { None, ZScore };

/// How z-scores are pooled: over the whole matrix or per class column.
enum class ZScorePooling { Matrix, Column };

struct FusionConfig {
    std::string name;
    std::vector<std::string> members;
    Normalization normalization = Normalization::None;
    ZScorePooling pooling = ZScorePooling::Matrix;

    /// Throws ConfigError on an empty or duplicated member list.
    void validate() const;
};

struct FusedPrediction {
    std::vector<std::size_t> labels;  // argmax column, ties to the lowest index
    ScoreMatrix fused;
};

/// (s - mean) / std over all entries (population std, floored at 1e-12);
/// constant input maps to zeros.
ScoreMatrix znorm(const ScoreMatrix& scores, ZScorePooling pooling = ZScorePooling::Matrix);

/// Elementwise sum followed by a row-wise argmax.
FusedPrediction sum_rule(std::span<const ScoreMatrix> members);

FusedPrediction fuse(const FusionConfig& config, const std::map<std::string, ScoreMatrix>& scores);

/// CSV with a header row of class labels; one row per sample.
void write_scores_csv(const ScoreMatrix& scores, std::span<const std::string> row_keys,
                      const std::filesystem::path& path);

}  // namespace texfuse
