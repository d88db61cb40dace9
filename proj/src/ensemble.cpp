#include "texfuse/ensemble.hpp"

#include "texfuse/error.hpp"
#include "numeric_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace texfuse {

void FusionConfig::validate() const {
    if (members.empty()) throw ConfigError("fusions." + name + ".members", "fusion '" + name + "' has no members");
    std::set<std::string> seen;
    for (const auto& m : members) {
        if (!seen.insert(m).second) {
            throw ConfigError("fusions." + name + ".members", "fusion '" + name + "' lists '" + m + "' twice");
        }
    }
}

namespace {

void normalize_entries(Matrix& m, std::span<const std::size_t> idx) {
    double lo = m.data[idx[0]];
    double hi = lo;
    double sum = 0.0;
    for (std::size_t i : idx) {
        sum += m.data[i];
        lo = std::min(lo, m.data[i]);
        hi = std::max(hi, m.data[i]);
    }
    if (lo == hi) {
        for (std::size_t i : idx) m.data[i] = 0.0;
        return;
    }
    const double mean = sum / static_cast<double>(idx.size());
    double ss = 0.0;
    for (std::size_t i : idx) ss += (m.data[i] - mean) * (m.data[i] - mean);
    const double sd = std::max(std::sqrt(ss / static_cast<double>(idx.size())), 1e-12);
    for (std::size_t i : idx) m.data[i] = (m.data[i] - mean) / sd;
}

}  // namespace

ScoreMatrix znorm(const ScoreMatrix& scores, ZScorePooling pooling) {
    if (scores.scores.data.empty()) throw ContractError("cannot normalize an empty score matrix");
    ScoreMatrix out = scores;
    if (pooling == ZScorePooling::Matrix) {
        std::vector<std::size_t> idx(out.scores.data.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        normalize_entries(out.scores, idx);
    } else {
        std::vector<std::size_t> idx(out.scores.rows);
        for (std::size_t c = 0; c < out.scores.cols; ++c) {
            for (std::size_t r = 0; r < out.scores.rows; ++r) idx[r] = r * out.scores.cols + c;
            normalize_entries(out.scores, idx);
        }
    }
    return out;
}

FusedPrediction sum_rule(std::span<const ScoreMatrix> members) {
    if (members.empty()) throw ContractError("sum rule needs at least one score matrix");
    const ScoreMatrix& first = members.front();
    FusedPrediction out;
    out.fused.class_labels = first.class_labels;
    out.fused.scores = Matrix(first.samples(), first.classes());
    for (const auto& m : members) {
        if (m.samples() != first.samples() || m.classes() != first.classes()) {
            throw ContractError("score matrix '" + m.source_id + "' has shape " + std::to_string(m.samples()) + "x" +
                                std::to_string(m.classes()) + ", expected " + std::to_string(first.samples()) + "x" +
                                std::to_string(first.classes()));
        }
        if (m.class_labels != first.class_labels) {
            throw ContractError("score matrix '" + m.source_id + "' has a different class order");
        }
        for (std::size_t i = 0; i < m.scores.data.size(); ++i) out.fused.scores.data[i] += m.scores.data[i];
    }
    out.labels = out.fused.predictions();
    return out;
}

FusedPrediction fuse(const FusionConfig& config, const std::map<std::string, ScoreMatrix>& scores) {
    config.validate();
    std::vector<ScoreMatrix> members;
    for (const auto& id : config.members) {
        auto it = scores.find(id);
        if (it == scores.end()) {
            throw ConfigError("fusions." + config.name + ".members",
                              "fusion '" + config.name + "' names missing member '" + id + "'");
        }
        members.push_back(config.normalization == Normalization::ZScore ? znorm(it->second, config.pooling)
                                                                        : it->second);
    }
    FusedPrediction out = sum_rule(members);
    out.fused.source_id = config.name;
    return out;
}

void write_scores_csv(const ScoreMatrix& scores, std::span<const std::string> row_keys,
                      const std::filesystem::path& path) {
    if (row_keys.size() != scores.samples()) throw ContractError("row key count does not match score rows");
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "path";
    for (const auto& l : scores.class_labels) out << ',' << l;
    out << '\n';
    for (std::size_t r = 0; r < scores.samples(); ++r) {
        out << row_keys[r];
        for (double v : scores.scores.row(r)) out << ',' << detail::format_double(v);
        out << '\n';
    }
}

}  // namespace texfuse
