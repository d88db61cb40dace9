#include "texfuse/experiment.hpp"

#include "texfuse/error.hpp"
#include "numeric_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace texfuse {

namespace fs = std::filesystem;

std::vector<std::size_t> DatasetManifest::train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].fold != fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> DatasetManifest::test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].fold == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::string> DatasetManifest::paths() const {
    std::vector<std::string> out;
    for (const auto& e : entries) out.push_back(e.path);
    return out;
}

std::vector<std::size_t> DatasetManifest::labels() const {
    std::vector<std::size_t> out;
    for (const auto& e : entries) out.push_back(e.label);
    return out;
}

namespace {

bool is_png(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png";
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string chomp(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
    return s;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& root, const std::optional<fs::path>& folds_file, int folds,
                              std::uint64_t seed) {
    if (!fs::is_directory(root)) throw ManifestError("dataset root '" + root.string() + "' is not a directory");
    DatasetManifest m;
    m.root = root;
    std::vector<fs::path> class_dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) class_dirs.push_back(e.path());
    }
    std::sort(class_dirs.begin(), class_dirs.end());
    for (const auto& dir : class_dirs) {
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && is_png(e.path())) {
                files.push_back(dir.filename().string() + "/" + e.path().filename().string());
            }
        }
        if (files.empty()) throw ManifestError("class directory '" + dir.string() + "' contains no PNG files");
        std::sort(files.begin(), files.end());
        const std::size_t label = m.classes.size();
        m.classes.push_back(dir.filename().string());
        for (auto& f : files) m.entries.push_back({std::move(f), label, 0});
    }
    if (m.classes.size() < 2) {
        throw ManifestError("dataset root '" + root.string() + "' must contain at least two class directories");
    }

    if (folds_file) {
        std::ifstream in(*folds_file);
        if (!in) throw ManifestError("cannot read folds file '" + folds_file->string() + "'");
        std::unordered_map<std::string, int> assigned;
        std::string line;
        int line_no = 0;
        int max_fold = -1;
        while (std::getline(in, line)) {
            ++line_no;
            line = chomp(line);
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) {
                throw ManifestError("folds file line " + std::to_string(line_no) + ": expected '<path>\\t<fold>'");
            }
            const std::string path = line.substr(0, tab);
            int fold = 0;
            try {
                fold = static_cast<int>(detail::parse_int(line.substr(tab + 1)));
            } catch (const ParameterError&) {
                throw ManifestError("folds file line " + std::to_string(line_no) + ": bad fold index");
            }
            if (fold < 0) throw ManifestError("folds file line " + std::to_string(line_no) + ": negative fold index");
            if (!assigned.emplace(path, fold).second) {
                throw ManifestError("folds file lists '" + path + "' twice");
            }
            max_fold = std::max(max_fold, fold);
        }
        std::set<std::string> known;
        for (auto& e : m.entries) {
            known.insert(e.path);
            auto it = assigned.find(e.path);
            if (it == assigned.end()) throw ManifestError("image '" + e.path + "' is missing from the folds file");
            e.fold = it->second;
        }
        for (const auto& [path, fold] : assigned) {
            if (!known.count(path)) throw ManifestError("folds file lists missing file '" + path + "'");
        }
        m.folds = max_fold + 1;
    } else {
        if (folds < 2) throw ManifestError("need at least two folds");
        m.folds = folds;
        detail::Rng rng(seed);
        std::size_t offset = 0;
        for (std::size_t c = 0; c < m.classes.size(); ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < m.entries.size(); ++i) {
                if (m.entries[i].label == c) members.push_back(i);
            }
            rng.shuffle(members.begin(), members.end());
            for (std::size_t j = 0; j < members.size(); ++j) {
                m.entries[members[j]].fold = static_cast<int>((offset + j) % static_cast<std::size_t>(folds));
            }
            offset += members.size();
        }
    }

    for (int f = 0; f < m.folds; ++f) {
        std::vector<bool> present(m.classes.size(), false);
        for (const auto& e : m.entries) {
            if (e.fold != f) present[e.label] = true;
        }
        for (std::size_t c = 0; c < present.size(); ++c) {
            if (!present[c]) {
                throw ManifestError("class '" + m.classes[c] + "' is absent from the training split of fold " +
                                    std::to_string(f));
            }
        }
    }
    return m;
}

void write_folds_file(const DatasetManifest& manifest, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write folds file '" + path.string() + "'");
    for (const auto& e : manifest.entries) out << e.path << '\t' << e.fold << '\n';
}

std::vector<GrayImage> load_images(const DatasetManifest& manifest) {
    std::vector<GrayImage> images;
    images.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        try {
            images.push_back(load_image(manifest.root / e.path));
        } catch (const Error& err) {
            throw ManifestError("cannot load '" + e.path + "': " + err.what());
        }
    }
    return images;
}

ExternalFeatureSet import_external_features(const fs::path& csv, const DatasetManifest& manifest,
                                            std::string source_id) {
    std::ifstream in(csv);
    if (!in) throw IngestionError("cannot read feature file '" + csv.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("feature file '" + csv.string() + "' is empty");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const auto header = split(chomp(line), ',');
    if (header.size() < 2 || header[0] != "path") {
        throw IngestionError("feature file header must start with 'path' followed by feature columns");
    }
    ExternalFeatureSet set;
    set.source_id = std::move(source_id);
    set.dim = header.size() - 1;

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) index.emplace(manifest.entries[i].path, i);
    set.features = Matrix(manifest.entries.size(), set.dim);
    std::vector<bool> seen(manifest.entries.size(), false);

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        const std::string where = "row " + std::to_string(line_no) + " ('" + cells[0] + "')";
        if (cells.size() != set.dim + 1) {
            throw IngestionError(where + " has " + std::to_string(cells.size() - 1) + " values, expected " +
                                 std::to_string(set.dim));
        }
        auto it = index.find(cells[0]);
        if (it == index.end()) throw IngestionError(where + " names an image that is not in the manifest");
        if (seen[it->second]) throw IngestionError(where + " duplicates an earlier row");
        seen[it->second] = true;
        auto row = set.features.row(it->second);
        for (std::size_t c = 0; c < set.dim; ++c) {
            try {
                row[c] = detail::parse_double(cells[c + 1]);
            } catch (const ParameterError&) {
                throw IngestionError(where + " column " + std::to_string(c + 1) + " is not a number");
            }
            if (!std::isfinite(row[c])) throw IngestionError(where + " contains a non-finite value");
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw IngestionError("feature file has no row for image '" + manifest.entries[i].path + "'");
    }
    return set;
}

std::uint64_t path_set_checksum(std::span<const std::string> paths) {
    std::vector<std::string> sorted(paths.begin(), paths.end());
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& p : sorted) {
        for (unsigned char ch : p) {
            h ^= ch;
            h *= 1099511628211ULL;
        }
        h ^= 0xff;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::vector<std::string> paths_of(const DatasetManifest& m, std::span<const std::size_t> idx) {
    std::vector<std::string> out;
    for (std::size_t i : idx) out.push_back(m.entries[i].path);
    return out;
}

// Trainable descriptors also key on the exact training set and seed of their codebook.
std::string feature_key(const DescriptorConfig& cfg, std::optional<std::uint64_t> training, std::uint64_t seed) {
    std::string key = cfg.id + "-" + cfg.params_hash();
    if (training) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(*training));
        key += std::string("-train") + buf + "-seed" + std::to_string(seed);
    }
    for (char& c : key) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return key;
}

}  // namespace

Matrix extract_features(const DatasetManifest& manifest, std::span<const GrayImage> images,
                        const DescriptorConfig& config, std::optional<int> fold, const CvOptions& opts,
                        std::uint64_t* codebook_checksum) {
    if (images.size() != manifest.entries.size()) throw ContractError("image count does not match the manifest");
    auto descriptor = make_descriptor(config);
    if (descriptor->trainable() && !fold) {
        throw StateError("descriptor '" + config.id + "' needs a training fold to fit its codebook");
    }
    const auto paths = manifest.paths();
    std::optional<std::uint64_t> train_sum;
    if (descriptor->trainable()) {
        train_sum = path_set_checksum(paths_of(manifest, manifest.train_indices(*fold)));
        if (codebook_checksum) *codebook_checksum = *train_sum;
    }
    const std::string key = feature_key(config, train_sum, opts.seed);
    if (opts.cache) {
        if (auto cached = opts.cache->load_features(key, paths)) return *std::move(cached);
    }

    if (descriptor->trainable()) {
        const auto train = manifest.train_indices(*fold);
        const fs::path state = opts.cache ? opts.cache->codebook_path(key) : fs::path{};
        if (opts.cache && fs::exists(state)) {
            descriptor->load_state(state);
        } else {
            std::vector<GrayImage> training;
            training.reserve(train.size());
            for (std::size_t i : train) training.push_back(images[i]);
            descriptor->fit(training, opts.seed ^ *train_sum);
            if (opts.cache) {
                const fs::path tmp = state.string() + ".tmp";
                descriptor->save_state(tmp);
                fs::rename(tmp, state);
            }
        }
    }

    Matrix features;
    for (std::size_t i = 0; i < images.size(); ++i) {
        FeatureVector fv;
        try {
            fv = descriptor->extract(images[i]);
        } catch (const Error& e) {
            throw Error("descriptor '" + config.id + "' failed on '" + manifest.entries[i].path + "': " + e.what());
        }
        for (double v : fv.values) {
            if (!std::isfinite(v)) {
                throw Error("descriptor '" + config.id + "' produced a non-finite value on '" +
                            manifest.entries[i].path + "'");
            }
        }
        features.append_row(fv.values);
    }
    if (opts.cache) opts.cache->store_features(key, paths, features);
    return features;
}

std::vector<double> fold_accuracies(const DatasetManifest& manifest, std::span<const std::size_t> predictions) {
    if (predictions.size() != manifest.entries.size()) throw ContractError("prediction count does not match manifest");
    std::vector<double> out;
    for (int f = 0; f < manifest.folds; ++f) {
        std::size_t total = 0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            if (manifest.entries[i].fold != f) continue;
            ++total;
            if (predictions[i] == manifest.entries[i].label) ++correct;
        }
        out.push_back(total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0);
    }
    return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

template <typename FeaturesForFold>
CvResult cross_validate(const DatasetManifest& manifest, const std::string& id, const SvmParams& svm,
                        FeaturesForFold&& features_for_fold) {
    CvResult result;
    result.id = id;
    result.scores.class_labels = manifest.classes;
    result.scores.source_id = id;
    result.scores.scores = Matrix(manifest.entries.size(), manifest.classes.size());
    const auto labels = manifest.labels();
    for (int f = 0; f < manifest.folds; ++f) {
        FoldAudit audit;
        audit.fold = f;
        const Matrix& all = features_for_fold(f, audit.codebook_inputs);
        const auto train = manifest.train_indices(f);
        const auto test = manifest.test_indices(f);
        if (test.empty()) continue;
        std::vector<std::size_t> train_labels;
        for (std::size_t i : train) train_labels.push_back(labels[i]);
        audit.svm_inputs = path_set_checksum(paths_of(manifest, train));
        const auto model = train_multiclass(all.select_rows(train), train_labels, manifest.classes, svm);
        const ScoreMatrix s = score(model, all.select_rows(test), id);
        for (std::size_t r = 0; r < test.size(); ++r) {
            const auto src = s.scores.row(r);
            std::copy(src.begin(), src.end(), result.scores.scores.row(test[r]).begin());
        }
        result.audits.push_back(audit);
    }
    result.fold_accuracy = fold_accuracies(manifest, result.scores.predictions());
    result.mean_accuracy = mean_of(result.fold_accuracy);
    return result;
}

}  // namespace

CvResult run_descriptor_cv(const DatasetManifest& manifest, std::span<const GrayImage> images,
                           const DescriptorConfig& config, const SvmParams& svm, const CvOptions& opts) {
    const bool trainable = make_descriptor(config)->trainable();
    Matrix shared;
    if (!trainable) shared = extract_features(manifest, images, config, std::nullopt, opts);
    Matrix per_fold;
    return cross_validate(manifest, config.id, svm, [&](int fold, std::uint64_t& checksum) -> const Matrix& {
        if (!trainable) return shared;
        per_fold = extract_features(manifest, images, config, fold, opts, &checksum);
        return per_fold;
    });
}

CvResult run_feature_cv(const DatasetManifest& manifest, const Matrix& features, const std::string& id,
                        const SvmParams& svm) {
    if (features.rows != manifest.entries.size()) throw ContractError("feature rows do not match the manifest");
    return cross_validate(manifest, id, svm, [&](int, std::uint64_t&) -> const Matrix& { return features; });
}

std::vector<FusionOutcome> run_fusion_experiment(const DatasetManifest& manifest,
                                                 std::span<const FusionConfig> fusions,
                                                 std::map<std::string, ScoreMatrix> scores) {
    for (const auto& [id, s] : scores) {
        if (s.samples() != manifest.entries.size() || s.class_labels != manifest.classes) {
            throw ContractError("scores of '" + id + "' are not aligned with the manifest");
        }
    }
    std::vector<FusionOutcome> out;
    for (const auto& cfg : fusions) {
        FusionOutcome o;
        o.prediction = fuse(cfg, scores);
        o.row.id = cfg.name;
        o.row.members = cfg.members;
        o.row.fold_accuracy = fold_accuracies(manifest, o.prediction.labels);
        o.row.mean_accuracy = mean_of(o.row.fold_accuracy);
        scores[cfg.name] = o.prediction.fused;
        out.push_back(std::move(o));
    }
    return out;
}

void write_cv_scores(const DatasetManifest& manifest, const ScoreMatrix& scores, const fs::path& path,
                     const std::string& fingerprint) {
    if (scores.samples() != manifest.entries.size()) throw ContractError("scores are not aligned with the manifest");
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << "# texfuse-scores " << scores.source_id << ' ' << fingerprint << '\n';
        out << "path,fold,label";
        for (const auto& c : scores.class_labels) out << ',' << c;
        out << '\n';
        for (std::size_t r = 0; r < scores.samples(); ++r) {
            const auto& e = manifest.entries[r];
            out << e.path << ',' << e.fold << ',' << manifest.classes[e.label];
            for (double v : scores.scores.row(r)) out << ',' << detail::format_double(v);
            out << '\n';
        }
        if (!out) throw Error("failed writing '" + path.string() + "'");
    }
    fs::rename(tmp, path);
}

std::optional<ScoreMatrix> read_cv_scores(const DatasetManifest& manifest, const fs::path& path,
                                          const std::string& fingerprint) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    std::getline(in, line);
    std::istringstream head(chomp(line));
    std::string hash_mark, tag;
    ScoreMatrix s;
    std::string stored_fp;
    head >> hash_mark >> tag >> s.source_id >> stored_fp;
    if (hash_mark != "#" || tag != "texfuse-scores") throw Error("'" + path.string() + "' is not a score file");
    if (!fingerprint.empty() && stored_fp != fingerprint) return std::nullopt;
    std::getline(in, line);
    const auto header = split(chomp(line), ',');
    if (header.size() < 4) throw Error("score file '" + path.string() + "' has no class columns");
    s.class_labels.assign(header.begin() + 3, header.end());
    if (s.class_labels != manifest.classes) throw ContractError("score file '" + path.string() + "' has other classes");
    s.scores = Matrix(manifest.entries.size(), s.class_labels.size());
    std::size_t r = 0;
    while (std::getline(in, line)) {
        line = chomp(line);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (r >= manifest.entries.size() || cells.size() != header.size() || cells[0] != manifest.entries[r].path) {
            throw ContractError("score file '" + path.string() + "' row " + std::to_string(r + 1) +
                                " is not aligned with the manifest");
        }
        for (std::size_t c = 0; c < s.class_labels.size(); ++c) s.scores(r, c) = detail::parse_double(cells[c + 3]);
        ++r;
    }
    if (r != manifest.entries.size()) throw ContractError("score file '" + path.string() + "' is truncated");
    return s;
}

}  // namespace texfuse
