#include "texfuse/pipeline.hpp"

#include "texfuse/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace texfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) {
            const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
            throw ConfigError(key, "unknown key '" + key + "'");
        }
    }
}

template <typename T>
T value(const json& obj, const std::string& name, const std::string& key, T fallback) {
    auto it = obj.find(name);
    if (it == obj.end()) return fallback;
    try {
        return it->template get<T>();
    } catch (const json::exception&) {
        throw ConfigError(key, "bad value for '" + key + "'");
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

void check_id(const std::string& id, const std::string& key) {
    if (id.empty()) throw ConfigError(key, "'" + key + "' must not be empty");
    for (unsigned char c : id) {
        if (!std::isalnum(c) && c != '+' && c != '-' && c != '_' && c != '.') {
            throw ConfigError(key, "'" + key + "' may only use letters, digits and + - _ .");
        }
    }
}

SvmParams parse_svm(const json& j) {
    SvmParams p;
    if (!j.is_object()) throw ConfigError("svm", "'svm' must be an object");
    only_keys(j, "svm", {"kernel", "gamma", "c", "logistic", "tolerance", "max_passes"});
    const auto kernel = value<std::string>(j, "kernel", "svm.kernel", "rbf");
    if (kernel == "rbf") p.kernel = KernelType::Rbf;
    else if (kernel == "linear") p.kernel = KernelType::Linear;
    else throw ConfigError("svm.kernel", "svm.kernel must be 'rbf' or 'linear'");
    p.gamma = value<double>(j, "gamma", "svm.gamma", p.gamma);
    p.c = value<double>(j, "c", "svm.c", p.c);
    if (!(p.c > 0.0)) throw ConfigError("svm.c", "svm.c must be positive");
    p.logistic = value<bool>(j, "logistic", "svm.logistic", p.logistic);
    p.smo.tolerance = value<double>(j, "tolerance", "svm.tolerance", p.smo.tolerance);
    if (!(p.smo.tolerance > 0.0)) throw ConfigError("svm.tolerance", "svm.tolerance must be positive");
    p.smo.max_passes = value<int>(j, "max_passes", "svm.max_passes", p.smo.max_passes);
    if (p.smo.max_passes < 1) throw ConfigError("svm.max_passes", "svm.max_passes must be >= 1");
    return p;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("<file>", "config must be a JSON object");
    only_keys(j, "", {"dataset", "folds_file", "folds", "seed", "output", "cache", "workers", "svm", "descriptors",
                      "external_features", "fusions"});

    RunConfig cfg;
    cfg.snapshot = j.dump();

    if (!j.contains("dataset")) throw ConfigError("dataset", "'dataset' is required");
    cfg.dataset = resolve(base_dir, value<std::string>(j, "dataset", "dataset", ""));
    if (j.contains("folds_file")) cfg.folds_file = resolve(base_dir, value<std::string>(j, "folds_file", "folds_file", ""));
    cfg.folds = value<int>(j, "folds", "folds", 10);
    if (cfg.folds < 2) throw ConfigError("folds", "'folds' must be at least 2");
    if (!j.contains("seed")) throw ConfigError("seed", "'seed' is required for reproducible runs");
    cfg.seed = value<std::uint64_t>(j, "seed", "seed", 0);
    cfg.output = resolve(base_dir, value<std::string>(j, "output", "output", "results"));
    cfg.cache = j.contains("cache") ? resolve(base_dir, value<std::string>(j, "cache", "cache", ""))
                                    : cfg.output / "cache";
    cfg.workers = value<int>(j, "workers", "workers", 1);
    if (cfg.workers < 1) throw ConfigError("workers", "'workers' must be >= 1");
    if (j.contains("svm")) cfg.svm = parse_svm(j["svm"]);

    std::set<std::string> ids;
    const json desc = j.value("descriptors", json("standard"));
    if (desc.is_string()) {
        if (desc.get<std::string>() != "standard") {
            throw ConfigError("descriptors", "'descriptors' must be a list or \"standard\"");
        }
        cfg.descriptors = standard_descriptor_set();
    } else if (desc.is_array()) {
        for (std::size_t i = 0; i < desc.size(); ++i) {
            const json& d = desc[i];
            const std::string at = "descriptors[" + std::to_string(i) + "]";
            if (!d.is_object()) throw ConfigError(at, "'" + at + "' must be an object");
            only_keys(d, at, {"id", "type", "params"});
            DescriptorConfig dc;
            dc.id = value<std::string>(d, "id", at + ".id", "");
            check_id(dc.id, at + ".id");
            dc.type = value<std::string>(d, "type", "descriptors." + dc.id + ".type", "");
            dc.params = d.value("params", json::object());
            cfg.descriptors.push_back(std::move(dc));
        }
    } else {
        throw ConfigError("descriptors", "'descriptors' must be a list or \"standard\"");
    }
    for (const auto& d : cfg.descriptors) {
        if (!ids.insert(d.id).second) throw ConfigError("descriptors." + d.id, "duplicate descriptor id '" + d.id + "'");
        make_descriptor(d);  // validates type and parameters
    }

    if (j.contains("external_features")) {
        const json& ext = j["external_features"];
        if (!ext.is_array()) throw ConfigError("external_features", "'external_features' must be a list");
        for (std::size_t i = 0; i < ext.size(); ++i) {
            const std::string at = "external_features[" + std::to_string(i) + "]";
            if (!ext[i].is_object()) throw ConfigError(at, "'" + at + "' must be an object");
            only_keys(ext[i], at, {"id", "path"});
            ExternalFeatureSource src;
            src.id = value<std::string>(ext[i], "id", at + ".id", "");
            check_id(src.id, at + ".id");
            if (!ext[i].contains("path")) throw ConfigError(at + ".path", "'" + at + ".path' is required");
            src.csv = resolve(base_dir, value<std::string>(ext[i], "path", at + ".path", ""));
            if (!ids.insert(src.id).second) throw ConfigError(at + ".id", "duplicate id '" + src.id + "'");
            cfg.external_features.push_back(std::move(src));
        }
    }

    if (j.contains("fusions")) {
        const json& fus = j["fusions"];
        if (!fus.is_array()) throw ConfigError("fusions", "'fusions' must be a list");
        for (std::size_t i = 0; i < fus.size(); ++i) {
            const std::string at = "fusions[" + std::to_string(i) + "]";
            if (!fus[i].is_object()) throw ConfigError(at, "'" + at + "' must be an object");
            only_keys(fus[i], at, {"name", "members", "normalization", "pooling"});
            FusionConfig f;
            f.name = value<std::string>(fus[i], "name", at + ".name", "");
            check_id(f.name, at + ".name");
            const std::string key = "fusions." + f.name;
            const json members = fus[i].value("members", json::array());
            if (members.is_string() && members.get<std::string>() == "descriptors") {
                for (const auto& d : cfg.descriptors) f.members.push_back(d.id);
            } else {
                f.members = value<std::vector<std::string>>(fus[i], "members", key + ".members", {});
            }
            const auto norm = value<std::string>(fus[i], "normalization", key + ".normalization", "none");
            if (norm == "none") f.normalization = Normalization::None;
            else if (norm == "zscore") f.normalization = Normalization::ZScore;
            else throw ConfigError(key + ".normalization", "'" + key + ".normalization' must be 'none' or 'zscore'");
            const auto pool = value<std::string>(fus[i], "pooling", key + ".pooling", "matrix");
            if (pool == "matrix") f.pooling = ZScorePooling::Matrix;
            else if (pool == "column") f.pooling = ZScorePooling::Column;
            else throw ConfigError(key + ".pooling", "'" + key + ".pooling' must be 'matrix' or 'column'");
            f.validate();
            for (const auto& m : f.members) {
                if (!ids.count(m)) {
                    throw ConfigError(key + ".members", "fusion '" + f.name + "' names absent member '" + m + "'");
                }
            }
            if (!ids.insert(f.name).second) throw ConfigError(key + ".name", "duplicate id '" + f.name + "'");
            cfg.fusions.push_back(std::move(f));
        }
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot read config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), fs::absolute(path).parent_path());
}

}  // namespace texfuse
