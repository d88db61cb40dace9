#include "texfuse/registry.hpp"

#include "texfuse/error.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <set>

namespace texfuse {

using nlohmann::json;

std::string DescriptorConfig::params_hash() const {
    // FNV-1a over the canonical dump (nlohmann sorts object keys).
    const std::string text = type + "|" + params.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

/// Typed access to a descriptor's params with unknown-key detection.
class Params {
public:
    explicit Params(const DescriptorConfig& cfg) : cfg_(cfg) {
        if (!cfg.params.is_object()) throw ConfigError(key("params"), "descriptor params must be an object");
    }

    template <typename T>
    T get(const std::string& name, T fallback) {
        used_.insert(name);
        auto it = cfg_.params.find(name);
        if (it == cfg_.params.end()) return fallback;
        try {
            return it->template get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(key(name), "bad value for " + key(name) + ": " + e.what());
        }
    }

    void finish() const {
        for (auto it = cfg_.params.begin(); it != cfg_.params.end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError(key(it.key()), "unknown parameter " + key(it.key()));
        }
    }

    std::string key(const std::string& name) const { return "descriptors." + cfg_.id + "." + name; }

    NeighborhoodSpec spec() {
        NeighborhoodSpec s{get<double>("radius", 1.0), get<int>("points", 8)};
        check([&] { s.validate(); }, "radius");
        return s;
    }

    std::vector<NeighborhoodSpec> scales() {
        const auto raw = get<std::vector<std::pair<double, int>>>("scales", {{1.0, 8}, {2.0, 8}, {3.0, 8}});
        if (raw.empty()) throw ConfigError(key("scales"), "at least one (radius, points) scale is required");
        std::vector<NeighborhoodSpec> out;
        for (auto [r, p] : raw) {
            out.push_back({r, p});
            check([&] { out.back().validate(); }, "scales");
        }
        return out;
    }

    template <typename F>
    void check(F&& f, const std::string& name) const {
        try {
            f();
        } catch (const ParameterError& e) {
            throw ConfigError(key(name), key(name) + ": " + e.what());
        }
    }

private:
    const DescriptorConfig& cfg_;
    std::set<std::string> used_;
};

template <typename F>
class Simple : public Descriptor {
public:
    Simple(F f, std::size_t dim) : f_(std::move(f)), dim_(dim) {}
    FeatureVector extract(const GrayImage& img) const override { return f_(img); }
    std::size_t dim() const override { return dim_; }

private:
    F f_;
    std::size_t dim_;
};

template <typename F>
std::unique_ptr<Descriptor> simple(F f, std::size_t dim) {
    return std::make_unique<Simple<F>>(std::move(f), dim);
}

class SclbpDescriptor : public Descriptor {
public:
    SclbpDescriptor(std::size_t k, std::size_t cap) : k_(k), cap_(cap) {}
    bool trainable() const override { return true; }
    void fit(std::span<const GrayImage> training, std::uint64_t seed) override {
        books_ = build_sclbp_codebooks(training, seed, k_, cap_);
    }
    FeatureVector extract(const GrayImage& img) const override { return sclbp(img, books_); }
    std::size_t dim() const override { return k_; }
    void save_state(const std::filesystem::path& p) const override { save_codebooks(books_, p); }
    void load_state(const std::filesystem::path& p) override { books_ = load_codebooks(p); }

private:
    std::size_t k_;
    std::size_t cap_;
    std::vector<Codebook> books_;
};

class JetDescriptor : public Descriptor {
public:
    JetDescriptor(std::size_t k, double sigma, std::size_t cap)
        : k_(k), sigma_(sigma), cap_(cap), bank_(dtg_bank(sigma)) {}
    bool trainable() const override { return true; }
    void fit(std::span<const GrayImage> training, std::uint64_t seed) override {
        book_ = build_jet_codebook(training, k_, sigma_, seed, cap_);
    }
    FeatureVector extract(const GrayImage& img) const override { return jet(img, book_, bank_); }
    std::size_t dim() const override { return k_; }
    void save_state(const std::filesystem::path& p) const override {
        const std::vector<Codebook> one{book_};
        save_codebooks(one, p);
    }
    void load_state(const std::filesystem::path& p) override {
        auto books = load_codebooks(p);
        if (books.size() != 1) throw StateError("JET codebook cache must hold one codebook");
        book_ = std::move(books.front());
    }

private:
    std::size_t k_;
    double sigma_;
    std::size_t cap_;
    FilterBank bank_;
    Codebook book_;
};

using Factory = std::function<std::unique_ptr<Descriptor>(Params&)>;

const std::map<std::string, Factory>& factories() {
    static const std::map<std::string, Factory> table = {
        {"lbp",
         [](Params& p) {
             const auto s = p.spec();
             return simple([s](const GrayImage& img) { return lbp(img, s); }, std::size_t{1} << s.points);
         }},
        {"ltp",
         [](Params& p) {
             const auto s = p.spec();
             const double tau = p.get<double>("tau", 5.0);
             if (!(tau >= 0.0)) throw ConfigError(p.key("tau"), "LTP tau must be >= 0");
             return simple([s, tau](const GrayImage& img) { return ltp(img, s, tau); }, 2 * (std::size_t{1} << s.points));
         }},
        {"mqc",
         [](Params& p) {
             const auto s = p.spec();
             const double tau = p.get<double>("tau", 5.0);
             const double theta = p.get<double>("theta", 2.0);
             if (!(theta > 0.0 && theta < tau)) throw ConfigError(p.key("theta"), "MQC requires 0 < theta < tau");
             return simple([=](const GrayImage& img) { return mqc(img, s, tau, theta); }, 4 * (std::size_t{1} << s.points));
         }},
        {"alpha_lbp",
         [](Params& p) {
             const auto angles = p.get<std::vector<double>>("angles", {0.0, 45.0, 90.0, 135.0});
             if (angles.empty()) throw ConfigError(p.key("angles"), "alphaLBP needs at least one angle");
             for (double a : angles) {
                 if (std::fmod(a, 45.0) != 0.0) throw ConfigError(p.key("angles"), "alphaLBP angles must be multiples of 45");
             }
             return simple([angles](const GrayImage& img) { return alpha_lbp(img, angles); }, 256 * angles.size());
         }},
        {"dlbp",
         [](Params& p) {
             const auto scales = p.scales();
             std::size_t dim = 0;
             for (const auto& s : scales) dim += std::size_t{1} << s.points;
             return simple([scales](const GrayImage& img) { return dlbp(img, scales); }, dim);
         }},
        {"arcslbp",
         [](Params& p) {
             ArcslbpConfig cfg;
             cfg.specs = p.scales();
             for (const auto& s : cfg.specs) {
                 if (s.points > 16) throw ConfigError(p.key("scales"), "ARCSLBP supports at most 16 neighbors");
             }
             const auto source = p.get<std::string>("source", "raw");
             if (source == "raw") cfg.source = ArcsSource::Raw;
             else if (source == "hessian") cfg.source = ArcsSource::Hessian;
             else if (source == "gradient") cfg.source = ArcsSource::Gradient;
             else throw ConfigError(p.key("source"), "ARCSLBP source must be raw, hessian or gradient");
             cfg.sigmas = p.get<std::vector<double>>("sigmas", {1.0});
             for (double s : cfg.sigmas) {
                 if (!(s > 0.0)) throw ConfigError(p.key("sigmas"), "sigmas must be positive");
             }
             const std::size_t dim = arcslbp_dim(cfg);
             return simple([cfg](const GrayImage& img) { return arcslbp(img, cfg); }, dim);
         }},
        {"lcvmsp", [](Params&) { return simple([](const GrayImage& img) { return lcvmsp(img); }, 1024); }},
        {"ahp",
         [](Params& p) {
             const auto s = p.spec();
             const double k = p.get<double>("k", 0.5);
             if (!(k >= 0.0)) throw ConfigError(p.key("k"), "AHP k must be >= 0");
             return simple([s, k](const GrayImage& img) { return ahp(img, s, k); }, 2 * (std::size_t{1} << s.points) + 256);
         }},
        {"sclbp",
         [](Params& p) -> std::unique_ptr<Descriptor> {
             const auto k = p.get<std::size_t>("clusters", 255);
             const auto cap = p.get<std::size_t>("sample_cap", kCodebookSampleCap);
             if (k == 0) throw ConfigError(p.key("clusters"), "clusters must be >= 1");
             return std::make_unique<SclbpDescriptor>(k, cap);
         }},
        {"jet",
         [](Params& p) -> std::unique_ptr<Descriptor> {
             const auto k = p.get<std::size_t>("clusters", 128);
             const double sigma = p.get<double>("sigma", 1.0);
             const auto cap = p.get<std::size_t>("sample_cap", kCodebookSampleCap);
             if (k == 0) throw ConfigError(p.key("clusters"), "clusters must be >= 1");
             if (!(sigma > 0.0)) throw ConfigError(p.key("sigma"), "sigma must be positive");
             return std::make_unique<JetDescriptor>(k, sigma, cap);
         }},
        {"hasc",
         [](Params& p) {
             const auto grid = p.get<std::pair<int, int>>("grid", {2, 2});
             if (grid.first < 1 || grid.second < 1) throw ConfigError(p.key("grid"), "grid needs positive cols and rows");
             const HascGrid g{grid.first, grid.second};
             return simple([g](const GrayImage& img) { return hasc(img, g); },
                           static_cast<std::size_t>(kHascPatchDim * g.cols * g.rows));
         }},
    };
    return table;
}

}  // namespace

std::unique_ptr<Descriptor> make_descriptor(const DescriptorConfig& config) {
    const auto& table = factories();
    auto it = table.find(config.type);
    if (it == table.end()) {
        throw ConfigError("descriptors." + config.id + ".type",
                          "unknown descriptor type '" + config.type + "' for '" + config.id + "'");
    }
    Params params(config);
    auto d = it->second(params);
    params.finish();
    return d;
}

std::vector<std::string> descriptor_types() {
    std::vector<std::string> out;
    for (const auto& [name, f] : factories()) out.push_back(name);
    return out;
}

std::vector<DescriptorConfig> standard_descriptor_set() {
    return {
        {"JET", "jet", json::object()},
        {"scLBP", "sclbp", json::object()},
        {"AHP", "ahp", json::object()},
        {"HASC", "hasc", json::object()},
        {"Gradient+ARCSLBP", "arcslbp", json{{"source", "gradient"}}},
        {"ARCSLBP", "arcslbp", json::object()},
        {"AlphaLBP", "alpha_lbp", json::object()},
        {"SigmaARCSLBP", "arcslbp", json{{"source", "hessian"}}},
        {"DLBP", "dlbp", json::object()},
        {"LCvMSP", "lcvmsp", json::object()},
    };
}

}  // namespace texfuse
