#include "texfuse/pipeline.hpp"

#include "texfuse/error.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

namespace texfuse {

namespace fs = std::filesystem;

namespace {

class DatasetMissing : public Error {
public:
    using Error::Error;
};

/// Runs fn(0..n-1) on up to `workers` threads; rethrows the first failure.
template <typename F>
void run_parallel(std::size_t n, int workers, F&& fn) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct Fnv {
    std::uint64_t h = 1469598103934665603ULL;
    Fnv& add(const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        h ^= 0xff;
        h *= 1099511628211ULL;
        return *this;
    }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

struct Context {
    const RunConfig& cfg;
    DatasetManifest manifest;
    std::string manifest_fp;

    explicit Context(const RunConfig& c) : cfg(c) {
        if (!fs::is_directory(cfg.dataset)) throw DatasetMissing("dataset not found at '" + cfg.dataset.string() + "'");
        if (cfg.folds_file && !fs::exists(*cfg.folds_file)) {
            throw DatasetMissing("folds file not found at '" + cfg.folds_file->string() + "'");
        }
        manifest = load_manifest(cfg.dataset, cfg.folds_file, cfg.folds, cfg.seed);
        Fnv f;
        for (const auto& e : manifest.entries) f.add(e.path).add(std::to_string(e.label)).add(std::to_string(e.fold));
        for (const auto& c2 : manifest.classes) f.add(c2);
        manifest_fp = f.hex();
        fs::create_directories(cfg.output / "scores");
        fs::create_directories(cfg.output / "fusions");
        write_folds_file(manifest, cfg.output / "folds.txt");
    }

    std::string svm_text() const {
        const auto& s = cfg.svm;
        return std::to_string(static_cast<int>(s.kernel)) + "," + std::to_string(s.gamma) + "," + std::to_string(s.c) +
               "," + std::to_string(s.logistic) + "," + std::to_string(s.smo.tolerance) + "," +
               std::to_string(s.smo.max_passes);
    }

    std::string descriptor_fp(const DescriptorConfig& d) const {
        return Fnv().add(manifest_fp).add(std::to_string(cfg.seed)).add(d.id).add(d.params_hash()).add(svm_text()).hex();
    }

    std::string external_fp(const ExternalFeatureSource& e) const {
        std::error_code ec;
        const auto size = fs::file_size(e.csv, ec);
        const auto stamp = fs::last_write_time(e.csv, ec).time_since_epoch().count();
        return Fnv()
            .add(manifest_fp)
            .add(e.id)
            .add(e.csv.string())
            .add(std::to_string(size))
            .add(std::to_string(stamp))
            .add(svm_text())
            .hex();
    }

    fs::path scores_path(const std::string& id) const { return cfg.output / "scores" / (id + ".csv"); }
    fs::path fusion_path(const std::string& name) const { return cfg.output / "fusions" / (name + ".csv"); }
};

void note(const std::string& msg) {
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::clog << "texfuse: " << msg << '\n';
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::map<std::string, ScoreMatrix> stored_scores(const Context& ctx) {
    std::map<std::string, ScoreMatrix> out;
    for (const auto& d : ctx.cfg.descriptors) {
        auto s = read_cv_scores(ctx.manifest, ctx.scores_path(d.id), ctx.descriptor_fp(d));
        if (!s) throw StateError("no current scores for '" + d.id + "'; run train-eval first");
        out.emplace(d.id, std::move(*s));
    }
    for (const auto& e : ctx.cfg.external_features) {
        auto s = read_cv_scores(ctx.manifest, ctx.scores_path(e.id), ctx.external_fp(e));
        if (!s) throw StateError("no current scores for '" + e.id + "'; run train-eval first");
        out.emplace(e.id, std::move(*s));
    }
    return out;
}

std::string fusion_fp(const Context& ctx, const FusionConfig& f, const std::map<std::string, std::string>& member_fps) {
    Fnv h;
    h.add(f.name).add(std::to_string(static_cast<int>(f.normalization))).add(std::to_string(static_cast<int>(f.pooling)));
    for (const auto& m : f.members) h.add(m).add(member_fps.at(m));
    h.add(ctx.manifest_fp);
    return h.hex();
}

std::map<std::string, std::string> all_fingerprints(const Context& ctx) {
    std::map<std::string, std::string> fps;
    for (const auto& d : ctx.cfg.descriptors) fps[d.id] = ctx.descriptor_fp(d);
    for (const auto& e : ctx.cfg.external_features) fps[e.id] = ctx.external_fp(e);
    for (const auto& f : ctx.cfg.fusions) fps[f.name] = fusion_fp(ctx, f, fps);
    return fps;
}

}  // namespace

void stage_extract(const RunConfig& cfg) {
    Context ctx(cfg);
    const auto images = load_images(ctx.manifest);
    FeatureCache cache(cfg.cache);
    CvOptions opts{cfg.seed, &cache};

    struct Job {
        const DescriptorConfig* config;
        std::optional<int> fold;
    };
    std::vector<Job> jobs;
    for (const auto& d : cfg.descriptors) {
        if (make_descriptor(d)->trainable()) {
            for (int f = 0; f < ctx.manifest.folds; ++f) jobs.push_back({&d, f});
        } else {
            jobs.push_back({&d, std::nullopt});
        }
    }
    run_parallel(jobs.size(), cfg.workers, [&](std::size_t i) {
        extract_features(ctx.manifest, images, *jobs[i].config, jobs[i].fold, opts);
    });
    note("extracted " + std::to_string(jobs.size()) + " feature sets (" + std::to_string(cache.hits()) +
         " from cache)");
}

void stage_train_eval(const RunConfig& cfg) {
    Context ctx(cfg);
    std::vector<GrayImage> images;
    std::once_flag images_once;
    auto get_images = [&]() -> const std::vector<GrayImage>& {
        std::call_once(images_once, [&] { images = load_images(ctx.manifest); });
        return images;
    };
    FeatureCache cache(cfg.cache);
    CvOptions opts{cfg.seed, &cache};

    const std::size_t n_desc = cfg.descriptors.size();
    const std::size_t total = n_desc + cfg.external_features.size();
    // Imported feature sets are parsed up front so ingestion errors surface before any training.
    std::vector<ExternalFeatureSet> external;
    for (const auto& e : cfg.external_features) external.push_back(import_external_features(e.csv, ctx.manifest, e.id));

    run_parallel(total, cfg.workers, [&](std::size_t i) {
        std::string id;
        std::string fp;
        if (i < n_desc) {
            id = cfg.descriptors[i].id;
            fp = ctx.descriptor_fp(cfg.descriptors[i]);
        } else {
            id = cfg.external_features[i - n_desc].id;
            fp = ctx.external_fp(cfg.external_features[i - n_desc]);
        }
        if (read_cv_scores(ctx.manifest, ctx.scores_path(id), fp)) {
            note(id + ": scores up to date");
            return;
        }
        CvResult r = i < n_desc ? run_descriptor_cv(ctx.manifest, get_images(), cfg.descriptors[i], cfg.svm, opts)
                                : run_feature_cv(ctx.manifest, external[i - n_desc].features, id, cfg.svm);
        write_cv_scores(ctx.manifest, r.scores, ctx.scores_path(id), fp);
        note(id + ": mean accuracy " + fixed2(r.mean_accuracy));
    });
}

void stage_fuse(const RunConfig& cfg) {
    Context ctx(cfg);
    auto scores = stored_scores(ctx);
    const auto fps = all_fingerprints(ctx);
    const auto outcomes = run_fusion_experiment(ctx.manifest, cfg.fusions, std::move(scores));
    for (const auto& o : outcomes) {
        write_cv_scores(ctx.manifest, o.prediction.fused, ctx.fusion_path(o.row.id), fps.at(o.row.id));
        note(o.row.id + ": fused accuracy " + fixed2(o.row.mean_accuracy));
    }
}

ExperimentReport stage_report(const RunConfig& cfg) {
    Context ctx(cfg);
    const auto scores = stored_scores(ctx);
    const auto fps = all_fingerprints(ctx);
    ExperimentReport report;
    report.seed = cfg.seed;
    report.folds = ctx.manifest.folds;
    report.config_snapshot = cfg.snapshot;
    auto row_for = [&](const std::string& id, const ScoreMatrix& s) {
        AccuracyRow row;
        row.id = id;
        row.fold_accuracy = fold_accuracies(ctx.manifest, s.predictions());
        row.mean_accuracy = mean_of(row.fold_accuracy);
        return row;
    };
    for (const auto& d : cfg.descriptors) report.descriptors.push_back(row_for(d.id, scores.at(d.id)));
    for (const auto& e : cfg.external_features) report.descriptors.push_back(row_for(e.id, scores.at(e.id)));
    for (const auto& f : cfg.fusions) {
        auto s = read_cv_scores(ctx.manifest, ctx.fusion_path(f.name), fps.at(f.name));
        if (!s) throw StateError("no current fused scores for '" + f.name + "'; run fuse first");
        AccuracyRow row = row_for(f.name, *s);
        row.members = f.members;
        report.fusions.push_back(std::move(row));
    }
    write_report(report, cfg.output);
    note("wrote " + (cfg.output / "results.txt").string());
    return report;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Texture descriptor ensemble experiments"};
    app.require_subcommand(1);
    std::string config_path;
    int workers = 0;
    struct Stage {
        const char* name;
        const char* help;
    };
    const Stage stages[] = {{"extract", "compute and cache descriptor features"},
                            {"train-eval", "cross-validate an SVM per descriptor and store scores"},
                            {"fuse", "apply the fusion configs to stored scores"},
                            {"report", "write results.txt and table.txt"},
                            {"all", "run every stage in order"}};
    for (const auto& s : stages) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--workers", workers, "parallel work units (overrides the config)")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = load_run_config(config_path);
        if (workers > 0) cfg.workers = workers;
        if (cmd == "extract" || cmd == "all") stage_extract(cfg);
        if (cmd == "train-eval" || cmd == "all") stage_train_eval(cfg);
        if (cmd == "fuse" || cmd == "all") stage_fuse(cfg);
        if (cmd == "report" || cmd == "all") stage_report(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "texfuse: config error at '" << e.key() << "': " << e.what() << '\n';
        return 2;
    } catch (const DatasetMissing& e) {
        std::cerr << "texfuse: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "texfuse: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace texfuse
