#include "detail.hpp"

namespace texfuse {

FeatureVector arcslbp_single(const GrayImage& img, const NeighborhoodSpec& spec) {
    const auto pattern = detail::SamplePattern::ring(spec);
    const std::size_t half = pattern.size() / 2;
    const std::size_t bins = std::size_t{1} << (half + 3);
    const double global_mean = global_stats(img).mean;

    std::vector<double> hist(2 * bins, 0.0);
    std::vector<double> d;
    detail::for_each_center(img, std::max(pattern.margin(), 1), [&](int x, int y) {
        pattern.differences(img, x, y, d);
        const auto block = detail::block3x3_differences(img, x, y);
        double local_mean = 0.0;
        for (double v : block) local_mean += v;
        local_mean /= 9.0;
        double ring_mean = 0.0;
        for (double v : d) ring_mean += v;
        ring_mean /= static_cast<double>(d.size());

        std::size_t attractive = 0;
        std::size_t repulsive = 0;
        for (std::size_t i = 0; i < half; ++i) {
            attractive |= static_cast<std::size_t>(q(0.5 * (d[i] + d[i + half]))) << i;
            repulsive |= static_cast<std::size_t>(q(std::abs(d[i]) - std::abs(d[i + half]))) << i;
        }
        const std::size_t means = static_cast<std::size_t>(q(local_mean)) |
                                  static_cast<std::size_t>(q(global_mean - img.at(x, y))) << 1 |
                                  static_cast<std::size_t>(q(ring_mean)) << 2;
        attractive |= means << half;
        repulsive |= means << half;
        hist[attractive] += 1.0;
        hist[bins + repulsive] += 1.0;
    });
    detail::normalize_l1(hist, 0, bins);
    detail::normalize_l1(hist, bins, bins);
    return {"arcslbp", std::move(hist)};
}

namespace {

std::vector<GrayImage> prepare_sources(const GrayImage& img, const ArcslbpConfig& cfg) {
    switch (cfg.source) {
        case ArcsSource::Raw:
            return {img};
        case ArcsSource::Gradient:
            return {gradient_magnitude(img)};
        case ArcsSource::Hessian: {
            if (cfg.sigmas.empty()) throw ParameterError("sigmaARCSLBP needs at least one sigma");
            std::vector<GrayImage> out;
            for (double s : cfg.sigmas) out.push_back(hessian_magnitude(img, s));
            return out;
        }
    }
    throw ParameterError("unknown ARCSLBP source");
}

}  // namespace

FeatureVector arcslbp(const GrayImage& img, const ArcslbpConfig& cfg) {
    if (cfg.specs.empty()) throw ParameterError("ARCSLBP needs at least one neighborhood");
    for (const auto& s : cfg.specs) s.validate();
    FeatureVector out{"arcslbp", {}};
    for (const GrayImage& source : prepare_sources(img, cfg)) {
        for (const auto& spec : cfg.specs) detail::append(out, arcslbp_single(source, spec));
    }
    return out;
}

std::size_t arcslbp_dim(const ArcslbpConfig& cfg) {
    std::size_t per_source = 0;
    for (const auto& s : cfg.specs) per_source += 2 * (std::size_t{1} << (s.points / 2 + 3));
    const std::size_t sources = cfg.source == ArcsSource::Hessian ? cfg.sigmas.size() : 1;
    return per_source * sources;
}

FeatureVector lcvmsp(const GrayImage& img) {
    const auto pattern = detail::SamplePattern::ring({1.0, 8});
    const double image_median = global_stats(img).median;
    std::vector<double> hist(1024, 0.0);
    std::vector<double> d;
    detail::for_each_center(img, 1, [&](int x, int y) {
        pattern.differences(img, x, y, d);
        std::size_t code = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            const double prev = d[(i + 7) % 8];
            const double next = d[(i + 1) % 8];
            code |= static_cast<std::size_t>(q(0.5 * (prev + next) - d[i])) << i;
        }
        const auto block = detail::block3x3_differences(img, x, y);
        const double local_median = lower_median({block.begin(), block.end()});
        code |= static_cast<std::size_t>(q(local_median)) << 8;
        code |= static_cast<std::size_t>(q(image_median - img.at(x, y))) << 9;
        hist[code] += 1.0;
    });
    return {"lcvmsp", detail::normalized(std::move(hist))};
}

}  // namespace texfuse
