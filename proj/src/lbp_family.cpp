#include "detail.hpp"

#include <cmath>
#include <numbers>

namespace texfuse {

using detail::SamplePattern;

namespace {

std::size_t code_of(const std::vector<double>& diffs) {
    std::size_t code = 0;
    for (std::size_t p = 0; p < diffs.size(); ++p) code |= static_cast<std::size_t>(q(diffs[p])) << p;
    return code;
}

FeatureVector lbp_with_pattern(const GrayImage& img, const SamplePattern& pattern, std::string id) {
    std::vector<double> hist(std::size_t{1} << pattern.size(), 0.0);
    std::vector<double> diffs;
    detail::for_each_center(img, pattern.margin(), [&](int x, int y) {
        pattern.differences(img, x, y, diffs);
        hist[code_of(diffs)] += 1.0;
    });
    return {std::move(id), detail::normalized(std::move(hist))};
}

// Upper/lower split of a ternary code with a per-center threshold.
template <typename ThresholdFn>
FeatureVector ternary_split(const GrayImage& img, const SamplePattern& pattern, int margin,
                            ThresholdFn&& threshold, std::string id) {
    const std::size_t bins = std::size_t{1} << pattern.size();
    std::vector<double> hist(2 * bins, 0.0);
    std::vector<double> diffs;
    detail::for_each_center(img, margin, [&](int x, int y) {
        pattern.differences(img, x, y, diffs);
        const double tau = threshold(x, y);
        std::size_t upper = 0;
        std::size_t lower = 0;
        for (std::size_t p = 0; p < diffs.size(); ++p) {
            const int s = ternary(diffs[p], tau);
            if (s == 1) upper |= std::size_t{1} << p;
            if (s == -1) lower |= std::size_t{1} << p;
        }
        hist[upper] += 1.0;
        hist[bins + lower] += 1.0;
    });
    detail::normalize_l1(hist, 0, bins);
    detail::normalize_l1(hist, bins, bins);
    return {std::move(id), std::move(hist)};
}

SamplePattern line_pattern(double degrees) {
    if (std::fmod(degrees, 45.0) != 0.0) {
        throw ParameterError("alphaLBP angle must be a multiple of 45 degrees, got " + std::to_string(degrees));
    }
    double folded = std::fmod(degrees, 180.0);
    if (folded < 0.0) folded += 180.0;
    const double rad = folded * std::numbers::pi / 180.0;
    std::vector<std::pair<double, double>> offsets;
    for (int t : {-4, -3, -2, -1, 1, 2, 3, 4}) {
        auto snap = [](double v) {
            const double r = std::round(v);
            return std::abs(v - r) < 1e-9 ? r : v;
        };
        offsets.emplace_back(snap(t * std::cos(rad)), snap(-t * std::sin(rad)));
    }
    return {std::move(offsets), 4};
}

}  // namespace

FeatureVector lbp(const GrayImage& img, const NeighborhoodSpec& spec) {
    return lbp_with_pattern(img, SamplePattern::ring(spec), "lbp");
}

FeatureVector ltp(const GrayImage& img, const NeighborhoodSpec& spec, double tau) {
    if (!(tau >= 0.0)) throw ParameterError("LTP threshold must be >= 0");
    const auto pattern = SamplePattern::ring(spec);
    return ternary_split(img, pattern, pattern.margin(), [tau](int, int) { return tau; }, "ltp");
}

FeatureVector mqc(const GrayImage& img, const NeighborhoodSpec& spec, double tau, double theta) {
    if (!(theta > 0.0 && theta < tau)) throw ParameterError("MQC requires 0 < theta < tau");
    const auto pattern = SamplePattern::ring(spec);
    const std::size_t bins = std::size_t{1} << pattern.size();
    constexpr std::array<int, 4> labels{2, 1, -1, -2};
    std::vector<double> hist(4 * bins, 0.0);
    std::vector<double> diffs;
    detail::for_each_center(img, pattern.margin(), [&](int x, int y) {
        pattern.differences(img, x, y, diffs);
        std::array<std::size_t, 4> codes{};
        for (std::size_t p = 0; p < diffs.size(); ++p) {
            const int label = quinary(diffs[p], tau, theta);
            for (std::size_t m = 0; m < labels.size(); ++m) {
                if (label == labels[m]) codes[m] |= std::size_t{1} << p;
            }
        }
        for (std::size_t m = 0; m < labels.size(); ++m) hist[m * bins + codes[m]] += 1.0;
    });
    for (std::size_t m = 0; m < labels.size(); ++m) detail::normalize_l1(hist, m * bins, bins);
    return {"mqc", std::move(hist)};
}

FeatureVector alpha_lbp(const GrayImage& img, double degrees) {
    return lbp_with_pattern(img, line_pattern(degrees), "alpha_lbp");
}

FeatureVector alpha_lbp(const GrayImage& img, std::span<const double> degrees) {
    if (degrees.empty()) throw ParameterError("alphaLBP needs at least one angle");
    FeatureVector out{"alpha_lbp", {}};
    for (double a : degrees) detail::append(out, alpha_lbp(img, a));
    return out;
}

FeatureVector ahp(const GrayImage& img, const NeighborhoodSpec& spec, double k) {
    if (!(k >= 0.0)) throw ParameterError("AHP threshold factor must be >= 0");
    const auto pattern = SamplePattern::ring(spec);
    auto local_tau = [&](int x, int y) {
        const auto d = detail::block3x3_differences(img, x, y);
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= 9.0;
        double var = 0.0;
        for (double v : d) var += (v - mean) * (v - mean);
        return k * std::sqrt(var / 9.0);
    };
    FeatureVector out = ternary_split(img, pattern, std::max(pattern.margin(), 1), local_tau, "ahp");
    detail::append(out, lbp(img, NeighborhoodSpec{3.0, 8}));
    return out;
}

}  // namespace texfuse
