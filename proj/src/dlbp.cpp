#include "detail.hpp"

namespace texfuse {

namespace {

// Population variance of a contiguous run, two-pass.
double sum_squared_deviation(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss;
}

}  // namespace

DlbpPatchResult dlbp_patch(std::span<const double> patch) {
    if (patch.size() < 2) throw ParameterError("DLBP patch needs at least two values");
    std::vector<double> sorted(patch.begin(), patch.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    DlbpPatchResult result;
    result.sigma2 = sum_squared_deviation(sorted) / n;
    result.tau_star = sorted.front();

    // Candidate splits sit between consecutive distinct values; the lower group
    // holds values <= tau. Strict comparison keeps the lowest threshold on ties.
    double best_within = result.sigma2;
    bool found = false;
    const std::span<const double> all(sorted);
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (!(sorted[k - 1] < sorted[k])) continue;
        const double within =
            (sum_squared_deviation(all.first(k)) + sum_squared_deviation(all.subspan(k))) / n;
        if (!found || within < best_within) {
            best_within = within;
            result.tau_star = 0.5 * (sorted[k - 1] + sorted[k]);
            found = true;
        }
    }
    result.sigma_b2 = found ? std::clamp(result.sigma2 - best_within, 0.0, result.sigma2) : 0.0;
    result.weight = std::sqrt(result.sigma_b2 / (result.sigma2 + result.smoothing));
    return result;
}

FeatureVector dlbp(const GrayImage& img, const NeighborhoodSpec& spec) {
    const auto pattern = detail::SamplePattern::ring(spec);
    const std::size_t bins = std::size_t{1} << pattern.size();
    std::vector<double> hist(bins, 0.0);
    std::vector<double> diffs;
    std::vector<double> patch(pattern.size() + 1);
    detail::for_each_center(img, pattern.margin(), [&](int x, int y) {
        // Work relative to the center so the result is exactly shift invariant.
        pattern.differences(img, x, y, diffs);
        patch[0] = 0.0;
        std::copy(diffs.begin(), diffs.end(), patch.begin() + 1);
        const DlbpPatchResult r = dlbp_patch(patch);
        std::size_t code = 0;
        for (std::size_t p = 0; p < diffs.size(); ++p) {
            code |= static_cast<std::size_t>(q(diffs[p] - r.tau_star)) << p;
        }
        hist[code] += r.weight;
    });
    if (!detail::normalize_l1(hist, 0, bins)) std::fill(hist.begin(), hist.end(), 1.0 / static_cast<double>(bins));
    return {"dlbp", std::move(hist)};
}

FeatureVector dlbp(const GrayImage& img, std::span<const NeighborhoodSpec> specs) {
    FeatureVector out{"dlbp", {}};
    for (const auto& spec : specs) detail::append(out, dlbp(img, spec));
    return out;
}

}  // namespace texfuse
