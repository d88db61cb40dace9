#include "detail.hpp"

namespace texfuse {

RunCode sclbp_encode(std::span<const int> bits, RunComponent tag) {
    const std::size_t pad = (bits.size() + 1) / 2;
    RunCode code;
    code.component = tag;
    std::size_t i = 0;
    while (i < bits.size()) {
        std::size_t j = i;
        while (j < bits.size() && bits[j] == bits[i]) ++j;
        (bits[i] != 0 ? code.ones_runs : code.zeros_runs).push_back(static_cast<int>(j - i));
        i = j;
    }
    for (auto* runs : {&code.ones_runs, &code.zeros_runs}) {
        std::sort(runs->begin(), runs->end(), std::greater<>());
        runs->resize(pad, 0);
    }
    return code;
}

std::vector<double> sclbp_radii() {
    std::vector<double> radii;
    for (int k = 0; k < 16; ++k) radii.push_back(1.0 + 0.2 * k);
    return radii;
}

std::vector<std::vector<double>> sclbp_raw_vectors(const GrayImage& img, double radius) {
    const auto pattern = detail::SamplePattern::ring({radius, kSclbpPoints});
    const double global_mean = global_stats(img).mean;

    std::vector<std::vector<double>> diffs;
    std::vector<double> center_bits;
    double abs_sum = 0.0;
    std::vector<double> d;
    detail::for_each_center(img, pattern.margin(), [&](int x, int y) {
        pattern.differences(img, x, y, d);
        for (double v : d) abs_sum += std::abs(v);
        diffs.push_back(d);
        center_bits.push_back(static_cast<double>(q(img.at(x, y) - global_mean)));
    });
    const double mean_magnitude = abs_sum / static_cast<double>(diffs.size() * kSclbpPoints);

    std::vector<std::vector<double>> out;
    out.reserve(diffs.size());
    std::array<int, kSclbpPoints> sign{};
    std::array<int, kSclbpPoints> mplus{};
    std::array<int, kSclbpPoints> mminus{};
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        for (int p = 0; p < kSclbpPoints; ++p) {
            const double v = diffs[i][p];
            const bool large = std::abs(v) >= mean_magnitude;
            sign[p] = q(v);
            mplus[p] = (v >= 0.0 && large) ? 1 : 0;
            mminus[p] = (v < 0.0 && large) ? 1 : 0;
        }
        std::vector<double> raw;
        raw.reserve(kSclbpRawDim);
        for (const RunCode& rc : {sclbp_encode(sign, RunComponent::S), sclbp_encode(mplus, RunComponent::MPlus),
                                  sclbp_encode(mminus, RunComponent::MMinus)}) {
            raw.insert(raw.end(), rc.ones_runs.begin(), rc.ones_runs.end());
            raw.insert(raw.end(), rc.zeros_runs.begin(), rc.zeros_runs.end());
        }
        raw.push_back(center_bits[i]);
        out.push_back(std::move(raw));
    }
    return out;
}

FeatureVector sclbp(const GrayImage& img, std::span<const Codebook> codebooks) {
    const auto radii = sclbp_radii();
    if (codebooks.size() != radii.size()) {
        throw StateError("scLBP needs one trained codebook per radius (" + std::to_string(radii.size()) +
                         "), got " + std::to_string(codebooks.size()));
    }
    const std::size_t k = codebooks.front().k;
    for (const auto& cb : codebooks) {
        if (cb.k != k || cb.k == 0 || cb.dim != static_cast<std::size_t>(kSclbpRawDim)) {
            throw StateError("scLBP codebooks are untrained or inconsistent");
        }
    }
    std::vector<double> hist(k, 0.0);
    for (std::size_t r = 0; r < radii.size(); ++r) {
        for (const auto& raw : sclbp_raw_vectors(img, radii[r])) hist[assign(codebooks[r], raw)] += 1.0;
    }
    return {"sclbp", detail::normalized(std::move(hist))};
}

std::vector<std::array<double, kJetSize>> jet_vectors(const GrayImage& img, const FilterBank& bank) {
    const auto maps = apply_bank(img, bank);
    std::vector<std::array<double, kJetSize>> out(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        for (int c = 0; c < kJetSize; ++c) out[i][c] = maps[c].pixels()[i];
    }
    return out;
}

FeatureVector jet(const GrayImage& img, const Codebook& codebook, const FilterBank& bank) {
    if (codebook.k == 0) throw StateError("JET codebook is untrained");
    if (codebook.dim != static_cast<std::size_t>(kJetSize)) {
        throw StateError("JET codebook has dimension " + std::to_string(codebook.dim) + ", expected 6");
    }
    std::vector<double> hist(codebook.k, 0.0);
    for (const auto& v : jet_vectors(img, bank)) hist[assign(codebook, v)] += 1.0;
    return {"jet", detail::normalized(std::move(hist))};
}

}  // namespace texfuse
