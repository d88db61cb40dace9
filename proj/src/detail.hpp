#pragma once

// Internal helpers shared by the descriptor implementations.

#include "texfuse/descriptors.hpp"
#include "texfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace texfuse::detail {

/// Bilinear sample of (I - reference) without bounds checks.
inline double interpolate_relative(const GrayImage& img, double x, double y, double reference) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double a = img.at(x0, y0) - reference;
    const double b = img.at(x1, y0) - reference;
    const double c = img.at(x0, y1) - reference;
    const double d = img.at(x1, y1) - reference;
    const double top = a + fx * (b - a);
    const double bottom = c + fx * (d - c);
    return top + fy * (bottom - top);
}

/// Precomputed sampling pattern (ring or line) around a center pixel.
class SamplePattern {
public:
    SamplePattern(std::vector<std::pair<double, double>> offsets, int margin)
        : offsets_(std::move(offsets)), margin_(margin) {}

    static SamplePattern ring(const NeighborhoodSpec& spec) { return {ring_offsets(spec), spec.margin()}; }

    int margin() const noexcept { return margin_; }
    std::size_t size() const noexcept { return offsets_.size(); }

    /// Neighbor minus center for every sample.
    void differences(const GrayImage& img, int cx, int cy, std::vector<double>& out) const {
        const double center = img.at(cx, cy);
        out.resize(offsets_.size());
        for (std::size_t p = 0; p < offsets_.size(); ++p) {
            out[p] = interpolate_relative(img, cx + offsets_[p].first, cy + offsets_[p].second, center);
        }
    }

private:
    std::vector<std::pair<double, double>> offsets_;
    int margin_;
};

/// Calls fn(x, y) for every center at least `margin` pixels from the border.
template <typename F>
void for_each_center(const GrayImage& img, int margin, F&& fn) {
    if (img.width() - 2 * margin <= 0 || img.height() - 2 * margin <= 0) {
        throw DimensionError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                             " has no pixel at distance " + std::to_string(margin) + " from the border");
    }
    for (int y = margin; y < img.height() - margin; ++y) {
        for (int x = margin; x < img.width() - margin; ++x) fn(x, y);
    }
}

/// L1-normalizes [first, first+len) in place; returns false if the mass is zero.
inline bool normalize_l1(std::vector<double>& h, std::size_t first, std::size_t len) {
    double total = 0.0;
    for (std::size_t i = first; i < first + len; ++i) total += h[i];
    if (total <= 0.0) return false;
    for (std::size_t i = first; i < first + len; ++i) h[i] /= total;
    return true;
}

inline std::vector<double> normalized(std::vector<double> h) {
    normalize_l1(h, 0, h.size());
    return h;
}

inline void append(FeatureVector& dst, const FeatureVector& src) {
    dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
}

/// Values of the 3x3 block around (cx, cy) minus the center (center itself included as 0).
inline std::array<double, 9> block3x3_differences(const GrayImage& img, int cx, int cy) {
    std::array<double, 9> d{};
    const double c = img.at(cx, cy);
    int i = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) d[i++] = img.at(cx + dx, cy + dy) - c;
    }
    return d;
}

}  // namespace texfuse::detail
