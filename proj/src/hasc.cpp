#include "detail.hpp"

namespace texfuse {

namespace {

int mirror(int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

std::vector<int> bin_indices(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double range = *hi - *lo;
    std::vector<int> bins(v.size(), 0);
    if (range <= 0.0) return bins;
    for (std::size_t i = 0; i < v.size(); ++i) {
        bins[i] = std::min(kHascBins - 1, static_cast<int>((v[i] - *lo) / range * kHascBins));
    }
    return bins;
}

double entropy_bits(const std::array<double, kHascBins>& p) {
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) h -= x * std::log2(x);
    }
    return h;
}

}  // namespace

std::array<GrayImage, kHascMaps> hasc_maps(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    std::array<std::vector<double>, kHascMaps> m;
    for (auto& v : m) v.resize(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double c = img.at(x, y);
            const double l = img.at(mirror(x - 1, w), y);
            const double r = img.at(mirror(x + 1, w), y);
            const double u = img.at(x, mirror(y - 1, h));
            const double d = img.at(x, mirror(y + 1, h));
            const double ix = 0.5 * (r - l);
            const double iy = 0.5 * (d - u);
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            m[0][i] = c;
            m[1][i] = std::abs(ix);
            m[2][i] = std::abs(iy);
            m[3][i] = std::hypot(ix, iy);
            m[4][i] = std::abs(r - 2.0 * c + l);
            m[5][i] = std::abs(d - 2.0 * c + u);
        }
    }
    return {GrayImage(w, h, std::move(m[0])), GrayImage(w, h, std::move(m[1])), GrayImage(w, h, std::move(m[2])),
            GrayImage(w, h, std::move(m[3])), GrayImage(w, h, std::move(m[4])), GrayImage(w, h, std::move(m[5]))};
}

std::vector<double> hasc_patch(std::span<const std::vector<double>> maps) {
    if (maps.size() < 2) throw ParameterError("HASC needs at least two feature maps");
    const std::size_t n = maps.front().size();
    if (n < 4) throw ParameterError("HASC patch must contain at least 2x2 pixels");
    for (const auto& m : maps) {
        if (m.size() != n) throw DimensionError("HASC maps differ in size");
    }
    const std::size_t k = maps.size();

    std::vector<double> means(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (double v : maps[a]) means[a] += v;
        means[a] /= static_cast<double>(n);
    }
    std::vector<double> out;
    out.reserve(k * (k + 1));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += (maps[a][i] - means[a]) * (maps[b][i] - means[b]);
            out.push_back(acc / static_cast<double>(n));
        }
    }

    // Counts first, then one division, so a single occupied bin has probability exactly 1.
    const double total = static_cast<double>(n);
    std::vector<std::vector<int>> bins;
    std::vector<std::array<double, kHascBins>> marginals(k);
    for (std::size_t a = 0; a < k; ++a) {
        bins.push_back(bin_indices(maps[a]));
        marginals[a].fill(0.0);
        for (int b : bins[a]) marginals[a][b] += 1.0;
        for (double& p : marginals[a]) p /= total;
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            if (a == b) {
                out.push_back(entropy_bits(marginals[a]));
                continue;
            }
            std::array<double, kHascBins * kHascBins> joint{};
            for (std::size_t i = 0; i < n; ++i) joint[bins[a][i] * kHascBins + bins[b][i]] += 1.0;
            for (double& p : joint) p /= total;
            double mi = 0.0;
            for (int u = 0; u < kHascBins; ++u) {
                for (int v = 0; v < kHascBins; ++v) {
                    const double pj = joint[u * kHascBins + v];
                    if (pj > 0.0) mi += pj * std::log2(pj / (marginals[a][u] * marginals[b][v]));
                }
            }
            out.push_back(std::max(mi, 0.0));
        }
    }
    return out;
}

FeatureVector hasc(const GrayImage& img, HascGrid grid) {
    if (grid.cols < 1 || grid.rows < 1) throw ParameterError("HASC grid needs at least one patch");
    const auto maps = hasc_maps(img);
    FeatureVector out{"hasc", {}};
    for (int gy = 0; gy < grid.rows; ++gy) {
        const int y0 = gy * img.height() / grid.rows;
        const int y1 = (gy + 1) * img.height() / grid.rows;
        for (int gx = 0; gx < grid.cols; ++gx) {
            const int x0 = gx * img.width() / grid.cols;
            const int x1 = (gx + 1) * img.width() / grid.cols;
            if (x1 - x0 < 2 || y1 - y0 < 2) throw ParameterError("HASC patch smaller than 2x2");
            std::vector<std::vector<double>> patch(kHascMaps);
            for (int m = 0; m < kHascMaps; ++m) {
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) patch[m].push_back(maps[m].at(x, y));
                }
            }
            const auto values = hasc_patch(patch);
            out.values.insert(out.values.end(), values.begin(), values.end());
        }
    }
    return out;
}

}  // namespace texfuse
