#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace texfuse::testing {

namespace fs = std::filesystem;

GrayImage random_image(int w, int h, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 255.0);
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (double& v : px) v = u(rng);
    return GrayImage(w, h, std::move(px));
}

GrayImage random_int_image(int w, int h, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> u(0, 255);
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (double& v : px) v = u(rng);
    return GrayImage(w, h, std::move(px));
}

TempDir::TempDir(const std::string& tag) {
    static int counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("texfuse-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_synthetic_dataset(const fs::path& root, int per_class, int side, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-12.0, 12.0);
    std::uniform_int_distribution<int> phase(0, 5);
    const char* classes[] = {"checker", "flat", "stripes"};
    for (int c = 0; c < 3; ++c) {
        fs::create_directories(root / classes[c]);
        for (int i = 0; i < per_class; ++i) {
            const int ph = phase(rng);
            std::vector<double> px(static_cast<std::size_t>(side) * side);
            for (int y = 0; y < side; ++y) {
                for (int x = 0; x < side; ++x) {
                    double base = 128.0;
                    if (c == 0) base += (((x + ph) / 3 + (y + ph) / 3) % 2 ? 60.0 : -60.0);
                    if (c == 2) base += ((x + ph) % 6 < 3 ? 60.0 : -60.0);
                    px[static_cast<std::size_t>(y) * side + x] = base + noise(rng);
                }
            }
            char name[32];
            std::snprintf(name, sizeof name, "%02d.png", i);
            save_png(GrayImage(side, side, std::move(px)), root / classes[c] / name);
        }
    }
}

namespace oracle {

namespace {

int ring_margin(double r) { return static_cast<int>(std::ceil(r - 1e-9)); }

template <typename F>
void centers(const GrayImage& img, int m, F&& f) {
    for (int y = m; y < img.height() - m; ++y) {
        for (int x = m; x < img.width() - m; ++x) f(x, y);
    }
}

std::vector<double> normalize(std::vector<double> counts, std::size_t from, std::size_t len) {
    double total = 0.0;
    for (std::size_t i = from; i < from + len; ++i) total += counts[i];
    if (total > 0.0) {
        for (std::size_t i = from; i < from + len; ++i) counts[i] /= total;
    }
    return counts;
}

int bit(bool b) { return b ? 1 : 0; }

}  // namespace

double bilinear(const GrayImage& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto px = [&](int xx, int yy, double weight) {
        if (weight == 0.0) return 0.0;
        if (xx < 0 || yy < 0 || xx >= img.width() || yy >= img.height()) throw std::out_of_range("oracle sample");
        return weight * img.at(xx, yy);
    };
    return px(x0, y0, (1 - fx) * (1 - fy)) + px(x0 + 1, y0, fx * (1 - fy)) + px(x0, y0 + 1, (1 - fx) * fy) +
           px(x0 + 1, y0 + 1, fx * fy);
}

std::vector<double> ring(const GrayImage& img, int cx, int cy, double r, int points) {
    std::vector<double> out;
    for (int p = 0; p < points; ++p) {
        const double a = 2.0 * std::numbers::pi * p / points;
        out.push_back(bilinear(img, cx + r * std::cos(a), cy - r * std::sin(a)));
    }
    return out;
}

std::vector<double> lbp(const GrayImage& img, double r, int points) {
    std::vector<double> h(std::size_t{1} << points, 0.0);
    centers(img, ring_margin(r), [&](int x, int y) {
        const auto g = ring(img, x, y, r, points);
        std::size_t code = 0;
        for (int p = 0; p < points; ++p) code += static_cast<std::size_t>(bit(g[p] >= img.at(x, y))) << p;
        h[code] += 1;
    });
    return normalize(h, 0, h.size());
}

std::vector<double> ltp(const GrayImage& img, double r, int points, double tau) {
    const std::size_t bins = std::size_t{1} << points;
    std::vector<double> h(2 * bins, 0.0);
    centers(img, ring_margin(r), [&](int x, int y) {
        const auto g = ring(img, x, y, r, points);
        std::size_t up = 0, lo = 0;
        for (int p = 0; p < points; ++p) {
            const double d = g[p] - img.at(x, y);
            up += static_cast<std::size_t>(bit(d >= tau)) << p;
            lo += static_cast<std::size_t>(bit(d < -tau)) << p;
        }
        h[up] += 1;
        h[bins + lo] += 1;
    });
    return normalize(normalize(h, 0, bins), bins, bins);
}

std::vector<double> mqc(const GrayImage& img, double r, int points, double tau, double theta) {
    const std::size_t bins = std::size_t{1} << points;
    std::vector<double> h(4 * bins, 0.0);
    centers(img, ring_margin(r), [&](int x, int y) {
        const auto g = ring(img, x, y, r, points);
        std::size_t codes[4] = {0, 0, 0, 0};
        for (int p = 0; p < points; ++p) {
            const double d = g[p] - img.at(x, y);
            // maps for labels 2, 1, -1, -2
            codes[0] += static_cast<std::size_t>(bit(d >= tau)) << p;
            codes[1] += static_cast<std::size_t>(bit(d >= theta && d < tau)) << p;
            codes[2] += static_cast<std::size_t>(bit(d < 0 && d >= -theta)) << p;
            codes[3] += static_cast<std::size_t>(bit(d < -theta)) << p;
        }
        for (int m = 0; m < 4; ++m) h[m * bins + codes[m]] += 1;
    });
    for (int m = 0; m < 4; ++m) h = normalize(h, m * bins, bins);
    return h;
}

std::vector<double> alpha_lbp(const GrayImage& img, double degrees) {
    std::vector<double> h(256, 0.0);
    const double a = degrees * std::numbers::pi / 180.0;
    centers(img, 4, [&](int x, int y) {
        std::size_t code = 0;
        int p = 0;
        for (int t = -4; t <= 4; ++t) {
            if (t == 0) continue;
            const double v = bilinear(img, x + t * std::cos(a), y - t * std::sin(a));
            code += static_cast<std::size_t>(bit(v >= img.at(x, y))) << p++;
        }
        h[code] += 1;
    });
    return normalize(h, 0, h.size());
}

std::vector<double> lcvmsp(const GrayImage& img) {
    std::vector<double> all(img.pixels().begin(), img.pixels().end());
    std::sort(all.begin(), all.end());
    const double image_median = all[(all.size() - 1) / 2];
    std::vector<double> h(1024, 0.0);
    centers(img, 1, [&](int x, int y) {
        const auto g = ring(img, x, y, 1.0, 8);
        const double c = img.at(x, y);
        std::size_t code = 0;
        for (int i = 0; i < 8; ++i) {
            const double prev = g[(i + 7) % 8];
            const double next = g[(i + 1) % 8];
            code += static_cast<std::size_t>(bit((prev + next) / 2 >= g[i])) << i;
        }
        std::vector<double> block;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) block.push_back(img.at(x + dx, y + dy));
        }
        std::sort(block.begin(), block.end());
        code += static_cast<std::size_t>(bit(block[4] >= c)) << 8;
        code += static_cast<std::size_t>(bit(image_median >= c)) << 9;
        h[code] += 1;
    });
    return normalize(h, 0, h.size());
}

std::vector<double> arcslbp(const GrayImage& img, double r, int points) {
    const int half = points / 2;
    const std::size_t bins = std::size_t{1} << (half + 3);
    double global = 0.0;
    for (double v : img.pixels()) global += v;
    global /= static_cast<double>(img.size());
    std::vector<double> h(2 * bins, 0.0);
    centers(img, std::max(ring_margin(r), 1), [&](int x, int y) {
        const auto g = ring(img, x, y, r, points);
        const double c = img.at(x, y);
        double local = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) local += img.at(x + dx, y + dy);
        }
        local /= 9.0;
        double ring_mean = 0.0;
        for (double v : g) ring_mean += v;
        ring_mean /= points;
        std::size_t att = 0, rep = 0;
        for (int i = 0; i < half; ++i) {
            att += static_cast<std::size_t>(bit((g[i] + g[i + half]) / 2 >= c)) << i;
            rep += static_cast<std::size_t>(bit(std::abs(g[i] - c) >= std::abs(g[i + half] - c))) << i;
        }
        const std::size_t extra = static_cast<std::size_t>(bit(local >= c)) |
                                  static_cast<std::size_t>(bit(global >= c)) << 1 |
                                  static_cast<std::size_t>(bit(ring_mean >= c)) << 2;
        h[att + (extra << half)] += 1;
        h[bins + rep + (extra << half)] += 1;
    });
    return normalize(normalize(h, 0, bins), bins, bins);
}

DlbpSplit dlbp_sweep(const std::vector<double>& patch) {
    const double n = static_cast<double>(patch.size());
    double mean = 0.0;
    for (double v : patch) mean += v;
    mean /= n;
    double sigma2 = 0.0;
    for (double v : patch) sigma2 += (v - mean) * (v - mean);
    sigma2 /= n;
    const double vmax = *std::max_element(patch.begin(), patch.end());

    DlbpSplit best;
    best.tau = patch[0];
    best.residual = sigma2 * n;
    best.sigma2 = sigma2;
    bool found = false;
    std::vector<double> candidates(patch);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (std::size_t k = 0; k + 1 < candidates.size(); ++k) {
        const double v = candidates[k];
        if (v == vmax) break;
        double sl = 0, su = 0;
        int nl = 0, nu = 0;
        for (double x : patch) {
            if (x <= v) { sl += x; ++nl; } else { su += x; ++nu; }
        }
        const double ml = sl / nl, mu = su / nu;
        double res = 0.0;
        for (double x : patch) res += x <= v ? (x - ml) * (x - ml) : (x - mu) * (x - mu);
        if (!found || res < best.residual) {
            found = true;
            best.residual = res;
            best.tau = 0.5 * (v + candidates[k + 1]);
        }
    }
    const double sb2 = found ? std::clamp(sigma2 - best.residual / n, 0.0, sigma2) : 0.0;
    best.weight = std::sqrt(sb2 / (sigma2 + 0.01 * 0.01));
    return best;
}

std::vector<double> dlbp(const GrayImage& img, double r, int points) {
    std::vector<double> h(std::size_t{1} << points, 0.0);
    centers(img, ring_margin(r), [&](int x, int y) {
        const auto g = ring(img, x, y, r, points);
        std::vector<double> patch{img.at(x, y)};
        patch.insert(patch.end(), g.begin(), g.end());
        const DlbpSplit s = dlbp_sweep(patch);
        std::size_t code = 0;
        for (int p = 0; p < points; ++p) code += static_cast<std::size_t>(bit(g[p] >= s.tau)) << p;
        h[code] += s.weight;
    });
    double total = 0.0;
    for (double v : h) total += v;
    if (total <= 0.0) return std::vector<double>(h.size(), 1.0 / static_cast<double>(h.size()));
    return normalize(h, 0, h.size());
}

}  // namespace oracle

}  // namespace texfuse::testing
