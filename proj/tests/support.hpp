#pragma once

// Test-only helpers: random inputs, brute-force oracles written from the
// descriptor definitions, and synthetic datasets on disk.

#include "texfuse/image.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace texfuse::testing {

/// Uniform real intensities in [0, 255).
GrayImage random_image(int w, int h, std::mt19937_64& rng);
/// Uniform integer intensities in [0, 255].
GrayImage random_int_image(int w, int h, std::mt19937_64& rng);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Writes `<root>/<class>/<nn>.png` for three texture classes (flat noise,
/// vertical stripes, checkerboard) with per-image jitter.
void write_synthetic_dataset(const std::filesystem::path& root, int per_class, int side, std::uint64_t seed);

namespace oracle {

/// Textbook bilinear interpolation at absolute coordinates.
double bilinear(const GrayImage& img, double x, double y);

/// Ring intensities, angle 2*pi*p/P from +x, y pointing down (so dy = -r sin).
std::vector<double> ring(const GrayImage& img, int cx, int cy, double r, int points);

/// Per-bin counts; the histogram helpers return counts divided by the center count.
std::vector<double> lbp(const GrayImage& img, double r, int points);
std::vector<double> ltp(const GrayImage& img, double r, int points, double tau);
std::vector<double> mqc(const GrayImage& img, double r, int points, double tau, double theta);
std::vector<double> alpha_lbp(const GrayImage& img, double degrees);
std::vector<double> lcvmsp(const GrayImage& img);
std::vector<double> arcslbp(const GrayImage& img, double r, int points);
std::vector<double> dlbp(const GrayImage& img, double r, int points);

struct DlbpSplit {
    double tau = 0.0;       // midpoint between the two groups
    double residual = 0.0;  // within-group sum of squared deviations
    double sigma2 = 0.0;
    double weight = 0.0;
};

/// Tries every threshold "values <= v" for each patch value v below the maximum.
DlbpSplit dlbp_sweep(const std::vector<double>& patch);

}  // namespace oracle

}  // namespace texfuse::testing
