#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace texfuse {

/// Single-channel raster with real-valued intensities, row-major.
/// Immutable after construction.
class GrayImage {
public:
    GrayImage(int width, int height, std::vector<double> pixels);

    /// Constant image.
    static GrayImage filled(int width, int height, double value);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    double at(int x, int y) const noexcept { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const double> pixels() const noexcept { return pixels_; }

    /// Pixel-wise affine map a*I + b.
    GrayImage affine(double scale, double offset) const;
    /// Rotate by 90 degrees counter-clockwise (as displayed, y pointing down).
    GrayImage rotated90() const;

    bool operator==(const GrayImage&) const = default;

private:
    int width_;
    int height_;
    std::vector<double> pixels_;
};

/// Circular sampling ring. Neighbor p sits at angle start_angle + 2*pi*p/points,
/// measured from +x and increasing counter-clockwise on screen (so p = points/4
/// is the pixel above the center, i.e. at y - radius).
struct NeighborhoodSpec {
    double radius = 1.0;
    int points = 8;
    double start_angle = 0.0;

    /// Throws ParameterError unless radius > 0 and points is even and >= 4.
    void validate() const;
    /// Smallest integer border that keeps every sample inside the image.
    int margin() const;
};

struct ImageStats {
    double mean = 0.0;
    /// Lower median: element (n-1)/2 of the sorted pixels.
    double median = 0.0;
};

GrayImage load_image(const std::filesystem::path& path);
/// 8-bit grayscale PNG; values are rounded and clamped to [0, 255].
void save_png(const GrayImage& img, const std::filesystem::path& path);
/// 8-bit RGB PNG from three planes; used for fixtures.
void save_png_rgb(const GrayImage& r, const GrayImage& g, const GrayImage& b,
                  const std::filesystem::path& path);

double bilinear_sample(const GrayImage& img, double x, double y);
/// Bilinear sample of (I - reference). Differences are interpolated directly,
/// so results are exactly invariant to adding a constant to integer-valued images.
double bilinear_sample_relative(const GrayImage& img, double x, double y, double reference);

std::vector<double> circular_neighbors(const GrayImage& img, int cx, int cy,
                                       const NeighborhoodSpec& spec);
/// Same ring as circular_neighbors, returned as differences neighbor - center.
std::vector<double> circular_differences(const GrayImage& img, int cx, int cy,
                                         const NeighborhoodSpec& spec);

/// Ring sample offsets (dx, dy) with near-integer values snapped to integers.
std::vector<std::pair<double, double>> ring_offsets(const NeighborhoodSpec& spec);

ImageStats global_stats(const GrayImage& img);
double lower_median(std::vector<double> values);

}  // namespace texfuse
