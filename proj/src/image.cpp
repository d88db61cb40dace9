#include "texfuse/image.hpp"

#include "texfuse/error.hpp"
#include "detail.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace texfuse {

namespace {

constexpr double kSnapTolerance = 1e-9;

double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < kSnapTolerance ? r : v;
}

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

}  // namespace

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 3 || height < 3) {
        throw DimensionError("image must be at least 3x3, got " + std::to_string(width) + "x" +
                             std::to_string(height));
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionError("pixel count does not match width*height");
    }
    for (double v : pixels_) {
        if (!std::isfinite(v)) throw ParameterError("image contains a non-finite intensity");
    }
}

GrayImage GrayImage::filled(int width, int height, double value) {
    return GrayImage(width, height,
                     std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                             static_cast<std::size_t>(std::max(height, 0)),
                                         value));
}

GrayImage GrayImage::affine(double scale, double offset) const {
    std::vector<double> out(pixels_.size());
    std::transform(pixels_.begin(), pixels_.end(), out.begin(),
                   [=](double v) { return scale * v + offset; });
    return GrayImage(width_, height_, std::move(out));
}

GrayImage GrayImage::rotated90() const {
    // Counter-clockwise on screen: new(x', y') = old(W-1-y', x').
    const int nw = height_;
    const int nh = width_;
    std::vector<double> out(pixels_.size());
    for (int y = 0; y < nh; ++y) {
        for (int x = 0; x < nw; ++x) {
            out[static_cast<std::size_t>(y) * nw + x] = at(width_ - 1 - y, x);
        }
    }
    return GrayImage(nw, nh, std::move(out));
}

void NeighborhoodSpec::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw ParameterError("neighborhood radius must be positive");
    }
    if (points < 4 || points % 2 != 0) {
        throw ParameterError("neighbor count must be even and >= 4, got " + std::to_string(points));
    }
    if (points > 24) {
        throw ParameterError("neighbor count above 24 would overflow histogram sizes");
    }
}

int NeighborhoodSpec::margin() const { return static_cast<int>(std::ceil(radius - kSnapTolerance)); }

GrayImage load_image(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw DecodeError("cannot decode PNG " + describe(path) + ": " + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int width = static_cast<int>(image.width);
    const int height = static_cast<int>(image.height);
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("cannot decode PNG " + describe(path) + ": " + msg);
    }
    if (width < 3 || height < 3) {
        throw DimensionError("image " + describe(path) + " is smaller than 3x3");
    }

    std::vector<double> pixels(static_cast<std::size_t>(width) * height);
    if (color) {
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            pixels[i] = 0.299 * buffer[3 * i] + 0.587 * buffer[3 * i + 1] + 0.114 * buffer[3 * i + 2];
            // Gray RGB triples must come back as the exact gray level.
            const double r = std::round(pixels[i]);
            if (std::abs(pixels[i] - r) < 1e-9) pixels[i] = r;
        }
    } else {
        std::copy(buffer.begin(), buffer.end(), pixels.begin());
    }
    return GrayImage(width, height, std::move(pixels));
}

namespace {

void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format,
               const std::vector<png_byte>& buffer) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
        throw Error("cannot write PNG " + describe(path) + ": " + image.message);
    }
}

png_byte to_byte(double v) { return static_cast<png_byte>(std::clamp(std::round(v), 0.0, 255.0)); }

}  // namespace

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    std::vector<png_byte> buffer(img.size());
    std::transform(img.pixels().begin(), img.pixels().end(), buffer.begin(), to_byte);
    write_png(path, img.width(), img.height(), PNG_FORMAT_GRAY, buffer);
}

void save_png_rgb(const GrayImage& r, const GrayImage& g, const GrayImage& b,
                  const std::filesystem::path& path) {
    if (r.width() != g.width() || r.width() != b.width() || r.height() != g.height() ||
        r.height() != b.height()) {
        throw DimensionError("RGB planes differ in size");
    }
    std::vector<png_byte> buffer(3 * r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        buffer[3 * i] = to_byte(r.pixels()[i]);
        buffer[3 * i + 1] = to_byte(g.pixels()[i]);
        buffer[3 * i + 2] = to_byte(b.pixels()[i]);
    }
    write_png(path, r.width(), r.height(), PNG_FORMAT_RGB, buffer);
}

namespace {

void check_coordinates(const GrayImage& img, double x, double y) {
    if (!(x >= 0.0 && y >= 0.0 && x <= img.width() - 1 && y <= img.height() - 1)) {
        throw BoundsError("sample (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") lies outside the image");
    }
}

void check_center(const GrayImage& img, int cx, int cy, const NeighborhoodSpec& spec) {
    const int m = spec.margin();
    if (cx < m || cy < m || cx > img.width() - 1 - m || cy > img.height() - 1 - m) {
        throw BoundsError("center (" + std::to_string(cx) + ", " + std::to_string(cy) +
                          ") is closer than the radius to the border");
    }
}

}  // namespace

double bilinear_sample(const GrayImage& img, double x, double y) {
    check_coordinates(img, x, y);
    return detail::interpolate_relative(img, x, y, 0.0);
}

double bilinear_sample_relative(const GrayImage& img, double x, double y, double reference) {
    check_coordinates(img, x, y);
    return detail::interpolate_relative(img, x, y, reference);
}

std::vector<std::pair<double, double>> ring_offsets(const NeighborhoodSpec& spec) {
    spec.validate();
    std::vector<std::pair<double, double>> offsets;
    offsets.reserve(static_cast<std::size_t>(spec.points));
    for (int p = 0; p < spec.points; ++p) {
        const double angle = spec.start_angle + 2.0 * std::numbers::pi * p / spec.points;
        offsets.emplace_back(snap(spec.radius * std::cos(angle)), snap(-spec.radius * std::sin(angle)));
    }
    return offsets;
}

std::vector<double> circular_neighbors(const GrayImage& img, int cx, int cy,
                                       const NeighborhoodSpec& spec) {
    check_center(img, cx, cy, spec);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spec.points));
    for (auto [dx, dy] : ring_offsets(spec)) out.push_back(detail::interpolate_relative(img, cx + dx, cy + dy, 0.0));
    return out;
}

std::vector<double> circular_differences(const GrayImage& img, int cx, int cy,
                                         const NeighborhoodSpec& spec) {
    check_center(img, cx, cy, spec);
    const double center = img.at(cx, cy);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spec.points));
    for (auto [dx, dy] : ring_offsets(spec)) out.push_back(detail::interpolate_relative(img, cx + dx, cy + dy, center));
    return out;
}

double lower_median(std::vector<double> values) {
    if (values.empty()) throw ParameterError("median of an empty set");
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

ImageStats global_stats(const GrayImage& img) {
    ImageStats stats;
    double sum = 0.0;
    for (double v : img.pixels()) sum += v;
    const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    stats.mean = std::clamp(sum / static_cast<double>(img.size()), *lo, *hi);
    stats.median = lower_median({img.pixels().begin(), img.pixels().end()});
    return stats;
}

}  // namespace texfuse
