#include "texfuse/filters.hpp"

#include "texfuse/error.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace texfuse {

Kernel2D::Kernel2D(int size_, std::vector<double> taps_) : size(size_), taps(std::move(taps_)) {
    if (size < 1 || size % 2 == 0) throw ParameterError("kernel size must be odd and positive");
    if (taps.size() != static_cast<std::size_t>(size) * size) {
        throw DimensionError("kernel tap count does not match size*size");
    }
    for (double t : taps) {
        if (!std::isfinite(t)) throw ParameterError("kernel tap is not finite");
    }
}

double Kernel2D::sum() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

Kernel2D Kernel2D::transposed() const {
    std::vector<double> out(taps.size());
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) out[static_cast<std::size_t>(c) * size + r] = at(c, r);
    }
    return Kernel2D(size, std::move(out));
}

Kernel2D Kernel2D::without_dc() const {
    const double mean = sum() / static_cast<double>(taps.size());
    std::vector<double> out(taps);
    for (double& t : out) t -= mean;
    return Kernel2D(size, std::move(out));
}

int default_kernel_size(double sigma) { return 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1; }

namespace {

void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
}

int resolve_size(double sigma, int size) {
    check_sigma(sigma);
    if (size == 0) return default_kernel_size(sigma);
    if (size < 3 || size % 2 == 0) throw ParameterError("kernel size must be odd and >= 3");
    return size;
}

template <typename F>
Kernel2D sample_kernel(int size, F&& f) {
    const int h = size / 2;
    std::vector<double> taps(static_cast<std::size_t>(size) * size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            taps[static_cast<std::size_t>(r) * size + c] = f(static_cast<double>(c - h), static_cast<double>(r - h));
        }
    }
    return Kernel2D(size, std::move(taps));
}

Kernel2D normalized_gaussian(double sigma, int size) {
    const double s2 = sigma * sigma;
    Kernel2D g = sample_kernel(size, [&](double x, double y) { return std::exp(-(x * x + y * y) / (2.0 * s2)); });
    const double total = g.sum();
    for (double& t : g.taps) t /= total;
    return g;
}

// sum over taps of w(x, y) * k(x, y)
template <typename W>
double moment(const Kernel2D& k, W&& w) {
    const int h = k.half();
    double m = 0.0;
    for (int r = 0; r < k.size; ++r) {
        for (int c = 0; c < k.size; ++c) m += w(static_cast<double>(c - h), static_cast<double>(r - h)) * k.at(c, r);
    }
    return m;
}

Kernel2D scaled(Kernel2D k, double factor) {
    for (double& t : k.taps) t *= factor;
    return k;
}

// Removes the truncated kernel's DC as a multiple of the Gaussian and rescales
// so the kernel returns exactly 1 on the matching monomial (x^2/2 or y^2/2).
template <typename W>
Kernel2D second_derivative_corrected(const Kernel2D& raw, const Kernel2D& gauss, W&& w) {
    const double ratio = raw.sum() / gauss.sum();
    std::vector<double> taps(raw.taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i) taps[i] = raw.taps[i] - ratio * gauss.taps[i];
    Kernel2D k(raw.size, std::move(taps));
    return scaled(std::move(k), 1.0 / moment(k, w));
}

int reflect(int i, int n) {
    // Reflect-101; a single fold suffices because kernels never exceed the image.
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

}  // namespace

std::pair<Kernel2D, Kernel2D> gaussian_second_derivative_kernels(double sigma, int size) {
    size = resolve_size(sigma, size);
    const double s2 = sigma * sigma;
    const double norm = 1.0 / (2.0 * std::numbers::pi * s2 * s2);
    Kernel2D gxx = sample_kernel(size, [&](double x, double y) {
        return norm * (x * x / s2 - 1.0) * std::exp(-(x * x + y * y) / (2.0 * s2));
    });
    Kernel2D gyy = sample_kernel(size, [&](double x, double y) {
        return norm * (y * y / s2 - 1.0) * std::exp(-(x * x + y * y) / (2.0 * s2));
    });
    return {std::move(gxx), std::move(gyy)};
}

GrayImage convolve(const GrayImage& img, const Kernel2D& kernel) {
    if (kernel.size > img.width() || kernel.size > img.height()) {
        throw DimensionError("kernel of size " + std::to_string(kernel.size) +
                             " is larger than the image");
    }
    const int w = img.width();
    const int h = img.height();
    const int half = kernel.half();
    std::vector<double> out(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int r = 0; r < kernel.size; ++r) {
                const int sy = reflect(y - (r - half), h);
                for (int c = 0; c < kernel.size; ++c) {
                    acc += kernel.at(c, r) * img.at(reflect(x - (c - half), w), sy);
                }
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return GrayImage(w, h, std::move(out));
}

GrayImage hessian_magnitude(const GrayImage& img, double sigma, int size) {
    auto [gxx, gyy] = hessian_kernels(sigma, size);
    const GrayImage ixx = convolve(img, gxx);
    const GrayImage iyy = convolve(img, gyy);
    std::vector<double> mag(img.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::hypot(ixx.pixels()[i], iyy.pixels()[i]);
    return GrayImage(img.width(), img.height(), std::move(mag));
}

GrayImage gradient_magnitude(const GrayImage& img) {
    const Kernel2D sobel_x(3, {-1, 0, 1, -2, 0, 2, -1, 0, 1});
    const GrayImage gx = convolve(img, sobel_x);
    const GrayImage gy = convolve(img, sobel_x.transposed());
    std::vector<double> mag(img.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::hypot(gx.pixels()[i], gy.pixels()[i]);
    return GrayImage(img.width(), img.height(), std::move(mag));
}

std::pair<Kernel2D, Kernel2D> hessian_kernels(double sigma, int size) {
    size = resolve_size(sigma, size);
    const auto [gxx, gyy] = gaussian_second_derivative_kernels(sigma, size);
    const Kernel2D gauss = normalized_gaussian(sigma, size);
    Kernel2D kxx = second_derivative_corrected(gxx, gauss, [](double x, double) { return 0.5 * x * x; });
    // Transposing keeps the pair exactly symmetric.
    Kernel2D kyy = kxx.transposed();
    return {std::move(kxx), std::move(kyy)};
}

FilterBank dtg_bank(double sigma, int size) {
    size = resolve_size(sigma, size);
    const double s2 = sigma * sigma;
    auto g = [&](double x, double y) { return std::exp(-(x * x + y * y) / (2.0 * s2)); };
    FilterBank bank;
    bank.sigma = sigma;
    bank.kernels[0] = normalized_gaussian(sigma, size);
    Kernel2D gx = sample_kernel(size, [&](double x, double y) { return -x * g(x, y); });
    gx = scaled(gx, -1.0 / moment(gx, [](double x, double) { return x; }));
    Kernel2D gxy = sample_kernel(size, [&](double x, double y) { return x * y * g(x, y); });
    gxy = scaled(gxy, 1.0 / moment(gxy, [](double x, double y) { return x * y; }));
    auto [gxx, gyy] = hessian_kernels(sigma, size);
    bank.kernels[1] = gx;
    bank.kernels[2] = gx.transposed();
    bank.kernels[3] = std::move(gxx);
    bank.kernels[4] = std::move(gxy);
    bank.kernels[5] = std::move(gyy);
    return bank;
}

std::array<GrayImage, kJetSize> apply_bank(const GrayImage& img, const FilterBank& bank) {
    return {convolve(img, bank.kernels[0]), convolve(img, bank.kernels[1]), convolve(img, bank.kernels[2]),
            convolve(img, bank.kernels[3]), convolve(img, bank.kernels[4]), convolve(img, bank.kernels[5])};
}

}  // namespace texfuse
