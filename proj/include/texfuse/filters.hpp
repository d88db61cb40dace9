#pragma once

#include "texfuse/image.hpp"

#include <array>
#include <string>
#include <vector>

namespace texfuse {

/// Square convolution kernel, taps stored row-major. Row index is the y offset,
/// column index the x offset, both centered on size/2.
struct Kernel2D {
    int size = 1;
    std::vector<double> taps;

    Kernel2D() : taps{1.0} {}
    Kernel2D(int size, std::vector<double> taps);

    double at(int col, int row) const { return taps[static_cast<std::size_t>(row) * size + col]; }
    int half() const noexcept { return size / 2; }
    double sum() const;
    Kernel2D transposed() const;
    /// Copy with the mean tap subtracted, so the kernel sums to zero.
    Kernel2D without_dc() const;
};

enum class JetComponent { G = 0, Gx, Gy, Gxx, Gxy, Gyy };
inline constexpr int kJetSize = 6;

/// Gaussian derivative filters up to second order at one scale,
/// in the order G, G_x, G_y, G_xx, G_xy, G_yy.
struct FilterBank {
    double sigma = 1.0;
    std::array<std::string, kJetSize> labels{"G", "G_x", "G_y", "G_xx", "G_xy", "G_yy"};
    std::array<Kernel2D, kJetSize> kernels;

    const Kernel2D& operator[](JetComponent c) const { return kernels[static_cast<int>(c)]; }
};

/// 2*ceil(3*sigma)+1.
int default_kernel_size(double sigma);

/// Second derivatives of the 2-D Gaussian sampled at integer offsets:
///   G_xx = (x^2/sigma^2 - 1) exp(-(x^2+y^2)/(2 sigma^2)) / (2 pi sigma^4), G_yy likewise.
/// size == 0 selects default_kernel_size(sigma).
std::pair<Kernel2D, Kernel2D> gaussian_second_derivative_kernels(double sigma, int size = 0);

/// Same-size convolution (kernel flipped) with mirror reflection at the border
/// (-1 maps to 1, W maps to W-2).
GrayImage convolve(const GrayImage& img, const Kernel2D& kernel);

/// Second-derivative kernels used for filtering: the sampled second-derivative taps with the
/// truncation residue removed (zero sum, unit response to x^2/2), so constants
/// and ramps give no response. The pair is exactly transposed.
std::pair<Kernel2D, Kernel2D> hessian_kernels(double sigma, int size = 0);

/// sqrt(I_xx^2 + I_yy^2) using hessian_kernels.
GrayImage hessian_magnitude(const GrayImage& img, double sigma, int size = 0);

/// 3x3 Sobel gradient magnitude.
GrayImage gradient_magnitude(const GrayImage& img);

/// Jet filter bank. G has unit sum; derivative kernels are sampled Gaussian
/// derivatives rescaled to unit response on x, xy and x^2/2 (G_xx, G_yy from hessian_kernels).
FilterBank dtg_bank(double sigma, int size = 0);
std::array<GrayImage, kJetSize> apply_bank(const GrayImage& img, const FilterBank& bank);

}  // namespace texfuse
