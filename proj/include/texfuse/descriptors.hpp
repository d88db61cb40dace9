#pragma once

#include "texfuse/codebook.hpp"
#include "texfuse/filters.hpp"
#include "texfuse/image.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace texfuse {

struct FeatureVector {
    std::string descriptor_id;
    std::vector<double> values;

    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const FeatureVector&) const = default;
};

/// Sign quantizer: 1 for z >= 0, 0 otherwise.
constexpr int q(double z) noexcept { return z >= 0.0 ? 1 : 0; }

/// Ternary LTP response: 1 for x >= tau, -1 for x < -tau, 0 in between.
constexpr int ternary(double x, double tau) noexcept { return x >= tau ? 1 : (x < -tau ? -1 : 0); }

/// Quinary MQC response in {2, 1, 0, -1, -2}.
constexpr int quinary(double x, double tau, double theta) noexcept {
    if (x >= tau) return 2;
    if (x >= theta) return 1;
    if (x >= 0.0) return 0;
    if (x >= -theta) return -1;
    return -2;
}

// ---------------------------------------------------------------------------
// LBP family

FeatureVector lbp(const GrayImage& img, const NeighborhoodSpec& spec);

/// Upper and lower LTP patterns, each histogram L1-normalized. 2 * 2^P bins.
FeatureVector ltp(const GrayImage& img, const NeighborhoodSpec& spec, double tau);

/// Four binary maps (label == 2, 1, -1, -2) of the quinary code. 4 * 2^P bins.
/// Requires 0 < theta < tau.
FeatureVector mqc(const GrayImage& img, const NeighborhoodSpec& spec, double tau, double theta);

/// Eight samples on the line through the center at angle `degrees`
/// (offsets -4..-1, 1..4, ordered from -4 to +4). Angles are multiples of 45
/// and are taken modulo 180, so 0 and 180 describe the same line.
FeatureVector alpha_lbp(const GrayImage& img, double degrees);
/// Concatenation over an angle set (default 0, 45, 90, 135).
FeatureVector alpha_lbp(const GrayImage& img, std::span<const double> degrees);

/// Adaptive-threshold LTP (tau = k * std of the 3x3 neighborhood at each center)
/// followed by a plain LBP histogram at radius 3, P = 8.
FeatureVector ahp(const GrayImage& img, const NeighborhoodSpec& spec, double k = 0.5);

// ---------------------------------------------------------------------------
// Discriminative LBP

inline constexpr double kDlbpSmoothing = 0.01 * 0.01;

struct DlbpPatchResult {
    /// Midpoint between the last value of the lower group and the first value of
    /// the upper group; equals the patch value for constant patches.
    double tau_star = 0.0;
    double sigma_b2 = 0.0;
    double sigma2 = 0.0;
    double weight = 0.0;
    double smoothing = kDlbpSmoothing;
};

/// Optimal split of a patch (center followed by its neighbors) minimizing the
/// within-group residual, and the resulting patch weight.
DlbpPatchResult dlbp_patch(std::span<const double> patch);

/// Weighted LBP histogram: each center votes its patch weight into the code of
/// q(neighbor - tau_star). All-zero weight yields the uniform distribution.
FeatureVector dlbp(const GrayImage& img, const NeighborhoodSpec& spec);
FeatureVector dlbp(const GrayImage& img, std::span<const NeighborhoodSpec> specs);

// ---------------------------------------------------------------------------
// Center-symmetric patterns

enum class ArcsSource { Raw, Hessian, Gradient };

struct ArcslbpConfig {
    std::vector<NeighborhoodSpec> specs{{1.0, 8}, {2.0, 8}, {3.0, 8}};
    ArcsSource source = ArcsSource::Raw;
    /// Hessian scales, concatenated; used only for ArcsSource::Hessian.
    std::vector<double> sigmas{1.0};
};

/// Attractive and repulsive center-symmetric codes on a prepared image
/// (no source transform). 2 * 2^(P/2 + 3) bins.
FeatureVector arcslbp_single(const GrayImage& img, const NeighborhoodSpec& spec);
FeatureVector arcslbp(const GrayImage& img, const ArcslbpConfig& cfg);
std::size_t arcslbp_dim(const ArcslbpConfig& cfg);

/// Ten-bit concave micro-structure code. 1024 bins.
FeatureVector lcvmsp(const GrayImage& img);

// ---------------------------------------------------------------------------
// Sorted consecutive LBP

enum class RunComponent { S, MPlus, MMinus, C };

struct RunCode {
    std::vector<int> ones_runs;
    std::vector<int> zeros_runs;
    RunComponent component = RunComponent::S;

    bool operator==(const RunCode&) const = default;
};

/// Linear run lengths of 1s and of 0s, each sorted descending and zero-padded
/// to ceil(P/2) entries.
RunCode sclbp_encode(std::span<const int> bits, RunComponent tag = RunComponent::S);

/// Sixteen radii 1.0, 1.2, ..., 4.0.
std::vector<double> sclbp_radii();
inline constexpr int kSclbpPoints = 8;
/// Raw vector length: three RunCodes of 2*ceil(P/2) plus the center bit.
inline constexpr int kSclbpRawDim = 3 * kSclbpPoints + 1;

/// Raw scLBP vectors for every interior pixel at one radius.
std::vector<std::vector<double>> sclbp_raw_vectors(const GrayImage& img, double radius);

/// Histogram of nearest-centroid assignments pooled over all radii, one codebook
/// per radius, L1-normalized; dim equals the codebook size.
FeatureVector sclbp(const GrayImage& img, std::span<const Codebook> codebooks);

// ---------------------------------------------------------------------------
// Jet textons

/// Per-pixel 6-d responses of the jet bank, row-major pixel order.
std::vector<std::array<double, kJetSize>> jet_vectors(const GrayImage& img, const FilterBank& bank);
FeatureVector jet(const GrayImage& img, const Codebook& codebook, const FilterBank& bank);

// ---------------------------------------------------------------------------
// Heterogeneous auto-similarities

inline constexpr int kHascMaps = 6;
inline constexpr int kHascBins = 16;
inline constexpr int kHascPatchDim = 42;

struct HascGrid {
    int cols = 2;
    int rows = 2;
};

/// Dense maps over the whole image: intensity, |I_x|, |I_y|, gradient
/// magnitude, |I_xx|, |I_yy| (central differences, mirrored border).
std::array<GrayImage, kHascMaps> hasc_maps(const GrayImage& img);

/// COV (21 upper-triangle entries, population covariance) followed by EMI
/// (entropies on the diagonal, mutual information off it, 16-bin histograms,
/// base-2 logarithms) for one patch of equally sized maps.
std::vector<double> hasc_patch(std::span<const std::vector<double>> maps);

FeatureVector hasc(const GrayImage& img, HascGrid grid = {});

}  // namespace texfuse
