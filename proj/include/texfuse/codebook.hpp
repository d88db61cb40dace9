#pragma once

#include "texfuse/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace texfuse {

/// Row-major point set.
struct PointSet {
    std::size_t dim = 0;
    std::vector<double> values;

    std::size_t size() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
    void push_back(std::span<const double> point);
};

struct Codebook {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> centroids;  // k x dim, row-major

    std::uint64_t seed = 0;
    int iterations = 0;
    double inertia = 0.0;
    /// Inertia after each Lloyd iteration (non-increasing).
    std::vector<double> inertia_trace;

    std::span<const double> centroid(std::size_t j) const { return {centroids.data() + j * dim, dim}; }
    bool operator==(const Codebook&) const = default;
};

struct KMeansOptions {
    int max_iterations = 300;
};

/// Lloyd's algorithm with k-means++ seeding. Identical points are merged with
/// multiplicities before clustering, which leaves the result unchanged.
/// Empty clusters are re-seeded to the point farthest from its centroid.
Codebook kmeans_fit(const PointSet& points, std::size_t k, std::uint64_t seed, KMeansOptions opts = {});

/// Nearest centroid by squared Euclidean distance; ties go to the lower index.
std::size_t assign(const Codebook& cb, std::span<const double> v);

/// Uniform subsample without replacement (order preserved), fixed seed.
PointSet subsample(const PointSet& points, std::size_t cap, std::uint64_t seed);

inline constexpr std::size_t kCodebookSampleCap = 100'000;

/// One K=255 codebook per scLBP radius, fitted on the given (training) images.
std::vector<Codebook> build_sclbp_codebooks(std::span<const GrayImage> training, std::uint64_t seed,
                                            std::size_t k = 255,
                                            std::size_t sample_cap = kCodebookSampleCap);

Codebook build_jet_codebook(std::span<const GrayImage> training, std::size_t k, double sigma,
                            std::uint64_t seed, std::size_t sample_cap = kCodebookSampleCap);

void save_codebooks(std::span<const Codebook> books, const std::filesystem::path& path);
std::vector<Codebook> load_codebooks(const std::filesystem::path& path);

}  // namespace texfuse
