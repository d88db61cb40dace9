#include "texfuse/codebook.hpp"

#include "texfuse/descriptors.hpp"
#include "texfuse/error.hpp"
#include "numeric_io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace texfuse {

void PointSet::push_back(std::span<const double> point) {
    if (dim == 0) dim = point.size();
    if (point.size() != dim || dim == 0) throw DimensionError("point dimension mismatch");
    values.insert(values.end(), point.begin(), point.end());
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

struct WeightedPoints {
    PointSet points;
    std::vector<double> weights;
};

// Collapses identical rows; output order is lexicographic, hence deterministic.
WeightedPoints deduplicate(const PointSet& in) {
    std::vector<std::size_t> order(in.size());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
        const auto ra = in.row(a);
        const auto rb = in.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::stable_sort(order.begin(), order.end(), less);
    WeightedPoints out;
    out.points.dim = in.dim;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto row = in.row(order[i]);
        if (i > 0 && std::equal(row.begin(), row.end(), in.row(order[i - 1]).begin())) {
            out.weights.back() += 1.0;
        } else {
            out.points.push_back(row);
            out.weights.push_back(1.0);
        }
    }
    return out;
}

std::size_t nearest(std::span<const double> centroids, std::size_t k, std::size_t dim,
                    std::span<const double> v, double& best) {
    std::size_t arg = 0;
    best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
        const double d = squared_distance(centroids.subspan(j * dim, dim), v);
        if (d < best) {
            best = d;
            arg = j;
        }
    }
    return arg;
}

std::vector<double> kmeans_plus_plus(const WeightedPoints& wp, std::size_t k, detail::Rng& rng) {
    const std::size_t n = wp.points.size();
    const std::size_t dim = wp.points.dim;
    std::vector<double> centroids;
    centroids.reserve(k * dim);

    auto pick = [&](const std::vector<double>& mass) {
        const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
        double target = rng.uniform() * total;
        for (std::size_t i = 0; i < n; ++i) {
            if (mass[i] <= 0.0) continue;
            target -= mass[i];
            if (target < 0.0) return i;
        }
        // Round-off fallback: last point with positive mass.
        for (std::size_t i = n; i-- > 0;) {
            if (mass[i] > 0.0) return i;
        }
        return std::size_t{0};
    };

    std::size_t first = pick(wp.weights);
    auto r0 = wp.points.row(first);
    centroids.insert(centroids.end(), r0.begin(), r0.end());
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(wp.points.row(i), r0);

    std::vector<double> mass(n);
    while (centroids.size() < k * dim) {
        for (std::size_t i = 0; i < n; ++i) mass[i] = wp.weights[i] * dist[i];
        const std::size_t next = pick(mass);
        auto row = wp.points.row(next);
        centroids.insert(centroids.end(), row.begin(), row.end());
        for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], squared_distance(wp.points.row(i), row));
    }
    return centroids;
}

}  // namespace

Codebook kmeans_fit(const PointSet& points, std::size_t k, std::uint64_t seed, KMeansOptions opts) {
    if (k == 0) throw ParameterError("k-means needs k >= 1");
    if (points.dim == 0) throw ParameterError("k-means needs dim >= 1");
    if (points.size() < k) {
        throw ParameterError("k-means needs at least k=" + std::to_string(k) + " points, got " +
                             std::to_string(points.size()));
    }
    const WeightedPoints wp = deduplicate(points);
    const std::size_t n = wp.points.size();
    const std::size_t dim = points.dim;
    if (n < k) {
        throw ParameterError("k-means needs at least k=" + std::to_string(k) + " distinct points, got " +
                             std::to_string(n));
    }

    detail::Rng rng(seed);
    Codebook cb;
    cb.k = k;
    cb.dim = dim;
    cb.seed = seed;
    cb.centroids = kmeans_plus_plus(wp, k, rng);

    std::vector<std::size_t> labels(n, k);
    std::vector<std::size_t> next(n);
    std::vector<double> dist(n);
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = nearest(cb.centroids, k, dim, wp.points.row(i), dist[i]);
            inertia += wp.weights[i] * dist[i];
        }
        cb.inertia_trace.push_back(inertia);
        if (next == labels) {
            converged = true;
            break;
        }
        labels = next;

        std::vector<double> sums(k * dim, 0.0);
        std::vector<double> mass(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = wp.points.row(i);
            for (std::size_t d = 0; d < dim; ++d) sums[labels[i] * dim + d] += wp.weights[i] * row[d];
            mass[labels[i]] += wp.weights[i];
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (mass[j] > 0.0) {
                for (std::size_t d = 0; d < dim; ++d) cb.centroids[j * dim + d] = sums[j * dim + d] / mass[j];
                continue;
            }
            // Empty cluster: move it onto the point farthest from its centroid.
            const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            const auto row = wp.points.row(far);
            std::copy(row.begin(), row.end(), cb.centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
            dist[far] = 0.0;
        }
        ++cb.iterations;
    }
    if (!converged) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest(cb.centroids, k, dim, wp.points.row(i), dist[i]);
            inertia += wp.weights[i] * dist[i];
        }
        cb.inertia_trace.push_back(inertia);
    }
    cb.inertia = cb.inertia_trace.back();
    return cb;
}

std::size_t assign(const Codebook& cb, std::span<const double> v) {
    if (cb.k == 0) throw StateError("codebook is untrained");
    if (v.size() != cb.dim) {
        throw ParameterError("vector of dimension " + std::to_string(v.size()) + " does not match codebook dimension " +
                             std::to_string(cb.dim));
    }
    double best = 0.0;
    return nearest(cb.centroids, cb.k, cb.dim, v, best);
}

PointSet subsample(const PointSet& points, std::size_t cap, std::uint64_t seed) {
    if (points.size() <= cap) return points;
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    detail::Rng rng(seed);
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    PointSet out;
    out.dim = points.dim;
    out.values.reserve(cap * points.dim);
    for (std::size_t i : idx) out.push_back(points.row(i));
    return out;
}

std::vector<Codebook> build_sclbp_codebooks(std::span<const GrayImage> training, std::uint64_t seed, std::size_t k,
                                            std::size_t sample_cap) {
    if (training.empty()) throw ParameterError("scLBP codebooks need training images");
    std::vector<Codebook> books;
    const auto radii = sclbp_radii();
    for (std::size_t r = 0; r < radii.size(); ++r) {
        PointSet pool;
        pool.dim = kSclbpRawDim;
        for (const auto& img : training) {
            for (const auto& raw : sclbp_raw_vectors(img, radii[r])) pool.push_back(raw);
        }
        const std::uint64_t s = seed + r;
        books.push_back(kmeans_fit(subsample(pool, sample_cap, s), k, s));
    }
    return books;
}

Codebook build_jet_codebook(std::span<const GrayImage> training, std::size_t k, double sigma, std::uint64_t seed,
                            std::size_t sample_cap) {
    if (training.empty()) throw ParameterError("JET codebook needs training images");
    const FilterBank bank = dtg_bank(sigma);
    PointSet pool;
    pool.dim = kJetSize;
    for (const auto& img : training) {
        for (const auto& v : jet_vectors(img, bank)) pool.push_back(v);
    }
    return kmeans_fit(subsample(pool, sample_cap, seed), k, seed);
}

void save_codebooks(std::span<const Codebook> books, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write codebook cache '" + path.string() + "'");
    out << "texfuse-codebooks 1\n" << books.size() << '\n';
    for (const auto& cb : books) {
        out << cb.k << ' ' << cb.dim << ' ' << cb.seed << ' ' << cb.iterations << ' '
            << detail::format_double(cb.inertia) << '\n';
        for (std::size_t j = 0; j < cb.k; ++j) {
            for (std::size_t d = 0; d < cb.dim; ++d) {
                out << (d ? " " : "") << detail::format_double(cb.centroids[j * cb.dim + d]);
            }
            out << '\n';
        }
    }
    if (!out) throw Error("failed writing codebook cache '" + path.string() + "'");
}

std::vector<Codebook> load_codebooks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read codebook cache '" + path.string() + "'");
    std::string magic;
    int version = 0;
    std::size_t count = 0;
    if (!(in >> magic >> version >> count) || magic != "texfuse-codebooks" || version != 1) {
        throw Error("'" + path.string() + "' is not a codebook cache");
    }
    std::vector<Codebook> books(count);
    for (auto& cb : books) {
        std::string inertia;
        if (!(in >> cb.k >> cb.dim >> cb.seed >> cb.iterations >> inertia)) throw Error("truncated codebook cache");
        cb.inertia = detail::parse_double(inertia);
        cb.centroids.resize(cb.k * cb.dim);
        for (double& v : cb.centroids) {
            std::string tok;
            if (!(in >> tok)) throw Error("truncated codebook cache");
            v = detail::parse_double(tok);
        }
    }
    return books;
}

}  // namespace texfuse
