#include <doctest.h>

#include "support.hpp"

#include "texfuse/codebook.hpp"
#include "texfuse/error.hpp"

#include <fstream>
#include <random>

#include "texfuse/descriptors.hpp"

using namespace texfuse;
using namespace texfuse::testing;

namespace {

PointSet random_points(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    PointSet ps{dim, {}};
    std::vector<double> p(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : p) v = g(rng) + (i % 3) * 4.0;
        ps.push_back(p);
    }
    return ps;
}

std::size_t scan(const Codebook& cb, std::span<const double> v) {
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t j = 0; j < cb.k; ++j) {
        double d = 0;
        for (std::size_t t = 0; t < cb.dim; ++t) d += (v[t] - cb.centroid(j)[t]) * (v[t] - cb.centroid(j)[t]);
        if (d < bd) bd = d, best = j;
    }
    return best;
}

}  // namespace

TEST_CASE("kmeans_fit") {
    std::mt19937_64 rng(40);
    SUBCASE("K=1 gives the mean and the scatter") {
        const PointSet ps = random_points(30, 3, rng);
        const Codebook cb = kmeans_fit(ps, 1, 7);
        double scatter = 0.0;
        for (std::size_t t = 0; t < 3; ++t) {
            double m = 0;
            for (std::size_t i = 0; i < ps.size(); ++i) m += ps.row(i)[t];
            m /= ps.size();
            CHECK(cb.centroids[t] == doctest::Approx(m).epsilon(1e-12));
            for (std::size_t i = 0; i < ps.size(); ++i) scatter += (ps.row(i)[t] - m) * (ps.row(i)[t] - m);
        }
        CHECK(cb.inertia == doctest::Approx(scatter).epsilon(1e-10));
    }
    SUBCASE("K=N distinct points") {
        const PointSet ps = random_points(6, 2, rng);
        const Codebook cb = kmeans_fit(ps, 6, 1);
        CHECK(cb.inertia == doctest::Approx(0.0));
        for (std::size_t i = 0; i < 6; ++i) {
            const std::size_t j = assign(cb, ps.row(i));
            CHECK(cb.centroid(j)[0] == ps.row(i)[0]);
            CHECK(cb.centroid(j)[1] == ps.row(i)[1]);
        }
    }
    SUBCASE("N=20, K=3: monotone inertia and a stable assignment") {
        const PointSet ps = random_points(20, 2, rng);
        const Codebook cb = kmeans_fit(ps, 3, 99);
        REQUIRE(!cb.inertia_trace.empty());
        for (std::size_t i = 1; i < cb.inertia_trace.size(); ++i) {
            CHECK(cb.inertia_trace[i] <= cb.inertia_trace[i - 1] + 1e-9);
        }
        CHECK(cb.inertia <= cb.inertia_trace.front() + 1e-9);
        double total = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::size_t j = assign(cb, ps.row(i));
            CHECK(j == scan(cb, ps.row(i)));
            for (std::size_t t = 0; t < 2; ++t) total += (ps.row(i)[t] - cb.centroid(j)[t]) * (ps.row(i)[t] - cb.centroid(j)[t]);
        }
        CHECK(total == doctest::Approx(cb.inertia).epsilon(1e-10));
        // Converged centroids are the means of their clusters.
        for (std::size_t j = 0; j < 3; ++j) {
            double sx = 0, sy = 0, n = 0;
            for (std::size_t i = 0; i < ps.size(); ++i) {
                if (assign(cb, ps.row(i)) == j) sx += ps.row(i)[0], sy += ps.row(i)[1], n += 1;
            }
            REQUIRE(n > 0);
            CHECK(cb.centroid(j)[0] == doctest::Approx(sx / n).epsilon(1e-10));
            CHECK(cb.centroid(j)[1] == doctest::Approx(sy / n).epsilon(1e-10));
        }
    }
    SUBCASE("determinism") {
        const PointSet ps = random_points(50, 4, rng);
        CHECK(kmeans_fit(ps, 5, 3) == kmeans_fit(ps, 5, 3));
    }
    SUBCASE("errors") {
        const PointSet ps = random_points(4, 2, rng);
        CHECK_THROWS_AS(kmeans_fit(ps, 5, 0), ParameterError);
        CHECK_THROWS_AS(kmeans_fit(ps, 0, 0), ParameterError);
        PointSet dup{1, {1.0, 1.0, 1.0}};
        CHECK_THROWS_AS(kmeans_fit(dup, 2, 0), ParameterError);
    }
}

TEST_CASE("assign") {
    Codebook cb;
    cb.k = 3;
    cb.dim = 2;
    cb.centroids = {0, 0, 2, 0, 5, 5};
    CHECK(assign(cb, std::vector<double>{2, 0}) == 1);
    CHECK(assign(cb, std::vector<double>{1, 0}) == 0);  // equidistant from 0 and 1
    CHECK(assign(cb, std::vector<double>{4, 4}) == 2);
    CHECK_THROWS_AS(assign(cb, std::vector<double>{1, 0, 0}), ParameterError);
    CHECK_THROWS_AS(assign(Codebook{}, std::vector<double>{1, 0}), StateError);
    std::mt19937_64 rng(41);
    const PointSet centroids = random_points(12, 5, rng);
    Codebook rb{12, 5, centroids.values};
    const PointSet probes = random_points(200, 5, rng);
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(assign(rb, probes.row(i)) == scan(rb, probes.row(i)));
}

TEST_CASE("subsample") {
    std::mt19937_64 rng(42);
    const PointSet ps = random_points(100, 2, rng);
    CHECK(subsample(ps, 200, 1).values == ps.values);
    const PointSet s = subsample(ps, 10, 1);
    CHECK(s.size() == 10);
    CHECK(s.values == subsample(ps, 10, 1).values);
}

TEST_CASE("codebook builders") {
    std::mt19937_64 rng(43);
    std::vector<GrayImage> train{random_image(16, 16, rng), random_image(16, 16, rng)};
    SUBCASE("scLBP: one codebook per radius, deterministic") {
        const auto a = build_sclbp_codebooks(train, 11, 8);
        CHECK(a.size() == 16);
        for (const auto& cb : a) {
            CHECK(cb.k == 8);
            CHECK(cb.dim == static_cast<std::size_t>(25));
        }
        CHECK(a == build_sclbp_codebooks(train, 11, 8));
    }
    SUBCASE("JET: K=1 is the mean jet vector") {
        const Codebook cb = build_jet_codebook(train, 1, 1.0, 2);
        CHECK(cb.dim == 6);
        std::array<double, 6> mean{};
        double n = 0;
        const FilterBank bank = dtg_bank(1.0);
        for (const auto& img : train) {
            for (const auto& v : jet_vectors(img, bank)) {
                for (int t = 0; t < 6; ++t) mean[t] += v[t];
                n += 1;
            }
        }
        for (int t = 0; t < 6; ++t) CHECK(cb.centroids[t] == doctest::Approx(mean[t] / n).epsilon(1e-9));
    }
    SUBCASE("JET: two textures, two centroids") {
        // A flat image and a high-contrast checkerboard have disjoint jet populations.
        std::vector<double> px(256);
        for (int i = 0; i < 256; ++i) px[i] = ((i % 16 + i / 16) % 2) ? 255.0 : 0.0;
        const GrayImage checker(16, 16, px);
        const GrayImage flat = GrayImage::filled(16, 16, 128.0);
        const Codebook cb = build_jet_codebook(std::vector<GrayImage>{flat, checker}, 2, 1.0, 4);
        const FilterBank bank = dtg_bank(1.0);
        const std::size_t flat_bin = assign(cb, jet_vectors(flat, bank).front());
        const auto cv = jet_vectors(checker, bank);
        CHECK(assign(cb, cv[8 * 16 + 8]) != flat_bin);
    }
    CHECK_THROWS_AS(build_jet_codebook({}, 2, 1.0, 0), ParameterError);
}

TEST_CASE("codebook save/load round trip is exact") {
    TempDir dir("cb");
    std::mt19937_64 rng(44);
    const PointSet ps = random_points(40, 3, rng);
    const std::vector<Codebook> books{kmeans_fit(ps, 4, 1), kmeans_fit(ps, 2, 2)};
    save_codebooks(books, dir.path() / "b.txt");
    const auto back = load_codebooks(dir.path() / "b.txt");
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].k == books[i].k);
        CHECK(back[i].seed == books[i].seed);
        CHECK(back[i].iterations == books[i].iterations);
        CHECK(back[i].inertia == books[i].inertia);
        CHECK(back[i].centroids == books[i].centroids);
    }
    std::ofstream(dir.path() / "bad.txt") << "nonsense";
    CHECK_THROWS_AS(load_codebooks(dir.path() / "bad.txt"), Error);
}
