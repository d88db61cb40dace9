#include <doctest.h>

#include "criteria.hpp"
#include "support.hpp"

#include "texfuse/error.hpp"
#include "texfuse/svm.hpp"

#include <cmath>
#include <random>

using namespace texfuse;
using namespace texfuse::testing;

namespace {

Matrix rows(std::initializer_list<std::vector<double>> r) {
    Matrix m(0, r.begin()->size());
    for (const auto& v : r) m.append_row(v);
    return m;
}

}  // namespace

TEST_CASE("svm acceptance checks") {
    const CheckResult r = check_svm();
    INFO(r.detail);
    CHECK(r.pass);
}

TEST_CASE("standardizer") {
    const Matrix x = rows({{1, 5}, {2, 5}, {3, 5}});
    const Standardizer s = standardize_fit(x);
    const Matrix z = standardize_apply(s, x);
    CHECK(z(0, 0) == doctest::Approx(-1.2247448714).epsilon(1e-9));
    CHECK(z(1, 0) == doctest::Approx(0.0));
    CHECK(z(2, 0) == doctest::Approx(1.2247448714).epsilon(1e-9));
    for (std::size_t i = 0; i < 3; ++i) CHECK(z(i, 1) == 0.0);
    std::mt19937_64 rng(50);
    std::normal_distribution<double> g(3.0, 7.0);
    Matrix big(40, 5);
    for (double& v : big.data) v = g(rng);
    const Matrix bz = standardize_apply(standardize_fit(big), big);
    for (std::size_t c = 0; c < 5; ++c) {
        double m = 0, v = 0;
        for (std::size_t r = 0; r < 40; ++r) m += bz(r, c);
        m /= 40;
        for (std::size_t r = 0; r < 40; ++r) v += (bz(r, c) - m) * (bz(r, c) - m);
        CHECK(std::abs(m) < 1e-9);
        CHECK(std::sqrt(v / 40) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(standardize_apply(s, Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(standardize_fit(Matrix(0, 3)), ParameterError);
}

TEST_CASE("two-point problem") {
    const Matrix x = rows({{1, 2}, {3, 6}});
    const int y[] = {1, -1};
    const SvmModel m = smo_train(x, y, 10.0, {KernelType::Linear});
    CHECK(m.support_vectors.rows == 2);
    CHECK(m.decision(std::vector<double>{2, 4}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    // The bisector is perpendicular to the segment: moving along (2,-1) keeps the value.
    CHECK(m.decision(std::vector<double>{4, 3}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(m.decision(std::vector<double>{1, 2}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.alphas[0] == doctest::Approx(m.alphas[1]));
}

TEST_CASE("planted hyperplane, linear kernel") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const double w[] = {1.5, -2.0};
    const double b = 0.5;
    Matrix x(0, 2);
    std::vector<int> y;
    while (x.rows < 40) {
        const std::vector<double> p{u(rng), u(rng)};
        const double f = w[0] * p[0] + w[1] * p[1] + b;
        if (std::abs(f) < 1.0) continue;
        x.append_row(p);
        y.push_back(f > 0 ? 1 : -1);
    }
    const SvmModel m = smo_train(x, y, 1000.0, {KernelType::Linear});
    CHECK(m.converged);
    // Recover w from the dual and compare directions.
    double mw[2] = {0, 0};
    for (std::size_t i = 0; i < m.support_vectors.rows; ++i) {
        for (int t = 0; t < 2; ++t) mw[t] += m.coefficients[i] * m.support_vectors(i, t);
    }
    for (std::size_t i = 0; i < 50; ++i) {
        const std::vector<double> p{u(rng), u(rng)};
        CHECK(m.decision(p) == doctest::Approx(mw[0] * p[0] + mw[1] * p[1] + m.bias).epsilon(1e-9));
    }
    const double cosang = (mw[0] * w[0] + mw[1] * w[1]) / (std::hypot(mw[0], mw[1]) * std::hypot(w[0], w[1]));
    CHECK(cosang > 0.95);
    for (std::size_t i = 0; i < x.rows; ++i) CHECK((m.decision(x.row(i)) > 0) == (y[i] > 0));
    double sum = 0.0;
    for (std::size_t i = 0; i < m.alphas.size(); ++i) {
        CHECK(m.alphas[i] >= -1e-8);
        CHECK(m.alphas[i] <= 1000.0 + 1e-8);
        sum += m.alphas[i] * m.labels[i];
    }
    CHECK(std::abs(sum) < 1e-6);
}

TEST_CASE("rbf decision decays to the bias far away") {
    const Matrix x = rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    const int y[] = {1, 1, -1, -1};
    const SvmModel m = smo_train(x, y, 10.0, {KernelType::Rbf, 1.0});
    CHECK(m.decision(std::vector<double>{100, -100}) == doctest::Approx(m.bias).epsilon(1e-12));
    CHECK_THROWS_AS(m.decision(std::vector<double>{1, 2, 3}), DimensionError);
}

TEST_CASE("smo_train errors") {
    const Matrix x = rows({{0, 0}, {1, 1}});
    const int same[] = {1, 1};
    CHECK_THROWS_AS(smo_train(x, same, 1.0, {}), ParameterError);
    const int bad[] = {1, 0};
    CHECK_THROWS_AS(smo_train(x, bad, 1.0, {}), ParameterError);
    const int ok[] = {1, -1};
    CHECK_THROWS_AS(smo_train(x, ok, 0.0, {}), ParameterError);
}

TEST_CASE("small separable sets agree with a brute-force hyperplane search") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix x(0, 2);
        std::vector<int> y;
        while (x.rows < 8) {
            const std::vector<double> p{u(rng), u(rng)};
            if (std::abs(p[0] + 0.3 * p[1]) < 0.2) continue;
            x.append_row(p);
            y.push_back(p[0] + 0.3 * p[1] > 0 ? 1 : -1);
        }
        if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0) continue;
        const SvmModel m = smo_train(x, y, 1e4, {KernelType::Linear});
        // Brute-force max-margin over directions and offsets.
        double best = -1;
        for (int a = 0; a < 3600; ++a) {
            const double th = a * M_PI / 1800;
            const double wx = std::cos(th), wy = std::sin(th);
            double lo = INFINITY, hi = -INFINITY;
            for (std::size_t i = 0; i < 8; ++i) {
                const double p = wx * x(i, 0) + wy * x(i, 1);
                if (y[i] > 0) lo = std::min(lo, p);
                else hi = std::max(hi, p);
            }
            best = std::max(best, (lo - hi) / 2);
        }
        double mw[2] = {0, 0};
        for (std::size_t i = 0; i < m.support_vectors.rows; ++i) {
            for (int t = 0; t < 2; ++t) mw[t] += m.coefficients[i] * m.support_vectors(i, t);
        }
        CHECK(1.0 / std::hypot(mw[0], mw[1]) == doctest::Approx(best).epsilon(0.01));
        for (std::size_t i = 0; i < 8; ++i) CHECK(y[i] * m.decision(x.row(i)) > 0);
    }
}

TEST_CASE("multiclass") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> g(0.0, 0.3);
    Matrix x(0, 3);
    std::vector<std::size_t> labels;
    for (int i = 0; i < 30; ++i) {
        const std::size_t c = i % 3;
        x.append_row(std::vector<double>{c * 3.0 + g(rng), g(rng) - c, g(rng)});
        labels.push_back(c);
    }
    const MulticlassSvmModel model = train_multiclass(x, labels, {"a", "b", "c"});
    CHECK(model.binary_models.size() == 3);
    CHECK(model.standardizer.dim() == 3);
    const ScoreMatrix s = score(model, x, "toy");
    CHECK(s.source_id == "toy");
    CHECK(s.predictions() == labels);

    SUBCASE("label permutation permutes columns") {
        // Relabel a<->c; scores swap columns.
        std::vector<std::size_t> perm(labels);
        for (auto& l : perm) l = 2 - l;
        const ScoreMatrix sp = score(train_multiclass(x, perm, {"c", "b", "a"}), x);
        for (std::size_t r = 0; r < x.rows; ++r) {
            for (std::size_t c = 0; c < 3; ++c) CHECK(sp.scores(r, 2 - c) == doctest::Approx(s.scores(r, c)).epsilon(1e-6));
        }
    }
    SUBCASE("logistic squashing keeps the argmax") {
        SvmParams p;
        p.logistic = true;
        const ScoreMatrix sl = score(train_multiclass(x, labels, {"a", "b", "c"}, p), x);
        for (double v : sl.scores.data) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
        CHECK(sl.predictions() == s.predictions());
    }
    SUBCASE("binary problems: argmax is the sign of the column difference") {
        Matrix xb(0, 3);
        std::vector<std::size_t> lb;
        for (std::size_t r = 0; r < x.rows; ++r) {
            if (labels[r] == 2) continue;
            xb.append_row(x.row(r));
            lb.push_back(labels[r]);
        }
        const ScoreMatrix sb = score(train_multiclass(xb, lb, {"a", "b"}), xb);
        const auto pred = sb.predictions();
        for (std::size_t r = 0; r < xb.rows; ++r) CHECK(pred[r] == (sb.scores(r, 1) > sb.scores(r, 0) ? 1u : 0u));
    }
    SUBCASE("save/load reproduces scores") {
        TempDir dir("svm");
        save_model(model, dir.path() / "m.txt");
        const ScoreMatrix again = score(load_model(dir.path() / "m.txt"), x);
        CHECK(again.scores == s.scores);
        CHECK(again.class_labels == s.class_labels);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(train_multiclass(x, labels, {"a", "b", "c", "d"}), ParameterError);
        CHECK_THROWS_AS(train_multiclass(x, labels, {"a"}), ParameterError);
        std::vector<std::size_t> short_labels(labels.begin(), labels.end() - 1);
        CHECK_THROWS_AS(train_multiclass(x, short_labels, {"a", "b", "c"}), DimensionError);
    }
}
