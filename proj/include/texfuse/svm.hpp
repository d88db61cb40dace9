#pragma once

#include "texfuse/matrix.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace texfuse {

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // population std, floored at 1e-12

    std::size_t dim() const noexcept { return mean.size(); }
};

Standardizer standardize_fit(const Matrix& x);
Matrix standardize_apply(const Standardizer& s, const Matrix& x);

enum class KernelType { Linear, Rbf };

struct KernelParams {
    KernelType type = KernelType::Rbf;
    double gamma = 1.0;

    double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct SmoOptions {
    /// Stop when the maximal KKT violation drops below this value.
    double tolerance = 1e-3;
    /// Iteration cap expressed in passes over the data (pair updates / n).
    long long max_passes = 10'000;
    /// Record the dual objective after every accepted update.
    bool trace_objective = false;
};

/// Binary soft-margin SVM: f(x) = sum_i coef_i k(sv_i, x) + bias, coef_i = alpha_i y_i.
struct SvmModel {
    Matrix support_vectors;
    std::vector<double> coefficients;
    std::vector<double> alphas;  // alpha_i of each support vector
    std::vector<int> labels;     // y_i of each support vector
    double bias = 0.0;
    KernelParams kernel;
    double c = 10.0;

    bool converged = true;
    long long iterations = 0;
    std::vector<double> objective_trace;

    double decision(std::span<const double> x) const;
};

/// Dense dual solution for every training sample; exposed so callers can check KKT.
struct SmoSolution {
    std::vector<double> alpha;
    double bias = 0.0;
    bool converged = true;
    long long iterations = 0;
    std::vector<double> objective_trace;
};

/// Solve the dual on a precomputed Gram matrix. y in {-1, +1}.
SmoSolution smo_solve(const Matrix& gram, std::span<const int> y, double c, const SmoOptions& opts = {});

SvmModel smo_train(const Matrix& x, std::span<const int> y, double c, const KernelParams& kernel,
                   const SmoOptions& opts = {});

double decision(const SvmModel& model, std::span<const double> x);

Matrix gram_matrix(const Matrix& x, const KernelParams& kernel);

struct SvmParams {
    KernelType kernel = KernelType::Rbf;
    /// <= 0 selects 1 / (dim * mean variance) of the standardized training set.
    double gamma = 0.0;
    double c = 10.0;
    /// Map scores through 1/(1+exp(-s)).
    bool logistic = false;
    SmoOptions smo;
};

/// Samples x classes scores; column order follows class_labels.
struct ScoreMatrix {
    Matrix scores;
    std::vector<std::string> class_labels;
    std::string source_id;

    std::size_t samples() const noexcept { return scores.rows; }
    std::size_t classes() const noexcept { return scores.cols; }
    /// Row argmax, ties to the lowest column.
    std::vector<std::size_t> predictions() const;
};

struct MulticlassSvmModel {
    std::vector<std::string> class_labels;
    std::vector<SvmModel> binary_models;
    Standardizer standardizer;
    bool logistic = false;
};

/// One-vs-all training on standardized features. labels[i] indexes class_labels.
MulticlassSvmModel train_multiclass(const Matrix& x, std::span<const std::size_t> labels,
                                    std::vector<std::string> class_labels, const SvmParams& params = {});

ScoreMatrix score(const MulticlassSvmModel& model, const Matrix& x, std::string source_id = {});

void save_model(const MulticlassSvmModel& model, const std::filesystem::path& path);
MulticlassSvmModel load_model(const std::filesystem::path& path);

}  // namespace texfuse
