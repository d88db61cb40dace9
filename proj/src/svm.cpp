#include "texfuse/svm.hpp"

#include "texfuse/error.hpp"
#include "numeric_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

namespace texfuse {

void Matrix::append_row(std::span<const double> values) {
    if (rows == 0 && cols == 0) cols = values.size();
    if (values.size() != cols) throw DimensionError("row length does not match matrix width");
    data.insert(data.end(), values.begin(), values.end());
    ++rows;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Standardizer standardize_fit(const Matrix& x) {
    if (x.rows == 0) throw ParameterError("cannot standardize an empty matrix");
    Standardizer s;
    s.mean.assign(x.cols, 0.0);
    s.stddev.assign(x.cols, 0.0);
    const double n = static_cast<double>(x.rows);
    for (std::size_t c = 0; c < x.cols; ++c) {
        double lo = x(0, c);
        double hi = x(0, c);
        double sum = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) {
            sum += x(r, c);
            lo = std::min(lo, x(r, c));
            hi = std::max(hi, x(r, c));
        }
        if (lo == hi) {
            // Constant column: exact mean so the column maps to exact zeros.
            s.mean[c] = lo;
            s.stddev[c] = 1e-12;
            continue;
        }
        s.mean[c] = sum / n;
        double ss = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) ss += (x(r, c) - s.mean[c]) * (x(r, c) - s.mean[c]);
        s.stddev[c] = std::max(std::sqrt(ss / n), 1e-12);
    }
    return s;
}

Matrix standardize_apply(const Standardizer& s, const Matrix& x) {
    if (x.cols != s.dim()) {
        throw DimensionError("standardizer expects " + std::to_string(s.dim()) + " features, got " +
                             std::to_string(x.cols));
    }
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) out(r, c) = (x(r, c) - s.mean[c]) / s.stddev[c];
    }
    return out;
}

double KernelParams::operator()(std::span<const double> a, std::span<const double> b) const {
    if (type == KernelType::Linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
        return dot;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

Matrix gram_matrix(const Matrix& x, const KernelParams& kernel) {
    const std::size_t n = x.rows;
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel(x.row(i), x.row(j));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

namespace {

constexpr double kTau = 1e-12;

double dual_objective(std::span<const double> alpha, std::span<const double> grad) {
    // f = 1/2 a'Qa - e'a = 1/2 sum a_i (G_i - 1); dual objective is -f.
    double f = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) f += alpha[i] * (grad[i] - 1.0);
    return -0.5 * f;
}

}  // namespace

SmoSolution smo_solve(const Matrix& gram, std::span<const int> y, double c, const SmoOptions& opts) {
    const std::size_t n = y.size();
    if (gram.rows != n || gram.cols != n) throw DimensionError("Gram matrix does not match label count");
    if (!(c > 0.0)) throw ParameterError("SVM box constraint C must be positive");
    bool has_pos = false;
    bool has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw ParameterError("SVM labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw ParameterError("SVM training needs samples of both classes");

    SmoSolution sol;
    std::vector<double>& alpha = sol.alpha;
    alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto qij = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * gram(i, j); };
    auto is_upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto is_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    const long long max_iter = std::max<long long>(opts.max_passes * static_cast<long long>(n), 1);
    sol.converged = false;
    while (sol.iterations < max_iter) {
        // Maximal violating pair.
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool up = y[t] == 1 ? !is_upper(t) : !is_lower(t);
            const bool low = y[t] == 1 ? !is_lower(t) : !is_upper(t);
            if (up && v > gmax) {
                gmax = v;
                i = t;
            }
            if (low && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin < opts.tolerance) {
            sol.converged = true;
            break;
        }

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        const double kii = gram(i, i);
        const double kjj = gram(j, j);
        const double kij = gram(i, j);
        if (y[i] != y[j]) {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }
        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += qij(t, i) * di + qij(t, j) * dj;
        ++sol.iterations;
        if (opts.trace_objective) sol.objective_trace.push_back(dual_objective(alpha, grad));
    }

    // Bias: average over free vectors, otherwise the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (is_upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (is_lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
    sol.bias = -rho;
    return sol;
}

namespace {

SvmModel model_from_solution(const Matrix& x, std::span<const int> y, const SmoSolution& sol, double c,
                             const KernelParams& kernel) {
    SvmModel m;
    m.kernel = kernel;
    m.c = c;
    m.bias = sol.bias;
    m.converged = sol.converged;
    m.iterations = sol.iterations;
    m.objective_trace = sol.objective_trace;
    m.support_vectors.cols = x.cols;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (sol.alpha[i] <= 0.0) continue;
        m.support_vectors.append_row(x.row(i));
        m.alphas.push_back(sol.alpha[i]);
        m.labels.push_back(y[i]);
        m.coefficients.push_back(sol.alpha[i] * y[i]);
    }
    if (!sol.converged) {
        std::clog << "texfuse: warning: SMO stopped at the iteration cap (" << sol.iterations
                  << " updates) before reaching the KKT tolerance\n";
    }
    return m;
}

}  // namespace

SvmModel smo_train(const Matrix& x, std::span<const int> y, double c, const KernelParams& kernel,
                   const SmoOptions& opts) {
    if (x.rows != y.size()) throw DimensionError("feature rows do not match label count");
    for (double v : x.data) {
        if (!std::isfinite(v)) throw ParameterError("SVM features must be finite");
    }
    return model_from_solution(x, y, smo_solve(gram_matrix(x, kernel), y, c, opts), c, kernel);
}

double SvmModel::decision(std::span<const double> x) const {
    if (x.size() != support_vectors.cols) {
        throw DimensionError("SVM expects " + std::to_string(support_vectors.cols) + " features, got " +
                             std::to_string(x.size()));
    }
    double f = bias;
    for (std::size_t i = 0; i < coefficients.size(); ++i) f += coefficients[i] * kernel(support_vectors.row(i), x);
    return f;
}

double decision(const SvmModel& model, std::span<const double> x) { return model.decision(x); }

std::vector<std::size_t> ScoreMatrix::predictions() const {
    std::vector<std::size_t> out(scores.rows, 0);
    for (std::size_t r = 0; r < scores.rows; ++r) {
        const auto row = scores.row(r);
        out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

MulticlassSvmModel train_multiclass(const Matrix& x, std::span<const std::size_t> labels,
                                    std::vector<std::string> class_labels, const SvmParams& params) {
    if (class_labels.size() < 2) throw ParameterError("multiclass SVM needs at least two classes");
    if (x.rows != labels.size()) throw DimensionError("feature rows do not match label count");
    std::vector<std::size_t> counts(class_labels.size(), 0);
    for (std::size_t l : labels) {
        if (l >= class_labels.size()) throw ParameterError("label index out of range");
        ++counts[l];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) throw ParameterError("class '" + class_labels[c] + "' has no training samples");
    }
    for (double v : x.data) {
        if (!std::isfinite(v)) throw ParameterError("SVM features must be finite");
    }

    MulticlassSvmModel model;
    model.class_labels = std::move(class_labels);
    model.logistic = params.logistic;
    model.standardizer = standardize_fit(x);
    const Matrix xs = standardize_apply(model.standardizer, x);

    KernelParams kernel{params.kernel, params.gamma};
    if (params.kernel == KernelType::Rbf && !(params.gamma > 0.0)) {
        double mean_var = 0.0;
        for (std::size_t c = 0; c < xs.cols; ++c) {
            double m = 0.0;
            for (std::size_t r = 0; r < xs.rows; ++r) m += xs(r, c);
            m /= static_cast<double>(xs.rows);
            double v = 0.0;
            for (std::size_t r = 0; r < xs.rows; ++r) v += (xs(r, c) - m) * (xs(r, c) - m);
            mean_var += v / static_cast<double>(xs.rows);
        }
        mean_var /= static_cast<double>(xs.cols);
        kernel.gamma = 1.0 / (static_cast<double>(xs.cols) * (mean_var > 0.0 ? mean_var : 1.0));
    }
    const Matrix gram = gram_matrix(xs, kernel);
    for (std::size_t c = 0; c < model.class_labels.size(); ++c) {
        std::vector<int> y(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == c ? 1 : -1;
        model.binary_models.push_back(model_from_solution(xs, y, smo_solve(gram, y, params.c, params.smo), params.c, kernel));
    }
    return model;
}

ScoreMatrix score(const MulticlassSvmModel& model, const Matrix& x, std::string source_id) {
    const Matrix xs = standardize_apply(model.standardizer, x);
    ScoreMatrix out;
    out.class_labels = model.class_labels;
    out.source_id = std::move(source_id);
    out.scores = Matrix(x.rows, model.binary_models.size());
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < model.binary_models.size(); ++c) {
            const double s = model.binary_models[c].decision(xs.row(r));
            out.scores(r, c) = model.logistic ? 1.0 / (1.0 + std::exp(-s)) : s;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization: line-oriented text, doubles in shortest round-trip form.

namespace {

void write_row(std::ostream& out, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << detail::format_double(values[i]);
    out << '\n';
}

double read_double(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw Error("truncated SVM model file");
    return detail::parse_double(tok);
}

template <typename T>
T read_value(std::istream& in, const char* what) {
    T v{};
    if (!(in >> v)) throw Error(std::string("SVM model file: cannot read ") + what);
    return v;
}

void expect(std::istream& in, const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) throw Error("SVM model file: expected '" + word + "', got '" + tok + "'");
}

}  // namespace

void save_model(const MulticlassSvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model '" + path.string() + "'");
    out << "texfuse-svm 1\n";
    out << "classes " << model.class_labels.size() << '\n';
    for (const auto& l : model.class_labels) out << l << '\n';
    out << "logistic " << (model.logistic ? 1 : 0) << '\n';
    out << "standardizer " << model.standardizer.dim() << '\n';
    write_row(out, model.standardizer.mean);
    write_row(out, model.standardizer.stddev);
    for (const auto& m : model.binary_models) {
        out << "model " << (m.kernel.type == KernelType::Rbf ? "rbf" : "linear") << ' '
            << detail::format_double(m.kernel.gamma) << ' ' << detail::format_double(m.c) << ' '
            << detail::format_double(m.bias) << ' ' << m.coefficients.size() << '\n';
        for (std::size_t i = 0; i < m.coefficients.size(); ++i) {
            out << m.labels[i] << ' ' << detail::format_double(m.alphas[i]) << ' ';
            write_row(out, m.support_vectors.row(i));
        }
    }
    if (!out) throw Error("failed writing model '" + path.string() + "'");
}

MulticlassSvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read model '" + path.string() + "'");
    expect(in, "texfuse-svm");
    if (read_value<int>(in, "version") != 1) throw Error("unsupported SVM model version");
    MulticlassSvmModel model;
    expect(in, "classes");
    const auto classes = read_value<std::size_t>(in, "class count");
    in >> std::ws;
    for (std::size_t i = 0; i < classes; ++i) {
        std::string label;
        std::getline(in, label);
        model.class_labels.push_back(label);
    }
    expect(in, "logistic");
    model.logistic = read_value<int>(in, "logistic flag") != 0;
    expect(in, "standardizer");
    const auto dim = read_value<std::size_t>(in, "dimension");
    model.standardizer.mean.resize(dim);
    model.standardizer.stddev.resize(dim);
    for (double& v : model.standardizer.mean) v = read_double(in);
    for (double& v : model.standardizer.stddev) v = read_double(in);
    for (std::size_t c = 0; c < classes; ++c) {
        expect(in, "model");
        SvmModel m;
        const auto kind = read_value<std::string>(in, "kernel");
        m.kernel.type = kind == "rbf" ? KernelType::Rbf : KernelType::Linear;
        m.kernel.gamma = read_double(in);
        m.c = read_double(in);
        m.bias = read_double(in);
        const auto nsv = read_value<std::size_t>(in, "support vector count");
        m.support_vectors = Matrix(nsv, dim);
        for (std::size_t i = 0; i < nsv; ++i) {
            m.labels.push_back(read_value<int>(in, "label"));
            m.alphas.push_back(read_double(in));
            m.coefficients.push_back(m.alphas.back() * m.labels.back());
            for (double& v : m.support_vectors.row(i)) v = read_double(in);
        }
        model.binary_models.push_back(std::move(m));
    }
    return model;
}

}  // namespace texfuse
