#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "texfuse/codebook.hpp"
#include "texfuse/descriptors.hpp"
#include "texfuse/ensemble.hpp"
#include "texfuse/error.hpp"
#include "texfuse/filters.hpp"
#include "texfuse/pipeline.hpp"
#include "texfuse/registry.hpp"

namespace py = pybind11;
using namespace texfuse;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const Array& a) {
    if (a.ndim() != 2) throw DimensionError("expected a 2-D array (rows x cols)");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_image(const GrayImage& img) {
    Array out({img.height(), img.width()});
    std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
    return out;
}

Array from_vector(const std::vector<double>& v) {
    Array out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Array from_matrix(const Matrix& m) {
    Array out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data.begin());
    return m;
}

ScoreMatrix to_scores(const Array& a) {
    ScoreMatrix s;
    s.scores = to_matrix(a);
    for (std::size_t c = 0; c < s.scores.cols; ++c) s.class_labels.push_back(std::to_string(c));
    return s;
}

Array kernel_array(const Kernel2D& k) {
    Array out({k.size, k.size});
    std::copy(k.taps.begin(), k.taps.end(), out.mutable_data());
    return out;
}

std::vector<NeighborhoodSpec> to_specs(const std::vector<std::pair<double, int>>& scales) {
    std::vector<NeighborhoodSpec> specs;
    for (const auto& [r, p] : scales) specs.push_back({r, p});
    return specs;
}

}  // namespace

PYBIND11_MODULE(_texfuse, m) {
    m.doc() = "Handcrafted texture descriptors, SVM scoring and sum-rule fusion.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DecodeError>(m, "DecodeError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<BoundsError>(m, "BoundsError", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<StateError>(m, "StateError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<ManifestError>(m, "ManifestError", base.ptr());
    py::register_exception<IngestionError>(m, "IngestionError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    m.def("load_image", [](const std::filesystem::path& p) { return from_image(load_image(p)); }, py::arg("path"),
          "Decode a PNG to a float64 gray array of shape (rows, cols).");
    m.def("save_png", [](const Array& a, const std::filesystem::path& p) { save_png(to_image(a), p); },
          py::arg("image"), py::arg("path"));
    m.def("bilinear_sample", [](const Array& a, double x, double y) { return bilinear_sample(to_image(a), x, y); },
          py::arg("image"), py::arg("x"), py::arg("y"));
    m.def(
        "circular_neighbors",
        [](const Array& a, int cx, int cy, double radius, int points) {
            return from_vector(circular_neighbors(to_image(a), cx, cy, {radius, points}));
        },
        py::arg("image"), py::arg("cx"), py::arg("cy"), py::arg("radius") = 1.0, py::arg("points") = 8);

    m.def("gaussian_second_derivative_kernels",
          [](double sigma, int size) {
              auto [gxx, gyy] = gaussian_second_derivative_kernels(sigma, size);
              return py::make_tuple(kernel_array(gxx), kernel_array(gyy));
          },
          py::arg("sigma"), py::arg("size") = 0);
    m.def("convolve", [](const Array& a, const Array& k) {
        if (k.ndim() != 2 || k.shape(0) != k.shape(1)) throw DimensionError("kernel must be square");
        const Kernel2D kernel(static_cast<int>(k.shape(0)), std::vector<double>(k.data(), k.data() + k.size()));
        return from_image(convolve(to_image(a), kernel));
    }, py::arg("image"), py::arg("kernel"));
    m.def("hessian_magnitude", [](const Array& a, double sigma) { return from_image(hessian_magnitude(to_image(a), sigma)); },
          py::arg("image"), py::arg("sigma") = 1.0);
    m.def("gradient_magnitude", [](const Array& a) { return from_image(gradient_magnitude(to_image(a))); },
          py::arg("image"));

    m.def("lbp", [](const Array& a, double r, int p) { return from_vector(lbp(to_image(a), {r, p}).values); },
          py::arg("image"), py::arg("radius") = 1.0, py::arg("points") = 8);
    m.def("ltp", [](const Array& a, double r, int p, double tau) { return from_vector(ltp(to_image(a), {r, p}, tau).values); },
          py::arg("image"), py::arg("radius") = 1.0, py::arg("points") = 8, py::arg("tau") = 5.0);
    m.def("mqc",
          [](const Array& a, double r, int p, double tau, double theta) {
              return from_vector(mqc(to_image(a), {r, p}, tau, theta).values);
          },
          py::arg("image"), py::arg("radius") = 1.0, py::arg("points") = 8, py::arg("tau") = 5.0, py::arg("theta") = 2.0);
    m.def("alpha_lbp",
          [](const Array& a, const std::vector<double>& angles) { return from_vector(alpha_lbp(to_image(a), angles).values); },
          py::arg("image"), py::arg("angles") = std::vector<double>{0.0, 45.0, 90.0, 135.0});
    m.def("dlbp",
          [](const Array& a, const std::vector<std::pair<double, int>>& scales) {
              return from_vector(dlbp(to_image(a), to_specs(scales)).values);
          },
          py::arg("image"), py::arg("scales") = std::vector<std::pair<double, int>>{{1.0, 8}, {2.0, 8}, {3.0, 8}});
    m.def("dlbp_patch", [](const std::vector<double>& patch) {
        const DlbpPatchResult r = dlbp_patch(patch);
        py::dict d;
        d["tau_star"] = r.tau_star;
        d["sigma_b2"] = r.sigma_b2;
        d["sigma2"] = r.sigma2;
        d["weight"] = r.weight;
        return d;
    }, py::arg("patch"));
    m.def("arcslbp",
          [](const Array& a, const std::string& source, const std::vector<std::pair<double, int>>& scales,
             const std::vector<double>& sigmas) {
              ArcslbpConfig cfg;
              cfg.specs = to_specs(scales);
              cfg.sigmas = sigmas;
              if (source == "raw") cfg.source = ArcsSource::Raw;
              else if (source == "hessian") cfg.source = ArcsSource::Hessian;
              else if (source == "gradient") cfg.source = ArcsSource::Gradient;
              else throw ParameterError("source must be raw, hessian or gradient");
              return from_vector(arcslbp(to_image(a), cfg).values);
          },
          py::arg("image"), py::arg("source") = "raw",
          py::arg("scales") = std::vector<std::pair<double, int>>{{1.0, 8}, {2.0, 8}, {3.0, 8}},
          py::arg("sigmas") = std::vector<double>{1.0});
    m.def("lcvmsp", [](const Array& a) { return from_vector(lcvmsp(to_image(a)).values); }, py::arg("image"));
    m.def("ahp", [](const Array& a, double r, int p, double k) { return from_vector(ahp(to_image(a), {r, p}, k).values); },
          py::arg("image"), py::arg("radius") = 1.0, py::arg("points") = 8, py::arg("k") = 0.5);
    m.def("hasc", [](const Array& a, int cols, int rows) { return from_vector(hasc(to_image(a), {cols, rows}).values); },
          py::arg("image"), py::arg("cols") = 2, py::arg("rows") = 2);
    m.def("sclbp_encode", [](const std::vector<int>& bits) {
        const RunCode rc = sclbp_encode(bits);
        return py::make_tuple(rc.ones_runs, rc.zeros_runs);
    }, py::arg("bits"));

    m.def("descriptor_types", &descriptor_types);
    m.def(
        "extract",
        [](const std::string& type, const std::string& params_json, const std::vector<Array>& images) {
            DescriptorConfig cfg{type, type, nlohmann::json::parse(params_json)};
            auto d = make_descriptor(cfg);
            std::vector<GrayImage> imgs;
            for (const auto& a : images) imgs.push_back(to_image(a));
            py::gil_scoped_release release;
            if (d->trainable()) d->fit(imgs, 0);
            Matrix out(0, d->dim());
            for (const auto& img : imgs) out.append_row(d->extract(img).values);
            py::gil_scoped_acquire acquire;
            return from_matrix(out);
        },
        py::arg("type"), py::arg("params_json"), py::arg("images"),
        "Feature matrix for a registry descriptor; trainable descriptors are fitted on the same images.");

    m.def(
        "kmeans",
        [](const Array& points, std::size_t k, std::uint64_t seed) {
            const Matrix x = to_matrix(points);
            PointSet ps{x.cols, x.data};
            const Codebook cb = kmeans_fit(ps, k, seed);
            Matrix c(cb.k, cb.dim);
            c.data = cb.centroids;
            return py::make_tuple(from_matrix(c), cb.inertia, cb.iterations);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0);

    m.def(
        "svm_scores",
        [](const Array& train, const std::vector<std::size_t>& labels, const Array& test, const std::string& kernel,
           double gamma, double c) {
            std::size_t classes = 0;
            for (std::size_t l : labels) classes = std::max(classes, l + 1);
            std::vector<std::string> names;
            for (std::size_t i = 0; i < classes; ++i) names.push_back(std::to_string(i));
            SvmParams p;
            p.kernel = kernel == "linear" ? KernelType::Linear : KernelType::Rbf;
            if (kernel != "linear" && kernel != "rbf") throw ParameterError("kernel must be rbf or linear");
            p.gamma = gamma;
            p.c = c;
            const auto model = train_multiclass(to_matrix(train), labels, names, p);
            return from_matrix(score(model, to_matrix(test)).scores);
        },
        py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("kernel") = "rbf", py::arg("gamma") = 0.0,
        py::arg("c") = 10.0, "One-vs-all decision values, one column per class index.");

    m.def("znorm", [](const Array& s, bool per_column) {
        return from_matrix(znorm(to_scores(s), per_column ? ZScorePooling::Column : ZScorePooling::Matrix).scores);
    }, py::arg("scores"), py::arg("per_column") = false);
    m.def("sum_rule", [](const std::vector<Array>& members) {
        std::vector<ScoreMatrix> ms;
        for (const auto& a : members) ms.push_back(to_scores(a));
        const FusedPrediction f = sum_rule(ms);
        return py::make_tuple(from_matrix(f.fused.scores), f.labels);
    }, py::arg("members"));

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "texfuse");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            py::gil_scoped_release release;
            return run_cli(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Run the command-line pipeline in-process; returns the exit code.");
}
