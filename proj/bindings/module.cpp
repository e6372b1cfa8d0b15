#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lpdsvm/dataio.hpp"
#include "lpdsvm/factor.hpp"
#include "lpdsvm/model_io.hpp"
#include "lpdsvm/modelsel.hpp"
#include "lpdsvm/multiclass.hpp"
#include "lpdsvm/parallel.hpp"

namespace py = pybind11;
using namespace lpdsvm;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

struct TrainStats {
    long long epochs = 0;
    long long coordinate_visits = 0;
    std::size_t pairs = 0;
    std::size_t unconverged_pairs = 0;
    double preparation_seconds = 0.0;
    double gmatrix_seconds = 0.0;
    double training_seconds = 0.0;
};

std::pair<OvoModel, TrainStats> train_impl(const Dataset& data, std::size_t budget, double C,
                                           double gamma, double eps, std::uint64_t seed,
                                           int threads, double tau, std::size_t chunk,
                                           bool shrinking, int stall_limit, double eta,
                                           long long max_epochs) {
    if (data.size() == 0) throw std::invalid_argument("dataset is empty");
    if (threads < 1) threads = hardware_threads();
    LabelMap label_map = build_label_map(data.labels);

    FactorOptions factor_options;
    factor_options.budget = budget;
    factor_options.tau_rel = tau;
    factor_options.chunk_size = chunk;
    factor_options.num_threads = threads;
    factor_options.seed = seed;

    FactorTimings timings;
    LowRankFactor factor =
        build_factor(data, {KernelKind::Gaussian, gamma}, factor_options, &timings);

    OvoTrainOptions train_options;
    train_options.solve.eps = eps;
    train_options.solve.seed = seed;
    train_options.solve.shrinking = shrinking;
    train_options.solve.stall_limit = stall_limit;
    train_options.solve.eta = eta;
    train_options.solve.max_epochs = max_epochs;
    train_options.num_threads = threads;

    auto t0 = std::chrono::steady_clock::now();
    OvoTrainResult trained = ovo_train(factor, data.labels, label_map, C, train_options);
    TrainStats stats;
    stats.training_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stats.preparation_seconds = timings.preparation_seconds;
    stats.gmatrix_seconds = timings.gmatrix_seconds;
    stats.pairs = trained.pairs.size();
    for (const SolveReport& rep : trained.reports) {
        stats.epochs += rep.epochs;
        stats.coordinate_visits += rep.coordinate_visits;
        if (!rep.converged) ++stats.unconverged_pairs;
    }
    return {std::move(trained.model), stats};
}

py::dict stats_dict(const TrainStats& stats) {
    py::dict d;
    d["epochs"] = stats.epochs;
    d["coordinate_visits"] = stats.coordinate_visits;
    d["pairs"] = stats.pairs;
    d["unconverged_pairs"] = stats.unconverged_pairs;
    d["preparation_seconds"] = stats.preparation_seconds;
    d["gmatrix_seconds"] = stats.gmatrix_seconds;
    d["training_seconds"] = stats.training_seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Approximate kernel SVM training: precomputed low-rank kernel factor plus "
              "dual coordinate ascent with shrinking, one-vs-one multiclass, "
              "cross-validation and grid search";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ModelFormatError>(m, "ModelFormatError", PyExc_ValueError);

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("n", &Dataset::size)
        .def_readonly("dim", &Dataset::dim)
        .def_property_readonly("labels",
                               [](const Dataset& d) { return to_array(d.labels); })
        .def("__len__", &Dataset::size)
        .def("__repr__", [](const Dataset& d) {
            std::ostringstream ss;
            ss << "Dataset(n=" << d.size() << ", dim=" << d.dim << ")";
            return ss.str();
        });

    m.def("load_dataset", &load_libsvm_file, py::arg("path"),
          "Load a LIBSVM-format text file");
    m.def(
        "parse_dataset",
        [](const std::string& text) {
            std::istringstream in(text);
            return parse_libsvm(in);
        },
        py::arg("text"), "Parse LIBSVM-format text");

    py::class_<OvoModel>(m, "Model")
        .def_property_readonly("num_classes", &OvoModel::num_classes)
        .def_property_readonly("num_pairs", &OvoModel::num_pairs)
        .def_property_readonly("budget", &OvoModel::budget)
        .def_property_readonly("effective_rank",
                               [](const OvoModel& model) { return model.L.cols(); })
        .def_property_readonly("classes",
                               [](const OvoModel& model) {
                                   return to_array(model.label_map.classes);
                               })
        .def_readonly("C", &OvoModel::C)
        .def_readonly("eps", &OvoModel::eps)
        .def(
            "predict",
            [](const OvoModel& model, const Dataset& data, int threads) {
                if (threads < 1) threads = hardware_threads();
                return to_array(ovo_predict(model, data.points, threads));
            },
            py::arg("data"), py::arg("threads") = 0,
            "Predicted raw labels for every point, in input order")
        .def(
            "error_rate",
            [](const OvoModel& model, const Dataset& data, int threads) {
                if (data.size() == 0)
                    throw std::invalid_argument("empty dataset has no error rate");
                if (threads < 1) threads = hardware_threads();
                std::vector<double> predictions = ovo_predict(model, data.points, threads);
                std::size_t wrong = 0;
                for (std::size_t i = 0; i < data.size(); ++i)
                    if (predictions[i] != data.labels[i]) ++wrong;
                return static_cast<double>(wrong) / static_cast<double>(data.size());
            },
            py::arg("data"), py::arg("threads") = 0)
        .def(
            "decision_values",
            [](const OvoModel& model, const Dataset& data) {
                py::array_t<double> out(
                    {static_cast<py::ssize_t>(data.size()),
                     static_cast<py::ssize_t>(model.num_pairs())});
                auto view = out.mutable_unchecked<2>();
                for (std::size_t i = 0; i < data.size(); ++i) {
                    std::vector<double> d = decision_values(model, data.points[i]);
                    for (std::size_t p = 0; p < d.size(); ++p)
                        view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(p)) = d[p];
                }
                return out;
            },
            py::arg("data"), "Per-pair decision values, one row per point")
        .def(
            "save",
            [](const OvoModel& model, const std::string& path) { save_model(model, path); },
            py::arg("path"))
        .def(
            "to_string",
            [](const OvoModel& model) {
                std::ostringstream out;
                export_model(model, out);
                return out.str();
            },
            "The model file contents as a string")
        .def("__repr__", [](const OvoModel& model) {
            std::ostringstream ss;
            ss << "Model(classes=" << model.num_classes() << ", pairs=" << model.num_pairs()
               << ", budget=" << model.budget() << ")";
            return ss.str();
        });

    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "train",
        [](const Dataset& data, std::size_t budget, double C, double gamma, double eps,
           std::uint64_t seed, int threads, double tau, std::size_t chunk, bool shrinking,
           int stall_limit, double eta, long long max_epochs) {
            auto [model, stats] = train_impl(data, budget, C, gamma, eps, seed, threads, tau,
                                             chunk, shrinking, stall_limit, eta, max_epochs);
            return py::make_tuple(std::move(model), stats_dict(stats));
        },
        py::arg("data"), py::arg("budget"), py::arg("C"), py::arg("gamma"),
        py::arg("eps") = 1e-3, py::arg("seed") = 1, py::arg("threads") = 0,
        py::arg("tau") = 1e-12, py::arg("chunk") = 4096, py::arg("shrinking") = true,
        py::arg("stall_limit") = 5, py::arg("eta") = 0.05, py::arg("max_epochs") = 1000,
        "Train a one-vs-one model; returns (model, stats)");

    m.def(
        "cross_validate",
        [](const Dataset& data, std::size_t budget, double C, double gamma, int folds,
           double eps, std::uint64_t seed, int threads, double tau, std::size_t chunk,
           bool stratified) {
            if (data.size() == 0) throw std::invalid_argument("dataset is empty");
            if (threads < 1) threads = hardware_threads();
            LabelMap label_map = build_label_map(data.labels);
            FactorOptions factor_options;
            factor_options.budget = budget;
            factor_options.tau_rel = tau;
            factor_options.chunk_size = chunk;
            factor_options.num_threads = threads;
            factor_options.seed = seed;
            LowRankFactor factor =
                build_factor(data, {KernelKind::Gaussian, gamma}, factor_options);
            FoldAssignment assignment = kfold_split(data.labels, folds, seed, stratified);
            CvOptions options;
            options.solve.eps = eps;
            options.solve.seed = seed;
            options.num_threads = threads;
            CvResult cv =
                cross_validate(factor, data.labels, label_map, assignment, C, options);
            py::dict out;
            out["mean_error"] = cv.mean_error;
            out["fold_errors"] = to_array(cv.fold_errors);
            out["binary_solves"] = cv.binary_solves;
            out["epochs"] = cv.total_epochs;
            return out;
        },
        py::arg("data"), py::arg("budget"), py::arg("C"), py::arg("gamma"),
        py::arg("folds") = 5, py::arg("eps") = 1e-3, py::arg("seed") = 1,
        py::arg("threads") = 0, py::arg("tau") = 1e-12, py::arg("chunk") = 4096,
        py::arg("stratified") = true, "k-fold cross-validation at fixed (C, gamma)");

    m.def(
        "grid_search",
        [](const Dataset& data, const std::vector<double>& gammas,
           const std::vector<double>& Cs, std::size_t budget, int folds, double eps,
           std::uint64_t seed, int threads, double tau, std::size_t chunk, bool stratified,
           bool warm_starts) {
            if (threads < 1) threads = hardware_threads();
            GridOptions options;
            options.budget = budget;
            options.tau_rel = tau;
            options.chunk_size = chunk;
            options.num_threads = threads;
            options.seed = seed;
            options.folds = folds;
            options.stratified = stratified;
            options.warm_starts = warm_starts;
            options.solve.eps = eps;
            options.solve.seed = seed;
            GridReport report = grid_search(data, gammas, Cs, options);
            py::list entries;
            for (const GridEntry& entry : report.entries) {
                py::dict e;
                e["gamma"] = entry.gamma;
                e["C"] = entry.C;
                e["mean_error"] = entry.mean_error;
                e["fold_errors"] = to_array(entry.fold_errors);
                e["epochs"] = entry.epochs;
                e["seconds"] = entry.seconds;
                entries.append(e);
            }
            py::dict out;
            out["entries"] = entries;
            out["best_index"] = report.best_index;
            out["best_gamma"] = report.entries[report.best_index].gamma;
            out["best_C"] = report.entries[report.best_index].C;
            out["best_error"] = report.entries[report.best_index].mean_error;
            out["stage1_runs"] = report.stage1_runs;
            out["binary_solves"] = report.binary_solves;
            out["warm_started_solves"] = report.warm_started_solves;
            return out;
        },
        py::arg("data"), py::arg("gammas"), py::arg("Cs"), py::arg("budget"),
        py::arg("folds") = 5, py::arg("eps") = 1e-3, py::arg("seed") = 1,
        py::arg("threads") = 0, py::arg("tau") = 1e-12, py::arg("chunk") = 4096,
        py::arg("stratified") = true, py::arg("warm_starts") = true,
        "Cross-validated grid search; the factor is built once per gamma and every "
        "(fold, pair) problem warm-starts along the ascending C list");

    m.attr("__version__") = "0.1.0";
}
