#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "lpdsvm/dataio.hpp"
#include "lpdsvm/factor.hpp"
#include "lpdsvm/format.hpp"
#include "lpdsvm/model_io.hpp"
#include "lpdsvm/modelsel.hpp"
#include "lpdsvm/multiclass.hpp"
#include "lpdsvm/parallel.hpp"

namespace {

using namespace lpdsvm;

struct CommonFlags {
    std::size_t budget = 1000;
    double C = 1.0;
    double gamma = 1.0;
    double eps = 1e-3;
    std::uint64_t seed = 1;
    int threads = hardware_threads();
    std::size_t chunk = 4096;
    double tau = 1e-12;
    int stall_k = 5;
    double eta = 0.05;
    long long max_epochs = 1000;
    bool no_shrinking = false;
};

void add_tuning_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("-e,--eps", flags.eps, "Stopping tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", flags.seed, "Random seed");
    cmd->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--chunk", flags.chunk, "Row chunk size for kernel batches")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tau", flags.tau, "Relative eigenvalue cutoff")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--stall-k", flags.stall_k, "Stalled visits before a variable is shrunk")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--eta", flags.eta, "Fraction of work spent re-checking shrunk variables")
        ->check(CLI::Range(1e-6, 0.999));
    cmd->add_option("--max-epochs", flags.max_epochs, "Epoch cap per binary problem")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--no-shrinking", flags.no_shrinking, "Disable shrinking");
}

SolveOptions make_solve_options(const CommonFlags& flags) {
    SolveOptions solve;
    solve.eps = flags.eps;
    solve.max_epochs = flags.max_epochs;
    solve.shrinking = !flags.no_shrinking;
    solve.stall_limit = flags.stall_k;
    solve.eta = flags.eta;
    solve.seed = flags.seed;
    return solve;
}

FactorOptions make_factor_options(const CommonFlags& flags) {
    FactorOptions options;
    options.budget = flags.budget;
    options.tau_rel = flags.tau;
    options.chunk_size = flags.chunk;
    options.num_threads = flags.threads;
    options.seed = flags.seed;
    return options;
}

void print_stage_time(const char* stage, double seconds) {
    std::fprintf(stderr, "%s,%.3f\n", stage, seconds);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// "a:b" -> inclusive integer range
std::pair<int, int> parse_range(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("range must look like a:b, got '" + text + "'");
    int lo = std::stoi(text.substr(0, colon));
    int hi = std::stoi(text.substr(colon + 1));
    if (hi < lo) throw CLI::ValidationError("range must be ascending, got '" + text + "'");
    return {lo, hi};
}

int run_train(const CommonFlags& flags, const std::string& data_path,
              const std::string& model_path) {
    Dataset data = load_libsvm_file(data_path);
    if (data.size() == 0) throw std::runtime_error("training file is empty");
    LabelMap label_map = build_label_map(data.labels);

    FactorTimings timings;
    LowRankFactor factor =
        build_factor(data, {KernelKind::Gaussian, flags.gamma}, make_factor_options(flags),
                     &timings);

    auto t0 = std::chrono::steady_clock::now();
    OvoTrainOptions train_options;
    train_options.solve = make_solve_options(flags);
    train_options.num_threads = flags.threads;
    OvoTrainResult trained = ovo_train(factor, data.labels, label_map, flags.C, train_options);
    double training_seconds = seconds_since(t0);

    save_model(trained.model, model_path);

    std::size_t stuck = 0;
    long long visits = 0, epochs = 0;
    for (const SolveReport& rep : trained.reports) {
        if (!rep.converged) ++stuck;
        visits += rep.coordinate_visits;
        epochs += rep.epochs;
    }
    std::fprintf(stderr,
                 "trained %zu classes, %zu pairs, budget %zu, effective rank %d, "
                 "epochs %lld, coordinate visits %lld\n",
                 label_map.num_classes(), trained.pairs.size(), factor.landmarks.size(),
                 factor.b_eff, epochs, visits);
    if (stuck > 0)
        std::fprintf(stderr, "warning: %zu pair(s) hit the epoch cap before converging\n",
                     stuck);
    print_stage_time("preparation", timings.preparation_seconds);
    print_stage_time("gmatrix", timings.gmatrix_seconds);
    print_stage_time("training", training_seconds);
    return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path, int threads) {
    OvoModel model = load_model(model_path);
    Dataset data = load_libsvm_file(data_path);

    auto t0 = std::chrono::steady_clock::now();
    PredictFileResult result;
    if (out_path.empty()) {
        result = predict_file(model, data, std::cout, threads);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
        result = predict_file(model, data, out, threads);
    }
    if (result.error_rate.has_value())
        std::fprintf(stderr, "error rate: %.4f%% over %zu points\n",
                     100.0 * *result.error_rate, result.points);
    else
        std::fprintf(stderr, "error rate: n/a (empty input)\n");
    print_stage_time("prediction", seconds_since(t0));
    return 0;
}

int run_cv(const CommonFlags& flags, int folds, bool stratified, const std::string& data_path) {
    Dataset data = load_libsvm_file(data_path);
    if (data.size() == 0) throw std::runtime_error("dataset is empty");
    LabelMap label_map = build_label_map(data.labels);

    FactorTimings timings;
    LowRankFactor factor =
        build_factor(data, {KernelKind::Gaussian, flags.gamma}, make_factor_options(flags),
                     &timings);
    FoldAssignment assignment = kfold_split(data.labels, folds, flags.seed, stratified);

    auto t0 = std::chrono::steady_clock::now();
    CvOptions options;
    options.solve = make_solve_options(flags);
    options.num_threads = flags.threads;
    CvResult cv = cross_validate(factor, data.labels, label_map, assignment, flags.C, options);
    double training_seconds = seconds_since(t0);

    for (int f = 0; f < folds; ++f) {
        if (cv.fold_valid[static_cast<std::size_t>(f)])
            std::printf("fold %d error %.4f%%\n", f,
                        100.0 * cv.fold_errors[static_cast<std::size_t>(f)]);
        else
            std::printf("fold %d skipped (class missing from training split)\n", f);
    }
    std::printf("mean cv error %.4f%%\n", 100.0 * cv.mean_error);
    print_stage_time("preparation", timings.preparation_seconds);
    print_stage_time("gmatrix", timings.gmatrix_seconds);
    print_stage_time("training", training_seconds);
    return 0;
}

int run_grid(const CommonFlags& flags, int folds, bool stratified, bool warm_starts,
             const std::string& log2c_text, const std::string& log2g_text,
             bool have_center, int log2g_center, const std::string& csv_path,
             const std::string& data_path) {
    Dataset data = load_libsvm_file(data_path);
    if (data.size() == 0) throw std::runtime_error("dataset is empty");

    auto [c_lo, c_hi] = parse_range(log2c_text);
    std::pair<int, int> g_range;
    if (!log2g_text.empty())
        g_range = parse_range(log2g_text);
    else if (have_center)
        g_range = {log2g_center - 2, log2g_center + 2};
    else
        throw CLI::ValidationError("grid needs --log2g a:b or --log2g-center g");

    std::vector<double> c_list, gamma_list;
    for (int i = c_lo; i <= c_hi; ++i) c_list.push_back(std::ldexp(1.0, i));
    for (int i = g_range.first; i <= g_range.second; ++i)
        gamma_list.push_back(std::ldexp(1.0, i));

    GridOptions options;
    options.budget = flags.budget;
    options.tau_rel = flags.tau;
    options.chunk_size = flags.chunk;
    options.num_threads = flags.threads;
    options.seed = flags.seed;
    options.folds = folds;
    options.stratified = stratified;
    options.warm_starts = warm_starts;
    options.solve = make_solve_options(flags);

    GridReport report = grid_search(data, gamma_list, c_list, options);

    // mean-error table, gamma rows by C columns
    std::printf("%12s", "log2g\\log2c");
    for (int i = c_lo; i <= c_hi; ++i) std::printf("%9d", i);
    std::printf("\n");
    std::size_t idx = 0;
    for (int gi = g_range.first; gi <= g_range.second; ++gi) {
        std::printf("%12d", gi);
        for (int ci = c_lo; ci <= c_hi; ++ci, ++idx)
            std::printf("%9.4f", report.entries[idx].mean_error);
        std::printf("\n");
    }
    const GridEntry& best = report.entries[report.best_index];
    std::printf("best: gamma %s (log2 %g) C %s (log2 %g) error %.4f%%\n",
                format_shortest(best.gamma).c_str(), std::log2(best.gamma),
                format_shortest(best.C).c_str(), std::log2(best.C), 100.0 * best.mean_error);
    std::printf("stage-1 factorizations: %d\n", report.stage1_runs);
    std::printf("binary solves: %lld (%lld warm-started)\n", report.binary_solves,
                report.warm_started_solves);

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot open " + csv_path + " for writing");
        csv << "gamma,C,fold,error,epochs,seconds\n";
        for (const GridEntry& entry : report.entries) {
            for (std::size_t f = 0; f < entry.fold_errors.size(); ++f) {
                csv << format_shortest(entry.gamma) << ',' << format_shortest(entry.C) << ','
                    << f << ',';
                if (entry.fold_valid[f])
                    csv << format_shortest(entry.fold_errors[f]);
                else
                    csv << "skipped";
                csv << ',' << entry.fold_epochs[f] << ','
                    << format_shortest(entry.fold_seconds[f]) << '\n';
            }
        }
    }

    print_stage_time("preparation", report.stage1_preparation_seconds);
    print_stage_time("gmatrix", report.stage1_gmatrix_seconds);
    print_stage_time("training", report.training_seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximate kernel SVM trainer (low-rank factor + dual coordinate ascent)"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* train = app.add_subcommand("train", "Train a model and write it to disk");
    std::string train_data, train_model;
    train->add_option("-B,--budget", flags.budget, "Landmark budget")->required();
    train->add_option("-c,--cost", flags.C, "Box constraint C");
    train->add_option("-g,--gamma", flags.gamma, "Gaussian kernel gamma")->required();
    add_tuning_flags(train, flags);
    train->add_option("data", train_data, "Training data (LIBSVM format)")->required();
    train->add_option("model", train_model, "Output model path")->required();

    auto* predict = app.add_subcommand("predict", "Predict labels with a trained model");
    std::string predict_model, predict_data, predict_out;
    int predict_threads = hardware_threads();
    predict->add_option("model", predict_model, "Model path")->required();
    predict->add_option("data", predict_data, "Data to predict (LIBSVM format)")->required();
    predict->add_option("output", predict_out, "Prediction output path (default stdout)");
    predict->add_option("--threads", predict_threads, "Worker threads")
        ->check(CLI::PositiveNumber);

    auto* cv = app.add_subcommand("cv", "k-fold cross-validation at fixed (C, gamma)");
    int cv_folds = 5;
    bool cv_no_stratify = false;
    std::string cv_data;
    cv->add_option("-k,--folds", cv_folds, "Fold count")->required()->check(CLI::Range(2, 1 << 20));
    cv->add_option("-B,--budget", flags.budget, "Landmark budget")->required();
    cv->add_option("-c,--cost", flags.C, "Box constraint C");
    cv->add_option("-g,--gamma", flags.gamma, "Gaussian kernel gamma")->required();
    cv->add_flag("--no-stratify", cv_no_stratify, "Plain instead of stratified folds");
    add_tuning_flags(cv, flags);
    cv->add_option("data", cv_data, "Dataset (LIBSVM format)")->required();

    auto* grid = app.add_subcommand("grid", "Cross-validated (C, gamma) grid search");
    int grid_folds = 5;
    bool grid_no_stratify = false, grid_no_warm = false;
    std::string grid_log2c = "0:9", grid_log2g, grid_csv, grid_data;
    int grid_log2g_center = 0;
    auto* center_opt =
        grid->add_option("--log2g-center", grid_log2g_center,
                         "Center of a log2-gamma range spanning center-2..center+2");
    grid->add_option("-B,--budget", flags.budget, "Landmark budget")->required();
    grid->add_option("--log2c", grid_log2c, "log2(C) range a:b (default 0:9)");
    grid->add_option("--log2g", grid_log2g, "log2(gamma) range a:b");
    grid->add_option("-k,--folds", grid_folds, "Fold count")->check(CLI::Range(2, 1 << 20));
    grid->add_option("--csv", grid_csv, "Also write per-fold results as CSV");
    grid->add_flag("--no-stratify", grid_no_stratify, "Plain instead of stratified folds");
    grid->add_flag("--no-warm-starts", grid_no_warm, "Cold-start every C");
    add_tuning_flags(grid, flags);
    grid->add_option("data", grid_data, "Dataset (LIBSVM format)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return run_train(flags, train_data, train_model);
        if (predict->parsed())
            return run_predict(predict_model, predict_data, predict_out, predict_threads);
        if (cv->parsed()) return run_cv(flags, cv_folds, !cv_no_stratify, cv_data);
        if (grid->parsed())
            return run_grid(flags, grid_folds, !grid_no_stratify, !grid_no_warm, grid_log2c,
                            grid_log2g, center_opt->count() > 0, grid_log2g_center, grid_csv,
                            grid_data);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
