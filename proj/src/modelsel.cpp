#include "lpdsvm/modelsel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpdsvm/rng.hpp"

namespace lpdsvm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

FoldAssignment kfold_split(std::span<const double> labels, int k, std::uint64_t seed,
                           bool stratified) {
    const std::size_t n = labels.size();
    if (k < 2) throw std::invalid_argument("need at least two folds");
    if (static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("more folds than data points");

    FoldAssignment assignment;
    assignment.k = k;
    assignment.fold_of.assign(n, 0);
    Rng rng(combine_seed(seed, 0xf01d5ULL));
    int cursor = 0;

    if (stratified) {
        LabelMap map = build_label_map(labels);
        // the dealing cursor continues across classes so total fold sizes
        // stay within one of each other
        for (double cls : map.classes) {
            std::vector<int> rows;
            for (std::size_t r = 0; r < n; ++r)
                if (labels[r] == cls) rows.push_back(static_cast<int>(r));
            rng.shuffle(rows);
            for (int r : rows) {
                assignment.fold_of[static_cast<std::size_t>(r)] = cursor;
                cursor = (cursor + 1) % k;
            }
        }
    } else {
        std::vector<int> rows(n);
        for (std::size_t r = 0; r < n; ++r) rows[r] = static_cast<int>(r);
        rng.shuffle(rows);
        for (int r : rows) {
            assignment.fold_of[static_cast<std::size_t>(r)] = cursor;
            cursor = (cursor + 1) % k;
        }
    }
    return assignment;
}

WarmStore make_warm_store(int folds, std::size_t num_pairs) {
    return WarmStore(static_cast<std::size_t>(folds),
                     std::vector<std::vector<double>>(num_pairs));
}

CvResult cross_validate(const LowRankFactor& factor, std::span<const double> labels,
                        const LabelMap& label_map, const FoldAssignment& folds, double C,
                        const CvOptions& options, WarmStore* warm) {
    const std::size_t n = labels.size();
    if (n != factor.G.rows()) throw std::invalid_argument("label count does not match G");
    if (folds.fold_of.size() != n) throw std::invalid_argument("fold assignment size mismatch");
    const int k = folds.k;
    const std::size_t c = label_map.num_classes();
    const std::size_t num_pairs = c * (c - 1) / 2;
    if (warm && warm->size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("warm store fold count mismatch");

    CvResult result;
    result.fold_errors.assign(static_cast<std::size_t>(k),
                              std::numeric_limits<double>::quiet_NaN());
    result.fold_valid.assign(static_cast<std::size_t>(k), 0);
    result.fold_epochs.assign(static_cast<std::size_t>(k), 0);
    result.fold_seconds.assign(static_cast<std::size_t>(k), 0.0);

    for (int f = 0; f < k; ++f) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<std::uint8_t> include(n, 0);
        std::vector<std::uint8_t> class_present(c, 0);
        for (std::size_t r = 0; r < n; ++r) {
            if (folds.fold_of[r] != f) {
                include[r] = 1;
                class_present[static_cast<std::size_t>(label_map.index_of(labels[r]))] = 1;
            }
        }
        bool all_present =
            std::all_of(class_present.begin(), class_present.end(), [](auto v) { return v; });
        if (!all_present) continue;  // fold stays flagged invalid

        OvoTrainOptions train_options;
        train_options.solve = options.solve;
        train_options.num_threads = options.num_threads;
        train_options.tag_base =
            combine_seed(options.tag_base, static_cast<std::uint64_t>(f));

        const std::vector<std::vector<double>>* warm_in = nullptr;
        if (warm) {
            auto& store = (*warm)[static_cast<std::size_t>(f)];
            if (store.size() != num_pairs)
                throw std::invalid_argument("warm store pair count mismatch");
            warm_in = &store;
            for (const auto& a : store)
                if (!a.empty()) ++result.warm_used;
        }

        OvoTrainResult trained =
            ovo_train(factor, labels, label_map, C, train_options, include, warm_in);

        result.binary_solves += static_cast<long long>(trained.reports.size());
        for (const SolveReport& rep : trained.reports) {
            result.fold_epochs[static_cast<std::size_t>(f)] += rep.epochs;
            result.total_epochs += rep.epochs;
        }

        // score the held-out rows on their precomputed G rows
        std::size_t held_out = 0, wrong = 0;
        std::vector<double> decisions(num_pairs);
        for (std::size_t r = 0; r < n; ++r) {
            if (folds.fold_of[r] != f) continue;
            ++held_out;
            const double* g_row = factor.G.row(r);
            for (std::size_t p = 0; p < num_pairs; ++p) {
                const double* w_row = trained.pair_w.row(p);
                double d = 0.0;
                for (std::size_t j = 0; j < trained.pair_w.cols(); ++j)
                    d += g_row[j] * w_row[j];
                decisions[p] = d;
            }
            double predicted =
                label_map.classes[static_cast<std::size_t>(vote(decisions, c))];
            if (predicted != labels[r]) ++wrong;
        }

        result.fold_valid[static_cast<std::size_t>(f)] = 1;
        result.fold_errors[static_cast<std::size_t>(f)] =
            held_out == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(held_out);
        result.fold_seconds[static_cast<std::size_t>(f)] = seconds_since(t0);

        if (warm) (*warm)[static_cast<std::size_t>(f)] = std::move(trained.pair_alpha);
    }

    double sum = 0.0;
    int valid = 0;
    for (int f = 0; f < k; ++f) {
        if (result.fold_valid[static_cast<std::size_t>(f)]) {
            sum += result.fold_errors[static_cast<std::size_t>(f)];
            ++valid;
        }
    }
    if (valid == 0) throw std::runtime_error("every fold was missing a class");
    result.mean_error = sum / valid;
    return result;
}

GridReport grid_search(const Dataset& data, std::span<const double> gamma_list,
                       std::span<const double> c_list, const GridOptions& options) {
    if (gamma_list.empty() || c_list.empty())
        throw std::invalid_argument("gamma and C lists must be non-empty");
    for (std::size_t i = 1; i < c_list.size(); ++i)
        if (!(c_list[i] > c_list[i - 1]))
            throw std::invalid_argument("C list must be strictly ascending");

    LabelMap label_map = build_label_map(data.labels);
    FoldAssignment folds =
        kfold_split(data.labels, options.folds, options.seed, options.stratified);
    const std::size_t c = label_map.num_classes();
    const std::size_t num_pairs = c * (c - 1) / 2;

    GridReport report;
    report.entries.reserve(gamma_list.size() * c_list.size());

    for (std::size_t gi = 0; gi < gamma_list.size(); ++gi) {
        KernelParams kernel{KernelKind::Gaussian, gamma_list[gi]};
        FactorOptions factor_options;
        factor_options.budget = options.budget;
        factor_options.tau_rel = options.tau_rel;
        factor_options.chunk_size = options.chunk_size;
        factor_options.num_threads = options.num_threads;
        factor_options.seed = options.seed;

        FactorTimings timings;
        LowRankFactor factor = build_factor(data, kernel, factor_options, &timings);
        ++report.stage1_runs;
        report.stage1_preparation_seconds += timings.preparation_seconds;
        report.stage1_gmatrix_seconds += timings.gmatrix_seconds;

        WarmStore warm = make_warm_store(options.folds, num_pairs);
        for (std::size_t ci = 0; ci < c_list.size(); ++ci) {
            CvOptions cv_options;
            cv_options.solve = options.solve;
            cv_options.num_threads = options.num_threads;
            cv_options.tag_base = combine_seed(options.seed, gi, ci);

            auto t0 = std::chrono::steady_clock::now();
            CvResult cv = cross_validate(factor, data.labels, label_map, folds, c_list[ci],
                                         cv_options, options.warm_starts ? &warm : nullptr);
            GridEntry entry;
            entry.gamma = gamma_list[gi];
            entry.C = c_list[ci];
            entry.mean_error = cv.mean_error;
            entry.fold_errors = cv.fold_errors;
            entry.fold_valid = cv.fold_valid;
            entry.fold_epochs = cv.fold_epochs;
            entry.fold_seconds = cv.fold_seconds;
            entry.epochs = cv.total_epochs;
            entry.seconds = seconds_since(t0);
            report.training_seconds += entry.seconds;
            report.binary_solves += cv.binary_solves;
            report.warm_started_solves += cv.warm_used;
            report.entries.push_back(std::move(entry));
        }
    }

    bool found = false;
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const GridEntry& e = report.entries[i];
        if (std::isnan(e.mean_error)) continue;
        if (!found) {
            report.best_index = i;
            found = true;
            continue;
        }
        const GridEntry& best = report.entries[report.best_index];
        if (e.mean_error < best.mean_error ||
            (e.mean_error == best.mean_error &&
             (e.C < best.C || (e.C == best.C && e.gamma < best.gamma))))
            report.best_index = i;
    }
    if (!found) throw std::runtime_error("no grid cell produced a valid estimate");
    return report;
}

}  // namespace lpdsvm
