#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lpdsvm/dataio.hpp"
#include "lpdsvm/factor.hpp"
#include "lpdsvm/multiclass.hpp"

namespace lpdsvm {

struct FoldAssignment {
    std::vector<int> fold_of;  // fold id in [0, k) per row
    int k = 0;
};

// Deterministic fold assignment; fold sizes differ by at most one. Stratified
// mode shuffles within each class and deals round robin across folds, keeping
// the per-class counts balanced too.
FoldAssignment kfold_split(std::span<const double> labels, int k, std::uint64_t seed,
                           bool stratified);

struct CvOptions {
    SolveOptions solve;
    int num_threads = 1;
    std::uint64_t tag_base = 0;
};

struct CvResult {
    double mean_error = 0.0;               // over valid folds
    std::vector<double> fold_errors;       // NaN for skipped folds
    std::vector<std::uint8_t> fold_valid;  // false when a class was missing
    std::vector<long long> fold_epochs;
    std::vector<double> fold_seconds;
    long long binary_solves = 0;
    long long total_epochs = 0;
    long long warm_used = 0;
};

// Per (fold, pair) dual variables, carried between successive C values.
using WarmStore = std::vector<std::vector<std::vector<double>>>;

WarmStore make_warm_store(int folds, std::size_t num_pairs);

// Trains one-vs-one models on each training split over the shared G and
// scores the held-out rows directly on their G rows; no kernel values are
// recomputed anywhere in this path.
CvResult cross_validate(const LowRankFactor& factor, std::span<const double> labels,
                        const LabelMap& label_map, const FoldAssignment& folds, double C,
                        const CvOptions& options, WarmStore* warm = nullptr);

struct GridEntry {
    double gamma = 0.0;
    double C = 0.0;
    double mean_error = 0.0;
    std::vector<double> fold_errors;
    std::vector<std::uint8_t> fold_valid;
    std::vector<long long> fold_epochs;
    std::vector<double> fold_seconds;
    long long epochs = 0;
    double seconds = 0.0;
};

struct GridOptions {
    std::size_t budget = 1000;
    double tau_rel = 1e-12;
    std::size_t chunk_size = 4096;
    int num_threads = 1;
    std::uint64_t seed = 1;
    int folds = 5;
    bool stratified = true;
    bool warm_starts = true;
    SolveOptions solve;
};

struct GridReport {
    std::vector<GridEntry> entries;  // gamma-major, C ascending within gamma
    std::size_t best_index = 0;      // min error; ties -> smaller C, then smaller gamma
    int stage1_runs = 0;             // factorizations performed; one per gamma
    long long binary_solves = 0;
    long long warm_started_solves = 0;
    double stage1_preparation_seconds = 0.0;
    double stage1_gmatrix_seconds = 0.0;
    double training_seconds = 0.0;
};

// Full (gamma, C) sweep with k-fold cross-validation. The factor is built
// once per gamma and shared by every C and fold; along the ascending C list
// each (fold, pair) sub-problem warm-starts from its solution at the
// previous C.
GridReport grid_search(const Dataset& data, std::span<const double> gamma_list,
                       std::span<const double> c_list, const GridOptions& options);

}  // namespace lpdsvm
