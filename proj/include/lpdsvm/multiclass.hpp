#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lpdsvm/dataio.hpp"
#include "lpdsvm/dcd.hpp"
#include "lpdsvm/factor.hpp"

namespace lpdsvm {

// One class pair (a < b); points of class a get label +1.
struct PairSpec {
    int class_a = 0;
    int class_b = 0;
    std::vector<int> row_ids;
    std::vector<double> y;
};

// All c*(c-1)/2 pairs in lexicographic order.
std::vector<std::pair<int, int>> ovo_pairs(std::size_t num_classes);

// Pair sub-problems over the rows whose include flag is set (empty include
// means all rows). Pairs may come back with one side empty; callers decide
// whether that is an error (training) or a skip (cross-validation folds).
std::vector<PairSpec> make_pair_specs(std::span<const double> raw_labels,
                                      const LabelMap& label_map,
                                      std::span<const std::uint8_t> include = {});

// Everything prediction needs: kernels to the landmarks plus one coefficient
// vector per class pair in landmark space (beta = L w).
struct OvoModel {
    LabelMap label_map;
    KernelParams kernel;
    std::vector<SparseVector> landmarks;
    Matrix L;      // B x B_eff, kept for factor reuse
    Matrix betas;  // num_pairs x B, lexicographic pair order
    double C = 1.0;
    double eps = 1e-3;
    std::uint64_t seed = 1;
    std::vector<std::uint8_t> pair_converged;

    std::size_t num_classes() const { return label_map.num_classes(); }
    std::size_t num_pairs() const { return betas.rows(); }
    std::size_t budget() const { return landmarks.size(); }
};

struct OvoTrainOptions {
    SolveOptions solve;
    int num_threads = 1;
    std::uint64_t tag_base = 0;  // namespaces the per-pair rng streams
};

struct OvoTrainResult {
    OvoModel model;
    std::vector<PairSpec> pairs;
    Matrix pair_w;  // num_pairs x B_eff, the factor-space weight per pair
    std::vector<std::vector<double>> pair_alpha;
    std::vector<SolveReport> reports;
};

// Trains every class pair on its row subset of factor.G. Pair problems run
// as a task pool; results land in pre-assigned slots so the outcome does not
// depend on the number of workers. Pairs that hit the epoch cap are flagged,
// not fatal.
OvoTrainResult ovo_train(const LowRankFactor& factor, std::span<const double> raw_labels,
                         const LabelMap& label_map, double C, const OvoTrainOptions& options,
                         std::span<const std::uint8_t> include_rows = {},
                         const std::vector<std::vector<double>>* warm_alpha = nullptr);

// Per-pair decision values <z(x), beta> with z(x)_j = k(x, landmark_j).
std::vector<double> decision_values(const OvoModel& model, const SparseVector& point);

// Majority vote over pairs; a strictly positive decision votes for class_a,
// anything else for class_b; ties go to the smaller class index.
int vote(std::span<const double> decisions, std::size_t num_classes);

// Predicted raw labels, in input order.
std::vector<double> ovo_predict(const OvoModel& model, std::span<const SparseVector> points,
                                int num_threads = 1);

}  // namespace lpdsvm
