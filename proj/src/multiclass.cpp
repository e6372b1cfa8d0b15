#include "lpdsvm/multiclass.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <stdexcept>

#include "lpdsvm/parallel.hpp"
#include "lpdsvm/rng.hpp"

namespace lpdsvm {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMapRowMajor = Eigen::Map<const EigenRowMajor>;
using MapRowMajor = Eigen::Map<EigenRowMajor>;

constexpr std::size_t kPredictChunk = 256;

}  // namespace

std::vector<std::pair<int, int>> ovo_pairs(std::size_t num_classes) {
    if (num_classes < 2) throw std::invalid_argument("need at least two classes");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(num_classes * (num_classes - 1) / 2);
    for (std::size_t a = 0; a < num_classes; ++a)
        for (std::size_t b = a + 1; b < num_classes; ++b)
            pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    return pairs;
}

std::vector<PairSpec> make_pair_specs(std::span<const double> raw_labels,
                                      const LabelMap& label_map,
                                      std::span<const std::uint8_t> include) {
    if (!include.empty() && include.size() != raw_labels.size())
        throw std::invalid_argument("include mask length does not match labels");

    const std::size_t c = label_map.num_classes();
    auto pair_ids = ovo_pairs(c);
    std::vector<PairSpec> specs(pair_ids.size());
    for (std::size_t p = 0; p < pair_ids.size(); ++p) {
        specs[p].class_a = pair_ids[p].first;
        specs[p].class_b = pair_ids[p].second;
    }

    // pair (a,b) with a < b lives at index a*c - a*(a+1)/2 + (b - a - 1)
    auto pair_index = [c](int a, int b) {
        return static_cast<std::size_t>(a) * c -
               static_cast<std::size_t>(a) * (a + 1) / 2 + static_cast<std::size_t>(b - a - 1);
    };

    for (std::size_t r = 0; r < raw_labels.size(); ++r) {
        if (!include.empty() && !include[r]) continue;
        int ci = label_map.index_of(raw_labels[r]);
        if (ci < 0) throw std::invalid_argument("label not present in label map");
        for (std::size_t other = 0; other < c; ++other) {
            if (static_cast<int>(other) == ci) continue;
            int a = std::min(ci, static_cast<int>(other));
            int b = std::max(ci, static_cast<int>(other));
            PairSpec& spec = specs[pair_index(a, b)];
            spec.row_ids.push_back(static_cast<int>(r));
            spec.y.push_back(ci == a ? 1.0 : -1.0);
        }
    }
    return specs;
}

OvoTrainResult ovo_train(const LowRankFactor& factor, std::span<const double> raw_labels,
                         const LabelMap& label_map, double C, const OvoTrainOptions& options,
                         std::span<const std::uint8_t> include_rows,
                         const std::vector<std::vector<double>>* warm_alpha) {
    if (raw_labels.size() != factor.G.rows())
        throw std::invalid_argument("label count does not match G");
    if (label_map.num_classes() < 2) throw std::invalid_argument("need at least two classes");

    std::vector<PairSpec> pairs = make_pair_specs(raw_labels, label_map, include_rows);
    for (const PairSpec& spec : pairs) {
        bool has_a = false, has_b = false;
        for (double v : spec.y) (v > 0 ? has_a : has_b) = true;
        if (!has_a || !has_b)
            throw std::invalid_argument("every class needs at least one training point");
    }
    if (warm_alpha && warm_alpha->size() != pairs.size())
        throw std::invalid_argument("warm-start store does not match pair count");

    const std::size_t num_pairs = pairs.size();
    const std::size_t b = factor.landmarks.size();
    const std::size_t b_eff = factor.L.cols();

    OvoTrainResult result;
    result.pairs = pairs;
    result.pair_w = Matrix(num_pairs, b_eff);
    result.pair_alpha.resize(num_pairs);
    result.reports.resize(num_pairs);

    OvoModel& model = result.model;
    model.label_map = label_map;
    model.kernel = factor.kernel;
    model.landmarks = factor.landmarks;
    model.L = factor.L;
    model.betas = Matrix(num_pairs, b);
    model.C = C;
    model.eps = options.solve.eps;
    model.seed = options.solve.seed;
    model.pair_converged.assign(num_pairs, 0);

    ConstMapRowMajor l_map(factor.L.data(), static_cast<Eigen::Index>(b),
                           static_cast<Eigen::Index>(b_eff));

    parallel_for(num_pairs, options.num_threads, [&](std::size_t p) {
        BinaryProblem problem = make_binary_problem(
            factor.G, result.pairs[p].row_ids, result.pairs[p].y, C);
        SolveOptions solve = options.solve;
        solve.problem_tag = combine_seed(options.tag_base, static_cast<std::uint64_t>(p));

        std::span<const double> warm;
        if (warm_alpha && !(*warm_alpha)[p].empty()) warm = (*warm_alpha)[p];
        SolveResult solved = solve_binary(problem, factor.G, solve, warm);

        Eigen::Map<const Eigen::VectorXd> w_map(solved.w.data(),
                                                static_cast<Eigen::Index>(b_eff));
        Eigen::Map<Eigen::VectorXd> beta_map(model.betas.row(p),
                                             static_cast<Eigen::Index>(b));
        beta_map.noalias() = l_map * w_map;

        std::copy(solved.w.begin(), solved.w.end(), result.pair_w.row(p));
        result.pair_alpha[p] = std::move(solved.alpha);
        result.reports[p] = solved.report;
        model.pair_converged[p] = solved.report.converged ? 1 : 0;
    });

    return result;
}

std::vector<double> decision_values(const OvoModel& model, const SparseVector& point) {
    const std::size_t b = model.landmarks.size();
    std::vector<double> z(b);
    for (std::size_t j = 0; j < b; ++j)
        z[j] = gaussian(point, model.landmarks[j], model.kernel);

    std::vector<double> decisions(model.num_pairs());
    Eigen::Map<const Eigen::VectorXd> z_map(z.data(), static_cast<Eigen::Index>(b));
    for (std::size_t p = 0; p < decisions.size(); ++p) {
        Eigen::Map<const Eigen::VectorXd> beta(model.betas.row(p),
                                               static_cast<Eigen::Index>(b));
        decisions[p] = z_map.dot(beta);
    }
    return decisions;
}

int vote(std::span<const double> decisions, std::size_t num_classes) {
    std::vector<int> votes(num_classes, 0);
    std::size_t p = 0;
    for (std::size_t a = 0; a < num_classes; ++a) {
        for (std::size_t b = a + 1; b < num_classes; ++b, ++p) {
            if (decisions[p] > 0.0)
                ++votes[a];
            else
                ++votes[b];
        }
    }
    int best = 0;
    for (std::size_t c = 1; c < num_classes; ++c)
        if (votes[c] > votes[best]) best = static_cast<int>(c);
    return best;
}

std::vector<double> ovo_predict(const OvoModel& model, std::span<const SparseVector> points,
                                int num_threads) {
    const std::size_t n = points.size();
    const std::size_t b = model.landmarks.size();
    const std::size_t num_pairs = model.num_pairs();
    const std::size_t c = model.num_classes();
    std::vector<double> predictions(n);

    std::vector<double> landmark_norms = squared_norms(model.landmarks);
    std::vector<double> point_norms = squared_norms(points);
    ConstMapRowMajor betas(model.betas.data(), static_cast<Eigen::Index>(num_pairs),
                           static_cast<Eigen::Index>(b));

    const std::size_t num_chunks = (n + kPredictChunk - 1) / kPredictChunk;
    parallel_for(num_chunks, num_threads, [&](std::size_t chunk) {
        const std::size_t begin = chunk * kPredictChunk;
        const std::size_t rows = std::min(kPredictChunk, n - begin);
        Matrix Z = kernel_block(points.subspan(begin, rows),
                                std::span<const double>(point_norms).subspan(begin, rows),
                                model.landmarks, landmark_norms, model.kernel, 1);
        ConstMapRowMajor z_map(Z.data(), static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(b));
        EigenRowMajor decisions = z_map * betas.transpose();  // rows x num_pairs
        for (std::size_t i = 0; i < rows; ++i) {
            std::span<const double> row(decisions.data() + i * num_pairs, num_pairs);
            predictions[begin + i] = model.label_map.classes[static_cast<std::size_t>(
                vote(row, c))];
        }
    });
    return predictions;
}

}  // namespace lpdsvm
