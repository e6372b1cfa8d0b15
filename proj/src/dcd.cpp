#include "lpdsvm/dcd.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lpdsvm/rng.hpp"

namespace lpdsvm {

namespace {

// Rows of G can be numerically zero after spectral truncation; treat their
// Newton step as infinite in the direction of the gradient.
constexpr double kDegenerateDiag = 1e-12;

using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

struct StepOutcome {
    double delta;
    double gradient;
};

inline StepOutcome step(std::size_t i, DualState& state, const BinaryProblem& problem,
                        const Matrix& G) {
    const double* row = G.row(static_cast<std::size_t>(problem.row_ids[i]));
    ConstVecMap g_row(row, static_cast<Eigen::Index>(G.cols()));
    VecMap w(state.w.data(), static_cast<Eigen::Index>(state.w.size()));

    const double y = problem.y[i];
    const double gradient = 1.0 - y * g_row.dot(w);
    const double a = state.alpha[i];
    const double q = problem.q_diag[i];

    double a_new;
    if (q <= kDegenerateDiag) {
        a_new = gradient > 0.0 ? problem.C : (gradient < 0.0 ? 0.0 : a);
    } else {
        a_new = a + gradient / q;
        if (a_new < 0.0)
            a_new = 0.0;
        else if (a_new > problem.C)
            a_new = problem.C;
    }

    const double delta = a_new - a;
    if (delta != 0.0) {
        state.alpha[i] = a_new;
        w += (delta * y) * g_row;
    }
    return {delta, gradient};
}

}  // namespace

BinaryProblem make_binary_problem(const Matrix& G, std::vector<int> row_ids,
                                  std::vector<double> y, double C) {
    if (row_ids.size() != y.size())
        throw std::invalid_argument("row_ids and y must have equal length");
    if (row_ids.empty()) throw std::invalid_argument("empty binary problem");
    if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive");

    bool pos = false, neg = false;
    for (double v : y) {
        if (v == 1.0)
            pos = true;
        else if (v == -1.0)
            neg = true;
        else
            throw std::invalid_argument("labels must be +1 or -1");
    }
    if (!pos || !neg) throw std::invalid_argument("binary problem needs both classes");

    BinaryProblem problem;
    problem.row_ids = std::move(row_ids);
    problem.y = std::move(y);
    problem.C = C;
    problem.q_diag.resize(problem.row_ids.size());
    for (std::size_t i = 0; i < problem.row_ids.size(); ++i) {
        ConstVecMap row(G.row(static_cast<std::size_t>(problem.row_ids[i])),
                        static_cast<Eigen::Index>(G.cols()));
        problem.q_diag[i] = row.squaredNorm();
    }
    return problem;
}

std::vector<double> rebuild_w(const BinaryProblem& problem, const Matrix& G,
                              std::span<const double> alpha) {
    std::vector<double> w(G.cols(), 0.0);
    VecMap w_map(w.data(), static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < problem.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        ConstVecMap row(G.row(static_cast<std::size_t>(problem.row_ids[i])),
                        static_cast<Eigen::Index>(G.cols()));
        w_map += (alpha[i] * problem.y[i]) * row;
    }
    return w;
}

double dual_objective(std::span<const double> alpha, std::span<const double> w) {
    double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    ConstVecMap w_map(w.data(), static_cast<Eigen::Index>(w.size()));
    return sum - 0.5 * w_map.squaredNorm();
}

DualState make_state(const BinaryProblem& problem, const Matrix& G,
                     std::span<const double> warm_alpha) {
    const std::size_t m = problem.size();
    DualState state;
    state.alpha.assign(m, 0.0);
    if (!warm_alpha.empty()) {
        if (warm_alpha.size() != m)
            throw std::invalid_argument("warm alpha length does not match problem");
        for (std::size_t i = 0; i < m; ++i)
            state.alpha[i] = std::clamp(warm_alpha[i], 0.0, problem.C);
        state.w = rebuild_w(problem, G, state.alpha);
    } else {
        state.w.assign(G.cols(), 0.0);
    }
    state.active.assign(m, 1);
    state.stall.assign(m, 0);
    state.active_count = m;
    return state;
}

double coordinate_step(std::size_t i, DualState& state, const BinaryProblem& problem,
                       const Matrix& G) {
    return step(i, state, problem, G).delta;
}

bool shrink_rule(std::size_t i, double delta, const BinaryProblem& problem, DualState& state,
                 int stall_limit) {
    const double a = state.alpha[i];
    if (delta == 0.0 && (a == 0.0 || a == problem.C)) {
        if (++state.stall[i] >= stall_limit) {
            state.active[i] = 0;
            --state.active_count;
            return false;
        }
    } else {
        state.stall[i] = 0;
    }
    return true;
}

std::size_t reactivation_pass(DualState& state, const BinaryProblem& problem, const Matrix& G,
                              double eps, SolveReport* report, double* max_violation) {
    std::size_t reactivated = 0;
    double worst = 0.0;
    ConstVecMap w(state.w.data(), static_cast<Eigen::Index>(state.w.size()));
    for (std::size_t i = 0; i < problem.size(); ++i) {
        if (state.active[i]) continue;
        ConstVecMap row(G.row(static_cast<std::size_t>(problem.row_ids[i])),
                        static_cast<Eigen::Index>(G.cols()));
        const double gradient = 1.0 - problem.y[i] * row.dot(w);
        const double v = projected_violation(gradient, state.alpha[i], problem.C);
        if (report) ++report->coordinate_visits;
        if (v > worst) worst = v;
        if (v >= eps) {
            state.active[i] = 1;
            state.stall[i] = 0;
            ++state.active_count;
            ++reactivated;
        }
    }
    if (max_violation) *max_violation = worst;
    return reactivated;
}

double run_epoch(DualState& state, const BinaryProblem& problem, const Matrix& G,
                 std::uint64_t order_seed, const SolveOptions& options, SolveReport& report,
                 std::vector<std::size_t>* visit_order) {
    std::vector<std::size_t> order;
    order.reserve(state.active_count);
    for (std::size_t i = 0; i < problem.size(); ++i)
        if (state.active[i]) order.push_back(i);
    Rng rng(order_seed);
    rng.shuffle(order);

    const double one_minus_eta = 1.0 - options.eta;
    double max_violation = 0.0;
    for (std::size_t i : order) {
        const double alpha_before = state.alpha[i];
        StepOutcome outcome = step(i, state, problem, G);
        const double v = projected_violation(outcome.gradient, alpha_before, problem.C);
        if (v > max_violation) max_violation = v;
        ++report.coordinate_visits;
        if (visit_order) visit_order->push_back(i);

        if (options.shrinking) {
            shrink_rule(i, outcome.delta, problem, state, options.stall_limit);
            report.shrunk_peak =
                std::max(report.shrunk_peak, problem.size() - state.active_count);

            ++state.steps_since_reactivation;
            const std::size_t inactive = problem.size() - state.active_count;
            if (inactive > 0 &&
                static_cast<double>(state.steps_since_reactivation) * options.eta >=
                    one_minus_eta * static_cast<double>(inactive)) {
                reactivation_pass(state, problem, G, options.eps, &report);
                state.steps_since_reactivation = 0;
            }
        }
    }
    return max_violation;
}

SolveResult solve_binary(const BinaryProblem& problem, const Matrix& G,
                         const SolveOptions& options, std::span<const double> warm_alpha) {
    if (!(options.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (options.max_epochs < 1) throw std::invalid_argument("max_epochs must be positive");
    if (options.stall_limit < 1) throw std::invalid_argument("stall limit must be positive");
    if (!(options.eta > 0.0) || !(options.eta < 1.0))
        throw std::invalid_argument("eta must be in (0, 1)");

    DualState state = make_state(problem, G, warm_alpha);
    SolveReport report;
    double last_violation = std::numeric_limits<double>::infinity();

    while (report.epochs < options.max_epochs) {
        if (state.active_count == 0) {
            double worst = 0.0;
            std::size_t reactivated =
                reactivation_pass(state, problem, G, options.eps, &report, &worst);
            state.steps_since_reactivation = 0;
            if (reactivated == 0) {
                report.converged = true;
                report.final_violation = worst;
                break;
            }
            continue;
        }

        const std::uint64_t order_seed = combine_seed(
            options.seed, options.problem_tag, static_cast<std::uint64_t>(report.epochs));
        last_violation = run_epoch(state, problem, G, order_seed, options, report);
        ++report.epochs;

        if (last_violation < options.eps) {
            double worst = 0.0;
            std::size_t reactivated =
                reactivation_pass(state, problem, G, options.eps, &report, &worst);
            state.steps_since_reactivation = 0;
            if (reactivated == 0) {
                report.converged = true;
                report.final_violation = std::max(last_violation, worst);
                break;
            }
        }
    }

    if (!report.converged) report.final_violation = last_violation;
    report.dual_objective = dual_objective(state.alpha, state.w);
    return {std::move(state.alpha), std::move(state.w), report};
}

}  // namespace lpdsvm
