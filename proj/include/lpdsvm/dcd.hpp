#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "lpdsvm/matrix.hpp"

namespace lpdsvm {

// One binary sub-problem over a subset of the rows of G:
//   max_{0 <= alpha <= C}  sum(alpha) - 0.5 ||sum_i alpha_i y_i G_i||^2
struct BinaryProblem {
    std::vector<int> row_ids;    // rows of G participating in this problem
    std::vector<double> y;       // +1/-1 per participating row
    double C = 1.0;
    std::vector<double> q_diag;  // ||G_i||^2 per participating row

    std::size_t size() const { return row_ids.size(); }
};

// Builds the problem and its diagonal; throws unless both labels occur and
// C is positive.
BinaryProblem make_binary_problem(const Matrix& G, std::vector<int> row_ids,
                                  std::vector<double> y, double C);

struct SolveOptions {
    double eps = 1e-3;          // stopping tolerance on the projected gradient
    long long max_epochs = 1000;
    bool shrinking = true;
    int stall_limit = 5;        // consecutive stalled visits before shrinking
    double eta = 0.05;          // fraction of visits spent re-checking shrunk variables
    std::uint64_t seed = 1;
    std::uint64_t problem_tag = 0;  // disambiguates epoch orders across sub-problems
};

struct SolveReport {
    long long epochs = 0;
    long long coordinate_visits = 0;  // active visits plus reactivation checks
    double final_violation = std::numeric_limits<double>::infinity();
    double dual_objective = 0.0;
    std::size_t shrunk_peak = 0;
    bool converged = false;
};

struct DualState {
    std::vector<double> alpha;         // in [0, C], one per problem row
    std::vector<double> w;             // weight vector in factor space (B_eff)
    std::vector<std::uint8_t> active;
    std::vector<int> stall;            // consecutive zero-update counts
    std::size_t active_count = 0;
    long long steps_since_reactivation = 0;
};

// Fresh state; a warm alpha is clipped into [0, C] and w rebuilt from it.
DualState make_state(const BinaryProblem& problem, const Matrix& G,
                     std::span<const double> warm_alpha = {});

std::vector<double> rebuild_w(const BinaryProblem& problem, const Matrix& G,
                              std::span<const double> alpha);

// sum(alpha) - 0.5 ||w||^2; valid because Q = G G^T on the problem rows.
double dual_objective(std::span<const double> alpha, std::span<const double> w);

// Optimality residual of one variable respecting the box.
inline double projected_violation(double gradient, double alpha, double c) {
    if (alpha <= 0.0) return gradient > 0.0 ? gradient : 0.0;
    if (alpha >= c) return -gradient > 0.0 ? -gradient : 0.0;
    return gradient < 0.0 ? -gradient : gradient;
}

// Truncated Newton update of variable i (local index); updates alpha and w,
// returns the applied change.
double coordinate_step(std::size_t i, DualState& state, const BinaryProblem& problem,
                       const Matrix& G);

// Stall bookkeeping after a visit: counts consecutive zero updates at the
// bounds and deactivates the variable once stall_limit is reached. Returns
// whether the variable stays active.
bool shrink_rule(std::size_t i, double delta, const BinaryProblem& problem,
                 DualState& state, int stall_limit);

// Checks every inactive variable and reactivates those violating optimality
// by at least eps. Checks are charged to report's visit counter when given;
// max_violation (if given) receives the largest violation seen.
std::size_t reactivation_pass(DualState& state, const BinaryProblem& problem, const Matrix& G,
                              double eps, SolveReport* report = nullptr,
                              double* max_violation = nullptr);

// One pass over the active set in a freshly shuffled order; returns the
// largest pre-update violation seen. Schedules reactivation passes out of the
// eta budget when shrinking is on. visit_order (if given) receives the local
// indices in visit order.
double run_epoch(DualState& state, const BinaryProblem& problem, const Matrix& G,
                 std::uint64_t order_seed, const SolveOptions& options, SolveReport& report,
                 std::vector<std::size_t>* visit_order = nullptr);

struct SolveResult {
    std::vector<double> alpha;
    std::vector<double> w;
    SolveReport report;
};

// Runs epochs until the largest violation over all variables (shrunk ones
// included, via a final reactivation pass) drops below eps, or max_epochs is
// hit (the result is then flagged as not converged).
SolveResult solve_binary(const BinaryProblem& problem, const Matrix& G,
                         const SolveOptions& options,
                         std::span<const double> warm_alpha = {});

}  // namespace lpdsvm
