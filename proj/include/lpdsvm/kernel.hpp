#pragma once

#include <span>
#include <vector>

#include "lpdsvm/dataio.hpp"
#include "lpdsvm/matrix.hpp"

namespace lpdsvm {

enum class KernelKind { Gaussian };

struct KernelParams {
    KernelKind kind = KernelKind::Gaussian;
    double gamma = 1.0;
};

// Throws std::invalid_argument unless gamma is positive and finite.
void validate(const KernelParams& params);

// exp(-gamma * ||a-b||^2), always in (0, 1].
double gaussian(const SparseVector& a, const SparseVector& b, const KernelParams& params);

std::vector<double> squared_norms(std::span<const SparseVector> points);

// block[i][j] = k(rows_a[i], rows_b[j]). Uses the expansion
// ||a-b||^2 = ||a||^2 + ||b||^2 - 2<a,b> over the precomputed norms so the
// inner loop is a sparse dot product; rows are processed in fixed-size chunks
// that parallelize without affecting the result bitwise.
Matrix kernel_block(std::span<const SparseVector> rows_a, std::span<const double> norms_a,
                    std::span<const SparseVector> rows_b, std::span<const double> norms_b,
                    const KernelParams& params, int num_threads = 1);

// Convenience overload that computes the norms itself.
Matrix kernel_block(std::span<const SparseVector> rows_a,
                    std::span<const SparseVector> rows_b,
                    const KernelParams& params, int num_threads = 1);

}  // namespace lpdsvm
