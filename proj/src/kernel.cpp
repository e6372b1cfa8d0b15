#include "lpdsvm/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "lpdsvm/parallel.hpp"

namespace lpdsvm {

void validate(const KernelParams& params) {
    if (params.kind != KernelKind::Gaussian)
        throw std::invalid_argument("unsupported kernel kind");
    if (!(params.gamma > 0.0) || !std::isfinite(params.gamma))
        throw std::invalid_argument("kernel gamma must be positive and finite");
}

double gaussian(const SparseVector& a, const SparseVector& b, const KernelParams& params) {
    return std::exp(-params.gamma * squared_distance(a, b));
}

std::vector<double> squared_norms(std::span<const SparseVector> points) {
    std::vector<double> norms(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) norms[i] = squared_norm(points[i]);
    return norms;
}

namespace {
constexpr std::size_t kRowChunk = 64;
}

Matrix kernel_block(std::span<const SparseVector> rows_a, std::span<const double> norms_a,
                    std::span<const SparseVector> rows_b, std::span<const double> norms_b,
                    const KernelParams& params, int num_threads) {
    validate(params);
    const std::size_t m = rows_a.size();
    const std::size_t n = rows_b.size();
    Matrix block(m, n);
    const double gamma = params.gamma;

    const std::size_t num_chunks = (m + kRowChunk - 1) / kRowChunk;
    parallel_for(num_chunks, num_threads, [&](std::size_t chunk) {
        const std::size_t begin = chunk * kRowChunk;
        const std::size_t end = std::min(begin + kRowChunk, m);
        for (std::size_t i = begin; i < end; ++i) {
            double* out = block.row(i);
            const SparseVector& a = rows_a[i];
            const double na = norms_a[i];
            for (std::size_t j = 0; j < n; ++j) {
                // clamp at 0: cancellation may push the expansion negative
                double d2 = na + norms_b[j] - 2.0 * dot(a, rows_b[j]);
                if (d2 < 0.0) d2 = 0.0;
                out[j] = std::exp(-gamma * d2);
            }
        }
    });
    return block;
}

Matrix kernel_block(std::span<const SparseVector> rows_a,
                    std::span<const SparseVector> rows_b,
                    const KernelParams& params, int num_threads) {
    std::vector<double> norms_a = squared_norms(rows_a);
    std::vector<double> norms_b = squared_norms(rows_b);
    return kernel_block(rows_a, norms_a, rows_b, norms_b, params, num_threads);
}

}  // namespace lpdsvm
