#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lpdsvm/dataio.hpp"
#include "lpdsvm/kernel.hpp"
#include "lpdsvm/matrix.hpp"

namespace lpdsvm {

// Eigendecomposition of a symmetric matrix, eigenvalues descending.
// eigenvectors holds the orthonormal eigenvectors as columns, column j
// belonging to eigenvalues[j].
struct Spectrum {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

// The precomputed representation shared by all downstream training: the
// landmark points, the whitening factor L (budget x effective rank) and the
// feature matrix G (n x effective rank) with G G^T approximating the kernel
// matrix on the data.
struct LowRankFactor {
    std::vector<int> landmark_ids;        // row indices the landmarks came from
    std::vector<SparseVector> landmarks;  // the landmark points themselves
    Matrix L;                             // B x B_eff
    Matrix G;                             // n x B_eff
    int b_eff = 0;
    KernelParams kernel;
};

// min(budget, n) distinct row indices drawn uniformly without replacement.
std::vector<int> select_landmarks(std::size_t n, std::size_t budget, std::uint64_t seed);

// Symmetric eigendecomposition; the input is symmetrized as (K + K^T)/2 to
// absorb floating-point asymmetry. Throws std::runtime_error if the solver
// fails to converge.
Spectrum eig_sym(const Matrix& K);

// Indices of eigenvalues strictly above tau_rel * lambda_max. Throws if the
// largest eigenvalue is not positive.
std::vector<int> truncate_spectrum(const Spectrum& spectrum, double tau_rel);

// Column j of the result is eigenvector retained[j] scaled by
// 1/sqrt(eigenvalue). All retained eigenvalues must be positive.
Matrix build_L(const Spectrum& spectrum, std::span<const int> retained);

// G = Z * L with Z[i][j] = k(points[i], landmarks[j]), computed in row chunks
// of at most chunk_size so peak extra memory stays chunk-bounded.
Matrix compute_G(std::span<const SparseVector> points, std::span<const double> norms,
                 std::span<const SparseVector> landmarks, std::span<const double> landmark_norms,
                 const Matrix& L, const KernelParams& params,
                 std::size_t chunk_size, int num_threads = 1);

struct FactorOptions {
    std::size_t budget = 1000;
    double tau_rel = 1e-12;
    std::size_t chunk_size = 4096;
    int num_threads = 1;
    std::uint64_t seed = 1;
};

struct FactorTimings {
    double preparation_seconds = 0.0;  // landmark kernel matrix, eigs, L
    double gmatrix_seconds = 0.0;      // Z and G = Z L
};

LowRankFactor build_factor(const Dataset& data, const KernelParams& params,
                           const FactorOptions& options, FactorTimings* timings = nullptr);

// Same pipeline with a caller-fixed landmark set (landmark_ids may be empty
// when the landmarks did not come from this dataset).
LowRankFactor build_factor_with_landmarks(std::span<const SparseVector> points,
                                          std::vector<SparseVector> landmarks,
                                          std::vector<int> landmark_ids,
                                          const KernelParams& params,
                                          const FactorOptions& options,
                                          FactorTimings* timings = nullptr);

}  // namespace lpdsvm
