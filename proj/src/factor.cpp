#include "lpdsvm/factor.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "lpdsvm/parallel.hpp"
#include "lpdsvm/rng.hpp"

namespace lpdsvm {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRowMajor = Eigen::Map<EigenRowMajor>;
using ConstMapRowMajor = Eigen::Map<const EigenRowMajor>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<int> select_landmarks(std::size_t n, std::size_t budget, std::uint64_t seed) {
    if (budget == 0) throw std::invalid_argument("landmark budget must be positive");
    if (n == 0) throw std::invalid_argument("cannot sample landmarks from an empty dataset");
    return sample_without_replacement(n, budget, combine_seed(seed, 0x1a2dULL));
}

Spectrum eig_sym(const Matrix& K) {
    if (K.rows() != K.cols()) throw std::invalid_argument("eig_sym needs a square matrix");
    const auto b = static_cast<Eigen::Index>(K.rows());

    ConstMapRowMajor k_map(K.data(), b, b);
    Eigen::MatrixXd sym = 0.5 * (k_map + k_map.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("symmetric eigendecomposition did not converge");

    // Eigen returns ascending order; flip to descending.
    Spectrum spectrum;
    spectrum.eigenvalues.resize(static_cast<std::size_t>(b));
    spectrum.eigenvectors = Matrix(K.rows(), K.cols());
    MapRowMajor u_map(spectrum.eigenvectors.data(), b, b);
    for (Eigen::Index j = 0; j < b; ++j) {
        spectrum.eigenvalues[static_cast<std::size_t>(j)] = solver.eigenvalues()(b - 1 - j);
        u_map.col(j) = solver.eigenvectors().col(b - 1 - j);
    }
    return spectrum;
}

std::vector<int> truncate_spectrum(const Spectrum& spectrum, double tau_rel) {
    if (spectrum.eigenvalues.empty()) throw std::invalid_argument("empty spectrum");
    const double lambda_max = spectrum.eigenvalues.front();
    if (!(lambda_max > 0.0))
        throw std::runtime_error("kernel matrix has no positive eigenvalue");
    const double threshold = tau_rel * lambda_max;
    std::vector<int> retained;
    for (std::size_t j = 0; j < spectrum.eigenvalues.size(); ++j)
        if (spectrum.eigenvalues[j] > threshold) retained.push_back(static_cast<int>(j));
    return retained;
}

Matrix build_L(const Spectrum& spectrum, std::span<const int> retained) {
    const std::size_t b = spectrum.eigenvectors.rows();
    Matrix L(b, retained.size());
    for (std::size_t jc = 0; jc < retained.size(); ++jc) {
        const auto j = static_cast<std::size_t>(retained[jc]);
        const double lambda = spectrum.eigenvalues[j];
        if (!(lambda > 0.0))
            throw std::invalid_argument("retained eigenvalue must be positive");
        const double inv_sqrt = 1.0 / std::sqrt(lambda);
        for (std::size_t i = 0; i < b; ++i)
            L(i, jc) = spectrum.eigenvectors(i, j) * inv_sqrt;
    }
    return L;
}

Matrix compute_G(std::span<const SparseVector> points, std::span<const double> norms,
                 std::span<const SparseVector> landmarks, std::span<const double> landmark_norms,
                 const Matrix& L, const KernelParams& params,
                 std::size_t chunk_size, int num_threads) {
    if (chunk_size == 0) throw std::invalid_argument("chunk_size must be positive");
    const std::size_t n = points.size();
    const std::size_t b = landmarks.size();
    const std::size_t b_eff = L.cols();
    if (L.rows() != b) throw std::invalid_argument("L row count must match landmark count");

    Matrix G(n, b_eff);
    ConstMapRowMajor l_map(L.data(), static_cast<Eigen::Index>(b),
                           static_cast<Eigen::Index>(b_eff));

    const std::size_t num_chunks = (n + chunk_size - 1) / chunk_size;
    parallel_for(num_chunks, num_threads, [&](std::size_t chunk) {
        const std::size_t begin = chunk * chunk_size;
        const std::size_t rows = std::min(chunk_size, n - begin);
        Matrix Z = kernel_block(points.subspan(begin, rows), norms.subspan(begin, rows),
                                landmarks, landmark_norms, params, 1);
        ConstMapRowMajor z_map(Z.data(), static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(b));
        MapRowMajor g_map(G.row(begin), static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(b_eff));
        g_map.noalias() = z_map * l_map;
    });
    return G;
}

LowRankFactor build_factor_with_landmarks(std::span<const SparseVector> points,
                                          std::vector<SparseVector> landmarks,
                                          std::vector<int> landmark_ids,
                                          const KernelParams& params,
                                          const FactorOptions& options,
                                          FactorTimings* timings) {
    validate(params);
    auto t0 = std::chrono::steady_clock::now();

    std::vector<double> landmark_norms = squared_norms(landmarks);
    Matrix K = kernel_block(landmarks, landmark_norms, landmarks, landmark_norms, params,
                            options.num_threads);
    Spectrum spectrum = eig_sym(K);
    std::vector<int> retained = truncate_spectrum(spectrum, options.tau_rel);
    Matrix L = build_L(spectrum, retained);
    if (timings) timings->preparation_seconds = seconds_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    std::vector<double> norms = squared_norms(points);
    Matrix G = compute_G(points, norms, landmarks, landmark_norms, L, params,
                         options.chunk_size, options.num_threads);
    if (timings) timings->gmatrix_seconds = seconds_since(t1);

    LowRankFactor factor;
    factor.landmark_ids = std::move(landmark_ids);
    factor.landmarks = std::move(landmarks);
    factor.b_eff = static_cast<int>(retained.size());
    factor.L = std::move(L);
    factor.G = std::move(G);
    factor.kernel = params;
    return factor;
}

LowRankFactor build_factor(const Dataset& data, const KernelParams& params,
                           const FactorOptions& options, FactorTimings* timings) {
    std::vector<int> ids = select_landmarks(data.size(), options.budget, options.seed);
    std::vector<SparseVector> landmarks;
    landmarks.reserve(ids.size());
    for (int id : ids) landmarks.push_back(data.points[static_cast<std::size_t>(id)]);
    return build_factor_with_landmarks(data.points, std::move(landmarks), std::move(ids),
                                       params, options, timings);
}

}  // namespace lpdsvm
