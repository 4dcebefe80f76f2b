#pragma once

#include <diffmsc/eigensolver.hpp>
#include <diffmsc/laplacian.hpp>
#include <diffmsc/mesh.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace diffmsc {

/// Truncated eigendecomposition of the discrete Laplace-Beltrami operator together with
/// the area elements it is orthonormal against.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;  ///< ascending, k entries
    Eigen::MatrixXd eigenvectors; ///< N x k, A-orthonormal columns
    Eigen::VectorXd areas;        ///< N area elements

    Eigen::Index size() const { return eigenvalues.size(); }
    Eigen::Index vertex_count() const { return eigenvectors.rows(); }
};

/// Logarithmic time samples t_m = 2^(first_exponent + m / steps_per_octave).
struct TimeGrid {
    std::vector<double> times;
    double log_step = 0.0; ///< spacing in natural-log time

    /// 385 samples from 2^1 to 2^25, sixteen per octave.
    static TimeGrid standard() { return logarithmic(1.0, 25.0, 16); }

    static TimeGrid logarithmic(double first_exponent, double last_exponent, int steps_per_octave)
    {
        if (!(last_exponent > first_exponent) || steps_per_octave < 1) {
            throw InvalidInput("time grid needs last_exponent > first_exponent and a positive step count");
        }
        TimeGrid grid;
        const auto count = static_cast<int>(
            std::lround((last_exponent - first_exponent) * steps_per_octave));
        grid.times.reserve(static_cast<std::size_t>(count) + 1);
        for (int m = 0; m <= count; ++m) {
            grid.times.push_back(std::exp2(first_exponent + static_cast<double>(m) / steps_per_octave));
        }
        grid.log_step = std::log(2.0) / steps_per_octave;
        return grid;
    }

    std::size_t size() const { return times.size(); }
};

/// Eigenpairs of the pencil (W, A). Areas are taken from the diagonal of A.
inline SpectralBasis eigenpairs(const SparseMatrix& W, const SparseMatrix& A, Eigen::Index k,
                                const EigensolverOptions& options = {})
{
    EigenDecomposition dec = smallest_generalized_eigenpairs(W, A, k, options);
    SpectralBasis basis;
    basis.eigenvalues = std::move(dec.values);
    basis.eigenvectors = std::move(dec.vectors);
    basis.areas = Eigen::VectorXd(A.diagonal());
    return basis;
}

/// Cotangent Laplacian + barycentric mass, then the k smallest eigenpairs.
inline SpectralBasis compute_spectrum(const TriangleMesh& mesh, Eigen::Index k,
                                      const EigensolverOptions& options = {})
{
    if (k < 1 || static_cast<std::size_t>(k) > mesh.vertex_count()) {
        throw InvalidInput("k = " + std::to_string(k) + " must lie in [1, " +
                           std::to_string(mesh.vertex_count()) + "]");
    }
    const SparseMatrix W = cotangent_stiffness(mesh);
    const SparseMatrix A = mass_matrix(vertex_areas(mesh));
    return eigenpairs(W, A, k, options);
}

/// Measured deviations from the SpectralBasis invariants.
struct BasisCheck {
    double lowest_eigenvalue = 0.0;   ///< |lambda_0| / lambda_{k-1}
    double orthonormality = 0.0;      ///< max |Phi^T A Phi - I|
    double residual = 0.0;            ///< max_i ||W phi_i - lambda_i A phi_i|| / (||W||_1 ||phi_i||)
    bool ascending = true;

    bool ok() const
    {
        return ascending && lowest_eigenvalue <= 1e-6 && orthonormality <= 1e-6 && residual <= 1e-6;
    }
};

namespace detail {

inline BasisCheck check_basis(const SpectralBasis& basis, const SparseMatrix* W)
{
    BasisCheck check;
    const Eigen::Index k = basis.size();
    if (k == 0) return check;
    const double top = std::abs(basis.eigenvalues(k - 1));
    check.lowest_eigenvalue = top > 0.0 ? std::abs(basis.eigenvalues(0)) / top : 0.0;
    for (Eigen::Index i = 1; i < k; ++i) {
        if (basis.eigenvalues(i) < basis.eigenvalues(i - 1)) check.ascending = false;
    }
    const Eigen::MatrixXd& phi = basis.eigenvectors;
    const Eigen::MatrixXd gram = phi.transpose() * basis.areas.asDiagonal() * phi;
    check.orthonormality = (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();

    if (!W) return check;
    double w_norm = 0.0; // max absolute column sum
    for (Eigen::Index c = 0; c < W->outerSize(); ++c) {
        double sum = 0.0;
        for (SparseMatrix::InnerIterator it(*W, c); it; ++it) sum += std::abs(it.value());
        w_norm = std::max(w_norm, sum);
    }
    const Eigen::MatrixXd R =
        *W * phi - basis.areas.asDiagonal() * phi * basis.eigenvalues.asDiagonal();
    for (Eigen::Index i = 0; i < k; ++i) {
        const double denom = w_norm * phi.col(i).norm();
        if (denom > 0.0) check.residual = std::max(check.residual, R.col(i).norm() / denom);
    }
    return check;
}

} // namespace detail

inline BasisCheck check_basis(const SpectralBasis& basis, const SparseMatrix& W)
{
    return detail::check_basis(basis, &W);
}

/// Checks that need no stiffness matrix (the residual is left at 0).
inline BasisCheck check_basis(const SpectralBasis& basis)
{
    return detail::check_basis(basis, nullptr);
}

namespace detail {

inline void require_time(double t)
{
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw InvalidInput("diffusion time must be positive and finite, got " + format_double(t));
    }
}

inline void require_vertex(const SpectralBasis& basis, std::size_t v)
{
    if (static_cast<Eigen::Index>(v) >= basis.vertex_count()) {
        throw InvalidInput("vertex " + std::to_string(v) + " out of range");
    }
}

/// Eigenvalues at or below this are treated as zero modes.
inline double zero_mode_tolerance(const SpectralBasis& basis)
{
    return 1e-6 * std::abs(basis.eigenvalues(basis.size() - 1));
}

} // namespace detail

/// h_t(v1, v2) = sum_i exp(-lambda_i t) phi_i(v1) phi_i(v2).
inline double heat_kernel(const SpectralBasis& basis, double t, std::size_t v1, std::size_t v2)
{
    detail::require_time(t);
    detail::require_vertex(basis, v1);
    detail::require_vertex(basis, v2);
    const auto a = static_cast<Eigen::Index>(v1), b = static_cast<Eigen::Index>(v2);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        sum += std::exp(-basis.eigenvalues(i) * t) * basis.eigenvectors(a, i) *
               basis.eigenvectors(b, i);
    }
    return sum;
}

/// Auto-diffusivity h_t(v, v) for every vertex.
inline Eigen::VectorXd auto_diffusivity(const SpectralBasis& basis, double t)
{
    detail::require_time(t);
    const Eigen::VectorXd decay = (-basis.eigenvalues.array() * t).exp().matrix();
    return basis.eigenvectors.array().square().matrix() * decay;
}

/// Heat kernel rows h_t(v, .) for the given sources, as an N x |sources| matrix.
inline Eigen::MatrixXd heat_kernel_columns(const SpectralBasis& basis, double t,
                                           std::span<const std::size_t> sources)
{
    detail::require_time(t);
    Eigen::MatrixXd weighted(basis.size(), static_cast<Eigen::Index>(sources.size()));
    for (Eigen::Index s = 0; s < weighted.cols(); ++s) {
        const std::size_t v = sources[static_cast<std::size_t>(s)];
        detail::require_vertex(basis, v);
        weighted.col(s) = (basis.eigenvectors.row(static_cast<Eigen::Index>(v)).transpose().array() *
                           (-basis.eigenvalues.array() * t).exp())
                              .matrix();
    }
    return basis.eigenvectors * weighted;
}

inline void require_commute_basis(const SpectralBasis& basis)
{
    if (basis.size() < 2) throw InvalidInput("commute-time kernel needs at least two eigenpairs");
    const double tol = detail::zero_mode_tolerance(basis);
    for (Eigen::Index i = 1; i < basis.size(); ++i) {
        if (basis.eigenvalues(i) <= tol) {
            throw NumericalError("eigenvalue " + std::to_string(i) +
                                 " is zero: the mesh is disconnected and the commute-time kernel is undefined");
        }
    }
}

/// c(v1, v2) = sum_{i >= 1} phi_i(v1) phi_i(v2) / lambda_i.
inline double commute_time_kernel(const SpectralBasis& basis, std::size_t v1, std::size_t v2)
{
    require_commute_basis(basis);
    detail::require_vertex(basis, v1);
    detail::require_vertex(basis, v2);
    const auto a = static_cast<Eigen::Index>(v1), b = static_cast<Eigen::Index>(v2);
    double sum = 0.0;
    for (Eigen::Index i = 1; i < basis.size(); ++i) {
        sum += basis.eigenvectors(a, i) * basis.eigenvectors(b, i) / basis.eigenvalues(i);
    }
    return sum;
}

inline Eigen::VectorXd commute_time_diagonal(const SpectralBasis& basis)
{
    require_commute_basis(basis);
    const Eigen::Index k = basis.size();
    const Eigen::VectorXd inv = basis.eigenvalues.tail(k - 1).cwiseInverse();
    return basis.eigenvectors.rightCols(k - 1).array().square().matrix() * inv;
}

/// Diffusion distance in its spectral form.
inline double diffusion_distance(const SpectralBasis& basis, double t, std::size_t v1, std::size_t v2)
{
    detail::require_time(t);
    detail::require_vertex(basis, v1);
    detail::require_vertex(basis, v2);
    const auto a = static_cast<Eigen::Index>(v1), b = static_cast<Eigen::Index>(v2);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        const double diff = basis.eigenvectors(a, i) - basis.eigenvectors(b, i);
        sum += std::exp(-2.0 * basis.eigenvalues(i) * t) * diff * diff;
    }
    return std::sqrt(sum);
}

/// Magnitude spectrum of d(log h)/d(log t) for a heat kernel sampled on a logarithmic grid.
/// Central differences inside, one-sided at both ends; plain unnormalized DFT of the full
/// length. Entry w of the result is |H(w)| for w = 0 .. samples.size() - 1.
inline std::vector<double> scale_invariant_spectrum(std::span<const double> samples, double log_step)
{
    const std::size_t n = samples.size();
    if (n < 2) throw InvalidInput("scale-invariant transform needs at least two samples");
    std::vector<double> logs(n);
    for (std::size_t m = 0; m < n; ++m) {
        if (!(samples[m] > 0.0)) {
            throw NumericalError("heat kernel sample " + std::to_string(m) + " is " +
                                 detail::format_double(samples[m]) +
                                 "; its logarithm is undefined (use the auto-diffusivity v1 = v2)");
        }
        logs[m] = std::log(samples[m]);
    }
    std::vector<double> derivative(n);
    derivative[0] = (logs[1] - logs[0]) / log_step;
    derivative[n - 1] = (logs[n - 1] - logs[n - 2]) / log_step;
    for (std::size_t m = 1; m + 1 < n; ++m) {
        derivative[m] = (logs[m + 1] - logs[m - 1]) / (2.0 * log_step);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, derivative);
    std::vector<double> magnitude(n);
    for (std::size_t w = 0; w < n; ++w) magnitude[w] = std::abs(spectrum[w]);
    return magnitude;
}

/// h_t(v1, v2) at every grid time.
inline std::vector<double> heat_kernel_series(const SpectralBasis& basis, const TimeGrid& grid,
                                              std::size_t v1, std::size_t v2)
{
    detail::require_vertex(basis, v1);
    detail::require_vertex(basis, v2);
    const auto a = static_cast<Eigen::Index>(v1), b = static_cast<Eigen::Index>(v2);
    const Eigen::VectorXd product =
        (basis.eigenvectors.row(a).array() * basis.eigenvectors.row(b).array()).transpose().matrix();
    std::vector<double> out(grid.size());
    for (std::size_t m = 0; m < grid.size(); ++m) {
        out[m] = ((-basis.eigenvalues.array() * grid.times[m]).exp() * product.array()).sum();
    }
    return out;
}

/// Scale-invariant modified heat kernel |F{d log h_t(v1,v2) / d log t}(w)| for all w.
inline std::vector<double> modified_heat_kernel(const SpectralBasis& basis, const TimeGrid& grid,
                                                std::size_t v1, std::size_t v2)
{
    const std::vector<double> series = heat_kernel_series(basis, grid, v1, v2);
    return scale_invariant_spectrum(series, grid.log_step);
}

/// Batched diagonal form: row v holds the first `frequencies` entries of the modified
/// heat kernel at (v, v).
inline Eigen::MatrixXd modified_heat_kernel_diagonal(const SpectralBasis& basis,
                                                     const TimeGrid& grid,
                                                     std::size_t frequencies)
{
    if (frequencies == 0 || frequencies > grid.size()) {
        throw InvalidInput("frequency count must lie in [1, " + std::to_string(grid.size()) + "]");
    }
    const auto T = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd decay(basis.size(), T);
    for (Eigen::Index m = 0; m < T; ++m) {
        decay.col(m) = (-basis.eigenvalues.array() * grid.times[static_cast<std::size_t>(m)]).exp();
    }
    const Eigen::MatrixXd series = basis.eigenvectors.array().square().matrix() * decay;
    Eigen::MatrixXd out(basis.vertex_count(), static_cast<Eigen::Index>(frequencies));
    std::vector<double> row(grid.size());
    for (Eigen::Index v = 0; v < series.rows(); ++v) {
        for (Eigen::Index m = 0; m < T; ++m) row[static_cast<std::size_t>(m)] = series(v, m);
        std::vector<double> spectrum;
        try {
            spectrum = scale_invariant_spectrum(row, grid.log_step);
        } catch (const NumericalError& e) {
            throw NumericalError("vertex " + std::to_string(v) + ": " + e.what());
        }
        for (std::size_t w = 0; w < frequencies; ++w) out(v, static_cast<Eigen::Index>(w)) = spectrum[w];
    }
    return out;
}

} // namespace diffmsc
