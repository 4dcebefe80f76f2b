#pragma once

#include <diffmsc/spectral.hpp>

#include <algorithm>
#include <random>
#include <span>
#include <string>

namespace diffmsc {

enum class PointDescriptorKind { HKS, SIHKS };
enum class RegionDescriptorKind { Average, BagOfFeatures };

/// Per-vertex descriptor vectors, one row per vertex.
struct PointDescriptorField {
    PointDescriptorKind kind = PointDescriptorKind::HKS;
    Eigen::MatrixXd values;          ///< N x q
    std::vector<double> parameters;  ///< HKS times or SI-HKS frequency indices

    Eigen::Index dimension() const { return values.cols(); }
};

struct RegionDescriptor {
    RegionDescriptorKind kind = RegionDescriptorKind::Average;
    Eigen::VectorXd values;
};

/// Seven time values used for heat kernel signatures by default.
inline std::vector<double> default_hks_times()
{
    return {16.0, 22.6, 32.0, 45.2, 64.0, 90.5, 128.0};
}

inline PointDescriptorField hks_field(const SpectralBasis& basis, std::span<const double> times)
{
    if (times.empty()) throw InvalidInput("HKS needs at least one time value");
    PointDescriptorField field;
    field.kind = PointDescriptorKind::HKS;
    field.parameters.assign(times.begin(), times.end());
    field.values.resize(basis.vertex_count(), static_cast<Eigen::Index>(times.size()));
    for (std::size_t j = 0; j < times.size(); ++j) {
        field.values.col(static_cast<Eigen::Index>(j)) = auto_diffusivity(basis, times[j]);
    }
    return field;
}

/// Scale-invariant HKS: the first `frequencies` magnitudes of the modified heat kernel at (v, v).
inline PointDescriptorField sihks_field(const SpectralBasis& basis, const TimeGrid& grid,
                                        std::size_t frequencies = 6)
{
    if (frequencies > grid.size()) {
        throw InvalidInput("SI-HKS asks for " + std::to_string(frequencies) + " frequencies but the grid has " +
                           std::to_string(grid.size()) + " samples");
    }
    PointDescriptorField field;
    field.kind = PointDescriptorKind::SIHKS;
    for (std::size_t w = 0; w < frequencies; ++w) field.parameters.push_back(static_cast<double>(w));
    field.values = modified_heat_kernel_diagonal(basis, grid, frequencies);
    return field;
}

namespace detail {

inline void require_region(std::span<const std::size_t> region, Eigen::Index n)
{
    if (region.empty()) throw InvalidInput("region is empty");
    for (std::size_t v : region) {
        if (static_cast<Eigen::Index>(v) >= n) {
            throw InvalidInput("region vertex " + std::to_string(v) + " out of range");
        }
    }
}

} // namespace detail

/// Area-weighted mean of the point descriptor over the region.
inline RegionDescriptor region_average(const PointDescriptorField& field,
                                       std::span<const std::size_t> region,
                                       std::span<const double> areas)
{
    detail::require_region(region, field.values.rows());
    RegionDescriptor out;
    out.kind = RegionDescriptorKind::Average;
    out.values = Eigen::VectorXd::Zero(field.dimension());
    double total = 0.0;
    for (std::size_t v : region) {
        out.values += areas[v] * field.values.row(static_cast<Eigen::Index>(v)).transpose();
        total += areas[v];
    }
    if (!(total > 0.0)) throw InvalidInput("region has zero area");
    out.values /= total;
    return out;
}

/// Geometric vocabulary: p centroids in descriptor space.
struct Vocabulary {
    Eigen::MatrixXd centroids; ///< p x q
    std::uint64_t seed = 0;
    int iterations = 0;
    /// Default soft-quantization spread: median distance from a training vector to its
    /// nearest centroid.
    double sigma = 0.0;

    Eigen::Index size() const { return centroids.rows(); }
    Eigen::Index dimension() const { return centroids.cols(); }
};

/// k-means with k-means++ seeding and at most `max_iterations` Lloyd steps over all rows
/// of the training fields. Deterministic for a fixed seed.
inline Vocabulary build_vocabulary(std::span<const Eigen::MatrixXd> training, Eigen::Index p,
                                   std::uint64_t seed, int max_iterations = 100)
{
    if (p < 2) throw InvalidInput("vocabulary size must be at least 2");
    if (training.empty()) throw InvalidInput("no training data");
    const Eigen::Index q = training[0].cols();
    Eigen::Index rows = 0;
    for (const auto& m : training) {
        if (m.cols() != q) throw InvalidInput("training fields disagree in dimension");
        rows += m.rows();
    }
    if (rows < p) {
        throw InvalidInput("insufficient training data: " + std::to_string(rows) + " vectors for " +
                           std::to_string(p) + " words");
    }
    Eigen::MatrixXd X(rows, q);
    {
        Eigen::Index r = 0;
        for (const auto& m : training) {
            X.middleRows(r, m.rows()) = m;
            r += m.rows();
        }
    }

    std::mt19937_64 rng(seed);
    Eigen::MatrixXd C(p, q);
    Eigen::VectorXd nearest(rows);
    std::uniform_int_distribution<Eigen::Index> pick(0, rows - 1);
    C.row(0) = X.row(pick(rng));
    for (Eigen::Index r = 0; r < rows; ++r) nearest(r) = (X.row(r) - C.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < p; ++c) {
        const double total = nearest.sum();
        if (!(total > 0.0)) {
            throw InvalidInput("insufficient training data: fewer than " + std::to_string(p) +
                               " distinct descriptor vectors");
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng);
        Eigen::Index chosen = rows - 1;
        for (Eigen::Index r = 0; r < rows; ++r) {
            target -= nearest(r);
            if (target < 0.0 && nearest(r) > 0.0) {
                chosen = r;
                break;
            }
        }
        while (nearest(chosen) == 0.0) --chosen; // guard against rounding at the tail
        C.row(c) = X.row(chosen);
        for (Eigen::Index r = 0; r < rows; ++r) {
            nearest(r) = std::min(nearest(r), (X.row(r) - C.row(c)).squaredNorm());
        }
    }

    std::vector<Eigen::Index> label(static_cast<std::size_t>(rows), -1);
    int it = 0;
    for (; it < max_iterations; ++it) {
        bool moved = false;
        for (Eigen::Index r = 0; r < rows; ++r) {
            Eigen::Index best = 0;
            (C.rowwise() - X.row(r)).rowwise().squaredNorm().minCoeff(&best);
            if (label[static_cast<std::size_t>(r)] != best) {
                label[static_cast<std::size_t>(r)] = best;
                moved = true;
            }
        }
        if (!moved) break;
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, q);
        Eigen::VectorXd count = Eigen::VectorXd::Zero(p);
        for (Eigen::Index r = 0; r < rows; ++r) {
            sum.row(label[static_cast<std::size_t>(r)]) += X.row(r);
            count(label[static_cast<std::size_t>(r)]) += 1.0;
        }
        for (Eigen::Index c = 0; c < p; ++c) {
            if (count(c) > 0.0) {
                C.row(c) = sum.row(c) / count(c);
            } else {
                // empty cluster: restart it at the point farthest from its centroid
                Eigen::Index far = 0;
                double worst = -1.0;
                for (Eigen::Index r = 0; r < rows; ++r) {
                    const double d = (X.row(r) - C.row(label[static_cast<std::size_t>(r)])).squaredNorm();
                    if (d > worst) {
                        worst = d;
                        far = r;
                    }
                }
                C.row(c) = X.row(far);
                label[static_cast<std::size_t>(far)] = c;
            }
        }
    }

    Vocabulary vocab;
    vocab.centroids = std::move(C);
    vocab.seed = seed;
    vocab.iterations = it;
    std::vector<double> dist(static_cast<std::size_t>(rows));
    for (Eigen::Index r = 0; r < rows; ++r) {
        dist[static_cast<std::size_t>(r)] =
            std::sqrt((vocab.centroids.rowwise() - X.row(r)).rowwise().squaredNorm().minCoeff());
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2), dist.end());
    vocab.sigma = dist[dist.size() / 2];
    return vocab;
}

/// Distribution over words proportional to exp(-|alpha - alpha_l|^2 / 2 sigma^2), summing to
/// one. sigma = 0 gives a one-hot vector at the nearest word (lowest index on ties).
inline Eigen::VectorXd soft_quantize(const Eigen::Ref<const Eigen::VectorXd>& alpha,
                                     const Vocabulary& vocab, double sigma)
{
    if (alpha.size() != vocab.dimension()) {
        throw InvalidInput("descriptor dimension " + std::to_string(alpha.size()) +
                           " does not match vocabulary dimension " + std::to_string(vocab.dimension()));
    }
    if (!(sigma >= 0.0)) throw InvalidInput("sigma must be non-negative");
    const Eigen::VectorXd d2 = (vocab.centroids.rowwise() - alpha.transpose()).rowwise().squaredNorm();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(vocab.size());
    Eigen::Index best = 0;
    const double dmin = d2.minCoeff(&best);
    if (sigma == 0.0) {
        theta(best) = 1.0;
        return theta;
    }
    theta = (-(d2.array() - dmin) / (2.0 * sigma * sigma)).exp().matrix();
    return theta / theta.sum();
}

/// Soft quantization of every vertex, N x p.
inline Eigen::MatrixXd quantize_field(const PointDescriptorField& field, const Vocabulary& vocab, double sigma)
{
    Eigen::MatrixXd out(field.values.rows(), vocab.size());
    for (Eigen::Index v = 0; v < field.values.rows(); ++v) {
        out.row(v) = soft_quantize(field.values.row(v).transpose(), vocab, sigma).transpose();
    }
    return out;
}

/// Local bag of features: area-weighted sum of word distributions, normalized to sum one.
inline RegionDescriptor region_bof(const Eigen::MatrixXd& theta, std::span<const std::size_t> region,
                                   std::span<const double> areas)
{
    detail::require_region(region, theta.rows());
    RegionDescriptor out;
    out.kind = RegionDescriptorKind::BagOfFeatures;
    out.values = Eigen::VectorXd::Zero(theta.cols());
    for (std::size_t v : region) out.values += areas[v] * theta.row(static_cast<Eigen::Index>(v)).transpose();
    const double total = out.values.sum();
    if (!(total > 0.0)) throw InvalidInput("region has zero area");
    out.values /= total;
    return out;
}

} // namespace diffmsc
