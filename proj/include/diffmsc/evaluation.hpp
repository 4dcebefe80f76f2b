#pragma once

#include <diffmsc/error.hpp>
#include <diffmsc/mesh.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace diffmsc {

using Region = std::vector<std::size_t>; ///< sorted vertex indices

/// Ground truth from transformed-shape vertices to null-shape vertices.
struct Correspondence {
    static constexpr std::int64_t missing = -1;

    std::vector<std::int64_t> direct;
    std::optional<std::vector<std::int64_t>> symmetric;
    std::size_t null_vertex_count = 0;

    std::size_t transformed_vertex_count() const { return direct.size(); }

    /// Identity map between two shapes with the same indexing.
    static Correspondence identity(std::size_t n)
    {
        Correspondence c;
        c.direct.resize(n);
        for (std::size_t i = 0; i < n; ++i) c.direct[i] = static_cast<std::int64_t>(i);
        c.null_vertex_count = n;
        return c;
    }

    void validate(std::size_t transformed_vertices) const
    {
        auto check = [&](const std::vector<std::int64_t>& map, const char* name) {
            if (map.size() != transformed_vertices) {
                throw ConsistencyError(std::string(name) + " correspondence has " + std::to_string(map.size()) +
                                       " entries but the transformed mesh has " +
                                       std::to_string(transformed_vertices) + " vertices");
            }
            for (std::size_t i = 0; i < map.size(); ++i) {
                if (map[i] < missing || map[i] >= static_cast<std::int64_t>(null_vertex_count)) {
                    throw ConsistencyError(std::string(name) + " correspondence entry " + std::to_string(i) +
                                           " = " + std::to_string(map[i]) + " is outside the null shape");
                }
            }
        };
        check(direct, "direct");
        if (symmetric) check(*symmetric, "symmetric");
    }
};

/// One null-shape index per line, -1 for missing. Blank lines and '#' comments are ignored.
inline std::vector<std::int64_t> read_correspondence(std::istream& in)
{
    std::vector<std::int64_t> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const long long v = detail::parse_int(t, number);
        if (v < -1) throw InvalidInput("line " + std::to_string(number) + ": index " + t + " is below -1");
        out.push_back(v);
    }
    return out;
}

inline std::vector<std::int64_t> read_correspondence(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open correspondence file " + path.string());
    try {
        return read_correspondence(in);
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

inline void write_correspondence(std::ostream& out, std::span<const std::int64_t> map)
{
    for (std::int64_t v : map) out << v << '\n';
}

struct MappedRegion {
    Region vertices;              ///< sorted, duplicates collapsed
    double dropped_fraction = 0.0; ///< share of the source area whose vertices have no image
};

/// Image of a transformed-shape region on the null shape.
inline MappedRegion map_region(std::span<const std::int64_t> map, std::span<const std::size_t> region,
                               std::span<const double> source_areas)
{
    MappedRegion out;
    double total = 0.0, dropped = 0.0;
    for (std::size_t v : region) {
        if (v >= map.size()) throw InvalidInput("region vertex " + std::to_string(v) + " has no map entry");
        const double a = source_areas.empty() ? 1.0 : source_areas[v];
        total += a;
        if (map[v] == Correspondence::missing) {
            dropped += a;
        } else {
            out.vertices.push_back(static_cast<std::size_t>(map[v]));
        }
    }
    std::sort(out.vertices.begin(), out.vertices.end());
    out.vertices.erase(std::unique(out.vertices.begin(), out.vertices.end()), out.vertices.end());
    out.dropped_fraction = total > 0.0 ? dropped / total : 0.0;
    return out;
}

/// Intersection over union by area of two sorted vertex sets on the same shape.
inline double overlap(std::span<const std::size_t> r1, std::span<const std::size_t> r2,
                      std::span<const double> areas)
{
    auto area = [&](std::size_t v) { return areas.empty() ? 1.0 : areas[v]; };
    double a1 = 0.0, a2 = 0.0, both = 0.0;
    std::size_t i = 0, j = 0;
    while (i < r1.size() || j < r2.size()) {
        if (j == r2.size() || (i < r1.size() && r1[i] < r2[j])) {
            a1 += area(r1[i++]);
        } else if (i == r1.size() || r2[j] < r1[i]) {
            a2 += area(r2[j++]);
        } else {
            const double a = area(r1[i]);
            a1 += a;
            a2 += a;
            both += a;
            ++i;
            ++j;
        }
    }
    const double uni = a1 + a2 - both;
    return uni > 0.0 ? both / uni : 0.0;
}

/// Overlaps between null regions and transformed-region images.
struct OverlapTable {
    Eigen::MatrixXd values;              ///< null x transformed
    std::vector<bool> uses_symmetric;    ///< per transformed region
    std::vector<bool> has_image;         ///< per transformed region
    std::vector<double> dropped_fraction; ///< per transformed region, for the chosen map
};

/// Each transformed region is mapped through the direct correspondence and, when given,
/// through the symmetric one; the map yielding the larger best overlap is kept (ties go to
/// the direct map).
inline OverlapTable overlap_table(const std::vector<Region>& null_regions,
                                  const std::vector<Region>& transformed_regions, const Correspondence& corr,
                                  std::span<const double> null_areas, std::span<const double> transformed_areas)
{
    corr.validate(corr.direct.size());
    const auto m = static_cast<Eigen::Index>(null_regions.size());
    const auto n = static_cast<Eigen::Index>(transformed_regions.size());
    OverlapTable t;
    t.values = Eigen::MatrixXd::Zero(m, n);
    t.uses_symmetric.assign(static_cast<std::size_t>(n), false);
    t.has_image.assign(static_cast<std::size_t>(n), false);
    t.dropped_fraction.assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Region& y = transformed_regions[static_cast<std::size_t>(j)];
        const MappedRegion direct = map_region(corr.direct, y, transformed_areas);
        Eigen::VectorXd col(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            col(i) = overlap(null_regions[static_cast<std::size_t>(i)], direct.vertices, null_areas);
        }
        bool sym = false;
        bool image = !direct.vertices.empty();
        double dropped = direct.dropped_fraction;
        if (corr.symmetric) {
            const MappedRegion mirrored = map_region(*corr.symmetric, y, transformed_areas);
            Eigen::VectorXd alt(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                alt(i) = overlap(null_regions[static_cast<std::size_t>(i)], mirrored.vertices, null_areas);
            }
            const double best_direct = m > 0 ? col.maxCoeff() : 0.0;
            const double best_sym = m > 0 ? alt.maxCoeff() : 0.0;
            if (best_sym > best_direct || (direct.vertices.empty() && !mirrored.vertices.empty())) {
                col = alt;
                sym = true;
                image = !mirrored.vertices.empty();
                dropped = mirrored.dropped_fraction;
            }
        }
        t.values.col(j) = col;
        t.uses_symmetric[static_cast<std::size_t>(j)] = sym;
        t.has_image[static_cast<std::size_t>(j)] = image;
        t.dropped_fraction[static_cast<std::size_t>(j)] = dropped;
    }
    return t;
}

struct RepeatabilityPoint {
    double threshold = 0.0;
    double repeatability = 0.0;  ///< matched / evaluated
    std::size_t matched = 0;     ///< one-to-one correspondences with overlap above the threshold
    std::size_t evaluated = 0;   ///< transformed regions with a non-empty image
    std::size_t detected = 0;    ///< all transformed regions
};

/// Greedy one-to-one matching by descending overlap (ties: lower transformed index, then
/// lower null index). Returns the accepted pairs (null, transformed) in acceptance order.
inline std::vector<std::pair<std::size_t, std::size_t>> greedy_matching(const Eigen::MatrixXd& overlaps)
{
    struct Pair {
        double o;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (Eigen::Index j = 0; j < overlaps.cols(); ++j) {
        for (Eigen::Index i = 0; i < overlaps.rows(); ++i) {
            if (overlaps(i, j) > 0.0) {
                pairs.push_back({overlaps(i, j), static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.o != b.o) return a.o > b.o;
        if (a.j != b.j) return a.j < b.j;
        return a.i < b.i;
    });
    std::vector<bool> null_used(static_cast<std::size_t>(overlaps.rows()), false);
    std::vector<bool> tr_used(static_cast<std::size_t>(overlaps.cols()), false);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const Pair& p : pairs) {
        if (null_used[p.i] || tr_used[p.j]) continue;
        null_used[p.i] = true;
        tr_used[p.j] = true;
        out.emplace_back(p.i, p.j);
    }
    return out;
}

/// Single-sided repeatability: unmatched null regions do not count against the detector.
/// A pair is a correspondence at threshold o when its overlap exceeds o.
inline std::vector<RepeatabilityPoint> repeatability(const OverlapTable& table, std::span<const double> thresholds,
                                                     Diagnostics* diag = nullptr)
{
    const auto matches = greedy_matching(table.values);
    const std::size_t detected = table.has_image.size();
    const auto evaluated = static_cast<std::size_t>(std::count(table.has_image.begin(), table.has_image.end(), true));
    if (evaluated == 0) warn(diag, "no transformed region has an image on the null shape; repeatability reported as 0");
    std::vector<RepeatabilityPoint> curve;
    for (double o : thresholds) {
        RepeatabilityPoint p;
        p.threshold = o;
        p.detected = detected;
        p.evaluated = evaluated;
        for (const auto& [i, j] : matches) {
            if (table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > o) ++p.matched;
        }
        p.repeatability = evaluated > 0 ? static_cast<double>(p.matched) / static_cast<double>(evaluated) : 0.0;
        curve.push_back(p);
    }
    return curve;
}

struct RocPoint {
    double threshold = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; ///< starts at (0, 0) with threshold -inf
    double eer = 0.0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

/// ROC over all distinct distances. A pair is positive iff its overlap is at least rho;
/// TPR(tau) and FPR(tau) are the shares of positive and negative pairs with d <= tau. The
/// equal error rate is where FPR = 1 - TPR, linearly interpolated between sweep points.
inline RocCurve descriptor_roc(std::span<const double> distances, std::span<const double> overlaps, double rho = 0.75)
{
    if (distances.size() != overlaps.size()) throw InvalidInput("distance and overlap lists differ in length");
    struct Item {
        double d;
        bool positive;
    };
    std::vector<Item> items;
    RocCurve roc;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (std::isnan(distances[i])) throw InvalidInput("distance " + std::to_string(i) + " is NaN");
        const bool pos = overlaps[i] >= rho;
        items.push_back({distances[i], pos});
        (pos ? roc.positives : roc.negatives) += 1;
    }
    if (roc.positives == 0) throw InvalidInput("ROC needs at least one matching pair (overlap >= rho)");
    if (roc.negatives == 0) throw InvalidInput("ROC needs at least one non-matching pair (overlap < rho)");
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.d < b.d; });

    roc.points.push_back({-std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < items.size()) {
        const double tau = items[i].d;
        while (i < items.size() && items[i].d == tau) {
            (items[i].positive ? tp : fp) += 1;
            ++i;
        }
        roc.points.push_back({tau, static_cast<double>(tp) / static_cast<double>(roc.positives),
                              static_cast<double>(fp) / static_cast<double>(roc.negatives)});
    }

    // g = FPR - (1 - TPR) rises from -1 to +1 along the sweep.
    auto g = [](const RocPoint& p) { return p.fpr + p.tpr - 1.0; };
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        const double gk = g(roc.points[k]);
        if (gk < 0.0) continue;
        const RocPoint& a = roc.points[k - 1];
        const RocPoint& b = roc.points[k];
        const double ga = g(a);
        const double s = -ga / (gk - ga);
        roc.eer = a.fpr + s * (b.fpr - a.fpr);
        break;
    }
    return roc;
}

struct MatchingPoint {
    double rho = 0.0;
    double score = 0.0;
    std::size_t correct = 0;
};

struct MatchingResult {
    std::vector<std::size_t> first_match; ///< j*(i) per null region
    std::vector<MatchingPoint> curve;
};

/// First matches j*(i) = argmin_j d(i, j) (lowest index on ties) and the share of null
/// regions whose first match overlaps it by at least rho.
inline MatchingResult matching_score(const Eigen::MatrixXd& distances, const Eigen::MatrixXd& overlaps,
                                     std::span<const double> rhos)
{
    if (distances.rows() != overlaps.rows() || distances.cols() != overlaps.cols()) {
        throw InvalidInput("distance and overlap matrices differ in shape");
    }
    if (distances.rows() == 0) throw InvalidInput("matching score needs at least one null region");
    if (distances.cols() == 0) throw InvalidInput("matching score needs at least one candidate region");
    MatchingResult out;
    for (Eigen::Index i = 0; i < distances.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < distances.cols(); ++j) {
            if (distances(i, j) < distances(i, best)) best = j;
        }
        out.first_match.push_back(static_cast<std::size_t>(best));
    }
    const auto m = static_cast<double>(distances.rows());
    for (double rho : rhos) {
        MatchingPoint p;
        p.rho = rho;
        for (Eigen::Index i = 0; i < distances.rows(); ++i) {
            if (overlaps(i, static_cast<Eigen::Index>(out.first_match[static_cast<std::size_t>(i)])) >= rho) {
                ++p.correct;
            }
        }
        p.score = static_cast<double>(p.correct) / m;
        out.curve.push_back(p);
    }
    return out;
}

/// Pairwise Euclidean distances between descriptor sets (rows: null, cols: transformed).
inline Eigen::MatrixXd descriptor_distances(const std::vector<Eigen::VectorXd>& null_desc,
                                            const std::vector<Eigen::VectorXd>& transformed_desc)
{
    Eigen::MatrixXd d(static_cast<Eigen::Index>(null_desc.size()), static_cast<Eigen::Index>(transformed_desc.size()));
    for (std::size_t i = 0; i < null_desc.size(); ++i) {
        for (std::size_t j = 0; j < transformed_desc.size(); ++j) {
            if (null_desc[i].size() != transformed_desc[j].size()) {
                throw ConsistencyError("descriptor dimensions differ between documents");
            }
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (null_desc[i] - transformed_desc[j]).norm();
        }
    }
    return d;
}

inline void write_repeatability_csv(std::ostream& out, const std::vector<RepeatabilityPoint>& curve)
{
    out << "overlap,repeatability,matched,evaluated,detected\n";
    for (const auto& p : curve) {
        out << detail::format_double(p.threshold) << ',' << detail::format_double(p.repeatability) << ','
            << p.matched << ',' << p.evaluated << ',' << p.detected << '\n';
    }
}

inline void write_roc_csv(std::ostream& out, const RocCurve& roc)
{
    out << "threshold,tpr,fpr\n";
    for (const auto& p : roc.points) {
        out << (std::isinf(p.threshold) ? std::string("-inf") : detail::format_double(p.threshold)) << ','
            << detail::format_double(p.tpr) << ',' << detail::format_double(p.fpr) << '\n';
    }
}

inline void write_matching_csv(std::ostream& out, const MatchingResult& result)
{
    out << "overlap,score,correct\n";
    for (const auto& p : result.curve) {
        out << detail::format_double(p.rho) << ',' << detail::format_double(p.score) << ',' << p.correct << '\n';
    }
}

} // namespace diffmsc
