#pragma once

#include <diffmsc/component_tree.hpp>

#include <limits>
#include <optional>

namespace diffmsc {

struct DetectorParams {
    /// Regions scoring above this are rejected.
    double max_instability = std::numeric_limits<double>::infinity();
    /// Nested survivors whose area ratio (smaller / larger) exceeds this keep only the larger;
    /// nullopt disables deduplication.
    std::optional<double> overlap_dedup = 0.8;
    double min_region_frac = 0.005;
    double max_region_frac = 0.5;

    void validate() const
    {
        if (std::isnan(max_instability)) throw InvalidInput("max_instability is NaN");
        if (overlap_dedup && !(*overlap_dedup >= 0.0 && *overlap_dedup <= 1.0)) {
            throw InvalidInput("overlap_dedup must lie in [0, 1]");
        }
        if (!(min_region_frac >= 0.0 && min_region_frac <= 1.0) ||
            !(max_region_frac >= 0.0 && max_region_frac <= 1.0) || min_region_frac > max_region_frac) {
            throw InvalidInput("region area fractions must satisfy 0 <= min <= max <= 1");
        }
    }
};

struct StableRegion {
    std::vector<std::size_t> vertices; ///< sorted
    double altitude = 0.0;
    double score = 0.0;
    double area = 0.0;
    std::size_t node = 0;
};

/// Partition of the tree into branches: maximal chains in which each node is the only
/// child of the next. Each chain is listed from its smallest component upward.
inline std::vector<std::vector<std::size_t>> branches(const ComponentTree& tree)
{
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t id = 0; id < tree.size(); ++id) {
        if (tree[id].children.size() == 1) continue;
        std::vector<std::size_t> chain{id};
        std::size_t cur = id;
        while (tree[cur].parent != ComponentTree::npos && tree[tree[cur].parent].children.size() == 1) {
            cur = tree[cur].parent;
            chain.push_back(cur);
        }
        out.push_back(std::move(chain));
    }
    return out;
}

/// Finite-difference instability dA/dl along each branch: central differences inside,
/// one-sided at branch ends. Nodes on single-node branches are unscoreable (nullopt).
inline std::vector<std::optional<double>> instability_scores(const ComponentTree& tree)
{
    std::vector<std::optional<double>> score(tree.size());
    for (const auto& chain : branches(tree)) {
        const std::size_t K = chain.size();
        if (K < 2) continue;
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t lo = k == 0 ? 0 : k - 1;
            const std::size_t hi = k + 1 == K ? K - 1 : k + 1;
            const auto& a = tree[chain[lo]];
            const auto& b = tree[chain[hi]];
            score[chain[k]] = (b.area - a.area) / (b.altitude - a.altitude);
        }
    }
    return score;
}

/// Local minima of the score along each branch. A run of equal scores bounded by strictly
/// larger neighbours (or branch ends) counts once and is represented by its top node.
inline std::vector<std::size_t> local_minima(const ComponentTree& tree,
                                             const std::vector<std::optional<double>>& score)
{
    std::vector<std::size_t> out;
    for (const auto& chain : branches(tree)) {
        const std::size_t K = chain.size();
        if (K < 2) continue;
        std::size_t i = 0;
        while (i < K) {
            const double s = *score[chain[i]];
            std::size_t j = i;
            while (j + 1 < K && *score[chain[j + 1]] == s) ++j;
            const bool below_ok = i == 0 || *score[chain[i - 1]] > s;
            const bool above_ok = j + 1 == K || *score[chain[j + 1]] > s;
            if (below_ok && above_ok) out.push_back(chain[j]);
            i = j + 1;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Among nested candidates whose area ratio exceeds `threshold`, keeps the larger one.
/// Candidates are visited from largest to smallest and compared only with kept ones, which
/// makes the operation idempotent.
inline std::vector<std::size_t> deduplicate(const ComponentTree& tree, std::vector<std::size_t> candidates,
                                            double threshold)
{
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        return tree[a].area > tree[b].area || (tree[a].area == tree[b].area && a < b);
    });
    std::vector<std::size_t> kept;
    for (std::size_t c : candidates) {
        bool drop = false;
        for (std::size_t k : kept) {
            if (tree.is_ancestor(k, c) && tree[c].area / tree[k].area > threshold) {
                drop = true;
                break;
            }
        }
        if (!drop) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

/// Maximally stable components, filtered and deduplicated, sorted by ascending score
/// (ties by node id).
inline std::vector<StableRegion> detect(const ComponentTree& tree, const DetectorParams& params)
{
    params.validate();
    const auto score = instability_scores(tree);
    const double total = tree.covered_area();
    std::vector<std::size_t> candidates;
    for (std::size_t id : local_minima(tree, score)) {
        const double s = *score[id];
        const double a = tree[id].area;
        if (!(s <= params.max_instability)) continue;
        if (a < params.min_region_frac * total || a > params.max_region_frac * total) continue;
        candidates.push_back(id);
    }
    if (params.overlap_dedup) candidates = deduplicate(tree, std::move(candidates), *params.overlap_dedup);
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        return *score[a] < *score[b] || (*score[a] == *score[b] && a < b);
    });

    std::vector<StableRegion> regions;
    regions.reserve(candidates.size());
    for (std::size_t id : candidates) {
        StableRegion r;
        r.vertices = tree.members(id);
        r.altitude = tree[id].altitude;
        r.score = *score[id];
        r.area = tree[id].area;
        r.node = id;
        regions.push_back(std::move(r));
    }
    return regions;
}

} // namespace diffmsc
