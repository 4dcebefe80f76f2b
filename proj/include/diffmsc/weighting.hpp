#pragma once

// Diffusion-geometric vertex and edge weights for component-tree construction, and their
// short string form, e.g. "vw:heat:t=2048", "ew:absdiff:heat:t=2048", "ew:invct".

#include <diffmsc/spectral.hpp>

#include <limits>
#include <string>
#include <string_view>

namespace diffmsc {

enum class WeightKind {
    // vertex kinds
    Heat,                    ///< h_t(v, v)
    Commute,                 ///< c(v, v)
    ScaleInvariantHeat,      ///< modified heat kernel at one frequency
    ScaleInvariantHeatNorm,  ///< modified heat kernel L2 norm over a frequency band
    // edge kinds
    AbsDiff,                 ///< |f(v1) - f(v2)| for an inner vertex kind
    InverseHeat,             ///< 1 / h_t(v1, v2)
    InverseCommute,          ///< 1 / c(v1, v2)
    InverseScaleInvariantNorm, ///< 1 / ||modified h(v1, v2)|| over a frequency band
    DiffusionDistance,       ///< ||h_t(v1, .) - h_t(v2, .)||
    HeatTimeNorm,            ///< ||h_t(v1, v1) - h_t(v2, v2)|| over t in [t1, t2]
};

struct WeightingSpec {
    WeightKind kind = WeightKind::Heat;
    WeightKind inner = WeightKind::Heat; ///< AbsDiff only
    double t = 2048.0;
    std::size_t omega = 0;
    std::size_t omega_lo = 0;
    std::size_t omega_hi = 5;
    double t_lo = 128.0;
    double t_hi = 32000.0;

    static bool is_vertex_kind(WeightKind k) { return k <= WeightKind::ScaleInvariantHeatNorm; }
    bool is_vertex() const { return is_vertex_kind(kind); }

    /// Spec with the same parameters but the inner vertex kind of an AbsDiff spec.
    WeightingSpec inner_spec() const
    {
        WeightingSpec s = *this;
        s.kind = inner;
        return s;
    }

    void validate() const
    {
        if (kind == WeightKind::AbsDiff && !is_vertex_kind(inner)) {
            throw InvalidInput("absdiff needs a vertex kind (heat, ct, sihk, sihknorm) as inner field");
        }
        if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("t must be positive");
        if (!(t_lo > 0.0) || !(t_lo < t_hi) || !std::isfinite(t_hi)) {
            throw InvalidInput("time band needs 0 < t1 < t2");
        }
        if (!(omega_lo < omega_hi)) throw InvalidInput("frequency band needs w1 < w2");
    }

    /// Default cutoff on the instability score for this weighting (infinity when none).
    double default_max_instability() const
    {
        constexpr double inf = std::numeric_limits<double>::infinity();
        switch (kind) {
        case WeightKind::AbsDiff: return inner == WeightKind::Heat ? 2.51e5 : inf;
        case WeightKind::InverseCommute: return 1.0;
        case WeightKind::InverseScaleInvariantNorm: return 100.0;
        case WeightKind::DiffusionDistance: return 5e6;
        case WeightKind::HeatTimeNorm: return 1.58e7;
        default: return inf;
        }
    }

    std::string to_string() const;
    static WeightingSpec parse(std::string_view text);
};

namespace detail {

inline std::string kind_token(WeightKind k)
{
    switch (k) {
    case WeightKind::Heat: return "heat";
    case WeightKind::Commute: return "ct";
    case WeightKind::ScaleInvariantHeat: return "sihk";
    case WeightKind::ScaleInvariantHeatNorm: return "sihknorm";
    case WeightKind::AbsDiff: return "absdiff";
    case WeightKind::InverseHeat: return "invheat";
    case WeightKind::InverseCommute: return "invct";
    case WeightKind::InverseScaleInvariantNorm: return "invsihknorm";
    case WeightKind::DiffusionDistance: return "diffdist";
    case WeightKind::HeatTimeNorm: return "heatl2";
    }
    return "?";
}

inline std::string kind_params(const WeightingSpec& s, WeightKind k)
{
    switch (k) {
    case WeightKind::Heat:
    case WeightKind::InverseHeat:
    case WeightKind::DiffusionDistance: return ":t=" + format_double(s.t);
    case WeightKind::ScaleInvariantHeat: return ":w=" + std::to_string(s.omega);
    case WeightKind::ScaleInvariantHeatNorm:
    case WeightKind::InverseScaleInvariantNorm:
        return ":w1=" + std::to_string(s.omega_lo) + ":w2=" + std::to_string(s.omega_hi);
    case WeightKind::HeatTimeNorm: return ":t1=" + format_double(s.t_lo) + ":t2=" + format_double(s.t_hi);
    default: return {};
    }
}

inline std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t p = text.find(sep, start);
        out.push_back(text.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

} // namespace detail

inline std::string WeightingSpec::to_string() const
{
    std::string out = is_vertex() ? "vw:" : "ew:";
    out += detail::kind_token(kind);
    if (kind == WeightKind::AbsDiff) out += ":" + detail::kind_token(inner) + detail::kind_params(*this, inner);
    else out += detail::kind_params(*this, kind);
    return out;
}

inline WeightingSpec WeightingSpec::parse(std::string_view text)
{
    const auto fail = [&](const std::string& why) {
        return InvalidInput("weighting '" + std::string(text) + "': " + why);
    };
    const auto parts = detail::split(text, ':');
    if (parts.size() < 2) throw fail("expected <vw|ew>:<kind>[:key=value...]");
    const bool vertex = parts[0] == "vw";
    if (!vertex && parts[0] != "ew") throw fail("prefix must be 'vw' or 'ew'");

    auto lookup = [&](std::string_view token) -> WeightKind {
        for (int k = 0; k <= static_cast<int>(WeightKind::HeatTimeNorm); ++k) {
            if (detail::kind_token(static_cast<WeightKind>(k)) == token) return static_cast<WeightKind>(k);
        }
        throw fail("unknown kind '" + std::string(token) + "'");
    };

    WeightingSpec spec;
    spec.kind = lookup(parts[1]);
    if (is_vertex_kind(spec.kind) != vertex) {
        throw fail("kind '" + std::string(parts[1]) + "' is not a " + (vertex ? "vertex" : "edge") + " kind");
    }
    std::size_t next = 2;
    if (spec.kind == WeightKind::AbsDiff) {
        if (parts.size() < 3) throw fail("absdiff needs an inner vertex kind");
        spec.inner = lookup(parts[2]);
        if (!is_vertex_kind(spec.inner)) throw fail("absdiff inner kind must be a vertex kind");
        next = 3;
    }
    for (; next < parts.size(); ++next) {
        const auto kv = detail::split(parts[next], '=');
        if (kv.size() != 2 || kv[0].empty() || kv[1].empty()) {
            throw fail("malformed parameter '" + std::string(parts[next]) + "'");
        }
        double value = 0.0;
        try {
            value = detail::parse_double(kv[1], 0);
        } catch (const InvalidInput&) {
            throw fail("parameter '" + std::string(kv[0]) + "' is not a number");
        }
        auto as_index = [&]() {
            if (value < 0.0 || value != std::floor(value)) {
                throw fail("frequency '" + std::string(kv[0]) + "' must be a non-negative integer");
            }
            return static_cast<std::size_t>(value);
        };
        if (kv[0] == "t") spec.t = value;
        else if (kv[0] == "t1") spec.t_lo = value;
        else if (kv[0] == "t2") spec.t_hi = value;
        else if (kv[0] == "w") spec.omega = as_index();
        else if (kv[0] == "w1") spec.omega_lo = as_index();
        else if (kv[0] == "w2") spec.omega_hi = as_index();
        else throw fail("unknown parameter '" + std::string(kv[0]) + "'");
    }
    try {
        spec.validate();
    } catch (const InvalidInput& e) {
        throw fail(e.what());
    }
    return spec;
}

/// Every weighting row of the reference comparison table, in table order.
inline std::vector<WeightingSpec> weighting_catalog()
{
    const char* rows[] = {
        "vw:heat:t=2048",       "vw:ct",
        "vw:sihk:w=0",          "vw:sihknorm:w1=0:w2=5",
        "ew:absdiff:heat:t=2048", "ew:absdiff:ct",
        "ew:absdiff:sihk:w=0",  "ew:invheat:t=2048",
        "ew:invct",             "ew:invsihknorm:w1=0:w2=5",
        "ew:diffdist:t=2048",   "ew:heatl2:t1=128:t2=32000",
    };
    std::vector<WeightingSpec> out;
    for (const char* r : rows) out.push_back(WeightingSpec::parse(r));
    return out;
}

namespace detail {

inline void require_grid_band(const TimeGrid& grid, std::size_t hi)
{
    if (hi >= grid.size()) {
        throw InvalidInput("frequency " + std::to_string(hi) + " exceeds the grid length " +
                           std::to_string(grid.size()));
    }
}

/// Root of the trapezoidal sum of squared magnitudes over integer frequencies [lo, hi].
inline double band_norm(const double* magnitude, std::size_t lo, std::size_t hi)
{
    double sum = 0.0;
    for (std::size_t w = lo; w <= hi; ++w) {
        const double m2 = magnitude[w] * magnitude[w];
        sum += (w == lo || w == hi) ? 0.5 * m2 : m2;
    }
    return std::sqrt(sum);
}

inline std::string edge_name(const Edge& e)
{
    return "(" + std::to_string(e[0]) + ", " + std::to_string(e[1]) + ")";
}

} // namespace detail

/// Per-vertex weight field for a vertex kind.
inline Eigen::VectorXd vertex_weights(const WeightingSpec& spec, const SpectralBasis& basis,
                                      const TimeGrid& grid)
{
    spec.validate();
    switch (spec.kind) {
    case WeightKind::Heat: return auto_diffusivity(basis, spec.t);
    case WeightKind::Commute: return commute_time_diagonal(basis);
    case WeightKind::ScaleInvariantHeat: {
        detail::require_grid_band(grid, spec.omega);
        return modified_heat_kernel_diagonal(basis, grid, spec.omega + 1).col(static_cast<Eigen::Index>(spec.omega));
    }
    case WeightKind::ScaleInvariantHeatNorm: {
        detail::require_grid_band(grid, spec.omega_hi);
        const Eigen::MatrixXd mag = modified_heat_kernel_diagonal(basis, grid, spec.omega_hi + 1);
        Eigen::VectorXd out(mag.rows());
        std::vector<double> row(mag.cols());
        for (Eigen::Index v = 0; v < mag.rows(); ++v) {
            for (Eigen::Index w = 0; w < mag.cols(); ++w) row[static_cast<std::size_t>(w)] = mag(v, w);
            out(v) = detail::band_norm(row.data(), spec.omega_lo, spec.omega_hi);
        }
        return out;
    }
    default: throw InvalidInput("'" + spec.to_string() + "' is an edge weighting, not a vertex weighting");
    }
}

/// Per-edge weight field for an edge kind, evaluated only on the given edges.
inline Eigen::VectorXd edge_weights(const WeightingSpec& spec, const SpectralBasis& basis,
                                    const TimeGrid& grid, const std::vector<Edge>& edges)
{
    spec.validate();
    const auto E = static_cast<Eigen::Index>(edges.size());
    Eigen::VectorXd out(E);
    const Eigen::MatrixXd phiT = basis.eigenvectors.transpose(); // k x N, vertex columns contiguous
    auto inverse = [&](Eigen::Index e, double denom, const char* what) {
        if (!(denom > 0.0)) {
            throw NumericalError("edge " + detail::edge_name(edges[static_cast<std::size_t>(e)]) + ": " +
                                 what + " = " + detail::format_double(denom) +
                                 " is not positive (too few eigenpairs or a bad mesh?)");
        }
        return 1.0 / denom;
    };

    switch (spec.kind) {
    case WeightKind::AbsDiff: {
        const Eigen::VectorXd f = vertex_weights(spec.inner_spec(), basis, grid);
        for (Eigen::Index e = 0; e < E; ++e) {
            const Edge& ed = edges[static_cast<std::size_t>(e)];
            out(e) = std::abs(f(static_cast<Eigen::Index>(ed[0])) - f(static_cast<Eigen::Index>(ed[1])));
        }
        return out;
    }
    case WeightKind::InverseHeat: {
        detail::require_time(spec.t);
        const Eigen::VectorXd decay = (-basis.eigenvalues.array() * spec.t).exp().matrix();
        for (Eigen::Index e = 0; e < E; ++e) {
            const Edge& ed = edges[static_cast<std::size_t>(e)];
            const double h = (phiT.col(static_cast<Eigen::Index>(ed[0])).array() *
                              phiT.col(static_cast<Eigen::Index>(ed[1])).array() * decay.array())
                                 .sum();
            out(e) = inverse(e, h, "h_t(v1, v2)");
        }
        return out;
    }
    case WeightKind::InverseCommute: {
        require_commute_basis(basis);
        Eigen::VectorXd inv = basis.eigenvalues.cwiseInverse();
        inv(0) = 0.0;
        for (Eigen::Index e = 0; e < E; ++e) {
            const Edge& ed = edges[static_cast<std::size_t>(e)];
            const double c = (phiT.col(static_cast<Eigen::Index>(ed[0])).array() *
                              phiT.col(static_cast<Eigen::Index>(ed[1])).array() * inv.array())
                                 .sum();
            out(e) = inverse(e, c, "c(v1, v2)");
        }
        return out;
    }
    case WeightKind::InverseScaleInvariantNorm: {
        detail::require_grid_band(grid, spec.omega_hi);
        for (Eigen::Index e = 0; e < E; ++e) {
            const Edge& ed = edges[static_cast<std::size_t>(e)];
            std::vector<double> mag;
            try {
                mag = modified_heat_kernel(basis, grid, ed[0], ed[1]);
            } catch (const NumericalError& err) {
                throw NumericalError("edge " + detail::edge_name(ed) + ": " + err.what());
            }
            out(e) = inverse(e, detail::band_norm(mag.data(), spec.omega_lo, spec.omega_hi),
                             "||modified h(v1, v2)||");
        }
        return out;
    }
    case WeightKind::DiffusionDistance: {
        detail::require_time(spec.t);
        const Eigen::VectorXd decay = (-2.0 * basis.eigenvalues.array() * spec.t).exp().matrix();
        for (Eigen::Index e = 0; e < E; ++e) {
            const Edge& ed = edges[static_cast<std::size_t>(e)];
            const Eigen::VectorXd diff =
                phiT.col(static_cast<Eigen::Index>(ed[0])) - phiT.col(static_cast<Eigen::Index>(ed[1]));
            out(e) = std::sqrt((diff.array().square() * decay.array()).sum());
        }
        return out;
    }
    case WeightKind::HeatTimeNorm: {
        std::vector<double> times;
        for (double t : grid.times) {
            if (t >= spec.t_lo && t <= spec.t_hi) times.push_back(t);
        }
        if (times.size() < 2) throw InvalidInput("time band [t1, t2] holds fewer than two grid samples");
        const auto T = static_cast<Eigen::Index>(times.size());
        Eigen::MatrixXd decay(basis.size(), T);
        for (Eigen::Index m = 0; m < T; ++m) {
            decay.col(m) = (-basis.eigenvalues.array() * times[static_cast<std::size_t>(m)]).exp();
        }
        const Eigen::MatrixXd diag = phiT.array().square().matrix().transpose() * decay; // N x T
        for (Eigen::Index e = 0; e < E; ++e) {
            const Edge& ed = edges[static_cast<std::size_t>(e)];
            const auto a = static_cast<Eigen::Index>(ed[0]), b = static_cast<Eigen::Index>(ed[1]);
            double integral = 0.0;
            for (Eigen::Index m = 0; m + 1 < T; ++m) {
                const double g0 = diag(a, m) - diag(b, m);
                const double g1 = diag(a, m + 1) - diag(b, m + 1);
                integral += 0.5 * (times[static_cast<std::size_t>(m + 1)] - times[static_cast<std::size_t>(m)]) *
                            (g0 * g0 + g1 * g1);
            }
            out(e) = std::sqrt(integral);
        }
        return out;
    }
    default: throw InvalidInput("'" + spec.to_string() + "' is a vertex weighting, not an edge weighting");
    }
}

} // namespace diffmsc
