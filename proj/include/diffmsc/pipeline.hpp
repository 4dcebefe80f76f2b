#pragma once

// Versioned JSON documents and the stages of the command-line pipeline.

#include <diffmsc/descriptors.hpp>
#include <diffmsc/detector.hpp>
#include <diffmsc/evaluation.hpp>
#include <diffmsc/laplacian.hpp>
#include <diffmsc/spectral_cache.hpp>
#include <diffmsc/weighting.hpp>

#include <json.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace diffmsc {

using json = nlohmann::json;

inline constexpr int kDocumentVersion = 1;

namespace detail {

/// JSON has no infinity; non-finite values are written as strings.
inline json number(double v)
{
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline double number_from(const json& j)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw InvalidInput("expected a number, got " + j.dump());
}

inline json vector_json(const Eigen::VectorXd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
    return a;
}

inline Eigen::VectorXd vector_from(const json& j)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from(j[i]);
    return v;
}

inline std::string values_hash(std::span<const double> values)
{
    Fnv1a h;
    h.u64(values.size());
    for (double v : values) h.f64(v);
    return hex64(h.value());
}

inline void require_format(const json& doc, const std::string& expected, const std::string& source)
{
    if (!doc.is_object() || !doc.contains("format") || !doc.contains("version")) {
        throw ConsistencyError(source + ": not a " + expected + " document");
    }
    const auto format = doc.at("format").get<std::string>();
    if (format != expected) throw ConsistencyError(source + ": expected a " + expected + " document, found " + format);
    if (doc.at("version").get<int>() != kDocumentVersion) {
        throw ConsistencyError(source + ": unsupported " + expected + " version " + doc.at("version").dump());
    }
}

} // namespace detail

inline json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << text;
    if (!out) throw InvalidInput("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& doc)
{
    write_text(path, doc.dump(2) + "\n");
}

/// Detected regions of one mesh, optionally with one descriptor per region.
struct RegionsDocument {
    std::string mesh_hash;
    std::size_t vertex_count = 0;
    json config = json::object();
    std::vector<StableRegion> regions;
    json descriptor_config;                ///< null when no descriptors are attached
    std::vector<Eigen::VectorXd> descriptors;

    bool has_descriptors() const { return !descriptor_config.is_null(); }

    std::vector<Region> vertex_sets() const
    {
        std::vector<Region> out;
        for (const auto& r : regions) out.push_back(r.vertices);
        return out;
    }

    json to_json() const
    {
        json doc;
        doc["format"] = has_descriptors() ? "diffmsc-descriptors" : "diffmsc-regions";
        doc["version"] = kDocumentVersion;
        doc["mesh_hash"] = mesh_hash;
        doc["vertex_count"] = vertex_count;
        doc["config"] = config;
        if (has_descriptors()) doc["descriptor"] = descriptor_config;
        json list = json::array();
        for (std::size_t i = 0; i < regions.size(); ++i) {
            const auto& r = regions[i];
            json item;
            item["vertices"] = r.vertices;
            item["altitude"] = detail::number(r.altitude);
            item["score"] = detail::number(r.score);
            item["area"] = detail::number(r.area);
            item["node"] = r.node;
            if (has_descriptors()) item["descriptor"] = detail::vector_json(descriptors[i]);
            list.push_back(std::move(item));
        }
        doc["regions"] = std::move(list);
        return doc;
    }

    static RegionsDocument from_json(const json& doc, const std::string& source = "document")
    {
        const bool with_desc = doc.is_object() && doc.value("format", "") == "diffmsc-descriptors";
        detail::require_format(doc, with_desc ? "diffmsc-descriptors" : "diffmsc-regions", source);
        RegionsDocument out;
        try {
            out.mesh_hash = doc.at("mesh_hash").get<std::string>();
            out.vertex_count = doc.at("vertex_count").get<std::size_t>();
            out.config = doc.at("config");
            if (with_desc) out.descriptor_config = doc.at("descriptor");
            for (const auto& item : doc.at("regions")) {
                StableRegion r;
                r.vertices = item.at("vertices").get<std::vector<std::size_t>>();
                r.altitude = detail::number_from(item.at("altitude"));
                r.score = detail::number_from(item.at("score"));
                r.area = detail::number_from(item.at("area"));
                r.node = item.at("node").get<std::size_t>();
                for (std::size_t v : r.vertices) {
                    if (v >= out.vertex_count) {
                        throw ConsistencyError(source + ": region vertex " + std::to_string(v) + " out of range");
                    }
                }
                if (with_desc) out.descriptors.push_back(detail::vector_from(item.at("descriptor")));
                out.regions.push_back(std::move(r));
            }
        } catch (const json::exception& e) {
            throw ConsistencyError(source + ": malformed document: " + e.what());
        }
        return out;
    }
};

inline RegionsDocument load_regions_document(const std::filesystem::path& path)
{
    return RegionsDocument::from_json(read_json(path), path.string());
}

// ---------------------------------------------------------------------------------------
// spectrum

struct SpectrumResult {
    SpectralCache cache;
    bool reused = false;
};

inline void require_cache_matches(const SpectralCache& cache, const TriangleMesh& mesh, const std::string& source)
{
    const std::string hash = mesh_hash(mesh);
    if (cache.mesh_hash != hash) {
        throw ConsistencyError(source + ": cache was computed for mesh hash " + cache.mesh_hash +
                               " but this mesh hashes to " + hash);
    }
    if (static_cast<std::size_t>(cache.basis.vertex_count()) != mesh.vertex_count()) {
        throw ConsistencyError(source + ": cache has " + std::to_string(cache.basis.vertex_count()) +
                               " vertices, mesh has " + std::to_string(mesh.vertex_count()));
    }
}

inline void require_valid_basis(const SpectralCache& cache, const BasisCheck& check, const std::string& source)
{
    if (cache.basis.areas.size() != cache.basis.vertex_count() || !check.ok()) {
        throw ConsistencyError(source + ": eigenbasis fails validation (orthonormality " +
                               detail::format_double(check.orthonormality) + ", residual " +
                               detail::format_double(check.residual) + ")");
    }
}

/// Loads a cache that need not be tied to a mesh; every check except the residual applies.
inline SpectralCache load_checked_cache(const std::filesystem::path& path)
{
    SpectralCache cache = load_spectral_cache(path);
    require_valid_basis(cache, check_basis(cache.basis), path.string());
    return cache;
}

inline SpectralCache load_cache_for(const std::filesystem::path& path, const TriangleMesh& mesh)
{
    SpectralCache cache = load_spectral_cache(path);
    require_cache_matches(cache, mesh, path.string());
    require_valid_basis(cache, check_basis(cache.basis, cotangent_stiffness(mesh)), path.string());
    return cache;
}

/// Loads the cache at `path` when it already holds a valid k-term basis of this mesh;
/// otherwise solves and writes it.
inline SpectrumResult ensure_spectrum(const TriangleMesh& mesh, const std::filesystem::path& path, Eigen::Index k,
                                      const EigensolverOptions& options = {}, Diagnostics* diag = nullptr)
{
    if (k < 1 || static_cast<std::size_t>(k) > mesh.vertex_count()) {
        throw InvalidInput("k = " + std::to_string(k) + " must lie in [1, " + std::to_string(mesh.vertex_count()) +
                           "]");
    }
    const SparseMatrix W = cotangent_stiffness(mesh);
    const VertexAreas areas = vertex_areas(mesh, diag);
    if (std::filesystem::exists(path)) {
        try {
            SpectralCache cache = load_cache_for(path, mesh);
            if (cache.basis.size() == k && check_basis(cache.basis, W).ok()) return {std::move(cache), true};
            warn(diag, path.string() + ": existing cache does not match the request, recomputing");
        } catch (const ConsistencyError& e) {
            warn(diag, std::string(e.what()) + "; recomputing");
        }
    }
    SpectrumResult out;
    out.cache.mesh_hash = mesh_hash(mesh);
    out.cache.basis = eigenpairs(W, mass_matrix(areas), k, options);
    const BasisCheck check = check_basis(out.cache.basis, W);
    if (!check.ok()) {
        throw NumericalError("eigenbasis fails validation: residual " + detail::format_double(check.residual) +
                                 ", orthonormality " + detail::format_double(check.orthonormality),
                             check.residual);
    }
    save_spectral_cache(path, out.cache);
    return out;
}

// ---------------------------------------------------------------------------------------
// detect

struct DetectRequest {
    WeightingSpec weight;
    std::optional<double> max_instability; ///< default: the weighting's own cutoff
    std::optional<double> dedup = 0.8;
    double min_frac = 0.005;
    double max_frac = 0.5;

    DetectorParams params() const
    {
        DetectorParams p;
        p.max_instability = max_instability ? *max_instability : weight.default_max_instability();
        p.overlap_dedup = dedup;
        p.min_region_frac = min_frac;
        p.max_region_frac = max_frac;
        return p;
    }

    json params_json() const
    {
        const DetectorParams p = params();
        json c;
        c["max_instability"] = detail::number(p.max_instability);
        c["dedup"] = dedup ? json(*dedup) : json(nullptr);
        c["min_frac"] = min_frac;
        c["max_frac"] = max_frac;
        return c;
    }
};

inline RegionsDocument make_regions_document(const TriangleMesh& mesh, const WeightedGraph& graph,
                                             const DetectorParams& params, json config)
{
    RegionsDocument doc;
    doc.mesh_hash = mesh_hash(mesh);
    doc.vertex_count = mesh.vertex_count();
    doc.config = std::move(config);
    doc.regions = detect(build_tree(graph), params);
    return doc;
}

/// Detection with a diffusion-geometric weighting computed from the cached basis.
inline RegionsDocument detect_regions(const TriangleMesh& mesh, const SpectralCache& cache,
                                      const DetectRequest& request)
{
    require_cache_matches(cache, mesh, "spectral cache");
    const DetectorParams params = request.params();
    params.validate();
    const TimeGrid grid = TimeGrid::standard();
    std::vector<double> areas(cache.basis.areas.data(), cache.basis.areas.data() + cache.basis.areas.size());
    Eigen::VectorXd w = request.weight.is_vertex() ? vertex_weights(request.weight, cache.basis, grid)
                                                   : edge_weights(request.weight, cache.basis, grid, mesh.edges());
    std::vector<double> weights(w.data(), w.data() + w.size());
    WeightedGraph graph = request.weight.is_vertex()
                              ? WeightedGraph::vertex_weighted(mesh.vertex_count(), mesh.edges(), weights, areas)
                              : WeightedGraph::edge_weighted(mesh.vertex_count(), mesh.edges(), weights, areas);
    json config = request.params_json();
    config["weight"] = request.weight.to_string();
    config["k"] = cache.basis.size();
    return make_regions_document(mesh, graph, params, std::move(config));
}

/// Detection on an externally supplied per-vertex scalar field.
inline RegionsDocument detect_on_field(const TriangleMesh& mesh, const std::vector<double>& field,
                                       const DetectRequest& request)
{
    if (field.size() != mesh.vertex_count()) {
        throw ConsistencyError("field has " + std::to_string(field.size()) + " values but the mesh has " +
                               std::to_string(mesh.vertex_count()) + " vertices");
    }
    DetectorParams params = request.params();
    if (!request.max_instability) params.max_instability = std::numeric_limits<double>::infinity();
    params.validate();
    const VertexAreas areas = vertex_areas(mesh);
    WeightedGraph graph = WeightedGraph::vertex_weighted(mesh.vertex_count(), mesh.edges(), field, areas.da);
    json config = request.params_json();
    config["max_instability"] = detail::number(params.max_instability);
    config["weight"] = "field";
    config["field_hash"] = detail::values_hash(field);
    return make_regions_document(mesh, graph, params, std::move(config));
}

/// One value per line ('#' comments allowed).
inline std::vector<double> read_field(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open field file " + path.string());
    std::vector<double> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        try {
            out.push_back(detail::parse_double(t, number));
        } catch (const InvalidInput& e) {
            throw InvalidInput(path.string() + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------
// descriptors and vocabularies

enum class PointKind { HKS, SIHKS };

struct PointDescriptorConfig {
    PointKind kind = PointKind::SIHKS;
    std::vector<double> hks_times = default_hks_times();
    std::size_t sihks_frequencies = 6;

    std::string name() const { return kind == PointKind::HKS ? "hks" : "sihks"; }

    std::vector<double> parameters() const
    {
        if (kind == PointKind::HKS) return hks_times;
        std::vector<double> w;
        for (std::size_t i = 0; i < sihks_frequencies; ++i) w.push_back(static_cast<double>(i));
        return w;
    }

    static PointKind parse_kind(const std::string& s)
    {
        if (s == "hks") return PointKind::HKS;
        if (s == "sihks") return PointKind::SIHKS;
        throw InvalidInput("unknown point descriptor '" + s + "' (expected hks or sihks)");
    }
};

inline PointDescriptorField point_field(const SpectralBasis& basis, const PointDescriptorConfig& config)
{
    if (config.kind == PointKind::HKS) return hks_field(basis, config.hks_times);
    return sihks_field(basis, TimeGrid::standard(), config.sihks_frequencies);
}

/// Vocabulary together with the point descriptor it quantizes.
struct VocabularyFile {
    Vocabulary vocab;
    std::string point_descriptor;
    std::vector<double> parameters;

    json to_json() const
    {
        json doc;
        doc["format"] = "diffmsc-vocabulary";
        doc["version"] = kDocumentVersion;
        doc["point_descriptor"] = point_descriptor;
        doc["parameters"] = parameters;
        doc["p"] = vocab.size();
        doc["q"] = vocab.dimension();
        doc["seed"] = vocab.seed;
        doc["iterations"] = vocab.iterations;
        doc["sigma"] = vocab.sigma;
        json rows = json::array();
        for (Eigen::Index r = 0; r < vocab.size(); ++r) rows.push_back(detail::vector_json(vocab.centroids.row(r).transpose()));
        doc["centroids"] = std::move(rows);
        return doc;
    }

    static VocabularyFile from_json(const json& doc, const std::string& source = "vocabulary")
    {
        detail::require_format(doc, "diffmsc-vocabulary", source);
        VocabularyFile out;
        try {
            out.point_descriptor = doc.at("point_descriptor").get<std::string>();
            out.parameters = doc.at("parameters").get<std::vector<double>>();
            const auto p = doc.at("p").get<Eigen::Index>();
            const auto q = doc.at("q").get<Eigen::Index>();
            const json& rows = doc.at("centroids");
            if (static_cast<Eigen::Index>(rows.size()) != p) throw ConsistencyError(source + ": centroid count differs from p");
            out.vocab.centroids.resize(p, q);
            for (Eigen::Index r = 0; r < p; ++r) {
                const Eigen::VectorXd c = detail::vector_from(rows[static_cast<std::size_t>(r)]);
                if (c.size() != q) throw ConsistencyError(source + ": centroid dimension differs from q");
                out.vocab.centroids.row(r) = c.transpose();
            }
            out.vocab.seed = doc.at("seed").get<std::uint64_t>();
            out.vocab.iterations = doc.at("iterations").get<int>();
            out.vocab.sigma = doc.at("sigma").get<double>();
        } catch (const json::exception& e) {
            throw ConsistencyError(source + ": malformed vocabulary: " + e.what());
        }
        return out;
    }

    std::string hash() const
    {
        std::vector<double> v(vocab.centroids.data(), vocab.centroids.data() + vocab.centroids.size());
        return detail::values_hash(v);
    }
};

inline VocabularyFile load_vocabulary(const std::filesystem::path& path)
{
    return VocabularyFile::from_json(read_json(path), path.string());
}

inline VocabularyFile train_vocabulary(const std::vector<SpectralBasis>& bases, const PointDescriptorConfig& config,
                                       Eigen::Index p, std::uint64_t seed, int max_iterations = 100)
{
    std::vector<Eigen::MatrixXd> training;
    for (const auto& b : bases) training.push_back(point_field(b, config).values);
    VocabularyFile out;
    out.vocab = build_vocabulary(training, p, seed, max_iterations);
    out.point_descriptor = config.name();
    out.parameters = config.parameters();
    return out;
}

struct DescribeRequest {
    bool bag_of_features = false;
    PointDescriptorConfig point;
    std::optional<double> sigma; ///< bag of features only; default from the vocabulary

    std::string name() const { return std::string(bag_of_features ? "bof-" : "avg-") + point.name(); }

    static DescribeRequest parse(const std::string& text)
    {
        DescribeRequest r;
        const auto dash = text.find('-');
        if (dash == std::string::npos) throw InvalidInput("descriptor '" + text + "' should look like avg-sihks or bof-hks");
        const std::string pool = text.substr(0, dash);
        if (pool == "avg") r.bag_of_features = false;
        else if (pool == "bof") r.bag_of_features = true;
        else throw InvalidInput("unknown region pooling '" + pool + "' (expected avg or bof)");
        r.point.kind = PointDescriptorConfig::parse_kind(text.substr(dash + 1));
        return r;
    }
};

/// Attaches one descriptor per region of `doc`.
inline RegionsDocument describe_regions(RegionsDocument doc, const SpectralCache& cache,
                                        const DescribeRequest& request, const VocabularyFile* vocab = nullptr)
{
    if (doc.mesh_hash != cache.mesh_hash) {
        throw ConsistencyError("regions document belongs to mesh " + doc.mesh_hash + " but the cache to " +
                               cache.mesh_hash);
    }
    const SpectralBasis& basis = cache.basis;
    const std::span<const double> areas(basis.areas.data(), static_cast<std::size_t>(basis.areas.size()));
    const PointDescriptorField field = point_field(basis, request.point);

    json cfg;
    cfg["kind"] = request.name();
    cfg["parameters"] = request.point.parameters();
    doc.descriptors.clear();
    if (request.bag_of_features) {
        if (!vocab) throw InvalidInput("descriptor " + request.name() + " needs a vocabulary (--vocab)");
        if (vocab->point_descriptor != request.point.name() || vocab->parameters != request.point.parameters()) {
            throw ConsistencyError("vocabulary was trained on " + vocab->point_descriptor +
                                   " descriptors with different parameters");
        }
        const double sigma = request.sigma ? *request.sigma : vocab->vocab.sigma;
        const Eigen::MatrixXd theta = quantize_field(field, vocab->vocab, sigma);
        for (const auto& r : doc.regions) doc.descriptors.push_back(region_bof(theta, r.vertices, areas).values);
        cfg["sigma"] = sigma;
        cfg["vocabulary"] = vocab->hash();
    } else {
        for (const auto& r : doc.regions) doc.descriptors.push_back(region_average(field, r.vertices, areas).values);
    }
    doc.descriptor_config = std::move(cfg);
    return doc;
}

// ---------------------------------------------------------------------------------------
// evaluation

struct EvalRequest {
    std::vector<double> thresholds;
    double rho = 0.75;

    static std::vector<double> default_thresholds()
    {
        std::vector<double> t;
        for (int i = 1; i < 20; ++i) t.push_back(i / 20.0);
        return t;
    }
};

struct EvalReport {
    std::vector<RepeatabilityPoint> repeatability;
    std::optional<RocCurve> roc;
    std::optional<MatchingResult> matching;
    OverlapTable overlaps;
    std::vector<std::string> warnings;
    json summary;
};

inline EvalReport evaluate(const RegionsDocument& null_doc, const TriangleMesh& null_mesh,
                           const RegionsDocument& tr_doc, const TriangleMesh& tr_mesh, const Correspondence& corr,
                           const EvalRequest& request)
{
    if (null_doc.mesh_hash != mesh_hash(null_mesh)) throw ConsistencyError("null document does not belong to the null mesh");
    if (tr_doc.mesh_hash != mesh_hash(tr_mesh)) {
        throw ConsistencyError("transformed document does not belong to the transformed mesh");
    }
    if (corr.null_vertex_count != null_mesh.vertex_count()) {
        throw ConsistencyError("correspondence targets " + std::to_string(corr.null_vertex_count) +
                               " null vertices, the null mesh has " + std::to_string(null_mesh.vertex_count()));
    }
    corr.validate(tr_mesh.vertex_count());

    Diagnostics diag;
    const VertexAreas null_areas = vertex_areas(null_mesh);
    const VertexAreas tr_areas = vertex_areas(tr_mesh);
    EvalReport report;
    report.overlaps = overlap_table(null_doc.vertex_sets(), tr_doc.vertex_sets(), corr, null_areas.da, tr_areas.da);
    if (null_doc.regions.empty()) diag.warn("null document has no regions");
    if (tr_doc.regions.empty()) diag.warn("transformed document has no regions");
    report.repeatability = repeatability(report.overlaps, request.thresholds, &diag);

    if (null_doc.has_descriptors() && tr_doc.has_descriptors()) {
        if (null_doc.descriptor_config.value("kind", "") != tr_doc.descriptor_config.value("kind", "")) {
            throw ConsistencyError("descriptor documents use different descriptor kinds");
        }
        if (!null_doc.regions.empty() && !tr_doc.regions.empty()) {
            const Eigen::MatrixXd d = descriptor_distances(null_doc.descriptors, tr_doc.descriptors);
            std::vector<double> dist, ov;
            for (Eigen::Index i = 0; i < d.rows(); ++i) {
                for (Eigen::Index j = 0; j < d.cols(); ++j) {
                    dist.push_back(d(i, j));
                    ov.push_back(report.overlaps.values(i, j));
                }
            }
            try {
                report.roc = descriptor_roc(dist, ov, request.rho);
            } catch (const InvalidInput& e) {
                diag.warn(std::string("ROC skipped: ") + e.what());
            }
            report.matching = matching_score(d, report.overlaps.values, request.thresholds);
        } else {
            diag.warn("descriptor metrics skipped: a document has no regions");
        }
    }

    auto at = [&](double o) -> const RepeatabilityPoint* {
        for (const auto& p : report.repeatability) {
            if (p.threshold == o) return &p;
        }
        return nullptr;
    };
    json s;
    s["format"] = "diffmsc-report";
    s["version"] = kDocumentVersion;
    s["null_mesh_hash"] = null_doc.mesh_hash;
    s["transformed_mesh_hash"] = tr_doc.mesh_hash;
    s["null_regions"] = null_doc.regions.size();
    s["transformed_regions"] = tr_doc.regions.size();
    s["config"] = {{"overlaps", request.thresholds},
                   {"rho", request.rho},
                   {"symmetric_map", corr.symmetric.has_value()},
                   {"null_config", null_doc.config},
                   {"transformed_config", tr_doc.config}};
    if (const auto* p = at(request.rho)) {
        s["repeatability"] = p->repeatability;
        s["correspondences"] = p->matched;
        s["evaluated_regions"] = p->evaluated;
    } else {
        s["repeatability"] = nullptr;
    }
    s["eer"] = report.roc ? json(report.roc->eer) : json(nullptr);
    if (report.matching) {
        json ms = nullptr;
        for (const auto& p : report.matching->curve) {
            if (p.rho == request.rho) ms = p.score;
        }
        s["matching_score"] = ms;
    } else {
        s["matching_score"] = nullptr;
    }
    s["warnings"] = diag.warnings;
    report.warnings = diag.warnings;
    report.summary = std::move(s);
    return report;
}

/// Writes repeatability.csv, roc.csv, matching.csv (when available) and summary.json.
inline void write_report(const std::filesystem::path& dir, const EvalReport& report)
{
    std::filesystem::create_directories(dir);
    std::ostringstream rep;
    write_repeatability_csv(rep, report.repeatability);
    write_text(dir / "repeatability.csv", rep.str());
    if (report.roc) {
        std::ostringstream roc;
        write_roc_csv(roc, *report.roc);
        write_text(dir / "roc.csv", roc.str());
    }
    if (report.matching) {
        std::ostringstream m;
        write_matching_csv(m, *report.matching);
        write_text(dir / "matching.csv", m.str());
    }
    write_json(dir / "summary.json", report.summary);
}

// ---------------------------------------------------------------------------------------
// PLY export

inline const std::array<std::array<unsigned char, 3>, 32>& region_palette()
{
    static const std::array<std::array<unsigned char, 3>, 32> palette{{
        {230, 25, 75},   {60, 180, 75},   {255, 225, 25},  {0, 130, 200},   {245, 130, 48},  {145, 30, 180},
        {70, 240, 240},  {240, 50, 230},  {210, 245, 60},  {250, 190, 212}, {0, 128, 128},   {220, 190, 255},
        {170, 110, 40},  {255, 250, 200}, {128, 0, 0},     {170, 255, 195}, {128, 128, 0},   {255, 215, 180},
        {0, 0, 128},     {0, 0, 0},       {255, 0, 0},     {0, 255, 0},     {0, 0, 255},     {255, 255, 0},
        {255, 0, 255},   {0, 255, 255},   {255, 128, 0},   {128, 0, 255},   {0, 255, 128},   {255, 0, 128},
        {64, 0, 0},      {0, 64, 0},
    }};
    return palette;
}

inline constexpr std::array<unsigned char, 3> kUnassignedColor{160, 160, 160};

/// ASCII PLY with per-vertex colors. Region i (document order) gets palette entry
/// i mod 32; larger regions are painted first so nested ones stay visible.
inline void write_ply(std::ostream& out, const TriangleMesh& mesh, const std::vector<StableRegion>& regions)
{
    const std::size_t n = mesh.vertex_count();
    std::vector<std::array<unsigned char, 3>> color(n, kUnassignedColor);
    std::vector<std::size_t> order(regions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return regions[a].vertices.size() > regions[b].vertices.size();
    });
    for (std::size_t i : order) {
        for (std::size_t v : regions[i].vertices) {
            if (v >= n) throw ConsistencyError("region vertex " + std::to_string(v) + " out of range");
            color[v] = region_palette()[i % region_palette().size()];
        }
    }
    out << "ply\nformat ascii 1.0\n"
        << "element vertex " << n << "\n"
        << "property double x\nproperty double y\nproperty double z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        << "element face " << mesh.face_count() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t v = 0; v < n; ++v) {
        const Vec3& p = mesh.positions()[v];
        out << detail::format_double(p.x()) << ' ' << detail::format_double(p.y()) << ' '
            << detail::format_double(p.z()) << ' ' << int(color[v][0]) << ' ' << int(color[v][1]) << ' '
            << int(color[v][2]) << '\n';
    }
    for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

} // namespace diffmsc
