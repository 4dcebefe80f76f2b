// diffmsc: command-line driver for spectra, stable region detection, descriptors and
// benchmark evaluation.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
// 3 inconsistent data (stale cache, hash or length mismatch).

#include <diffmsc/diffmsc.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <future>
#include <iostream>

namespace fs = std::filesystem;
using namespace diffmsc;

namespace {

void print_warnings(const Diagnostics& diag)
{
    for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';
}

struct SpectrumArgs {
    std::vector<std::string> meshes;
    std::vector<std::string> caches;
    long k = 200;
    std::uint64_t seed = EigensolverOptions{}.seed;
    unsigned jobs = 1;
};

int run_spectrum(const SpectrumArgs& a)
{
    if (a.meshes.size() != a.caches.size()) {
        throw InvalidInput("give one --cache per --mesh (" + std::to_string(a.meshes.size()) + " meshes, " +
                           std::to_string(a.caches.size()) + " caches)");
    }
    EigensolverOptions opts;
    opts.seed = a.seed;
    auto one = [&](std::size_t i) {
        Diagnostics diag;
        const TriangleMesh mesh = load_mesh(a.meshes[i], &diag);
        if (a.k > static_cast<long>(mesh.vertex_count())) {
            throw InvalidInput(a.meshes[i] + ": --k " + std::to_string(a.k) + " exceeds the vertex count " +
                               std::to_string(mesh.vertex_count()));
        }
        const SpectrumResult r = ensure_spectrum(mesh, a.caches[i], a.k, opts, &diag);
        std::ostringstream msg;
        msg << a.caches[i] << ": " << (r.reused ? "up to date" : "written") << " (N=" << mesh.vertex_count()
            << ", k=" << r.cache.basis.size() << ", hash " << r.cache.mesh_hash << ")\n";
        return std::make_pair(msg.str(), diag);
    };
    // shapes are independent; run up to `jobs` of them at once
    const std::size_t jobs = std::max(1u, a.jobs);
    for (std::size_t start = 0; start < a.meshes.size(); start += jobs) {
        std::vector<std::future<std::pair<std::string, Diagnostics>>> batch;
        for (std::size_t i = start; i < std::min(a.meshes.size(), start + jobs); ++i) {
            batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, one, i));
        }
        for (auto& f : batch) {
            auto [msg, diag] = f.get();
            print_warnings(diag);
            std::cout << msg;
        }
    }
    return 0;
}

struct DetectArgs {
    std::string mesh, cache, field, out;
    std::string weight = "vw:heat:t=2048";
    std::optional<double> max_instability;
    std::string dedup = "0.8";
    double min_frac = 0.005;
    double max_frac = 0.5;
};

std::optional<double> parse_dedup(const std::string& s)
{
    if (s == "off" || s == "none") return std::nullopt;
    return detail::parse_double(s, 0);
}

int run_detect(const DetectArgs& a)
{
    Diagnostics diag;
    const TriangleMesh mesh = load_mesh(a.mesh, &diag);
    DetectRequest req;
    req.weight = WeightingSpec::parse(a.weight);
    req.max_instability = a.max_instability;
    try {
        req.dedup = parse_dedup(a.dedup);
    } catch (const InvalidInput&) {
        throw InvalidInput("--dedup expects a number in [0, 1] or 'off', got '" + a.dedup + "'");
    }
    req.min_frac = a.min_frac;
    req.max_frac = a.max_frac;
    RegionsDocument doc;
    if (!a.field.empty()) {
        doc = detect_on_field(mesh, read_field(a.field), req);
    } else {
        if (a.cache.empty()) throw InvalidInput("detect needs --cache (or --field)");
        doc = detect_regions(mesh, load_cache_for(a.cache, mesh), req);
    }
    write_json(a.out, doc.to_json());
    print_warnings(diag);
    std::cout << a.out << ": " << doc.regions.size() << " regions\n";
    return 0;
}

struct DescribeArgs {
    std::string regions, cache, vocab, out;
    std::string descriptor = "avg-sihks";
    std::optional<double> sigma;
    std::vector<double> hks_times;
};

int run_describe(const DescribeArgs& a)
{
    RegionsDocument doc = load_regions_document(a.regions);
    const SpectralCache cache = load_checked_cache(a.cache);
    DescribeRequest req = DescribeRequest::parse(a.descriptor);
    if (!a.hks_times.empty()) req.point.hks_times = a.hks_times;
    req.sigma = a.sigma;
    std::optional<VocabularyFile> vocab;
    if (!a.vocab.empty()) vocab = load_vocabulary(a.vocab);
    doc = describe_regions(std::move(doc), cache, req, vocab ? &*vocab : nullptr);
    write_json(a.out, doc.to_json());
    std::cout << a.out << ": " << doc.descriptors.size() << " descriptors (" << req.name() << ")\n";
    return 0;
}

struct VocabArgs {
    std::vector<std::string> caches;
    std::string descriptor = "sihks";
    std::string out;
    long p = 10;
    std::uint64_t seed = 1;
    int iterations = 100;
    std::vector<double> hks_times;
};

int run_vocab(const VocabArgs& a)
{
    PointDescriptorConfig cfg;
    cfg.kind = PointDescriptorConfig::parse_kind(a.descriptor);
    if (!a.hks_times.empty()) cfg.hks_times = a.hks_times;
    std::vector<SpectralBasis> bases;
    for (const auto& c : a.caches) bases.push_back(load_checked_cache(c).basis);
    const VocabularyFile v = train_vocabulary(bases, cfg, a.p, a.seed, a.iterations);
    write_json(a.out, v.to_json());
    std::cout << a.out << ": " << v.vocab.size() << " words, " << v.vocab.iterations << " iterations\n";
    return 0;
}

struct EvalArgs {
    std::string null_doc, transformed_doc, null_mesh, mesh, corr, corr_sym, out;
    std::vector<double> overlaps;
    double rho = 0.75;
};

int run_eval(const EvalArgs& a)
{
    const TriangleMesh null_mesh = load_mesh(a.null_mesh);
    const TriangleMesh tr_mesh = load_mesh(a.mesh);
    Correspondence corr;
    corr.direct = read_correspondence(fs::path(a.corr));
    if (!a.corr_sym.empty()) corr.symmetric = read_correspondence(fs::path(a.corr_sym));
    corr.null_vertex_count = null_mesh.vertex_count();
    EvalRequest req;
    req.thresholds = a.overlaps.empty() ? EvalRequest::default_thresholds() : a.overlaps;
    req.rho = a.rho;
    const EvalReport report = evaluate(load_regions_document(a.null_doc), null_mesh,
                                       load_regions_document(a.transformed_doc), tr_mesh, corr, req);
    write_report(a.out, report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << report.summary.dump(2) << '\n';
    return 0;
}

struct ExportArgs {
    std::string mesh, regions, out;
};

int run_export(const ExportArgs& a)
{
    const TriangleMesh mesh = load_mesh(a.mesh);
    const RegionsDocument doc = load_regions_document(a.regions);
    if (doc.mesh_hash != mesh_hash(mesh)) throw ConsistencyError("regions document does not belong to " + a.mesh);
    std::ostringstream ply;
    write_ply(ply, mesh, doc.regions);
    write_text(a.out, ply.str());
    std::cout << a.out << ": " << doc.regions.size() << " regions painted\n";
    return 0;
}

struct SynthArgs {
    std::string shape = "blob";
    int subdivisions = 4;
    std::size_t frequency = 0;
    std::size_t nx = 20, ny = 20;
    double scale = 1.0;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> rotate;
    std::optional<std::uint64_t> permute;
    std::string from, out, corr_out;
};

int run_synth(const SynthArgs& a)
{
    TriangleMesh mesh = [&] {
        if (!a.from.empty()) return load_mesh(a.from);
        const TriangleMesh sphere =
            a.frequency > 0 ? primitives::geodesic_sphere(a.frequency) : primitives::icosphere(a.subdivisions);
        if (a.shape == "blob") return primitives::blobify(sphere, a.seed);
        if (a.shape == "sphere") return sphere;
        if (a.shape == "grid") return primitives::random_grid(a.nx, a.ny, a.seed);
        throw InvalidInput("unknown shape '" + a.shape + "' (expected blob, sphere or grid)");
    }();
    const Eigen::Matrix3d R = a.rotate ? primitives::random_rotation(*a.rotate) : Eigen::Matrix3d::Identity();
    const Eigen::Vector3d t = a.rotate ? Eigen::Vector3d(3.0, -2.0, 1.0) : Eigen::Vector3d::Zero();
    mesh = primitives::transformed(mesh, R, t, a.scale);
    std::vector<std::int64_t> corr(mesh.vertex_count());
    for (std::size_t i = 0; i < corr.size(); ++i) corr[i] = static_cast<std::int64_t>(i);
    if (a.permute) {
        primitives::PermutedMesh pm = primitives::permuted(mesh, *a.permute);
        for (std::size_t i = 0; i < corr.size(); ++i) corr[i] = static_cast<std::int64_t>(pm.to_original[i]);
        mesh = std::move(pm.mesh);
    }
    write_off(a.out, mesh);
    if (!a.corr_out.empty()) {
        std::ostringstream c;
        write_correspondence(c, corr);
        write_text(a.corr_out, c.str());
    }
    std::cout << a.out << ": " << mesh.vertex_count() << " vertices, " << mesh.face_count() << " faces\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Diffusion-geometric maximally stable components on triangle meshes"};
    app.require_subcommand(1);

    SpectrumArgs sp;
    auto* spectrum = app.add_subcommand("spectrum", "compute (or reuse) the Laplace-Beltrami eigenbasis cache");
    spectrum->add_option("--mesh", sp.meshes, "mesh file (.off/.obj), repeatable")->required();
    spectrum->add_option("--cache", sp.caches, "output cache file, one per mesh")->required();
    spectrum->add_option("--k", sp.k, "number of eigenpairs (at most the vertex count)")->capture_default_str()
        ->check(CLI::PositiveNumber);
    spectrum->add_option("--seed", sp.seed, "eigensolver start-block seed")->capture_default_str();
    spectrum->add_option("--jobs", sp.jobs, "meshes processed concurrently")->capture_default_str();

    DetectArgs dt;
    auto* detect_cmd = app.add_subcommand("detect", "detect maximally stable components");
    detect_cmd->add_option("--mesh", dt.mesh)->required();
    detect_cmd->add_option("--cache", dt.cache, "spectral cache of the mesh");
    detect_cmd->add_option("--weight", dt.weight, "weighting, e.g. vw:heat:t=2048, ew:invct")->capture_default_str();
    detect_cmd->add_option("--field", dt.field, "per-vertex scalar file used instead of --weight");
    detect_cmd->add_option("--max-instability", dt.max_instability, "score cutoff (default depends on --weight)");
    detect_cmd->add_option("--dedup", dt.dedup, "nested-region area ratio threshold or 'off'")->capture_default_str();
    detect_cmd->add_option("--min-frac", dt.min_frac, "minimum region area fraction")->capture_default_str();
    detect_cmd->add_option("--max-frac", dt.max_frac, "maximum region area fraction")->capture_default_str();
    detect_cmd->add_option("--out", dt.out, "regions document (.json)")->required();

    DescribeArgs ds;
    auto* describe = app.add_subcommand("describe", "attach region descriptors to a regions document");
    describe->add_option("--regions", ds.regions)->required();
    describe->add_option("--cache", ds.cache)->required();
    describe->add_option("--descriptor", ds.descriptor, "avg-hks, avg-sihks, bof-hks or bof-sihks")
        ->capture_default_str();
    describe->add_option("--vocab", ds.vocab, "vocabulary file for bof-* descriptors");
    describe->add_option("--sigma", ds.sigma, "soft quantization spread; 0 = hard assignment")
        ->check(CLI::NonNegativeNumber);
    describe->add_option("--hks-times", ds.hks_times, "HKS time values");
    describe->add_option("--out", ds.out)->required();

    VocabArgs vc;
    auto* vocab = app.add_subcommand("vocab", "train a geometric vocabulary by k-means");
    vocab->add_option("--cache", vc.caches, "training caches, repeatable")->required();
    vocab->add_option("--descriptor", vc.descriptor, "hks or sihks")->capture_default_str();
    vocab->add_option("--p", vc.p, "vocabulary size")->capture_default_str();
    vocab->add_option("--seed", vc.seed)->capture_default_str();
    vocab->add_option("--iterations", vc.iterations, "Lloyd iteration budget")->capture_default_str();
    vocab->add_option("--hks-times", vc.hks_times, "HKS time values");
    vocab->add_option("--out", vc.out)->required();

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "repeatability, ROC/EER and matching score for a shape pair");
    eval->add_option("--null", ev.null_doc, "regions or descriptors document of the null shape")->required();
    eval->add_option("--transformed", ev.transformed_doc, "document of the transformed shape")->required();
    eval->add_option("--null-mesh", ev.null_mesh)->required();
    eval->add_option("--mesh", ev.mesh, "transformed mesh")->required();
    eval->add_option("--corr", ev.corr, "transformed-to-null vertex map")->required();
    eval->add_option("--corr-sym", ev.corr_sym, "map composed with the null shape's symmetry");
    eval->add_option("--overlap", ev.overlaps, "overlap thresholds (repeatable)");
    eval->add_option("--rho", ev.rho, "overlap defining a matching pair")->capture_default_str();
    eval->add_option("--out", ev.out, "report directory")->required();

    ExportArgs ex;
    auto* export_ply = app.add_subcommand("export-ply", "write a region-colored ASCII PLY");
    export_ply->add_option("--mesh", ex.mesh)->required();
    export_ply->add_option("--regions", ex.regions)->required();
    export_ply->add_option("--out", ex.out)->required();

    SynthArgs sy;
    auto* synth = app.add_subcommand("synth", "generate a test shape or a transformed copy with its correspondence");
    synth->add_option("--shape", sy.shape, "blob, sphere or grid")->capture_default_str();
    synth->add_option("--from", sy.from, "transform this mesh instead of generating one");
    synth->add_option("--subdivisions", sy.subdivisions, "icosphere subdivision levels")->capture_default_str();
    synth->add_option("--frequency", sy.frequency, "use a geodesic sphere with 10 f^2 + 2 vertices instead");
    synth->add_option("--nx", sy.nx)->capture_default_str();
    synth->add_option("--ny", sy.ny)->capture_default_str();
    synth->add_option("--scale", sy.scale)->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--seed", sy.seed)->capture_default_str();
    synth->add_option("--rotate", sy.rotate, "random rigid motion with this seed");
    synth->add_option("--permute", sy.permute, "shuffle vertex order with this seed");
    synth->add_option("--out", sy.out)->required();
    synth->add_option("--corr-out", sy.corr_out, "write the vertex map to the source mesh");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*spectrum) return run_spectrum(sp);
        if (*detect_cmd) return run_detect(dt);
        if (*describe) return run_describe(ds);
        if (*vocab) return run_vocab(vc);
        if (*eval) return run_eval(ev);
        if (*export_ply) return run_export(ex);
        if (*synth) return run_synth(sy);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const ConsistencyError& e) {
        std::cerr << "inconsistent data: " << e.what() << '\n';
        return 3;
    } catch (const MeshError& e) {
        std::cerr << "mesh error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
