#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace diffmsc;

namespace {

/// Node vertex set -> (altitude, area) as built by the library.
std::map<std::vector<std::size_t>, oracle::Component> library_components(const ComponentTree& t)
{
    std::map<std::vector<std::size_t>, oracle::Component> out;
    for (std::size_t id = 0; id < t.size(); ++id) out.emplace(t.members(id), oracle::Component{t[id].altitude, t[id].area});
    return out;
}

void expect_same_tree(const WeightedGraph& g)
{
    const ComponentTree tree = build_tree(g);
    const auto expected = oracle::threshold_components(g);
    const auto got = library_components(tree);
    ASSERT_EQ(got.size(), tree.size()) << "two nodes share a vertex set";
    ASSERT_EQ(got.size(), expected.size());
    for (const auto& [set, c] : expected) {
        const auto it = got.find(set);
        ASSERT_NE(it, got.end());
        EXPECT_EQ(it->second.altitude, c.altitude);
        EXPECT_EQ(it->second.area, c.area);
    }
}

WeightedGraph path_graph()
{
    return WeightedGraph::edge_weighted(3, {{0, 1}, {1, 2}}, {1.0, 2.0});
}

} // namespace

TEST(ComponentTree, PathGraphByHand)
{
    const ComponentTree t = build_tree(path_graph());
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.members(0), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(t[0].altitude, 1.0);
    EXPECT_EQ(t.members(1), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(t[1].altitude, 2.0);
    EXPECT_EQ(t[0].parent, 1u);
    EXPECT_EQ(t.roots(), (std::vector<std::size_t>{1}));
}

TEST(ComponentTree, EqualWeightsGiveOneRoot)
{
    const auto edges = oracle::grid_edges(4, 3);
    const ComponentTree e = build_tree(WeightedGraph::edge_weighted(12, edges, std::vector<double>(edges.size(), 3.0)));
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0].size, 12u);
    const ComponentTree v = build_tree(WeightedGraph::vertex_weighted(12, edges, std::vector<double>(12, 0.0)));
    ASSERT_EQ(v.size(), 1u);
}

TEST(ComponentTree, EmptyGraph)
{
    EXPECT_TRUE(build_tree(WeightedGraph::vertex_weighted(0, {}, {})).empty());
}

TEST(ComponentTree, InvalidGraphsRejected)
{
    EXPECT_THROW(WeightedGraph::vertex_weighted(2, {{0, 1}}, {1.0}), InvalidInput);
    EXPECT_THROW(WeightedGraph::vertex_weighted(2, {{0, 1}}, {1.0, -1.0}), InvalidInput);
    EXPECT_THROW(WeightedGraph::vertex_weighted(2, {{0, 1}}, {1.0, std::nan("")}), InvalidInput);
    EXPECT_THROW(WeightedGraph::edge_weighted(3, {{0, 1}, {0, 1}}, {1.0, 1.0}), InvalidInput);
    EXPECT_THROW(WeightedGraph::edge_weighted(3, {{1, 0}}, {1.0}), InvalidInput);
    EXPECT_THROW(WeightedGraph::edge_weighted(3, {{0, 3}}, {1.0}), InvalidInput);
}

TEST(ComponentTree, MatchesThresholdOracleOnRandomGraphs)
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 200; ++i) {
        const auto kind = i % 2 ? GraphWeighting::Edge : GraphWeighting::Vertex;
        expect_same_tree(oracle::random_graph(rng, 25, kind));
    }
}

TEST(ComponentTree, StructuralInvariants)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const WeightedGraph g = oracle::random_graph(rng, 30, i % 2 ? GraphWeighting::Edge : GraphWeighting::Vertex);
        const ComponentTree t = build_tree(g);
        double covered = 0.0;
        std::vector<char> seen(g.vertex_count, 0);
        for (std::size_t id = 0; id < t.size(); ++id) {
            const auto& n = t[id];
            if (n.parent != ComponentTree::npos) {
                EXPECT_LT(n.altitude, t[n.parent].altitude);
                EXPECT_LT(n.area, t[n.parent].area + 1e-12);
                const auto pm = t.members(n.parent), cm = t.members(id);
                EXPECT_TRUE(std::includes(pm.begin(), pm.end(), cm.begin(), cm.end()));
            }
            double kids = 0.0;
            for (std::size_t c : n.children) kids += t[c].area;
            EXPECT_LE(kids, n.area + 1e-12);
            for (std::size_t v : n.own_vertices) {
                EXPECT_FALSE(seen[v]);
                seen[v] = 1;
                covered += g.area(v);
            }
        }
        EXPECT_DOUBLE_EQ(t.covered_area(), covered);
    }
}

TEST(ComponentTree, UnitAreasCountVertices)
{
    const auto edges = oracle::grid_edges(5, 5);
    std::vector<double> w(25);
    for (std::size_t v = 0; v < 25; ++v) w[v] = static_cast<double>((v * 7) % 11);
    const ComponentTree t = build_tree(WeightedGraph::vertex_weighted(25, edges, w));
    for (std::size_t id = 0; id < t.size(); ++id) EXPECT_EQ(t[id].area, static_cast<double>(t.members(id).size()));
}

TEST(ComponentTree, DeterministicUnderEdgeOrder)
{
    std::mt19937_64 rng(3);
    const WeightedGraph g = oracle::random_graph(rng, 40, GraphWeighting::Edge);
    std::ostringstream a, b;
    build_tree(g).dump(a);
    build_tree(g).dump(b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_FALSE(a.str().empty());
}

TEST(ComponentTree, MonotoneTransformKeepsNodeSets)
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        WeightedGraph g = oracle::random_graph(rng, 30, i % 2 ? GraphWeighting::Edge : GraphWeighting::Vertex);
        const auto before = library_components(build_tree(g));
        for (auto& w : g.weights) w = std::exp(w) + w * w * w;
        const auto after = library_components(build_tree(g));
        ASSERT_EQ(before.size(), after.size());
        auto it = after.begin();
        for (const auto& [set, c] : before) EXPECT_EQ(set, (it++)->first);
    }
}

TEST(Instability, ChainArithmetic)
{
    // path 0-1-2 with vertex areas 1, 1, 8 entering at levels 1, 2, 3 -> (l, A) = (1,1), (2,2), (3,10)
    const WeightedGraph g = WeightedGraph::edge_weighted(4, {{0, 1}, {1, 2}, {2, 3}}, {1.0, 2.0, 3.0}, {0.5, 0.5, 1.0, 8.0});
    const ComponentTree t = build_tree(g);
    ASSERT_EQ(t.size(), 3u);
    const auto s = instability_scores(t);
    EXPECT_DOUBLE_EQ(*s[1], 4.5);
    EXPECT_DOUBLE_EQ(*s[0], 1.0);
    EXPECT_DOUBLE_EQ(*s[2], 8.0);
}

TEST(Instability, ConstantAreaBranchScoresZero)
{
    // a chain whose areas never grow: zero-area vertices joining at each level
    const WeightedGraph g =
        WeightedGraph::edge_weighted(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {1.0, 2.0, 3.0, 4.0}, {1.0, 1.0, 0.0, 0.0, 0.0});
    const auto s = instability_scores(build_tree(g));
    for (std::size_t i = 1; i + 1 < s.size(); ++i) EXPECT_EQ(*s[i], 0.0);
}

TEST(Instability, SingleNodeBranchUnscoreable)
{
    const ComponentTree t = build_tree(WeightedGraph::vertex_weighted(3, {{0, 1}, {1, 2}}, {1.0, 1.0, 1.0}));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_FALSE(instability_scores(t)[0].has_value());
    EXPECT_TRUE(detect(t, {}).empty());
}

TEST(Instability, MatchesOracleRecomputation)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const WeightedGraph g = oracle::random_graph(rng, 30, i % 2 ? GraphWeighting::Edge : GraphWeighting::Vertex);
        const ComponentTree t = build_tree(g);
        DetectorParams p;
        p.overlap_dedup.reset();
        p.min_region_frac = 0.0;
        p.max_region_frac = 1.0;
        std::vector<oracle::OracleRegion> got;
        for (const auto& r : detect(t, p)) got.push_back({r.vertices, r.score});
        std::sort(got.begin(), got.end(), [](const auto& a, const auto& b) { return a.vertices < b.vertices; });
        const auto expected = oracle::mser(oracle::oracle_tree(g));
        ASSERT_EQ(got.size(), expected.size()) << "graph " << i;
        for (std::size_t k = 0; k < got.size(); ++k) {
            EXPECT_EQ(got[k].vertices, expected[k].vertices);
            EXPECT_EQ(got[k].score, expected[k].score);
        }
    }
}

TEST(Detector, PlateauCountsOnceAtItsTop)
{
    // areas 1, 2, 3, 4, 10 at levels 1..5: scores 1, 1, 1, 3.5, 6 along the chain
    const WeightedGraph g = WeightedGraph::edge_weighted(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}},
                                                         {1.0, 2.0, 3.0, 4.0, 5.0}, {0.5, 0.5, 1.0, 1.0, 1.0, 6.0});
    const ComponentTree t = build_tree(g);
    const auto s = instability_scores(t);
    ASSERT_EQ(t.size(), 5u);
    EXPECT_EQ(*s[0], 1.0);
    EXPECT_EQ(*s[1], 1.0);
    EXPECT_EQ(*s[2], 1.0);
    EXPECT_EQ(local_minima(t, s), (std::vector<std::size_t>{2}));
}

TEST(Detector, TwoBasinGrid)
{
    const auto field = oracle::two_basin_field();
    const WeightedGraph g = WeightedGraph::vertex_weighted(400, oracle::grid_edges(20, 20), field);
    const auto regions = detect(build_tree(g), {});
    ASSERT_EQ(regions.size(), 2u);
    std::vector<std::vector<std::size_t>> sets{regions[0].vertices, regions[1].vertices};
    std::sort(sets.begin(), sets.end());
    EXPECT_EQ(sets[0], oracle::basin_vertices(5, 5));
    EXPECT_EQ(sets[1], oracle::basin_vertices(14, 14));
    EXPECT_LE(regions[0].score, regions[1].score);
    for (const auto& r : regions) EXPECT_EQ(r.area, 49.0);
}

TEST(Detector, NegativeCutoffGivesNothing)
{
    const WeightedGraph g = WeightedGraph::vertex_weighted(400, oracle::grid_edges(20, 20), oracle::two_basin_field());
    DetectorParams p;
    p.max_instability = -1.0;
    EXPECT_TRUE(detect(build_tree(g), p).empty());
}

TEST(Detector, ParameterValidation)
{
    DetectorParams p;
    p.overlap_dedup = 1.5;
    EXPECT_THROW(p.validate(), InvalidInput);
    p.overlap_dedup = 0.5;
    p.min_region_frac = 0.6;
    EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(Detector, RegionsAreTreeNodesAndConnected)
{
    std::mt19937_64 rng(21);
    for (int i = 0; i < 50; ++i) {
        const WeightedGraph g = oracle::random_graph(rng, 40, i % 2 ? GraphWeighting::Edge : GraphWeighting::Vertex);
        const ComponentTree t = build_tree(g);
        for (const auto& r : detect(t, {})) {
            EXPECT_EQ(t.members(r.node), r.vertices);
            EXPECT_GE(r.score, 0.0);
            EXPECT_EQ(r.area, t[r.node].area);
        }
    }
}

TEST(Detector, DedupIdempotentAndKeepsLarger)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const WeightedGraph g = oracle::random_graph(rng, 40, i % 2 ? GraphWeighting::Edge : GraphWeighting::Vertex);
        const ComponentTree t = build_tree(g);
        std::vector<std::size_t> all(t.size());
        std::iota(all.begin(), all.end(), 0);
        const auto once = deduplicate(t, all, 0.6);
        EXPECT_EQ(deduplicate(t, once, 0.6), once);
        for (std::size_t a : once) {
            for (std::size_t b : once) {
                if (a != b && t.is_ancestor(a, b)) EXPECT_LE(t[b].area / t[a].area, 0.6);
            }
        }
    }
}

TEST(Weighting, ParseAndFormat)
{
    for (const char* s : {"vw:heat:t=2048", "vw:ct", "vw:sihk:w=0", "vw:sihknorm:w1=0:w2=5", "ew:absdiff:heat:t=2048",
                          "ew:absdiff:ct", "ew:invheat:t=1024", "ew:invct", "ew:invsihknorm:w1=0:w2=5",
                          "ew:diffdist:t=2048", "ew:heatl2:t1=128:t2=32000"}) {
        EXPECT_EQ(WeightingSpec::parse(s).to_string(), s);
    }
    EXPECT_EQ(WeightingSpec::parse("vw:heat").t, 2048.0);
    for (const char* bad : {"", "vw", "vw:nope", "ew:heat", "vw:invct", "vw:heat:t=-1", "vw:heat:t=abc",
                            "ew:heatl2:t1=5:t2=1", "vw:sihknorm:w1=3:w2=3", "vw:heat:q=1", "ew:absdiff:invct"}) {
        EXPECT_THROW(WeightingSpec::parse(bad), InvalidInput) << bad;
    }
}

TEST(Weighting, CatalogCoversTheReferenceTable)
{
    const auto rows = weighting_catalog();
    EXPECT_EQ(rows.size(), 12u);
    std::set<WeightKind> kinds;
    for (const auto& r : rows) kinds.insert(r.kind);
    EXPECT_EQ(kinds.size(), 10u);
    EXPECT_EQ(WeightingSpec::parse("ew:invct").default_max_instability(), 1.0);
    EXPECT_EQ(WeightingSpec::parse("ew:absdiff:heat").default_max_instability(), 2.51e5);
    EXPECT_TRUE(std::isinf(WeightingSpec::parse("vw:heat").default_max_instability()));
}

TEST(Weighting, EveryCatalogRowComputes)
{
    const TriangleMesh m = primitives::bumpy_blob(3, 31, 50.0);
    const SpectralBasis b = compute_spectrum(m, 80);
    const TimeGrid grid = TimeGrid::standard();
    for (const auto& spec : weighting_catalog()) {
        const Eigen::VectorXd w =
            spec.is_vertex() ? vertex_weights(spec, b, grid) : edge_weights(spec, b, grid, m.edges());
        EXPECT_EQ(static_cast<std::size_t>(w.size()), spec.is_vertex() ? m.vertex_count() : m.edge_count());
        EXPECT_TRUE(w.allFinite()) << spec.to_string();
        EXPECT_GE(w.minCoeff(), 0.0) << spec.to_string();
        EXPECT_THROW(spec.is_vertex() ? edge_weights(spec, b, grid, m.edges()) : vertex_weights(spec, b, grid),
                     InvalidInput);
    }
}

TEST(Weighting, IcosahedronVertexKindsUniform)
{
    const SpectralBasis b = compute_spectrum(primitives::icosahedron(30.0), 12);
    for (const char* s : {"vw:heat:t=2048", "vw:ct", "vw:sihk:w=0", "vw:sihknorm:w1=0:w2=5"}) {
        const Eigen::VectorXd w = vertex_weights(WeightingSpec::parse(s), b, TimeGrid::standard());
        EXPECT_LE((w.array() - w(0)).abs().maxCoeff(), 1e-6 * std::abs(w(0))) << s;
    }
}

TEST(Weighting, TwoVertexChainCommute)
{
    Eigen::MatrixXd W(2, 2);
    W << 1, -1, -1, 1;
    const SpectralBasis b = eigenpairs(W.sparseView(), Eigen::MatrixXd::Identity(2, 2).sparseView(), 2);
    const Eigen::VectorXd w = vertex_weights(WeightingSpec::parse("vw:ct"), b, TimeGrid::standard());
    EXPECT_NEAR(w(0), 0.25, 1e-14);
    EXPECT_NEAR(w(1), 0.25, 1e-14);
}

TEST(Weighting, HeatTendsToInverseArea)
{
    const TriangleMesh m = primitives::bumpy_blob(2, 2);
    const SpectralBasis b = compute_spectrum(m, 20);
    const Eigen::VectorXd w = vertex_weights(WeightingSpec::parse("vw:heat:t=100000"), b, TimeGrid::standard());
    // lambda_0 is zero only to rounding, so exp(-lambda_0 t) leaves a relative offset near lambda_0 t
    for (Eigen::Index v = 0; v < w.size(); ++v) EXPECT_NEAR(w(v) * m.total_area(), 1.0, 1e-7);
}

TEST(Weighting, AbsDiffOfConstantFieldIsOneRoot)
{
    const SpectralBasis b = compute_spectrum(primitives::icosahedron(), 12);
    const TriangleMesh m = primitives::icosahedron();
    const Eigen::VectorXd w = edge_weights(WeightingSpec::parse("ew:absdiff:heat:t=1"), b, TimeGrid::standard(), m.edges());
    EXPECT_LE(w.maxCoeff(), 1e-12);
    std::vector<double> zeros(m.edge_count(), 0.0);
    EXPECT_EQ(build_tree(WeightedGraph::edge_weighted(12, m.edges(), zeros)).size(), 1u);
}

TEST(Weighting, DiffusionDistanceEdgesMatchVertexSum)
{
    const TriangleMesh m = primitives::random_grid(7, 7, 19);
    const SpectralBasis b = compute_spectrum(m, 49);
    const Eigen::MatrixXd H = oracle::heat_kernel_matrix(oracle::dense(cotangent_stiffness(m)), b.areas, 1.5);
    const Eigen::VectorXd w = edge_weights(WeightingSpec::parse("ew:diffdist:t=1.5"), b, TimeGrid::standard(), m.edges());
    for (std::size_t e = 0; e < m.edge_count(); ++e) {
        EXPECT_NEAR(w(static_cast<Eigen::Index>(e)), oracle::diffusion_distance_sum(H, b.areas, m.edges()[e][0], m.edges()[e][1]),
                    1e-8);
    }
}

TEST(Weighting, InverseHeatIsSymmetricPerEdge)
{
    const TriangleMesh m = primitives::bumpy_blob(2, 12);
    const SpectralBasis b = compute_spectrum(m, 40);
    const Eigen::VectorXd w = edge_weights(WeightingSpec::parse("ew:invheat:t=0.5"), b, TimeGrid::standard(), m.edges());
    for (std::size_t e = 0; e < m.edge_count(); ++e) {
        const auto [x, y] = m.edges()[e];
        EXPECT_NEAR(w(static_cast<Eigen::Index>(e)), 1.0 / heat_kernel(b, 0.5, y, x), 1e-9 * w(static_cast<Eigen::Index>(e)));
    }
}

TEST(Weighting, InverseKindNamesBadEdge)
{
    // a single eigenpair gives h = phi0^2 > 0 but c = 0 on every edge
    const TriangleMesh m = primitives::bumpy_blob(1, 12);
    SpectralBasis b = compute_spectrum(m, 12);
    b.eigenvalues(1) = 1e300;
    b.eigenvectors.col(1).setZero();
    b.eigenvalues.conservativeResize(2);
    b.eigenvectors.conservativeResize(Eigen::NoChange, 2);
    try {
        edge_weights(WeightingSpec::parse("ew:invct"), b, TimeGrid::standard(), m.edges());
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("edge ("), std::string::npos) << e.what();
    }
}

TEST(Weighting, ScaleBehaviour)
{
    const TriangleMesh m = primitives::bumpy_blob(3, 23, 20.0);
    const double gamma = std::exp2(1.0 / 32.0);
    const TriangleMesh s = primitives::transformed(m, Eigen::Matrix3d::Identity(), Vec3::Zero(), gamma);
    const SpectralBasis a = compute_spectrum(m, 100), c = compute_spectrum(s, 100);
    const TimeGrid grid = TimeGrid::standard();
    auto argsort = [](const Eigen::VectorXd& v) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return v(x) < v(y); });
        return idx;
    };
    for (const char* kind : {"vw:ct", "ew:invct"}) {
        const auto spec = WeightingSpec::parse(kind);
        const Eigen::VectorXd f = spec.is_vertex() ? vertex_weights(spec, a, grid) : edge_weights(spec, a, grid, m.edges());
        const Eigen::VectorXd g = spec.is_vertex() ? vertex_weights(spec, c, grid) : edge_weights(spec, c, grid, s.edges());
        EXPECT_LE(((g - f).array().abs() / f.array().abs()).maxCoeff(), 1e-4) << kind;
        EXPECT_EQ(argsort(f), argsort(g)) << kind;
    }
    WeightingSpec heat = WeightingSpec::parse("vw:heat:t=300");
    const Eigen::VectorXd f = vertex_weights(heat, a, grid);
    heat.t *= gamma * gamma;
    const Eigen::VectorXd g = vertex_weights(heat, c, grid);
    EXPECT_LE(((g * gamma * gamma - f).array().abs() / f.array()).maxCoeff(), 1e-4);
}
