#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace diffmsc;

namespace {

SpectralBasis chain_basis()
{
    Eigen::MatrixXd W(2, 2);
    W << 1, -1, -1, 1;
    return eigenpairs(W.sparseView(), Eigen::MatrixXd::Identity(2, 2).sparseView(), 2);
}

Vocabulary make_vocab(std::initializer_list<std::initializer_list<double>> rows)
{
    Vocabulary v;
    v.centroids.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double x : row) v.centroids(r, c++) = x;
        ++r;
    }
    return v;
}

} // namespace

TEST(PointDescriptors, HksOnTwoVertexChain)
{
    const double t[] = {1.0};
    const PointDescriptorField f = hks_field(chain_basis(), t);
    EXPECT_NEAR(f.values(0, 0), 0.5 + 0.5 * std::exp(-2.0), 1e-14);
    EXPECT_NEAR(f.values(0, 0), 0.5677, 1e-4);
    EXPECT_NEAR(f.values(1, 0), f.values(0, 0), 1e-14);
}

TEST(PointDescriptors, DefaultTimes)
{
    const auto t = default_hks_times();
    ASSERT_EQ(t.size(), 7u);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(t[i], 16.0 * std::exp2(0.5 * static_cast<double>(i)), 0.1);
    EXPECT_THROW(hks_field(chain_basis(), std::span<const double>{}), InvalidInput);
}

TEST(PointDescriptors, IcosahedronRowsIdentical)
{
    const SpectralBasis b = compute_spectrum(primitives::icosahedron(20.0), 12);
    const auto times = default_hks_times();
    for (const PointDescriptorField& f : {hks_field(b, times), sihks_field(b, TimeGrid::standard())}) {
        for (Eigen::Index v = 1; v < 12; ++v) {
            EXPECT_LE((f.values.row(v) - f.values.row(0)).norm(), 1e-8 * f.values.row(0).norm());
        }
    }
}

TEST(PointDescriptors, RigidMotionInvariant)
{
    const TriangleMesh m = primitives::bumpy_blob(2, 4, 40.0);
    const TriangleMesh r = primitives::transformed(m, primitives::random_rotation(8), Vec3(5, -1, 2), 1.0);
    const SpectralBasis a = compute_spectrum(m, 60), b = compute_spectrum(r, 60);
    const auto times = default_hks_times();
    const Eigen::MatrixXd ha = hks_field(a, times).values, hb = hks_field(b, times).values;
    EXPECT_LE((ha - hb).cwiseAbs().maxCoeff(), 1e-8 * ha.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd sa = sihks_field(a, TimeGrid::standard()).values;
    const Eigen::MatrixXd sb = sihks_field(b, TimeGrid::standard()).values;
    EXPECT_LE((sa - sb).cwiseAbs().maxCoeff(), 1e-6 * sa.cwiseAbs().maxCoeff());
}

TEST(PointDescriptors, SihksRequestLargerThanGrid)
{
    EXPECT_THROW(sihks_field(chain_basis(), TimeGrid::logarithmic(1, 2, 2), 4), InvalidInput);
}

TEST(RegionAverage, WeightedMean)
{
    PointDescriptorField f;
    f.values.resize(3, 2);
    f.values << 1, 2, 3, 4, 5, 6;
    const double areas[] = {1.0, 3.0, 100.0};
    const std::size_t region[] = {0, 1};
    const RegionDescriptor d = region_average(f, region, areas);
    EXPECT_DOUBLE_EQ(d.values(0), 2.5);
    EXPECT_DOUBLE_EQ(d.values(1), 3.5);
    const std::size_t single[] = {2};
    EXPECT_DOUBLE_EQ(region_average(f, single, areas).values(1), 6.0);
}

TEST(RegionAverage, ConstantFieldIsThatConstant)
{
    PointDescriptorField f;
    f.values = Eigen::MatrixXd::Constant(5, 3, 0.25);
    const double areas[] = {0.1, 0.2, 0.3, 0.4, 0.5};
    const std::size_t region[] = {0, 2, 4};
    EXPECT_LE((region_average(f, region, areas).values.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(RegionAverage, BadRegions)
{
    PointDescriptorField f;
    f.values = Eigen::MatrixXd::Ones(2, 1);
    const double areas[] = {1.0, 0.0};
    const std::size_t out_of_range[] = {2};
    const std::size_t zero_area[] = {1};
    EXPECT_THROW(region_average(f, std::span<const std::size_t>{}, areas), InvalidInput);
    EXPECT_THROW(region_average(f, out_of_range, areas), InvalidInput);
    EXPECT_THROW(region_average(f, zero_area, areas), InvalidInput);
}

TEST(Vocabulary, TwoClustersFoundExactly)
{
    Eigen::MatrixXd X(20, 2);
    X.topRows(10).setZero();
    X.bottomRows(10).setConstant(10.0);
    const std::vector<Eigen::MatrixXd> training{X};
    const Vocabulary v = build_vocabulary(training, 2, 3);
    ASSERT_EQ(v.size(), 2);
    std::vector<double> firsts{v.centroids(0, 0), v.centroids(1, 0)};
    std::sort(firsts.begin(), firsts.end());
    EXPECT_EQ(firsts[0], 0.0);
    EXPECT_EQ(firsts[1], 10.0);
    EXPECT_EQ(v.sigma, 0.0);
}

TEST(Vocabulary, DeterministicAndSized)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<Eigen::MatrixXd> training;
    for (int s = 0; s < 3; ++s) {
        Eigen::MatrixXd X(200, 6);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng) + (i % 7);
        training.push_back(X);
    }
    const Vocabulary a = build_vocabulary(training, 10, 42), b = build_vocabulary(training, 10, 42);
    EXPECT_EQ(a.size(), 10);
    EXPECT_EQ(a.dimension(), 6);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_LE(a.iterations, 100);
    EXPECT_GT(a.sigma, 0.0);
    // every centroid has at least one training vector nearest to it
    std::vector<int> hits(10, 0);
    for (const auto& X : training) {
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            Eigen::Index best = 0;
            (a.centroids.rowwise() - X.row(r)).rowwise().squaredNorm().minCoeff(&best);
            ++hits[static_cast<std::size_t>(best)];
        }
    }
    for (int h : hits) EXPECT_GT(h, 0);
}

TEST(Vocabulary, InsufficientData)
{
    const std::vector<Eigen::MatrixXd> few{Eigen::MatrixXd::Random(3, 2)};
    EXPECT_THROW(build_vocabulary(few, 4, 1), InvalidInput);
    const std::vector<Eigen::MatrixXd> same{Eigen::MatrixXd::Ones(50, 2)};
    try {
        build_vocabulary(same, 2, 1);
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("insufficient training data"), std::string::npos);
    }
    EXPECT_THROW(build_vocabulary(std::span<const Eigen::MatrixXd>{}, 2, 1), InvalidInput);
}

TEST(SoftQuantize, HardAssignment)
{
    const Vocabulary v = make_vocab({{0, 0}, {1, 0}, {0, 1}});
    const Eigen::VectorXd t = soft_quantize(Eigen::Vector2d(0.9, 0.1), v, 0.0);
    EXPECT_EQ(t, Eigen::Vector3d(0, 1, 0));
    // equidistant between words 1 and 2: lowest index wins
    EXPECT_EQ(soft_quantize(Eigen::Vector2d(1, 1), v, 0.0), Eigen::Vector3d(0, 1, 0));
}

TEST(SoftQuantize, EquidistantSplitsEvenly)
{
    const Vocabulary v = make_vocab({{0.0}, {2.0}});
    const Eigen::VectorXd t = soft_quantize(Eigen::VectorXd::Constant(1, 1.0), v, 0.7);
    EXPECT_NEAR(t(0), 0.5, 1e-15);
    EXPECT_NEAR(t(1), 0.5, 1e-15);
}

TEST(SoftQuantize, ClosedForm)
{
    const Vocabulary v = make_vocab({{0.0}, {1.0}, {3.0}});
    const double s = 0.8, x = 0.4;
    Eigen::Vector3d e;
    for (int l = 0; l < 3; ++l) e(l) = std::exp(-std::pow(x - v.centroids(l, 0), 2) / (2 * s * s));
    e /= e.sum();
    EXPECT_LE((soft_quantize(Eigen::VectorXd::Constant(1, x), v, s) - e).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SoftQuantize, SumsToOneAndStaysFinite)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-100.0, 100.0), ls(-3.0, 3.0);
    Vocabulary v;
    v.centroids.resize(8, 4);
    for (Eigen::Index i = 0; i < v.centroids.size(); ++i) v.centroids.data()[i] = u(rng);
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd a(4);
        for (Eigen::Index i = 0; i < 4; ++i) a(i) = 1e3 * u(rng);
        const Eigen::VectorXd t = soft_quantize(a, v, std::pow(10.0, ls(rng)));
        ASSERT_TRUE(t.allFinite());
        EXPECT_NEAR(t.sum(), 1.0, 1e-12);
        EXPECT_GE(t.minCoeff(), 0.0);
    }
}

TEST(SoftQuantize, DimensionAndSigmaChecked)
{
    const Vocabulary v = make_vocab({{0, 0}, {1, 1}});
    EXPECT_THROW(soft_quantize(Eigen::Vector3d::Zero(), v, 1.0), InvalidInput);
    EXPECT_THROW(soft_quantize(Eigen::Vector2d::Zero(), v, -1.0), InvalidInput);
}

TEST(BagOfFeatures, SingleWordRegion)
{
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(4, 5);
    theta.col(2).setOnes();
    const double areas[] = {0.3, 0.1, 0.7, 2.0};
    const std::size_t region[] = {0, 1, 3};
    Eigen::VectorXd e3 = Eigen::VectorXd::Zero(5);
    e3(2) = 1.0;
    EXPECT_LE((region_bof(theta, region, areas).values - e3).norm(), 1e-15);
}

TEST(BagOfFeatures, UniformDistributionStaysUniform)
{
    const Eigen::MatrixXd theta = Eigen::MatrixXd::Constant(3, 4, 0.25);
    const double areas[] = {1.0, 2.0, 3.0};
    const std::size_t region[] = {0, 1, 2};
    EXPECT_LE((region_bof(theta, region, areas).values.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(BagOfFeatures, AreaWeightedMixture)
{
    Eigen::MatrixXd theta(2, 2);
    theta << 1, 0, 0, 1;
    const double areas[] = {1.0, 3.0};
    const std::size_t region[] = {0, 1};
    const RegionDescriptor d = region_bof(theta, region, areas);
    EXPECT_DOUBLE_EQ(d.values(0), 0.25);
    EXPECT_DOUBLE_EQ(d.values(1), 0.75);
    EXPECT_EQ(d.kind, RegionDescriptorKind::BagOfFeatures);
}

TEST(Correspondences, MapRegion)
{
    const std::vector<std::int64_t> map{2, -1, 0, 2};
    const double areas[] = {1.0, 1.0, 2.0, 4.0};
    const std::size_t region[] = {0, 1, 3};
    const MappedRegion m = map_region(map, region, areas);
    EXPECT_EQ(m.vertices, (Region{2}));
    EXPECT_DOUBLE_EQ(m.dropped_fraction, 1.0 / 6.0);
    const std::size_t bad[] = {4};
    EXPECT_THROW(map_region(map, bad, areas), InvalidInput);
}

TEST(Correspondences, FileRoundTripAndComments)
{
    std::istringstream in("# map\n3\n-1\n\n0  # back\n");
    const auto m = read_correspondence(in);
    EXPECT_EQ(m, (std::vector<std::int64_t>{3, -1, 0}));
    std::ostringstream out;
    write_correspondence(out, m);
    std::istringstream again(out.str());
    EXPECT_EQ(read_correspondence(again), m);
    std::istringstream bad("1\n-2\n");
    EXPECT_THROW(read_correspondence(bad), InvalidInput);
    std::istringstream junk("1\nx\n");
    EXPECT_THROW(read_correspondence(junk), InvalidInput);
}

TEST(Correspondences, Validation)
{
    Correspondence c = Correspondence::identity(3);
    EXPECT_NO_THROW(c.validate(3));
    EXPECT_THROW(c.validate(4), ConsistencyError);
    c.direct[1] = 3;
    EXPECT_THROW(c.validate(3), ConsistencyError);
    c.direct[1] = -1;
    EXPECT_NO_THROW(c.validate(3));
    c.symmetric = std::vector<std::int64_t>{0, 1};
    EXPECT_THROW(c.validate(3), ConsistencyError);
}

TEST(Overlap, Examples)
{
    const Region a{0, 1, 2}, b{1, 2, 3}, c{4, 5};
    EXPECT_DOUBLE_EQ(overlap(a, a, {}), 1.0);
    EXPECT_DOUBLE_EQ(overlap(a, b, {}), 0.5);
    EXPECT_DOUBLE_EQ(overlap(a, c, {}), 0.0);
    const double areas[] = {1, 2, 3, 4, 5, 6};
    EXPECT_DOUBLE_EQ(overlap(a, b, areas), 5.0 / 10.0);
    EXPECT_DOUBLE_EQ(overlap(Region{}, Region{}, {}), 0.0);
    EXPECT_DOUBLE_EQ(overlap(a, Region{}, {}), 0.0);
}

TEST(Overlap, SymmetricAndBoundedOnRandomPairs)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::bernoulli_distribution in(0.3);
    std::vector<double> areas(60);
    for (auto& a : areas) a = u(rng);
    for (int trial = 0; trial < 10000; ++trial) {
        Region x, y;
        for (std::size_t v = 0; v < areas.size(); ++v) {
            if (in(rng)) x.push_back(v);
            if (in(rng)) y.push_back(v);
        }
        const double o = overlap(x, y, areas);
        EXPECT_EQ(o, overlap(y, x, areas));
        EXPECT_GE(o, 0.0);
        EXPECT_LE(o, 1.0);
        if (!x.empty()) EXPECT_DOUBLE_EQ(overlap(x, x, areas), 1.0);
    }
}

TEST(Repeatability, GreedyOneToOne)
{
    Eigen::MatrixXd o(3, 3);
    o << 0.9, 0.8, 0.0,
         0.85, 0.0, 0.0,
         0.0, 0.0, 0.3;
    const auto pairs = greedy_matching(o);
    // (1, 0) and (0, 1) lose their partners to the 0.9 pair
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0], (std::pair<std::size_t, std::size_t>{0, 0}));
    EXPECT_EQ(pairs[1], (std::pair<std::size_t, std::size_t>{2, 2}));
    Eigen::MatrixXd tie(2, 2);
    tie << 0.5, 0.5, 0.5, 0.5;
    const auto t = greedy_matching(tie);
    EXPECT_EQ(t[0], (std::pair<std::size_t, std::size_t>{0, 0}));
    EXPECT_EQ(t[1], (std::pair<std::size_t, std::size_t>{1, 1}));
}

TEST(Repeatability, CountsAboveThreshold)
{
    OverlapTable t;
    t.values.resize(2, 3);
    t.values << 0.9, 0.0, 0.2,
                0.0, 0.6, 0.0;
    t.has_image = {true, true, false};
    t.uses_symmetric.assign(3, false);
    t.dropped_fraction.assign(3, 0.0);
    const double th[] = {0.1, 0.6, 0.75, 0.95};
    const auto c = repeatability(t, th);
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0].matched, 2u);
    EXPECT_EQ(c[0].evaluated, 2u);
    EXPECT_EQ(c[0].detected, 3u);
    EXPECT_DOUBLE_EQ(c[0].repeatability, 1.0);
    EXPECT_EQ(c[1].matched, 1u); // strictly above
    EXPECT_DOUBLE_EQ(c[2].repeatability, 0.5);
    EXPECT_DOUBLE_EQ(c[3].repeatability, 0.0);
}

TEST(Repeatability, MonotoneInThreshold)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto th = EvalRequest::default_thresholds();
    for (int trial = 0; trial < 200; ++trial) {
        OverlapTable t;
        t.values = Eigen::MatrixXd::NullaryExpr(6, 5, [&] { return u(rng) < 0.5 ? 0.0 : u(rng); });
        t.has_image.assign(5, true);
        const auto c = repeatability(t, th);
        for (std::size_t k = 1; k < c.size(); ++k) EXPECT_LE(c[k].repeatability, c[k - 1].repeatability);
    }
}

TEST(Repeatability, SymmetricMapChosenPerRegion)
{
    // null shape: 4 vertices, regions {0,1} and {2,3}; the symmetry swaps the halves
    Correspondence corr = Correspondence::identity(4);
    corr.symmetric = std::vector<std::int64_t>{2, 3, 0, 1};
    const std::vector<Region> null_regions{{0, 1}};
    const std::vector<Region> tr_regions{{0, 1}, {2, 3}};
    const OverlapTable t = overlap_table(null_regions, tr_regions, corr, {}, {});
    EXPECT_FALSE(t.uses_symmetric[0]);
    EXPECT_TRUE(t.uses_symmetric[1]);
    EXPECT_DOUBLE_EQ(t.values(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(t.values(0, 1), 1.0);
}

TEST(Repeatability, RegionsWithoutImageNotEvaluated)
{
    Correspondence corr;
    corr.direct = {0, -1};
    corr.null_vertex_count = 2;
    const std::vector<Region> null_regions{Region{0}};
    const std::vector<Region> tr_regions{Region{0}, Region{1}};
    const OverlapTable t = overlap_table(null_regions, tr_regions, corr, {}, {});
    EXPECT_EQ(t.has_image, (std::vector<bool>{true, false}));
    EXPECT_DOUBLE_EQ(t.dropped_fraction[1], 1.0);
    const double th[] = {0.5};
    Diagnostics diag;
    EXPECT_DOUBLE_EQ(repeatability(t, th, &diag)[0].repeatability, 1.0);
}

namespace {

/// 20 pairs: nine positives, a negative, a positive, then nine negatives by distance.
void handcrafted_pairs(std::vector<double>& d, std::vector<double>& o)
{
    const std::string pattern = "PPPPPPPPPNPNNNNNNNNN";
    d.clear();
    o.clear();
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        d.push_back(static_cast<double>(i + 1));
        o.push_back(pattern[i] == 'P' ? 0.9 : 0.2);
    }
}

} // namespace

TEST(Roc, HandcraftedEqualErrorRate)
{
    std::vector<double> d, o;
    handcrafted_pairs(d, o);
    const RocCurve roc = descriptor_roc(d, o, 0.75);
    EXPECT_EQ(roc.positives, 10u);
    EXPECT_EQ(roc.negatives, 10u);
    EXPECT_NEAR(roc.eer, 0.1, 1e-12);
    const auto sweep = oracle::roc_sweep(d, o, 0.75);
    ASSERT_EQ(sweep.size(), roc.points.size());
    for (std::size_t k = 0; k < sweep.size(); ++k) {
        EXPECT_DOUBLE_EQ(roc.points[k].tpr, sweep[k].tpr);
        EXPECT_DOUBLE_EQ(roc.points[k].fpr, sweep[k].fpr);
    }
    EXPECT_NEAR(roc.eer, oracle::eer(sweep), 1e-12);
}

TEST(Roc, PerfectAndUninformative)
{
    const std::vector<double> d{1, 2, 3, 4}, o{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(descriptor_roc(d, o).eer, 0.0);
    const std::vector<double> same(4, 7.0);
    EXPECT_DOUBLE_EQ(descriptor_roc(same, o).eer, 0.5);
    const std::vector<double> reversed{4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(descriptor_roc(reversed, o).eer, 1.0);
}

TEST(Roc, MonotoneAndBoundedOnRandomSets)
{
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> di(0, 9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> d(30), o(30);
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] = di(rng);
            o[i] = u(rng);
        }
        o[0] = 0.9;
        o[1] = 0.1;
        const RocCurve roc = descriptor_roc(d, o, 0.75);
        for (std::size_t k = 1; k < roc.points.size(); ++k) {
            EXPECT_GE(roc.points[k].tpr, roc.points[k - 1].tpr);
            EXPECT_GE(roc.points[k].fpr, roc.points[k - 1].fpr);
        }
        EXPECT_EQ(roc.points.back().tpr, 1.0);
        EXPECT_EQ(roc.points.back().fpr, 1.0);
        EXPECT_GE(roc.eer, 0.0);
        EXPECT_LE(roc.eer, 1.0);
        EXPECT_NEAR(roc.eer, oracle::eer(oracle::roc_sweep(d, o, 0.75)), 1e-12);
    }
}

TEST(Roc, NeedsBothClasses)
{
    const std::vector<double> d{1, 2}, pos{1, 1}, neg{0, 0};
    EXPECT_THROW(descriptor_roc(d, pos), InvalidInput);
    EXPECT_THROW(descriptor_roc(d, neg), InvalidInput);
    EXPECT_THROW(descriptor_roc(d, std::vector<double>{1.0}), InvalidInput);
}

TEST(MatchingScore, HandcraftedSet)
{
    Eigen::MatrixXd d(4, 5), o(4, 5);
    d << 0.1, 0.5, 0.9, 0.9, 0.9,
         0.4, 0.2, 0.2, 0.9, 0.9,
         0.9, 0.9, 0.9, 0.3, 0.1,
         0.5, 0.5, 0.5, 0.5, 0.5;
    o << 0.9, 0.0, 0.0, 0.0, 0.0,
         0.0, 0.1, 0.8, 0.0, 0.0,
         0.0, 0.0, 0.0, 0.95, 0.7,
         0.76, 0.0, 0.0, 0.0, 0.0;
    const double rhos[] = {0.5, 0.75};
    const MatchingResult r = matching_score(d, o, rhos);
    EXPECT_EQ(r.first_match, (std::vector<std::size_t>{0, 1, 4, 0}));
    EXPECT_DOUBLE_EQ(r.curve[0].score, 0.75);
    EXPECT_DOUBLE_EQ(r.curve[1].score, 0.5);
    const auto brute = oracle::matching_score(d, o, {0.5, 0.75});
    EXPECT_DOUBLE_EQ(brute[0], r.curve[0].score);
    EXPECT_DOUBLE_EQ(brute[1], r.curve[1].score);
}

TEST(MatchingScore, MatchesBruteForceWithTies)
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> di(0, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto rhos = EvalRequest::default_thresholds();
    for (int trial = 0; trial < 300; ++trial) {
        const Eigen::MatrixXd d = Eigen::MatrixXd::NullaryExpr(7, 6, [&] { return double(di(rng)); });
        const Eigen::MatrixXd o = Eigen::MatrixXd::NullaryExpr(7, 6, [&] { return u(rng); });
        const MatchingResult r = matching_score(d, o, rhos);
        const auto brute = oracle::matching_score(d, o, rhos);
        for (std::size_t k = 0; k < rhos.size(); ++k) EXPECT_DOUBLE_EQ(r.curve[k].score, brute[k]);
    }
}

TEST(MatchingScore, ShapeErrors)
{
    const double rho[] = {0.5};
    EXPECT_THROW(matching_score(Eigen::MatrixXd(2, 2), Eigen::MatrixXd(2, 3), rho), InvalidInput);
    EXPECT_THROW(matching_score(Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 2), rho), InvalidInput);
}

TEST(Distances, Euclidean)
{
    const std::vector<Eigen::VectorXd> a{Eigen::Vector2d(0, 0)}, b{Eigen::Vector2d(3, 4), Eigen::Vector2d(0, 0)};
    const Eigen::MatrixXd d = descriptor_distances(a, b);
    EXPECT_DOUBLE_EQ(d(0, 0), 5.0);
    EXPECT_DOUBLE_EQ(d(0, 1), 0.0);
    EXPECT_THROW(descriptor_distances(a, {Eigen::Vector3d::Zero()}), ConsistencyError);
}

TEST(Csv, Layouts)
{
    std::ostringstream r, roc, m;
    write_repeatability_csv(r, {RepeatabilityPoint{0.5, 0.25, 1, 4, 5}});
    EXPECT_EQ(r.str(), "overlap,repeatability,matched,evaluated,detected\n0.5,0.25,1,4,5\n");
    const std::vector<double> d{1, 2}, o{1, 0};
    write_roc_csv(roc, descriptor_roc(d, o));
    EXPECT_EQ(roc.str(), "threshold,tpr,fpr\n-inf,0,0\n1,1,0\n2,1,1\n");
    MatchingResult res;
    res.curve.push_back({0.75, 0.5, 2});
    write_matching_csv(m, res);
    EXPECT_EQ(m.str(), "overlap,score,correct\n0.75,0.5,2\n");
}
