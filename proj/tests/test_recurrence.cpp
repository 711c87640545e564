#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "locnet/recurrence.hpp"

using namespace locnet;

namespace {

PointCloud cloud_of(std::vector<std::vector<double>> rows) {
    PointCloud c(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t d = 0; d < rows[r].size(); ++d) c(r, d) = rows[r][d];
    return c;
}

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::normal_distribution<double> g;
    PointCloud c(n, dim);
    for (double& v : c.data()) v = g(rng);
    return c;
}

BinaryMatrix random_binary(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double p) {
    std::bernoulli_distribution b(p);
    BinaryMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (b(rng)) m.set(r, c);
    return m;
}

struct Counts {
    std::uint64_t triangles = 0, triples = 0;
    std::vector<double> local;
};

// Exhaustive enumeration over every (v, p, q) with p != q.
Counts brute_force(const BinaryMatrix& cr, const BinaryMatrix& rec) {
    Counts c;
    c.local.assign(cr.rows(), 0.0);
    for (std::size_t v = 0; v < cr.rows(); ++v) {
        std::uint64_t tri = 0, trip = 0;
        for (std::size_t p = 0; p < cr.cols(); ++p)
            for (std::size_t q = 0; q < cr.cols(); ++q) {
                if (p == q || !cr.get(v, p) || !cr.get(v, q)) continue;
                ++trip;
                tri += rec.get(p, q) ? 1 : 0;
            }
        c.triangles += tri;
        c.triples += trip;
        c.local[v] = trip == 0 ? 0.0 : static_cast<double>(tri) / static_cast<double>(trip);
    }
    return c;
}

}  // namespace

TEST(Embed, DimOneIsIdentity) {
    const std::vector<double> s{3, 1, 4, 1, 5};
    const PointCloud c = embed(s, 1, 1);
    ASSERT_EQ(c.rows(), 5u);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(c(k, 0), s[k]);
}

TEST(Embed, DelayVectors) {
    const PointCloud c = embed(std::vector<double>{1, 2, 3, 4}, 2, 1);
    EXPECT_EQ(c, cloud_of({{1, 2}, {2, 3}, {3, 4}}));
}

TEST(Embed, RowCountFormula) {
    std::vector<double> s(10);
    for (std::size_t k = 0; k < 10; ++k) s[k] = static_cast<double>(k);
    const PointCloud c = embed(s, 3, 2);
    ASSERT_EQ(c.rows(), 6u);
    EXPECT_EQ(c(5, 0), 5.0);
    EXPECT_EQ(c(5, 2), 9.0);
    EXPECT_THROW(embed(s, 6, 2), std::invalid_argument);
    EXPECT_THROW(embed(s, 0, 1), std::invalid_argument);
}

TEST(ThresholdForRate, ConstantCloudsAreDegenerate) {
    const PointCloud c = cloud_of({{1.0}, {1.0}, {1.0}});
    EXPECT_THROW(threshold_for_rate(c, c, 0.1, Metric::euclidean), DegenerateInputError);
}

TEST(ThresholdForRate, NearOneCoversEverything) {
    std::mt19937_64 rng(4);
    const PointCloud a = random_cloud(rng, 30, 2), b = random_cloud(rng, 30, 2);
    const double eps = threshold_for_rate(a, b, 0.9999, Metric::euclidean);
    const Matrix<double> d = cross_distances(a, b, Metric::euclidean);
    EXPECT_GE(eps, *std::max_element(d.data().begin(), d.data().end()));
    EXPECT_DOUBLE_EQ(cross_recurrence_matrix(a, b, eps, Metric::euclidean).density, 1.0);
}

TEST(ThresholdForRate, HandGridMedian) {
    // Distances from {0, 1, 3} to {0, 2, 7}: 0 2 7 / 1 1 6 / 3 1 4. Sorted:
    // 0 1 1 1 2 3 4 6 7, so the fifth (ceil(0.5 * 9)) is 2.
    const PointCloud a = cloud_of({{0}, {1}, {3}}), b = cloud_of({{0}, {2}, {7}});
    EXPECT_DOUBLE_EQ(threshold_for_rate(a, b, 0.5, Metric::euclidean), 2.0);
}

TEST(ThresholdForRate, DensityMeetsRateOnRandomClouds) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const PointCloud a = random_cloud(rng, 199, 2), b = random_cloud(rng, 199, 2);
        for (double rho : {0.05, 0.1, 0.3}) {
            const double eps = threshold_for_rate(a, b, rho, Metric::euclidean);
            const Matrix<double> d = cross_distances(a, b, Metric::euclidean);
            std::vector<double> sorted(d.data().begin(), d.data().end());
            std::sort(sorted.begin(), sorted.end());
            const auto k = static_cast<std::size_t>(std::ceil(rho * static_cast<double>(sorted.size()))) - 1;
            EXPECT_EQ(eps, sorted[k]);
        }
    }
}

TEST(OrderStatistic, SampledPathMatchesFullSort) {
    std::mt19937_64 rng(12);
    std::vector<double> scratch;
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> d(40000);
        std::uniform_real_distribution<double> u(0.0, 1.0 + trial);
        for (double& v : d) v = trial % 3 == 0 ? std::floor(u(rng) * 5.0) : u(rng);
        std::vector<double> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t k : {std::size_t{0}, std::size_t{17}, std::size_t{3999}, std::size_t{20000}, d.size() - 1})
            EXPECT_EQ(order_statistic(d, k, scratch), sorted[k]);
    }
}

TEST(ThresholdForRate, RejectsBadRate) {
    const PointCloud a = cloud_of({{0}, {1}});
    EXPECT_THROW(threshold_for_rate(a, a, 0.0, Metric::euclidean), std::invalid_argument);
    EXPECT_THROW(threshold_for_rate(a, a, 1.0, Metric::euclidean), std::invalid_argument);
}

TEST(CrossRecurrence, SameCloudHasUnitDiagonal) {
    std::mt19937_64 rng(1);
    const PointCloud a = random_cloud(rng, 12, 3);
    const auto cr = cross_recurrence_matrix(a, a, 1e-9, Metric::euclidean);
    for (std::size_t k = 0; k < 12; ++k) EXPECT_TRUE(cr.entries.get(k, k));
}

TEST(CrossRecurrence, ZeroEpsilonDistinctPointsIsEmpty) {
    const PointCloud a = cloud_of({{0}, {1}, {2}}), b = cloud_of({{0.5}, {1.5}});
    EXPECT_EQ(cross_recurrence_matrix(a, b, 0.0, Metric::euclidean).entries.count(), 0u);
}

TEST(CrossRecurrence, HandInstanceWithBothMetrics) {
    const PointCloud a = cloud_of({{0, 0}, {1, 0}, {0, 2}, {3, 3}});
    const PointCloud b = cloud_of({{0, 1}, {2, 0}, {3, 2}, {1, 1}});
    for (Metric m : {Metric::euclidean, Metric::supremum}) {
        const auto cr = cross_recurrence_matrix(a, b, 1.0, m);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                const double dx = a(i, 0) - b(j, 0), dy = a(i, 1) - b(j, 1);
                const double d = m == Metric::euclidean ? std::hypot(dx, dy) : std::max(std::abs(dx), std::abs(dy));
                EXPECT_EQ(cr.entries.get(i, j), d <= 1.0) << i << "," << j;
            }
    }
    // (0,0)-(1,1) is sqrt 2 apart in euclidean, 1 in supremum.
    EXPECT_FALSE(cross_recurrence_matrix(a, b, 1.0, Metric::euclidean).entries.get(0, 3));
    EXPECT_TRUE(cross_recurrence_matrix(a, b, 1.0, Metric::supremum).entries.get(0, 3));
}

TEST(CrossRecurrence, TransposedThresholdIsTranspose) {
    std::mt19937_64 rng(6);
    const PointCloud a = random_cloud(rng, 70, 2), b = random_cloud(rng, 90, 2);
    const Matrix<double> d = cross_distances(a, b, Metric::euclidean);
    BinaryMatrix t;
    threshold_into(d, 0.8, t, false, Orientation::transposed);
    EXPECT_EQ(t, threshold_matrix(d, 0.8).transposed());
    EXPECT_EQ(threshold_matrix(cross_distances(b, a, Metric::euclidean), 0.8), t);
}

TEST(RecurrenceMatrix, SinglePointIsZero) {
    const BinaryMatrix r = recurrence_matrix(cloud_of({{2.0}}), 1.0, Metric::euclidean);
    EXPECT_EQ(r.rows(), 1u);
    EXPECT_FALSE(r.get(0, 0));
}

TEST(RecurrenceMatrix, EquallySpacedLineIsTridiagonal) {
    const BinaryMatrix r = recurrence_matrix(cloud_of({{0}, {0.5}, {1.0}, {1.5}, {2.0}}), 0.5, Metric::euclidean);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(r.get(i, j), i + 1 == j || j + 1 == i) << i << "," << j;
}

TEST(RecurrenceMatrix, LargeEpsilonIsCompleteOffDiagonal) {
    std::mt19937_64 rng(2);
    const BinaryMatrix r = recurrence_matrix(random_cloud(rng, 67, 2), 1e6, Metric::supremum);
    EXPECT_EQ(r.count(), 67u * 66u);
    for (std::size_t i = 0; i < 67; ++i) EXPECT_FALSE(r.get(i, i));
    EXPECT_EQ(r, r.transposed());
}

TEST(CrossTransitivity, CompleteRecurrenceClosesEveryTriple) {
    BinaryMatrix cr(3, 4), rec(4, 4);
    cr.set(0, 1);
    cr.set(0, 2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (i != j) rec.set(i, j);
    EXPECT_EQ(cross_transitivity(cr, rec).value, 1.0);
    EXPECT_EQ(cross_transitivity(cr, BinaryMatrix(4, 4)).value, 0.0);
}

TEST(CrossTransitivity, NoTriplesIsDegenerate) {
    BinaryMatrix cr(2, 2), rec(2, 2);
    cr.set(0, 0);
    const ClosureRatio r = cross_transitivity(cr, rec);
    EXPECT_TRUE(r.degenerate());
    EXPECT_EQ(r.value, 0.0);
}

TEST(CrossClustering, DegreeOneNodeIsZeroAndCompleteIsOne) {
    BinaryMatrix cr(2, 3), rec(3, 3);
    cr.set(0, 1);
    cr.set(1, 0);
    cr.set(1, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) rec.set(i, j);
    const CrossClustering c = cross_clustering(cr, rec);
    EXPECT_EQ(c.per_node[0], 0.0);
    EXPECT_EQ(c.per_node[1], 1.0);
    EXPECT_EQ(c.mean, 0.5);
}

TEST(CrossClustering, HandFourByFour) {
    // Node 0 sees {0, 1, 2}: of the 6 ordered pairs, (0,1), (1,0), (1,2), (2,1) are recurrent.
    BinaryMatrix cr(4, 4), rec(4, 4);
    for (std::size_t p : {0, 1, 2}) cr.set(0, p);
    cr.set(1, 3);
    cr.set(2, 2);
    cr.set(2, 3);
    for (auto [p, q] : {std::pair<std::size_t, std::size_t>{0, 1}, {1, 2}, {2, 3}}) {
        rec.set(p, q);
        rec.set(q, p);
    }
    const CrossClustering c = cross_clustering(cr, rec);
    EXPECT_DOUBLE_EQ(c.per_node[0], 4.0 / 6.0);
    EXPECT_EQ(c.per_node[1], 0.0);
    EXPECT_EQ(c.per_node[2], 1.0);
    EXPECT_EQ(c.per_node[3], 0.0);
    const ClosureRatio t = cross_transitivity(cr, rec);
    EXPECT_EQ(t.triangles, 6u);
    EXPECT_EQ(t.triples, 8u);
}

TEST(CrossTransitivity, MatchesBruteForceOnRandomMatrices) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> size(1, 8);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t p = size(rng), q = size(rng);
        const BinaryMatrix cr = random_binary(rng, p, q, density(rng));
        const BinaryMatrix rec = random_binary(rng, q, q, density(rng));
        const Counts oracle = brute_force(cr, rec);
        const ClosureRatio t = cross_transitivity(cr, rec);
        ASSERT_EQ(t.triangles, oracle.triangles) << "trial " << trial;
        ASSERT_EQ(t.triples, oracle.triples) << "trial " << trial;
        const CrossClustering c = cross_clustering(cr, rec);
        for (std::size_t v = 0; v < p; ++v) ASSERT_EQ(c.per_node[v], oracle.local[v]) << "trial " << trial;
    }
}

TEST(CrossTransitivity, WideMatricesMatchBruteForce) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryMatrix cr = random_binary(rng, 30, 150, 0.1);
        const BinaryMatrix rec = random_binary(rng, 150, 150, 0.2);
        const Counts oracle = brute_force(cr, rec);
        const ClosureRatio t = cross_transitivity(cr, rec);
        EXPECT_EQ(t.triangles, oracle.triangles);
        EXPECT_EQ(t.triples, oracle.triples);
    }
}

TEST(ClosureProfile, DistanceVersionMatchesBitVersion) {
    std::mt19937_64 rng(31);
    std::vector<std::size_t> scratch;
    for (int trial = 0; trial < 30; ++trial) {
        const PointCloud a = random_cloud(rng, 60 + trial, 2), b = random_cloud(rng, 60 + trial, 2);
        const Metric m = trial % 2 ? Metric::supremum : Metric::euclidean;
        const double eps = threshold_for_rate(a, b, 0.1, m);
        const Matrix<double> cross = cross_distances(a, b, m);
        const auto cr_ab = cross_recurrence_matrix(a, b, eps, m).entries;
        const auto cr_ba = cross_recurrence_matrix(b, a, eps, m).entries;
        const auto rec_a = recurrence_matrix(a, eps, m), rec_b = recurrence_matrix(b, eps, m);

        const ClosureProfile fwd = closure_profile(cross, self_distances(b, m), eps, Orientation::as_is, scratch);
        const ClosureProfile bwd = closure_profile(cross, self_distances(a, m), eps, Orientation::transposed, scratch);
        const ClosureProfile fwd_bits = closure_profile(cr_ab, rec_b), bwd_bits = closure_profile(cr_ba, rec_a);
        EXPECT_EQ(fwd.closed, fwd_bits.closed);
        EXPECT_EQ(fwd.degree, fwd_bits.degree);
        EXPECT_EQ(bwd.closed, bwd_bits.closed);
        EXPECT_EQ(bwd.degree, bwd_bits.degree);
    }
}

TEST(ClosureProfile, RejectsMismatchedShapes) {
    EXPECT_THROW(cross_transitivity(BinaryMatrix(2, 3), BinaryMatrix(2, 2)), std::invalid_argument);
}
