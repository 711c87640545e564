#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "locnet/experiment.hpp"
#include "locnet/fixtures.hpp"
#include "locnet/netinfer.hpp"
#include "locnet/validation.hpp"

using namespace locnet;

namespace {

Matrix<double> ring_displacements(double m4, std::string_view ic) {
    ModelParams p = ModelParams::uniform(10);
    p.masses[3] = m4;
    return integrate(p, *fixtures::by_name(ic), 10.0, 0.05).displacements;
}

void expect_network_invariants(const FunctionalNetwork& net) {
    const std::size_t n = net.node_count();
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_FALSE(net.has_edge(i, i));
        for (std::size_t j = i + 1; j < n; ++j) EXPECT_TRUE(net.has_edge(i, j) || net.has_edge(j, i));
    }
}

Matrix<double> rotate_rows(const Matrix<double>& x, std::size_t r) {
    const std::size_t n = x.rows();
    Matrix<double> out(n, x.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < x.cols(); ++k) out((i + r) % n, k) = x(i, k);
    return out;
}

}  // namespace

TEST(ClassifyDelta, SignRule) {
    EXPECT_EQ(classify_delta(0.1, 0.05), CouplingDirection::forward);
    EXPECT_EQ(classify_delta(-0.1, 0.05), CouplingDirection::backward);
    EXPECT_EQ(classify_delta(0.05, 0.05), CouplingDirection::bidirectional);
    EXPECT_EQ(classify_delta(-0.05, 0.05), CouplingDirection::bidirectional);
    EXPECT_EQ(classify_delta(0.0, 0.0), CouplingDirection::bidirectional);
}

TEST(InferPair, IdenticalSeriesGiveExactZero) {
    const Matrix<double> x = ring_displacements(1.0, "x0a");
    for (std::size_t dim : {1, 2, 3}) {
        RecurrenceConfig cfg;
        cfg.embed_dim = dim;
        const PairDiagnostics d = infer_pair(x.row(2), x.row(2), cfg);
        EXPECT_EQ(d.delta, 0.0);
        EXPECT_EQ(d.direction, CouplingDirection::bidirectional);
    }
}

TEST(InferPair, SaturatedToleranceIsAlwaysBidirectional) {
    const Matrix<double> x = ring_displacements(0.85, "x0c");
    RecurrenceConfig cfg;
    cfg.direction_tol = 1.0;
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = i + 1; j < 10; ++j)
            EXPECT_EQ(infer_pair_direction(x.row(i), x.row(j), cfg), CouplingDirection::bidirectional);
}

TEST(InferPair, SwappingArgumentsNegatesDelta) {
    const Matrix<double> x = ring_displacements(0.9, "x0b");
    const RecurrenceConfig cfg;
    for (std::size_t j = 1; j < 10; ++j) {
        const PairDiagnostics a = infer_pair(x.row(0), x.row(j), cfg), b = infer_pair(x.row(j), x.row(0), cfg);
        EXPECT_EQ(a.delta, -b.delta);
        EXPECT_EQ(a.epsilon, b.epsilon);
        EXPECT_EQ(a.transitivity_ij, b.transitivity_ji);
    }
}

TEST(InferPair, MasterDrivesSlaveConsistently) {
    const auto s = validation::master_slave_deltas(RecurrenceConfig{});
    ASSERT_EQ(s.deltas.size(), 20u);
    EXPECT_EQ(s.positive, 20u);
}

TEST(InferPair, ConstantSeriesIsDegenerate) {
    const std::vector<double> flat(50, 0.3), wave = [] {
        std::vector<double> w(50);
        for (std::size_t k = 0; k < 50; ++k) w[k] = std::sin(0.3 * static_cast<double>(k));
        return w;
    }();
    EXPECT_THROW(infer_pair(flat, wave, RecurrenceConfig{}), DegenerateSeriesError);
    try {
        infer_pair(wave, flat, RecurrenceConfig{});
        FAIL();
    } catch (const DegenerateSeriesError& e) {
        EXPECT_EQ(e.node(), 1u);
    }
}

TEST(InferPair, FixedEpsilonMode) {
    const Matrix<double> x = ring_displacements(1.0, "x0a");
    RecurrenceConfig cfg;
    cfg.threshold_mode = ThresholdMode::fixed_epsilon;
    cfg.epsilon = 0.05;
    const PairDiagnostics d = infer_pair(x.row(0), x.row(1), cfg);
    EXPECT_EQ(d.epsilon, 0.05);
    EXPECT_GE(d.transitivity_ij, 0.0);
    EXPECT_LE(d.transitivity_ij, 1.0);
}

TEST(BuildNetwork, IdenticalSeriesGiveCompleteBidirectionalNetwork) {
    const Matrix<double> x = ring_displacements(1.0, "x0a");
    Matrix<double> same(10, x.cols());
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t k = 0; k < x.cols(); ++k) same(i, k) = x(0, k);
    const FunctionalNetwork net = build_functional_network(same, RecurrenceConfig{});
    EXPECT_EQ(net.edge_count(), 90u);
    for (std::size_t z : in_degrees(net)) EXPECT_EQ(z, 9u);
}

TEST(BuildNetwork, TwoNodesHaveOneOrTwoEdges) {
    const Matrix<double> x = ring_displacements(0.9, "x0a");
    Matrix<double> two(2, x.cols());
    for (std::size_t k = 0; k < x.cols(); ++k) {
        two(0, k) = x(3, k);
        two(1, k) = x(7, k);
    }
    const NetworkInference inf = infer_network(two, RecurrenceConfig{});
    EXPECT_EQ(inf.pairs.size(), 1u);
    EXPECT_GE(inf.network.edge_count(), 1u);
    EXPECT_LE(inf.network.edge_count(), 2u);
}

TEST(BuildNetwork, InvariantsHoldOnSimulatedAndRandomInputs) {
    for (double m4 : {1.0, 0.93, 0.8})
        for (auto ic : fixtures::names) expect_network_invariants(build_functional_network(ring_displacements(m4, ic), {}));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
        Matrix<double> noise(6, 120);
        for (double& v : noise.data()) v = g(rng);
        RecurrenceConfig cfg;
        cfg.direction_tol = 0.01 * trial;
        expect_network_invariants(build_functional_network(noise, cfg));
    }
}

TEST(BuildNetwork, RingRotationEquivariance) {
    for (double m4 : {1.0, 0.9}) {
        const Matrix<double> x = ring_displacements(m4, "x0a");
        const FunctionalNetwork base = build_functional_network(x, {});
        for (std::size_t r = 1; r < 10; ++r) {
            const FunctionalNetwork rot = build_functional_network(rotate_rows(x, r), {});
            for (std::size_t i = 0; i < 10; ++i)
                for (std::size_t j = 0; j < 10; ++j)
                    ASSERT_EQ(rot.has_edge((i + r) % 10, (j + r) % 10), base.has_edge(i, j))
                        << "m4 " << m4 << " shift " << r << " edge " << i << "->" << j;
        }
    }
}

TEST(BuildNetwork, Deterministic) {
    const Matrix<double> x = ring_displacements(0.95, "x0c");
    EXPECT_EQ(build_functional_network(x, {}), build_functional_network(x, {}));
}

TEST(BuildNetwork, ConstantRowIsNamed) {
    Matrix<double> x = ring_displacements(1.0, "x0a");
    for (double& v : x.row(6)) v = 0.0;
    try {
        build_functional_network(x, {});
        FAIL();
    } catch (const DegenerateSeriesError& e) {
        EXPECT_EQ(e.node(), 6u);
    }
}

TEST(BuildNetwork, SymmetricRingIsOneComponent) {
    EXPECT_EQ(strongly_connected_components(build_functional_network(ring_displacements(1.0, "x0a"), {})).size(), 1u);
}

TEST(FunctionalNetwork, RejectsSelfLoopsAndUnlinkedPairs) {
    Digraph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    EXPECT_THROW(FunctionalNetwork{g}, std::logic_error);
    g.add_edge(2, 0);
    EXPECT_NO_THROW(FunctionalNetwork{g});
    g.add_edge(1, 1);
    EXPECT_THROW(FunctionalNetwork{g}, std::logic_error);
}
