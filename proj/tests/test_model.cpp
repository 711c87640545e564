#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "locnet/model.hpp"

using namespace locnet;

TEST(AssembleMatrices, GroundedDefaultDiagonalAndRingCorners) {
    const auto m = assemble_matrices(ModelParams::uniform(10));
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_DOUBLE_EQ(m.stiffness(i, i), 1.2);
        EXPECT_DOUBLE_EQ(m.mass(i, i), 1.0);
        EXPECT_DOUBLE_EQ(m.damping(i, i), 0.1);
    }
    EXPECT_DOUBLE_EQ(m.stiffness(0, 1), -0.1);
    EXPECT_DOUBLE_EQ(m.stiffness(0, 9), -0.1);
    EXPECT_DOUBLE_EQ(m.stiffness(9, 0), -0.1);
    EXPECT_DOUBLE_EQ(m.stiffness(0, 5), 0.0);
}

TEST(AssembleMatrices, DoubledDiagonalIsTwoKLin) {
    ModelParams p = ModelParams::uniform(10);
    p.diagonal = StiffnessDiagonal::doubled;
    const auto m = assemble_matrices(p);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(m.stiffness(i, i), 2.0);
    EXPECT_DOUBLE_EQ(m.stiffness(0, 1), -0.1);
    EXPECT_DOUBLE_EQ(m.stiffness(0, 9), -0.1);
}

TEST(AssembleMatrices, ZeroCouplingIsDecoupled) {
    ModelParams p = ModelParams::uniform(2);
    p.k_coupling = 0.0;
    p.diagonal = StiffnessDiagonal::doubled;
    const auto m = assemble_matrices(p);
    EXPECT_DOUBLE_EQ(m.stiffness(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(m.stiffness(1, 1), 2.0);
    EXPECT_DOUBLE_EQ(m.stiffness(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(m.stiffness(1, 0), 0.0);
}

TEST(AssembleMatrices, RingOfThreeIsComplete) {
    ModelParams p = ModelParams::uniform(3);
    p.k_coupling = 0.5;
    const auto m = assemble_matrices(p);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) {
                EXPECT_DOUBLE_EQ(m.stiffness(i, j), -0.5);
            }
}

TEST(AssembleMatrices, SymmetricForRandomParams) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p = ModelParams::uniform(7);
        for (auto& v : p.masses) v = u(rng);
        for (auto& v : p.k_lin) v = u(rng);
        p.k_coupling = u(rng);
        const auto m = assemble_matrices(p);
        EXPECT_EQ(m.stiffness, m.stiffness.transposed());
        for (std::size_t i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(m.damping(i, i), p.alpha * p.masses[i]);
    }
}

TEST(AssembleMatrices, RejectsInvalidParams) {
    ModelParams p = ModelParams::uniform(4);
    p.masses[2] = 0.0;
    EXPECT_THROW(assemble_matrices(p), std::invalid_argument);
    p = ModelParams::uniform(4);
    p.k_lin.pop_back();
    EXPECT_THROW(assemble_matrices(p), std::invalid_argument);
    p = ModelParams::uniform(1);
    EXPECT_THROW(assemble_matrices(p), std::invalid_argument);
}

TEST(EquationsOfMotion, UnforcedEquilibriumIsFixedPoint) {
    ModelParams p = ModelParams::uniform(10);
    p.force_amp = 0.0;
    const StateVector d = equations_of_motion(0.7, StateVector::zeros(10), p);
    for (double v : d.values()) EXPECT_EQ(v, 0.0);
}

TEST(EquationsOfMotion, ForcingAtTimeZero) {
    const StateVector d = equations_of_motion(0.0, StateVector::zeros(10), ModelParams::uniform(10));
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(d[i], 0.0);
        EXPECT_DOUBLE_EQ(d[10 + i], 1.0);
    }
}

TEST(EquationsOfMotion, SingleDecoupledOscillatorBySubstitution) {
    ModelParams p = ModelParams::uniform(2);
    p.k_coupling = 0.0;
    p.force_amp = 0.0;
    p.diagonal = StiffnessDiagonal::doubled;
    p.masses = {1.5, 1.0};
    const double a = 0.3;
    const StateVector d = equations_of_motion(0.0, StateVector({a, 0.0, 0.0, 0.0}), p);
    EXPECT_DOUBLE_EQ(d[2], -(2.0 * 1.0 * a + 2.0 * a * a * a) / 1.5);
    EXPECT_EQ(d[3], 0.0);
}

TEST(EquationsOfMotion, MatchesDenseMatrixForm) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ModelParams p = ModelParams::uniform(6);
    p.masses = {1.0, 0.9, 1.1, 0.8, 1.0, 1.2};
    const auto m = assemble_matrices(p);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> s(12);
        for (auto& v : s) v = u(rng);
        const double t = 0.37 * trial;
        const StateVector d = equations_of_motion(t, StateVector(s), p);
        for (std::size_t i = 0; i < 6; ++i) {
            double kx = 0.0;
            for (std::size_t j = 0; j < 6; ++j) kx += m.stiffness(i, j) * s[j];
            const double rhs = p.force_amp * std::cos(p.force_freq * t) - m.damping(i, i) * s[6 + i] - kx -
                               p.k_cubic[i] * s[i] * s[i] * s[i];
            EXPECT_NEAR(d[6 + i], rhs / p.masses[i], 1e-12);
            EXPECT_EQ(d[i], s[6 + i]);
        }
    }
}

TEST(EquationsOfMotion, RejectsWrongLength) {
    EXPECT_THROW(equations_of_motion(0.0, StateVector::zeros(3), ModelParams::uniform(4)), std::invalid_argument);
}

TEST(NonlinearForce, Examples) {
    const std::vector<double> k(3, 2.0);
    for (double v : nonlinear_force(std::vector<double>{0, 0, 0}, k)) EXPECT_EQ(v, 0.0);
    for (double v : nonlinear_force(std::vector<double>{1, 1, 1}, k)) EXPECT_EQ(v, 2.0);
    EXPECT_EQ(nonlinear_force(std::vector<double>{-0.5}, std::vector<double>{2.0})[0], -0.25);
    EXPECT_THROW(nonlinear_force(std::vector<double>{1, 2}, k), std::invalid_argument);
}

TEST(NonlinearForce, OddSymmetry) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(4), k(4), neg(4);
        for (std::size_t i = 0; i < 4; ++i) {
            x[i] = u(rng);
            k[i] = std::abs(u(rng));
            neg[i] = -x[i];
        }
        const auto f = nonlinear_force(x, k), g = nonlinear_force(neg, k);
        for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(f[i], -g[i]);
    }
}

TEST(PerturbParams, ZeroLevelIsIdentity) {
    std::mt19937_64 rng(1);
    const ModelParams p = ModelParams::uniform(10);
    const ModelParams q = perturb_params(p, 0.0, rng);
    EXPECT_EQ(q.masses, p.masses);
    EXPECT_EQ(q.k_lin, p.k_lin);
    EXPECT_EQ(q.k_cubic, p.k_cubic);
}

TEST(PerturbParams, OnePercentBounds) {
    std::mt19937_64 rng(2);
    const ModelParams q = perturb_params(ModelParams::uniform(10), 0.01, rng);
    for (auto* vec : {&q.masses, &q.k_lin})
        for (double v : *vec) {
            EXPECT_GE(v, 0.99);
            EXPECT_LE(v, 1.01);
        }
    for (double v : q.k_cubic) {
        EXPECT_GE(v, 1.98);
        EXPECT_LE(v, 2.02);
    }
    EXPECT_EQ(q.k_coupling, 0.1);
    EXPECT_EQ(q.force_amp, 1.0);
}

TEST(PerturbParams, SeededRunsAreBitIdentical) {
    std::mt19937_64 a(9), b(9);
    const ModelParams p = perturb_params(ModelParams::uniform(10), 0.01, a);
    const ModelParams q = perturb_params(ModelParams::uniform(10), 0.01, b);
    EXPECT_EQ(p.masses, q.masses);
    EXPECT_EQ(p.k_lin, q.k_lin);
    EXPECT_EQ(p.k_cubic, q.k_cubic);
}

TEST(PerturbParams, RejectsBadLevel) {
    std::mt19937_64 rng(1);
    EXPECT_THROW(perturb_params(ModelParams::uniform(3), 1.0, rng), std::invalid_argument);
    EXPECT_THROW(perturb_params(ModelParams::uniform(3), -0.1, rng), std::invalid_argument);
}

TEST(StateVector, RejectsOddLengthAndNonFinite) {
    EXPECT_THROW(StateVector({1.0, 2.0, 3.0}), std::invalid_argument);
    EXPECT_THROW(StateVector({1.0, NAN}), std::invalid_argument);
    const StateVector s({1, 2, 3, 4});
    EXPECT_EQ(s.n_osc(), 2u);
    EXPECT_EQ(s.velocities()[0], 3.0);
}
