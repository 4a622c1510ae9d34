#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace phnode;
using namespace phtest;

TEST(Sbp, TwoCellExample) {
    const auto op = build_sbp(2);
    EXPECT_EQ(op.weights, (std::vector<double>{0.25, 0.5, 0.25}));
    RMat Q(3, 3);
    Q << -0.5, 0.5, 0, -0.5, 0, 0.5, 0, -0.5, 0.5;
    EXPECT_EQ(RMat(op.Q), Q);
    RMat E = RMat::Zero(3, 3);
    E(0, 0) = -1;
    E(2, 2) = 1;
    EXPECT_EQ(RMat(op.Q) + RMat(op.Q).transpose(), E);
    EXPECT_EQ(RMat(op.boundary_matrix()), E);
}

TEST(Sbp, IdentitiesAcrossSizes) {
    for (Index n : {2, 3, 5, 16, 101, 256}) {
        const auto op = build_sbp(n, -1.0, 2.0);
        const SpMat S = op.Q + SpMat(op.Q.transpose()) - op.boundary_matrix();
        EXPECT_LE(RMat(S).cwiseAbs().maxCoeff(), 1e-15) << n;
        const RVec ones = RVec::Ones(n + 1);
        EXPECT_LE((op.D * ones).cwiseAbs().maxCoeff(), 1e-15 * n) << n;
        const RVec xi = op.grid_vector();
        EXPECT_LE((op.D * xi - ones).cwiseAbs().maxCoeff(), 1e-12) << n;
        EXPECT_DOUBLE_EQ(op.weight_vector().sum(), 3.0);
        EXPECT_EQ(op.grid.back(), 2.0);
    }
}

TEST(Sbp, DiscreteIntegrationByParts) {
    std::mt19937 rng(3);
    for (Index n : {2, 7, 64}) {
        const auto op = build_sbp(n);
        const Eigen::SparseMatrix<Complex> D = op.D.cast<Complex>();
        for (int k = 0; k < 10; ++k) {
            const Vec x = random_vector(rng, n + 1), z = random_vector(rng, n + 1);
            const Vec Dx = D * x, Dz = D * z;
            Complex lhs = 0.0;
            for (Index i = 0; i <= n; ++i)
                lhs += op.weights[i] * (Dx(i) * std::conj(z(i)) + x(i) * std::conj(Dz(i)));
            const Complex rhs = x(n) * std::conj(z(n)) - x(0) * std::conj(z(0));
            EXPECT_LE(std::abs(lhs - rhs), 1e-13 * (1.0 + x.norm() * z.norm()));
        }
    }
}

TEST(Sbp, Errors) {
    EXPECT_THROW(build_sbp(1), StructuralError);
    EXPECT_THROW(build_sbp(4, 1.0, 1.0), StructuralError);
    EXPECT_THROW(build_sbp(4, 2.0, 1.0), StructuralError);
}
