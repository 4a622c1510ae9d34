#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace phnode;
using namespace phtest;

namespace {

std::vector<Vec> random_samples(std::mt19937& rng, Index dim, int count) {
    std::vector<Vec> out;
    for (int k = 0; k < count; ++k) out.push_back(random_vector(rng, dim));
    return out;
}

EnergyMetric singular_string_metric(Index n_cells) {
    const auto spec = DensitySpec::diagonal({Coefficient::constant(1.0), Coefficient::power_law(1.0, -0.5).reciprocal()});
    return build_energy_metric(spec, uniform_grid(n_cells, 0.0, 1.0));
}

}  // namespace

TEST(Coefficient, ClosedFormIntegrals) {
    const auto c = Coefficient::power_law(1.0, 0.5);
    const double h = 0.01;
    // Antiderivative (2/3) xi^{3/2}.
    EXPECT_NEAR(c.integral(0.0, h), 2.0 / 3.0 * std::pow(h, 1.5), 1e-16);
    EXPECT_NEAR(c.integral(0.0, h) / h, 2.0 / 3.0 * std::sqrt(h), 1e-15);
    // 1/c = xi^{-1/2}: antiderivative 2 xi^{1/2}.
    EXPECT_NEAR(c.reciprocal_integral(0.0, h), 2.0 * std::sqrt(h), 1e-15);

    const auto pc = Coefficient::piecewise_constant({0.5}, {1.0, 3.0});
    EXPECT_DOUBLE_EQ(pc.integral(0.0, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(pc.reciprocal_integral(0.0, 1.0), 0.5 + 0.5 / 3.0);
    EXPECT_EQ(pc(0.25), 1.0);
    EXPECT_EQ(pc(0.75), 3.0);
}

TEST(Coefficient, NonIntegrableReciprocalIsInfinite) {
    EXPECT_TRUE(std::isfinite(Coefficient::power_law(1.0, 0.99).reciprocal_integral(0.0, 1.0)));
    EXPECT_TRUE(std::isfinite(Coefficient::power_law(1.0, -0.5).reciprocal_integral(0.0, 1.0)));
    EXPECT_THROW(Coefficient::power_law(1.0, -1.0), IntegrabilityError);
    EXPECT_THROW(Coefficient::power_law(1.0, -2.0), IntegrabilityError);
    // xi^{1.5}: reciprocal xi^{-1.5} is not integrable at 0.
    EXPECT_TRUE(std::isinf(Coefficient::power_law(1.0, 1.5).reciprocal_integral(0.0, 1.0)));
}

TEST(Coefficient, CustomUsesQuadrature) {
    const auto c = Coefficient::custom([](double xi) { return 1.0 + xi * xi; });
    EXPECT_NEAR(c.integral(0.0, 1.0), 4.0 / 3.0, 1e-12);
    EXPECT_NEAR(c.reciprocal_integral(0.0, 1.0), std::atan(1.0), 1e-12);
}

TEST(EnergyMetricBuild, IdentityDensityGivesTrapezoidalMass) {
    const Index n = 10;
    const auto grid = uniform_grid(n, 0.0, 1.0);
    const auto metric = build_energy_metric(DensitySpec::constant(Mat::Identity(1, 1)), grid);
    const Mat MM = metric.mass_matrix();
    EXPECT_EQ(MM.rows(), n + 1);
    double total = 0.0;
    for (Index i = 0; i <= n; ++i) {
        const double expect = (i == 0 || i == n) ? 0.05 : 0.1;
        EXPECT_NEAR(MM(i, i).real(), expect, 1e-16);
        total += MM(i, i).real();
    }
    EXPECT_NEAR(total, 1.0, 1e-15);
    EXPECT_EQ(MM - Mat(MM.diagonal().asDiagonal()), Mat::Zero(n + 1, n + 1));
}

TEST(EnergyMetricBuild, StringDensityGivesTrapezoidalIdentityBlocks) {
    const auto metric = build_energy_metric(
        DensitySpec::diagonal({Coefficient::constant(1.0), Coefficient::constant(1.0)}), uniform_grid(8, 0.0, 1.0));
    for (std::size_t i = 0; i < metric.blocks.size(); ++i) EXPECT_EQ(metric.blocks[i], Mat::Identity(2, 2));
    const auto w = trapezoidal_weights(uniform_grid(8, 0.0, 1.0));
    EXPECT_EQ(metric.weights, w);
}

TEST(EnergyMetricBuild, SingularDensityUsesDualCellAverage) {
    const Index n = 64;
    const double h = 1.0 / n;
    const auto metric = singular_string_metric(n);
    // Node 0 owns [0, h/2]: average of xi^{1/2} there is (2/3)(h/2)^{1/2}.
    EXPECT_NEAR(metric.blocks[0](1, 1).real(), 2.0 / 3.0 * std::sqrt(h / 2), 1e-15);
    // Node 1 owns [h/2, 3h/2].
    const double avg1 = (2.0 / 3.0) * (std::pow(1.5 * h, 1.5) - std::pow(0.5 * h, 1.5)) / h;
    EXPECT_NEAR(metric.blocks[1](1, 1).real(), avg1, 1e-15);
    EXPECT_GT(metric.min_mass_eigenvalue(), 0.0);
    EXPECT_GT(min_hermitian_eigenvalue(metric.mass_matrix()), 0.0);
}

TEST(EnergyMetricBuild, SingularDensityPreservesPiecewiseConstantIntegrals) {
    // For x constant on each dual cell, sum w_i x_i^2 H_i equals the exact integral.
    const Index n = 16;
    const auto c = Coefficient::power_law(2.0, -0.5);
    const auto spec = DensitySpec::diagonal({c});
    const auto grid = uniform_grid(n, 0.0, 1.0);
    const auto metric = build_energy_metric(spec, grid);
    Vec x(n + 1);
    for (Index i = 0; i <= n; ++i) x(i) = 1.0 + 0.1 * double(i);
    double exact = 0.0;
    for (Index i = 0; i <= n; ++i) {
        const double lo = i == 0 ? 0.0 : 0.5 * (grid[i - 1] + grid[i]);
        const double hi = i == n ? 1.0 : 0.5 * (grid[i] + grid[i + 1]);
        exact += std::norm(x(i)) * c.integral(lo, hi);
    }
    EXPECT_NEAR(xh_inner(metric, x, x).real(), exact, 1e-13 * exact);
}

TEST(EnergyMetricBuild, Errors) {
    const auto grid = uniform_grid(4, 0.0, 1.0);
    EXPECT_THROW(build_energy_metric(DensitySpec::constant(-Mat::Identity(1, 1)), grid), DensityError);
    Mat nonherm(2, 2);
    nonherm << 1, 1, 0, 1;
    EXPECT_THROW(build_energy_metric(DensitySpec::constant(nonherm), grid), DensityError);
    EXPECT_THROW(build_energy_metric(DensitySpec::constant(Mat::Identity(1, 1)), {0.0, 0.5, 0.5, 1.0}),
                 StructuralError);
    // Flagged singular with a non-integrable inverse.
    auto spec = DensitySpec::diagonal({Coefficient::power_law(1.0, 1.5)});
    EXPECT_THROW(build_energy_metric(spec, grid), IntegrabilityError);
}

TEST(InnerProducts, IdentityDensityIsWeightedL2) {
    std::mt19937 rng(1);
    const auto grid = uniform_grid(12, 0.0, 2.0);
    const auto metric = build_energy_metric(DensitySpec::constant(Mat::Identity(1, 1)), grid);
    const Vec x = random_vector(rng, 13);
    double expect = 0.0;
    for (Index i = 0; i < 13; ++i) expect += metric.weights[i] * std::norm(x(i));
    EXPECT_NEAR(xh_inner(metric, x, x).real(), expect, 1e-13 * expect);
    EXPECT_EQ(riesz_map(metric, x), x);
}

TEST(InnerProducts, DiagonalSqrtExample) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 4.0;
    H(1, 1) = 1.0;
    const auto metric = EnergyMetric::from_matrix(H);
    const Mat root = principal_sqrt(H);
    Mat expect = Mat::Zero(2, 2);
    expect(0, 0) = 2.0;
    expect(1, 1) = 1.0;
    EXPECT_LE((root - expect).norm(), 1e-15);
    Vec x(2);
    x << 1, 1;
    EXPECT_NEAR((root * x).squaredNorm(), 5.0, 1e-14);
    EXPECT_NEAR(xh_inner(metric, x, x).real(), 5.0, 1e-14);
    EXPECT_TRUE(sqrt_isometry_check(metric, {x}).passed);
}

TEST(InnerProducts, RandomIdentities) {
    std::mt19937 rng(23);
    for (int k = 0; k < 100; ++k) {
        const Index nodes = random_dim(rng, 1, 10), block = random_dim(rng, 1, 4);
        const auto metric = random_metric(rng, nodes, block);
        const Vec x = random_vector(rng, metric.dim()), z = random_vector(rng, metric.dim());
        const Vec xp = random_vector(rng, metric.dim());

        // Conjugate symmetry.
        EXPECT_LE(std::abs(xh_inner(metric, x, z) - std::conj(xh_inner(metric, z, x))), 1e-12 * x.norm() * z.norm() * 10);
        // Riesz identity.
        const Complex lhs = duality_pairing(metric, riesz_map(metric, x), z);
        const Complex rhs = xh_inner(metric, x, z);
        EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + std::abs(rhs)));
        // Cauchy-Schwarz.
        EXPECT_LE(std::abs(duality_pairing(metric, xp, x)),
                  xh_dual_norm(metric, xp) * xh_norm(metric, x) * (1.0 + 1e-12));
        // Riesz isometry.
        const double nx = xh_norm(metric, x);
        EXPECT_NEAR(xh_dual_norm(metric, riesz_map(metric, x)), nx, 1e-12 * nx);
        // Inverse consistency.
        EXPECT_LE((inverse_riesz_map(metric, riesz_map(metric, x)) - x).norm(), 1e-13 * x.norm() * 10);
    }
}

TEST(InnerProducts, HamiltonianMatchesSharedPath) {
    std::mt19937 rng(29);
    const auto metric = random_metric(rng, 5, 2);
    const Vec x = random_vector(rng, metric.dim());
    EXPECT_EQ(discrete_hamiltonian(metric, x), 0.5 * xh_inner(metric, x, x).real());
}

TEST(InnerProducts, GateauxDerivativeRichardson) {
    std::mt19937 rng(31);
    const auto metric = random_metric(rng, 6, 2);
    const Vec x = random_vector(rng, metric.dim()), y = random_vector(rng, metric.dim());
    const double exact = duality_pairing(metric, riesz_map(metric, x), y).real();
    auto fd = [&](double h) {
        return (discrete_hamiltonian(metric, x + h * y) - discrete_hamiltonian(metric, x)) / h;
    };
    const double h1 = 1e-4, h2 = 1e-6;
    const double d1 = fd(h1), d2 = fd(h2);
    // The quotient error is (h/2) ||y||^2 exactly; both steps see it.
    const double ny2 = xh_inner(metric, y, y).real();
    EXPECT_NEAR(d1 - exact, 0.5 * h1 * ny2, 1e-9 * (1.0 + ny2));
    EXPECT_NEAR(d2 - exact, 0.5 * h2 * ny2, 1e-8 * (1.0 + ny2));
    // Richardson removes the first-order term.
    const double rich = (h1 * d2 - h2 * d1) / (h1 - h2);
    EXPECT_NEAR(rich, exact, 1e-8 * (1.0 + std::abs(exact)));
    EXPECT_LT(std::abs(rich - exact), std::abs(d2 - exact));
}

TEST(InnerProducts, ShapeMismatchIsStructuralError) {
    const auto metric = EnergyMetric::identity(3);
    EXPECT_THROW(xh_inner(metric, Vec::Zero(2), Vec::Zero(3)), StructuralError);
    EXPECT_THROW(riesz_map(metric, Vec::Zero(4)), StructuralError);
}

TEST(SqrtIsometry, IdentityAndRandomMetrics) {
    std::mt19937 rng(37);
    const auto id = EnergyMetric::identity(4);
    const auto r1 = sqrt_isometry_check(id, random_samples(rng, 4, 5));
    EXPECT_TRUE(r1.passed);
    EXPECT_LE(r1.u_isometry_error, 1e-15);
    for (int k = 0; k < 20; ++k) {
        const auto metric = random_metric(rng, random_dim(rng, 1, 6), random_dim(rng, 1, 4));
        const auto r = sqrt_isometry_check(metric, random_samples(rng, metric.dim(), 4));
        EXPECT_TRUE(r.passed) << r.u_isometry_error << ' ' << r.adjoint_error << ' ' << r.composition_error;
    }
}

TEST(SqrtIsometry, SingularStringDensity) {
    std::mt19937 rng(41);
    const auto metric = singular_string_metric(64);
    const auto r = sqrt_isometry_check(metric, random_samples(rng, metric.dim(), 10), 1e-11);
    EXPECT_TRUE(r.passed);
}

TEST(SqrtIsometry, Errors) {
    EXPECT_THROW(sqrt_isometry_check(EnergyMetric::identity(2), {}), PreconditionError);
    Mat bad = Mat::Identity(2, 2);
    bad(1, 1) = -1.0;
    EXPECT_THROW(principal_sqrt(bad), DensityError);
    Mat tiny = Mat::Identity(2, 2);
    tiny(1, 1) = -1e-14;
    const Mat root = principal_sqrt(tiny);
    EXPECT_EQ(root(1, 1), Complex(0.0));
}
