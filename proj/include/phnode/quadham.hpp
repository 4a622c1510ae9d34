#pragma once

// Discrete quadratic Hamiltonians on 1-D grids.
//
// A density H(xi) (pointwise Hermitian positive definite, possibly singular
// with H, H^{-1} only integrable) is reduced to one block H_i per grid node.
// With quadrature weights w_i the energetic inner product, its dual and the
// duality pairing become
//
//   <x, z>_Xh      = sum_i w_i z_i^* H_i x_i
//   <x', z'>_Xh*   = sum_i w_i z'_i^* H_i^{-1} x'_i
//   <x', x>        = sum_i w_i x_i^* x'_i
//
// and the Riesz map is blockwise multiplication by H_i.

#include "phnode/linalg.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace phnode {

// =============================================================================
// Scalar coefficient functions
// =============================================================================

namespace detail {

/// Adaptive double-exponential quadrature; copes with integrable endpoint
/// singularities. Returns +inf when the integral does not converge.
inline double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi) {
    if (hi <= lo) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    try {
        return integrator.integrate(f, lo, hi, 1e-10);
    } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace detail

/// Positive scalar coefficient xi -> c(xi) with exact cell integrals where a
/// closed form exists.
class Coefficient {
public:
    enum class Kind { constant, piecewise_constant, power_law, custom };

    static Coefficient constant(double value) {
        Coefficient c;
        c.kind_ = Kind::constant;
        c.values_ = {value};
        return c;
    }

    /// `values.size() == breakpoints.size() + 1`; piece k covers
    /// [breakpoints[k-1], breakpoints[k]).
    static Coefficient piecewise_constant(std::vector<double> breakpoints, std::vector<double> values) {
        if (values.size() != breakpoints.size() + 1)
            throw StructuralError("piecewise_constant: need one more value than breakpoints");
        if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
            throw StructuralError("piecewise_constant: breakpoints must be increasing");
        Coefficient c;
        c.kind_ = Kind::piecewise_constant;
        c.breakpoints_ = std::move(breakpoints);
        c.values_ = std::move(values);
        return c;
    }

    /// coeff * xi^exponent on xi > 0, with -1 < exponent so the coefficient is
    /// integrable at the origin.
    static Coefficient power_law(double coeff, double exponent) {
        if (!(exponent > -1.0))
            throw IntegrabilityError("power_law exponent must exceed -1");
        Coefficient c;
        c.kind_ = Kind::power_law;
        c.values_ = {coeff, exponent};
        return c;
    }

    static Coefficient custom(std::function<double(double)> f, bool singular = false) {
        Coefficient c;
        c.kind_ = Kind::custom;
        c.fn_ = std::make_shared<std::function<double(double)>>(std::move(f));
        c.singular_ = singular;
        return c;
    }

    /// xi -> 1 / c(xi), kept in closed form where possible.
    Coefficient reciprocal() const {
        switch (kind_) {
            case Kind::constant:
                return constant(1.0 / values_[0]);
            case Kind::piecewise_constant: {
                std::vector<double> inv(values_.size());
                std::transform(values_.begin(), values_.end(), inv.begin(), [](double v) { return 1.0 / v; });
                return piecewise_constant(breakpoints_, inv);
            }
            case Kind::power_law: {
                Coefficient c;
                c.kind_ = Kind::power_law;
                c.values_ = {1.0 / values_[0], -values_[1]};
                return c;
            }
            case Kind::custom: {
                auto f = fn_;
                return custom([f](double xi) { return 1.0 / (*f)(xi); }, singular_);
            }
        }
        return *this;
    }

    /// Smallest value over the samples a + k (b - a) / samples; open ends are
    /// nudged inward so power laws stay finite.
    double sampled_min(double a, double b, int samples = 256) const {
        double lo = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= samples; ++k) {
            double xi = a + (b - a) * k / samples;
            if (k == 0) xi += 1e-9 * (b - a);
            if (k == samples) xi -= 1e-9 * (b - a);
            lo = std::min(lo, (*this)(xi));
        }
        return lo;
    }

    Kind kind() const { return kind_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }

    /// True when the coefficient or its reciprocal may be unbounded.
    bool singular() const {
        if (kind_ == Kind::power_law) return values_[1] != 0.0;
        return singular_;
    }

    double operator()(double xi) const {
        switch (kind_) {
            case Kind::constant:
                return values_[0];
            case Kind::piecewise_constant: {
                const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), xi);
                return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
            }
            case Kind::power_law:
                return values_[0] * std::pow(xi, values_[1]);
            case Kind::custom:
                return (*fn_)(xi);
        }
        return 0.0;
    }

    /// Integral over [lo, hi].
    double integral(double lo, double hi) const { return integrate_power(lo, hi, 1); }

    /// Integral of 1/c over [lo, hi]; +inf when not integrable.
    double reciprocal_integral(double lo, double hi) const { return integrate_power(lo, hi, -1); }

    friend bool operator==(const Coefficient& a, const Coefficient& b) {
        if (a.kind_ != b.kind_) return false;
        if (a.kind_ == Kind::custom) return a.fn_ == b.fn_;
        return a.values_ == b.values_ && a.breakpoints_ == b.breakpoints_;
    }

private:
    double integrate_power(double lo, double hi, int sign) const {
        if (hi <= lo) return 0.0;
        switch (kind_) {
            case Kind::constant:
                return (sign > 0 ? values_[0] : 1.0 / values_[0]) * (hi - lo);
            case Kind::piecewise_constant: {
                double total = 0.0, left = lo;
                for (std::size_t k = 0; k <= breakpoints_.size(); ++k) {
                    const double right = k < breakpoints_.size() ? std::min(breakpoints_[k], hi) : hi;
                    if (right > left) {
                        const double v = values_[k];
                        total += (sign > 0 ? v : 1.0 / v) * (right - left);
                        left = right;
                    }
                    if (left >= hi) break;
                }
                return total;
            }
            case Kind::power_law: {
                const double c = sign > 0 ? values_[0] : 1.0 / values_[0];
                const double e = sign > 0 ? values_[1] : -values_[1];
                if (lo < 0.0) return std::numeric_limits<double>::quiet_NaN();
                if (e <= -1.0 && lo == 0.0) return std::numeric_limits<double>::infinity();
                if (e == -1.0) return c * std::log(hi / lo);
                return c * (std::pow(hi, e + 1.0) - std::pow(lo, e + 1.0)) / (e + 1.0);
            }
            case Kind::custom: {
                const auto& f = *fn_;
                if (sign > 0) return detail::integrate_adaptive(f, lo, hi);
                return detail::integrate_adaptive([&f](double xi) { return 1.0 / f(xi); }, lo, hi);
            }
        }
        return 0.0;
    }

    Kind kind_ = Kind::constant;
    std::vector<double> breakpoints_;
    std::vector<double> values_{1.0};
    std::shared_ptr<std::function<double(double)>> fn_;
    bool singular_ = false;
};

// =============================================================================
// Matrix-valued densities
// =============================================================================

enum class Integrability { bounded, l1_singular };

struct DensitySpec {
    Index block_size = 1;
    std::function<Mat(double)> evaluate;
    Integrability integrability = Integrability::bounded;
    /// Optional closed forms for the integrals of H and H^{-1} over [lo, hi].
    std::function<Mat(double, double)> cell_integral;
    std::function<Mat(double, double)> inverse_cell_integral;

    static DensitySpec constant(const Mat& H) {
        DensitySpec d;
        d.block_size = H.rows();
        d.evaluate = [H](double) { return H; };
        return d;
    }

    /// diag(c_1(xi), ..., c_m(xi)); singular when any entry is.
    static DensitySpec diagonal(std::vector<Coefficient> entries) {
        DensitySpec d;
        d.block_size = static_cast<Index>(entries.size());
        const bool singular =
            std::any_of(entries.begin(), entries.end(), [](const Coefficient& c) { return c.singular(); });
        d.integrability = singular ? Integrability::l1_singular : Integrability::bounded;
        d.evaluate = [entries](double xi) {
            Mat h = Mat::Zero(static_cast<Index>(entries.size()), static_cast<Index>(entries.size()));
            for (std::size_t k = 0; k < entries.size(); ++k) h(Index(k), Index(k)) = entries[k](xi);
            return h;
        };
        d.cell_integral = [entries](double lo, double hi) {
            Mat h = Mat::Zero(static_cast<Index>(entries.size()), static_cast<Index>(entries.size()));
            for (std::size_t k = 0; k < entries.size(); ++k) h(Index(k), Index(k)) = entries[k].integral(lo, hi);
            return h;
        };
        d.inverse_cell_integral = [entries](double lo, double hi) {
            Mat h = Mat::Zero(static_cast<Index>(entries.size()), static_cast<Index>(entries.size()));
            for (std::size_t k = 0; k < entries.size(); ++k)
                h(Index(k), Index(k)) = entries[k].reciprocal_integral(lo, hi);
            return h;
        };
        return d;
    }

    /// Integral of H over [lo, hi]: closed form when available, otherwise
    /// entrywise adaptive quadrature.
    Mat integrate(double lo, double hi) const {
        if (cell_integral) return cell_integral(lo, hi);
        return integrate_entrywise([this](double xi) { return evaluate(xi); }, lo, hi);
    }

    Mat integrate_inverse(double lo, double hi) const {
        if (inverse_cell_integral) return inverse_cell_integral(lo, hi);
        return integrate_entrywise([this](double xi) { return Mat(evaluate(xi).inverse()); }, lo, hi);
    }

private:
    Mat integrate_entrywise(const std::function<Mat(double)>& f, double lo, double hi) const {
        Mat out(block_size, block_size);
        for (Index r = 0; r < block_size; ++r) {
            for (Index c = 0; c < block_size; ++c) {
                const double re = detail::integrate_adaptive([&](double xi) { return f(xi)(r, c).real(); }, lo, hi);
                const double im = detail::integrate_adaptive([&](double xi) { return f(xi)(r, c).imag(); }, lo, hi);
                out(r, c) = Complex(re, im);
            }
        }
        return out;
    }
};

// =============================================================================
// Energy metric
// =============================================================================

struct EnergyMetric {
    std::vector<double> grid;
    std::vector<double> weights;
    std::vector<Mat> blocks;          // H_i
    std::vector<Mat> inverse_blocks;  // H_i^{-1}

    Index block_size() const { return blocks.empty() ? 0 : blocks.front().rows(); }
    Index num_nodes() const { return static_cast<Index>(blocks.size()); }
    Index dim() const { return num_nodes() * block_size(); }

    /// blockdiag(w_i H_i).
    Mat mass_matrix() const {
        std::vector<Mat> scaled;
        scaled.reserve(blocks.size());
        for (std::size_t i = 0; i < blocks.size(); ++i) scaled.push_back(weights[i] * blocks[i]);
        return block_diagonal(scaled);
    }

    /// blockdiag(H_i): the discrete Riesz map as a matrix.
    Mat riesz_matrix() const { return block_diagonal(blocks); }

    /// Lower-triangular L with L L^* = mass_matrix().
    Mat factor() const {
        std::vector<Mat> f;
        f.reserve(blocks.size());
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            Eigen::LLT<Mat> llt(weights[i] * blocks[i]);
            if (llt.info() != Eigen::Success) throw DensityError("energy metric block is not positive definite");
            f.push_back(llt.matrixL());
        }
        return block_diagonal(f);
    }

    double min_mass_eigenvalue() const {
        double lmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < blocks.size(); ++i)
            lmin = std::min(lmin, weights[i] * min_hermitian_eigenvalue(blocks[i]));
        return lmin;
    }

    /// Single-node metric with unit weight: the finite-dimensional case 1/2 x^* H x.
    static EnergyMetric from_matrix(const Mat& H) {
        if (H.rows() != H.cols()) throw StructuralError("metric matrix must be square");
        if (min_hermitian_eigenvalue(H) <= 0.0 || max_abs_entry(H - H.adjoint()) > default_tolerance(H))
            throw DensityError("metric matrix must be Hermitian positive definite");
        EnergyMetric m;
        m.grid = {0.0};
        m.weights = {1.0};
        m.blocks = {hermitian_part(H)};
        m.inverse_blocks = {m.blocks[0].inverse()};
        return m;
    }

    static EnergyMetric identity(Index n) { return from_matrix(Mat::Identity(n, n)); }

    /// Explicit weights and blocks (used when the state lives on a sub-grid).
    static EnergyMetric from_blocks(std::vector<double> grid, std::vector<double> weights, std::vector<Mat> blocks) {
        if (grid.size() != weights.size() || grid.size() != blocks.size())
            throw StructuralError("grid, weights and blocks must have equal length");
        EnergyMetric m;
        m.grid = std::move(grid);
        m.weights = std::move(weights);
        m.blocks = std::move(blocks);
        for (std::size_t i = 0; i < m.blocks.size(); ++i) {
            if (!(m.weights[i] > 0.0)) throw DensityError("quadrature weights must be positive");
            if (min_hermitian_eigenvalue(m.blocks[i]) <= 0.0)
                throw DensityError("density block " + std::to_string(i) + " is not positive definite");
            m.inverse_blocks.push_back(m.blocks[i].inverse());
        }
        return m;
    }
};

/// Trapezoidal weights for a strictly increasing grid.
inline std::vector<double> trapezoidal_weights(const std::vector<double>& grid) {
    const std::size_t n = grid.size();
    if (n < 2) throw StructuralError("grid needs at least two nodes");
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = grid[i + 1] - grid[i];
        if (!(h > 0.0)) throw StructuralError("grid must be strictly increasing");
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

/// Blocks for each node: pointwise samples for bounded densities; for
/// L1-singular densities the average of H over the node's dual cell
/// [mid(i-1,i), mid(i,i+1)], whose length equals the trapezoidal weight.
inline EnergyMetric build_energy_metric(const DensitySpec& spec, const std::vector<double>& grid,
                                        const std::vector<double>& weights) {
    if (weights.size() != grid.size()) throw StructuralError("weights must match grid");
    if (!spec.evaluate) throw DensityError("density has no evaluator");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i + 1] > grid[i])) throw StructuralError("grid must be strictly increasing");

    std::vector<Mat> blocks;
    blocks.reserve(grid.size());
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
        Mat h;
        if (spec.integrability == Integrability::bounded) {
            h = spec.evaluate(grid[i]);
        } else {
            const double lo = i == 0 ? grid[0] : 0.5 * (grid[i - 1] + grid[i]);
            const double hi = i + 1 == n ? grid[n - 1] : 0.5 * (grid[i] + grid[i + 1]);
            const Mat integral = spec.integrate(lo, hi);
            const Mat inverse_integral = spec.integrate_inverse(lo, hi);
            if (!integral.allFinite() || !inverse_integral.allFinite())
                throw IntegrabilityError("non-finite cell integral on [" + std::to_string(lo) + ", " +
                                         std::to_string(hi) + "]");
            h = integral / (hi - lo);
        }
        if (h.rows() != spec.block_size || h.cols() != spec.block_size)
            throw StructuralError("density evaluator returned a block of the wrong size");
        if (!h.allFinite()) throw DensityError("non-finite density sample at xi = " + std::to_string(grid[i]));
        if (max_abs_entry(h - h.adjoint()) > default_tolerance(h))
            throw DensityError("density sample not Hermitian at xi = " + std::to_string(grid[i]));
        if (min_hermitian_eigenvalue(h) <= 0.0)
            throw DensityError("density sample not positive definite at xi = " + std::to_string(grid[i]));
        blocks.push_back(hermitian_part(h));
    }
    return EnergyMetric::from_blocks(grid, weights, std::move(blocks));
}

inline EnergyMetric build_energy_metric(const DensitySpec& spec, const std::vector<double>& grid) {
    return build_energy_metric(spec, grid, trapezoidal_weights(grid));
}

// =============================================================================
// Inner products, duality, Riesz map
// =============================================================================

namespace detail {

inline void require_conforming(const EnergyMetric& metric, const Vec& v, const char* name) {
    if (v.size() != metric.dim())
        throw StructuralError(std::string(name) + " does not conform to the metric layout");
}

}  // namespace detail

inline Complex xh_inner(const EnergyMetric& metric, const Vec& x, const Vec& z) {
    detail::require_conforming(metric, x, "x");
    detail::require_conforming(metric, z, "z");
    const Index m = metric.block_size();
    Complex sum = 0.0;
    for (Index i = 0; i < metric.num_nodes(); ++i)
        sum += metric.weights[std::size_t(i)] *
               z.segment(i * m, m).dot(metric.blocks[std::size_t(i)] * x.segment(i * m, m));
    return sum;
}

inline Complex xh_dual_inner(const EnergyMetric& metric, const Vec& xp, const Vec& zp) {
    detail::require_conforming(metric, xp, "x'");
    detail::require_conforming(metric, zp, "z'");
    const Index m = metric.block_size();
    Complex sum = 0.0;
    for (Index i = 0; i < metric.num_nodes(); ++i)
        sum += metric.weights[std::size_t(i)] *
               zp.segment(i * m, m).dot(metric.inverse_blocks[std::size_t(i)] * xp.segment(i * m, m));
    return sum;
}

/// <x', x>_{Xh*, Xh} = sum_i w_i x_i^* x'_i.
inline Complex duality_pairing(const EnergyMetric& metric, const Vec& xp, const Vec& x) {
    detail::require_conforming(metric, xp, "x'");
    detail::require_conforming(metric, x, "x");
    const Index m = metric.block_size();
    Complex sum = 0.0;
    for (Index i = 0; i < metric.num_nodes(); ++i)
        sum += metric.weights[std::size_t(i)] * x.segment(i * m, m).dot(xp.segment(i * m, m));
    return sum;
}

inline double xh_norm(const EnergyMetric& metric, const Vec& x) {
    return std::sqrt(std::max(0.0, xh_inner(metric, x, x).real()));
}

inline double xh_dual_norm(const EnergyMetric& metric, const Vec& xp) {
    return std::sqrt(std::max(0.0, xh_dual_inner(metric, xp, xp).real()));
}

/// 1/2 ||x||^2_Xh. Shared by every module that reports stored energy.
inline double discrete_hamiltonian(const EnergyMetric& metric, const Vec& x) {
    return 0.5 * xh_inner(metric, x, x).real();
}

inline Vec riesz_map(const EnergyMetric& metric, const Vec& x) {
    detail::require_conforming(metric, x, "x");
    const Index m = metric.block_size();
    Vec out(x.size());
    for (Index i = 0; i < metric.num_nodes(); ++i)
        out.segment(i * m, m) = metric.blocks[std::size_t(i)] * x.segment(i * m, m);
    return out;
}

inline Vec inverse_riesz_map(const EnergyMetric& metric, const Vec& xp) {
    detail::require_conforming(metric, xp, "x'");
    const Index m = metric.block_size();
    Vec out(xp.size());
    for (Index i = 0; i < metric.num_nodes(); ++i)
        out.segment(i * m, m) = metric.inverse_blocks[std::size_t(i)] * xp.segment(i * m, m);
    return out;
}

// =============================================================================
// Square-root isometries
// =============================================================================

/// Principal square root of a Hermitian PSD block. Eigenvalues in
/// [-1e-12 * scale, 0) are clamped to zero with a warning on stderr.
inline Mat principal_sqrt(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h));
    RVec ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Index k = 0; k < ev.size(); ++k) {
        if (ev(k) < 0.0) {
            if (ev(k) < -1e-12 * scale) throw DensityError("square root of a block with a negative eigenvalue");
            std::cerr << "phnode: warning: clamping eigenvalue " << ev(k) << " to zero in square root\n";
            ev(k) = 0.0;
        }
    }
    return es.eigenvectors() * ev.cwiseSqrt().cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Blockwise H_i^{1/2} x_i.
inline Vec apply_sqrt_density(const EnergyMetric& metric, const std::vector<Mat>& roots, const Vec& x) {
    const Index m = metric.block_size();
    Vec out(x.size());
    for (Index i = 0; i < metric.num_nodes(); ++i) out.segment(i * m, m) = roots[std::size_t(i)] * x.segment(i * m, m);
    return out;
}

struct IsometryReport {
    double u_isometry_error = 0.0;   // | ||H^{1/2} x||_w - ||x||_Xh | / ||x||_Xh
    double adjoint_error = 0.0;      // | <Vx, y> - <x, H^{1/2} y>_w | / (||x||_w ||H^{1/2} y||_w)
    double composition_error = 0.0;  // ||V U x - riesz(x)|| / ||riesz(x)||
    double tolerance = 1e-11;
    bool passed = true;
};

/// Verifies that U = H^{1/2}: Xh -> L2 is isometric, that V = H^{1/2}: L2 -> Xh*
/// is its adjoint under the duality pairing, and that V U is the Riesz map.
/// Errors are relative; all must be within `tol` on every sample.
inline IsometryReport sqrt_isometry_check(const EnergyMetric& metric, const std::vector<Vec>& samples,
                                          double tol = 1e-11) {
    if (samples.empty()) throw PreconditionError("sqrt_isometry_check needs at least one sample");
    std::vector<Mat> roots;
    roots.reserve(metric.blocks.size());
    for (const auto& b : metric.blocks) roots.push_back(principal_sqrt(b));
    const EnergyMetric flat = [&] {
        EnergyMetric f = metric;
        for (auto& b : f.blocks) b = Mat::Identity(b.rows(), b.cols());
        for (auto& b : f.inverse_blocks) b = Mat::Identity(b.rows(), b.cols());
        return f;
    }();

    IsometryReport report;
    report.tolerance = tol;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const Vec& x = samples[k];
        const Vec& y = samples[(k + 1) % samples.size()];
        detail::require_conforming(metric, x, "sample");
        const Vec ux = apply_sqrt_density(metric, roots, x);
        const double nx = xh_norm(metric, x);
        if (nx > 0.0) report.u_isometry_error = std::max(report.u_isometry_error, std::abs(xh_norm(flat, ux) - nx) / nx);

        // V x with x read as an L2 element.
        const Vec vx = apply_sqrt_density(metric, roots, x);
        const Vec uy = apply_sqrt_density(metric, roots, y);
        const Complex lhs = duality_pairing(metric, vx, y);
        const Complex rhs = xh_inner(flat, x, uy);
        const double scale = xh_norm(flat, x) * xh_norm(flat, uy);
        if (scale > 0.0) report.adjoint_error = std::max(report.adjoint_error, std::abs(lhs - rhs) / scale);

        const Vec vux = apply_sqrt_density(metric, roots, ux);
        const Vec rx = riesz_map(metric, x);
        const double nr = rx.norm();
        if (nr > 0.0) report.composition_error = std::max(report.composition_error, (vux - rx).norm() / nr);
    }
    report.passed = report.u_isometry_error <= tol && report.adjoint_error <= tol && report.composition_error <= tol;
    return report;
}

}  // namespace phnode
