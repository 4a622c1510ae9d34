#pragma once

// Structural checks on finite-dimensional nodes: main operator, maximal
// dissipativity, contraction semigroups, adjoints, transfer functions,
// positive-real scans and a vertical-line well-posedness proxy.

#include "phnode/node.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace phnode {

// =============================================================================
// Parallel helper
// =============================================================================

/// Worker count: hardware concurrency, capped by PHNODE_THREADS when set.
inline unsigned scan_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PHNODE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

/// Runs body(i) for i in [0, count). Each index writes only its own slot, so
/// results do not depend on the thread count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned threads = std::min<std::size_t>(scan_threads(), std::max<std::size_t>(count, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// =============================================================================
// Main operator
// =============================================================================

/// Restriction of [A | B] to u = 0, i.e. its first n columns.
inline Mat main_operator(const Mat& AB, Index n) {
    if (AB.rows() != n || AB.cols() < n) throw StructuralError("A&B block must be n x (n + m)");
    return AB.leftCols(n);
}

inline Mat main_operator(const DiscreteNode& node) { return node.A; }

/// Main operator F H of a port-Hamiltonian structure.
inline Mat main_operator(const PHStructure& s) {
    s.check_dimensions();
    return (s.J - s.R) * s.H;
}

// =============================================================================
// Maximal dissipativity
// =============================================================================

struct ResolventWitness {
    Complex lambda;
    double condition = 0.0;
    bool nonsingular = false;
};

struct MaxDissReport {
    bool is_dissipative = false;
    double max_sym_eig = 0.0;
    std::vector<ResolventWitness> resolvent;
    bool resolvent_surjective = false;
    bool adjoint_dissipative = false;
    double adjoint_max_sym_eig = 0.0;
    double tolerance = 0.0;
    /// All three flags equal.
    bool flags_agree = false;
    /// Dissipativity implies the other two flags; false signals an internal
    /// inconsistency.
    bool consistent = false;
};

/// Metric adjoint MM^{-1} A^* MM.
inline Mat metric_adjoint(const EnergyMetric& metric, const Mat& A) {
    const Mat MM = metric.mass_matrix();
    return Eigen::PartialPivLU<Mat>(MM).solve(A.adjoint() * MM);
}

/// Condition numbers above this count as singular.
inline constexpr double kMaxResolventCondition = 1e12;

inline MaxDissReport check_maximal_dissipative(const Mat& A, const EnergyMetric& metric,
                                               const std::vector<Complex>& lambdas,
                                               std::optional<double> tol = std::nullopt) {
    require_shape(A, metric.dim(), metric.dim(), "A");
    for (const auto& l : lambdas)
        if (!(l.real() > 0.0)) throw PreconditionError("resolvent points must satisfy Re lambda > 0");

    const Mat Ahat = metric_transform(metric, A);
    MaxDissReport r;
    r.tolerance = tol.value_or(default_tolerance(Ahat));
    r.max_sym_eig = max_hermitian_eigenvalue(Ahat);
    r.is_dissipative = r.max_sym_eig <= r.tolerance;

    r.resolvent_surjective = true;
    const Mat I = Mat::Identity(A.rows(), A.cols());
    for (const auto& l : lambdas) {
        ResolventWitness w;
        w.lambda = l;
        w.condition = condition_number(l * I - Ahat);
        w.nonsingular = w.condition <= kMaxResolventCondition;
        r.resolvent_surjective = r.resolvent_surjective && w.nonsingular;
        r.resolvent.push_back(w);
    }

    const Mat adj_hat = metric_transform(metric, metric_adjoint(metric, A));
    r.adjoint_max_sym_eig = max_hermitian_eigenvalue(adj_hat);
    r.adjoint_dissipative = r.adjoint_max_sym_eig <= r.tolerance;

    r.flags_agree = r.is_dissipative == r.resolvent_surjective && r.is_dissipative == r.adjoint_dissipative;
    r.consistent = !r.is_dissipative || (r.resolvent_surjective && r.adjoint_dissipative);
    return r;
}

inline std::vector<Complex> default_resolvent_points() { return {1.0, Complex(1.0, 1.0), 10.0}; }

// =============================================================================
// Contraction semigroup
// =============================================================================

struct ContractionSample {
    double t = 0.0;
    double norm = 0.0;
};

struct ContractionReport {
    std::vector<ContractionSample> samples;
    double max_norm = 0.0;
    double worst_t = 0.0;
    double tolerance = 0.0;
    bool passed = true;
};

/// Energy-norm of exp(t A) for each t, via the spectral norm of
/// exp(t L^* A L^{-*}). t = 0 reports exactly 1.
inline ContractionReport contraction_scan(const Mat& A, const EnergyMetric& metric, const std::vector<double>& times,
                                          double tol = 1e-8) {
    require_shape(A, metric.dim(), metric.dim(), "A");
    const Mat Ahat = metric_transform(metric, A);
    ContractionReport r;
    r.tolerance = tol;
    r.samples.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (!(t >= 0.0) || !std::isfinite(t)) throw PreconditionError("contraction times must be finite and >= 0");
        r.samples[k].t = t;
        if (t == 0.0 || A.size() == 0) {
            r.samples[k].norm = 1.0;
        } else {
            const Mat E = (t * Ahat).exp();
            r.samples[k].norm = spectral_norm(E);
        }
    }
    for (const auto& s : r.samples) {
        if (s.norm > r.max_norm) {
            r.max_norm = s.norm;
            r.worst_t = s.t;
        }
    }
    r.passed = r.max_norm <= 1.0 + tol;
    return r;
}

inline ContractionReport contraction_scan(const DiscreteNode& node, const std::vector<double>& times,
                                          double tol = 1e-8) {
    return contraction_scan(node.A, node.metric, times, tol);
}

// =============================================================================
// Adjoint node
// =============================================================================

/// Adjoint with respect to the energy metric and the Euclidean port pairing:
///   A# = MM^{-1} A^* MM,  B# = MM^{-1} C^*,  C# = B^* MM,  D# = D^*,
/// so that G#(conj(s)) = G(s)^*.
inline DiscreteNode adjoint_node(const DiscreteNode& node) {
    node.check_dimensions();
    const Mat MM = node.metric.mass_matrix();
    const Eigen::PartialPivLU<Mat> lu(MM);
    DiscreteNode adj;
    adj.A = lu.solve(node.A.adjoint() * MM);
    adj.B = lu.solve(node.C.adjoint());
    adj.C = node.B.adjoint() * MM;
    adj.D = node.D.adjoint();
    adj.metric = node.metric;
    adj.provenance = node.provenance + "/adjoint";
    return adj;
}

// =============================================================================
// Transfer functions
// =============================================================================

struct TransferSample {
    Complex s;
    Mat G;
    double herm_min_eig = 0.0;
    double norm = 0.0;
};

inline TransferSample make_transfer_sample(Complex s, Mat G) {
    TransferSample out;
    out.s = s;
    out.herm_min_eig = G.size() ? min_hermitian_eigenvalue(G) : 0.0;
    out.norm = spectral_norm(G);
    out.G = std::move(G);
    return out;
}

/// Reciprocal condition estimates below this raise ResolventError.
inline constexpr double kMinResolventRcond = 1e-14;

/// G(s) = C (sI - A)^{-1} B + D by a direct LU solve.
inline TransferSample transfer_eval(const DiscreteNode& node, Complex s) {
    node.check_dimensions();
    const Index n = node.state_dim();
    if (n == 0) return make_transfer_sample(s, node.D);
    const Eigen::PartialPivLU<Mat> lu(s * Mat::Identity(n, n) - node.A);
    if (!(lu.rcond() > kMinResolventRcond))
        throw ResolventError("sI - A is singular at s = (" + std::to_string(s.real()) + ", " +
                             std::to_string(s.imag()) + ")");
    return make_transfer_sample(s, node.C * lu.solve(node.B) + node.D);
}

/// Repeated transfer evaluation at O(n^2) per point: A = Q Hs Q^* with Hs
/// upper Hessenberg, so (sI - Hs) is solved by elimination with adjacent-row
/// pivoting.
class TransferEvaluator {
public:
    explicit TransferEvaluator(const DiscreteNode& node) : D_(node.D) {
        node.check_dimensions();
        const Index n = node.state_dim();
        if (n == 0) {
            CQ_ = Mat::Zero(node.input_dim(), 0);
            QB_ = Mat::Zero(0, node.input_dim());
            return;
        }
        Eigen::HessenbergDecomposition<Mat> hd(node.A);
        Hs_ = hd.matrixH();
        const Mat Q = hd.matrixQ();
        QB_ = Q.adjoint() * node.B;
        CQ_ = node.C * Q;
        scale_ = std::max(1.0, Hs_.cwiseAbs().rowwise().sum().maxCoeff());
    }

    Mat operator()(Complex s) const {
        const Index n = Hs_.rows();
        if (n == 0) return D_;
        RowMat M = -Hs_;
        M.diagonal().array() += s;
        RowMat X = QB_;
        const double tiny = 1e-15 * (scale_ + std::abs(s));
        for (Index k = 0; k + 1 < n; ++k) {
            if (std::abs(M(k + 1, k)) > std::abs(M(k, k))) {
                M.row(k).tail(n - k).swap(M.row(k + 1).tail(n - k));
                X.row(k).swap(X.row(k + 1));
            }
            if (std::abs(M(k, k)) <= tiny) throw_singular(s);
            const Complex l = M(k + 1, k) / M(k, k);
            if (l != 0.0) {
                M.row(k + 1).tail(n - k - 1) -= l * M.row(k).tail(n - k - 1);
                X.row(k + 1) -= l * X.row(k);
            }
        }
        if (std::abs(M(n - 1, n - 1)) <= tiny) throw_singular(s);
        for (Index k = n - 1; k >= 0; --k) {
            if (k + 1 < n) X.row(k) -= M.row(k).tail(n - k - 1) * X.bottomRows(n - k - 1);
            X.row(k) /= M(k, k);
        }
        return CQ_ * X + D_;
    }

    TransferSample sample(Complex s) const { return make_transfer_sample(s, (*this)(s)); }

private:
    using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    [[noreturn]] static void throw_singular(Complex s) {
        throw ResolventError("sI - A is singular at s = (" + std::to_string(s.real()) + ", " +
                             std::to_string(s.imag()) + ")");
    }

    RowMat Hs_;
    RowMat QB_;
    Mat CQ_;
    Mat D_;
    double scale_ = 1.0;
};

// =============================================================================
// Positive-real scan
// =============================================================================

struct SGridSpec {
    double re_min = 1e-2, re_max = 1e2;
    int re_points = 32;
    double im_min = -1e2, im_max = 1e2;
    int im_points = 33;
};

/// Logarithmic in Re s, linear in Im s.
inline std::vector<Complex> make_s_grid(const SGridSpec& spec) {
    if (!(spec.re_min > 0.0) || !(spec.re_max >= spec.re_min) || spec.re_points < 1 || spec.im_points < 1)
        throw PreconditionError("s-grid needs 0 < re_min <= re_max and positive point counts");
    std::vector<Complex> grid;
    grid.reserve(std::size_t(spec.re_points) * std::size_t(spec.im_points));
    const double lmin = std::log10(spec.re_min), lmax = std::log10(spec.re_max);
    for (int i = 0; i < spec.re_points; ++i) {
        const double re = spec.re_points == 1 ? spec.re_min
                                              : std::pow(10.0, lmin + (lmax - lmin) * i / (spec.re_points - 1));
        for (int j = 0; j < spec.im_points; ++j) {
            const double im = spec.im_points == 1
                                  ? spec.im_min
                                  : spec.im_min + (spec.im_max - spec.im_min) * j / (spec.im_points - 1);
            grid.emplace_back(re, im);
        }
    }
    return grid;
}

inline std::vector<Complex> default_s_grid() { return make_s_grid(SGridSpec{}); }

inline constexpr double kDefaultTolPR = 1e-9;

struct ScanReport {
    std::vector<TransferSample> samples;
    double min_herm_eig = 0.0;
    Complex argmin_s{0.0, 0.0};
    double tolerance = kDefaultTolPR;
    bool passed = true;
};

inline ScanReport positive_real_scan(const DiscreteNode& node, const std::vector<Complex>& s_grid,
                                     double tol_pr = kDefaultTolPR) {
    for (const auto& s : s_grid)
        if (!(s.real() > 0.0)) throw PreconditionError("positive-real scan points must satisfy Re s > 0");
    const TransferEvaluator eval(node);
    ScanReport r;
    r.tolerance = tol_pr;
    r.samples.resize(s_grid.size());
    parallel_for(s_grid.size(), [&](std::size_t k) { r.samples[k] = eval.sample(s_grid[k]); });
    r.min_herm_eig = std::numeric_limits<double>::infinity();
    for (const auto& smp : r.samples) {
        if (smp.herm_min_eig < r.min_herm_eig) {
            r.min_herm_eig = smp.herm_min_eig;
            r.argmin_s = smp.s;
        }
    }
    if (r.samples.empty()) r.min_herm_eig = 0.0;
    r.passed = r.min_herm_eig >= -tol_pr;
    return r;
}

inline ScanReport positive_real_scan(const DiscreteNode& node) { return positive_real_scan(node, default_s_grid()); }

// =============================================================================
// Vertical-line proxy
// =============================================================================

struct VerticalLineReport {
    double sigma = 0.0;
    std::vector<TransferSample> samples;
    double sup_norm = 0.0;
    double argmax_omega = 0.0;
};

/// sup over omega of ||G(sigma + i omega)||; refining the grid can only
/// increase the result.
inline VerticalLineReport wellposedness_proxy(const DiscreteNode& node, double sigma,
                                              const std::vector<double>& omega_grid) {
    if (!(sigma > 0.0)) throw PreconditionError("sigma must be positive");
    const TransferEvaluator eval(node);
    VerticalLineReport r;
    r.sigma = sigma;
    r.samples.resize(omega_grid.size());
    parallel_for(omega_grid.size(), [&](std::size_t k) { r.samples[k] = eval.sample(Complex(sigma, omega_grid[k])); });
    for (const auto& s : r.samples) {
        if (s.norm > r.sup_norm) {
            r.sup_norm = s.norm;
            r.argmax_omega = s.s.imag();
        }
    }
    return r;
}

/// Grid on [-omega_max, omega_max]: uniform with `linear_points` points on
/// the central [-linear_range, linear_range], plus `per_decade` logarithmic
/// points per decade beyond it on each side. Grids with the same base
/// parameters are nested, so suprema over them are monotone in omega_max.
inline std::vector<double> vertical_line_grid(double omega_max, double linear_range = 1e2, int linear_points = 2001,
                                              int per_decade = 200) {
    if (!(omega_max > 0.0)) throw PreconditionError("omega_max must be positive");
    const double core = std::min(omega_max, linear_range);
    std::vector<double> grid;
    for (int k = 0; k < linear_points; ++k)
        grid.push_back(-linear_range + 2.0 * linear_range * k / (linear_points - 1));
    grid.erase(std::remove_if(grid.begin(), grid.end(), [core](double w) { return std::abs(w) > core * (1 + 1e-15); }),
               grid.end());
    if (omega_max > linear_range) {
        const double decades = std::log10(omega_max / linear_range);
        const int steps = std::max(1, static_cast<int>(std::ceil(decades * per_decade)));
        const double step = 1.0 / per_decade;
        for (int k = 1; k <= steps; ++k) {
            const double w = std::min(omega_max, linear_range * std::pow(10.0, k * step));
            grid.push_back(w);
            grid.push_back(-w);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

struct GrowthPoint {
    double omega_max = 0.0;
    double sup_norm = 0.0;
};

/// Vertical-line suprema over a widening sequence of omega ranges.
inline std::vector<GrowthPoint> vertical_line_growth(const DiscreteNode& node, double sigma,
                                                     const std::vector<double>& omega_maxes) {
    std::vector<GrowthPoint> out;
    for (double w : omega_maxes) out.push_back({w, wellposedness_proxy(node, sigma, vertical_line_grid(w)).sup_norm});
    return out;
}

// =============================================================================
// CSV export
// =============================================================================

/// Fixed 17-significant-digit rendering so identical runs give identical bytes.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_scan_csv(std::ostream& os, const std::vector<TransferSample>& samples) {
    os << "re_s,im_s,herm_min_eig,norm_G\n";
    for (const auto& s : samples)
        os << format_number(s.s.real()) << ',' << format_number(s.s.imag()) << ',' << format_number(s.herm_min_eig)
           << ',' << format_number(s.norm) << '\n';
}

}  // namespace phnode
