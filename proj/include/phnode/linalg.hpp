#pragma once

// Dense complex linear-algebra vocabulary shared by every phnode module.

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace phnode {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// =============================================================================
// Error types
// =============================================================================

/// Dimension mismatches, infeasible constraint systems, mismatched inputs.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A Hamiltonian density sample that is not Hermitian positive definite.
class DensityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A cell integral of a density (or of its inverse) that is not finite.
class IntegrabilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// sI - A (or a time-step matrix) is numerically singular.
class ResolventError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an operation precondition (e.g. Re s <= 0).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// =============================================================================
// Helpers
// =============================================================================

inline Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

/// Default structural tolerance for checks on `m`: 1e-10 * (1 + ||m||_F).
inline double default_tolerance(const Mat& m) { return 1e-10 * (1.0 + m.norm()); }

/// Eigenvalues (ascending) of the Hermitian part of `a`.
inline RVec hermitian_eigenvalues(const Mat& a) {
    if (a.size() == 0) return RVec();
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double max_hermitian_eigenvalue(const Mat& a) {
    const RVec ev = hermitian_eigenvalues(a);
    return ev.size() ? ev(ev.size() - 1) : 0.0;
}

inline double min_hermitian_eigenvalue(const Mat& a) {
    const RVec ev = hermitian_eigenvalues(a);
    return ev.size() ? ev(0) : 0.0;
}

/// Largest absolute entry; 0 for empty matrices.
inline double max_abs_entry(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

inline double spectral_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    if (a.rows() <= 16 && a.cols() <= 16) {
        Eigen::JacobiSVD<Mat> svd(a);
        return svd.singularValues()(0);
    }
    Eigen::BDCSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

/// 2-norm condition number via singular values; +inf when singular.
inline double condition_number(const Mat& a) {
    Eigen::BDCSVD<Mat> svd(a);
    const RVec& sv = svd.singularValues();
    if (sv.size() == 0) return 1.0;
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

inline Mat block_diagonal(const std::vector<Mat>& blocks) {
    Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Mat out = Mat::Zero(rows, cols);
    Index r = 0, c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

inline void require_shape(const Mat& m, Index rows, Index cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw StructuralError(name + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                              ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

inline void require_length(const Vec& v, Index n, const std::string& name) {
    if (v.size() != n) {
        throw StructuralError(name + " must have length " + std::to_string(n) + ", got " +
                              std::to_string(v.size()));
    }
}

/// Real matrix embedded as complex.
inline Mat to_complex(const RMat& m) { return m.cast<Complex>(); }

}  // namespace phnode
