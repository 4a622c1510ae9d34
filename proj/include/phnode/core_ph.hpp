#pragma once

// Finite-dimensional port-Hamiltonian structures
//
//   x' = (J - R) H x + (B - P) u
//   y  = (B + P)^* H x + (S - N) u
//
// their compact dissipation matrix M acting on (Hx; u), and the power
// accounting  d/dt H(x) = Re (Hx;u)^* M (Hx;u) + Re <y, u>.

#include "phnode/linalg.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace phnode {

struct PHStructure {
    Mat J, R, B, P, S, N, H;

    Index state_dim() const { return J.rows(); }
    Index input_dim() const { return B.cols(); }

    /// W = [[R, P], [P^*, S]], built on demand from (R, P, S).
    Mat W() const {
        const Index n = state_dim(), m = input_dim();
        Mat w(n + m, n + m);
        w << R, P, P.adjoint(), S;
        return w;
    }

    static PHStructure zeros(Index n, Index m) {
        return {Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, m), Mat::Zero(n, m),
                Mat::Zero(m, m), Mat::Zero(m, m), Mat::Zero(n, n)};
    }

    /// Throws StructuralError unless all seven blocks conform to (n, m).
    void check_dimensions() const {
        const Index n = J.rows(), m = B.cols();
        require_shape(J, n, n, "J");
        require_shape(R, n, n, "R");
        require_shape(B, n, m, "B");
        require_shape(P, n, m, "P");
        require_shape(S, m, m, "S");
        require_shape(N, m, m, "N");
        require_shape(H, n, n, "H");
    }

    friend bool operator==(const PHStructure& a, const PHStructure& b) {
        auto eq = [](const Mat& x, const Mat& y) {
            return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
        };
        return eq(a.J, b.J) && eq(a.R, b.R) && eq(a.B, b.B) && eq(a.P, b.P) && eq(a.S, b.S) &&
               eq(a.N, b.N) && eq(a.H, b.H);
    }
};

struct Violation {
    std::string check;
    double measured = 0.0;
    double threshold = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool passed() const { return violations.empty(); }

    const Violation* find(const std::string& check) const {
        for (const auto& v : violations)
            if (v.check == check) return &v;
        return nullptr;
    }

    void merge(const ValidationReport& other) {
        violations.insert(violations.end(), other.violations.begin(), other.violations.end());
    }

    std::string summary() const {
        std::ostringstream os;
        for (const auto& v : violations)
            os << v.check << " (measured " << v.measured << ", threshold " << v.threshold << "); ";
        return os.str();
    }
};

/// Composite operator M = [[F, G], [K, L]] acting on (Hx; u).
struct DissipationMatrix {
    Index n = 0;
    Index m = 0;
    Mat M;

    Mat FG() const { return M.topRows(n); }
    Mat KL() const { return M.bottomRows(m); }
    /// Main operator block: F&G restricted to u = 0.
    Mat F() const { return M.topLeftCorner(n, n); }
    Mat G() const { return M.topRightCorner(n, m); }
    Mat K() const { return M.bottomLeftCorner(m, n); }
    Mat L() const { return M.bottomRightCorner(m, m); }

    /// Largest eigenvalue of (M + M^*)/2; dissipativity means this is <= 0.
    double max_symmetric_eigenvalue() const { return max_hermitian_eigenvalue(M); }
};

struct PowerTerms {
    double supplied = 0.0;
    double dissipated = 0.0;
    double hamiltonian_rate = 0.0;
};

namespace detail {

inline void check_skew(const Mat& a, const std::string& name, std::optional<double> tol,
                       ValidationReport& report) {
    const double t = tol.value_or(default_tolerance(a));
    const double dev = max_abs_entry(a + a.adjoint());
    if (dev > t) report.violations.push_back({name + " not skew-Hermitian", dev, t});
}

inline void check_hermitian_psd(const Mat& a, const std::string& name, std::optional<double> tol,
                                ValidationReport& report) {
    const double t = tol.value_or(default_tolerance(a));
    const double dev = max_abs_entry(a - a.adjoint());
    if (dev > t) report.violations.push_back({name + " not Hermitian", dev, t});
    const double lmin = min_hermitian_eigenvalue(a);
    if (lmin < -t) report.violations.push_back({name + " not PSD", lmin, -t});
}

}  // namespace detail

/// Checks skewness of J and N and Hermitian semi-definiteness of H and W.
/// Every violated invariant is listed with its worst offending entry or
/// eigenvalue. A nullopt tolerance means 1e-10 * (1 + ||matrix||_F) per check.
inline ValidationReport validate_ph_structure(const PHStructure& s,
                                              std::optional<double> tol_struct = std::nullopt) {
    s.check_dimensions();
    ValidationReport report;
    detail::check_skew(s.J, "J", tol_struct, report);
    detail::check_skew(s.N, "N", tol_struct, report);
    detail::check_hermitian_psd(s.H, "H", tol_struct, report);
    detail::check_hermitian_psd(s.W(), "W", tol_struct, report);
    return report;
}

/// M = [[J - R, B - P], [-B^* - P^*, N - S]]. Rejects invalid structures.
inline DissipationMatrix assemble_dissipation_matrix(const PHStructure& s,
                                                     std::optional<double> tol_struct = std::nullopt) {
    const auto report = validate_ph_structure(s, tol_struct);
    if (!report.passed())
        throw StructuralError("invalid port-Hamiltonian structure: " + report.summary());
    const Index n = s.state_dim(), m = s.input_dim();
    DissipationMatrix d;
    d.n = n;
    d.m = m;
    d.M.resize(n + m, n + m);
    d.M << s.J - s.R, s.B - s.P, -s.B.adjoint() - s.P.adjoint(), s.N - s.S;
    return d;
}

/// Stored energy 1/2 x^* H x.
inline double hamiltonian(const Mat& H, const Vec& x) {
    require_shape(H, x.size(), x.size(), "H");
    return 0.5 * x.dot(H * x).real();
}

/// Power balance at one instant: z = (Hx; u), dissipated = Re z^* M z,
/// supplied = Re <y, u>, hamiltonian_rate = dissipated + supplied.
inline PowerTerms power_terms(const DissipationMatrix& M, const Mat& H, const Vec& x, const Vec& u,
                              const Vec& y) {
    require_length(x, M.n, "x");
    require_length(u, M.m, "u");
    require_length(y, M.m, "y");
    require_shape(H, M.n, M.n, "H");
    Vec z(M.n + M.m);
    z << H * x, u;
    PowerTerms p;
    p.dissipated = z.dot(M.M * z).real();
    p.supplied = u.dot(y).real();
    p.hamiltonian_rate = p.dissipated + p.supplied;
    return p;
}

}  // namespace phnode
