#pragma once

// Bundled boundary-controlled models and a name-indexed catalog.

#include "phnode/discretize_1d.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace phnode {

namespace detail {

inline Mat scaled_rows(std::initializer_list<std::initializer_list<double>> rows, double scale) {
    const Index r = Index(rows.size()), c = Index(rows.begin()->size());
    Mat out(r, c);
    Index i = 0;
    for (const auto& row : rows) {
        Index j = 0;
        for (double v : row) out(i, j++) = scale * v;
        ++i;
    }
    return out;
}

/// Positivity and integrability of c and 1/c on [a, b].
inline void require_positive_integrable(const Coefficient& c, double a, double b, const std::string& name) {
    if (!(c.sampled_min(a, b) > 0.0)) throw DensityError(name + " must be positive");
    const double i1 = c.integral(a, b), i2 = c.reciprocal_integral(a, b);
    if (!std::isfinite(i1) || !std::isfinite(i2))
        throw IntegrabilityError(name + " and its reciprocal must be integrable");
}

/// [[0, 1], [1, 0]].
inline Mat exchange2() {
    Mat p = Mat::Zero(2, 2);
    p(0, 1) = p(1, 0) = 1.0;
    return p;
}

}  // namespace detail

/// Wave equation rho w_tt = (T w_xi)_xi - d w_t on [a, b] in the variables
/// (strain, momentum). Co-energy z = (force T w_xi, velocity w_t).
/// Force control at b, velocity output at b, fixed end at a.
inline HyperbolicModel vibrating_string(const Coefficient& T, const Coefficient& rho, const Coefficient& d,
                                        double a = 0.0, double b = 1.0) {
    detail::require_positive_integrable(T, a, b, "T");
    detail::require_positive_integrable(rho, a, b, "rho");
    if (d.sampled_min(a, b) < 0.0) throw DensityError("damping d must be nonnegative");
    if (!std::isfinite(d.integral(a, b))) throw IntegrabilityError("damping d must be bounded");
    const double r2 = 1.0 / std::sqrt(2.0);
    HyperbolicModel model;
    model.name = "vibrating_string";
    model.m = 2;
    model.a = a;
    model.b = b;
    model.density = DensitySpec::diagonal({T, rho.reciprocal()});
    model.P0 = [d](double xi) {
        Mat p = Mat::Zero(2, 2);
        p(1, 1) = -d(xi);
        return p;
    };
    model.P1 = detail::exchange2();
    model.WB = detail::scaled_rows({{0, 1, 1, 0}}, r2);
    model.WB_hom = detail::scaled_rows({{-1, 0, 0, 1}}, r2);
    model.WC = detail::scaled_rows({{1, 0, 0, 1}}, r2);
    return model;
}

/// Telegraph equations in (charge density, flux density) with
/// H = diag(1/C, 1/L), so z = (voltage, current). Voltage control at b,
/// current output at b, open circuit (zero current) at a.
inline HyperbolicModel transmission_line(const Coefficient& L, const Coefficient& C, double a = 0.0,
                                         double b = 1.0) {
    detail::require_positive_integrable(L, a, b, "L");
    detail::require_positive_integrable(C, a, b, "C");
    const double r2 = 1.0 / std::sqrt(2.0);
    HyperbolicModel model;
    model.name = "transmission_line";
    model.m = 2;
    model.a = a;
    model.b = b;
    model.density = DensitySpec::diagonal({C.reciprocal(), L.reciprocal()});
    model.P1 = detail::exchange2();
    model.WB = detail::scaled_rows({{0, 1, 1, 0}}, r2);
    model.WB_hom = detail::scaled_rows({{-1, 0, 0, 1}}, r2);
    // Output rows paired with the control are left to the completion.
    return model;
}

/// Timoshenko beam with state (shear strain w_xi - phi, momentum rho w_t,
/// curvature phi_xi, angular momentum I_rho phi_t), H = diag(K, 1/rho, EI,
/// 1/I_rho). Co-energy: (shear force, velocity, bending moment, angular
/// velocity). P1 pairs shear force with velocity and moment with angular
/// velocity; P0 couples shear strain and angular momentum skew-symmetrically.
/// Clamped at a, shear force and moment controlled at b, velocity and
/// angular velocity observed at b.
inline HyperbolicModel timoshenko_beam(const Coefficient& rho, const Coefficient& I_rho, const Coefficient& EI,
                                       const Coefficient& K, double a = 0.0, double b = 1.0) {
    detail::require_positive_integrable(rho, a, b, "rho");
    detail::require_positive_integrable(I_rho, a, b, "I_rho");
    detail::require_positive_integrable(EI, a, b, "EI");
    detail::require_positive_integrable(K, a, b, "K");
    const double r2 = 1.0 / std::sqrt(2.0);
    HyperbolicModel model;
    model.name = "timoshenko_beam";
    model.m = 4;
    model.a = a;
    model.b = b;
    model.density = DensitySpec::diagonal({K, rho.reciprocal(), EI, I_rho.reciprocal()});
    Mat p0 = Mat::Zero(4, 4);
    p0(0, 3) = -1.0;
    p0(3, 0) = 1.0;
    model.P0 = [p0](double) { return p0; };
    model.P1 = block_diagonal({detail::exchange2(), detail::exchange2()});
    model.WB = detail::scaled_rows({{0, 1, 0, 0, 1, 0, 0, 0}, {0, 0, 0, 1, 0, 0, 1, 0}}, r2);
    model.WB_hom = detail::scaled_rows({{-1, 0, 0, 0, 0, 1, 0, 0}, {0, 0, -1, 0, 0, 0, 0, 1}}, r2);
    return model;
}

/// Heat equation with Dirichlet control at both ends. In one space dimension
/// a divergence-free drift with zero normal trace vanishes, so only the
/// diffusion term remains.
inline DiffusionModel diffusion_rod(const Coefficient& a_coeff, double a = 0.0, double b = 1.0) {
    if (!(a_coeff.sampled_min(a, b) > 0.0)) throw DensityError("diffusion coefficient must be positive");
    if (a_coeff.singular()) throw DensityError("diffusion coefficient must be bounded with bounded inverse");
    DiffusionModel model;
    model.name = "diffusion_rod";
    model.a_coeff = a_coeff;
    model.a = a;
    model.b = b;
    return model;
}

// =============================================================================
// Catalog
// =============================================================================

using ModelSpec = std::variant<HyperbolicModel, DiffusionModel>;
using CoefficientMap = std::map<std::string, Coefficient>;

struct ModelCatalogEntry {
    std::string name;
    std::string description;
    /// Parameter name -> unit description.
    std::vector<std::pair<std::string, std::string>> parameter_units;
    CoefficientMap defaults;
};

inline const std::vector<ModelCatalogEntry>& model_catalog() {
    static const std::vector<ModelCatalogEntry> entries = {
        {"vibrating_string",
         "lossless string, force control and velocity output at the right end, fixed left end",
         {{"T", "N"}, {"rho", "kg/m"}, {"d", "kg/(m s)"}},
         {{"T", Coefficient::constant(1.0)}, {"rho", Coefficient::constant(1.0)}, {"d", Coefficient::constant(0.0)}}},
        {"damped_string",
         "string with viscous damping d = 0.3",
         {{"T", "N"}, {"rho", "kg/m"}, {"d", "kg/(m s)"}},
         {{"T", Coefficient::constant(1.0)}, {"rho", Coefficient::constant(1.0)}, {"d", Coefficient::constant(0.3)}}},
        {"singular_string",
         "string with mass density rho = xi^(-1/2): H is singular at xi = 0, H and 1/H integrable",
         {{"T", "N"}, {"rho", "kg/m"}, {"d", "kg/(m s)"}},
         {{"T", Coefficient::constant(1.0)},
          {"rho", Coefficient::power_law(1.0, -0.5)},
          {"d", Coefficient::constant(0.0)}}},
        {"transmission_line",
         "lossless line, voltage control and current output at the right end, open left end",
         {{"L", "H/m"}, {"C", "F/m"}},
         {{"L", Coefficient::constant(1.0)}, {"C", Coefficient::constant(1.0)}}},
        {"timoshenko_beam",
         "beam clamped at the left end, force and moment control at the right end",
         {{"rho", "kg/m"}, {"I_rho", "kg m"}, {"EI", "N m^2"}, {"K", "N"}},
         {{"rho", Coefficient::constant(1.0)},
          {"I_rho", Coefficient::constant(1.0)},
          {"EI", Coefficient::constant(1.0)},
          {"K", Coefficient::constant(1.0)}}},
        {"diffusion_rod",
         "heat equation with Dirichlet control and flux observation at both ends",
         {{"a", "m^2/s"}},
         {{"a", Coefficient::constant(1.0)}}},
    };
    return entries;
}

inline const ModelCatalogEntry& catalog_entry(const std::string& name) {
    for (const auto& e : model_catalog())
        if (e.name == name) return e;
    throw StructuralError("unknown catalog model '" + name + "'");
}

inline std::vector<std::string> catalog_names() {
    std::vector<std::string> names;
    for (const auto& e : model_catalog()) names.push_back(e.name);
    return names;
}

/// Builds a catalog model; `overrides` replaces default parameters by name.
inline ModelSpec build_catalog_model(const std::string& name, const CoefficientMap& overrides = {}) {
    const auto& entry = catalog_entry(name);
    CoefficientMap p = entry.defaults;
    for (const auto& [key, value] : overrides) {
        if (!p.count(key)) throw StructuralError("model '" + name + "' has no parameter '" + key + "'");
        p.insert_or_assign(key, value);
    }
    if (name == "vibrating_string" || name == "damped_string" || name == "singular_string") {
        auto model = vibrating_string(p.at("T"), p.at("rho"), p.at("d"));
        model.name = name;
        return model;
    }
    if (name == "transmission_line") return transmission_line(p.at("L"), p.at("C"));
    if (name == "timoshenko_beam") return timoshenko_beam(p.at("rho"), p.at("I_rho"), p.at("EI"), p.at("K"));
    return diffusion_rod(p.at("a"));
}

inline DiscreteNode assemble_model(const ModelSpec& spec, Index n_cells) {
    if (const auto* h = std::get_if<HyperbolicModel>(&spec)) return assemble_hyperbolic_node(*h, n_cells);
    return assemble_diffusion_node(std::get<DiffusionModel>(spec), n_cells);
}

inline DiscreteNode assemble_catalog_node(const std::string& name, Index n_cells) {
    return assemble_model(build_catalog_model(name), n_cells);
}

}  // namespace phnode
