#pragma once

// JSON model files.
//
// {
//   "schema_version": 1,
//   "kind": "ph_matrices" | "hyperbolic" | "diffusion" | "catalog",
//   "name": "...",
//   "parameters": { kind-specific },
//   "discretization": { "n_cells": 64 },
//   "simulation": { "t_final": 10, "dt": 1e-3, "x0": {...}, "input": {...}, "state_stride": 0 },
//   "scan": { "mode": "positive-real", ... }
// }
//
// Matrices are arrays of rows; each entry is a number or [re, im].
// Coefficients are a number (constant) or an object with "type".
// Unknown keys are rejected at every level.

#include "phnode/models.hpp"
#include "phnode/timeint.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

namespace phnode {

using Json = nlohmann::json;

class ModelFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;
inline constexpr Index kDefaultCells = 64;

enum class ModelKind { ph_matrices, hyperbolic, diffusion, catalog };

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::ph_matrices: return "ph_matrices";
        case ModelKind::hyperbolic: return "hyperbolic";
        case ModelKind::diffusion: return "diffusion";
        case ModelKind::catalog: return "catalog";
    }
    return "";
}

/// Serializable hyperbolic model: constant P0 and either a diagonal of
/// coefficient functions or a constant matrix for the density.
struct HyperbolicSpec {
    Index m = 0;
    double a = 0.0, b = 1.0;
    std::vector<Coefficient> density_diagonal;
    Mat density_matrix;
    Mat P0, P1, WB, WB_hom, WC;

    HyperbolicModel to_model(const std::string& name) const {
        HyperbolicModel model;
        model.name = name;
        model.m = m;
        model.a = a;
        model.b = b;
        model.density = density_diagonal.empty() ? DensitySpec::constant(density_matrix)
                                                 : DensitySpec::diagonal(density_diagonal);
        if (P0.size() != 0) {
            const Mat p0 = P0;
            model.P0 = [p0](double) { return p0; };
        }
        model.P1 = P1;
        model.WB = WB;
        model.WB_hom = WB_hom;
        model.WC = WC;
        return model;
    }
};

struct DiffusionSpec {
    Coefficient a_coeff = Coefficient::constant(1.0);
    double a = 0.0, b = 1.0;
};

struct CatalogSpec {
    std::string model;
    CoefficientMap parameters;
};

struct StateSpec {
    enum class Kind { zero, values, profile };
    Kind kind = Kind::zero;
    /// Explicit state (values) or per-component amplitudes (profile).
    Vec values;
};

struct SimulationSpec {
    double t_final = 1.0;
    double dt = 1e-3;
    StateSpec x0;
    InputSignal input;
    std::size_t state_stride = 0;
};

struct ScanSpec {
    std::string mode = "positive-real";
    SGridSpec grid;
    double sigma = 1.0;
    std::vector<double> omega_max{1e2, 1e3, 1e4};
    std::vector<double> times{0.1, 1.0, 10.0};
    std::vector<Complex> lambdas = default_resolvent_points();
};

struct ModelFile {
    int schema_version = kSchemaVersion;
    ModelKind kind = ModelKind::ph_matrices;
    std::string name;
    PHStructure ph;
    HyperbolicSpec hyperbolic;
    DiffusionSpec diffusion;
    CatalogSpec catalog;
    std::optional<Index> n_cells;
    std::optional<SimulationSpec> simulation;
    std::optional<ScanSpec> scan;
};

// =============================================================================
// Parsing helpers
// =============================================================================

namespace detail {

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ModelFileError(where + " must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ModelFileError("unknown field '" + key + "' in " + where);
}

inline const Json& require(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ModelFileError("missing field '" + key + "' in " + where);
    return j.at(key);
}

inline double as_double(const Json& j, const std::string& what) {
    if (!j.is_number()) throw ModelFileError(what + " must be a number");
    return j.get<double>();
}

inline Index as_index(const Json& j, const std::string& what) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ModelFileError(what + " must be a nonnegative integer");
    return static_cast<Index>(j.get<long long>());
}

inline Complex as_complex(const Json& j, const std::string& what) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ModelFileError(what + " entries must be numbers or [re, im] pairs");
}

inline Json complex_to_json(Complex v) {
    if (v.imag() == 0.0) return v.real();
    return Json::array({v.real(), v.imag()});
}

/// rows = -1 accepts any row count; cols = -1 infers from the first row.
inline Mat parse_matrix(const Json& j, Index rows, Index cols, const std::string& what) {
    if (!j.is_array()) throw ModelFileError(what + " must be an array of rows");
    const Index r = static_cast<Index>(j.size());
    if (rows >= 0 && r != rows)
        throw ModelFileError(what + " must have " + std::to_string(rows) + " rows, got " + std::to_string(r));
    Index c = cols;
    if (c < 0) c = r > 0 && j[0].is_array() ? static_cast<Index>(j[0].size()) : 0;
    Mat out(r, c);
    for (Index i = 0; i < r; ++i) {
        const Json& row = j[std::size_t(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != c)
            throw ModelFileError(what + " row " + std::to_string(i) + " must have " + std::to_string(c) + " entries");
        for (Index k = 0; k < c; ++k) out(i, k) = as_complex(row[std::size_t(k)], what);
    }
    return out;
}

inline Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
        rows.push_back(row);
    }
    return rows;
}

inline Vec parse_vector(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ModelFileError(what + " must be an array");
    Vec v(static_cast<Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v(Index(k)) = as_complex(j[k], what);
    return v;
}

inline Json vector_to_json(const Vec& v) {
    Json out = Json::array();
    for (Index k = 0; k < v.size(); ++k) out.push_back(complex_to_json(v(k)));
    return out;
}

inline std::vector<double> parse_doubles(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ModelFileError(what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(as_double(v, what));
    return out;
}

inline std::pair<double, double> parse_range(const Json& j, const std::string& what) {
    const auto v = parse_doubles(j, what);
    if (v.size() != 2) throw ModelFileError(what + " must have two entries");
    return {v[0], v[1]};
}

inline Coefficient parse_coefficient(const Json& j, const std::string& what) {
    if (j.is_number()) return Coefficient::constant(j.get<double>());
    if (!j.is_object()) throw ModelFileError(what + " must be a number or an object");
    const std::string type = require(j, "type", what).is_string() ? j.at("type").get<std::string>() : "";
    try {
        if (type == "constant") {
            check_keys(j, {"type", "value"}, what);
            return Coefficient::constant(as_double(require(j, "value", what), what + ".value"));
        }
        if (type == "piecewise_constant") {
            check_keys(j, {"type", "breakpoints", "values"}, what);
            return Coefficient::piecewise_constant(parse_doubles(require(j, "breakpoints", what), what),
                                                   parse_doubles(require(j, "values", what), what));
        }
        if (type == "power_law") {
            check_keys(j, {"type", "coeff", "exponent"}, what);
            return Coefficient::power_law(as_double(require(j, "coeff", what), what + ".coeff"),
                                          as_double(require(j, "exponent", what), what + ".exponent"));
        }
    } catch (const ModelFileError&) {
        throw;
    } catch (const std::exception& e) {
        throw ModelFileError(what + ": " + e.what());
    }
    throw ModelFileError(what + ": unknown coefficient type '" + type + "'");
}

inline Json coefficient_to_json(const Coefficient& c) {
    switch (c.kind()) {
        case Coefficient::Kind::constant:
            return c.values()[0];
        case Coefficient::Kind::piecewise_constant:
            return {{"type", "piecewise_constant"}, {"breakpoints", c.breakpoints()}, {"values", c.values()}};
        case Coefficient::Kind::power_law:
            return {{"type", "power_law"}, {"coeff", c.values()[0]}, {"exponent", c.values()[1]}};
        case Coefficient::Kind::custom:
            break;
    }
    throw ModelFileError("custom coefficient functions cannot be written to a model file");
}

inline bool same_matrix(const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

inline bool same_vector(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.size() == 0 || a == b); }

// --- kind-specific parameter blocks ------------------------------------------

inline PHStructure parse_ph(const Json& j) {
    check_keys(j, {"n", "m", "J", "R", "B", "P", "S", "N", "H"}, "parameters");
    const Index n = as_index(require(j, "n", "parameters"), "n");
    const Index m = as_index(require(j, "m", "parameters"), "m");
    auto get = [&](const char* key, Index r, Index c) {
        return j.contains(key) ? parse_matrix(j.at(key), r, c, key) : Mat(Mat::Zero(r, c));
    };
    PHStructure s;
    s.J = get("J", n, n);
    s.R = get("R", n, n);
    s.B = get("B", n, m);
    s.P = get("P", n, m);
    s.S = get("S", m, m);
    s.N = get("N", m, m);
    s.H = parse_matrix(require(j, "H", "parameters"), n, n, "H");
    return s;
}

inline Json ph_to_json(const PHStructure& s) {
    return {{"n", s.state_dim()},         {"m", s.input_dim()},        {"J", matrix_to_json(s.J)},
            {"R", matrix_to_json(s.R)},   {"B", matrix_to_json(s.B)},  {"P", matrix_to_json(s.P)},
            {"S", matrix_to_json(s.S)},   {"N", matrix_to_json(s.N)},  {"H", matrix_to_json(s.H)}};
}

inline HyperbolicSpec parse_hyperbolic(const Json& j) {
    check_keys(j, {"m", "interval", "density", "P0", "P1", "WB", "WB_hom", "WC"}, "parameters");
    HyperbolicSpec h;
    h.m = as_index(require(j, "m", "parameters"), "m");
    if (h.m < 1) throw ModelFileError("m must be at least 1");
    if (j.contains("interval")) std::tie(h.a, h.b) = parse_range(j.at("interval"), "interval");
    const Json& d = require(j, "density", "parameters");
    check_keys(d, {"diagonal", "matrix"}, "density");
    if (d.contains("diagonal") == d.contains("matrix"))
        throw ModelFileError("density needs exactly one of 'diagonal' or 'matrix'");
    if (d.contains("diagonal")) {
        if (!d.at("diagonal").is_array() || static_cast<Index>(d.at("diagonal").size()) != h.m)
            throw ModelFileError("density.diagonal must have m entries");
        for (std::size_t k = 0; k < d.at("diagonal").size(); ++k)
            h.density_diagonal.push_back(parse_coefficient(d.at("diagonal")[k], "density.diagonal"));
    } else {
        h.density_matrix = parse_matrix(d.at("matrix"), h.m, h.m, "density.matrix");
    }
    if (j.contains("P0")) h.P0 = parse_matrix(j.at("P0"), h.m, h.m, "P0");
    h.P1 = parse_matrix(require(j, "P1", "parameters"), h.m, h.m, "P1");
    h.WB = parse_matrix(require(j, "WB", "parameters"), -1, 2 * h.m, "WB");
    h.WB_hom = j.contains("WB_hom") ? parse_matrix(j.at("WB_hom"), -1, 2 * h.m, "WB_hom") : Mat(0, 2 * h.m);
    h.WC = j.contains("WC") ? parse_matrix(j.at("WC"), -1, 2 * h.m, "WC") : Mat(0, 2 * h.m);
    return h;
}

inline Json hyperbolic_to_json(const HyperbolicSpec& h) {
    Json j = {{"m", h.m}, {"interval", {h.a, h.b}}};
    if (!h.density_diagonal.empty()) {
        Json diag = Json::array();
        for (const auto& c : h.density_diagonal) diag.push_back(coefficient_to_json(c));
        j["density"] = {{"diagonal", diag}};
    } else {
        j["density"] = {{"matrix", matrix_to_json(h.density_matrix)}};
    }
    if (h.P0.size() != 0) j["P0"] = matrix_to_json(h.P0);
    j["P1"] = matrix_to_json(h.P1);
    j["WB"] = matrix_to_json(h.WB);
    if (h.WB_hom.rows() > 0) j["WB_hom"] = matrix_to_json(h.WB_hom);
    if (h.WC.rows() > 0) j["WC"] = matrix_to_json(h.WC);
    return j;
}

inline StateSpec parse_state(const Json& j) {
    check_keys(j, {"type", "values", "amplitude"}, "x0");
    const std::string type = require(j, "type", "x0").get<std::string>();
    StateSpec s;
    if (type == "zero") {
        s.kind = StateSpec::Kind::zero;
    } else if (type == "values") {
        s.kind = StateSpec::Kind::values;
        s.values = parse_vector(require(j, "values", "x0"), "x0.values");
    } else if (type == "profile") {
        s.kind = StateSpec::Kind::profile;
        s.values = parse_vector(require(j, "amplitude", "x0"), "x0.amplitude");
    } else {
        throw ModelFileError("unknown x0 type '" + type + "'");
    }
    return s;
}

inline Json state_to_json(const StateSpec& s) {
    switch (s.kind) {
        case StateSpec::Kind::zero: return {{"type", "zero"}};
        case StateSpec::Kind::values: return {{"type", "values"}, {"values", vector_to_json(s.values)}};
        case StateSpec::Kind::profile: return {{"type", "profile"}, {"amplitude", vector_to_json(s.values)}};
    }
    return {};
}

inline InputSignal parse_input(const Json& j) {
    check_keys(j, {"type", "values", "amplitude", "frequency", "phase", "times"}, "input");
    const std::string type = require(j, "type", "input").get<std::string>();
    if (type == "zero") return InputSignal::zero();
    if (type == "constant") return InputSignal::constant(parse_vector(require(j, "values", "input"), "input.values"));
    if (type == "sinusoid")
        return InputSignal::sinusoid(parse_vector(require(j, "amplitude", "input"), "input.amplitude"),
                                     as_double(require(j, "frequency", "input"), "input.frequency"),
                                     j.contains("phase") ? as_double(j.at("phase"), "input.phase") : 0.0);
    if (type == "table") {
        const auto times = parse_doubles(require(j, "times", "input"), "input.times");
        const Json& vals = require(j, "values", "input");
        if (!vals.is_array()) throw ModelFileError("input.values must be an array of vectors");
        std::vector<Vec> samples;
        for (const auto& v : vals) samples.push_back(parse_vector(v, "input.values"));
        try {
            return InputSignal::table(times, samples);
        } catch (const StructuralError& e) {
            throw ModelFileError(e.what());
        }
    }
    throw ModelFileError("unknown input type '" + type + "'");
}

inline Json input_to_json(const InputSignal& s) {
    switch (s.kind) {
        case InputSignal::Kind::zero: return {{"type", "zero"}};
        case InputSignal::Kind::constant: return {{"type", "constant"}, {"values", vector_to_json(s.values)}};
        case InputSignal::Kind::sinusoid:
            return {{"type", "sinusoid"},
                    {"amplitude", vector_to_json(s.values)},
                    {"frequency", s.frequency},
                    {"phase", s.phase}};
        case InputSignal::Kind::table: {
            Json vals = Json::array();
            for (const auto& v : s.samples) vals.push_back(vector_to_json(v));
            return {{"type", "table"}, {"times", s.times}, {"values", vals}};
        }
    }
    return {};
}

inline bool same_input(const InputSignal& a, const InputSignal& b) {
    if (a.kind != b.kind || a.frequency != b.frequency || a.phase != b.phase || a.times != b.times) return false;
    if (!same_vector(a.values, b.values) || a.samples.size() != b.samples.size()) return false;
    for (std::size_t k = 0; k < a.samples.size(); ++k)
        if (!same_vector(a.samples[k], b.samples[k])) return false;
    return true;
}

inline const std::set<std::string>& scan_modes() {
    static const std::set<std::string> modes{"positive-real", "vertical-line", "contraction", "maxdiss"};
    return modes;
}

inline ScanSpec parse_scan(const Json& j) {
    check_keys(j, {"mode", "re_range", "re_points", "im_range", "im_points", "sigma", "omega_max", "times", "lambdas"},
               "scan");
    ScanSpec s;
    if (j.contains("mode")) {
        s.mode = j.at("mode").get<std::string>();
        if (!scan_modes().count(s.mode)) throw ModelFileError("unknown scan mode '" + s.mode + "'");
    }
    if (j.contains("re_range")) std::tie(s.grid.re_min, s.grid.re_max) = parse_range(j.at("re_range"), "re_range");
    if (j.contains("im_range")) std::tie(s.grid.im_min, s.grid.im_max) = parse_range(j.at("im_range"), "im_range");
    if (j.contains("re_points")) s.grid.re_points = int(as_index(j.at("re_points"), "re_points"));
    if (j.contains("im_points")) s.grid.im_points = int(as_index(j.at("im_points"), "im_points"));
    if (j.contains("sigma")) s.sigma = as_double(j.at("sigma"), "sigma");
    if (j.contains("omega_max")) s.omega_max = parse_doubles(j.at("omega_max"), "omega_max");
    if (j.contains("times")) s.times = parse_doubles(j.at("times"), "times");
    if (j.contains("lambdas")) {
        const Vec l = parse_vector(j.at("lambdas"), "lambdas");
        s.lambdas.assign(l.data(), l.data() + l.size());
    }
    return s;
}

inline Json scan_to_json(const ScanSpec& s) {
    Json lambdas = Json::array();
    for (const auto& l : s.lambdas) lambdas.push_back(complex_to_json(l));
    return {{"mode", s.mode},
            {"re_range", {s.grid.re_min, s.grid.re_max}},
            {"re_points", s.grid.re_points},
            {"im_range", {s.grid.im_min, s.grid.im_max}},
            {"im_points", s.grid.im_points},
            {"sigma", s.sigma},
            {"omega_max", s.omega_max},
            {"times", s.times},
            {"lambdas", lambdas}};
}

}  // namespace detail

// =============================================================================
// Model file I/O
// =============================================================================

inline ModelFile parse_model_file(const Json& j) {
    using namespace detail;
    check_keys(j, {"schema_version", "kind", "name", "parameters", "discretization", "simulation", "scan"},
               "model file");
    ModelFile f;
    f.schema_version = int(as_index(require(j, "schema_version", "model file"), "schema_version"));
    if (f.schema_version != kSchemaVersion)
        throw ModelFileError("unsupported schema_version " + std::to_string(f.schema_version));
    const Json& kind = require(j, "kind", "model file");
    if (!kind.is_string()) throw ModelFileError("kind must be a string");
    const std::string k = kind.get<std::string>();
    if (j.contains("name")) {
        if (!j.at("name").is_string()) throw ModelFileError("name must be a string");
        f.name = j.at("name").get<std::string>();
    }
    const Json& params = j.contains("parameters") ? j.at("parameters") : Json::object();
    if (k == "ph_matrices") {
        f.kind = ModelKind::ph_matrices;
        f.ph = parse_ph(params);
    } else if (k == "hyperbolic") {
        f.kind = ModelKind::hyperbolic;
        f.hyperbolic = parse_hyperbolic(params);
    } else if (k == "diffusion") {
        f.kind = ModelKind::diffusion;
        check_keys(params, {"interval", "a"}, "parameters");
        if (params.contains("interval")) std::tie(f.diffusion.a, f.diffusion.b) = parse_range(params.at("interval"), "interval");
        if (params.contains("a")) f.diffusion.a_coeff = parse_coefficient(params.at("a"), "a");
    } else if (k == "catalog") {
        f.kind = ModelKind::catalog;
        if (f.name.empty()) throw ModelFileError("catalog models need a 'name'");
        f.catalog.model = f.name;
        ModelCatalogEntry entry;
        try {
            entry = catalog_entry(f.name);
        } catch (const StructuralError& e) {
            throw ModelFileError(e.what());
        }
        std::set<std::string> allowed;
        for (const auto& [p, _] : entry.defaults) allowed.insert(p);
        check_keys(params, allowed, "parameters");
        for (const auto& [key, value] : params.items()) f.catalog.parameters.insert_or_assign(key, parse_coefficient(value, key));
    } else {
        throw ModelFileError("unknown model kind '" + k + "'");
    }
    if (f.name.empty()) f.name = k;

    if (j.contains("discretization")) {
        const Json& d = j.at("discretization");
        check_keys(d, {"n_cells"}, "discretization");
        if (d.contains("n_cells")) f.n_cells = as_index(d.at("n_cells"), "n_cells");
    }
    if (j.contains("simulation")) {
        const Json& s = j.at("simulation");
        check_keys(s, {"t_final", "dt", "x0", "input", "state_stride"}, "simulation");
        SimulationSpec sim;
        sim.t_final = as_double(require(s, "t_final", "simulation"), "t_final");
        sim.dt = as_double(require(s, "dt", "simulation"), "dt");
        if (s.contains("x0")) sim.x0 = parse_state(s.at("x0"));
        if (s.contains("input")) sim.input = parse_input(s.at("input"));
        if (s.contains("state_stride")) sim.state_stride = std::size_t(as_index(s.at("state_stride"), "state_stride"));
        f.simulation = sim;
    }
    if (j.contains("scan")) f.scan = parse_scan(j.at("scan"));
    return f;
}

inline ModelFile parse_model_file(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ModelFileError(std::string("malformed JSON: ") + e.what());
    }
    try {
        return parse_model_file(j);
    } catch (const Json::exception& e) {
        throw ModelFileError(std::string("schema error: ") + e.what());
    }
}

inline ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelFileError("cannot read model file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_model_file(os.str());
}

inline Json to_json(const ModelFile& f) {
    using namespace detail;
    Json j = {{"schema_version", f.schema_version}, {"kind", to_string(f.kind)}, {"name", f.name}};
    switch (f.kind) {
        case ModelKind::ph_matrices: j["parameters"] = ph_to_json(f.ph); break;
        case ModelKind::hyperbolic: j["parameters"] = hyperbolic_to_json(f.hyperbolic); break;
        case ModelKind::diffusion:
            j["parameters"] = {{"interval", {f.diffusion.a, f.diffusion.b}}, {"a", coefficient_to_json(f.diffusion.a_coeff)}};
            break;
        case ModelKind::catalog: {
            Json p = Json::object();
            for (const auto& [key, c] : f.catalog.parameters) p[key] = coefficient_to_json(c);
            j["parameters"] = p;
            break;
        }
    }
    if (f.n_cells) j["discretization"] = {{"n_cells", *f.n_cells}};
    if (f.simulation) {
        const auto& s = *f.simulation;
        j["simulation"] = {{"t_final", s.t_final},
                           {"dt", s.dt},
                           {"x0", state_to_json(s.x0)},
                           {"input", input_to_json(s.input)},
                           {"state_stride", s.state_stride}};
    }
    if (f.scan) j["scan"] = scan_to_json(*f.scan);
    return j;
}

inline void save_model_file(const ModelFile& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelFileError("cannot write model file '" + path + "'");
    out << to_json(f).dump(2) << '\n';
}

/// Field-by-field equality of everything a model file can express.
inline bool operator==(const ModelFile& x, const ModelFile& y) {
    using detail::same_matrix;
    if (x.schema_version != y.schema_version || x.kind != y.kind || x.name != y.name || x.n_cells != y.n_cells)
        return false;
    switch (x.kind) {
        case ModelKind::ph_matrices:
            if (!same_matrix(x.ph.J, y.ph.J) || !same_matrix(x.ph.R, y.ph.R) || !same_matrix(x.ph.B, y.ph.B) ||
                !same_matrix(x.ph.P, y.ph.P) || !same_matrix(x.ph.S, y.ph.S) || !same_matrix(x.ph.N, y.ph.N) ||
                !same_matrix(x.ph.H, y.ph.H))
                return false;
            break;
        case ModelKind::hyperbolic: {
            const auto &a = x.hyperbolic, &b = y.hyperbolic;
            if (a.m != b.m || a.a != b.a || a.b != b.b || a.density_diagonal != b.density_diagonal ||
                !same_matrix(a.density_matrix, b.density_matrix) || !same_matrix(a.P0, b.P0) ||
                !same_matrix(a.P1, b.P1) || !same_matrix(a.WB, b.WB) || !same_matrix(a.WB_hom, b.WB_hom) ||
                !same_matrix(a.WC, b.WC))
                return false;
            break;
        }
        case ModelKind::diffusion:
            if (!(x.diffusion.a_coeff == y.diffusion.a_coeff) || x.diffusion.a != y.diffusion.a ||
                x.diffusion.b != y.diffusion.b)
                return false;
            break;
        case ModelKind::catalog:
            if (x.catalog.model != y.catalog.model || x.catalog.parameters != y.catalog.parameters) return false;
            break;
    }
    if (x.simulation.has_value() != y.simulation.has_value() || x.scan.has_value() != y.scan.has_value()) return false;
    if (x.simulation) {
        const auto &a = *x.simulation, &b = *y.simulation;
        if (a.t_final != b.t_final || a.dt != b.dt || a.state_stride != b.state_stride || a.x0.kind != b.x0.kind ||
            !detail::same_vector(a.x0.values, b.x0.values) || !detail::same_input(a.input, b.input))
            return false;
    }
    if (x.scan) {
        const auto &a = *x.scan, &b = *y.scan;
        if (a.mode != b.mode || a.grid.re_min != b.grid.re_min || a.grid.re_max != b.grid.re_max ||
            a.grid.re_points != b.grid.re_points || a.grid.im_min != b.grid.im_min || a.grid.im_max != b.grid.im_max ||
            a.grid.im_points != b.grid.im_points || a.sigma != b.sigma || a.omega_max != b.omega_max ||
            a.times != b.times || a.lambdas != b.lambdas)
            return false;
    }
    return true;
}

// =============================================================================
// From file to node
// =============================================================================

inline ModelSpec model_spec(const ModelFile& f) {
    switch (f.kind) {
        case ModelKind::hyperbolic: return f.hyperbolic.to_model(f.name);
        case ModelKind::diffusion: {
            DiffusionModel d = diffusion_rod(f.diffusion.a_coeff, f.diffusion.a, f.diffusion.b);
            d.name = f.name;
            return d;
        }
        case ModelKind::catalog: return build_catalog_model(f.catalog.model, f.catalog.parameters);
        case ModelKind::ph_matrices: break;
    }
    throw StructuralError("finite-dimensional models have no spatial specification");
}

/// Assembled node; n_cells falls back to the file's value, then 64.
inline DiscreteNode build_node(const ModelFile& f, std::optional<Index> n_cells = std::nullopt) {
    if (f.kind == ModelKind::ph_matrices) {
        DiscreteNode node = node_from_ph_structure(f.ph);
        node.provenance = "ph_matrices:" + f.name;
        return node;
    }
    return assemble_model(model_spec(f), n_cells.value_or(f.n_cells.value_or(kDefaultCells)));
}

/// Initial state: zero, explicit values, or a smooth bump
/// amplitude_j sin^2(pi (xi - a) / (b - a)) in every component j.
inline Vec make_initial_state(const StateSpec& spec, const DiscreteNode& node, double a = 0.0, double b = 1.0) {
    switch (spec.kind) {
        case StateSpec::Kind::zero: return Vec::Zero(node.state_dim());
        case StateSpec::Kind::values:
            require_length(spec.values, node.state_dim(), "x0");
            return spec.values;
        case StateSpec::Kind::profile: {
            const Index m = node.metric.block_size();
            require_length(spec.values, m, "x0 amplitude");
            Vec x(node.state_dim());
            const double pi = std::acos(-1.0);
            for (Index i = 0; i < node.metric.num_nodes(); ++i) {
                const double s = std::sin(pi * (node.metric.grid[std::size_t(i)] - a) / (b - a));
                x.segment(i * m, m) = spec.values * (s * s);
            }
            return x;
        }
    }
    return Vec::Zero(node.state_dim());
}

/// Interval of a spatial model; [0, 1] for finite-dimensional ones.
inline std::pair<double, double> model_interval(const ModelFile& f) {
    if (f.kind == ModelKind::ph_matrices) return {0.0, 1.0};
    const ModelSpec spec = model_spec(f);
    if (const auto* h = std::get_if<HyperbolicModel>(&spec)) return {h->a, h->b};
    const auto& d = std::get<DiffusionModel>(spec);
    return {d.a, d.b};
}

/// Model file holding an assembled node as dense matrices.
inline ModelFile node_model_file(const DiscreteNode& node, const std::string& name) {
    ModelFile f;
    f.kind = ModelKind::ph_matrices;
    f.name = name;
    f.ph = node_to_ph_structure(node);
    return f;
}

}  // namespace phnode
