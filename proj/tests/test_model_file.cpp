#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace phnode;
using namespace phtest;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> shipped_models() {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(PHNODE_MODELS_DIR))
        if (e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

const char* kMsd = R"({
  "schema_version": 1, "kind": "ph_matrices", "name": "msd",
  "parameters": { "n": 2, "m": 1, "J": [[0, 1], [-1, 0]], "R": [[0, 0], [0, 0.5]],
                  "B": [[0], [1]], "H": [[1, 0], [0, 1]] }
})";

}  // namespace

TEST(ModelFile, EveryShippedModelParsesAndRoundTrips) {
    const auto files = shipped_models();
    ASSERT_GE(files.size(), 8u);
    for (const auto& p : files) {
        SCOPED_TRACE(p.filename().string());
        const ModelFile f = load_model_file(p.string());
        EXPECT_FALSE(f.name.empty());
        const ModelFile g = parse_model_file(to_json(f));
        EXPECT_TRUE(f == g);
        EXPECT_EQ(to_json(g).dump(), to_json(f).dump());
    }
}

TEST(ModelFile, EveryShippedModelBuilds) {
    for (const auto& p : shipped_models()) {
        SCOPED_TRACE(p.filename().string());
        const ModelFile f = load_model_file(p.string());
        if (p.filename() == "negative_damping.json") {
            EXPECT_FALSE(validate_ph_structure(f.ph).passed());
            continue;
        }
        const DiscreteNode node = build_node(f, 16);
        EXPECT_GT(node.state_dim(), 0);
        if (f.simulation) {
            const auto [a, b] = model_interval(f);
            EXPECT_EQ(make_initial_state(f.simulation->x0, node, a, b).size(), node.state_dim());
        }
    }
}

TEST(ModelFile, MassSpringDamperContents) {
    const ModelFile f = parse_model_file(std::string(kMsd));
    EXPECT_EQ(f.kind, ModelKind::ph_matrices);
    EXPECT_EQ(f.name, "msd");
    EXPECT_EQ(f.ph.R(1, 1), Complex(0.5));
    EXPECT_EQ(f.ph.P, Mat::Zero(2, 1));
    EXPECT_EQ(f.ph.S, Mat::Zero(1, 1));
    EXPECT_FALSE(f.simulation.has_value());
    const DiscreteNode node = build_node(f);
    Mat A(2, 2);
    A << 0, 1, -1, -0.5;
    EXPECT_EQ(node.A, A);
}

TEST(ModelFile, Errors) {
    EXPECT_THROW(parse_model_file(std::string("{ \"kind\": ")), ModelFileError);
    EXPECT_THROW(parse_model_file(std::string(R"({"schema_version": 1, "kind": "fluid"})")), ModelFileError);
    EXPECT_THROW(parse_model_file(std::string(R"({"schema_version": 2, "kind": "diffusion"})")), ModelFileError);
    EXPECT_THROW(parse_model_file(std::string(R"({"schema_version": 1, "kind": "diffusion", "extra": 1})")),
                 ModelFileError);
    EXPECT_THROW(parse_model_file(std::string(R"({"schema_version": 1, "kind": "catalog", "name": "beam"})")),
                 ModelFileError);
    EXPECT_THROW(parse_model_file(std::string(
                     R"({"schema_version": 1, "kind": "catalog", "name": "vibrating_string", "parameters": {"mass": 1}})")),
                 ModelFileError);
    EXPECT_THROW(parse_model_file(std::string(
                     R"({"schema_version": 1, "kind": "ph_matrices", "parameters": {"n": 2, "J": [[0, 1]]}})")),
                 ModelFileError);
    EXPECT_THROW(parse_model_file(std::string(R"({"schema_version": 1, "kind": "diffusion",
                     "simulation": {"t_final": 1, "dt": 0.1, "x0": {"type": "random"}}})")),
                 ModelFileError);
    EXPECT_THROW(parse_model_file(std::string(R"({"schema_version": 1, "kind": "diffusion", "scan": {"mode": "x"}})")),
                 ModelFileError);
    EXPECT_THROW(load_model_file("/nonexistent/model.json"), ModelFileError);
    EXPECT_THROW(load_model_file(std::string(PHNODE_TEST_DATA_DIR) + "/malformed.json"), ModelFileError);
    EXPECT_THROW(load_model_file(std::string(PHNODE_TEST_DATA_DIR) + "/unknown_field.json"), ModelFileError);
}

TEST(ModelFile, CellCountPrecedence) {
    ModelFile f = parse_model_file(std::string(R"({"schema_version": 1, "kind": "diffusion"})"));
    EXPECT_EQ(build_node(f).metric.num_nodes(), kDefaultCells - 1);
    f.n_cells = 20;
    EXPECT_EQ(build_node(f).metric.num_nodes(), 19);
    EXPECT_EQ(build_node(f, 10).metric.num_nodes(), 9);
}

TEST(ModelFile, InitialStates) {
    const ModelFile f = parse_model_file(std::string(R"({"schema_version": 1, "kind": "catalog",
        "name": "vibrating_string", "discretization": {"n_cells": 8},
        "simulation": {"t_final": 1, "dt": 0.1, "x0": {"type": "profile", "amplitude": [2.0, 0.0]}}})"));
    const DiscreteNode node = build_node(f);
    const Vec x = make_initial_state(f.simulation->x0, node);
    ASSERT_EQ(x.size(), 18);
    for (Index i = 0; i < 9; ++i) {
        const double s = std::sin(M_PI * i / 8.0);
        EXPECT_NEAR(x(2 * i).real(), 2.0 * s * s, 1e-15);
        EXPECT_EQ(x(2 * i + 1), Complex(0.0));
    }
    StateSpec bad;
    bad.kind = StateSpec::Kind::values;
    bad.values = Vec::Ones(3);
    EXPECT_THROW(make_initial_state(bad, node), StructuralError);
}

TEST(ModelFile, AssembledNodeExportRoundTrip) {
    const auto node = assemble_catalog_node("damped_string", 8);
    const ModelFile f = node_model_file(node, "exported");
    const auto path = fs::temp_directory_path() / "phnode_export_roundtrip.json";
    save_model_file(f, path.string());
    const ModelFile g = load_model_file(path.string());
    fs::remove(path);
    EXPECT_TRUE(f == g);
    // The exported generator H^{-1}(J - R) reproduces the assembled one.
    const DiscreteNode back = build_node(g);
    EXPECT_LE((back.A - node.A).norm(), 1e-12 * node.A.norm());
    EXPECT_LE((back.B - node.B).norm(), 1e-12 * (1.0 + node.B.norm()));
    EXPECT_LE((back.C - node.C).norm(), 1e-12 * (1.0 + node.C.norm()));
}

TEST(ModelFile, CustomCoefficientCannotBeSaved) {
    ModelFile f = parse_model_file(std::string(R"({"schema_version": 1, "kind": "diffusion"})"));
    f.diffusion.a_coeff = Coefficient::custom([](double x) { return 1.0 + x; });
    EXPECT_THROW(to_json(f), ModelFileError);
}
