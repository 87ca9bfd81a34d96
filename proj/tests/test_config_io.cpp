#include "grsem/config.hpp"
#include "grsem/mesh_io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace grsem;

namespace {

ConfigTable parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config_text(in);
}

}  // namespace

TEST(Config, DefaultsValidate) {
    const RunConfig c = config_from_table({});
    EXPECT_EQ(c.domain, DomainKind::flower);
    EXPECT_EQ(c.hole_bc, BcKind::neumann);
    EXPECT_EQ(c.degree, std::vector<int>{2});
    EXPECT_DOUBLE_EQ(c.omega, 10.0);
    EXPECT_NO_THROW(validate(c));
    EXPECT_NE(describe_defaults().find("solver.degree"), std::string::npos);
}

TEST(Config, ParsesSectionsListsAndFractions) {
    const RunConfig c = config_from_table(parse(R"(
# study setup
[domain]
kind = ellipse
hole_bc = dirichlet
[mesh]
h = 1/16, 1/32 1/64   ; mixed separators
gr = none, hp
[solver]
degree = 2 3
nodes = eq
[post]
enabled = true
layers = 3
)"));
    EXPECT_EQ(c.domain, DomainKind::ellipse);
    EXPECT_EQ(c.hole_bc, BcKind::dirichlet);
    ASSERT_EQ(c.h.size(), 3u);
    EXPECT_DOUBLE_EQ(c.h[2], 1.0 / 64.0);
    EXPECT_EQ(c.gr, (std::vector<GrMode>{GrMode::none, GrMode::hp}));
    EXPECT_EQ(c.degree, (std::vector<int>{2, 3}));
    EXPECT_EQ(c.family, NodeFamily::equidistant);
    EXPECT_TRUE(c.post);
    EXPECT_EQ(c.layers, 3);
}

TEST(Config, GeometryDegreeFollowsRefinementMode) {
    RunConfig c;
    EXPECT_EQ(c.geometry_degree(3, GrMode::none), 3);
    EXPECT_EQ(c.geometry_degree(3, GrMode::h), 3);
    EXPECT_EQ(c.geometry_degree(3, GrMode::hp), 4);
    c.geom_degree = 5;
    EXPECT_EQ(c.geometry_degree(3, GrMode::h), 5);
}

TEST(Config, SyntaxAndSchemaErrors) {
    EXPECT_THROW(parse("[mesh\nh = 1"), ConfigError);
    EXPECT_THROW(parse("just a line"), ConfigError);
    EXPECT_THROW(parse("[mesh]\nh = 1\nh = 2"), ConfigError);
    EXPECT_THROW(config_from_table(parse("[mesh]\nbogus = 1")), ConfigError);
    EXPECT_THROW(config_from_table(parse("[solver]\ndegree = two")), ConfigError);
    EXPECT_THROW(config_from_table(parse("[mesh]\ngr = sideways")), ConfigError);
}

TEST(Config, CrossFieldValidation) {
    EXPECT_THROW(config_from_table(parse("[solver]\ndegree = 3\ngeom_degree = 2")), ConfigError);
    EXPECT_THROW(config_from_table(parse("[post]\nenabled = true\nlayers = 0")), ConfigError);
    EXPECT_THROW(config_from_table(parse("[domain]\nkind = square\n[post]\nenabled = true")), ConfigError);
    EXPECT_THROW(config_from_table(parse("[quality]\nangles = 185")), ConfigError);
    EXPECT_THROW(config_from_table(parse("[mesh]\nh = -0.1")), ConfigError);
}

TEST(Config, EnvironmentOverridesFile) {
    ConfigTable t = parse("[solver]\ndegree = 2\n");
    ::setenv("GRSEM_SOLVER_DEGREE", "4", 1);
    ::setenv("GRSEM_SOLVER_OMEGA", "2", 1);
    apply_env_overrides(t);
    ::unsetenv("GRSEM_SOLVER_DEGREE");
    ::unsetenv("GRSEM_SOLVER_OMEGA");
    const RunConfig c = config_from_table(t);
    EXPECT_EQ(c.degree, std::vector<int>{4});
    EXPECT_DOUBLE_EQ(c.omega, 2.0);
}

TEST(Config, MissingFileIsAnIoError) {
    EXPECT_THROW(parse_config_file("/nonexistent/grsem.ini"), IoError);
}

TEST(Config, EnumStringsRoundTrip) {
    for (GrMode g : {GrMode::none, GrMode::h, GrMode::hp}) {
        EXPECT_EQ(parse_gr_mode(to_string(g)), g);
    }
    EXPECT_EQ(to_string(DomainKind::ellipse), "ellipse");
}

class MeshRoundTrip : public ::testing::Test {
protected:
    void SetUp() override {
        domain_.holes.push_back({ParametricCurve::standard_flower(), BcKind::neumann});
        MeshOptions o;
        o.h = 1.0 / 8.0;
        o.gr = GrMode::h;
        mesh_ = insert_high_order_nodes(generate_mesh(domain_, o), domain_, 3, 4);
    }
    Domain domain_;
    HighOrderMesh mesh_;
};

TEST_F(MeshRoundTrip, LinearAndHighOrderDataAreBitExact) {
    std::stringstream buf;
    write_mesh(buf, mesh_.linear, &mesh_);
    const MeshFile f = read_mesh(buf);
    const LinearMixedMesh& a = mesh_.linear;
    const LinearMixedMesh& b = f.linear;
    ASSERT_EQ(a.num_nodes(), b.num_nodes());
    ASSERT_EQ(a.num_elements(), b.num_elements());
    for (std::size_t i = 0; i < a.num_nodes(); ++i) {
        EXPECT_EQ(a.nodes[i], b.nodes[i]);
        EXPECT_EQ(a.tags[i].kind, b.tags[i].kind);
        EXPECT_EQ(a.tags[i].t, b.tags[i].t);
    }
    for (std::size_t e = 0; e < a.num_elements(); ++e) {
        EXPECT_EQ(a.elements[e].v, b.elements[e].v);
        EXPECT_EQ(a.elements[e].region, b.elements[e].region);
        EXPECT_EQ(a.sibling[e], b.sibling[e]);
    }
    ASSERT_TRUE(f.high_order.has_value());
    const HighOrderMesh& h = *f.high_order;
    EXPECT_EQ(h.p, 3);
    EXPECT_EQ(h.q, 4);
    ASSERT_EQ(h.num_nodes(), mesh_.num_nodes());
    for (std::size_t i = 0; i < h.num_nodes(); ++i) {
        EXPECT_EQ(h.nodes[i], mesh_.nodes[i]);
        EXPECT_EQ(h.info[i].t, mesh_.info[i].t);
        EXPECT_EQ(h.info[i].touches_gap, mesh_.info[i].touches_gap);
    }
    EXPECT_EQ(h.elem_nodes, mesh_.elem_nodes);
    EXPECT_EQ(h.curved_facet, mesh_.curved_facet);
    for (std::size_t e = 0; e < h.num_elements(); ++e) {
        EXPECT_EQ(h.geometry[e], mesh_.geometry[e]);
    }
    // Writing the re-read mesh reproduces the file.
    std::stringstream again;
    write_mesh(again, f.linear, &h);
    EXPECT_EQ(again.str(), buf.str());
}

TEST_F(MeshRoundTrip, LinearOnlyFileHasNoHighOrderPart) {
    std::stringstream buf;
    write_mesh(buf, mesh_.linear);
    EXPECT_FALSE(read_mesh(buf).high_order.has_value());
}

TEST(MeshIo, MalformedInputIsRejected) {
    std::istringstream bad_magic("not-a-mesh 1\n");
    EXPECT_THROW(read_mesh(bad_magic), IoError);
    std::istringstream truncated("grsem-mesh 1\nnodes 3\n0 0 0 0 0\n");
    EXPECT_ANY_THROW(read_mesh(truncated));
    std::istringstream bad_ref("grsem-mesh 1\nnodes 3\n0 0 0 1 0\n1 1 0 1 0\n2 0 1 1 0\nelements 1\ntri 0 1 7 g\n");
    EXPECT_ANY_THROW(read_mesh(bad_ref));
    EXPECT_THROW(read_mesh(std::filesystem::path("/nonexistent/x.mesh")), IoError);
}

TEST(SolutionIo, RoundTripIsBitExact) {
    const auto path = std::filesystem::temp_directory_path() / "grsem_test_solution.sol";
    Eigen::VectorXd u(4);
    u << 0.1, -1.0 / 3.0, 1e-300, 12345.678901234567;
    write_solution(path, u);
    const Eigen::VectorXd v = read_solution(path);
    ASSERT_EQ(v.size(), u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        EXPECT_EQ(v[i], u[i]);
    }
}

TEST(Config, ShippedConfigsAreValid) {
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(GRSEM_CONFIG_DIR)) {
        if (entry.path().extension() != ".ini") {
            continue;
        }
        SCOPED_TRACE(entry.path().filename().string());
        EXPECT_NO_THROW(validate(config_from_table(parse_config_file(entry.path()))));
        ++n;
    }
    EXPECT_GE(n, 8);
}
