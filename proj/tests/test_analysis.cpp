#include "grsem/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace grsem;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("grsem_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Fourth-order central differences of exact_solution().u.
double fd_residual(double omega, const Point& x) {
    const double h = 3e-4;  // truncation ~ h^4 (10 pi)^6 / 90 stays well below 1e-5
    auto u = [omega](double a, double b) { return exact_solution(omega, Point(a, b)).u; };
    auto d1 = [&](double fm2, double fm1, double fp1, double fp2) { return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h); };
    auto d2 = [&](double fm2, double fm1, double f0, double fp1, double fp2) {
        return (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
    };
    const double cx = x.x();
    const double cy = x.y();
    const double u0 = u(cx, cy);
    const double uxm2 = u(cx - 2 * h, cy), uxm1 = u(cx - h, cy), uxp1 = u(cx + h, cy), uxp2 = u(cx + 2 * h, cy);
    const double uym2 = u(cx, cy - 2 * h), uym1 = u(cx, cy - h), uyp1 = u(cx, cy + h), uyp2 = u(cx, cy + 2 * h);
    const double lap = d2(uxm2, uxm1, u0, uxp1, uxp2) + d2(uym2, uym1, u0, uyp1, uyp2);
    const double ux = d1(uxm2, uxm1, uxp1, uxp2);
    const double uy = d1(uym2, uym1, uyp1, uyp2);
    return -lap + cx * ux - cy * uy;
}

RunRecord record(const std::string& id, int p, long dof, double err) {
    RunRecord r;
    r.run_id = id;
    r.domain = "flower";
    r.bc = "neumann";
    r.p = p;
    r.q = p;
    r.gr_mode = "h";
    r.dof = dof;
    r.l2_all = err;
    r.l2_interior = err / 2;
    r.l2_post = std::numeric_limits<double>::quiet_NaN();
    r.omega = 10.0;
    return r;
}

}  // namespace

TEST(ExactSolution, Examples) {
    EXPECT_NEAR(exact_solution(10, Point(0.5, 0.5)).u, 0.25, 1e-14);
    EXPECT_NEAR(exact_solution(10, Point(0.0, 0.37)).u, 0.0, 1e-15);
    EXPECT_NEAR(exact_solution(10, Point(0.0, 0.0)).grad.x(), 10 * kPi, 1e-12);
}

TEST(ExactSolution, GradientMatchesFiniteDifferences) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        const Point x(u(rng), u(rng));
        const Vec2 g = exact_solution(10, x).grad;
        const double gx = (exact_solution(10, x + Vec2(h, 0)).u - exact_solution(10, x - Vec2(h, 0)).u) / (2 * h);
        const double gy = (exact_solution(10, x + Vec2(0, h)).u - exact_solution(10, x - Vec2(0, h)).u) / (2 * h);
        EXPECT_NEAR(g.x(), gx, 1e-6);
        EXPECT_NEAR(g.y(), gy, 1e-6);
    }
}

TEST(DerivedSource, Examples) {
    for (double omega : {2.0, 10.0}) {
        EXPECT_NEAR(derived_source(omega, Point(0.0, 0.3)), 0.0, 1e-12);
    }
    EXPECT_NEAR(derived_source(10, Point(0.5, 0.5)), 5 * kPi, 1e-10);
}

TEST(DerivedSource, MatchesFiniteDifferenceOracle) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Point x(u(rng), u(rng));
        worst = std::max(worst, std::abs(derived_source(10, x) - fd_residual(10, x)));
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(NodalError, Examples) {
    const Eigen::VectorXd u = Eigen::Vector3d(1.0, 2.0, 3.0);
    EXPECT_EQ(l2_nodal_error(u, u, {0, 1, 2}), 0.0);
    EXPECT_DOUBLE_EQ(l2_nodal_error(Eigen::Vector3d(4.0, 2.0, 3.0), u, {0}), 3.0);
    EXPECT_DOUBLE_EQ(l2_nodal_error(Eigen::Vector3d(4.0, 6.0, 3.0), u, {0, 1, 2}), 5.0);
    EXPECT_DOUBLE_EQ(rms_nodal_error(Eigen::Vector3d(4.0, 6.0, 3.0), u, {0, 1}), 5.0 / std::sqrt(2.0));
    EXPECT_THROW(l2_nodal_error(u, u, {}), ConfigError);
}

TEST(Rate, Identities) {
    EXPECT_NEAR(convergence_rate(1.0, 0.5, 100, 400), 1.0, 1e-14);
    EXPECT_NEAR(convergence_rate(1.0, 1.0, 100, 400), 0.0, 1e-14);
    EXPECT_NEAR(convergence_rate(1.0, 1.0 / 16, 100, 400), 4.0, 1e-14);
    EXPECT_NEAR(convergence_rate(1.0, 0.125, 1000, 8000, 3), 3.0, 1e-14);
    EXPECT_THROW(convergence_rate(0.0, 1.0, 100, 400), ConfigError);
    EXPECT_THROW(convergence_rate(1.0, -1.0, 100, 400), ConfigError);
    EXPECT_THROW(convergence_rate(1.0, 0.5, 100, 100), ConfigError);
}

TEST(Rate, AgreesWithEdgeLengthRateOnSquareMeshes) {
    static const Domain box{};
    for (int p = 2; p <= 4; ++p) {
        const double hc = 1.0 / 32.0;
        const double hf = 1.0 / 64.0;
        const auto dc = static_cast<double>(
            insert_high_order_nodes(structured_grid({0, 0}, {1, 1}, hc), box, p, p).num_nodes());
        const auto df = static_cast<double>(
            insert_high_order_nodes(structured_grid({0, 0}, {1, 1}, hf), box, p, p).num_nodes());
        const double order = p + 2;
        const double ec = std::pow(hc, order);
        const double ef = std::pow(hf, order);
        const double edge_rate = std::log(ec / ef) / std::log(hc / hf);
        EXPECT_NEAR(convergence_rate(ec, ef, dc, df), edge_rate, 0.05);
    }
}

TEST(Rate, ComputeRatesGroupsSeries) {
    std::vector<RunRecord> rs{record("a", 2, 1000, 1e-2), record("b", 2, 4000, 1e-2 / 16), record("c", 3, 2000, 1e-3),
                              record("d", 3, 8000, 1e-3 / 32)};
    compute_rates(rs);
    EXPECT_TRUE(std::isnan(rs[0].rate_all));
    EXPECT_NEAR(rs[1].rate_all, 4.0, 1e-12);
    EXPECT_NEAR(rs[1].rate_interior, 4.0, 1e-12);
    EXPECT_TRUE(std::isnan(rs[2].rate_all));
    EXPECT_NEAR(rs[3].rate_all, 5.0, 1e-12);
}

TEST(Nodes, InteriorSubsetExcludesGapNodes) {
    Domain d;
    d.holes.push_back({ParametricCurve::standard_ellipse(), BcKind::neumann});
    MeshOptions o;
    o.h = 1.0 / 16.0;
    o.gr = GrMode::h;
    const HighOrderMesh m = insert_high_order_nodes(generate_mesh(d, o), d, 2, 2);
    const auto all = all_nodes(m);
    const auto interior = interior_nodes(m);
    EXPECT_EQ(all.size(), m.num_nodes());
    EXPECT_LT(interior.size(), all.size());
    std::set<int> gap_nodes;
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        if (m.linear.elements[e].region == Region::gap) {
            gap_nodes.insert(m.elem_nodes[e].begin(), m.elem_nodes[e].end());
        }
    }
    for (int i : interior) {
        EXPECT_FALSE(gap_nodes.count(i));
    }
    EXPECT_EQ(interior.size() + gap_nodes.size(), all.size());
}

class Distort : public ::testing::Test {
protected:
    void SetUp() override {
        domain_.holes.push_back({ParametricCurve::standard_flower(), BcKind::neumann});
        MeshOptions o;
        o.h = 1.0 / 16.0;
        o.gr = GrMode::h;
        mesh_ = generate_mesh(domain_, o);
    }
    Domain domain_;
    LinearMixedMesh mesh_;
};

TEST_F(Distort, ReachesTargetAngleWithPositiveAreas) {
    for (double target : {170.0, 179.0, 179.9, 179.99}) {
        const LinearMixedMesh d = distort_mesh(mesh_, target);
        // Exhaustive scan of all element angles.
        double worst = 0.0;
        for (std::size_t e = 0; e < d.num_elements(); ++e) {
            for (double a : element_angles_deg(d, static_cast<int>(e))) {
                worst = std::max(worst, a);
            }
            EXPECT_GT(d.signed_area(static_cast<int>(e)), 0.0);
        }
        EXPECT_NEAR(worst, target, 0.01) << "target " << target;

        ASSERT_EQ(d.num_nodes(), mesh_.num_nodes());
        ASSERT_EQ(d.num_elements(), mesh_.num_elements());
        int moved = 0;
        for (std::size_t i = 0; i < d.num_nodes(); ++i) {
            if (mesh_.tags[i].kind != NodeKind::interior) {
                EXPECT_EQ(d.nodes[i], mesh_.nodes[i]);
            }
            moved += d.nodes[i] != mesh_.nodes[i] ? 1 : 0;
        }
        EXPECT_GE(moved, 1);
        for (std::size_t e = 0; e < d.num_elements(); ++e) {
            EXPECT_EQ(d.elements[e].v, mesh_.elements[e].v);
        }
    }
}

TEST_F(Distort, CurrentMaximumIsANoOp) {
    const double current = mesh_quality(mesh_).max_angle_deg;
    const LinearMixedMesh d = distort_mesh(mesh_, current);
    for (std::size_t i = 0; i < d.num_nodes(); ++i) {
        EXPECT_EQ(d.nodes[i], mesh_.nodes[i]);
    }
}

TEST_F(Distort, RejectsOutOfRangeTargets) {
    EXPECT_THROW(distort_mesh(mesh_, 90.0), ConfigError);
    EXPECT_THROW(distort_mesh(mesh_, 180.0), ConfigError);
    EXPECT_THROW(distort_mesh(mesh_, 100.0), MeshError);  // below the current maximum
}

TEST(Report, OneRecordGivesHeaderAndOneRow) {
    const auto dir = fresh_dir("one");
    emit_report({record("r1", 2, 100, 0.1)}, dir, "one");
    std::ifstream csv(dir / "one.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header.rfind("run_id,domain,p,q,gr_mode,layers,dof,l2_all,l2_interior,l2_post,rate_all,rate_interior,"
                           "rate_post,max_angle_deg,wall_time_s",
                           0),
              0u);
    int rows = 0;
    for (std::string line; std::getline(csv, line);) {
        ++rows;
    }
    EXPECT_EQ(rows, 1);
    EXPECT_TRUE(std::filesystem::exists(dir / "one.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "one_plot.dat"));
}

TEST(Report, MixedDegreesGiveSeparateSeries) {
    const auto dir = fresh_dir("series");
    RunRecord a = record("a", 2, 100, 0.1);
    RunRecord b = record("b", 3, 100, 0.1);
    RunRecord c = record("c", 3, 100, 0.1);
    c.post = true;
    c.l2_post = 0.05;
    emit_report({a, b, c}, dir, "s");
    std::ifstream plot(dir / "s_plot.dat");
    std::set<std::string> labels;
    for (std::string line; std::getline(plot, line);) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        labels.insert(line.substr(line.find('"')));
    }
    EXPECT_TRUE(labels.count("\"flower neumann p=2 gr=h q=2 sem\""));
    EXPECT_TRUE(labels.count("\"flower neumann p=3 gr=h q=3 sem\""));
    EXPECT_TRUE(labels.count("\"flower neumann p=3 gr=h q=3 post\""));
}

TEST(Report, ReEmitIsByteIdentical) {
    const auto d1 = fresh_dir("det1");
    const auto d2 = fresh_dir("det2");
    std::vector<RunRecord> rs{record("a", 2, 1000, 1e-2), record("b", 2, 4000, 1e-3)};
    compute_rates(rs);
    emit_report(rs, d1, "r");
    emit_report(rs, d2, "r");
    for (const char* f : {"r.csv", "r.json", "r_plot.dat"}) {
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    }
}

TEST(Report, EmptyRecordsAndBadDirectoryAreErrors) {
    EXPECT_THROW(emit_report({}, fresh_dir("empty")), ConfigError);
    EXPECT_THROW(emit_report({record("a", 2, 1, 1.0)}, "/proc/definitely/not/writable"), IoError);
}
