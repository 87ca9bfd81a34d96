#include "grsem/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace grsem {

namespace {

std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int encode_tag(const NodeTag& tag) {
    switch (tag.kind) {
    case NodeKind::interior:
        return 0;
    case NodeKind::outer:
        return 1;
    case NodeKind::hole:
        return 2 + tag.hole;
    }
    return 0;
}

NodeTag decode_tag(int code, double t) {
    NodeTag tag;
    if (code == 1) {
        tag.kind = NodeKind::outer;
    } else if (code >= 2) {
        tag.kind = NodeKind::hole;
        tag.hole = code - 2;
        tag.t = t;
    } else if (code != 0) {
        throw IoError("read_mesh: bad node tag " + std::to_string(code));
    }
    return tag;
}

void expect(std::istream& in, const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) {
        throw IoError("read_mesh: expected '" + word + "', found '" + got + "'");
    }
}

template <class T>
T read_value(std::istream& in, const char* what) {
    T v{};
    if (!(in >> v)) {
        throw IoError(std::string("read_mesh: cannot parse ") + what);
    }
    return v;
}

std::size_t read_count(std::istream& in, const char* what) {
    const long n = read_value<long>(in, what);
    if (n < 0) {
        throw IoError(std::string("read_mesh: negative ") + what);
    }
    return static_cast<std::size_t>(n);
}

}  // namespace

void write_mesh(std::ostream& out, const LinearMixedMesh& mesh, const HighOrderMesh* ho) {
    out << "grsem-mesh 1\n";
    out << "nodes " << mesh.num_nodes() << '\n';
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const NodeTag& tag = mesh.tags[i];
        out << i << ' ' << real(mesh.nodes[i].x()) << ' ' << real(mesh.nodes[i].y()) << ' ' << encode_tag(tag) << ' '
            << real(tag.kind == NodeKind::hole ? tag.t : 0.0) << '\n';
    }
    out << "elements " << mesh.num_elements() << '\n';
    for (const Element& e : mesh.elements) {
        out << (e.shape == ElementShape::quad ? "quad" : "tri");
        for (int k = 0; k < e.num_vertices(); ++k) {
            out << ' ' << e.v[static_cast<std::size_t>(k)];
        }
        out << ' ' << (e.region == Region::gap ? 'g' : 's') << '\n';
    }
    if (ho == nullptr) {
        return;
    }
    out << "highorder " << ho->p << ' ' << ho->q << ' '
        << (ho->family == NodeFamily::gauss_lobatto ? "gl" : "eq") << '\n';
    out << "solution_nodes " << ho->num_nodes() << '\n';
    for (std::size_t i = 0; i < ho->num_nodes(); ++i) {
        const SolutionNodeInfo& inf = ho->info[i];
        out << i << ' ' << real(ho->nodes[i].x()) << ' ' << real(ho->nodes[i].y()) << ' '
            << static_cast<int>(inf.kind) << ' ' << inf.hole << ' ' << real(inf.t) << ' ' << (inf.touches_gap ? 1 : 0)
            << '\n';
    }
    out << "element_nodes " << ho->elem_nodes.size() << '\n';
    for (std::size_t e = 0; e < ho->elem_nodes.size(); ++e) {
        out << e << ' ' << ho->elem_nodes[e].size();
        for (int id : ho->elem_nodes[e]) {
            out << ' ' << id;
        }
        out << '\n';
    }
    std::size_t curved = 0;
    for (std::size_t e = 0; e < ho->num_elements(); ++e) {
        curved += ho->is_curved(static_cast<int>(e)) ? 1 : 0;
    }
    out << "geometry " << curved << '\n';
    for (std::size_t e = 0; e < ho->num_elements(); ++e) {
        if (!ho->is_curved(static_cast<int>(e))) {
            continue;
        }
        const Eigen::MatrixX2d& g = ho->geometry[e];
        out << e << ' ' << ho->curved_facet[e] << ' ' << g.rows();
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            out << ' ' << real(g(r, 0)) << ' ' << real(g(r, 1));
        }
        out << '\n';
    }
}

void write_mesh(const std::filesystem::path& path, const LinearMixedMesh& mesh, const HighOrderMesh* ho) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_mesh(f, mesh, ho);
    if (!f) {
        throw IoError("failed writing " + path.string());
    }
}

MeshFile read_mesh(std::istream& in) {
    MeshFile mf;
    expect(in, "grsem-mesh");
    if (read_value<int>(in, "format version") != 1) {
        throw IoError("read_mesh: unsupported format version");
    }
    LinearMixedMesh& m = mf.linear;
    expect(in, "nodes");
    const std::size_t nn = read_count(in, "node count");
    m.nodes.resize(nn);
    m.tags.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        if (read_count(in, "node id") != i) {
            throw IoError("read_mesh: node ids must be consecutive");
        }
        const double x = read_value<double>(in, "x");
        const double y = read_value<double>(in, "y");
        const int tag = read_value<int>(in, "tag");
        const double t = read_value<double>(in, "t");
        m.nodes[i] = Point(x, y);
        m.tags[i] = decode_tag(tag, t);
    }
    expect(in, "elements");
    const std::size_t ne = read_count(in, "element count");
    m.elements.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto kind = read_value<std::string>(in, "element kind");
        Element& el = m.elements[e];
        if (kind == "quad") {
            el.shape = ElementShape::quad;
        } else if (kind == "tri") {
            el.shape = ElementShape::tri;
        } else {
            throw IoError("read_mesh: unknown element kind '" + kind + "'");
        }
        for (int k = 0; k < el.num_vertices(); ++k) {
            const std::size_t v = read_count(in, "vertex id");
            if (v >= nn) {
                throw IoError("read_mesh: vertex id out of range in element " + std::to_string(e));
            }
            el.v[static_cast<std::size_t>(k)] = static_cast<int>(v);
        }
        const auto region = read_value<std::string>(in, "region");
        if (region != "s" && region != "g") {
            throw IoError("read_mesh: bad region flag '" + region + "'");
        }
        el.region = region == "g" ? Region::gap : Region::structured;
    }
    build_ahf(m);

    std::string word;
    if (!(in >> word)) {
        return mf;
    }
    if (word != "highorder") {
        throw IoError("read_mesh: unexpected trailing token '" + word + "'");
    }
    HighOrderMesh ho;
    ho.linear = m;
    ho.p = read_value<int>(in, "p");
    ho.q = read_value<int>(in, "q");
    const auto fam = read_value<std::string>(in, "family");
    if (fam != "gl" && fam != "eq") {
        throw IoError("read_mesh: unknown node family '" + fam + "'");
    }
    ho.family = fam == "gl" ? NodeFamily::gauss_lobatto : NodeFamily::equidistant;
    if (ho.p < 1 || ho.p > 4 || ho.q < ho.p || ho.q > ho.p + 2) {
        throw IoError("read_mesh: invalid degrees p=" + std::to_string(ho.p) + " q=" + std::to_string(ho.q));
    }
    expect(in, "solution_nodes");
    const std::size_t ns = read_count(in, "solution node count");
    ho.nodes.resize(ns);
    ho.info.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        if (read_count(in, "solution node id") != i) {
            throw IoError("read_mesh: solution node ids must be consecutive");
        }
        const double x = read_value<double>(in, "x");
        const double y = read_value<double>(in, "y");
        ho.nodes[i] = Point(x, y);
        const int kind = read_value<int>(in, "kind");
        if (kind < 0 || kind > 2) {
            throw IoError("read_mesh: bad solution node kind");
        }
        ho.info[i].kind = static_cast<NodeKind>(kind);
        ho.info[i].hole = read_value<int>(in, "hole");
        ho.info[i].t = read_value<double>(in, "t");
        ho.info[i].touches_gap = read_value<int>(in, "touches_gap") != 0;
    }
    expect(in, "element_nodes");
    if (read_count(in, "element count") != ne) {
        throw IoError("read_mesh: element_nodes count differs from the element count");
    }
    ho.elem_nodes.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        if (read_count(in, "element id") != e) {
            throw IoError("read_mesh: element ids must be consecutive");
        }
        const std::size_t k = read_count(in, "node count");
        ho.elem_nodes[e].resize(k);
        for (auto& id : ho.elem_nodes[e]) {
            const std::size_t v = read_count(in, "solution node id");
            if (v >= ns) {
                throw IoError("read_mesh: solution node id out of range");
            }
            id = static_cast<int>(v);
        }
    }
    expect(in, "geometry");
    const std::size_t nc = read_count(in, "curved element count");
    ho.curved_facet.assign(ne, -1);
    ho.geometry.assign(ne, Eigen::MatrixX2d());
    for (std::size_t c = 0; c < nc; ++c) {
        const std::size_t e = read_count(in, "element id");
        if (e >= ne) {
            throw IoError("read_mesh: curved element id out of range");
        }
        ho.curved_facet[e] = read_value<int>(in, "facet");
        const std::size_t k = read_count(in, "geometry node count");
        Eigen::MatrixX2d g(static_cast<Eigen::Index>(k), 2);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            g(r, 0) = read_value<double>(in, "geometry x");
            g(r, 1) = read_value<double>(in, "geometry y");
        }
        ho.geometry[e] = std::move(g);
    }
    mf.high_order = std::move(ho);
    return mf;
}

MeshFile read_mesh(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open mesh file " + path.string());
    }
    return read_mesh(f);
}

void write_solution(const std::filesystem::path& path, const Eigen::VectorXd& u) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        f << i << ' ' << real(u(i)) << '\n';
    }
    if (!f) {
        throw IoError("failed writing " + path.string());
    }
}

Eigen::VectorXd read_solution(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open solution file " + path.string());
    }
    std::vector<double> vals;
    long id = 0;
    double v = 0.0;
    while (f >> id >> v) {
        if (id != static_cast<long>(vals.size())) {
            throw IoError("solution file " + path.string() + ": node ids must be consecutive");
        }
        vals.push_back(v);
    }
    if (!f.eof()) {
        throw IoError("solution file " + path.string() + ": malformed line after node " + std::to_string(id));
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace grsem
