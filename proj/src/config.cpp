#include "grsem/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace grsem {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_list(const std::string& v) {
    std::string s = v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

/// Accepts plain reals and fractions such as 1/32.
double parse_real(const std::string& key, const std::string& v) {
    const auto slash = v.find('/');
    try {
        std::size_t used = 0;
        if (slash != std::string::npos) {
            const double num = std::stod(v.substr(0, slash), &used);
            if (used != slash) {
                throw std::invalid_argument(v);
            }
            const std::string den_s = v.substr(slash + 1);
            const double den = std::stod(den_s, &used);
            if (used != den_s.size() || den == 0.0) {
                throw std::invalid_argument(v);
            }
            return num / den;
        }
        const double r = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return r;
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + v + "' is not a number");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const int r = std::stoi(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return r;
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + v + "' is not an integer");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    const std::string s = lower(v);
    if (s == "true" || s == "yes" || s == "on" || s == "1") {
        return true;
    }
    if (s == "false" || s == "no" || s == "off" || s == "0") {
        return false;
    }
    throw ConfigError(key + ": '" + v + "' is not a boolean");
}

BcKind parse_bc(const std::string& key, const std::string& v) {
    const std::string s = lower(v);
    if (s == "dirichlet") {
        return BcKind::dirichlet;
    }
    if (s == "neumann") {
        return BcKind::neumann;
    }
    throw ConfigError(key + ": expected dirichlet or neumann, got '" + v + "'");
}

std::string fmt_real(double v) {
    std::ostringstream s;
    s.precision(12);
    s << v;
    return s.str();
}

struct Entry {
    const char* key;
    const char* default_value;
    const char* help;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

const std::vector<Entry>& schema() {
    static const std::vector<Entry> entries = {
        {"domain.kind", "flower", "flower | ellipse | square (hole-free)",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const std::string s = lower(v);
             if (s == "flower") {
                 c.domain = DomainKind::flower;
             } else if (s == "ellipse") {
                 c.domain = DomainKind::ellipse;
             } else if (s == "square") {
                 c.domain = DomainKind::square;
             } else {
                 throw ConfigError(k + ": unknown domain '" + v + "'");
             }
         }},
        {"domain.hole_bc", "neumann", "boundary condition on the hole curve",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.hole_bc = parse_bc(k, v); }},
        {"domain.outer_bc", "dirichlet", "boundary condition on the unit square",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.outer_bc = parse_bc(k, v); }},
        {"mesh.h", "1/16", "structured grid size; a list spans a study",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.h.clear();
             for (const auto& t : split_list(v)) {
                 c.h.push_back(parse_real(k, t));
             }
         }},
        {"mesh.gr", "h", "geometric refinement: none | h | hp; a list spans a study",
         [](RunConfig& c, const std::string&, const std::string& v) {
             c.gr.clear();
             for (const auto& t : split_list(v)) {
                 c.gr.push_back(parse_gr_mode(t));
             }
         }},
        {"mesh.theta_max", "0.2", "angle budget per boundary segment (radians)",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.theta_max = parse_real(k, v); }},
        {"mesh.h_min_factor", "1/8", "smallest boundary spacing as a fraction of h",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.h_min_factor = parse_real(k, v); }},
        {"mesh.h_max_factor", "1", "largest boundary spacing as a fraction of h",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.h_max_factor = parse_real(k, v); }},
        {"mesh.grading", "1.3", "largest ratio of adjacent boundary segment lengths",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.grading = parse_real(k, v); }},
        {"mesh.clearance_factor", "1.5", "grid nodes closer than this many h to a hole are removed",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.clearance_factor = parse_real(k, v); }},
        {"mesh.strict_geometry", "true", "fail on invalid curved elements instead of keeping them straight",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.strict_geometry = parse_bool(k, v); }},
        {"solver.degree", "2", "solution degree p (1..4); a list spans a study",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.degree.clear();
             for (const auto& t : split_list(v)) {
                 c.degree.push_back(parse_int(k, t));
             }
         }},
        {"solver.geom_degree", "0", "geometry degree q; 0 picks p (none, h) or p+1 (hp)",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.geom_degree = parse_int(k, v); }},
        {"solver.nodes", "gl", "gl (spectral elements) | eq (equidistant nodes)",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const std::string s = lower(v);
             if (s == "gl") {
                 c.family = NodeFamily::gauss_lobatto;
             } else if (s == "eq") {
                 c.family = NodeFamily::equidistant;
             } else {
                 throw ConfigError(k + ": expected gl or eq, got '" + v + "'");
             }
         }},
        {"solver.omega", "10", "frequency of the manufactured solution",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.omega = parse_real(k, v); }},
        {"solver.tol", "1e-12", "relative residual tolerance",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.tol = parse_real(k, v); }},
        {"solver.iterative", "false", "BiCGSTAB with incomplete LU instead of sparse LU",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.iterative = parse_bool(k, v); }},
        {"solver.threads", "1", "assembly threads per run",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = parse_int(k, v); }},
        {"post.enabled", "false", "post-process near-boundary nodes",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.post = parse_bool(k, v); }},
        {"post.layers", "2", "quad layers added to the boundary submesh",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.layers = parse_int(k, v); }},
        {"post.fit_degree_offset", "2", "least-squares fit degree minus p",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.fit_degree_offset = parse_int(k, v); }},
        {"post.neumann", "keep", "keep (SEM values) | weak (facet integral) | collocation (normal derivative of the fit)",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const std::string s = lower(v);
             if (s == "keep") {
                 c.neumann = NeumannTreatment::keep;
             } else if (s == "weak") {
                 c.neumann = NeumannTreatment::weak;
             } else if (s == "collocation") {
                 c.neumann = NeumannTreatment::collocation;
             } else {
                 throw ConfigError(k + ": expected keep, weak or collocation, got '" + v + "'");
             }
         }},
        {"post.stencil_factor", "1.5", "minimum stencil size relative to the number of monomials",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.stencil_factor = parse_real(k, v); }},
        {"post.max_condition", "1e8", "stencils grow until the fit condition number is below this",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.max_condition = parse_real(k, v); }},
        {"quality.angles", "", "target maximum angles (degrees) for the quality study",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.angles.clear();
             for (const auto& t : split_list(v)) {
                 c.angles.push_back(parse_real(k, t));
             }
         }},
        {"output.dir", "grsem_out", "output directory",
         [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
        {"output.deterministic", "false", "report wall time as 0 for byte-identical reruns",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.deterministic = parse_bool(k, v); }},
        {"output.jobs", "1", "concurrent study runs",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.jobs = parse_int(k, v); }},
    };
    return entries;
}

}  // namespace

std::string to_string(GrMode g) {
    switch (g) {
    case GrMode::none:
        return "none";
    case GrMode::h:
        return "h";
    case GrMode::hp:
        return "hp";
    }
    return "none";
}

GrMode parse_gr_mode(const std::string& s) {
    const std::string l = lower(s);
    if (l == "none") {
        return GrMode::none;
    }
    if (l == "h") {
        return GrMode::h;
    }
    if (l == "hp") {
        return GrMode::hp;
    }
    throw ConfigError("unknown refinement mode '" + s + "' (expected none, h or hp)");
}

std::string to_string(DomainKind d) {
    switch (d) {
    case DomainKind::flower:
        return "flower";
    case DomainKind::ellipse:
        return "ellipse";
    case DomainKind::square:
        return "square";
    }
    return "flower";
}

int RunConfig::geometry_degree(int p, GrMode g) const {
    if (geom_degree > 0) {
        return geom_degree;
    }
    return g == GrMode::hp ? p + 1 : p;
}

Domain RunConfig::make_domain() const {
    Domain d;
    d.outer_bc = outer_bc;
    if (domain == DomainKind::flower) {
        d.holes.push_back({ParametricCurve::standard_flower(), hole_bc});
    } else if (domain == DomainKind::ellipse) {
        d.holes.push_back({ParametricCurve::standard_ellipse(), hole_bc});
    }
    return d;
}

MeshOptions RunConfig::mesh_options(double hh, GrMode g) const {
    MeshOptions o;
    o.h = hh;
    o.gr = g;
    o.theta_max = theta_max;
    o.h_min_factor = h_min_factor;
    o.h_max_factor = h_max_factor;
    o.grading = grading;
    o.clearance_factor = clearance_factor;
    return o;
}

PostOptions RunConfig::post_options(int p) const {
    PostOptions o;
    o.layers = layers;
    o.degree = p + fit_degree_offset;
    o.degree_offset = fit_degree_offset;
    o.neumann = neumann;
    o.glp.stencil_factor = stencil_factor;
    o.glp.max_condition = max_condition;
    return o;
}

ConfigTable parse_config_text(std::istream& in, const std::string& origin) {
    ConfigTable table;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(where + ": malformed section header");
            }
            section = lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value'");
        }
        const std::string key = lower(trim(line.substr(0, eq)));
        if (key.empty() || section.empty()) {
            throw ConfigError(where + ": key outside of a section");
        }
        const std::string full = section + "." + key;
        if (!table.emplace(full, trim(line.substr(eq + 1))).second) {
            throw ConfigError(where + ": duplicate key " + full);
        }
    }
    return table;
}

ConfigTable parse_config_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) {
        throw IoError("cannot open config file " + path.string());
    }
    return parse_config_text(f, path.string());
}

void apply_env_overrides(ConfigTable& table, const std::string& prefix) {
    for (const Entry& e : schema()) {
        std::string name = prefix + e.key;
        std::replace(name.begin(), name.end(), '.', '_');
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(name.c_str())) {
            table[e.key] = v;
        }
    }
}

RunConfig config_from_table(const ConfigTable& table) {
    RunConfig c;
    for (const auto& [key, value] : table) {
        const auto it = std::find_if(schema().begin(), schema().end(), [&](const Entry& e) { return key == e.key; });
        if (it == schema().end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        it->set(c, key, value);
    }
    validate(c);
    return c;
}

void validate(const RunConfig& c) {
    if (c.h.empty() || c.degree.empty() || c.gr.empty()) {
        throw ConfigError("mesh.h, solver.degree and mesh.gr need at least one value");
    }
    for (double hh : c.h) {
        if (!(hh > 0.0) || hh > 0.5) {
            throw ConfigError("mesh.h must lie in (0, 0.5], got " + fmt_real(hh));
        }
    }
    for (int p : c.degree) {
        if (p < 1 || p > 4) {
            throw ConfigError("solver.degree must lie in 1..4, got " + std::to_string(p));
        }
        for (GrMode g : c.gr) {
            const int q = c.geometry_degree(p, g);
            if (q < p) {
                throw ConfigError("geometry degree q=" + std::to_string(q) + " is below the solution degree p=" +
                                  std::to_string(p));
            }
            if (q > p + 2) {
                throw ConfigError("geometry degree q=" + std::to_string(q) + " exceeds p+2 for p=" +
                                  std::to_string(p));
            }
        }
    }
    if (c.post && c.layers < 1) {
        throw ConfigError("post-processing needs post.layers >= 1");
    }
    if (c.post && c.domain == DomainKind::square) {
        throw ConfigError("post-processing needs a domain with a curved hole");
    }
    if (c.fit_degree_offset < 0 || c.fit_degree_offset > 4) {
        throw ConfigError("post.fit_degree_offset must lie in 0..4");
    }
    if (!(c.stencil_factor >= 1.0)) {
        throw ConfigError("post.stencil_factor must be at least 1");
    }
    if (!(c.max_condition > 1.0)) {
        throw ConfigError("post.max_condition must exceed 1");
    }
    if (!(c.theta_max > 0.0) || !(c.h_min_factor > 0.0) || !(c.h_max_factor >= c.h_min_factor)) {
        throw ConfigError("sizing needs theta_max > 0 and 0 < h_min_factor <= h_max_factor");
    }
    if (!(c.grading > 1.0)) {
        throw ConfigError("mesh.grading must exceed 1");
    }
    if (!(c.clearance_factor > 0.0)) {
        throw ConfigError("mesh.clearance_factor must be positive");
    }
    if (!(c.omega > 0.0) || !(c.tol > 0.0)) {
        throw ConfigError("solver.omega and solver.tol must be positive");
    }
    if (c.threads < 1 || c.jobs < 1) {
        throw ConfigError("solver.threads and output.jobs must be at least 1");
    }
    for (double a : c.angles) {
        if (!(a > 90.0) || !(a < 180.0)) {
            throw ConfigError("quality.angles must lie in (90, 180), got " + fmt_real(a));
        }
    }
}

std::string describe_defaults() {
    std::ostringstream s;
    for (const Entry& e : schema()) {
        s << "  " << e.key << " = " << e.default_value << "    # " << e.help << '\n';
    }
    return s.str();
}

}  // namespace grsem
