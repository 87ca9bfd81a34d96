#include "grsem/reference.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace grsem {

namespace {

/// 1D Lagrange basis values and derivatives on the node set `x` at s.
void lagrange_1d(const std::vector<double>& x, double s, std::vector<double>& val, std::vector<double>& der) {
    const std::size_t n = x.size();
    val.assign(n, 0.0);
    der.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double v = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) {
                v *= (s - x[k]) / (x[i] - x[k]);
            }
        }
        val[i] = v;
        double d = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            if (m == i) {
                continue;
            }
            double term = 1.0 / (x[i] - x[m]);
            for (std::size_t k = 0; k < n; ++k) {
                if (k != i && k != m) {
                    term *= (s - x[k]) / (x[i] - x[k]);
                }
            }
            d += term;
        }
        der[i] = d;
    }
}

/// Total-degree Legendre-product modes on the unit triangle and their gradients.
void triangle_modes(int p, const Point& xi, Eigen::VectorXd& m, Eigen::MatrixX2d* dm) {
    const int n = (p + 1) * (p + 2) / 2;
    m.resize(n);
    if (dm) {
        dm->resize(n, 2);
    }
    std::vector<double> px(static_cast<std::size_t>(p + 1));
    std::vector<double> dpx(static_cast<std::size_t>(p + 1));
    std::vector<double> py(static_cast<std::size_t>(p + 1));
    std::vector<double> dpy(static_cast<std::size_t>(p + 1));
    for (int i = 0; i <= p; ++i) {
        std::tie(px[static_cast<std::size_t>(i)], dpx[static_cast<std::size_t>(i)]) = legendre(i, 2.0 * xi.x() - 1.0);
        std::tie(py[static_cast<std::size_t>(i)], dpy[static_cast<std::size_t>(i)]) = legendre(i, 2.0 * xi.y() - 1.0);
    }
    int k = 0;
    for (int total = 0; total <= p; ++total) {
        for (int j = 0; j <= total; ++j) {
            const auto a = static_cast<std::size_t>(total - j);
            const auto b = static_cast<std::size_t>(j);
            m(k) = px[a] * py[b];
            if (dm) {
                (*dm)(k, 0) = 2.0 * dpx[a] * py[b];
                (*dm)(k, 1) = 2.0 * px[a] * dpy[b];
            }
            ++k;
        }
    }
}

}  // namespace

std::pair<double, double> legendre(int n, double x) {
    if (n == 0) {
        return {1.0, 0.0};
    }
    double p0 = 1.0;
    double p1 = x;
    double d0 = 0.0;
    double d1 = 1.0;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        const double d2 = d0 + (2.0 * k - 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    return {p1, d1};
}

std::vector<double> gauss_lobatto_1d(int p) {
    if (p < 1) {
        throw ConfigError("gauss_lobatto_1d: degree must be >= 1");
    }
    std::vector<double> x(static_cast<std::size_t>(p + 1));
    x.front() = -1.0;
    x.back() = 1.0;
    for (int k = 1; k < p; ++k) {
        // Newton on P'_p, using (1 - x^2) P''_p = 2 x P'_p - p (p+1) P_p.
        double t = -std::cos(kPi * k / p);
        for (int it = 0; it < 100; ++it) {
            const auto [v, d] = legendre(p, t);
            const double dd = (2.0 * t * d - p * (p + 1.0) * v) / (1.0 - t * t);
            const double step = d / dd;
            t -= step;
            if (std::abs(step) < 1e-16) {
                break;
            }
        }
        x[static_cast<std::size_t>(k)] = t;
    }
    for (int k = 0; k <= p / 2; ++k) {
        const double s = 0.5 * (x[static_cast<std::size_t>(p - k)] - x[static_cast<std::size_t>(k)]);
        x[static_cast<std::size_t>(k)] = -s;
        x[static_cast<std::size_t>(p - k)] = s;
    }
    if (p % 2 == 0) {
        x[static_cast<std::size_t>(p / 2)] = 0.0;
    }
    return x;
}

std::vector<double> gauss_lobatto_weights_1d(int p) {
    const std::vector<double> x = gauss_lobatto_1d(p);
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = legendre(p, x[i]).first;
        w[i] = 2.0 / (p * (p + 1.0) * v * v);
    }
    return w;
}

Rule1d gauss_legendre_1d(int n) {
    if (n < 1) {
        throw ConfigError("gauss_legendre_1d: need at least one point");
    }
    Rule1d r;
    r.x.resize(static_cast<std::size_t>(n));
    r.w.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double t = -std::cos(kPi * (k + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [v, d] = legendre(n, t);
            const double step = v / d;
            t -= step;
            if (std::abs(step) < 1e-16) {
                break;
            }
        }
        const double d = legendre(n, t).second;
        r.x[static_cast<std::size_t>(k)] = t;
        r.w[static_cast<std::size_t>(k)] = 2.0 / ((1.0 - t * t) * d * d);
    }
    return r;
}

ReferenceElement::ReferenceElement(ElementShape shape, int degree, NodeFamily family)
    : shape_(shape), degree_(degree), family_(family) {
    if (degree < 1) {
        throw ConfigError("reference element degree must be >= 1");
    }
    line_ = line_nodes();
    if (shape == ElementShape::quad) {
        build_quad();
    } else {
        build_triangle();
    }
}

std::vector<double> ReferenceElement::line_nodes() const {
    if (family_ == NodeFamily::gauss_lobatto) {
        return gauss_lobatto_1d(degree_);
    }
    std::vector<double> x(static_cast<std::size_t>(degree_ + 1));
    for (int i = 0; i <= degree_; ++i) {
        x[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / degree_;
    }
    return x;
}

void ReferenceElement::build_quad() {
    const int p = degree_;
    std::vector<std::array<int, 2>> idx{{0, 0}, {p, 0}, {p, p}, {0, p}};
    for (int k = 1; k < p; ++k) {
        idx.push_back({k, 0});
    }
    for (int k = 1; k < p; ++k) {
        idx.push_back({p, k});
    }
    for (int k = 1; k < p; ++k) {
        idx.push_back({p - k, p});
    }
    for (int k = 1; k < p; ++k) {
        idx.push_back({0, p - k});
    }
    for (int j = 1; j < p; ++j) {
        for (int i = 1; i < p; ++i) {
            idx.push_back({i, j});
        }
    }
    lattice_ = idx;
    nodes_.resize(static_cast<Eigen::Index>(idx.size()), 2);
    for (std::size_t n = 0; n < idx.size(); ++n) {
        nodes_(static_cast<Eigen::Index>(n), 0) = line_[static_cast<std::size_t>(idx[n][0])];
        nodes_(static_cast<Eigen::Index>(n), 1) = line_[static_cast<std::size_t>(idx[n][1])];
    }
}

void ReferenceElement::build_triangle() {
    const int p = degree_;
    std::vector<Point> pts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    lattice_ = {{0, 0}, {p, 0}, {0, p}};
    const Point verts[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    for (int e = 0; e < 3; ++e) {
        for (int k = 1; k < p; ++k) {
            const double f = 0.5 * (1.0 + line_[static_cast<std::size_t>(k)]);
            pts.push_back(verts[e] + f * (verts[(e + 1) % 3] - verts[e]));
            if (e == 0) {
                lattice_.push_back({k, 0});
            } else if (e == 1) {
                lattice_.push_back({p - k, k});
            } else {
                lattice_.push_back({0, p - k});
            }
        }
    }
    // Interior nodes, in the same order as the lattice fallback below.
    for (int total = 2; total <= p - 1; ++total) {
        for (int j = 1; j < total; ++j) {
            lattice_.push_back({total - j, j});
        }
    }
    if (family_ == NodeFamily::gauss_lobatto && p == 3) {
        pts.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    } else if (family_ == NodeFamily::gauss_lobatto && p == 4) {
        // Points of the symmetric 3-point rule of degree 2.
        pts.emplace_back(1.0 / 6.0, 1.0 / 6.0);
        pts.emplace_back(2.0 / 3.0, 1.0 / 6.0);
        pts.emplace_back(1.0 / 6.0, 2.0 / 3.0);
    } else {
        for (int total = 2; total <= p - 1; ++total) {
            for (int j = 1; j < total; ++j) {
                pts.emplace_back(static_cast<double>(total - j) / p, static_cast<double>(j) / p);
            }
        }
    }
    const int n = static_cast<int>(pts.size());
    nodes_.resize(n, 2);
    Eigen::MatrixXd vdm(n, n);
    Eigen::VectorXd m;
    for (int i = 0; i < n; ++i) {
        nodes_.row(i) = pts[static_cast<std::size_t>(i)].transpose();
        triangle_modes(p, pts[static_cast<std::size_t>(i)], m, nullptr);
        vdm.row(i) = m.transpose();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(vdm);
    if (!lu.isInvertible()) {
        throw ConfigError("triangle node set of degree " + std::to_string(p) + " is not unisolvent");
    }
    inv_vandermonde_ = lu.inverse();
}

int ReferenceElement::edge_node(int edge, int k) const {
    const int nv = num_vertices();
    if (k == 0) {
        return edge;
    }
    if (k == degree_) {
        return (edge + 1) % nv;
    }
    return nv + edge * (degree_ - 1) + (k - 1);
}

Point ReferenceElement::edge_point(int edge, double s) const {
    const int nv = num_vertices();
    const Point a = nodes_.row(edge).transpose();
    const Point b = nodes_.row((edge + 1) % nv).transpose();
    return a + 0.5 * (1.0 + s) * (b - a);
}

Vec2 ReferenceElement::edge_tangent(int edge) const {
    const int nv = num_vertices();
    return 0.5 * (nodes_.row((edge + 1) % nv) - nodes_.row(edge)).transpose();
}

void ReferenceElement::eval(const Point& xi, Eigen::VectorXd& values) const {
    Eigen::MatrixX2d grads;
    eval(xi, values, grads);
}

void ReferenceElement::eval(const Point& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const {
    const int n = num_nodes();
    values.resize(n);
    grads.resize(n, 2);
    if (shape_ == ElementShape::quad) {
        std::vector<double> vx;
        std::vector<double> dx;
        std::vector<double> vy;
        std::vector<double> dy;
        lagrange_1d(line_, xi.x(), vx, dx);
        lagrange_1d(line_, xi.y(), vy, dy);
        for (int k = 0; k < n; ++k) {
            const auto i = static_cast<std::size_t>(lattice_[static_cast<std::size_t>(k)][0]);
            const auto j = static_cast<std::size_t>(lattice_[static_cast<std::size_t>(k)][1]);
            values(k) = vx[i] * vy[j];
            grads(k, 0) = dx[i] * vy[j];
            grads(k, 1) = vx[i] * dy[j];
        }
        return;
    }
    Eigen::VectorXd m;
    Eigen::MatrixX2d dm;
    triangle_modes(degree_, xi, m, &dm);
    values.noalias() = inv_vandermonde_.transpose() * m;
    grads.noalias() = inv_vandermonde_.transpose() * dm;
}

const ReferenceElement& reference_element(ElementShape shape, int degree, NodeFamily family) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int>, std::unique_ptr<ReferenceElement>> cache;
    const std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_tuple(static_cast<int>(shape), degree, static_cast<int>(family));
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_unique<ReferenceElement>(shape, degree, family)).first;
    }
    return *it->second;
}

QuadratureRule quadrature_rule(ElementShape shape, int exactness) {
    if (exactness < 1) {
        throw ConfigError("quadrature_rule: exactness must be >= 1");
    }
    QuadratureRule q;
    if (shape == ElementShape::quad) {
        const int n = (exactness + 2) / 2;
        const Rule1d g = gauss_legendre_1d(n);
        q.points.resize(n * n, 2);
        q.weights.resize(n * n);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const int k = i + n * j;
                q.points(k, 0) = g.x[static_cast<std::size_t>(i)];
                q.points(k, 1) = g.x[static_cast<std::size_t>(j)];
                q.weights(k) = g.w[static_cast<std::size_t>(i)] * g.w[static_cast<std::size_t>(j)];
            }
        }
        return q;
    }
    // Collapsed rule: x = u (1 - v), y = v on the unit square; the extra (1 - v)
    // factor raises the degree in v by one.
    const int n = (exactness + 3) / 2;
    const Rule1d g = gauss_legendre_1d(n);
    q.points.resize(n * n, 2);
    q.weights.resize(n * n);
    for (int j = 0; j < n; ++j) {
        const double v = 0.5 * (1.0 + g.x[static_cast<std::size_t>(j)]);
        const double wv = 0.5 * g.w[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) {
            const double u = 0.5 * (1.0 + g.x[static_cast<std::size_t>(i)]);
            const double wu = 0.5 * g.w[static_cast<std::size_t>(i)];
            const int k = i + n * j;
            q.points(k, 0) = u * (1.0 - v);
            q.points(k, 1) = v;
            q.weights(k) = wu * wv * (1.0 - v);
        }
    }
    return q;
}

}  // namespace grsem
