#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace grsem {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

/// Failure classes map onto distinct CLI exit codes.
enum class ErrorKind { config = 2, meshing = 3, solve = 4, io = 5, geometry = 6 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& what) : Error(ErrorKind::geometry, what) {}
};

class MeshError : public Error {
public:
    explicit MeshError(const std::string& what) : Error(ErrorKind::meshing, what) {}
};

class SolveError : public Error {
public:
    explicit SolveError(const std::string& what) : Error(ErrorKind::solve, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Twice the signed area of (a, b, c); positive for counterclockwise.
inline double orient(const Point& a, const Point& b, const Point& c) { return cross(b - a, c - a); }

}  // namespace grsem
