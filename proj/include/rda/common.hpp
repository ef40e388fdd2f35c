#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace rda {

using Index = int;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2 &operator+=(const Point2 &o) { x += o.x; y += o.y; return *this; }
    Point2 &operator-=(const Point2 &o) { x -= o.x; y -= o.y; return *this; }
    Point2 &operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Point2 operator+(Point2 a, const Point2 &b) { return a += b; }
inline Point2 operator-(Point2 a, const Point2 &b) { return a -= b; }
inline Point2 operator*(double s, Point2 a) { return a *= s; }
inline Point2 operator*(Point2 a, double s) { return a *= s; }
inline double dot(const Point2 &a, const Point2 &b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2 &a, const Point2 &b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2 &a) { return std::hypot(a.x, a.y); }
inline double distance(const Point2 &a, const Point2 &b) { return norm(a - b); }
inline Point2 lerp(const Point2 &a, const Point2 &b, double t) { return a + t * (b - a); }

/// Failure categories surfaced by the library; the C API maps each to a
/// status code.
enum class ErrorKind {
    InvalidArgument,
    DegenerateInterface,
    RootFindFailure,
    ProjectionDivergence,
    MultipleRoots,
    EmptySide,
    SigmaExhausted,
    PatchInfeasible,
    RankDeficient,
    SingularB,
    MissingReconstruction,
    NonPositivePenalty,
    OrphanFineDof,
    Breakdown,
    NonlinearPreconditioner,
    IndefiniteLevel,
    FactorizationFailure,
    MissingExact,
    Config,
    Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) { throw Error(kind, what); }

} // namespace rda
