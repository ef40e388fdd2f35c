#pragma once

#include <array>
#include <vector>

#include "rda/common.hpp"

namespace rda {

struct QuadRule {
    std::vector<Point2> points;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    bool empty() const { return weights.empty(); }
    double total_weight() const;
    void append(const QuadRule &other);
};

/// Gauss-Legendre rule with n points on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached; thread-safe after first use for a given n.
const GaussLegendre &gauss_legendre(int n);

/// Collapsed (conical product) Gauss rule on the reference triangle
/// {(s,t): s,t >= 0, s+t <= 1}, exact for total degree <= order.
const QuadRule &reference_triangle_rule(int order);

/// Reference rule mapped affinely onto triangle (a, b, c).
QuadRule triangle_rule(const Point2 &a, const Point2 &b, const Point2 &c, int order);

/// Appends the mapped reference rule for (a, b, c) to `out`.
void append_triangle_rule(QuadRule &out, const Point2 &a, const Point2 &b, const Point2 &c, int order);

/// n-point Gauss-Legendre rule on the segment [a, b].
void append_segment_rule(QuadRule &out, const Point2 &a, const Point2 &b, int n);

} // namespace rda
