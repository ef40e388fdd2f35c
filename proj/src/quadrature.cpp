#include "rda/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include <boost/math/special_functions/legendre.hpp>

namespace rda {

double QuadRule::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

void QuadRule::append(const QuadRule &other)
{
    points.insert(points.end(), other.points.begin(), other.points.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

namespace {

GaussLegendre make_gauss_legendre(int n)
{
    GaussLegendre rule;
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    // legendre_p_zeros returns the non-negative roots in ascending order
    std::vector<double> nodes;
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
        if (*it != 0.0)
            nodes.push_back(-*it);
    for (double z : zeros)
        nodes.push_back(z);
    for (double x : nodes) {
        const double dp = boost::math::legendre_p_prime(n, x);
        rule.nodes.push_back(x);
        rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    }
    return rule;
}

QuadRule make_reference_triangle(int order)
{
    // s = u, t = v (1 - u), Jacobian (1 - u)
    const int n = std::max(1, (order + 2 + 1) / 2);
    const auto &gl = gauss_legendre(n);
    QuadRule rule;
    for (int i = 0; i < n; ++i) {
        const double u = 0.5 * (gl.nodes[i] + 1.0);
        const double wu = 0.5 * gl.weights[i];
        for (int j = 0; j < n; ++j) {
            const double v = 0.5 * (gl.nodes[j] + 1.0);
            const double wv = 0.5 * gl.weights[j];
            rule.points.push_back({u, v * (1.0 - u)});
            rule.weights.push_back(wu * wv * (1.0 - u));
        }
    }
    return rule;
}

template <class T, class Make>
const T &cached(std::map<int, std::unique_ptr<T>> &cache, std::mutex &mutex, int key, Make make)
{
    std::lock_guard lock(mutex);
    auto &slot = cache[key];
    if (!slot)
        slot = std::make_unique<T>(make(key));
    return *slot;
}

} // namespace

const GaussLegendre &gauss_legendre(int n)
{
    if (n < 1)
        fail(ErrorKind::InvalidArgument, "Gauss-Legendre rule needs at least one point");
    static std::map<int, std::unique_ptr<GaussLegendre>> cache;
    static std::mutex mutex;
    return cached(cache, mutex, n, make_gauss_legendre);
}

const QuadRule &reference_triangle_rule(int order)
{
    if (order < 0)
        fail(ErrorKind::InvalidArgument, "negative quadrature order");
    static std::map<int, std::unique_ptr<QuadRule>> cache;
    static std::mutex mutex;
    return cached(cache, mutex, order, make_reference_triangle);
}

void append_triangle_rule(QuadRule &out, const Point2 &a, const Point2 &b, const Point2 &c, int order)
{
    const auto &ref = reference_triangle_rule(order);
    const Point2 e1 = b - a;
    const Point2 e2 = c - a;
    const double jac = std::abs(cross(e1, e2));
    for (std::size_t q = 0; q < ref.size(); ++q) {
        const Point2 &r = ref.points[q];
        out.points.push_back(a + r.x * e1 + r.y * e2);
        out.weights.push_back(ref.weights[q] * jac);
    }
}

QuadRule triangle_rule(const Point2 &a, const Point2 &b, const Point2 &c, int order)
{
    QuadRule rule;
    append_triangle_rule(rule, a, b, c, order);
    return rule;
}

void append_segment_rule(QuadRule &out, const Point2 &a, const Point2 &b, int n)
{
    const auto &gl = gauss_legendre(n);
    const double half = 0.5 * distance(a, b);
    for (int q = 0; q < n; ++q) {
        out.points.push_back(lerp(a, b, 0.5 * (gl.nodes[q] + 1.0)));
        out.weights.push_back(gl.weights[q] * half);
    }
}

} // namespace rda
