#pragma once

// Mass of the power function |x|^a over intervals, boxes and balls.
//
// One dimension uses closed forms. Boxes in higher dimension are split along
// the coordinate hyperplanes; pieces away from the origin go to adaptive
// tensor Gauss-Legendre, and the corner cube [0,s]^n at the origin uses the
// self-similarity |2x|^a = 2^a |x|^a, which turns the dyadic refinement
// towards the singularity into a geometric series that is summed exactly.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mweights/core/error.hpp"
#include "mweights/core/region.hpp"

namespace mweights {

inline constexpr double kDefaultQuadratureTolerance = 1e-10;

namespace detail {

// (exp(s*t) - 1) / s, continuous at s = 0.
inline double expm1_ratio(double s, double t)
{
    if (s == 0.0)
        return t;
    return std::expm1(s * t) / s;
}

// Integral of x^a over [u, v] with 0 <= u < v.
inline double positive_power_integral(double a, double u, double v)
{
    if (!(v > u))
        return 0.0;
    const double e = a + 1.0;
    if (u == 0.0) {
        if (e <= 0.0)
            throw ConfigError("|x|^" + std::to_string(a) + " is not integrable at the origin in dimension 1");
        return std::pow(v, e) / e;
    }
    return std::pow(u, e) * expm1_ratio(e, std::log1p((v - u) / u));
}

inline double interval_power_mass(double a, double lo, double hi)
{
    if (!(hi > lo))
        return 0.0;
    if (lo >= 0.0)
        return positive_power_integral(a, lo, hi);
    if (hi <= 0.0)
        return positive_power_integral(a, -hi, -lo);
    return positive_power_integral(a, 0.0, -lo) + positive_power_integral(a, 0.0, hi);
}

inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Tensor 8-point Gauss-Legendre rule for |x|^a on a box not containing the origin.
inline double gauss_box(double a, const AxisBox& box)
{
    const int n = box.dim;
    std::array<double, kMaxDim> mid{}, half{};
    double jac = 1.0;
    for (int k = 0; k < n; ++k) {
        mid[k] = 0.5 * (box.lo[k] + box.hi[k]);
        half[k] = 0.5 * (box.hi[k] - box.lo[k]);
        jac *= half[k];
    }
    std::array<int, kMaxDim> it{};
    double sum = 0.0;
    for (;;) {
        double r2 = 0.0;
        double w = 1.0;
        for (int k = 0; k < n; ++k) {
            const double x = mid[k] + half[k] * kGaussNodes[static_cast<std::size_t>(it[k])];
            r2 += x * x;
            w *= kGaussWeights[static_cast<std::size_t>(it[k])];
        }
        sum += w * std::pow(r2, 0.5 * a);
        int k = 0;
        while (k < n && ++it[k] == 8)
            it[k++] = 0;
        if (k == n)
            break;
    }
    return sum * jac;
}

inline AxisBox child_box(const AxisBox& box, unsigned corner)
{
    AxisBox c = box;
    for (int k = 0; k < box.dim; ++k) {
        const double m = 0.5 * (box.lo[k] + box.hi[k]);
        if (corner & (1u << k))
            c.lo[k] = m;
        else
            c.hi[k] = m;
    }
    return c;
}

inline double adaptive_box(double a, const AxisBox& box, double whole, double tol, int depth)
{
    const unsigned nchild = 1u << box.dim;
    std::array<AxisBox, 1u << kMaxDim> kids;
    std::array<double, 1u << kMaxDim> est{};
    double sum = 0.0;
    for (unsigned c = 0; c < nchild; ++c) {
        kids[c] = child_box(box, c);
        est[c] = gauss_box(a, kids[c]);
        sum += est[c];
    }
    if (depth >= 48 || std::abs(sum - whole) <= tol * std::abs(sum))
        return sum;
    double refined = 0.0;
    for (unsigned c = 0; c < nchild; ++c)
        refined += adaptive_box(a, kids[c], est[c], tol, depth + 1);
    return refined;
}

// Origin-free box (some lower corner coordinate strictly positive).
inline double smooth_box_mass(double a, const AxisBox& box, double tol)
{
    if (box.empty())
        return 0.0;
    if (box.dim == 1)
        return positive_power_integral(a, box.lo[0], box.hi[0]);
    return adaptive_box(a, box, gauss_box(a, box), tol, 0);
}

// Mass of [0,v_0] x ... x [0,v_{n-1}] minus the corner cube [0,s]^n, where
// s <= min v_k. Pieces: the first axis k with x_k > s.
inline double orthant_remainder(double a, int n, const Point& v, double s, double tol)
{
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        if (!(v[k] > s))
            continue;
        AxisBox piece;
        piece.dim = n;
        for (int j = 0; j < n; ++j) {
            piece.lo[j] = 0.0;
            piece.hi[j] = j < k ? s : v[j];
        }
        piece.lo[k] = s;
        sum += smooth_box_mass(a, piece, tol);
    }
    return sum;
}

// Integral of |x|^a over the unit cube [0,1]^n. With C = that integral,
// C = 2^{-(a+n)} C + R where R is the mass of [0,1]^n \ [0,1/2]^n.
inline double unit_corner_mass(double a, int n, double tol)
{
    if (!(a + n > 0.0))
        throw ConfigError("|x|^" + std::to_string(a) + " is not integrable at the origin in dimension " +
                          std::to_string(n));
    if (n == 1)
        return 1.0 / (a + 1.0);
    Point ones{};
    for (int k = 0; k < n; ++k)
        ones[k] = 1.0;
    const double rest = orthant_remainder(a, n, ones, 0.5, tol * 0.1);
    return rest / -std::expm1(-(a + n) * std::numbers::ln2);
}

// Box inside the closed positive orthant (lo >= 0 on every axis).
inline double positive_box_mass(double a, const AxisBox& box, double tol)
{
    if (box.empty())
        return 0.0;
    const int n = box.dim;
    bool at_origin = true;
    for (int k = 0; k < n; ++k)
        if (box.lo[k] > 0.0)
            at_origin = false;
    if (!at_origin)
        return smooth_box_mass(a, box, tol);
    if (n == 1)
        return positive_power_integral(a, 0.0, box.hi[0]);
    double s = box.hi[0];
    for (int k = 1; k < n; ++k)
        s = std::min(s, box.hi[k]);
    const double corner = std::pow(s, a + n) * unit_corner_mass(a, n, tol);
    return corner + orthant_remainder(a, n, box.hi, s, tol);
}

} // namespace detail

/// Integral of |x|^a over a closed axis-aligned box.
inline double power_mass(double a, const AxisBox& box, double rel_tol = kDefaultQuadratureTolerance)
{
    check_dim(box.dim);
    if (box.empty())
        return 0.0;
    if (box.contains_origin() && !(a > -box.dim))
        throw ConfigError("|x|^" + std::to_string(a) + " is not integrable over a region containing the origin (n=" +
                          std::to_string(box.dim) + ")");
    if (box.dim == 1)
        return detail::interval_power_mass(a, box.lo[0], box.hi[0]);

    // Reflect each orthant piece into the positive orthant.
    const int n = box.dim;
    std::array<std::array<std::array<double, 2>, 2>, kMaxDim> pieces{};
    std::array<int, kMaxDim> counts{};
    for (int k = 0; k < n; ++k) {
        const double lo = box.lo[k], hi = box.hi[k];
        if (lo >= 0.0) {
            pieces[k][0] = {lo, hi};
            counts[k] = 1;
        } else if (hi <= 0.0) {
            pieces[k][0] = {-hi, -lo};
            counts[k] = 1;
        } else {
            pieces[k][0] = {0.0, -lo};
            pieces[k][1] = {0.0, hi};
            counts[k] = 2;
        }
    }
    std::array<int, kMaxDim> it{};
    double total = 0.0;
    for (;;) {
        AxisBox piece;
        piece.dim = n;
        for (int k = 0; k < n; ++k) {
            piece.lo[k] = pieces[k][it[k]][0];
            piece.hi[k] = pieces[k][it[k]][1];
        }
        total += detail::positive_box_mass(a, piece, rel_tol);
        int k = 0;
        while (k < n && ++it[k] == counts[k])
            it[k++] = 0;
        if (k == n)
            break;
    }
    return total;
}

/// Surface measure of the unit sphere in R^n.
inline double unit_sphere_area(int dim)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

/// Integral of |x|^a over the ball B(0, r), exact.
inline double power_mass(double a, const Ball& ball, int dim)
{
    check_dim(dim);
    if (!(ball.radius > 0.0))
        return 0.0;
    if (!(a > -dim))
        throw ConfigError("|x|^" + std::to_string(a) + " is not integrable over a ball around the origin (n=" +
                          std::to_string(dim) + ")");
    return unit_sphere_area(dim) * std::pow(ball.radius, a + dim) / (a + dim);
}

inline double power_mass(double a, const Region& region, int dim, double rel_tol = kDefaultQuadratureTolerance)
{
    if (const auto* ball = std::get_if<Ball>(&region))
        return power_mass(a, *ball, dim);
    const auto& box = std::get<AxisBox>(region);
    if (box.dim != dim)
        throw ConfigError("region dimension does not match requested dimension");
    return power_mass(a, box, rel_tol);
}

namespace detail {

inline double box_ball_mass(double a, const AxisBox& box, double r, double tol, int depth)
{
    if (box.empty())
        return 0.0;
    if (box.max_radius() <= r)
        return power_mass(a, box, tol);
    if (box.min_radius() >= r)
        return 0.0;
    if (depth >= 10) {
        // Boundary leaf: full-box mass times the covered fraction on a 4^n midpoint lattice.
        const int n = box.dim;
        int inside = 0, total = 0;
        std::array<int, kMaxDim> it{};
        for (;;) {
            double r2 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double x = box.lo[k] + (it[k] + 0.5) * 0.25 * (box.hi[k] - box.lo[k]);
                r2 += x * x;
            }
            inside += r2 <= r * r;
            ++total;
            int k = 0;
            while (k < n && ++it[k] == 4)
                it[k++] = 0;
            if (k == n)
                break;
        }
        return power_mass(a, box, tol) * static_cast<double>(inside) / total;
    }
    double sum = 0.0;
    for (unsigned c = 0; c < (1u << box.dim); ++c)
        sum += box_ball_mass(a, child_box(box, c), r, tol, depth + 1);
    return sum;
}

} // namespace detail

/// Integral of |x|^a over cell ∩ support.
inline double power_mass_clipped(double a, const AxisBox& cell, const Region& support,
                                 double rel_tol = kDefaultQuadratureTolerance)
{
    if (const auto* sbox = std::get_if<AxisBox>(&support))
        return power_mass(a, intersect(cell, *sbox), rel_tol);
    const double r = std::get<Ball>(support).radius;
    if (cell.dim == 1)
        return power_mass(a, intersect(cell, AxisBox::interval(-r, r)), rel_tol);
    return detail::box_ball_mass(a, cell, r, rel_tol, 0);
}

} // namespace mweights
