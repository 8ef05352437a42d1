#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>

#include "mweights/core/error.hpp"

namespace mweights {

inline constexpr int kMaxDim = 4;

using Index = std::array<std::int64_t, kMaxDim>;
using Point = std::array<double, kMaxDim>;

inline void check_dim(int dim)
{
    if (dim < 1 || dim > kMaxDim)
        throw ConfigError("dimension " + std::to_string(dim) + " outside supported range [1, " +
                          std::to_string(kMaxDim) + "]");
}

/// Closed axis-aligned box [lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}].
struct AxisBox {
    int dim = 1;
    Point lo{};
    Point hi{};

    static AxisBox interval(double a, double b)
    {
        AxisBox box;
        box.dim = 1;
        box.lo[0] = a;
        box.hi[0] = b;
        return box;
    }

    static AxisBox cube(int dim, double a, double b)
    {
        check_dim(dim);
        AxisBox box;
        box.dim = dim;
        for (int k = 0; k < dim; ++k) {
            box.lo[k] = a;
            box.hi[k] = b;
        }
        return box;
    }

    bool empty() const
    {
        for (int k = 0; k < dim; ++k)
            if (!(hi[k] > lo[k]))
                return true;
        return false;
    }

    double volume() const
    {
        double v = 1.0;
        for (int k = 0; k < dim; ++k)
            v *= std::max(0.0, hi[k] - lo[k]);
        return v;
    }

    bool contains_origin() const
    {
        for (int k = 0; k < dim; ++k)
            if (lo[k] > 0.0 || hi[k] < 0.0)
                return false;
        return true;
    }

    /// Euclidean distance from the origin to the nearest point of the box.
    double min_radius() const
    {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) {
            double d = lo[k] > 0.0 ? lo[k] : (hi[k] < 0.0 ? -hi[k] : 0.0);
            s += d * d;
        }
        return std::sqrt(s);
    }

    double max_radius() const
    {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) {
            double d = std::max(std::abs(lo[k]), std::abs(hi[k]));
            s += d * d;
        }
        return std::sqrt(s);
    }
};

inline AxisBox intersect(const AxisBox& a, const AxisBox& b)
{
    AxisBox r;
    r.dim = a.dim;
    for (int k = 0; k < a.dim; ++k) {
        r.lo[k] = std::max(a.lo[k], b.lo[k]);
        r.hi[k] = std::min(a.hi[k], b.hi[k]);
    }
    return r;
}

/// Closed Euclidean ball centred at the origin.
struct Ball {
    double radius = 1.0;
};

using Region = std::variant<AxisBox, Ball>;

inline std::string describe(const Region& region)
{
    if (const auto* ball = std::get_if<Ball>(&region))
        return "ball(r=" + std::to_string(ball->radius) + ")";
    const auto& box = std::get<AxisBox>(region);
    std::string s = "box(";
    for (int k = 0; k < box.dim; ++k) {
        if (k)
            s += " x ";
        s += "[" + std::to_string(box.lo[k]) + "," + std::to_string(box.hi[k]) + "]";
    }
    return s + ")";
}

} // namespace mweights
