#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mweights/core/error.hpp"
#include "mweights/core/grid_function.hpp"
#include "mweights/core/parallel.hpp"

namespace mweights {

enum class RieszVariant { direct, adjoint_slot1 };

inline RieszVariant parse_variant(const std::string& s)
{
    if (s == "direct")
        return RieszVariant::direct;
    if (s == "adjoint" || s == "adjoint_slot1")
        return RieszVariant::adjoint_slot1;
    throw ConfigError("unknown Riesz variant '" + s + "' (expected direct or adjoint)");
}

inline const char* variant_name(RieszVariant v)
{
    return v == RieszVariant::direct ? "direct" : "adjoint";
}

/// Bilinear first Riesz kernel in one dimension, (2x - y1 - y2) / ((x-y1)^2 + (x-y2)^2)^{3/2}.
inline double riesz_kernel(double x, double y1, double y2)
{
    const double d1 = x - y1, d2 = x - y2;
    const double r2 = d1 * d1 + d2 * d2;
    return (d1 + d2) / (r2 * std::sqrt(r2));
}

struct RieszValues {
    std::vector<double> values;
    std::vector<std::uint8_t> pv_approx; // singular cell pair omitted at this point
};

/// Midpoint double sum over the supports, weighted by exact cell masses, at the
/// given points. Direct: K(x; y1, y2). Adjoint in the first slot: K(y1; x, y2).
/// Pairs with both cells touching x are omitted, which is symmetric under
/// y -> 2x - y when x is a cell centre or a cell corner.
inline RieszValues bilinear_riesz(const GridFunction& f1, const GridFunction& f2, std::span<const double> points,
                                  RieszVariant variant)
{
    const Lattice& lat = f1.lattice();
    if (!(lat == f2.lattice()))
        throw ConfigError("Riesz inputs live on different lattices");
    if (lat.dim() != 1)
        throw ConfigError("the Riesz quadrature is implemented for n = 1 only");
    struct Node {
        std::int64_t cell;
        double y;
        double mass;
    };
    auto support = [&](const GridFunction& f) {
        std::vector<Node> out;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f[i] > 0.0)
                out.push_back({lat.cell(i)[0], lat.cell_center(i)[0], f[i] * lat.cell_volume()});
        return out;
    };
    const std::vector<Node> s1 = support(f1), s2 = support(f2);
    const double h = lat.cell_width();
    RieszValues r;
    r.values.assign(points.size(), 0.0);
    r.pv_approx.assign(points.size(), 0);
    parallel_for(points.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            const double x = points[t];
            const double u = x / h;
            const auto hi_cell = static_cast<std::int64_t>(std::floor(u));
            const std::int64_t lo_cell = (u == std::floor(u)) ? hi_cell - 1 : hi_cell;
            auto near = [&](std::int64_t c) { return c >= lo_cell && c <= hi_cell; };
            double total = 0.0;
            for (const Node& a : s1) {
                const bool a_near = near(a.cell);
                double inner = 0.0;
                for (const Node& c : s2) {
                    if (a_near && near(c.cell)) {
                        r.pv_approx[t] = 1;
                        continue;
                    }
                    inner += c.mass * (variant == RieszVariant::direct ? riesz_kernel(x, a.y, c.y) : riesz_kernel(a.y, x, c.y));
                }
                total += a.mass * inner;
            }
            r.values[t] = total;
        }
    }, 8);
    return r;
}

/// Centres of the given cells.
inline std::vector<double> cell_centres(const Lattice& lat, std::span<const std::size_t> cells)
{
    std::vector<double> out;
    out.reserve(cells.size());
    for (std::size_t c : cells)
        out.push_back(lat.cell_center(c)[0]);
    return out;
}

} // namespace mweights
