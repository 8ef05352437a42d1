#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mweights/core/error.hpp"
#include "mweights/core/grid_function.hpp"
#include "mweights/core/log.hpp"
#include "mweights/core/parallel.hpp"
#include "mweights/core/pyramid.hpp"
#include "mweights/weights/weight.hpp"

namespace mweights {

// Coarsest generation scanned by the maximal operators. Every grid has a cube
// covering the default box [-2,2)^n by generation -3; above that the averages
// of a function supported in the box only decrease.
inline constexpr int kMaximalTopGeneration = -5;

inline const Lattice& shared_lattice(std::span<const GridFunction> fs)
{
    if (fs.empty())
        throw ConfigError("operator needs at least one input function");
    for (const GridFunction& f : fs)
        if (!(f.lattice() == fs.front().lattice()))
            throw ConfigError("input functions live on different lattices");
    return fs.front().lattice();
}

namespace detail {

// prod_i avg_Q f_i for every cube of every generation.
inline std::vector<std::vector<double>> product_of_averages(const GridLevels& levels, std::span<const GridFunction> fs)
{
    std::vector<std::vector<double>> prod;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        auto s = levels.sums(fs[i].values());
        for (int g = levels.g_min(); g <= levels.g_max(); ++g) {
            auto& level = s[static_cast<std::size_t>(g - levels.g_min())];
            const double cells = levels.cube_cells(g);
            for (double& x : level)
                x /= cells;
        }
        if (i == 0) {
            prod = std::move(s);
            continue;
        }
        for (std::size_t gi = 0; gi < prod.size(); ++gi)
            for (std::size_t q = 0; q < prod[gi].size(); ++q)
                prod[gi][q] *= s[gi][q];
    }
    return prod;
}

// Per-cell maximum of `cube_value` along the ancestor chain, top-down.
inline std::vector<double> ancestor_max(const GridLevels& levels, std::vector<std::vector<double>> cube_value)
{
    for (int g = levels.g_min() + 1; g <= levels.g_max(); ++g) {
        auto& cur = cube_value[static_cast<std::size_t>(g - levels.g_min())];
        const auto& up = cube_value[static_cast<std::size_t>(g - 1 - levels.g_min())];
        for (std::size_t q = 0; q < cur.size(); ++q)
            cur[q] = std::max(cur[q], up[levels.parent(g, q)]);
    }
    const Lattice& lat = levels.lattice();
    const auto& finest = cube_value.back();
    std::vector<double> out(lat.size());
    parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            out[i] = finest[levels.cube_of_cell(levels.g_max(), lat.cell(i))];
    }, 4096);
    return out;
}

} // namespace detail

/// M^D(f)(x): max over cubes Q of `grid` containing x, generations g_min..L, of
/// prod_i avg_Q f_i.
inline GridFunction dyadic_maximal(std::span<const GridFunction> fs, const GridId& grid, int g_min = kMaximalTopGeneration)
{
    const Lattice& lat = shared_lattice(fs);
    const GridLevels levels(lat, grid, g_min, lat.level());
    return GridFunction(lat, detail::ancestor_max(levels, detail::product_of_averages(levels, fs)));
}

struct MaximalBracket {
    GridFunction lower; // max over the shifted grids
    GridFunction upper; // 6^{mn} times the sum over the shifted grids
};

inline MaximalBracket multilinear_maximal(std::span<const GridFunction> fs, int g_min = kMaximalTopGeneration)
{
    const Lattice& lat = shared_lattice(fs);
    const int n = lat.dim();
    const int m = static_cast<int>(fs.size());
    std::vector<double> lo(lat.size(), 0.0), hi(lat.size(), 0.0);
    for (const GridId& grid : ShiftedGridFamily(n, lat.level()).members()) {
        const GridFunction d = dyadic_maximal(fs, grid, g_min);
        for (std::size_t i = 0; i < lo.size(); ++i) {
            lo[i] = std::max(lo[i], d[i]);
            hi[i] += d[i];
        }
    }
    const double c = std::pow(6.0, m * n);
    for (double& x : hi)
        x *= c;
    return {GridFunction(lat, std::move(lo)), GridFunction(lat, std::move(hi))};
}

/// M^D_w f(x): max over dyadic Q containing x of (1/w(Q)) int_Q |f| w. Power
/// weights use the full w(Q); grid weights vanish outside their box. Cubes of
/// zero w-mass contribute 0.
inline GridFunction weighted_dyadic_maximal(const GridFunction& f, const Weight& w, const GridId& grid,
                                            int g_min = kMaximalTopGeneration)
{
    const Lattice& lat = f.lattice();
    const std::vector<double> wm = w.cell_masses(lat);
    std::vector<double> fw(lat.size());
    for (std::size_t i = 0; i < fw.size(); ++i)
        fw[i] = f[i] * wm[i];
    const GridLevels levels(lat, grid, g_min, lat.level());
    auto num = levels.sums(fw);
    auto den = levels.sums(wm);
    if (w.is_power()) {
        // analytic weights live on all of R^n; f vanishes outside the box
        for (int g = levels.g_min(); g < levels.g_max(); ++g)
            for (std::size_t q = 0; q < levels.cube_count(g); ++q)
                if (!levels.inside_box(g, q))
                    den[static_cast<std::size_t>(g - levels.g_min())][q] =
                        w.coefficient() * power_mass(w.exponent(), cube::bounds(levels.cube(g, q)));
    }
    std::size_t empty = 0;
    for (std::size_t gi = 0; gi < num.size(); ++gi)
        for (std::size_t q = 0; q < num[gi].size(); ++q) {
            if (den[gi][q] > 0.0) {
                num[gi][q] /= den[gi][q];
            } else {
                num[gi][q] = 0.0;
                ++empty;
            }
        }
    if (empty > 0)
        log::info(std::to_string(empty) + " cubes with zero weight mass skipped in the weighted maximal function");
    return GridFunction(lat, detail::ancestor_max(levels, std::move(num)));
}

} // namespace mweights
