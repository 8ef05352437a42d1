#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mweights/core/error.hpp"
#include "mweights/core/lattice.hpp"

namespace mweights {

/// Cubes of one grid, generations g_min..g_max, that meet the root box of a
/// lattice. Cubes are addressed per generation by a local flat index.
class GridLevels {
public:
    GridLevels(const Lattice& lat, GridId grid, int g_min, int g_max) : lat_(lat), grid_(grid), g_min_(g_min), g_max_(g_max)
    {
        if (g_max > lat.level())
            throw ConfigError("finest generation " + std::to_string(g_max) + " exceeds lattice resolution " +
                              std::to_string(lat.level()));
        if (g_min > g_max)
            throw ConfigError("empty generation range");
        if (!grid.standard() && grid.anchor != lat.level())
            throw ConfigError("shifted grid anchored at " + std::to_string(grid.anchor) +
                              " does not match lattice resolution " + std::to_string(lat.level()));
        const int n = lat.dim();
        const int L = lat.level();
        levels_.resize(static_cast<std::size_t>(g_max - g_min + 1));
        for (int g = g_min; g <= g_max; ++g) {
            Level& lv = level(g);
            lv.stride.fill(0);
            std::size_t total = 1;
            for (int k = 0; k < n; ++k) {
                const std::int64_t j0 = cube::locate(grid, k, g, lat.lo(), L);
                const std::int64_t j1 = cube::locate(grid, k, g, lat.lo() + lat.extent() - 1, L);
                lv.jlo[k] = j0;
                lv.count[k] = j1 - j0 + 1;
                lv.cell_to_cube[k].resize(static_cast<std::size_t>(lat.extent()));
                for (std::int64_t c = 0; c < lat.extent(); ++c)
                    lv.cell_to_cube[k][static_cast<std::size_t>(c)] =
                        static_cast<std::uint32_t>(cube::locate(grid, k, g, lat.lo() + c, L) - j0);
                total *= static_cast<std::size_t>(lv.count[k]);
            }
            std::size_t s = 1;
            for (int k = n - 1; k >= 0; --k) {
                lv.stride[k] = s;
                s *= static_cast<std::size_t>(lv.count[k]);
            }
            lv.total = total;
            lv.cube_cells = std::ldexp(1.0, (L - g) * n);
        }
        for (int g = g_min + 1; g <= g_max; ++g) {
            Level& lv = level(g);
            const Level& up = level(g - 1);
            for (int k = 0; k < n; ++k) {
                lv.parent_axis[k].resize(static_cast<std::size_t>(lv.count[k]));
                for (std::int64_t jl = 0; jl < lv.count[k]; ++jl) {
                    DyadicCube q = make_cube(g, k, lv.jlo[k] + jl);
                    std::int64_t first = std::max(cube::lower(q, k, L), lat.lo());
                    lv.parent_axis[k][static_cast<std::size_t>(jl)] =
                        static_cast<std::uint32_t>(cube::locate(grid, k, g - 1, first, L) - up.jlo[k]);
                }
            }
        }
    }

    const Lattice& lattice() const { return lat_; }
    const GridId& grid() const { return grid_; }
    int g_min() const { return g_min_; }
    int g_max() const { return g_max_; }
    std::size_t cube_count(int g) const { return level(g).total; }
    double cube_cells(int g) const { return level(g).cube_cells; }

    std::size_t cube_of_cell(int g, const Index& cell) const
    {
        const Level& lv = level(g);
        std::size_t idx = 0;
        for (int k = 0; k < lat_.dim(); ++k)
            idx += lv.cell_to_cube[k][static_cast<std::size_t>(cell[k] - lat_.lo())] * lv.stride[k];
        return idx;
    }

    std::size_t parent(int g, std::size_t local) const
    {
        const Level& lv = level(g);
        const Level& up = level(g - 1);
        std::size_t idx = 0;
        for (int k = 0; k < lat_.dim(); ++k) {
            const std::size_t jl = (local / lv.stride[k]) % static_cast<std::size_t>(lv.count[k]);
            idx += lv.parent_axis[k][jl] * up.stride[k];
        }
        return idx;
    }

    DyadicCube cube(int g, std::size_t local) const
    {
        const Level& lv = level(g);
        DyadicCube q;
        q.generation = g;
        q.grid = grid_;
        q.dim = lat_.dim();
        for (int k = 0; k < lat_.dim(); ++k)
            q.index[k] = lv.jlo[k] + static_cast<std::int64_t>((local / lv.stride[k]) % static_cast<std::size_t>(lv.count[k]));
        return q;
    }

    /// Local index of a cube of this grid, or npos when it does not meet the box.
    std::size_t local_index(const DyadicCube& q) const
    {
        if (q.generation < g_min_ || q.generation > g_max_ || !(q.grid == grid_))
            return npos;
        const Level& lv = level(q.generation);
        std::size_t idx = 0;
        for (int k = 0; k < lat_.dim(); ++k) {
            const std::int64_t jl = q.index[k] - lv.jlo[k];
            if (jl < 0 || jl >= lv.count[k])
                return npos;
            idx += static_cast<std::size_t>(jl) * lv.stride[k];
        }
        return idx;
    }

    /// True when the cube lies entirely inside the root box.
    bool inside_box(int g, std::size_t local) const
    {
        const DyadicCube q = cube(g, local);
        for (int k = 0; k < lat_.dim(); ++k) {
            const auto span = cube::cell_span(q, k, lat_);
            if (span.first < lat_.lo() || span.first + span.count > lat_.lo() + lat_.extent())
                return false;
        }
        return true;
    }

    /// Per-cube sums of a per-cell array, for every generation (bottom-up).
    std::vector<std::vector<double>> sums(std::span<const double> per_cell) const
    {
        if (per_cell.size() != lat_.size())
            throw ConfigError("per-cell array does not match lattice");
        std::vector<std::vector<double>> out(levels_.size());
        for (int g = g_min_; g <= g_max_; ++g)
            out[static_cast<std::size_t>(g - g_min_)].assign(cube_count(g), 0.0);
        auto& finest = out.back();
        for (std::size_t i = 0; i < lat_.size(); ++i)
            finest[cube_of_cell(g_max_, lat_.cell(i))] += per_cell[i];
        for (int g = g_max_; g > g_min_; --g) {
            const auto& lo = out[static_cast<std::size_t>(g - g_min_)];
            auto& hi = out[static_cast<std::size_t>(g - 1 - g_min_)];
            for (std::size_t q = 0; q < lo.size(); ++q)
                hi[parent(g, q)] += lo[q];
        }
        return out;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct Level {
        std::array<std::int64_t, kMaxDim> jlo{};
        std::array<std::int64_t, kMaxDim> count{};
        std::array<std::size_t, kMaxDim> stride{};
        std::array<std::vector<std::uint32_t>, kMaxDim> cell_to_cube;
        std::array<std::vector<std::uint32_t>, kMaxDim> parent_axis;
        std::size_t total = 0;
        double cube_cells = 1.0;
    };

    Level& level(int g) { return levels_[static_cast<std::size_t>(g - g_min_)]; }
    const Level& level(int g) const { return levels_[static_cast<std::size_t>(g - g_min_)]; }

    DyadicCube make_cube(int g, int axis, std::int64_t j) const
    {
        DyadicCube q;
        q.generation = g;
        q.grid = grid_;
        q.dim = lat_.dim();
        q.index[axis] = j;
        return q;
    }

    Lattice lat_;
    GridId grid_;
    int g_min_;
    int g_max_;
    std::vector<Level> levels_;
};

} // namespace mweights
