#pragma once

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mweights/core/error.hpp"
#include "mweights/core/region.hpp"

namespace mweights {

inline constexpr std::int64_t pow2(int k)
{
    return std::int64_t{1} << k;
}

/// floor(a / b) for b > 0.
inline constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    return (a % b != 0 && a < 0) ? q - 1 : q;
}

/// Uniform cubic lattice of cells of side 2^{-level}. Cell c covers
/// [c_k 2^{-level}, (c_k+1) 2^{-level}) on each axis; the root box is the block of
/// `extent` cells per axis starting at cell index `lo`.
class Lattice {
public:
    Lattice() = default;

    Lattice(int dim, int level, std::int64_t lo, std::int64_t extent) : dim_(dim), level_(level), lo_(lo), extent_(extent)
    {
        check_dim(dim);
        if (level < 0 || level > 24)
            throw ConfigError("resolution level " + std::to_string(level) + " outside [0, 24]");
        if (extent < 1)
            throw ConfigError("lattice must have at least one cell per axis");
        size_ = 1;
        for (int k = 0; k < dim; ++k)
            size_ *= static_cast<std::size_t>(extent);
    }

    /// Root box [-half_side, half_side)^dim; half_side * 2^level must be an integer.
    static Lattice centered(int dim, int level, double half_side = 2.0)
    {
        if (level < 0 || level > 24)
            throw ConfigError("resolution level " + std::to_string(level) + " outside [0, 24]");
        const double cells = half_side * static_cast<double>(pow2(level));
        if (!(cells >= 1.0) || cells != std::floor(cells))
            throw ConfigError("root box half-side " + std::to_string(half_side) +
                              " is not a positive multiple of the cell width at level " + std::to_string(level));
        const auto half = static_cast<std::int64_t>(cells);
        return Lattice(dim, level, -half, 2 * half);
    }

    int dim() const { return dim_; }
    int level() const { return level_; }
    std::int64_t lo() const { return lo_; }
    std::int64_t extent() const { return extent_; }
    std::size_t size() const { return size_; }
    double cell_width() const { return std::ldexp(1.0, -level_); }
    double cell_volume() const { return std::ldexp(1.0, -level_ * dim_); }

    AxisBox box() const
    {
        AxisBox b;
        b.dim = dim_;
        for (int k = 0; k < dim_; ++k) {
            b.lo[k] = static_cast<double>(lo_) * cell_width();
            b.hi[k] = static_cast<double>(lo_ + extent_) * cell_width();
        }
        return b;
    }

    // Axis 0 varies slowest.
    std::size_t flat(const Index& cell) const
    {
        std::size_t idx = 0;
        for (int k = 0; k < dim_; ++k)
            idx = idx * static_cast<std::size_t>(extent_) + static_cast<std::size_t>(cell[k] - lo_);
        return idx;
    }

    Index cell(std::size_t flat_index) const
    {
        Index c{};
        for (int k = dim_ - 1; k >= 0; --k) {
            c[k] = lo_ + static_cast<std::int64_t>(flat_index % static_cast<std::size_t>(extent_));
            flat_index /= static_cast<std::size_t>(extent_);
        }
        return c;
    }

    bool contains(const Index& cell) const
    {
        for (int k = 0; k < dim_; ++k)
            if (cell[k] < lo_ || cell[k] >= lo_ + extent_)
                return false;
        return true;
    }

    AxisBox cell_box(std::size_t flat_index) const
    {
        const Index c = cell(flat_index);
        AxisBox b;
        b.dim = dim_;
        const double h = cell_width();
        for (int k = 0; k < dim_; ++k) {
            b.lo[k] = static_cast<double>(c[k]) * h;
            b.hi[k] = static_cast<double>(c[k] + 1) * h;
        }
        return b;
    }

    Point cell_center(std::size_t flat_index) const
    {
        const Index c = cell(flat_index);
        Point p{};
        const double h = cell_width();
        for (int k = 0; k < dim_; ++k)
            p[k] = (static_cast<double>(c[k]) + 0.5) * h;
        return p;
    }

    bool operator==(const Lattice& o) const
    {
        return dim_ == o.dim_ && level_ == o.level_ && lo_ == o.lo_ && extent_ == o.extent_;
    }

private:
    int dim_ = 1;
    int level_ = 0;
    std::int64_t lo_ = 0;
    std::int64_t extent_ = 1;
    std::size_t size_ = 1;
};

/// One member of the shifted dyadic family. Axes in `shift_mask` carry the
/// one-third shift with sign alternating by generation; the shift is rounded to
/// whole cells of generation `anchor`, which keeps every cube cell-aligned and
/// the grid exactly nested.
struct GridId {
    unsigned shift_mask = 0;
    int anchor = 0;

    bool standard() const { return shift_mask == 0; }
    bool shifted(int axis) const { return (shift_mask >> axis) & 1u; }
    std::string label() const { return standard() ? "std" : "shift:" + std::to_string(shift_mask); }
    bool operator==(const GridId& o) const
    {
        return shift_mask == o.shift_mask && (standard() || anchor == o.anchor);
    }
};

/// Lower-corner offset, in cells of generation `anchor`, of generation-g cubes on
/// a shifted axis: the nearest integer to (-1)^g 2^{anchor-g} / 3.
inline std::int64_t third_shift(int g, int anchor)
{
    if (g >= anchor)
        return 0;
    const int depth = anchor - g;
    const std::int64_t w = pow2(depth);
    const std::int64_t r = (depth % 2 == 0) ? (w - 1) / 3 : (w + 1) / 3;
    return ((g % 2) + 2) % 2 == 0 ? r : -r;
}

/// A cube of a (possibly shifted) dyadic grid: side 2^{-generation}.
struct DyadicCube {
    int generation = 0;
    Index index{};
    GridId grid{};
    int dim = 1;

    bool operator==(const DyadicCube& o) const
    {
        if (generation != o.generation || !(grid == o.grid) || dim != o.dim)
            return false;
        for (int k = 0; k < dim; ++k)
            if (index[k] != o.index[k])
                return false;
        return true;
    }
};

namespace cube {

/// Finest resolution at which the cube's corners are integers.
inline int resolution(const DyadicCube& q)
{
    return q.grid.standard() ? q.generation : std::max(q.generation, q.grid.anchor);
}

inline std::int64_t axis_offset(const GridId& grid, int axis, int g, int res)
{
    if (!grid.shifted(axis) || g >= grid.anchor)
        return 0;
    return third_shift(g, grid.anchor) * pow2(res - grid.anchor);
}

/// Lower corner along `axis` in units of 2^{-res}; requires res >= resolution(q).
inline std::int64_t lower(const DyadicCube& q, int axis, int res)
{
    return axis_offset(q.grid, axis, q.generation, res) + q.index[axis] * pow2(res - q.generation);
}

inline std::int64_t side(const DyadicCube& q, int res)
{
    return pow2(res - q.generation);
}

/// Index of the generation-g cube of `grid` containing the unit cell `pos` at resolution res.
inline std::int64_t locate(const GridId& grid, int axis, int g, std::int64_t pos, int res)
{
    return floor_div(pos - axis_offset(grid, axis, g, res), pow2(res - g));
}

inline AxisBox bounds(const DyadicCube& q)
{
    const int res = resolution(q);
    AxisBox b;
    b.dim = q.dim;
    for (int k = 0; k < q.dim; ++k) {
        b.lo[k] = std::ldexp(static_cast<double>(lower(q, k, res)), -res);
        b.hi[k] = std::ldexp(static_cast<double>(lower(q, k, res) + side(q, res)), -res);
    }
    return b;
}

inline double volume(const DyadicCube& q)
{
    return std::ldexp(1.0, -q.generation * q.dim);
}

inline DyadicCube parent(const DyadicCube& q)
{
    const int res = resolution(q);
    DyadicCube p = q;
    p.generation = q.generation - 1;
    for (int k = 0; k < q.dim; ++k)
        p.index[k] = locate(q.grid, k, p.generation, lower(q, k, res), res);
    return p;
}

inline std::vector<DyadicCube> children(const DyadicCube& q)
{
    DyadicCube probe = q;
    probe.generation = q.generation + 1;
    const int res = resolution(probe);
    std::vector<DyadicCube> out;
    out.reserve(std::size_t{1} << q.dim);
    const std::int64_t half = pow2(res - probe.generation);
    for (unsigned c = 0; c < (1u << q.dim); ++c) {
        DyadicCube child = probe;
        for (int k = 0; k < q.dim; ++k) {
            const std::int64_t pos = lower(q, k, res) + ((c >> k) & 1u ? half : 0);
            child.index[k] = locate(q.grid, k, child.generation, pos, res);
        }
        out.push_back(child);
    }
    return out;
}

/// Q ⊆ R for cubes of possibly different grids (geometric containment).
inline bool contains(const DyadicCube& outer, const DyadicCube& inner)
{
    const int res = std::max(resolution(outer), resolution(inner));
    for (int k = 0; k < outer.dim; ++k) {
        const std::int64_t a0 = lower(outer, k, res), a1 = a0 + side(outer, res);
        const std::int64_t b0 = lower(inner, k, res), b1 = b0 + side(inner, res);
        if (b0 < a0 || b1 > a1)
            return false;
    }
    return true;
}

inline bool intersects(const DyadicCube& a, const DyadicCube& b)
{
    const int res = std::max(resolution(a), resolution(b));
    for (int k = 0; k < a.dim; ++k) {
        const std::int64_t a0 = lower(a, k, res), a1 = a0 + side(a, res);
        const std::int64_t b0 = lower(b, k, res), b1 = b0 + side(b, res);
        if (b1 <= a0 || a1 <= b0)
            return false;
    }
    return true;
}

/// Cell range [first, first + count) of the cube along `axis` on lattice L.
/// Rejects cubes finer than the lattice and cubes of grids anchored elsewhere.
struct CellSpan {
    std::int64_t first;
    std::int64_t count;
};

inline CellSpan cell_span(const DyadicCube& q, int axis, const Lattice& lat)
{
    if (q.generation > lat.level())
        throw ConfigError("cube generation " + std::to_string(q.generation) + " is finer than lattice resolution " +
                          std::to_string(lat.level()));
    if (!q.grid.standard() && q.grid.anchor != lat.level())
        throw ConfigError("shifted grid anchored at generation " + std::to_string(q.grid.anchor) +
                          " is not cell-aligned on a lattice of resolution " + std::to_string(lat.level()));
    return {lower(q, axis, lat.level()), side(q, lat.level())};
}

} // namespace cube

/// The 2^n grids obtained by shifting a subset of axes by one third.
class ShiftedGridFamily {
public:
    ShiftedGridFamily(int dim, int anchor) : dim_(dim), anchor_(anchor) { check_dim(dim); }

    int dim() const { return dim_; }
    int anchor() const { return anchor_; }
    std::size_t size() const { return std::size_t{1} << dim_; }

    std::vector<GridId> members() const
    {
        std::vector<GridId> out;
        for (unsigned m = 0; m < (1u << dim_); ++m)
            out.push_back(GridId{m, anchor_});
        return out;
    }

    GridId member(unsigned mask) const { return GridId{mask, anchor_}; }

    /// Smallest cube of any member containing the cell-aligned cube with lower
    /// corner `corner` and side `side_cells` (both in cells at resolution anchor).
    /// Searches generations down to `coarsest`.
    std::optional<DyadicCube> containing_cube(const Index& corner, std::int64_t side_cells, int coarsest = -16) const
    {
        std::optional<DyadicCube> best;
        for (const GridId& grid : members()) {
            for (int g = anchor_; g >= coarsest; --g) {
                if (pow2(anchor_ - g) < side_cells)
                    continue;
                DyadicCube q;
                q.generation = g;
                q.grid = grid;
                q.dim = dim_;
                bool ok = true;
                for (int k = 0; k < dim_; ++k) {
                    q.index[k] = cube::locate(grid, k, g, corner[k], anchor_);
                    const std::int64_t lo = cube::lower(q, k, anchor_);
                    if (corner[k] + side_cells > lo + cube::side(q, anchor_))
                        ok = false;
                }
                if (ok) {
                    if (!best || g > best->generation)
                        best = q;
                    break;
                }
            }
        }
        return best;
    }

private:
    int dim_;
    int anchor_;
};

} // namespace mweights
