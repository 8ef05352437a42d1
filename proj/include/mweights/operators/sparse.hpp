#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mweights/core/error.hpp"
#include "mweights/core/grid_function.hpp"
#include "mweights/core/pyramid.hpp"
#include "mweights/operators/maximal.hpp"

namespace mweights {

struct SparseCube {
    DyadicCube cube;
    int level = 0;                        // largest k with prod > a^k lambda_0
    std::size_t parent = npos;            // nearest selected ancestor
    std::vector<std::size_t> holes;       // selected cubes whose nearest selected ancestor is this one
    std::int64_t e_cells = 0;             // |E_Q| in lattice cells, counted geometrically
    std::int64_t box_e_cells = 0;         // cells of E_Q inside the lattice box

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Selected cubes of one grid. E_Q = Q minus its holes; the E_Q partition Q_0.
class SparseFamily {
public:
    SparseFamily(Lattice lat, GridId grid, DyadicCube root, double ratio, double lambda0, std::vector<SparseCube> cubes)
        : lat_(std::move(lat)), grid_(grid), root_(root), ratio_(ratio), lambda0_(lambda0), cubes_(std::move(cubes))
    {
    }

    const Lattice& lattice() const { return lat_; }
    const GridId& grid() const { return grid_; }
    const DyadicCube& root() const { return root_; }
    double ratio() const { return ratio_; }
    double lambda0() const { return lambda0_; }
    const std::vector<SparseCube>& cubes() const { return cubes_; }
    std::size_t size() const { return cubes_.size(); }

    std::int64_t cube_cells(std::size_t i) const { return pow2((lat_.level() - cubes_[i].cube.generation) * lat_.dim()); }

    /// E_Q as lattice cells (cells outside the box are not representable).
    CellRegion majorizing_set(std::size_t i) const
    {
        const SparseCube& s = cubes_[i];
        std::vector<std::size_t> cells;
        for_each_cell_in(s.cube, lat_, [&](std::size_t c) {
            const Index idx = lat_.cell(c);
            for (std::size_t h : s.holes)
                if (cell_in(cubes_[h].cube, idx))
                    return;
            cells.push_back(c);
        });
        return CellRegion(lat_, std::move(cells));
    }

    nlohmann::json json() const
    {
        nlohmann::json list = nlohmann::json::array();
        for (const SparseCube& s : cubes_) {
            nlohmann::json j = nlohmann::json::array();
            for (int k = 0; k < lat_.dim(); ++k)
                j.push_back(s.cube.index[k]);
            list.push_back({{"grid", grid_.label()}, {"g", s.cube.generation}, {"j", j}, {"E_cells", s.e_cells}});
        }
        return {{"ratio", ratio_}, {"lambda0", lambda0_}, {"L", lat_.level()}, {"cubes", list}};
    }

private:
    bool cell_in(const DyadicCube& q, const Index& cell) const
    {
        for (int k = 0; k < lat_.dim(); ++k) {
            const auto span = cube::cell_span(q, k, lat_);
            if (cell[k] < span.first || cell[k] >= span.first + span.count)
                return false;
        }
        return true;
    }

    Lattice lat_;
    GridId grid_;
    DyadicCube root_;
    double ratio_;
    double lambda0_;
    std::vector<SparseCube> cubes_;
};

/// Smallest cube of `grid` containing the whole lattice box, if any.
inline std::optional<DyadicCube> covering_cube(const Lattice& lat, const GridId& grid, int coarsest = -16)
{
    for (int g = lat.level(); g >= coarsest; --g) {
        DyadicCube q;
        q.generation = g;
        q.grid = grid;
        q.dim = lat.dim();
        bool ok = true;
        for (int k = 0; k < lat.dim() && ok; ++k) {
            const std::int64_t a = cube::locate(grid, k, g, lat.lo(), lat.level());
            const std::int64_t b = cube::locate(grid, k, g, lat.lo() + lat.extent() - 1, lat.level());
            ok = a == b;
            q.index[k] = a;
        }
        if (ok)
            return q;
    }
    return std::nullopt;
}

namespace detail {

// Largest k >= 0 with a^k lambda0 < x (0 when x <= a lambda0).
inline int stopping_level(double x, double lambda0, double a)
{
    if (!(x > lambda0 * a))
        return 0;
    int k = static_cast<int>(std::floor(std::log(x / lambda0) / std::log(a)));
    k = std::max(k, 1);
    while (k > 1 && !(std::pow(a, k) * lambda0 < x))
        --k;
    while (std::pow(a, k + 1) * lambda0 < x)
        ++k;
    return k;
}

} // namespace detail

/// Level-set stopping construction inside root: Q is selected when prod avg_Q g_i
/// exceeds a^k lambda_0 for some k that no strict ancestor inside root exceeds.
/// Sparseness |E_Q| >= |Q|/2 is verified; failure throws InvariantError.
inline SparseFamily build_sparse_family(std::span<const GridFunction> gs, const GridId& grid, double a,
                                        const DyadicCube& root)
{
    const Lattice& lat = shared_lattice(gs);
    const int n = lat.dim();
    const int m = static_cast<int>(gs.size());
    const int L = lat.level();
    if (!(a > std::ldexp(1.0, m * n)))
        throw ConfigError("stopping ratio " + std::to_string(a) + " must exceed 2^{mn} = " +
                          std::to_string(std::ldexp(1.0, m * n)));
    if (!(root.grid == grid) || root.dim != n)
        throw ConfigError("root cube does not belong to the requested grid");
    for (const GridFunction& g : gs) {
        double outside = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Index c = lat.cell(i);
            bool in = true;
            for (int k = 0; k < n; ++k) {
                const auto span = cube::cell_span(root, k, lat);
                in = in && c[k] >= span.first && c[k] < span.first + span.count;
            }
            if (!in)
                outside += g[i];
        }
        if (outside > 0.0)
            throw ConfigError("root cube does not contain the support of the inputs");
    }

    const int g0 = root.generation;
    const GridLevels levels(lat, grid, g0, L);
    const auto prod = detail::product_of_averages(levels, gs);
    const std::size_t root_local = levels.local_index(root);
    if (root_local == GridLevels::npos)
        throw ConfigError("root cube does not meet the lattice box");
    const double lambda0 = prod[0][root_local];

    std::vector<SparseCube> cubes;
    SparseCube top;
    top.cube = root;
    cubes.push_back(top);

    if (lambda0 > 0.0) {
        // per cube: inside root?, max prod over strict ancestors, nearest selected ancestor
        constexpr std::size_t none = SparseCube::npos;
        std::vector<std::uint8_t> inside_prev(levels.cube_count(g0), 0);
        inside_prev[root_local] = 1;
        std::vector<double> anc_prev(levels.cube_count(g0), 0.0);
        std::vector<std::size_t> owner_prev(levels.cube_count(g0), none);
        owner_prev[root_local] = 0;
        // the root's own product seeds its children
        std::vector<double> through_prev(levels.cube_count(g0), 0.0);
        through_prev[root_local] = lambda0;
        for (int g = g0 + 1; g <= L; ++g) {
            const std::size_t count = levels.cube_count(g);
            const auto& pg = prod[static_cast<std::size_t>(g - g0)];
            std::vector<std::uint8_t> inside(count, 0);
            std::vector<double> through(count, 0.0);
            std::vector<std::size_t> owner(count, none);
            for (std::size_t q = 0; q < count; ++q) {
                const std::size_t par = levels.parent(g, q);
                if (!inside_prev[par])
                    continue;
                inside[q] = 1;
                const double anc = through_prev[par];
                owner[q] = owner_prev[par];
                through[q] = std::max(anc, pg[q]);
                const int lev_q = detail::stopping_level(pg[q], lambda0, a);
                const int lev_anc = detail::stopping_level(anc, lambda0, a);
                if (lev_q > lev_anc) {
                    SparseCube s;
                    s.cube = levels.cube(g, q);
                    s.level = lev_q;
                    s.parent = owner[q];
                    cubes[s.parent].holes.push_back(cubes.size());
                    owner[q] = cubes.size();
                    cubes.push_back(std::move(s));
                }
            }
            inside_prev = std::move(inside);
            through_prev = std::move(through);
            owner_prev = std::move(owner);
        }
        // cells of E_Q inside the box: each cell belongs to its deepest selected cube
        for (std::size_t q = 0; q < owner_prev.size(); ++q)
            if (inside_prev[q])
                ++cubes[owner_prev[q]].box_e_cells;
        cubes[0].level = 0;
    } else {
        std::int64_t cells = 0;
        for_each_cell_in(root, lat, [&](std::size_t) { ++cells; });
        cubes[0].box_e_cells = cells;
    }

    for (SparseCube& s : cubes) {
        std::int64_t e = pow2((L - s.cube.generation) * n);
        for (std::size_t h : s.holes)
            e -= pow2((L - cubes[h].cube.generation) * n);
        s.e_cells = e;
    }
    SparseFamily fam(lat, grid, root, a, lambda0, std::move(cubes));

    // verification
    std::int64_t box_cells = 0;
    for_each_cell_in(root, lat, [&](std::size_t) { ++box_cells; });
    std::int64_t owned = 0;
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const SparseCube& s = fam.cubes()[i];
        owned += s.box_e_cells;
        if (s.e_cells < 0 || 2 * s.e_cells < fam.cube_cells(i))
            throw InvariantError("sparseness fails: |E_Q| = " + std::to_string(s.e_cells) + " of " +
                                 std::to_string(fam.cube_cells(i)) + " cells at generation " +
                                 std::to_string(s.cube.generation) + "; increase the stopping ratio a (now " +
                                 std::to_string(a) + ")");
        for (std::size_t h : s.holes)
            if (!cube::contains(s.cube, fam.cubes()[h].cube) || fam.cubes()[h].cube == s.cube)
                throw InvariantError("selected cube is not strictly inside its parent");
    }
    if (owned != box_cells)
        throw InvariantError("majorizing sets do not partition the root cube");
    return fam;
}

/// A_S(f)(x) = sum over selected Q containing x of prod_i avg_Q f_i.
inline GridFunction sparse_operator(const SparseFamily& S, std::span<const GridFunction> fs)
{
    const Lattice& lat = shared_lattice(fs);
    if (!(lat == S.lattice()))
        throw ConfigError("sparse family was built on a different lattice");
    const int g0 = S.root().generation;
    const GridLevels levels(lat, S.grid(), g0, lat.level());
    auto prod = detail::product_of_averages(levels, fs);
    std::vector<std::vector<double>> acc(prod.size());
    for (std::size_t gi = 0; gi < acc.size(); ++gi)
        acc[gi].assign(prod[gi].size(), 0.0);
    for (const SparseCube& s : S.cubes()) {
        const std::size_t gi = static_cast<std::size_t>(s.cube.generation - g0);
        const std::size_t local = levels.local_index(s.cube);
        acc[gi][local] = prod[gi][local];
    }
    for (int g = g0 + 1; g <= lat.level(); ++g) {
        auto& cur = acc[static_cast<std::size_t>(g - g0)];
        const auto& up = acc[static_cast<std::size_t>(g - 1 - g0)];
        for (std::size_t q = 0; q < cur.size(); ++q)
            cur[q] = up[levels.parent(g, q)] + cur[q];
    }
    const auto& finest = acc.back();
    std::vector<double> out(lat.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = finest[levels.cube_of_cell(lat.level(), lat.cell(i))];
    return GridFunction(lat, std::move(out));
}

/// Sparse operator over an explicit list of cubes (any grids, cell-aligned).
inline GridFunction sparse_operator(std::span<const DyadicCube> cubes, std::span<const GridFunction> fs)
{
    const Lattice& lat = shared_lattice(fs);
    std::vector<double> out(lat.size(), 0.0);
    for (const DyadicCube& q : cubes) {
        double prod = 1.0;
        for (const GridFunction& f : fs)
            prod *= cell_average(f, q);
        for_each_cell_in(q, lat, [&](std::size_t i) { out[i] += prod; });
    }
    return GridFunction(lat, std::move(out));
}

} // namespace mweights
