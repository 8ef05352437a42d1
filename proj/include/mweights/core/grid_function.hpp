#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mweights/core/error.hpp"
#include "mweights/core/lattice.hpp"
#include "mweights/core/parallel.hpp"
#include "mweights/core/power_mass.hpp"

namespace mweights {

/// c |x|^b restricted to `support`.
struct PowerProfile {
    double coefficient = 1.0;
    double exponent = 0.0;
    Region support = Ball{1.0};

    double operator()(const Point& x, int dim) const
    {
        double r2 = 0.0;
        for (int k = 0; k < dim; ++k)
            r2 += x[k] * x[k];
        if (const auto* ball = std::get_if<Ball>(&support)) {
            if (r2 > ball->radius * ball->radius)
                return 0.0;
        } else {
            const auto& box = std::get<AxisBox>(support);
            for (int k = 0; k < dim; ++k)
                if (x[k] < box.lo[k] || x[k] > box.hi[k])
                    return 0.0;
        }
        return coefficient * std::pow(std::sqrt(r2), exponent);
    }
};

/// Nonnegative cell-averaged function on a lattice. Outside the root box the
/// function is zero.
class GridFunction {
public:
    GridFunction() = default;

    GridFunction(Lattice lattice, std::vector<double> values, std::optional<PowerProfile> profile = std::nullopt)
        : lattice_(std::move(lattice)), values_(std::move(values)), profile_(std::move(profile))
    {
        if (values_.size() != lattice_.size())
            throw ConfigError("grid function has " + std::to_string(values_.size()) + " values for " +
                              std::to_string(lattice_.size()) + " cells");
        for (double v : values_)
            if (!std::isfinite(v) || v < 0.0)
                throw ConfigError("grid function values must be finite and nonnegative");
    }

    static GridFunction zeros(const Lattice& lattice) { return GridFunction(lattice, std::vector<double>(lattice.size(), 0.0)); }

    static GridFunction constant(const Lattice& lattice, double c)
    {
        return GridFunction(lattice, std::vector<double>(lattice.size(), c));
    }

    /// Exact cell averages of c|x|^b χ_support.
    static GridFunction from_profile(const Lattice& lattice, const PowerProfile& profile,
                                     double rel_tol = kDefaultQuadratureTolerance)
    {
        std::vector<double> values(lattice.size());
        const double vol = lattice.cell_volume();
        parallel_for(values.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                values[i] = profile.coefficient *
                            power_mass_clipped(profile.exponent, lattice.cell_box(i), profile.support, rel_tol) / vol;
        });
        return GridFunction(lattice, std::move(values), profile);
    }

    /// Exact cell averages of the indicator of a box.
    static GridFunction indicator(const Lattice& lattice, const AxisBox& region)
    {
        std::vector<double> values(lattice.size());
        const double vol = lattice.cell_volume();
        for (std::size_t i = 0; i < values.size(); ++i)
            values[i] = intersect(lattice.cell_box(i), region).volume() / vol;
        PowerProfile p;
        p.exponent = 0.0;
        p.support = region;
        return GridFunction(lattice, std::move(values), p);
    }

    /// Samples fn at cell centres (no analytic profile).
    static GridFunction sampled(const Lattice& lattice, const std::function<double(const Point&)>& fn)
    {
        std::vector<double> values(lattice.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            values[i] = fn(lattice.cell_center(i));
        return GridFunction(lattice, std::move(values));
    }

    const Lattice& lattice() const { return lattice_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::optional<PowerProfile>& profile() const { return profile_; }

    double total_mass() const
    {
        double s = 0.0;
        for (double v : values_)
            s += v;
        return s * lattice_.cell_volume();
    }

    GridFunction scaled(double factor) const
    {
        if (!(factor >= 0.0))
            throw ConfigError("scale factor must be nonnegative");
        std::vector<double> v(values_);
        for (double& x : v)
            x *= factor;
        std::optional<PowerProfile> p = profile_;
        if (p)
            p->coefficient *= factor;
        return GridFunction(lattice_, std::move(v), p);
    }

private:
    Lattice lattice_;
    std::vector<double> values_;
    std::optional<PowerProfile> profile_;
};

/// A set of cells of one lattice (sorted, unique flat indices).
class CellRegion {
public:
    CellRegion() = default;
    CellRegion(Lattice lattice, std::vector<std::size_t> cells) : lattice_(std::move(lattice)), cells_(std::move(cells))
    {
        std::sort(cells_.begin(), cells_.end());
        cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
        if (!cells_.empty() && cells_.back() >= lattice_.size())
            throw ConfigError("cell region index outside lattice");
    }

    const Lattice& lattice() const { return lattice_; }
    std::span<const std::size_t> cells() const { return cells_; }
    std::size_t count() const { return cells_.size(); }
    double measure() const { return static_cast<double>(cells_.size()) * lattice_.cell_volume(); }

    /// Sum of per-cell masses over the region, in cell order.
    double mass(std::span<const double> cell_masses) const
    {
        double s = 0.0;
        for (std::size_t c : cells_)
            s += cell_masses[c];
        return s;
    }

private:
    Lattice lattice_;
    std::vector<std::size_t> cells_;
};

/// Visits every lattice cell inside the dyadic cube (cells outside the box are skipped).
template <class Fn>
void for_each_cell_in(const DyadicCube& q, const Lattice& lat, Fn&& fn)
{
    const int n = lat.dim();
    Index first{}, last{};
    for (int k = 0; k < n; ++k) {
        const auto span = cube::cell_span(q, k, lat);
        first[k] = std::max(span.first, lat.lo());
        last[k] = std::min(span.first + span.count, lat.lo() + lat.extent());
        if (first[k] >= last[k])
            return;
    }
    Index c = first;
    for (;;) {
        fn(lat.flat(c));
        int k = n - 1;
        while (k >= 0 && ++c[k] == last[k]) {
            c[k] = first[k];
            --k;
        }
        if (k < 0)
            break;
    }
}

/// Average of f over Q, normalized by the full |Q| (cells outside the box count as 0).
inline double cell_average(const GridFunction& f, const DyadicCube& q)
{
    const Lattice& lat = f.lattice();
    if (q.dim != lat.dim())
        throw ConfigError("cube dimension does not match grid function");
    double sum = 0.0;
    for_each_cell_in(q, lat, [&](std::size_t i) { sum += f[i]; });
    double cells = 1.0;
    for (int k = 0; k < lat.dim(); ++k)
        cells *= static_cast<double>(cube::cell_span(q, k, lat).count);
    return sum / cells;
}

/// Average over the cell-aligned cube with lower corner `corner` (in cells) and
/// `side_cells` cells per side; same normalization as above.
inline double cell_average(const GridFunction& f, const Index& corner, std::int64_t side_cells)
{
    const Lattice& lat = f.lattice();
    if (side_cells < 1)
        throw ConfigError("cube side must be at least one cell");
    Index first{}, last{};
    double cells = 1.0;
    for (int k = 0; k < lat.dim(); ++k) {
        first[k] = std::max(corner[k], lat.lo());
        last[k] = std::min(corner[k] + side_cells, lat.lo() + lat.extent());
        cells *= static_cast<double>(side_cells);
        if (first[k] >= last[k])
            return 0.0;
    }
    double sum = 0.0;
    Index c = first;
    for (;;) {
        sum += f[lat.flat(c)];
        int k = lat.dim() - 1;
        while (k >= 0 && ++c[k] == last[k]) {
            c[k] = first[k];
            --k;
        }
        if (k < 0)
            break;
    }
    return sum / cells;
}

/// (sum_cells value^p * mass(cell))^{1/p}.
inline double lp_norm(const GridFunction& f, std::span<const double> cell_masses, double p)
{
    if (!(p > 0.0))
        throw ConfigError("norm exponent must be positive");
    if (cell_masses.size() != f.size())
        throw ConfigError("weight masses do not match the lattice");
    const double s = deterministic_sum(f.size(), [&](std::size_t i) {
        const double v = f[i];
        return v == 0.0 ? 0.0 : std::pow(v, p) * cell_masses[i];
    });
    return std::pow(s, 1.0 / p);
}

} // namespace mweights
