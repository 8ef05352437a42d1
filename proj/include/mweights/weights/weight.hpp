#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mweights/core/error.hpp"
#include "mweights/core/grid_function.hpp"
#include "mweights/core/parallel.hpp"
#include "mweights/core/power_mass.hpp"

namespace mweights {

/// Either c|x|^a on R^n or a strictly positive piecewise-constant function on a
/// lattice (zero outside its box). Grid weights are handled through cell masses.
class Weight {
public:
    Weight() = default;

    static Weight power(double a, int dim, double coefficient = 1.0)
    {
        check_dim(dim);
        if (!(a > -dim))
            throw ConfigError("power weight |x|^" + std::to_string(a) + " is not locally integrable in dimension " +
                              std::to_string(dim));
        if (!(coefficient > 0.0) || !std::isfinite(coefficient) || !std::isfinite(a))
            throw ConfigError("power weight needs a finite positive coefficient");
        Weight w;
        w.dim_ = dim;
        w.a_ = a;
        w.c_ = coefficient;
        return w;
    }

    static Weight constant(int dim, double c = 1.0) { return power(0.0, dim, c); }

    /// |x|^a without the integrability check. Only its powers (duals, combined
    /// weights) are integrated; a mass over a region touching 0 still throws.
    static Weight formal_power(double a, int dim, double coefficient = 1.0)
    {
        Weight w = power(0.0, dim, coefficient);
        if (!std::isfinite(a))
            throw ConfigError("power weight exponent must be finite");
        w.a_ = a;
        return w;
    }

    static Weight grid(GridFunction values)
    {
        for (double v : values.values())
            if (!(v > 0.0))
                throw ConfigError("grid weight must be strictly positive on every cell");
        Weight w;
        w.dim_ = values.lattice().dim();
        w.grid_ = std::make_shared<const GridFunction>(std::move(values));
        return w;
    }

    int dim() const { return dim_; }
    bool is_power() const { return !grid_; }
    double exponent() const { return a_; }
    double coefficient() const { return c_; }
    const GridFunction& values() const
    {
        if (!grid_)
            throw Error("power weight has no grid values");
        return *grid_;
    }

    std::string describe() const
    {
        if (grid_)
            return "grid(L=" + std::to_string(grid_->lattice().level()) + ")";
        if (a_ == 0.0)
            return "const(" + std::to_string(c_) + ")";
        return std::to_string(c_) + "|x|^" + std::to_string(a_);
    }

    /// w(box). Grid weights need cell-aligned boxes for exact results; partial
    /// cells are weighted by overlap.
    double mass(const AxisBox& box) const
    {
        if (!grid_)
            return c_ * power_mass(a_, box);
        const Lattice& lat = grid_->lattice();
        const AxisBox clip = intersect(box, lat.box());
        if (clip.empty())
            return 0.0;
        const double h = lat.cell_width();
        Index first{}, last{};
        for (int k = 0; k < dim_; ++k) {
            first[k] = static_cast<std::int64_t>(std::floor(clip.lo[k] / h));
            last[k] = static_cast<std::int64_t>(std::ceil(clip.hi[k] / h));
        }
        double s = 0.0;
        Index c = first;
        for (;;) {
            double overlap = 1.0;
            for (int k = 0; k < dim_; ++k) {
                const double lo = std::max(clip.lo[k], static_cast<double>(c[k]) * h);
                const double hi = std::min(clip.hi[k], static_cast<double>(c[k] + 1) * h);
                overlap *= std::max(0.0, hi - lo);
            }
            if (overlap > 0.0)
                s += (*grid_)[lat.flat(c)] * overlap;
            int k = dim_ - 1;
            while (k >= 0 && ++c[k] == last[k]) {
                c[k] = first[k];
                --k;
            }
            if (k < 0)
                break;
        }
        return s;
    }

    /// w(cell) for every cell of the lattice.
    std::vector<double> cell_masses(const Lattice& lat) const
    {
        if (lat.dim() != dim_)
            throw ConfigError("weight dimension does not match lattice");
        std::vector<double> out(lat.size());
        if (grid_) {
            if (!(grid_->lattice() == lat))
                throw ConfigError("grid weight lives on a different lattice");
            const double vol = lat.cell_volume();
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = (*grid_)[i] * vol;
            return out;
        }
        parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                out[i] = c_ * power_mass(a_, lat.cell_box(i));
        });
        return out;
    }

    /// Piecewise-constant version with the exact cell averages.
    Weight on_lattice(const Lattice& lat) const
    {
        if (grid_) {
            if (!(grid_->lattice() == lat))
                throw ConfigError("grid weight lives on a different lattice");
            return *this;
        }
        std::vector<double> m = cell_masses(lat);
        const double vol = lat.cell_volume();
        for (double& x : m)
            x /= vol;
        return grid(GridFunction(lat, std::move(m)));
    }

    /// w^t. Power weights stay analytic; grid weights are raised cellwise.
    Weight pow(double t) const
    {
        if (!grid_)
            return a_ * t > -dim_ ? power(a_ * t, dim_, std::pow(c_, t)) : formal_power(a_ * t, dim_, std::pow(c_, t));
        std::vector<double> v(grid_->values().begin(), grid_->values().end());
        for (double& x : v)
            x = std::pow(x, t);
        return grid(GridFunction(grid_->lattice(), std::move(v)));
    }

    /// Cellwise product w * o (both on the same lattice, or both analytic).
    Weight times(const Weight& o) const
    {
        if (!grid_ && !o.grid_)
            return formal_power(a_ + o.a_, dim_, c_ * o.c_);
        if (!grid_ || !o.grid_ || !(grid_->lattice() == o.grid_->lattice()))
            throw ConfigError("cannot multiply an analytic weight by a grid weight directly");
        std::vector<double> v(grid_->values().begin(), grid_->values().end());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] *= (*o.grid_)[i];
        return grid(GridFunction(grid_->lattice(), std::move(v)));
    }

private:
    int dim_ = 1;
    double a_ = 0.0;
    double c_ = 1.0;
    std::shared_ptr<const GridFunction> grid_;
};

/// ||f||_{L^p(w)} = (sum value^p w(cell))^{1/p}.
inline double lp_norm(const GridFunction& f, const Weight& w, double p)
{
    const std::vector<double> masses = w.cell_masses(f.lattice());
    return lp_norm(f, masses, p);
}

/// Exact ||c|x|^b chi_S||_{L^p(w)} for an analytic profile and power weight.
inline double exact_lp_norm(const PowerProfile& f, const Weight& w, double p, int dim)
{
    if (!w.is_power())
        throw ConfigError("exact norms need an analytic weight");
    const double m = power_mass(f.exponent * p + w.exponent(), f.support, dim);
    return f.coefficient * std::pow(w.coefficient() * m, 1.0 / p);
}

} // namespace mweights
