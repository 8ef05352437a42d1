#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mweights/core/error.hpp"
#include "mweights/core/grid_function.hpp"
#include "mweights/core/log.hpp"
#include "mweights/core/pyramid.hpp"
#include "mweights/weights/exponents.hpp"
#include "mweights/weights/weight.hpp"

namespace mweights {

/// (w_1, ..., w_m) with v = prod w_i^{p/p_i} and sigma_i = w_i^{1-p_i'}.
/// If any weight is grid-backed, all of them are made piecewise constant on
/// that lattice.
class WeightVector {
public:
    WeightVector(std::vector<Weight> w, ExponentTuple P) : w_(std::move(w)), P_(std::move(P))
    {
        if (static_cast<int>(w_.size()) != P_.m())
            throw ConfigError(std::to_string(w_.size()) + " weights given for " + std::to_string(P_.m()) + " exponents");
        const int n = w_.front().dim();
        std::optional<Lattice> lat;
        for (const Weight& wi : w_) {
            if (wi.dim() != n)
                throw ConfigError("weights of different dimensions");
            if (!wi.is_power()) {
                if (lat && !(*lat == wi.values().lattice()))
                    throw ConfigError("grid weights on different lattices");
                lat = wi.values().lattice();
            }
        }
        if (lat)
            for (Weight& wi : w_)
                wi = wi.on_lattice(*lat);
        const double p = P_.p();
        v_ = w_[0].pow(p / P_[0]);
        for (int i = 1; i < P_.m(); ++i)
            v_ = v_.times(w_[static_cast<std::size_t>(i)].pow(p / P_[i]));
        if (analytic()) {
            // exact exponent arithmetic, one rounding
            double a = 0.0, c = 1.0;
            for (int i = 0; i < P_.m(); ++i) {
                a += w_[static_cast<std::size_t>(i)].exponent() * p / P_[i];
                c *= std::pow(w_[static_cast<std::size_t>(i)].coefficient(), p / P_[i]);
            }
            v_ = Weight::formal_power(a, n, c);
        }
        for (int i = 0; i < P_.m(); ++i)
            sigma_.push_back(w_[static_cast<std::size_t>(i)].pow(1.0 - P_.conj(i)));
    }

    int m() const { return P_.m(); }
    int dim() const { return w_.front().dim(); }
    const ExponentTuple& exponents() const { return P_; }
    const Weight& w(int i) const { return w_.at(static_cast<std::size_t>(i)); }
    const Weight& v() const { return v_; }
    const Weight& sigma(int i) const { return sigma_.at(static_cast<std::size_t>(i)); }
    const std::vector<Weight>& weights() const { return w_; }

    bool analytic() const
    {
        for (const Weight& wi : w_)
            if (!wi.is_power())
                return false;
        return true;
    }

private:
    std::vector<Weight> w_;
    ExponentTuple P_;
    Weight v_;
    std::vector<Weight> sigma_;
};

/// w(Q). Grid weights count only the cells of Q inside their box.
inline double cube_mass(const Weight& w, const DyadicCube& q)
{
    if (w.is_power())
        return w.coefficient() * power_mass(w.exponent(), cube::bounds(q));
    const GridFunction& g = w.values();
    double s = 0.0;
    for_each_cell_in(q, g.lattice(), [&](std::size_t i) { s += g[i]; });
    return s * g.lattice().cell_volume();
}

/// (v(Q)/|Q|) prod (sigma_i(Q)/|Q|)^{p/p_i'} from masses.
inline double ap_value(const ExponentTuple& P, double volume, double v_mass, const double* sigma_mass)
{
    const double p = P.p();
    double value = v_mass / volume;
    for (int i = 0; i < P.m(); ++i) {
        if (!(sigma_mass[i] > 0.0)) {
            log::info("dual weight " + std::to_string(i + 1) + " has zero mass on a cube; supremand taken as 0");
            return 0.0;
        }
        value *= std::pow(sigma_mass[i] / volume, p / P.conj(i));
    }
    return value;
}

inline double per_cube_ap(const WeightVector& wv, const DyadicCube& q)
{
    std::vector<double> s(static_cast<std::size_t>(wv.m()));
    for (int i = 0; i < wv.m(); ++i)
        s[static_cast<std::size_t>(i)] = cube_mass(wv.sigma(i), q);
    return ap_value(wv.exponents(), cube::volume(q), cube_mass(wv.v(), q), s.data());
}

/// Classical m=1 supremand (w(Q)/|Q|)(w^{1-p'}(Q)/|Q|)^{p-1}.
inline double classical_ap(const Weight& w, double p, const DyadicCube& q)
{
    const double vol = cube::volume(q);
    const Weight dual = w.pow(-1.0 / (p - 1.0));
    return cube_mass(w, q) / vol * std::pow(cube_mass(dual, q) / vol, p - 1.0);
}

/// Cubes scanned for the A_P sup: every dyadic cube of the shifted grids (or of
/// the standard grid alone) with generation in [g_min, g_max] meeting the box,
/// optionally plus every cell-aligned cube inside the box (n <= 2).
struct CubeFamily {
    Lattice lattice;
    int g_min = -2;
    int g_max = 0;
    bool all_grids = true;
    bool cell_aligned = false;

    static CubeFamily dyadic(const Lattice& lat, int g_min = -2)
    {
        CubeFamily f;
        f.lattice = lat;
        f.g_min = g_min;
        f.g_max = lat.level();
        return f;
    }

    std::string describe() const
    {
        std::string s = (all_grids ? "shifted-dyadic" : "standard-dyadic");
        s += " n=" + std::to_string(lattice.dim()) + " L=" + std::to_string(lattice.level()) + " g=" +
             std::to_string(g_min) + ".." + std::to_string(g_max);
        if (cell_aligned)
            s += " +cell-aligned";
        return s;
    }
};

struct CubeRef {
    std::string grid = "std";
    int generation = 0;
    Index index{};
    std::int64_t side_cells = 0; // set for cell-aligned cubes only
    int dim = 1;
};

inline nlohmann::json to_json(const CubeRef& c)
{
    nlohmann::json j = nlohmann::json::array();
    for (int k = 0; k < c.dim; ++k)
        j.push_back(c.index[k]);
    nlohmann::json out = {{"grid", c.grid}, {"g", c.generation}, {"j", j}};
    if (c.side_cells > 0)
        out["side_cells"] = c.side_cells;
    return out;
}

struct ApReport {
    double constant = 0.0;
    CubeRef argmax;
    std::size_t scanned = 0;
    std::string family;

    nlohmann::json json() const
    {
        return {{"constant", constant}, {"argmax", to_json(argmax)}, {"scanned", scanned}, {"family", family}};
    }
};

namespace detail {

inline void consider(ApReport& r, double value, const CubeRef& ref)
{
    if (r.scanned == 0 || value > r.constant) {
        r.constant = value;
        r.argmax = ref;
    }
    ++r.scanned;
}

// Cell-aligned cubes inside the box, masses from prefix sums.
inline void scan_cell_aligned(const WeightVector& wv, const Lattice& lat, const std::vector<std::vector<double>>& masses,
                              ApReport& r)
{
    const int n = lat.dim();
    if (n > 2)
        throw ConfigError("cell-aligned cube scan supports n <= 2");
    const auto N = static_cast<std::size_t>(lat.extent());
    const std::size_t slots = masses.size();
    const double h = lat.cell_width();
    std::vector<double> sig(slots - 1);
    if (n == 1) {
        std::vector<std::vector<double>> pre(slots, std::vector<double>(N + 1, 0.0));
        for (std::size_t s = 0; s < slots; ++s)
            for (std::size_t i = 0; i < N; ++i)
                pre[s][i + 1] = pre[s][i] + masses[s][i];
        for (std::size_t len = 1; len <= N; ++len)
            for (std::size_t a = 0; a + len <= N; ++a) {
                for (std::size_t s = 1; s < slots; ++s)
                    sig[s - 1] = pre[s][a + len] - pre[s][a];
                const double val = ap_value(wv.exponents(), static_cast<double>(len) * h, pre[0][a + len] - pre[0][a], sig.data());
                CubeRef ref{"cell", lat.level(), Index{lat.lo() + static_cast<std::int64_t>(a)}, static_cast<std::int64_t>(len), 1};
                consider(r, val, ref);
            }
        return;
    }
    const std::size_t W = N + 1;
    std::vector<std::vector<double>> sat(slots, std::vector<double>(W * W, 0.0));
    for (std::size_t s = 0; s < slots; ++s)
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                sat[s][(i + 1) * W + j + 1] =
                    masses[s][i * N + j] + sat[s][i * W + j + 1] + sat[s][(i + 1) * W + j] - sat[s][i * W + j];
    auto box_sum = [&](std::size_t s, std::size_t a, std::size_t b, std::size_t len) {
        const auto& t = sat[s];
        return t[(a + len) * W + b + len] - t[a * W + b + len] - t[(a + len) * W + b] + t[a * W + b];
    };
    for (std::size_t len = 1; len <= N; ++len)
        for (std::size_t a = 0; a + len <= N; ++a)
            for (std::size_t b = 0; b + len <= N; ++b) {
                for (std::size_t s = 1; s < slots; ++s)
                    sig[s - 1] = box_sum(s, a, b, len);
                const double vol = static_cast<double>(len * len) * h * h;
                const double val = ap_value(wv.exponents(), vol, box_sum(0, a, b, len), sig.data());
                CubeRef ref{"cell", lat.level(),
                            Index{lat.lo() + static_cast<std::int64_t>(a), lat.lo() + static_cast<std::int64_t>(b)},
                            static_cast<std::int64_t>(len), 2};
                consider(r, val, ref);
            }
}

} // namespace detail

/// Maximum of per_cube_ap over the family. Cubes inside the box use summed cell
/// masses; analytic weights are integrated exactly on cubes crossing the box
/// boundary, grid weights skip those cubes.
inline ApReport ap_constant(const WeightVector& wv, const CubeFamily& family)
{
    const Lattice& lat = family.lattice;
    if (lat.dim() != wv.dim())
        throw ConfigError("cube family dimension does not match the weights");
    if (family.g_min > family.g_max)
        throw ConfigError("empty cube family: g_min " + std::to_string(family.g_min) + " > g_max " +
                          std::to_string(family.g_max));
    const std::size_t slots = static_cast<std::size_t>(wv.m()) + 1;
    std::vector<std::vector<double>> masses;
    masses.push_back(wv.v().cell_masses(lat));
    for (int i = 0; i < wv.m(); ++i)
        masses.push_back(wv.sigma(i).cell_masses(lat));

    ApReport report;
    report.family = family.describe();
    const bool analytic = wv.analytic();
    std::vector<double> sig(slots - 1);
    std::vector<GridId> grids = ShiftedGridFamily(lat.dim(), lat.level()).members();
    if (!family.all_grids)
        grids.resize(1);
    for (const GridId& grid : grids) {
        const GridLevels levels(lat, grid, family.g_min, family.g_max);
        std::vector<std::vector<std::vector<double>>> sums;
        for (const auto& m : masses)
            sums.push_back(levels.sums(m));
        for (int g = family.g_min; g <= family.g_max; ++g) {
            const auto gi = static_cast<std::size_t>(g - family.g_min);
            const double vol = std::ldexp(1.0, -g * lat.dim());
            for (std::size_t q = 0; q < levels.cube_count(g); ++q) {
                const DyadicCube cube = levels.cube(g, q);
                double value;
                if (levels.inside_box(g, q)) {
                    for (std::size_t s = 1; s < slots; ++s)
                        sig[s - 1] = sums[s][gi][q];
                    value = ap_value(wv.exponents(), vol, sums[0][gi][q], sig.data());
                } else if (analytic) {
                    value = per_cube_ap(wv, cube);
                } else {
                    continue;
                }
                detail::consider(report, value, CubeRef{grid.label(), g, cube.index, 0, lat.dim()});
            }
        }
    }
    if (family.cell_aligned)
        detail::scan_cell_aligned(wv, lat, masses, report);
    if (report.scanned == 0)
        throw ConfigError("cube family " + report.family + " contains no admissible cube");
    return report;
}

/// Slot i replaced by v^{1-p'}, exponent p_i replaced by p'.
inline WeightVector dualize(const WeightVector& wv, int i)
{
    const ExponentTuple& P = wv.exponents();
    if (i < 0 || i >= P.m())
        throw ConfigError("slot " + std::to_string(i + 1) + " outside 1.." + std::to_string(P.m()));
    const double pd = P.p_dual();
    std::vector<Weight> w = wv.weights();
    w[static_cast<std::size_t>(i)] = wv.v().pow(1.0 - pd);
    return WeightVector(std::move(w), P.with(i, pd));
}

} // namespace mweights
