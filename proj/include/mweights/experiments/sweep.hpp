#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mweights/core/io.hpp"
#include "mweights/core/log.hpp"
#include "mweights/experiments/extremal.hpp"
#include "mweights/operators/maximal.hpp"
#include "mweights/operators/riesz.hpp"
#include "mweights/weights/ap.hpp"

namespace mweights {

/// ||u||_{L^q(w)} over the output region, for an output that is homogeneous of
/// degree gamma near the origin. Cells with sup-norm |x| >= r/2 (r = 2^T h) are
/// summed directly; the sum over the shell r/2 <= |x| < r is continued inward
/// as a geometric series with ratio 2^{-(q gamma + a + n)}.
struct ClosedNorm {
    double value = 0.0;
    double direct = 0.0;  // q-th power, cells summed directly
    double closure = 0.0; // q-th power, geometric continuation
    bool finite = true;
};

inline double sup_norm(const Point& x, int n)
{
    double r = 0.0;
    for (int k = 0; k < n; ++k)
        r = std::max(r, std::abs(x[k]));
    return r;
}

/// True when the cell centre lies in the output region of the extremal.
inline bool in_output_region(const Extremal& e, const Point& x)
{
    if (e.out_sign != 0 && !(x[0] * e.out_sign > 0.0))
        return false;
    if (std::isfinite(e.out_radius)) {
        double r2 = 0.0;
        for (int k = 0; k < e.n; ++k)
            r2 += x[k] * x[k];
        if (r2 > e.out_radius * e.out_radius)
            return false;
    }
    return true;
}

inline ClosedNorm closed_output_norm(const Extremal& e, const Lattice& lat, std::span<const std::size_t> cells,
                                     std::span<const double> values, int T)
{
    if (!e.out_weight.is_power())
        throw ConfigError("output weight must be analytic for the tail continuation");
    const double r = std::ldexp(lat.cell_width(), T);
    const double decay = e.out_q * e.homogeneity + e.out_weight.exponent() + e.n;
    ClosedNorm out;
    std::vector<double> terms(cells.size()), shell(cells.size());
    parallel_for(cells.size(), [&](std::size_t b, std::size_t end) {
        for (std::size_t t = b; t < end; ++t) {
            const Point x = lat.cell_center(cells[t]);
            const double s = sup_norm(x, e.n);
            const double v = std::abs(values[t]);
            if (s < r / 2 || v == 0.0) {
                terms[t] = shell[t] = 0.0;
                continue;
            }
            terms[t] = std::pow(v, e.out_q) * e.out_weight.coefficient() * power_mass(e.out_weight.exponent(), lat.cell_box(cells[t]));
            shell[t] = s < r ? terms[t] : 0.0;
        }
    }, 1024);
    out.direct = deterministic_sum(terms.size(), [&](std::size_t i) { return terms[i]; });
    const double s_shell = deterministic_sum(shell.size(), [&](std::size_t i) { return shell[i]; });
    if (!(decay > 0.0)) {
        out.finite = false;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    const double rho = std::exp2(-decay);
    out.closure = s_shell * rho / (1.0 - rho);
    out.value = std::pow(out.direct + out.closure, 1.0 / e.out_q);
    out.finite = std::isfinite(out.value) && out.value > 0.0;
    return out;
}

struct SweepRow {
    double eps = 0.0;
    double ap_const = 0.0;
    double lhs_norm = 0.0;
    double rhs_norm_product = 0.0;
    double ratio = 0.0;
    int L = 0;
    double ms = 0.0;
    std::vector<double> input_norms;
    double closure_fraction = 0.0; // share of the output norm^q supplied by the continuation
    bool flagged = false;
    std::string note;
};

struct SweepConfig {
    SweepOperator op = SweepOperator::maximal;
    ExponentTuple P{std::vector<double>{2.0, 2.0}};
    int n = 1;
    std::vector<double> eps;
    int L = 12;
    int shell_exponent = 5;   // T in r = 2^T h
    int family_g_min = -2;    // coarsest generation of the A_P family
    bool timing = false;
};

/// eps = 2^-a, ..., 2^-b.
inline std::vector<double> dyadic_eps(int a, int b)
{
    if (a < 1 || b < a)
        throw ConfigError("epsilon range 2^-" + std::to_string(a) + "..2^-" + std::to_string(b) + " is empty or not in (0,1)");
    std::vector<double> out;
    for (int k = a; k <= b; ++k)
        out.push_back(std::ldexp(1.0, -k));
    return out;
}

inline Extremal build_extremal(const SweepConfig& cfg, double eps)
{
    switch (cfg.op) {
    case SweepOperator::maximal:
        return maximal_extremal(cfg.P, eps, cfg.n);
    case SweepOperator::riesz_direct:
        return riesz_extremal(cfg.P, eps, RieszVariant::direct);
    case SweepOperator::riesz_adjoint:
        return riesz_extremal(cfg.P, eps, RieszVariant::adjoint_slot1);
    }
    throw ConfigError("unknown sweep operator");
}

/// Ratio, A_P constant and norms for one extremal configuration.
inline SweepRow evaluate_extremal(const Extremal& e, const SweepConfig& cfg)
{
    const auto start = std::chrono::steady_clock::now();
    const Lattice lat = Lattice::centered(e.n, cfg.L);
    const double eps = e.eps;
    SweepRow row;
    row.eps = eps;
    row.L = cfg.L;

    std::vector<GridFunction> fs;
    for (const PowerProfile& f : e.f)
        fs.push_back(GridFunction::from_profile(lat, f));

    std::vector<std::size_t> cells;
    std::vector<double> values;
    const double r = std::ldexp(lat.cell_width(), cfg.shell_exponent);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Point x = lat.cell_center(i);
        if (in_output_region(e, x) && sup_norm(x, e.n) >= r / 2)
            cells.push_back(i);
    }
    if (e.op == SweepOperator::maximal) {
        const GridFunction M = multilinear_maximal(fs).lower;
        for (std::size_t c : cells)
            values.push_back(M[c]);
    } else {
        const RieszValues rv = bilinear_riesz(fs[0], fs[1], cell_centres(lat, cells),
                                              e.op == SweepOperator::riesz_direct ? RieszVariant::direct
                                                                                  : RieszVariant::adjoint_slot1);
        values = rv.values;
        for (std::uint8_t f : rv.pv_approx)
            if (f)
                row.note = "principal value approximated";
    }
    const ClosedNorm out = closed_output_norm(e, lat, cells, values, cfg.shell_exponent);
    row.lhs_norm = out.value;
    row.closure_fraction = out.closure / (out.direct + out.closure);

    row.rhs_norm_product = 1.0;
    for (const InputNorm& in : e.inputs) {
        const double v = exact_lp_norm(in.f, in.w, in.q, e.n);
        row.input_norms.push_back(v);
        row.rhs_norm_product *= v;
    }
    row.ratio = row.lhs_norm / row.rhs_norm_product;
    row.ap_const = ap_constant(e.weights(), CubeFamily::dyadic(lat, cfg.family_g_min)).constant;
    if (!out.finite) {
        row.flagged = true;
        row.note = "output norm not finite at this resolution";
    }
    for (double v : {row.ap_const, row.lhs_norm, row.rhs_norm_product, row.ratio})
        if (!std::isfinite(v) || !(v > 0.0))
            row.flagged = true;
    if (cfg.timing)
        row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    log::info(std::string(operator_name(cfg.op)) + " eps=" + io::format_double(eps) + " ratio=" +
              io::format_double(row.ratio) + " ap=" + io::format_double(row.ap_const));
    return row;
}

inline SweepRow run_row(const SweepConfig& cfg, double eps)
{
    return evaluate_extremal(build_extremal(cfg, eps), cfg);
}

/// One row per epsilon, ordered by decreasing epsilon.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg)
{
    if (cfg.eps.empty())
        throw ConfigError("empty epsilon list");
    std::vector<double> eps = cfg.eps;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    if (std::adjacent_find(eps.begin(), eps.end()) != eps.end())
        throw ConfigError("epsilon list has repeated values");
    for (double x : eps)
        build_extremal(cfg, x); // validates every row before any work
    std::vector<SweepRow> rows;
    for (double x : eps)
        rows.push_back(run_row(cfg, x));
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    using io::format_double;
    os << "eps,ap_const,lhs_norm,rhs_norm_product,ratio,L,ms\n";
    for (const SweepRow& r : rows)
        os << format_double(r.eps) << ',' << format_double(r.ap_const) << ',' << format_double(r.lhs_norm) << ','
           << format_double(r.rhs_norm_product) << ',' << format_double(r.ratio) << ',' << r.L << ','
           << format_double(r.ms) << '\n';
}

} // namespace mweights
