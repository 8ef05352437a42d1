#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mweights/core/log.hpp"
#include "mweights/operators/maximal.hpp"
#include "mweights/operators/sparse.hpp"
#include "mweights/weights/ap.hpp"

namespace mweights {

struct AuditConfig {
    ExponentTuple P{std::vector<double>{2.0, 2.0}};
    int n = 1;
    int L = 8;
    int trials = 20;
    std::uint64_t seed = 1;
    double ratio = 0.0; // stopping ratio; 0 means 2^{mn+2}
    int family_g_min = -2;
    bool unit_weights = false; // every trial uses w_i = 1
};

struct AuditTrial {
    std::string weight_kind;
    double ap_const = 0.0;
    double sparse_ratio = 0.0;
    double maximal_ratio = 0.0;
    double sparse_quotient = 0.0;
    double maximal_quotient = 0.0;
    double duality_error = 0.0;
};

struct AuditReport {
    int trials = 0;
    int skipped = 0;
    double sparse_exponent = 0.0;
    double maximal_exponent = 0.0;
    double max_sparse_quotient = 0.0;
    double max_maximal_quotient = 0.0;
    double max_duality_error = 0.0;
    std::vector<AuditTrial> rows;

    nlohmann::json json() const
    {
        nlohmann::json list = nlohmann::json::array();
        for (const AuditTrial& t : rows)
            list.push_back({{"weights", t.weight_kind},
                            {"ap_const", t.ap_const},
                            {"sparse_ratio", t.sparse_ratio},
                            {"maximal_ratio", t.maximal_ratio},
                            {"sparse_quotient", t.sparse_quotient},
                            {"maximal_quotient", t.maximal_quotient},
                            {"duality_error", t.duality_error}});
        return {{"trials", trials},
                {"skipped", skipped},
                {"sparse_exponent", sparse_exponent},
                {"maximal_exponent", maximal_exponent},
                {"max_sparse_quotient", max_sparse_quotient},
                {"max_maximal_quotient", max_maximal_quotient},
                {"max_duality_error", max_duality_error},
                {"rows", list}};
    }
};

/// Random power weights whose combined and dual weights are all locally integrable.
inline WeightVector random_power_weights(const ExponentTuple& P, int n, std::mt19937_64& rng)
{
    for (;;) {
        std::vector<Weight> w;
        double va = 0.0;
        for (int i = 0; i < P.m(); ++i) {
            std::uniform_real_distribution<double> u(-0.9 * n, 0.9 * n * (P[i] - 1.0));
            const double a = u(rng);
            va += a * P.p() / P[i];
            w.push_back(Weight::power(a, n));
        }
        if (va > -0.9 * n)
            return WeightVector(std::move(w), P);
    }
}

/// Random weights constant on the dyadic cubes of generation g (log-normal values).
inline WeightVector random_step_weights(const ExponentTuple& P, const Lattice& lat, int g, std::mt19937_64& rng)
{
    const GridLevels levels(lat, GridId{}, g, g);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Weight> w;
    for (int i = 0; i < P.m(); ++i) {
        std::vector<double> cube_value(levels.cube_count(g));
        for (double& x : cube_value)
            x = std::exp(1.5 * z(rng));
        std::vector<double> v(lat.size());
        for (std::size_t c = 0; c < v.size(); ++c)
            v[c] = cube_value[levels.cube_of_cell(g, lat.cell(c))];
        w.push_back(Weight::grid(GridFunction(lat, std::move(v))));
    }
    return WeightVector(std::move(w), P);
}

/// Random nonnegative step functions with sparse support.
inline GridFunction random_input(const Lattice& lat, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int g = std::max(0, lat.level() - 1 - static_cast<int>(u(rng) * 4));
    const GridLevels levels(lat, GridId{}, g, g);
    std::vector<double> cube_value(levels.cube_count(g));
    for (double& x : cube_value)
        x = u(rng) < 0.7 ? 0.0 : std::floor(1.0 + 64.0 * u(rng) * u(rng));
    std::vector<double> v(lat.size());
    for (std::size_t c = 0; c < v.size(); ++c)
        v[c] = cube_value[levels.cube_of_cell(g, lat.cell(c))];
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }))
        v[v.size() / 2] = 1.0;
    return GridFunction(lat, std::move(v));
}

/// Normalized quotients ratio / [w]^{alpha} for the sparse operator (alpha =
/// max(1, p_i'/p)) and for the lower bracket of M (alpha = max p_i'/p), plus the
/// self-adjointness identity of the sparse form in every slot.
inline AuditReport upper_bound_audit(const AuditConfig& cfg)
{
    const ExponentTuple& P = cfg.P;
    const int m = P.m();
    const Lattice lat = Lattice::centered(cfg.n, cfg.L);
    const double a = cfg.ratio > 0.0 ? cfg.ratio : std::ldexp(1.0, m * cfg.n + 2);
    const GridId grid{(1u << cfg.n) - 1u, lat.level()};
    const auto root = covering_cube(lat, grid);
    if (!root)
        throw ConfigError("no cube of the shifted grid covers the box");
    AuditReport rep;
    rep.sparse_exponent = P.sparse_exponent();
    rep.maximal_exponent = P.maximal_exponent();
    std::mt19937_64 rng(cfg.seed);
    for (int t = 0; t < cfg.trials; ++t) {
        ++rep.trials;
        const bool power = t % 2 == 0;
        const WeightVector wv = cfg.unit_weights ? WeightVector(std::vector<Weight>(static_cast<std::size_t>(m), Weight::constant(cfg.n)), P)
                                : power         ? random_power_weights(P, cfg.n, rng)
                                                : random_step_weights(P, lat, std::max(0, cfg.L - 4), rng);
        std::vector<GridFunction> fs;
        for (int i = 0; i < m; ++i)
            fs.push_back(random_input(lat, rng));
        const GridFunction g = random_input(lat, rng);
        AuditTrial row;
        row.weight_kind = cfg.unit_weights ? "unit" : power ? "power" : "step";
        try {
            row.ap_const = ap_constant(wv, CubeFamily::dyadic(lat, cfg.family_g_min)).constant;
            const SparseFamily S = build_sparse_family(fs, grid, a, *root);
            const GridFunction A = sparse_operator(S, fs);
            const GridFunction M = multilinear_maximal(fs).lower;
            double denom = 1.0;
            for (int i = 0; i < m; ++i)
                denom *= lp_norm(fs[static_cast<std::size_t>(i)], wv.w(i), P[i]);
            const std::vector<double> vm = wv.v().cell_masses(lat);
            row.sparse_ratio = lp_norm(A, vm, P.p()) / denom;
            row.maximal_ratio = lp_norm(M, vm, P.p()) / denom;
            row.sparse_quotient = row.sparse_ratio / std::pow(row.ap_const, rep.sparse_exponent);
            row.maximal_quotient = row.maximal_ratio / std::pow(row.ap_const, rep.maximal_exponent);
            double lhs = 0.0;
            for (std::size_t c = 0; c < lat.size(); ++c)
                lhs += A[c] * g[c];
            for (int i = 0; i < m; ++i) {
                std::vector<GridFunction> swapped = fs;
                swapped[static_cast<std::size_t>(i)] = g;
                const GridFunction B = sparse_operator(S, swapped);
                double rhs = 0.0;
                for (std::size_t c = 0; c < lat.size(); ++c)
                    rhs += B[c] * fs[static_cast<std::size_t>(i)][c];
                const double scale = std::max(std::abs(lhs), std::abs(rhs));
                row.duality_error = std::max(row.duality_error, scale > 0 ? std::abs(lhs - rhs) / scale : 0.0);
            }
        } catch (const InvariantError&) {
            throw;
        } catch (const Error& e) {
            log::info(std::string("audit trial skipped: ") + e.what());
            ++rep.skipped;
            continue;
        }
        if (!std::isfinite(row.sparse_quotient) || !std::isfinite(row.maximal_quotient)) {
            ++rep.skipped;
            continue;
        }
        rep.max_sparse_quotient = std::max(rep.max_sparse_quotient, row.sparse_quotient);
        rep.max_maximal_quotient = std::max(rep.max_maximal_quotient, row.maximal_quotient);
        rep.max_duality_error = std::max(rep.max_duality_error, row.duality_error);
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace mweights
