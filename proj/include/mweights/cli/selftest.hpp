#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mweights/core/io.hpp"
#include "mweights/experiments/audit.hpp"
#include "mweights/experiments/sweep.hpp"
#include "mweights/operators/maximal.hpp"
#include "mweights/operators/sparse.hpp"

namespace mweights::cli {

namespace detail {

inline DyadicCube random_cube(std::mt19937_64& rng, int n, int L)
{
    std::uniform_int_distribution<int> gen(-2, L);
    std::uniform_int_distribution<unsigned> mask(0, (1u << n) - 1);
    std::uniform_int_distribution<std::int64_t> pos(-2 * pow2(L), 2 * pow2(L) - 1);
    DyadicCube q;
    q.dim = n;
    q.grid = GridId{mask(rng), L};
    q.generation = gen(rng);
    for (int k = 0; k < n; ++k)
        q.index[k] = cube::locate(q.grid, k, q.generation, pos(rng), L);
    return q;
}

inline void require(bool ok, const std::string& what)
{
    if (!ok)
        throw InvariantError(what);
}

inline void dual_identity(std::mt19937_64& rng)
{
    for (const char* text : {"4,4", "5,5,5"}) {
        const ExponentTuple P = ExponentTuple::parse(text);
        for (int t = 0; t < 20; ++t) {
            const WeightVector wv = random_power_weights(P, 1, rng);
            for (int i = 0; i < P.m(); ++i) {
                const WeightVector d = dualize(wv, i);
                for (int k = 0; k < 5; ++k) {
                    const DyadicCube q = random_cube(rng, 1, 10);
                    const double lhs = per_cube_ap(d, q);
                    const double rhs = std::pow(per_cube_ap(wv, q), P.conj(i) / P.p());
                    require(std::abs(lhs - rhs) <= 1e-10 * rhs, "dual identity off by " + io::format_double(lhs / rhs - 1));
                }
            }
        }
    }
}

inline void holder_step(std::mt19937_64& rng)
{
    const Lattice lat = Lattice::centered(1, 8);
    const ExponentTuple P({3.0, 1.5});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const WeightVector wv = random_power_weights(P, 1, rng);
        const double keep = u(rng);
        std::vector<std::size_t> cells;
        for (std::size_t c = 0; c < lat.size(); ++c)
            if (u(rng) < keep)
                cells.push_back(c);
        if (cells.empty())
            continue;
        auto mass = [&](const Weight& w) {
            const auto cm = w.cell_masses(lat);
            double s = 0.0;
            for (std::size_t c : cells)
                s += cm[c];
            return s;
        };
        double rhs = std::pow(mass(wv.v()), 1.0 / (P.m() * P.p()));
        for (int i = 0; i < P.m(); ++i)
            rhs *= std::pow(mass(wv.sigma(i)), 1.0 / (P.m() * P.conj(i)));
        const double E = static_cast<double>(cells.size()) * lat.cell_volume();
        require(E <= rhs * (1 + 1e-12), "Hoelder step fails on a region of " + std::to_string(cells.size()) + " cells");
    }
}

inline void sparse_domination(std::mt19937_64& rng)
{
    const Lattice lat = Lattice::centered(1, 8);
    const GridId grid{1u, lat.level()};
    const DyadicCube root = *covering_cube(lat, grid);
    for (int m : {1, 2}) {
        const double a = std::ldexp(1.0, m + 2);
        for (int t = 0; t < 5; ++t) {
            std::vector<GridFunction> gs;
            for (int i = 0; i < m; ++i)
                gs.push_back(random_input(lat, rng));
            const SparseFamily S = build_sparse_family(gs, grid, a, root);
            const GridFunction A = sparse_operator(S, gs);
            const GridFunction M = dyadic_maximal(gs, grid, root.generation);
            for (std::size_t i = 0; i < lat.size(); ++i)
                require(M[i] <= a * A[i] * (1 + 1e-12), "sparse domination fails at cell " + std::to_string(i));
        }
    }
}

inline void weighted_maximal(std::mt19937_64& rng)
{
    const Lattice lat = Lattice::centered(1, 8);
    for (double p : {1.5, 2.0, 3.0}) {
        for (int t = 0; t < 3; ++t) {
            const WeightVector wv = random_step_weights(ExponentTuple({2.0}), lat, 4, rng);
            const GridFunction f = random_input(lat, rng);
            const Weight& w = wv.w(0);
            const GridFunction Mf = weighted_dyadic_maximal(f, w, GridId{});
            const double ratio = lp_norm(Mf, w, p) / lp_norm(f, w, p);
            require(ratio <= p / (p - 1) * (1 + 1e-12), "weighted maximal ratio " + io::format_double(ratio));
        }
    }
}

inline void maximal_bracket()
{
    const Lattice lat = Lattice::centered(2, 4);
    std::vector<GridFunction> fs = {GridFunction::indicator(lat, AxisBox::cube(2, -0.3, 0.7)),
                                    GridFunction::from_profile(lat, PowerProfile{1.0, -0.5, Ball{1.0}})};
    const MaximalBracket b = multilinear_maximal(fs);
    const double cap = std::pow(6.0, 4) * 4;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        require(b.lower[i] <= b.upper[i], "bracket inverted at cell " + std::to_string(i));
        require(b.upper[i] <= cap * b.lower[i] * (1 + 1e-12), "bracket wider than 6^{mn} 2^n");
    }
}

inline void csv_determinism()
{
    SweepConfig cfg;
    cfg.L = 8;
    cfg.eps = dyadic_eps(2, 5);
    std::string out[2];
    for (int k = 0; k < 2; ++k) {
        set_thread_cap(k == 0 ? 1 : 4);
        std::ostringstream os;
        write_sweep_csv(os, run_sweep(cfg));
        out[k] = os.str();
    }
    set_thread_cap(0);
    require(out[0] == out[1], "sweep CSV depends on the thread count");
}

inline void io_round_trip(std::mt19937_64& rng)
{
    const GridFunction f = random_input(Lattice::centered(2, 3), rng);
    std::stringstream s;
    io::write_csv(s, f);
    const GridFunction g = io::read_csv(s);
    for (std::size_t i = 0; i < f.size(); ++i)
        require(f[i] == g[i], "CSV round trip changed a value");
}

} // namespace detail

/// Small-scale invariant suite. Returns the number of failures.
inline int selftest(std::ostream& os)
{
    std::mt19937_64 rng(2024);
    const std::vector<std::pair<const char*, std::function<void()>>> checks = {
        {"dual identity", [&] { detail::dual_identity(rng); }},
        {"hoelder step", [&] { detail::holder_step(rng); }},
        {"sparse domination", [&] { detail::sparse_domination(rng); }},
        {"weighted maximal", [&] { detail::weighted_maximal(rng); }},
        {"maximal bracket", [] { detail::maximal_bracket(); }},
        {"csv determinism", [] { detail::csv_determinism(); }},
        {"io round trip", [&] { detail::io_round_trip(rng); }},
    };
    int failed = 0;
    for (const auto& [name, fn] : checks) {
        try {
            fn();
            os << "ok    " << name << '\n';
        } catch (const Error& e) {
            ++failed;
            os << "FAIL  " << name << ": " << e.what() << '\n';
        }
    }
    return failed;
}

} // namespace mweights::cli
