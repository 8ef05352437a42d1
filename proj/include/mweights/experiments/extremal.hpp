#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mweights/core/error.hpp"
#include "mweights/core/grid_function.hpp"
#include "mweights/operators/riesz.hpp"
#include "mweights/weights/ap.hpp"

namespace mweights {

enum class SweepOperator { maximal, riesz_direct, riesz_adjoint };

inline const char* operator_name(SweepOperator op)
{
    switch (op) {
    case SweepOperator::maximal:
        return "maximal";
    case SweepOperator::riesz_direct:
        return "riesz-direct";
    case SweepOperator::riesz_adjoint:
        return "riesz-adjoint";
    }
    return "?";
}

/// One factor ||f||_{L^q(w)} of the denominator, integrated exactly.
struct InputNorm {
    PowerProfile f;
    Weight w;
    double q = 1.0;
};

/// Extremal pair plus the norms that make up the operator ratio.
struct Extremal {
    SweepOperator op = SweepOperator::maximal;
    ExponentTuple P;               // after moving the distinguished slot first
    std::vector<int> order;        // order[k] = slot of the caller's tuple placed at k
    double eps = 0.5;
    int n = 1;
    std::vector<PowerProfile> f;
    std::vector<Weight> w;
    std::vector<InputNorm> inputs;
    Weight out_weight;
    double out_q = 1.0;
    int out_sign = 0;              // 0: whole box, +1 / -1: half-line x > 0 / x < 0
    double out_radius = std::numeric_limits<double>::infinity();
    double homogeneity = 0.0;      // degree of the output near the origin

    WeightVector weights() const { return WeightVector(w, P); }
};

namespace detail {

inline void check_eps(double eps)
{
    if (!(eps > 0.0 && eps < 1.0))
        throw ConfigError("epsilon " + std::to_string(eps) + " outside (0, 1)");
}

// Moves the slot with the largest conjugate exponent to the front.
inline std::vector<int> distinguished_first(const ExponentTuple& P)
{
    std::vector<int> order(static_cast<std::size_t>(P.m()));
    for (int i = 0; i < P.m(); ++i)
        order[static_cast<std::size_t>(i)] = i;
    int best = 0;
    for (int i = 1; i < P.m(); ++i)
        if (P.conj(i) > P.conj(best))
            best = i;
    std::rotate(order.begin(), order.begin() + best, order.begin() + best + 1);
    return order;
}

inline ExponentTuple permuted(const ExponentTuple& P, const std::vector<int>& order)
{
    std::vector<double> p;
    for (int k : order)
        p.push_back(P[k]);
    return ExponentTuple(p);
}

inline AxisBox segment(double lo, double hi)
{
    AxisBox b;
    b.dim = 1;
    b.lo[0] = lo;
    b.hi[0] = hi;
    return b;
}

} // namespace detail

/// f_1 = |x|^{eps-n} chi_B, f_i = |x|^{(eps-n)/p_i} chi_B (i >= 2),
/// w_1 = |x|^{(n-eps)(p_1-1)}, w_i = 1, with slot 1 holding the largest p_i'.
inline Extremal maximal_extremal(const ExponentTuple& P_in, double eps, int n)
{
    detail::check_eps(eps);
    check_dim(n);
    Extremal e;
    e.op = SweepOperator::maximal;
    e.order = detail::distinguished_first(P_in);
    e.P = detail::permuted(P_in, e.order);
    e.eps = eps;
    e.n = n;
    for (int i = 0; i < e.P.m(); ++i) {
        const double b = i == 0 ? eps - n : (eps - n) / e.P[i];
        e.f.push_back(PowerProfile{1.0, b, Ball{1.0}});
        e.w.push_back(i == 0 ? Weight::power((n - eps) * (e.P[0] - 1.0), n) : Weight::constant(n));
        e.homogeneity += b;
    }
    for (int i = 0; i < e.P.m(); ++i)
        e.inputs.push_back({e.f[static_cast<std::size_t>(i)], e.w[static_cast<std::size_t>(i)], e.P[i]});
    e.out_weight = e.weights().v();
    e.out_q = e.P.p();
    return e;
}

/// Riesz configurations in one dimension with m = 2. Direct: inputs on
/// V = [-1,0], output on U = (0,1]. Adjoint in the first slot: f_1 on [0,1],
/// f_2 on [-1,0], output on [-1,0), norms of the dual problem.
inline Extremal riesz_extremal(const ExponentTuple& P_in, double eps, RieszVariant variant)
{
    detail::check_eps(eps);
    if (P_in.m() != 2)
        throw ConfigError("the Riesz examples are bilinear (m = 2)");
    Extremal e;
    e.order = detail::distinguished_first(P_in);
    e.P = detail::permuted(P_in, e.order);
    e.eps = eps;
    e.n = 1;
    const ExponentTuple& P = e.P;
    const double p = P.p(), p1 = P[0], p2 = P[1];
    const double big = std::max(P.conj(0), P.conj(1));
    const AxisBox V = detail::segment(-1.0, 0.0), V1 = detail::segment(0.0, 1.0);
    e.out_radius = 1.0;
    if (variant == RieszVariant::direct) {
        if (!(p >= 1.0 && big >= p))
            throw ConfigError("direct Riesz example needs max(p_1', p_2') >= p >= 1; got p = " + std::to_string(p) +
                              ", max p_i' = " + std::to_string(big) + " (use the adjoint variant when p > max p_i')");
        e.op = SweepOperator::riesz_direct;
        e.f = {PowerProfile{1.0, eps - 1.0, V}, PowerProfile{1.0, (eps - 1.0) / p2, V}};
        e.w = {Weight::power((1.0 - eps) * (p1 - 1.0), 1), Weight::constant(1)};
        e.inputs = {{e.f[0], e.w[0], p1}, {e.f[1], e.w[1], p2}};
        e.out_weight = e.weights().v();
        e.out_q = p;
        e.out_sign = +1;
    } else {
        if (!(p > big))
            throw ConfigError("adjoint Riesz example needs p > max(p_1', p_2'); got p = " + std::to_string(p) +
                              ", max p_i' = " + std::to_string(big) + " (use the direct variant)");
        e.op = SweepOperator::riesz_adjoint;
        e.f = {PowerProfile{1.0, eps - 1.0, V1}, PowerProfile{1.0, (eps - 1.0) / p2, V}};
        e.w = {Weight::formal_power((eps - 1.0) * p1 / p, 1), Weight::constant(1)};
        const WeightVector wv = e.weights();
        const double pd = P.p_dual();
        e.inputs = {{e.f[0], wv.v().pow(1.0 - pd), pd}, {e.f[1], e.w[1], p2}};
        e.out_weight = wv.sigma(0);
        e.out_q = P.conj(0);
        e.out_sign = -1;
    }
    e.homogeneity = e.f[0].exponent + e.f[1].exponent;
    return e;
}

} // namespace mweights
