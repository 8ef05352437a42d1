#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mweights/weights/ap.hpp"

using namespace mweights;

namespace {

DyadicCube std_cube(int g, std::int64_t j)
{
    DyadicCube q;
    q.generation = g;
    q.index[0] = j;
    q.dim = 1;
    return q;
}

DyadicCube random_cube(std::mt19937_64& rng, int n, int L)
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

// antiderivative of |x|^a
double prim(double a, double x)
{
    return std::copysign(std::pow(std::abs(x), a + 1.0) / (a + 1.0), x);
}

} // namespace

TEST(Exponents, DerivedQuantities)
{
    const ExponentTuple P = ExponentTuple::parse("4, 4/3");
    EXPECT_NEAR(1.0 / P.p(), 1.0 / 4 + 3.0 / 4, 1e-15);
    for (int i = 0; i < P.m(); ++i)
        EXPECT_NEAR(1.0 / P[i] + 1.0 / P.conj(i), 1.0, 1e-15);
    EXPECT_NEAR(P.maximal_exponent(), 4.0, 1e-12);
    EXPECT_NEAR(P.sparse_exponent(), 4.0, 1e-12);
    const ExponentTuple Q({4.0, 4.0});
    EXPECT_DOUBLE_EQ(Q.p(), 2.0);
    EXPECT_EQ(Q.sparse_exponent(), 1.0);
    EXPECT_NEAR(Q.maximal_exponent(), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(ExponentTuple({2.0, 2.0}).sparse_exponent(), 2.0);
    EXPECT_THROW(ExponentTuple({1.0, 2.0}), ConfigError);
    EXPECT_THROW(ExponentTuple::parse("2,x"), ConfigError);
    EXPECT_THROW(ExponentTuple({2.0, 2.0}).p_dual(), ConfigError);
}

TEST(Exponents, SparseExponentIsOneExactlyWhenPDominates)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1.05, 12.0);
    for (int t = 0; t < 500; ++t) {
        const int m = 1 + t % 3;
        std::vector<double> p(static_cast<std::size_t>(m));
        for (double& x : p)
            x = u(rng);
        const ExponentTuple P(p);
        double mx = 0.0;
        for (int i = 0; i < m; ++i)
            mx = std::max(mx, P.conj(i));
        EXPECT_EQ(P.sparse_exponent() == 1.0, P.p() >= mx);
    }
}

TEST(WeightTest, Validation)
{
    EXPECT_THROW(Weight::power(-1.0, 1), ConfigError);
    EXPECT_NO_THROW(Weight::power(-1.5, 2));
    const Lattice lat = Lattice::centered(1, 3);
    EXPECT_THROW(Weight::grid(GridFunction::zeros(lat)), ConfigError);
}

TEST(WeightTest, LpNormExamples)
{
    const Lattice lat = Lattice::centered(1, 12);
    AxisBox unit;
    unit.lo[0] = 0;
    unit.hi[0] = 1;
    const GridFunction f = GridFunction::indicator(lat, unit);
    EXPECT_NEAR(lp_norm(f, Weight::constant(1), 2.0), 1.0, 1e-13);
    EXPECT_NEAR(lp_norm(f, Weight::power(0.5, 1), 1.0), 2.0 / 3.0, 1e-13);
    // analytic norm of |x|^{eps-1} chi_{B(0,1)} in L^{p1}(|x|^{(1-eps)(p1-1)}) is (2/eps)^{1/p1}
    const double p1 = 3.0;
    for (double eps : {0.5, 0.125, 1.0 / 512}) {
        PowerProfile prof{1.0, eps - 1.0, Ball{1.0}};
        const double exact = exact_lp_norm(prof, Weight::power((1 - eps) * (p1 - 1), 1), p1, 1);
        EXPECT_NEAR(exact, std::pow(2.0 / eps, 1.0 / p1), 1e-10 * exact);
    }
}

TEST(WeightVectorTest, ExactExponentArithmetic)
{
    const ExponentTuple P({2.0, 3.0, 6.0});
    const WeightVector wv({Weight::power(0.5, 1), Weight::power(-0.25, 1), Weight::constant(1, 2.0)}, P);
    const double p = P.p();
    EXPECT_DOUBLE_EQ(wv.v().exponent(), 0.5 * p / 2 - 0.25 * p / 3);
    EXPECT_NEAR(wv.v().coefficient(), std::pow(2.0, p / 6), 1e-15);
    EXPECT_DOUBLE_EQ(wv.sigma(0).exponent(), 0.5 * (1 - P.conj(0)));

    const ExponentTuple Q({4.0, 4.0});
    const WeightVector wq({Weight::power(0.5, 1), Weight::constant(1)}, Q);
    const WeightVector d = dualize(wq, 0);
    EXPECT_NEAR(d.w(0).exponent(), (1 - Q.p_dual()) * (0.5 * Q.p() / 4), 1e-15);
    EXPECT_NEAR(d.exponents()[0], 2.0, 1e-15);
}

TEST(WeightVectorTest, GridCombinedWeightIsCellwiseProduct)
{
    const Lattice lat = Lattice::centered(2, 4);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    std::vector<double> a(lat.size()), b(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
    }
    const ExponentTuple P({2.5, 3.5});
    const WeightVector wv({Weight::grid(GridFunction(lat, a)), Weight::grid(GridFunction(lat, b))}, P);
    const double p = P.p();
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const double expect = std::pow(a[i], p / 2.5) * std::pow(b[i], p / 3.5);
        EXPECT_NEAR(wv.v().values()[i], expect, 1e-10 * expect);
    }
    // a power weight joining a grid weight becomes piecewise constant
    const WeightVector mixed({Weight::grid(GridFunction(lat, a)), Weight::power(0.5, 2)}, P);
    EXPECT_FALSE(mixed.analytic());
    EXPECT_FALSE(mixed.w(1).is_power());
}

TEST(PerCubeAp, ConstantWeightsGiveOne)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> c(0.01, 100.0);
    for (int m = 1; m <= 3; ++m) {
        std::vector<double> p(static_cast<std::size_t>(m), 1.5 + m);
        std::vector<Weight> w;
        for (int i = 0; i < m; ++i)
            w.push_back(Weight::constant(1, c(rng)));
        const WeightVector wv(w, ExponentTuple(p));
        for (int t = 0; t < 20; ++t)
            EXPECT_NEAR(per_cube_ap(wv, random_cube(rng, 1, 8)), 1.0, 1e-12);
        EXPECT_NEAR(ap_constant(wv, CubeFamily::dyadic(Lattice::centered(1, 6))).constant, 1.0, 1e-12);
    }
}

TEST(PerCubeAp, SquareRootWeightOnUnitInterval)
{
    // (int_0^1 x^{1/2}) (int_0^1 x^{-1/2})^{p/p'} with p = p' = 2
    const WeightVector wv({Weight::power(0.5, 1)}, ExponentTuple({2.0}));
    EXPECT_NEAR(per_cube_ap(wv, std_cube(0, 0)), 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(classical_ap(Weight::power(0.5, 1), 2.0, std_cube(0, 0)), 4.0 / 3.0, 1e-14);
}

TEST(PerCubeAp, ScaleInvariancePerComponent)
{
    std::mt19937_64 rng(12);
    const ExponentTuple P({3.0, 2.5});
    const WeightVector a({Weight::power(0.7, 1), Weight::power(-0.3, 1)}, P);
    const WeightVector b({Weight::power(0.7, 1, 17.0), Weight::power(-0.3, 1, 0.02)}, P);
    for (int t = 0; t < 100; ++t) {
        const DyadicCube q = random_cube(rng, 1, 10);
        EXPECT_NEAR(per_cube_ap(a, q), per_cube_ap(b, q), 1e-12 * per_cube_ap(a, q));
    }
}

TEST(PerCubeAp, LinearCaseIsClassical)
{
    std::mt19937_64 rng(13);
    for (double p : {1.5, 2.0, 4.0}) {
        const Weight w = Weight::power(0.6, 2);
        const WeightVector wv({w}, ExponentTuple({p}));
        for (int t = 0; t < 30; ++t) {
            const DyadicCube q = random_cube(rng, 2, 6);
            const double c = classical_ap(w, p, q);
            EXPECT_NEAR(per_cube_ap(wv, q), c, 1e-9 * c);
        }
    }
}

TEST(DualIdentity, DualizeIdentityPerCube)
{
    std::mt19937_64 rng(21);
    const ExponentTuple P({4.0, 4.0});
    const WeightVector wv({Weight::power(0.5, 1), Weight::constant(1)}, P);
    for (int i = 0; i < 2; ++i) {
        const WeightVector d = dualize(wv, i);
        for (int t = 0; t < 200; ++t) {
            const DyadicCube q = random_cube(rng, 1, 10);
            const double lhs = per_cube_ap(d, q);
            const double rhs = std::pow(per_cube_ap(wv, q), P.conj(i) / P.p());
            EXPECT_NEAR(lhs, rhs, 1e-10 * rhs);
        }
    }
    EXPECT_THROW(dualize(WeightVector({Weight::constant(1), Weight::constant(1)}, ExponentTuple({2.0, 2.0})), 0),
                 ConfigError);
}

TEST(DualIdentity, DualizeIdentityForGridWeights)
{
    const Lattice lat = Lattice::centered(1, 7);
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    std::vector<Weight> w;
    for (int i = 0; i < 3; ++i) {
        std::vector<double> v(lat.size());
        for (double& x : v)
            x = u(rng);
        w.push_back(Weight::grid(GridFunction(lat, v)));
    }
    const ExponentTuple P({3.0, 4.0, 5.0});
    const WeightVector wv(w, P);
    const CubeFamily fam = CubeFamily::dyadic(lat, 0);
    const ApReport base = ap_constant(wv, fam);
    for (int i = 0; i < 3; ++i) {
        const ApReport dual = ap_constant(dualize(wv, i), fam);
        const double expect = std::pow(base.constant, P.conj(i) / P.p());
        EXPECT_NEAR(dual.constant, expect, 1e-12 * expect);
        EXPECT_EQ(dual.scanned, base.scanned);
    }
}

TEST(ApConstant, MatchesBruteForceOverAllIntervals)
{
    const int L = 8;
    const Lattice lat = Lattice::centered(1, L);
    const WeightVector wv({Weight::power(0.5, 1)}, ExponentTuple({2.0}));
    CubeFamily fam = CubeFamily::dyadic(lat);
    const ApReport dyadic = ap_constant(wv, fam);
    fam.cell_aligned = true;
    const ApReport full = ap_constant(wv, fam);

    double brute = 0.0;
    const double h = lat.cell_width();
    const auto N = lat.extent();
    for (std::int64_t a = 0; a < N; ++a)
        for (std::int64_t b = a + 1; b <= N; ++b) {
            const double lo = (lat.lo() + a) * h, hi = (lat.lo() + b) * h, len = hi - lo;
            const double wm = prim(0.5, hi) - prim(0.5, lo);
            const double sm = prim(-0.5, hi) - prim(-0.5, lo);
            brute = std::max(brute, wm / len * sm / len);
        }
    EXPECT_NEAR(full.constant / brute, 1.0, 0.01);
    EXPECT_LE(dyadic.constant, full.constant);
    EXPECT_GT(dyadic.constant, 0.85 * brute);
    EXPECT_GT(full.scanned, dyadic.scanned);
}

TEST(ApConstant, MonotoneInFamily)
{
    const Lattice lat = Lattice::centered(2, 5);
    const WeightVector wv({Weight::power(0.8, 2), Weight::power(-0.4, 2)}, ExponentTuple({2.0, 3.0}));
    CubeFamily small = CubeFamily::dyadic(lat, 1);
    small.all_grids = false;
    CubeFamily mid = CubeFamily::dyadic(lat, 1);
    CubeFamily big = CubeFamily::dyadic(lat, -2);
    const double a = ap_constant(wv, small).constant, b = ap_constant(wv, mid).constant, c = ap_constant(wv, big).constant;
    EXPECT_LE(a, b);
    EXPECT_LE(b, c);
    big.g_min = 9;
    EXPECT_THROW(ap_constant(wv, big), ConfigError);
}

TEST(ApConstant, ReportJson)
{
    const Lattice lat = Lattice::centered(1, 5);
    const WeightVector wv({Weight::power(0.75, 1), Weight::constant(1)}, ExponentTuple({2.0, 2.0}));
    const auto j = ap_constant(wv, CubeFamily::dyadic(lat)).json();
    EXPECT_TRUE(j.contains("constant"));
    EXPECT_TRUE(j["argmax"].contains("grid"));
    EXPECT_TRUE(j["argmax"].contains("g"));
    EXPECT_TRUE(j["argmax"].contains("j"));
    EXPECT_GT(j["scanned"].get<std::size_t>(), 0u);
}
