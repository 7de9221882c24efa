#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "specavg/averaging.hpp"

using namespace specavg;
using std::numbers::pi;

namespace
{

RankOneFamily dense8(std::uint64_t seed = 42)
{
    return RankOneFamily(make_dense_gaussian(8, seed), random_unit_vector(8, seed + 1));
}

RankOneFamily jacobi6(std::uint64_t seed = 7)
{
    return RankOneFamily(make_jacobi(6, seed), basis_vector(6, 0));
}

std::vector<UpperHalfPlanePoint> random_grid(const RankOneFamily& fam, std::size_t count, std::uint64_t seed,
                                             double eps_lo = 1e-3, double eps_hi = 1.0)
{
    std::mt19937_64 rng(seed);
    const auto& ev = fam.eigen().values;
    std::uniform_real_distribution<double> ux(ev.front() - 0.5, ev.back() + 0.5), ue(std::log(eps_lo),
                                                                                      std::log(eps_hi));
    std::vector<UpperHalfPlanePoint> out;
    for (std::size_t i = 0; i < count; ++i)
        out.emplace_back(ux(rng), std::exp(ue(rng)));
    return out;
}

} // namespace

TEST(MakeNu, Families)
{
    auto spec = [](NuKind k) {
        NuSpec s;
        s.kind = k;
        return s;
    };
    EXPECT_NEAR(make_nu(spec(NuKind::CauchyWeight)).total_mass(), pi, 1e-15);
    EXPECT_FALSE(make_nu(spec(NuKind::Lebesgue)).has_finite_1_over_1_plus_y());
    EXPECT_TRUE(make_nu(spec(NuKind::Lebesgue)).has_finite_1_over_1_plus_y2());
    NuSpec cantor = spec(NuKind::CantorApprox);
    cantor.depth = 8;
    const auto c = make_nu(cantor);
    EXPECT_EQ(c.total_mass(), 1.0);
    EXPECT_DOUBLE_EQ(c.resolution_floor(), std::pow(3.0, -8));
    EXPECT_THROW(nu_kind_from_string("gamma"), argument_error);
    EXPECT_EQ(nu_kind_from_string("uniform"), NuKind::Uniform);
}

TEST(IntervalUnionTest, MergesOverlapsKeepsTouching)
{
    IntervalUnion u{{0.0, 1.0}, {0.5, 2.0}, {2.0, 3.0}};
    ASSERT_EQ(u.parts().size(), 2u);
    EXPECT_FALSE(u.contains(2.0));
    EXPECT_TRUE(u.contains(1.5));
    EXPECT_DOUBLE_EQ(u.length(), 3.0);
    EXPECT_THROW(IntervalUnion({{1.0, 1.0}}), argument_error);
}

TEST(KappaSet, OneByOneLebesgueIsLength)
{
    RankOneFamily fam(SelfAdjointOperator(Matrix(1, {0.0})), CyclicVector({1.0}));
    const KappaProbe probe(fam, make_lebesgue());
    for (auto [a, b] : {std::pair{-0.3, 0.8}, std::pair{0.1, 5.0}, std::pair{-7.0, -2.5}}) {
        auto k = kappa_set(probe, IntervalUnion{{a, b}});
        EXPECT_NEAR(k.value, b - a, 1e-9);
    }
    // Endpoint on the atom at 0 is nudged with a warning.
    auto k = kappa_set(probe, IntervalUnion{{0.0, 1.0}});
    EXPECT_NEAR(k.value, 1.0, 1e-9);
    EXPECT_FALSE(k.warnings.empty());
}

TEST(KappaSet, AtomicNuIsPointEvaluation)
{
    auto fam = dense8();
    const double lambda0 = 0.7;
    const KappaProbe probe(fam, make_dirac(lambda0));
    const IntervalUnion b{{-0.5, 0.7}};
    EXPECT_NEAR(kappa_set(probe, b).value, fam.perturbed_direct(lambda0).mass_in(-0.5, 0.7), 1e-12);
}

TEST(KappaSet, KotaniDense8)
{
    auto fam = dense8();
    const auto start = std::chrono::steady_clock::now();
    auto r = kotani_check(fam, IntervalUnion{{-0.5, 0.7}});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LE(r.abs_err, 1e-6);
    EXPECT_NEAR(r.lhs, 1.2, 1e-15);
    EXPECT_LE(r.error_estimate, 1e-9);
    EXPECT_LE(seconds, 5.0);
}

TEST(KappaSet, KotaniDisjointUnionAndAdditivity)
{
    auto fam = dense8(9);
    auto whole = kotani_check(fam, IntervalUnion{{-1.0, -0.5}, {0.2, 0.3}});
    EXPECT_LE(whole.abs_err, 1e-6);
    auto left = kotani_check(fam, IntervalUnion{{-1.0, -0.5}});
    auto right = kotani_check(fam, IntervalUnion{{0.2, 0.3}});
    EXPECT_NEAR(left.rhs + right.rhs, whole.rhs, 1e-9);
}

TEST(KappaSet, KotaniOneByOneExactForAnySet)
{
    RankOneFamily fam(SelfAdjointOperator(Matrix(1, {0.4})), CyclicVector({1.0}));
    auto r = kotani_check(fam, IntervalUnion{{-3.0, -1.0}, {0.0, 0.1}, {2.0, 9.0}});
    EXPECT_LE(r.abs_err, 1e-8);
}

TEST(KappaSet, CauchyWeightMonotoneAndAdditive)
{
    auto fam = jacobi6();
    const KappaProbe probe(fam, make_cauchy_weight());
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 3.0);
    const double tol = probe.quad().abs_tol;
    for (int i = 0; i < 5; ++i) {
        double p[3] = {u(rng), u(rng), u(rng)};
        std::sort(p, p + 3);
        const double a = kappa_set(probe, IntervalUnion{{p[0], p[1]}}).value;
        const double b = kappa_set(probe, IntervalUnion{{p[1], p[2]}}).value;
        const double ab = kappa_set(probe, IntervalUnion{{p[0], p[1]}, {p[1], p[2]}}).value;
        const double whole = kappa_set(probe, IntervalUnion{{p[0], p[2]}}).value;
        EXPECT_NEAR(a + b, ab, 3 * tol);
        // p[1] is a single point; kappa has no atoms there for this nu.
        EXPECT_NEAR(whole, ab, 3 * tol);
        EXPECT_LE(a, whole + 3 * tol);
    }
}

TEST(KappaSet, UniformNuLocallyFiniteAndStable)
{
    auto fam = jacobi6();
    QuadratureConfig coarse, fine;
    coarse.abs_tol = 1e-7;
    fine.abs_tol = 1e-11;
    const IntervalUnion r{{-5.0, 5.0}};
    const double a = kappa_set(KappaProbe(fam, make_uniform(0.0, 1.0), coarse), r).value;
    const double b = kappa_set(KappaProbe(fam, make_uniform(0.0, 1.0), fine), r).value;
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_NEAR(a, b, 2e-7);
    // nu is a probability measure and all eigenvalues stay inside [-5, 5].
    EXPECT_NEAR(b, 1.0, 1e-10);
}

TEST(KappaPoisson, DiracNuIsPMu)
{
    auto fam = dense8();
    const KappaProbe probe(fam, make_dirac(0.0));
    const UpperHalfPlanePoint z(0.3, 0.05);
    EXPECT_NEAR(kappa_poisson(probe, z).value, fam.borel(z.z()).imag(), 1e-12);
}

TEST(KappaPoisson, LebesgueNuIsPi)
{
    for (auto fam : {dense8(), jacobi6()}) {
        const KappaProbe probe(fam, make_lebesgue());
        for (const auto& z : random_grid(fam, 20, 5))
            EXPECT_NEAR(kappa_poisson(probe, z).value, pi, 1e-8);
    }
}

TEST(KappaPoisson, CauchyNuMatchesClosedForm)
{
    auto fam = RankOneFamily(make_dense_gaussian(6, 12), random_unit_vector(6, 13));
    const KappaProbe probe(fam, make_cauchy_weight());
    for (const auto& z : random_grid(fam, 50, 6)) {
        const auto w = -1.0 / fam.borel(z.z());
        const double closed = pi * (1.0 + w.imag()) / (w.real() * w.real() + (1.0 + w.imag()) * (1.0 + w.imag()));
        EXPECT_NEAR(kappa_poisson(probe, z).value, closed, 1e-8);
    }
}

TEST(PoissonIdentity, UniformGrid)
{
    auto fam = jacobi6();
    const KappaProbe probe(fam, make_uniform(0.0, 1.0));
    const auto& ev = fam.eigen().values;
    const auto grid = make_z_grid(ev.front(), ev.back(), 10, 1e-3, 1.0, 10);
    auto report = poisson_identity_check(probe, grid);
    EXPECT_EQ(report.points.size(), 100u);
    EXPECT_LE(report.max_deviation, 1e-8) << report.worst_x << " " << report.worst_eps;
}

TEST(PoissonIdentity, CantorNu)
{
    auto fam = jacobi6();
    const KappaProbe probe(fam, make_cantor(8));
    const auto& ev = fam.eigen().values;
    const auto grid = make_z_grid(ev.front(), ev.back(), 5, 1e-3, 1.0, 4);
    auto report = poisson_identity_check(probe, grid);
    EXPECT_LE(report.max_deviation, 1e-7) << report.worst_x << " " << report.worst_eps;
}

TEST(BorelIdentity, DiracNu)
{
    auto fam = dense8();
    const KappaProbe probe(fam, make_dirac(0.0));
    const std::vector<UpperHalfPlanePoint> grid{UpperHalfPlanePoint(0.1, 0.2), UpperHalfPlanePoint(-1.0, 1.0)};
    auto report = borel_identity_check(probe, grid);
    for (const auto& p : report.points)
        EXPECT_LE(std::abs(p.lhs - fam.borel({p.x, p.eps})), 1e-12);
    EXPECT_LE(report.max_deviation, 1e-12);
}

TEST(BorelIdentity, UniformNu)
{
    auto fam = RankOneFamily(make_dense_gaussian(6, 21), random_unit_vector(6, 22));
    const KappaProbe probe(fam, make_uniform(0.0, 1.0));
    auto report = borel_identity_check(probe, random_grid(fam, 25, 23));
    EXPECT_LE(report.max_deviation, 1e-8);
}

TEST(BorelIdentity, LebesgueRejected)
{
    const KappaProbe probe(dense8(), make_lebesgue());
    const std::vector<UpperHalfPlanePoint> grid{UpperHalfPlanePoint(0.0, 1.0)};
    EXPECT_THROW(borel_identity_check(probe, grid), precondition_error);
}

TEST(CAlpha, LebesgueValidationAtAlphaOne)
{
    std::vector<UpperHalfPlanePoint> grid = make_z_grid(-3.0, 3.0, 7, 1e-4, 10.0, 11);
    auto v = validate_c_alpha(make_lebesgue(), 1.0, 1.0, grid);
    EXPECT_NEAR(v.observed_sup, pi, 1e-15);
    EXPECT_NEAR(v.c_used, pi, 1e-15);
    EXPECT_NEAR(v.c_without_width_factor, pi / 2.0, 1e-15);
    EXPECT_TRUE(v.used_bounds_sup);
    EXPECT_FALSE(v.without_factor_bounds_sup);
}

TEST(CAlpha, AlphaZeroLimitAndDirac)
{
    EXPECT_EQ(c_alpha(0.0, 2.5), 2.5);
    EXPECT_NEAR(c_alpha(1e-9, 2.5), 2.5, 1e-7);
    // P_delta0(w) = 1/Im w with equality on Re w = 0.
    const std::vector<UpperHalfPlanePoint> grid{UpperHalfPlanePoint(0.0, 0.1), UpperHalfPlanePoint(0.3, 2.0)};
    auto v = validate_c_alpha(make_dirac(0.0), 0.0, 1.0, grid);
    EXPECT_NEAR(v.observed_sup, 1.0, 1e-15);
    EXPECT_TRUE(v.used_bounds_sup);
    EXPECT_THROW(c_alpha(1.5, 1.0), argument_error);
}

TEST(CAlpha, PowerLawIntegralOracle)
{
    // Layer-cake bound: 2^alpha int_0^1 (1/s - 1)^(alpha/2) ds.
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double alpha : {0.2, 0.5, 0.63, 0.9}) {
        auto f = [alpha](double s) { return std::pow(1.0 / s - 1.0, alpha / 2.0); };
        const double integral = ts.integrate(f, 0.0, 1.0);
        EXPECT_NEAR(std::pow(2.0, alpha) * integral, c_alpha(alpha, 1.0), 1e-8) << alpha;
    }
}

TEST(UahBound, AlphaValidation)
{
    EXPECT_THROW(uah_bound_check(KappaProbe(dense8(), make_lebesgue()), 1.2, 1.0, {}), argument_error);
}

TEST(UahBound, LebesgueAlphaOne)
{
    auto fam = jacobi6();
    const KappaProbe probe(fam, make_lebesgue());
    auto report = uah_bound_check(probe, 1.0, 1.0, random_grid(fam, 10, 8));
    EXPECT_TRUE(report.violations.empty());
    EXPECT_NEAR(report.c, pi, 1e-15);
}

TEST(UahBound, CantorNuNoViolations)
{
    auto fam = jacobi6();
    const auto nu = make_cantor(10);
    const double alpha = std::log(2.0) / std::log(3.0);
    const double k = uah_constant(nu, alpha, triadic_scan(10)).constant * 1.1;
    const KappaProbe probe(fam, nu);
    auto report = uah_bound_check(probe, alpha, k, random_grid(fam, 100, 9, std::pow(3.0, -8), 1.0));
    EXPECT_TRUE(report.violations.empty());
}

TEST(AtomCheck, ContinuousNuGivesZero)
{
    auto fam = dense8();
    std::vector<double> lambdas{-2.0, -0.5, 0.0, 0.3, 1.7};
    const auto cands = atom_candidates(fam, lambdas);
    for (auto nu : {make_lebesgue(), make_uniform(0.0, 1.0), make_cauchy_weight()}) {
        auto r = kappa_atom_check(KappaProbe(fam, nu), cands);
        EXPECT_LE(r.max_estimate, 1e-8);
        EXPECT_EQ(r.estimates.size(), cands.size());
    }
}

TEST(AtomCheck, AtomicNuRejected)
{
    const std::vector<double> cands{0.0};
    EXPECT_THROW(kappa_atom_check(KappaProbe(dense8(), make_dirac(1.0)), cands), precondition_error);
}

TEST(ResolutionFloor, KappaFloorScalesWithCouplingRate)
{
    auto fam = jacobi6();
    const KappaProbe probe(fam, make_cantor(10));
    const double x = fam.eigen().values.back() + 2.0;
    const double f = fam.mu().borel_real(x), df = fam.mu().borel_real_derivative(x);
    EXPECT_NEAR(probe.resolution_floor_at(x), std::pow(3.0, -10) * f * f / df, 1e-18);
    EXPECT_EQ(KappaProbe(fam, make_lebesgue()).resolution_floor_at(x), 0.0);
}
