#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "specavg/operator.hpp"
#include "specavg/transform.hpp"

using namespace specavg;
using std::numbers::pi;

namespace
{

double gk(auto f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-13);
}

std::vector<Measure> probability_measures()
{
    auto fam = RankOneFamily(make_dense_gaussian(8, 42), random_unit_vector(8, 43));
    return {make_dirac(0.0),
            make_atomic({{-1.0, 0.5}, {1.0, 0.5}}),
            make_uniform(0.0, 1.0),
            make_cantor(10),
            fam.mu().to_measure(),
            make_dirac(0.3, 0.5) + make_uniform(-1.0, 1.0).scaled(0.5)};
}

} // namespace

TEST(UpperHalfPlane, RejectsRealAxis)
{
    EXPECT_THROW(UpperHalfPlanePoint(0.0, 0.0), argument_error);
    EXPECT_THROW(UpperHalfPlanePoint(0.0, -1.0), argument_error);
}

TEST(Borel, DiracAtI)
{
    auto t = borel_transform(make_dirac(0.0), UpperHalfPlanePoint(0.0, 1.0));
    EXPECT_NEAR(t.Q, 0.0, 1e-16);
    EXPECT_NEAR(t.P, 1.0, 1e-16);
}

TEST(Borel, SymmetricPair)
{
    auto t = borel_transform(make_atomic({{-1.0, 0.5}, {1.0, 0.5}}), UpperHalfPlanePoint(0.0, 1.0));
    EXPECT_NEAR(t.Q, 0.0, 1e-16);
    EXPECT_NEAR(t.P, 0.5, 1e-16);
}

TEST(Borel, UniformClosedFormAgainstQuadrature)
{
    auto t = borel_transform(make_uniform(-1.0, 1.0), UpperHalfPlanePoint(0.0, 1.0));
    // (1/2) log((1 - i)/(-1 - i))
    const std::complex<double> closed = 0.5 * std::log(std::complex<double>(1.0, -1.0) /
                                                       std::complex<double>(-1.0, -1.0));
    const double p_oracle = gk([](double y) { return 0.5 / (y * y + 1.0); }, -1.0, 1.0);
    EXPECT_NEAR(t.P, p_oracle, 1e-12);
    EXPECT_NEAR(t.P, pi / 4.0, 1e-12);
    EXPECT_NEAR(t.P, closed.imag(), 1e-12);
    EXPECT_NEAR(t.Q, 0.0, 1e-12);
}

TEST(Borel, LebesgueUnsupported)
{
    EXPECT_THROW(borel_transform(make_lebesgue(), UpperHalfPlanePoint(0.0, 1.0)),
                 unsupported_transform);
    EXPECT_THROW(conjugate_poisson_transform(make_lebesgue(), UpperHalfPlanePoint(0.0, 1.0)),
                 unsupported_transform);
}

TEST(Poisson, Examples)
{
    EXPECT_DOUBLE_EQ(poisson_transform(make_lebesgue(), UpperHalfPlanePoint(12.0, 0.01)), pi);
    EXPECT_DOUBLE_EQ(poisson_transform(make_dirac(0.0), UpperHalfPlanePoint(0.0, 0.25)), 4.0);
}

TEST(Poisson, CauchyClosedFormAgainstQuadrature)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), ue(0.01, 3.0);
    const auto cw = make_cauchy_weight();
    for (int i = 0; i < 20; ++i) {
        const double x = ux(rng), e = ue(rng);
        auto integrand = [x, e](double t) {
            const double y = std::tan(t);
            return e / ((y - x) * (y - x) + e * e);
        };
        const double oracle = gk(integrand, -pi / 2, std::atan(x)) + gk(integrand, std::atan(x), pi / 2);
        const double closed = pi * (1.0 + e) / (x * x + (1.0 + e) * (1.0 + e));
        EXPECT_NEAR(closed, oracle, 1e-10);
        EXPECT_NEAR(poisson_transform(cw, UpperHalfPlanePoint(x, e)), closed, 1e-14);
    }
}

TEST(Conjugate, Examples)
{
    EXPECT_DOUBLE_EQ(conjugate_poisson_transform(make_dirac(0.0), UpperHalfPlanePoint(1.0, 1.0)), -0.5);
    EXPECT_NEAR(conjugate_poisson_transform(make_atomic({{-2.0, 0.5}, {4.0, 0.5}}),
                                            UpperHalfPlanePoint(1.0, 0.3)),
                0.0, 1e-16);
    const double q = conjugate_poisson_transform(make_uniform(0.0, 1.0), UpperHalfPlanePoint(0.5, 0.1));
    EXPECT_NEAR(q, 0.0, 1e-12);
}

TEST(Conjugate, UniformOffCentreAgainstQuadrature)
{
    const double x = 0.2, e = 0.1;
    const double q = conjugate_poisson_transform(make_uniform(0.0, 1.0), UpperHalfPlanePoint(x, e));
    const double oracle = gk([&](double y) { return (y - x) / ((y - x) * (y - x) + e * e); }, 0.0, x) +
                          gk([&](double y) { return (y - x) / ((y - x) * (y - x) + e * e); }, x, 1.0);
    const double closed = 0.5 * std::log(((1 - x) * (1 - x) + e * e) / (x * x + e * e));
    EXPECT_NEAR(q, oracle, 1e-12);
    EXPECT_NEAR(q, closed, 1e-12);
}

TEST(Conjugate, AntisymmetryUnderReflection)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double x = u(rng), e = std::abs(u(rng)) + 0.01;
        const double a = u(rng), w = std::abs(u(rng));
        auto eta = make_atomic({{x + a, w + 0.1}, {x + 3.0, 0.2}});
        auto reflected = make_atomic({{x - a, w + 0.1}, {x - 3.0, 0.2}});
        EXPECT_NEAR(conjugate_poisson_transform(eta, UpperHalfPlanePoint(x, e)),
                    -conjugate_poisson_transform(reflected, UpperHalfPlanePoint(x, e)), 1e-14);
    }
}

TEST(GenericDensity, AgainstBoost)
{
    auto f = [](double y) { return 1.0 + std::sin(3.0 * y); };
    auto eta = make_density(-1.0, 2.0, f);
    const double mass = eta.total_mass();
    for (auto [x, e] : {std::pair{0.3, 0.01}, std::pair{-1.0, 0.2}, std::pair{5.0, 1.0}}) {
        const double p = poisson_transform(eta, UpperHalfPlanePoint(x, e));
        auto pk = [&](double y) { return f(y) / mass * e / ((y - x) * (y - x) + e * e); };
        double oracle = 0.0;
        if (x > -1.0 && x < 2.0)
            oracle = gk(pk, -1.0, x) + gk(pk, x, 2.0);
        else
            oracle = gk(pk, -1.0, 2.0);
        EXPECT_NEAR(p, oracle * mass, 1e-11);
    }
}

TEST(GrowthBound, Examples)
{
    auto leb = growth_lower_bound_check(make_lebesgue(), 0.4, 0.01, 1.0);
    EXPECT_DOUBLE_EQ(leb.lhs, pi);
    EXPECT_DOUBLE_EQ(leb.rhs, 1.0);
    EXPECT_TRUE(leb.holds);
    auto d = growth_lower_bound_check(make_dirac(0.0), 0.0, 0.37, 0.0);
    EXPECT_NEAR(d.lhs, 1.0, 1e-15);
    EXPECT_NEAR(d.rhs, 0.5, 1e-15);
    EXPECT_TRUE(d.holds);
    const double a = std::log(2.0) / std::log(3.0);
    EXPECT_TRUE(growth_lower_bound_check(make_cantor(12), 0.0, std::pow(3.0, -4), a).holds);
}

TEST(DyadicBound, Examples)
{
    auto d = dyadic_bound_check(make_dirac(0.0), 0.0, 1.0);
    EXPECT_DOUBLE_EQ(d.lhs, 1.0);
    EXPECT_GE(d.rhs, 4.0);
    EXPECT_TRUE(d.holds);
    EXPECT_TRUE(dyadic_bound_check(make_atomic({{-1.0, 0.5}, {1.0, 0.5}}), 0.0, 0.1).holds);
    EXPECT_THROW(dyadic_bound_check(make_dirac(0.0, 0.5), 0.0, 1.0), precondition_error);
    EXPECT_THROW(dyadic_bound_check(make_lebesgue(), 0.0, 1.0), precondition_error);
}

TEST(DyadicBound, SpectralMeasureRandomPoints)
{
    auto fam = RankOneFamily(make_dense_gaussian(8, 8), random_unit_vector(8, 9));
    const auto mu = fam.mu().to_measure();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ux(-6.0, 6.0), le(-6.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double x = ux(rng), e = std::pow(10.0, le(rng));
        EXPECT_TRUE(dyadic_bound_check(mu, x, e).holds) << x << " " << e;
    }
}

TEST(Inequalities, RandomSamplesAllMeasures)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ux(-1.5, 1.5), le(-5.0, 0.5), ua(0.0, 1.0);
    for (const auto& eta : probability_measures())
        for (int i = 0; i < 100; ++i) {
            const double x = ux(rng), e = std::pow(10.0, le(rng)), a = ua(rng);
            auto g = growth_lower_bound_check(eta, x, e, a);
            EXPECT_TRUE(g.holds) << x << " " << e << " " << a;
            auto d = dyadic_bound_check(eta, x, e);
            EXPECT_TRUE(d.holds) << x << " " << e;
        }
}

TEST(AtomWeight, Examples)
{
    EXPECT_EQ(atom_weight(make_dirac(0.0) + make_uniform(0.0, 1.0), 0.0), 1.0);
    EXPECT_NEAR(atom_weight(make_lebesgue(), 0.0), 0.0, 1e-9);
    EXPECT_LE(atom_weight(make_cantor(10), 0.25), 1e-3);
    EXPECT_NEAR(atom_weight(make_uniform(0.0, 1.0), 0.5), 0.0, 1e-9);
}

TEST(Properties, PoissonNonNegativeAndEqualsImF)
{
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), le(-8.0, 2.0);
    auto measures = probability_measures();
    measures.push_back(make_cauchy_weight());
    for (const auto& eta : measures)
        for (int i = 0; i < 50; ++i) {
            const UpperHalfPlanePoint z(ux(rng), std::pow(10.0, le(rng)));
            const double p = poisson_transform(eta, z);
            EXPECT_GE(p, 0.0);
            const auto t = borel_transform(eta, z);
            EXPECT_NEAR(t.P, p, 1e-12 * std::max(1.0, p));
        }
}

TEST(Properties, PoissonSemigroup)
{
    // P(x + i(e1 + e2)) = (1/pi) int P(y + i e1) e2 / ((x - y)^2 + e2^2) dy
    const std::vector<Measure> measures{make_uniform(0.0, 1.0), make_atomic({{-0.5, 0.3}, {0.4, 0.7}}),
                                        make_cantor(6)};
    const double e1 = 0.2, e2 = 0.3;
    for (const auto& eta : measures)
        for (double x : {-0.7, 0.1, 0.55, 2.0}) {
            auto integrand = [&](double t) {
                const double y = std::tan(t);
                const double p = poisson_transform(eta, UpperHalfPlanePoint(y, e1));
                return p * e2 / ((x - y) * (x - y) + e2 * e2) * (1.0 + y * y);
            };
            const double edges[] = {-pi / 2, std::atan(-1.0), std::atan(x), std::atan(2.0), pi / 2};
            std::vector<double> sorted(std::begin(edges), std::end(edges));
            std::sort(sorted.begin(), sorted.end());
            double total = 0.0;
            for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
                total += gk(integrand, sorted[k], sorted[k + 1]);
            EXPECT_NEAR(total / pi, poisson_transform(eta, UpperHalfPlanePoint(x, e1 + e2)), 1e-8);
        }
}
