#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <random>

#include "specavg/quadrature.hpp"

using namespace specavg;

TEST(Quadrature, SineOverHalfPeriod)
{
    auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 2.0, 1e-13);
}

TEST(Quadrature, PeakedIntegrandMatchesBoost)
{
    const double w = 1e-3;
    auto f = [w](double x) { return w / ((x - 0.3) * (x - 0.3) + w * w); };
    auto r = integrate(f, -1.0, 2.0, 1e-11);
    double boost_err = 0.0;
    const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, -1.0, 2.0, 15, 1e-13, &boost_err);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, oracle, 1e-10);
    EXPECT_NEAR(r.value, std::atan(1.7 / w) + std::atan(1.3 / w), 1e-10);
}

TEST(Quadrature, JumpHandledByPanelSplit)
{
    auto step = [](double x) { return x < 0.37 ? 1.0 : 3.0; };
    const std::vector<Panel> split{{0.0, 0.37}, {0.37, 1.0}};
    auto r = integrate_panels(step, std::span<const Panel>(split), 1e-12, 1000);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 0.37 + 3.0 * 0.63, 1e-14);
    EXPECT_FALSE(integrate(step, 0.0, 1.0, 1e-12, 20).converged);
    EXPECT_LE(r.panels, 4u);
}

TEST(Quadrature, RealLineLorentzian)
{
    const double bp[] = {0.0};
    auto r = integrate_real_line([](double y) { return 1.0 / (1.0 + y * y); },
                                 std::span<const double>(bp), 1e-12);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, std::numbers::pi, 1e-12);
}

TEST(Quadrature, RealLineShiftedLorentzianMatchesTanhSinh)
{
    auto f = [](double y) { return 0.2 / ((y - 3.0) * (y - 3.0) + 0.04) + 1.0 / (1.0 + y * y); };
    const double bp[] = {3.0};
    auto r = integrate_real_line(f, std::span<const double>(bp), 1e-11);
    boost::math::quadrature::tanh_sinh<double> ts;
    auto g = [&f](double t) {
        const double y = std::tan(t);
        return f(y) * (1.0 + y * y);
    };
    const double oracle = ts.integrate(g, -std::numbers::pi / 2, std::atan(3.0)) +
                          ts.integrate(g, std::atan(3.0), std::numbers::pi / 2);
    EXPECT_NEAR(r.value, oracle, 1e-10);
    EXPECT_NEAR(r.value, 2.0 * std::numbers::pi, 1e-10);
}

TEST(Quadrature, ComplexIntegrand)
{
    using C = std::complex<double>;
    auto f = [](double x) { return C(std::cos(x), std::sin(x)); };
    auto r = integrate<C>(f, 0.0, std::numbers::pi, 1e-13);
    EXPECT_NEAR(r.value.real(), 0.0, 1e-13);
    EXPECT_NEAR(r.value.imag(), 2.0, 1e-13);
}

TEST(Quadrature, RepeatedRunsAreBitIdentical)
{
    auto f = [](double x) { return std::exp(-x * x) * std::cos(7.0 * x); };
    auto a = integrate(f, -4.0, 5.0, 1e-12);
    auto b = integrate(f, -4.0, 5.0, 1e-12);
    EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
    EXPECT_EQ(a.panels, b.panels);
}

TEST(Quadrature, PanelCapReportsAchievedError)
{
    auto f = [](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); };
    auto r = integrate(f, 0.0, 1.0, 1e-15, 8);
    EXPECT_FALSE(r.converged);
    try {
        require_converged(r, "cap");
        FAIL() << "expected numerical_error";
    } catch (const numerical_error& e) {
        EXPECT_GT(e.achieved_error(), 1e-15);
    }
}

TEST(Quadrature, RejectsNonPositiveTolerance)
{
    EXPECT_THROW(integrate([](double) { return 1.0; }, 0.0, 1.0, 0.0), argument_error);
}

TEST(Quadrature, PolynomialsExactOnSeededIntervals)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = u(rng);
        const double b = a + std::abs(u(rng)) + 0.1;
        auto p = [](double x) { return 1.0 + x - 2.0 * x * x * x + 0.5 * std::pow(x, 9); };
        auto antider = [](double x) {
            return x + 0.5 * x * x - 0.5 * std::pow(x, 4) + 0.05 * std::pow(x, 10);
        };
        const double exact = antider(b) - antider(a);
        auto r = integrate(p, a, b, 1e-6);
        EXPECT_TRUE(r.converged);
        EXPECT_NEAR(r.value, exact, 1e-9 * std::max(1.0, std::abs(exact)));
    }
}
