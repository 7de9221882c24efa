#pragma once

// Borel, Poisson and conjugate Poisson transforms of a Measure, plus the two
// pointwise estimates that tie them to the growth function.
//
//   F(z) = int d eta(y) / (y - z) = Q(z) + i P(z),   z = x + i eps, eps > 0
//   P(z) = int eps / ((y-x)^2 + eps^2) d eta(y)
//   Q(z) = int (y-x) / ((y-x)^2 + eps^2) d eta(y)

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <random>
#include <vector>

#include "specavg/errors.hpp"
#include "specavg/measure.hpp"
#include "specavg/numeric.hpp"
#include "specavg/quadrature.hpp"

namespace specavg
{

class UpperHalfPlanePoint
{
public:
    UpperHalfPlanePoint(double x, double eps) : x_(x), eps_(eps)
    {
        if (!(eps > 0.0) || !std::isfinite(eps) || !std::isfinite(x))
            throw argument_error("UpperHalfPlanePoint: need finite x and eps > 0");
    }

    static UpperHalfPlanePoint from_complex(std::complex<double> z)
    {
        return UpperHalfPlanePoint(z.real(), z.imag());
    }

    double x() const noexcept { return x_; }
    double eps() const noexcept { return eps_; }
    std::complex<double> z() const noexcept { return {x_, eps_}; }

private:
    double x_;
    double eps_;
};

struct TransformValue
{
    double Q = 0.0;
    double P = 0.0;

    std::complex<double> F() const noexcept { return {Q, P}; }
};

namespace detail
{

inline double poisson_kernel(double y, double x, double eps)
{
    const double d = y - x;
    return eps / (d * d + eps * eps);
}

inline double conjugate_kernel(double y, double x, double eps)
{
    const double d = y - x;
    return d / (d * d + eps * eps);
}

// int_a^b eps/((y-x)^2+eps^2) dy
inline double uniform_piece_poisson(double a, double b, double x, double eps)
{
    return std::atan2(eps * (b - a), eps * eps + (b - x) * (a - x));
}

// int_a^b (y-x)/((y-x)^2+eps^2) dy
inline double uniform_piece_conjugate(double a, double b, double x, double eps)
{
    const double num = (b - x) * (b - x) + eps * eps;
    const double den = (a - x) * (a - x) + eps * eps;
    return 0.5 * std::log(num / den);
}

// Quadrature over a non-uniform piece, split where the kernel peaks.
template <class Kernel>
double generic_piece_integral(const DensityPiece& p, double x, double eps, Kernel kernel)
{
    std::vector<double> edges{p.a, p.b};
    for (double e : {x - eps, x, x + eps})
        if (e > p.a && e < p.b)
            edges.push_back(e);
    auto panels = panels_from_edges(std::move(edges));
    auto r = integrate_panels([&](double y) { return p.density(y) * kernel(y, x, eps); },
                              std::span<const Panel>(panels), piece_quadrature_tol, 1'000'000);
    return require_converged(r, "density piece transform").value;
}

// Cauchy weight dy/(1+y^2): F(z) = -pi / (z + i).
inline std::complex<double> cauchy_weight_borel(double x, double eps)
{
    return -std::numbers::pi / std::complex<double>(x, eps + 1.0);
}

inline double cauchy_weight_poisson(double x, double eps)
{
    const double h = 1.0 + eps;
    return std::numbers::pi * h / (x * x + h * h);
}

inline double cauchy_weight_conjugate(double x, double eps)
{
    const double h = 1.0 + eps;
    return -std::numbers::pi * x / (x * x + h * h);
}

inline constexpr double closed_form_check_tol = 1e-10;

// Compares every closed-form path against plain quadrature at seeded random
// points. A mismatch means the fast paths are wrong; there is no recovery.
inline void validate_closed_forms()
{
    std::mt19937_64 rng(0x5eed5eedULL);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto fail = [](const char* which, double fast, double slow) {
        std::fprintf(stderr, "specavg: closed-form self-check failed for %s (%.17g vs %.17g)\n",
                     which, fast, slow);
        std::abort();
    };
    for (int trial = 0; trial < 8; ++trial) {
        const double a = -2.0 + 4.0 * u01(rng);
        const double b = a + 0.1 + 1.9 * u01(rng);
        const double x = -3.0 + 6.0 * u01(rng);
        const double eps = 0.05 + 1.95 * u01(rng);
        auto panels = panels_from_edges({a, b, std::clamp(x, a, b)});
        auto slow_p = integrate_panels([&](double y) { return poisson_kernel(y, x, eps); },
                                       std::span<const Panel>(panels), 1e-13, 100000);
        auto slow_q = integrate_panels([&](double y) { return conjugate_kernel(y, x, eps); },
                                       std::span<const Panel>(panels), 1e-13, 100000);
        const double fast_p = uniform_piece_poisson(a, b, x, eps);
        const double fast_q = uniform_piece_conjugate(a, b, x, eps);
        if (std::abs(fast_p - slow_p.value) > closed_form_check_tol)
            fail("uniform Poisson", fast_p, slow_p.value);
        if (std::abs(fast_q - slow_q.value) > closed_form_check_tol)
            fail("uniform conjugate Poisson", fast_q, slow_q.value);

        const double bp[] = {x};
        auto cp = integrate_real_line(
            [&](double y) { return poisson_kernel(y, x, eps) / (1.0 + y * y); },
            std::span<const double>(bp), 1e-13, 100000);
        auto cq = integrate_real_line(
            [&](double y) { return conjugate_kernel(y, x, eps) / (1.0 + y * y); },
            std::span<const double>(bp), 1e-13, 100000);
        if (std::abs(cauchy_weight_poisson(x, eps) - cp.value) > closed_form_check_tol)
            fail("Cauchy-weight Poisson", cauchy_weight_poisson(x, eps), cp.value);
        if (std::abs(cauchy_weight_conjugate(x, eps) - cq.value) > closed_form_check_tol)
            fail("Cauchy-weight conjugate Poisson", cauchy_weight_conjugate(x, eps), cq.value);
    }
    // Lebesgue: int eps/(y^2+eps^2) dy = pi.
    const double zero[] = {0.0};
    auto leb = integrate_real_line([](double y) { return poisson_kernel(y, 0.0, 0.5); },
                                   std::span<const double>(zero), 1e-13, 100000);
    if (std::abs(leb.value - std::numbers::pi) > closed_form_check_tol)
        fail("Lebesgue Poisson", std::numbers::pi, leb.value);
}

inline void ensure_closed_forms_validated()
{
    static std::once_flag once;
    std::call_once(once, validate_closed_forms);
}

} // namespace detail

inline double poisson_transform(const Measure& eta, const UpperHalfPlanePoint& z)
{
    if (!eta.has_finite_1_over_1_plus_y2())
        throw unsupported_transform("Poisson transform requires int 1/(1+y^2) d eta < inf");
    detail::ensure_closed_forms_validated();
    const double x = z.x();
    const double eps = z.eps();
    CompensatedSum s;
    for (const auto& at : eta.atoms())
        s += at.weight * detail::poisson_kernel(at.position, x, eps);
    for (const auto& p : eta.pieces()) {
        if (p.is_uniform())
            s += p.mass / (p.b - p.a) * detail::uniform_piece_poisson(p.a, p.b, x, eps);
        else
            s += detail::generic_piece_integral(p, x, eps, detail::poisson_kernel);
    }
    const auto& an = eta.analytic();
    if (an.kind == AnalyticKind::Lebesgue)
        s += an.coefficient * std::numbers::pi;
    else if (an.kind == AnalyticKind::CauchyWeight)
        s += an.coefficient * detail::cauchy_weight_poisson(x, eps);
    return std::max(0.0, s.value());
}

// Refused when only the Poisson capability holds: no principal-value
// convention is assumed for Q.
inline double conjugate_poisson_transform(const Measure& eta, const UpperHalfPlanePoint& z)
{
    if (!eta.has_finite_1_over_1_plus_y())
        throw unsupported_transform("conjugate Poisson transform is not defined for this measure");
    detail::ensure_closed_forms_validated();
    const double x = z.x();
    const double eps = z.eps();
    CompensatedSum s;
    for (const auto& at : eta.atoms())
        s += at.weight * detail::conjugate_kernel(at.position, x, eps);
    for (const auto& p : eta.pieces()) {
        if (p.is_uniform())
            s += p.mass / (p.b - p.a) * detail::uniform_piece_conjugate(p.a, p.b, x, eps);
        else
            s += detail::generic_piece_integral(p, x, eps, detail::conjugate_kernel);
    }
    const auto& an = eta.analytic();
    if (an.kind == AnalyticKind::CauchyWeight)
        s += an.coefficient * detail::cauchy_weight_conjugate(x, eps);
    return s.value();
}

inline TransformValue borel_transform(const Measure& eta, const UpperHalfPlanePoint& z)
{
    if (!eta.has_finite_1_over_1_plus_y())
        throw unsupported_transform("Borel transform requires int 1/(1+|y|) d eta < inf");
    return {conjugate_poisson_transform(eta, z), poisson_transform(eta, z)};
}

inline std::complex<double> borel_transform_value(const Measure& eta, std::complex<double> z)
{
    return borel_transform(eta, UpperHalfPlanePoint::from_complex(z)).F();
}

// ---------------------------------------------------------------------------
// Pointwise estimates

struct InequalityCheck
{
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

inline constexpr double inequality_slack = 1e-12;

// eps^(1-alpha) P(x + i eps)  >=  M(x; eps) / (2 eps^alpha)
inline InequalityCheck growth_lower_bound_check(const Measure& eta, double x, double eps,
                                                double alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw argument_error("growth_lower_bound_check: alpha must lie in [0,1]");
    const double p = poisson_transform(eta, UpperHalfPlanePoint(x, eps));
    InequalityCheck out;
    out.lhs = std::pow(eps, 1.0 - alpha) * p;
    out.rhs = growth_function(eta, x, eps) / (2.0 * std::pow(eps, alpha));
    out.holds = out.lhs >= out.rhs - inequality_slack;
    return out;
}

inline constexpr int default_dyadic_truncation = 60;

// max{P, |Q|}(x + i eps) <= (2/eps) sum_n 2^-n M(x; 2^(n+1) eps), for a
// probability measure. The series is cut at N terms; the tail is at most
// sum_{n>=N} 2^-n = 2^(1-N) since every mass is at most one.
inline InequalityCheck dyadic_bound_check(const Measure& eta, double x, double eps,
                                          int truncation = default_dyadic_truncation)
{
    if (!eta.is_finite() || std::abs(eta.total_mass() - 1.0) > 1e-12)
        throw precondition_error("dyadic_bound_check: eta must be a probability measure");
    if (truncation < 1)
        throw argument_error("dyadic_bound_check: truncation must be positive");
    const auto t = borel_transform(eta, UpperHalfPlanePoint(x, eps));
    CompensatedSum series;
    for (int n = 0; n < truncation; ++n)
        series += std::ldexp(growth_function(eta, x, std::ldexp(eps, n + 1)), -n);
    series += std::ldexp(1.0, 1 - truncation);
    InequalityCheck out;
    out.lhs = std::max(t.P, std::abs(t.Q));
    out.rhs = 2.0 / eps * series.value();
    out.holds = out.lhs <= out.rhs + inequality_slack;
    return out;
}

// ---------------------------------------------------------------------------
// Atom weight via eps P(x + i eps) -> eta({x})

struct EpsLadder
{
    double eps_max = 1.0;
    double ratio = 0.5;
    int rungs = 40;
};

inline constexpr double atom_position_tol = 1e-13;

// Scales of the ladder that sit at or above the floor.
inline std::vector<double> ladder_scales(const EpsLadder& ladder, double floor)
{
    std::vector<double> out;
    for (double e : geometric_scales(ladder.eps_max, ladder.ratio,
                                     static_cast<std::size_t>(std::max(ladder.rungs, 0))))
        if (e >= floor)
            out.push_back(e);
    return out;
}

inline double atom_weight(const Measure& eta, double x, const EpsLadder& ladder = {})
{
    if (auto at = eta.atom_near(x, atom_position_tol))
        return at->weight;
    const auto scales = ladder_scales(ladder, eta.resolution_floor());
    if (scales.empty())
        throw insufficient_resolution("atom_weight: ladder lies entirely below the resolution floor");
    std::vector<double> f;
    f.reserve(scales.size());
    for (double e : scales)
        f.push_back(e * poisson_transform(eta, UpperHalfPlanePoint(x, e)));
    const double last = f.back();
    if (f.size() < 2)
        return last;
    // eps P = w + c eps + o(eps) near a point with a bounded density: remove
    // the linear term with one Richardson step.
    const double prev = f[f.size() - 2];
    const double r = ladder.ratio;
    const double extrapolated = (last - r * prev) / (1.0 - r);
    return std::clamp(extrapolated, 0.0, last);
}

} // namespace specavg
