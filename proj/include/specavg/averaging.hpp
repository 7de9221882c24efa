#pragma once

// The averaged measure kappa(B) = int mu_lambda(B) d nu(lambda), its Poisson
// and Borel transforms, and the identities and bounds relating them to nu.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specavg/errors.hpp"
#include "specavg/measure.hpp"
#include "specavg/numeric.hpp"
#include "specavg/operator.hpp"
#include "specavg/quadrature.hpp"
#include "specavg/transform.hpp"

namespace specavg
{

struct QuadratureConfig
{
    double abs_tol = 1e-9;
    std::size_t max_panels = 1'000'000;
    std::vector<double> breakpoints; // extra lambda splits

    void validate() const
    {
        if (!(abs_tol > 0.0))
            throw argument_error("QuadratureConfig: abs_tol must be positive");
        if (max_panels < 1)
            throw argument_error("QuadratureConfig: max_panels must be positive");
        for (double b : breakpoints)
            if (!std::isfinite(b))
                throw argument_error("QuadratureConfig: breakpoints must be finite");
    }
};

// Finite union of bounded open intervals, kept sorted. Overlapping intervals
// are merged; touching ones are not (the shared endpoint stays excluded).
class IntervalUnion
{
public:
    IntervalUnion() = default;
    IntervalUnion(std::initializer_list<std::pair<double, double>> list)
        : IntervalUnion(std::vector<std::pair<double, double>>(list))
    {
    }
    explicit IntervalUnion(std::vector<std::pair<double, double>> parts)
    {
        for (const auto& [lo, hi] : parts)
            if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
                throw argument_error("IntervalUnion: every interval needs finite lo < hi");
        std::sort(parts.begin(), parts.end());
        for (const auto& p : parts) {
            if (!parts_.empty() && p.first < parts_.back().second)
                parts_.back().second = std::max(parts_.back().second, p.second);
            else
                parts_.push_back(p);
        }
    }

    const std::vector<std::pair<double, double>>& parts() const noexcept { return parts_; }
    bool empty() const noexcept { return parts_.empty(); }

    bool contains(double x) const noexcept
    {
        auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                                   [](double v, const std::pair<double, double>& p) { return v < p.first; });
        if (it == parts_.begin())
            return false;
        --it;
        return x > it->first && x < it->second;
    }

    double length() const
    {
        CompensatedSum s;
        for (const auto& [lo, hi] : parts_)
            s += hi - lo;
        return s.value();
    }

private:
    std::vector<std::pair<double, double>> parts_;
};

struct KappaValue
{
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t panels_used = 0;
    std::vector<std::string> warnings;
};

class KappaProbe
{
public:
    KappaProbe(RankOneFamily family, Measure nu, QuadratureConfig quad = {})
        : family_(std::move(family)), nu_(std::move(nu)), quad_(std::move(quad))
    {
        quad_.validate();
        std::sort(quad_.breakpoints.begin(), quad_.breakpoints.end());
        quad_.breakpoints.erase(std::unique(quad_.breakpoints.begin(), quad_.breakpoints.end()),
                                quad_.breakpoints.end());
    }

    const RankOneFamily& family() const noexcept { return family_; }
    const Measure& nu() const noexcept { return nu_; }
    const QuadratureConfig& quad() const noexcept { return quad_; }

    // ScalingSource interface (see continuity.hpp).
    double mass_near(double x, double eps) const;
    double poisson_at(double x, double eps) const;
    double resolution_floor_at(double x) const;
    double local_scale(double x) const;

private:
    RankOneFamily family_;
    Measure nu_;
    QuadratureConfig quad_;
};

// ---------------------------------------------------------------------------
// nu factories

enum class NuKind
{
    Lebesgue,
    CauchyWeight,
    Uniform,
    CantorApprox,
    Atomic
};

struct NuSpec
{
    NuKind kind = NuKind::Lebesgue;
    double a = 0.0;
    double b = 1.0;
    int depth = 10;
    std::vector<Atom> atoms;
};

inline NuKind nu_kind_from_string(const std::string& s)
{
    if (s == "lebesgue")
        return NuKind::Lebesgue;
    if (s == "cauchy" || s == "cauchy-weight")
        return NuKind::CauchyWeight;
    if (s == "uniform")
        return NuKind::Uniform;
    if (s == "cantor")
        return NuKind::CantorApprox;
    if (s == "atomic")
        return NuKind::Atomic;
    throw argument_error("unknown nu kind '" + s + "'");
}

inline std::string to_string(NuKind k)
{
    switch (k) {
    case NuKind::Lebesgue: return "lebesgue";
    case NuKind::CauchyWeight: return "cauchy";
    case NuKind::Uniform: return "uniform";
    case NuKind::CantorApprox: return "cantor";
    case NuKind::Atomic: return "atomic";
    }
    return "unknown";
}

inline Measure make_nu(const NuSpec& spec)
{
    switch (spec.kind) {
    case NuKind::Lebesgue: return make_lebesgue();
    case NuKind::CauchyWeight: return make_cauchy_weight();
    case NuKind::Uniform: return make_uniform(spec.a, spec.b);
    case NuKind::CantorApprox: return make_cantor(spec.depth);
    case NuKind::Atomic:
        if (spec.atoms.empty())
            throw argument_error("make_nu: atomic nu needs at least one atom");
        return make_atomic(spec.atoms);
    }
    throw argument_error("make_nu: unknown kind");
}

// ---------------------------------------------------------------------------
// kappa(B)

namespace detail
{

inline double mu_lambda_mass(const RankOneFamily& family, double lambda, const IntervalUnion& set)
{
    if (!std::isfinite(lambda))
        return 0.0;
    const SpectralMeasure m = lambda == 0.0 ? family.mu() : family.perturbed_secular(lambda);
    CompensatedSum s;
    for (const auto& at : m.atoms)
        if (at.weight > 0.0 && set.contains(at.position))
            s += at.weight;
    return s.value();
}

// A point strictly inside (lo, hi), either end possibly infinite.
inline double interior_point(double lo, double hi)
{
    if (std::isfinite(lo) && std::isfinite(hi))
        return 0.5 * (lo + hi);
    if (std::isfinite(hi))
        return hi - std::max(1.0, std::abs(hi));
    if (std::isfinite(lo))
        return lo + std::max(1.0, std::abs(lo));
    return 0.0;
}

struct PartSum
{
    CompensatedSum value;
    CompensatedSum error;
    std::size_t panels = 0;
};

// Integrates g against nu over the given lambda segments (sorted, disjoint,
// possibly unbounded at the ends). Atoms are summed exactly; density pieces
// and the analytic part are integrated panel by panel.
template <class G>
KappaValue integrate_against_nu(const Measure& nu, G&& g,
                                std::span<const std::pair<double, double>> segments,
                                std::span<const double> splits, const QuadratureConfig& quad,
                                const std::string& what)
{
    KappaValue out;
    PartSum total;

    for (const auto& at : nu.atoms())
        if (at.weight > 0.0)
            for (const auto& [lo, hi] : segments)
                if (at.position > lo && at.position < hi) {
                    total.value += at.weight * g(at.position);
                    break;
                }

    // Cut [lo, hi] at every split strictly inside.
    auto cut = [&splits](double lo, double hi, std::vector<Panel>& into) {
        auto it = std::upper_bound(splits.begin(), splits.end(), lo);
        double left = lo;
        for (; it != splits.end() && *it < hi; ++it) {
            into.emplace_back(left, *it);
            left = *it;
        }
        into.emplace_back(left, hi);
    };

    std::vector<Panel> piece_panels;
    for (const auto& piece : nu.pieces())
        for (const auto& [lo, hi] : segments) {
            const double a = std::max(piece.a, lo);
            const double b = std::min(piece.b, hi);
            if (a < b)
                cut(a, b, piece_panels);
        }

    std::vector<Panel> theta_panels;
    const auto& analytic = nu.analytic();
    const bool has_analytic = analytic.kind != AnalyticKind::None && analytic.coefficient > 0.0;
    if (has_analytic) {
        std::vector<Panel> lambda_panels;
        for (const auto& [lo, hi] : segments)
            cut(lo, hi, lambda_panels);
        for (const auto& [lo, hi] : lambda_panels)
            theta_panels.emplace_back(std::atan(lo), std::atan(hi));
    }

    const int parts = (piece_panels.empty() ? 0 : 1) + (theta_panels.empty() ? 0 : 1);
    const double part_tol = quad.abs_tol / std::max(parts, 1);

    if (!piece_panels.empty()) {
        auto f = [&](double lambda) { return g(lambda) * nu.piece_density(lambda); };
        auto r = integrate_panels(f, std::span<const Panel>(piece_panels), part_tol, quad.max_panels);
        require_converged(r, what + " (density part of nu)");
        total.value += r.value;
        total.error += r.error;
        total.panels += r.panels;
    }
    if (!theta_panels.empty()) {
        const double c = analytic.coefficient;
        const bool lebesgue = analytic.kind == AnalyticKind::Lebesgue;
        auto f = [&](double theta) {
            const double y = std::tan(theta);
            const double gy = g(y);
            if (gy == 0.0)
                return 0.0;
            return lebesgue ? c * gy * (1.0 + y * y) : c * gy;
        };
        auto r = integrate_panels(f, std::span<const Panel>(theta_panels), part_tol, quad.max_panels);
        require_converged(r, what + " (analytic part of nu)");
        total.value += r.value;
        total.error += r.error;
        total.panels += r.panels;
    }
    out.value = total.value.value();
    out.error_estimate = total.error.value();
    out.panels_used = total.panels;
    return out;
}

} // namespace detail

// kappa(B) for a bounded finite union of open intervals. The lambda axis is
// split at every coupling where an eigenvalue crosses an endpoint of B;
// mu_lambda(B) is smooth between those couplings and vanishes identically on
// the segments where it vanishes at one interior point, so those are skipped.
inline KappaValue kappa_set(const KappaProbe& probe, const IntervalUnion& set)
{
    const auto& family = probe.family();
    KappaValue out;
    if (set.empty())
        return out;

    const double scale = family.norm() > 0.0 ? family.norm() : 1.0;
    const double shift = 1e-12 * scale;
    std::vector<std::pair<double, double>> adjusted;
    std::vector<std::string> warnings;
    for (auto [lo, hi] : set.parts()) {
        for (const auto& at : family.support()) {
            if (std::abs(lo - at.position) <= 1e-14 * scale) {
                warnings.push_back("endpoint " + format_real(lo) + " coincides with an atom of mu; moved to " +
                                   format_real(at.position + shift));
                lo = at.position + shift;
            }
            if (std::abs(hi - at.position) <= 1e-14 * scale) {
                warnings.push_back("endpoint " + format_real(hi) + " coincides with an atom of mu; moved to " +
                                   format_real(at.position - shift));
                hi = at.position - shift;
            }
        }
        if (lo < hi)
            adjusted.emplace_back(lo, hi);
    }
    const IntervalUnion b(adjusted);

    std::vector<double> breaks = probe.quad().breakpoints;
    for (const auto& [lo, hi] : b.parts())
        for (double e : {lo, hi})
            if (auto lambda = family.crossing_coupling(e))
                breaks.push_back(*lambda);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    auto g = [&](double lambda) { return detail::mu_lambda_mass(family, lambda, b); };

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> active;
    double left = -inf;
    for (std::size_t i = 0; i <= breaks.size(); ++i) {
        const double right = i < breaks.size() ? breaks[i] : inf;
        if (g(detail::interior_point(left, right)) > 0.0)
            active.emplace_back(left, right);
        left = right;
    }

    out = detail::integrate_against_nu(probe.nu(), g, active, breaks, probe.quad(), "kappa_set");
    out.value = std::max(out.value, 0.0);
    out.warnings = std::move(warnings);
    return out;
}

// ---------------------------------------------------------------------------
// P_kappa and F_kappa

namespace detail
{

// Splits around the Lorentzian peak of |1 + lambda F|^-2 at Re w, width Im w.
inline std::vector<double> peak_splits(std::complex<double> w, std::span<const double> extra)
{
    std::vector<double> s(extra.begin(), extra.end());
    s.push_back(w.real());
    for (double k : {1.0, 10.0, 100.0}) {
        s.push_back(w.real() - k * w.imag());
        s.push_back(w.real() + k * w.imag());
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

inline std::complex<double> mapped_point(const RankOneFamily& family, const UpperHalfPlanePoint& z)
{
    const auto f = family.borel(z.z());
    const std::complex<double> w = -1.0 / f;
    if (!(w.imag() > 0.0) || !std::isfinite(w.real()) || !std::isfinite(w.imag()))
        throw numerical_error("-1/F_mu(z) left the upper half-plane at z = " + format_real(z.x()) +
                              " + " + format_real(z.eps()) + "i");
    return w;
}

} // namespace detail

// P_kappa(z) = int P_mu(z) / |1 + lambda F_mu(z)|^2 d nu(lambda)
inline KappaValue kappa_poisson(const KappaProbe& probe, const UpperHalfPlanePoint& z)
{
    const auto f = probe.family().borel(z.z());
    const double p = f.imag();
    const auto w = detail::mapped_point(probe.family(), z);
    auto g = [f, p](double lambda) { return p / std::norm(1.0 + lambda * f); };
    const auto splits = detail::peak_splits(w, probe.quad().breakpoints);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::pair<double, double> whole{-inf, inf};
    auto out = detail::integrate_against_nu(probe.nu(), g, std::span(&whole, 1), splits, probe.quad(),
                                            "kappa_poisson");
    out.value = std::max(out.value, 0.0);
    return out;
}

struct ComplexKappaValue
{
    std::complex<double> value;
    double error_estimate = 0.0;
    std::size_t panels_used = 0;
};

// F_kappa(z) = int F_mu(z) / (1 + lambda F_mu(z)) d nu(lambda), finite nu only.
inline ComplexKappaValue kappa_borel(const KappaProbe& probe, const UpperHalfPlanePoint& z)
{
    if (!probe.nu().has_finite_1_over_1_plus_y())
        throw precondition_error("kappa_borel: nu must be finite (its Borel transform does not exist)");
    const auto f = probe.family().borel(z.z());
    const auto w = detail::mapped_point(probe.family(), z);
    const auto splits = detail::peak_splits(w, probe.quad().breakpoints);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::pair<double, double> whole{-inf, inf};
    QuadratureConfig half = probe.quad();
    half.abs_tol *= 0.5;
    auto re = detail::integrate_against_nu(
        probe.nu(), [f](double lambda) { return aronszajn_krein(f, lambda).real(); }, std::span(&whole, 1),
        splits, half, "kappa_borel");
    auto im = detail::integrate_against_nu(
        probe.nu(), [f](double lambda) { return aronszajn_krein(f, lambda).imag(); }, std::span(&whole, 1),
        splits, half, "kappa_borel");
    return {{re.value, im.value}, re.error_estimate + im.error_estimate, re.panels_used + im.panels_used};
}

// ---------------------------------------------------------------------------
// ScalingSource members

inline double KappaProbe::mass_near(double x, double eps) const
{
    return kappa_set(*this, IntervalUnion{{x - eps, x + eps}}).value;
}

inline double KappaProbe::poisson_at(double x, double eps) const
{
    return kappa_poisson(*this, UpperHalfPlanePoint(x, eps)).value;
}

// Length in x that corresponds to unit length in lambda near lambda*(x):
// d lambda*/dx = F_mu'(x) / F_mu(x)^2, which tends to 1/w at an eigenvalue
// of weight w.
inline double KappaProbe::local_scale(double x) const
{
    for (const auto& at : family_.support())
        if (at.position == x)
            return at.weight;
    const double f = family_.mu().borel_real(x);
    const double df = family_.mu().borel_real_derivative(x);
    if (!(df > 0.0) || !std::isfinite(f))
        return 1.0;
    return f * f / df;
}

inline double KappaProbe::resolution_floor_at(double x) const
{
    const double floor = nu_.resolution_floor();
    return floor == 0.0 ? 0.0 : floor * local_scale(x);
}

// ---------------------------------------------------------------------------
// Grids and identity checks

inline std::vector<UpperHalfPlanePoint> make_z_grid(double x_lo, double x_hi, std::size_t nx, double eps_lo,
                                                    double eps_hi, std::size_t ne)
{
    if (nx < 1 || ne < 1 || !(x_lo <= x_hi) || !(eps_lo > 0.0) || !(eps_lo <= eps_hi))
        throw argument_error("make_z_grid: invalid grid parameters");
    std::vector<UpperHalfPlanePoint> out;
    out.reserve(nx * ne);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = nx == 1 ? 0.5 * (x_lo + x_hi)
                                 : x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(nx - 1);
        for (std::size_t j = 0; j < ne; ++j) {
            const double t = ne == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(ne - 1);
            out.emplace_back(x, eps_lo * std::pow(eps_hi / eps_lo, t));
        }
    }
    return out;
}

struct IdentityPoint
{
    double x = 0.0;
    double eps = 0.0;
    std::complex<double> lhs;
    std::complex<double> rhs;
    double deviation = 0.0;
    double error_estimate = 0.0;
};

struct IdentityReport
{
    std::vector<IdentityPoint> points;
    double max_deviation = 0.0;
    double worst_x = 0.0;
    double worst_eps = 0.0;

    void add(IdentityPoint p)
    {
        if (points.empty() || p.deviation > max_deviation) {
            max_deviation = p.deviation;
            worst_x = p.x;
            worst_eps = p.eps;
        }
        points.push_back(p);
    }
};

// P_kappa(z) against P_nu(-1/F_mu(z)).
inline IdentityReport poisson_identity_check(const KappaProbe& probe, std::span<const UpperHalfPlanePoint> grid)
{
    IdentityReport report;
    for (const auto& z : grid) {
        const auto w = detail::mapped_point(probe.family(), z);
        const auto lhs = kappa_poisson(probe, z);
        const double rhs = poisson_transform(probe.nu(), UpperHalfPlanePoint::from_complex(w));
        report.add({z.x(), z.eps(), lhs.value, rhs, std::abs(lhs.value - rhs), lhs.error_estimate});
    }
    return report;
}

// F_kappa(z) against F_nu(-1/F_mu(z)), finite nu.
inline IdentityReport borel_identity_check(const KappaProbe& probe, std::span<const UpperHalfPlanePoint> grid)
{
    if (!probe.nu().has_finite_1_over_1_plus_y())
        throw precondition_error("borel_identity_check: nu must be finite (its Borel transform does not exist)");
    IdentityReport report;
    for (const auto& z : grid) {
        const auto w = detail::mapped_point(probe.family(), z);
        const auto lhs = kappa_borel(probe, z);
        const auto rhs = borel_transform_value(probe.nu(), w);
        report.add({z.x(), z.eps(), lhs.value, rhs, std::abs(lhs.value - rhs), lhs.error_estimate});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Uniform alpha-Hoelder bound on P_kappa

// If nu(I) <= K |I|^alpha for every interval, then
// P_nu(w) <= c_alpha(alpha, K) Im(w)^(alpha - 1).
// Bounding the superlevel sets of the Poisson kernel (intervals of half-width
// r) by K (2r)^alpha gives 2^alpha pi alpha K / (2 sin(pi alpha / 2)); the
// alpha -> 0 limit is K.
inline double c_alpha(double alpha, double k)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw argument_error("c_alpha: alpha must lie in [0,1]");
    if (alpha == 0.0)
        return k;
    const double half = 0.5 * std::numbers::pi * alpha;
    return std::pow(2.0, alpha) * half * k / std::sin(half);
}

// The same bound without the 2^alpha factor; it undershoots P_Lebesgue = pi at
// alpha = 1 and is kept only for comparison.
inline double c_alpha_without_width_factor(double alpha, double k)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw argument_error("c_alpha: alpha must lie in [0,1]");
    if (alpha == 0.0)
        return k;
    const double half = 0.5 * std::numbers::pi * alpha;
    return half * k / std::sin(half);
}

struct CAlphaValidation
{
    double alpha = 0.0;
    double k = 0.0;
    double observed_sup = 0.0; // sup over the grid of P_nu(z) Im(z)^(1 - alpha)
    double c_used = 0.0;
    double c_without_width_factor = 0.0;
    bool used_bounds_sup = false;
    bool without_factor_bounds_sup = false;
};

inline CAlphaValidation validate_c_alpha(const Measure& nu, double alpha, double k,
                                         std::span<const UpperHalfPlanePoint> grid)
{
    CAlphaValidation out;
    out.alpha = alpha;
    out.k = k;
    out.c_used = c_alpha(alpha, k);
    out.c_without_width_factor = c_alpha_without_width_factor(alpha, k);
    for (const auto& z : grid)
        out.observed_sup = std::max(out.observed_sup, poisson_transform(nu, z) * std::pow(z.eps(), 1.0 - alpha));
    const double slack = 1e-12 * std::max(1.0, out.observed_sup);
    out.used_bounds_sup = out.observed_sup <= out.c_used + slack;
    out.without_factor_bounds_sup = out.observed_sup <= out.c_without_width_factor + slack;
    return out;
}

inline constexpr double uah_bound_slack = 1e-6;

struct BoundPoint
{
    double x = 0.0;
    double eps = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool violated = false;
};

struct UahBoundReport
{
    double alpha = 0.0;
    double k = 0.0;
    double c = 0.0;
    std::vector<BoundPoint> points;
    std::vector<std::size_t> violations; // indices into points
};

// P_kappa(z) <= C_alpha (|F_mu(z)|^2 / P_mu(z))^(1 - alpha)
inline UahBoundReport uah_bound_check(const KappaProbe& probe, double alpha, double k,
                                      std::span<const UpperHalfPlanePoint> grid)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw argument_error("uah_bound_check: alpha must lie in [0,1]");
    UahBoundReport report;
    report.alpha = alpha;
    report.k = k;
    report.c = c_alpha(alpha, k);
    for (const auto& z : grid) {
        const auto f = probe.family().borel(z.z());
        const double lhs = kappa_poisson(probe, z).value;
        const double rhs = report.c * std::pow(std::norm(f) / f.imag(), 1.0 - alpha);
        BoundPoint p{z.x(), z.eps(), lhs, rhs, lhs > rhs + uah_bound_slack};
        if (p.violated)
            report.violations.push_back(report.points.size());
        report.points.push_back(p);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Kotani identity and continuity inheritance

struct KotaniResult
{
    double lhs = 0.0; // |B|
    double rhs = 0.0; // kappa_Lebesgue(B)
    double abs_err = 0.0;
    double error_estimate = 0.0;
    std::size_t panels_used = 0;
};

inline KotaniResult kotani_check(const RankOneFamily& family, const IntervalUnion& set,
                                 const QuadratureConfig& quad = {})
{
    const KappaProbe probe(family, make_lebesgue(), quad);
    const auto k = kappa_set(probe, set);
    KotaniResult out;
    out.lhs = set.length();
    out.rhs = k.value;
    out.abs_err = std::abs(out.lhs - out.rhs);
    out.error_estimate = k.error_estimate;
    out.panels_used = k.panels_used;
    return out;
}

// Eigenvalues of A_lambda over the given couplings, deduplicated.
inline std::vector<double> atom_candidates(const RankOneFamily& family, std::span<const double> lambdas)
{
    std::vector<double> out;
    for (double lambda : lambdas)
        for (const auto& at : family.perturbed_direct(lambda).atoms)
            out.push_back(at.position);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct AtomCheckResult
{
    double max_estimate = 0.0;
    double worst_point = 0.0;
    std::vector<double> estimates; // per candidate
};

// kappa({x}) = nu({lambda*}) mu_lambda*({x}) with lambda* = -1/F_mu(x), the
// only coupling at which x can be an atom.
inline AtomCheckResult kappa_atom_check(const KappaProbe& probe, std::span<const double> candidates,
                                        const EpsLadder& ladder = {})
{
    if (probe.nu().has_atoms())
        throw precondition_error("kappa_atom_check: nu must be continuous");
    const auto& family = probe.family();
    AtomCheckResult out;
    for (double x : candidates) {
        double estimate = 0.0;
        if (auto lambda = family.crossing_coupling(x)) {
            const SpectralMeasure m = *lambda == 0.0 ? family.mu() : family.perturbed_secular(*lambda);
            const double tol = 1e-9 * std::max(1.0, family.norm() + std::abs(*lambda));
            double mu_x = 0.0;
            for (const auto& at : m.atoms)
                if (std::abs(at.position - x) <= tol)
                    mu_x += at.weight;
            if (mu_x > 0.0)
                estimate = atom_weight(probe.nu(), *lambda, ladder) * mu_x;
        }
        out.estimates.push_back(estimate);
        if (out.estimates.size() == 1 || estimate > out.max_estimate) {
            out.max_estimate = estimate;
            out.worst_point = x;
        }
    }
    return out;
}

} // namespace specavg
