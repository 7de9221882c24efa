#pragma once

// Sigma-finite Borel measures on the real line: atoms, bounded density pieces,
// and the two closed-form infinite families (Lebesgue, Cauchy weight).
//
// Every set function here uses OPEN intervals: eta((lo, hi)) never counts an
// atom sitting exactly on lo or hi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specavg/errors.hpp"
#include "specavg/numeric.hpp"
#include "specavg/quadrature.hpp"

namespace specavg
{

enum class FamilyKind
{
    Generic,
    Lebesgue,
    CauchyWeight,
    Uniform,
    CantorApprox
};

struct FamilyTag
{
    FamilyKind kind = FamilyKind::Generic;
    double a = 0.0; // Uniform support
    double b = 0.0;
    int depth = 0; // CantorApprox

    friend bool operator==(const FamilyTag&, const FamilyTag&) = default;
};

inline std::string to_string(FamilyKind k)
{
    switch (k) {
    case FamilyKind::Generic: return "Generic";
    case FamilyKind::Lebesgue: return "Lebesgue";
    case FamilyKind::CauchyWeight: return "CauchyWeight";
    case FamilyKind::Uniform: return "Uniform";
    case FamilyKind::CantorApprox: return "CantorApprox";
    }
    return "Generic";
}

struct Atom
{
    double position;
    double weight;

    friend bool operator==(const Atom&, const Atom&) = default;
};

using DensityFn = std::function<double(double)>;

// Mass spread over [a, b). Density is mass/(b-a) when `shape` is empty,
// otherwise mass * shape(y) with shape integrating to one over the piece.
struct DensityPiece
{
    double a;
    double b;
    double mass;
    std::shared_ptr<const DensityFn> shape;

    bool is_uniform() const noexcept { return !shape; }
    double density(double y) const
    {
        if (y < a || y >= b)
            return 0.0;
        return is_uniform() ? mass / (b - a) : mass * (*shape)(y);
    }
};

// Closed-form component with unbounded support: coefficient * Lebesgue or
// coefficient * dy/(1+y^2).
enum class AnalyticKind
{
    None,
    Lebesgue,
    CauchyWeight
};

struct AnalyticPart
{
    AnalyticKind kind = AnalyticKind::None;
    double coefficient = 0.0;
};

inline constexpr double piece_quadrature_tol = 1e-12;

class Measure
{
public:
    Measure() = default;

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<DensityPiece>& pieces() const noexcept { return pieces_; }
    const AnalyticPart& analytic() const noexcept { return analytic_; }
    const FamilyTag& tag() const noexcept { return tag_; }

    // Smallest scale at which the representation is faithful (0 if exact).
    double resolution_floor() const noexcept { return floor_; }

    // int 1/(1+|y|) d eta < infinity: Borel transform exists.
    bool has_finite_1_over_1_plus_y() const noexcept
    {
        return !(analytic_.kind == AnalyticKind::Lebesgue && analytic_.coefficient > 0.0);
    }
    // int 1/(1+y^2) d eta < infinity: Poisson transform exists. Every
    // representable measure satisfies this.
    bool has_finite_1_over_1_plus_y2() const noexcept { return true; }

    bool is_finite() const noexcept { return has_finite_1_over_1_plus_y(); }
    bool has_atoms() const noexcept
    {
        return std::any_of(atoms_.begin(), atoms_.end(),
                           [](const Atom& at) { return at.weight > 0.0; });
    }

    double total_mass() const
    {
        if (!is_finite())
            return std::numeric_limits<double>::infinity();
        CompensatedSum s;
        for (const auto& at : atoms_)
            s += at.weight;
        for (const auto& p : pieces_)
            s += p.mass;
        if (analytic_.kind == AnalyticKind::CauchyWeight)
            s += analytic_.coefficient * std::numbers::pi;
        return s.value();
    }

    // eta((lo, hi)), open interval.
    double interval_mass(double lo, double hi) const
    {
        if (!(hi > lo))
            return 0.0;
        CompensatedSum s;
        auto first = std::upper_bound(atoms_.begin(), atoms_.end(), lo,
                                      [](double v, const Atom& at) { return v < at.position; });
        for (auto it = first; it != atoms_.end() && it->position < hi; ++it)
            s += it->weight;
        for_each_piece_overlapping(lo, hi, [&](const DensityPiece& p) {
            s += piece_mass(p, std::max(lo, p.a), std::min(hi, p.b));
        });
        switch (analytic_.kind) {
        case AnalyticKind::Lebesgue:
            s += analytic_.coefficient * (hi - lo);
            break;
        case AnalyticKind::CauchyWeight:
            s += analytic_.coefficient * arctan_difference(lo, hi);
            break;
        case AnalyticKind::None:
            break;
        }
        return s.value();
    }

    // Mass of one piece on [lo, hi] (clipped to the piece).
    static double piece_mass(const DensityPiece& p, double lo, double hi)
    {
        lo = std::max(lo, p.a);
        hi = std::min(hi, p.b);
        if (!(hi > lo))
            return 0.0;
        if (lo == p.a && hi == p.b)
            return p.mass;
        if (p.is_uniform())
            return p.mass * ((hi - lo) / (p.b - p.a));
        auto r = integrate([&p](double y) { return p.density(y); }, lo, hi, piece_quadrature_tol);
        require_converged(r, "piece mass");
        return r.value;
    }

    template <class Fn>
    void for_each_piece_overlapping(double lo, double hi, Fn&& fn) const
    {
        if (pieces_.empty())
            return;
        // Pieces are sorted by left endpoint; any piece reaching past lo
        // starts after lo - max_width_.
        auto it = std::lower_bound(pieces_.begin(), pieces_.end(), lo - max_width_,
                                   [](const DensityPiece& p, double v) { return p.a < v; });
        for (; it != pieces_.end() && it->a < hi; ++it)
            if (it->b > lo)
                fn(*it);
    }

    // Sum of densities of the pieces covering y.
    double piece_density(double y) const
    {
        double d = 0.0;
        for_each_piece_overlapping(y, std::nextafter(y, std::numeric_limits<double>::infinity()),
                                   [&](const DensityPiece& p) { d += p.density(y); });
        return d;
    }

    // Exact atom at x (within tol), if any.
    std::optional<Atom> atom_near(double x, double tol) const
    {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x - tol,
                                   [](const Atom& at, double v) { return at.position < v; });
        if (it != atoms_.end() && it->position <= x + tol && it->weight > 0.0)
            return *it;
        return std::nullopt;
    }

    Measure scaled(double factor) const
    {
        if (!(factor >= 0.0) || !std::isfinite(factor))
            throw argument_error("Measure::scaled: factor must be finite and nonnegative");
        Measure out = *this;
        for (auto& at : out.atoms_)
            at.weight *= factor;
        for (auto& p : out.pieces_)
            p.mass *= factor;
        out.analytic_.coefficient *= factor;
        out.tag_ = factor == 1.0 ? tag_ : FamilyTag{};
        return out;
    }

    friend Measure operator+(const Measure& lhs, const Measure& rhs)
    {
        if (lhs.analytic_.kind != AnalyticKind::None && rhs.analytic_.kind != AnalyticKind::None &&
            lhs.analytic_.kind != rhs.analytic_.kind)
            throw argument_error("Measure sum: cannot mix Lebesgue and Cauchy-weight parts");
        std::vector<Atom> atoms = lhs.atoms_;
        atoms.insert(atoms.end(), rhs.atoms_.begin(), rhs.atoms_.end());
        std::vector<DensityPiece> pieces = lhs.pieces_;
        pieces.insert(pieces.end(), rhs.pieces_.begin(), rhs.pieces_.end());
        AnalyticPart analytic = lhs.analytic_;
        if (rhs.analytic_.kind != AnalyticKind::None) {
            analytic.kind = rhs.analytic_.kind;
            analytic.coefficient += rhs.analytic_.coefficient;
        }
        FamilyTag tag{};
        if (lhs.atoms_.empty() && lhs.pieces_.empty() && lhs.analytic_.kind == AnalyticKind::None)
            tag = rhs.tag_;
        else if (rhs.atoms_.empty() && rhs.pieces_.empty() &&
                 rhs.analytic_.kind == AnalyticKind::None)
            tag = lhs.tag_;
        return Measure(std::move(atoms), std::move(pieces), analytic, tag,
                       std::max(lhs.floor_, rhs.floor_));
    }

    // Validating constructor. Atoms are sorted and coincident atoms merged;
    // pieces are sorted by left endpoint.
    Measure(std::vector<Atom> atoms, std::vector<DensityPiece> pieces, AnalyticPart analytic,
            FamilyTag tag, double resolution_floor)
        : atoms_(std::move(atoms)), pieces_(std::move(pieces)), analytic_(analytic), tag_(tag),
          floor_(resolution_floor)
    {
        for (const auto& at : atoms_)
            if (!std::isfinite(at.position) || !(at.weight >= 0.0) || !std::isfinite(at.weight))
                throw argument_error("Measure: atoms need finite positions and nonnegative weights");
        std::stable_sort(atoms_.begin(), atoms_.end(),
                         [](const Atom& l, const Atom& r) { return l.position < r.position; });
        std::vector<Atom> merged;
        merged.reserve(atoms_.size());
        for (const auto& at : atoms_) {
            if (!merged.empty() && merged.back().position == at.position)
                merged.back().weight += at.weight;
            else
                merged.push_back(at);
        }
        atoms_ = std::move(merged);

        for (const auto& p : pieces_) {
            if (!std::isfinite(p.a) || !std::isfinite(p.b) || !(p.b > p.a))
                throw argument_error("Measure: density pieces need finite a < b");
            if (!(p.mass >= 0.0) || !std::isfinite(p.mass))
                throw argument_error("Measure: density piece mass must be nonnegative");
            max_width_ = std::max(max_width_, p.b - p.a);
        }
        std::stable_sort(pieces_.begin(), pieces_.end(),
                         [](const DensityPiece& l, const DensityPiece& r) { return l.a < r.a; });
        if (!(analytic_.coefficient >= 0.0))
            throw argument_error("Measure: analytic coefficient must be nonnegative");
        if (analytic_.kind == AnalyticKind::None)
            analytic_.coefficient = 0.0;
    }

private:
    static double arctan_difference(double lo, double hi)
    {
        // atan(hi) - atan(lo) without cancellation for same-sign arguments.
        return std::atan2(hi - lo, 1.0 + lo * hi);
    }

    std::vector<Atom> atoms_;
    std::vector<DensityPiece> pieces_;
    AnalyticPart analytic_;
    FamilyTag tag_;
    double floor_ = 0.0;
    double max_width_ = 0.0;
};

// ---------------------------------------------------------------------------
// Standard families

inline Measure make_lebesgue()
{
    return Measure({}, {}, {AnalyticKind::Lebesgue, 1.0}, {FamilyKind::Lebesgue}, 0.0);
}

// dy / (1 + y^2), total mass pi.
inline Measure make_cauchy_weight()
{
    return Measure({}, {}, {AnalyticKind::CauchyWeight, 1.0}, {FamilyKind::CauchyWeight}, 0.0);
}

// Uniform probability measure on [a, b).
inline Measure make_uniform(double a, double b)
{
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
        throw argument_error("make_uniform: need finite a < b");
    return Measure({}, {DensityPiece{a, b, 1.0, nullptr}}, {}, {FamilyKind::Uniform, a, b}, 0.0);
}

inline Measure make_dirac(double position, double weight = 1.0)
{
    return Measure({Atom{position, weight}}, {}, {}, {}, 0.0);
}

inline Measure make_atomic(std::vector<Atom> atoms)
{
    return Measure(std::move(atoms), {}, {}, {}, 0.0);
}

// Density f on [a, b). The mass hint skips the quadrature when supplied.
inline Measure make_density(double a, double b, DensityFn f,
                            std::optional<double> mass_hint = std::nullopt)
{
    if (!(b > a))
        throw argument_error("make_density: need a < b");
    double mass = 0.0;
    if (mass_hint) {
        mass = *mass_hint;
    } else {
        auto r = integrate(f, a, b, piece_quadrature_tol);
        mass = require_converged(r, "make_density").value;
    }
    if (!(mass >= 0.0))
        throw argument_error("make_density: density must be nonnegative");
    if (mass == 0.0)
        return Measure();
    auto shape = std::make_shared<const DensityFn>([f = std::move(f), mass](double y) {
        return f(y) / mass;
    });
    return Measure({}, {DensityPiece{a, b, mass, std::move(shape)}}, {}, {}, 0.0);
}

// Piecewise-uniform approximation of the middle-thirds Cantor measure:
// 2^depth surviving triadic intervals of [0,1], mass 2^-depth each.
inline Measure make_cantor(int depth)
{
    if (depth < 1 || depth > 20)
        throw argument_error("make_cantor: depth must lie in [1, 20]");
    const double denom = std::pow(3.0, depth);
    const double piece_mass = std::ldexp(1.0, -depth);
    const std::size_t count = std::size_t{1} << depth;
    std::vector<DensityPiece> pieces;
    pieces.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        // Left endpoint numerator: ternary digits 0/2 selected by the bits of k.
        double numerator = 0.0;
        for (int level = 0; level < depth; ++level) {
            numerator *= 3.0;
            if ((k >> (depth - 1 - level)) & 1U)
                numerator += 2.0;
        }
        pieces.push_back({numerator / denom, (numerator + 1.0) / denom, piece_mass, nullptr});
    }
    return Measure({}, std::move(pieces), {}, {FamilyKind::CantorApprox, 0.0, 0.0, depth},
                   1.0 / denom);
}

// ---------------------------------------------------------------------------
// Growth

// M_eta(x; eps) = eta((x - eps, x + eps)).
inline double growth_function(const Measure& eta, double x, double eps)
{
    if (!(eps > 0.0))
        throw argument_error("growth_function: eps must be positive");
    return eta.interval_mass(x - eps, x + eps);
}

struct GrowthProfile
{
    double center = 0.0;
    std::vector<double> scales; // descending
    std::vector<double> masses;
};

inline GrowthProfile growth_profile(const Measure& eta, double x, double eps_max, double ratio,
                                    int count)
{
    if (count < 3)
        throw argument_error("growth_profile: count must be at least 3");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw argument_error("growth_profile: ratio must lie in (0,1)");
    GrowthProfile out;
    out.center = x;
    out.scales = geometric_scales(eps_max, ratio, static_cast<std::size_t>(count));
    out.masses.reserve(out.scales.size());
    for (double e : out.scales)
        out.masses.push_back(growth_function(eta, x, e));
    return out;
}

// ---------------------------------------------------------------------------
// Uniform alpha-Hoelder constant by interval scan

// One width with the centers probed at that width.
struct ScanRung
{
    double width;
    std::vector<double> centers;
};

// Rungs are visited in the order given; widths should descend. Widths below
// width_floor are skipped.
struct UahScan
{
    std::vector<ScanRung> rungs;
    double width_floor = 0.0;
};

struct UahEstimate
{
    double constant = 0.0; // sup eta(I)/|I|^alpha over the scan; a lower bound on K
    double witness_lo = 0.0;
    double witness_hi = 0.0;
    bool divergent = false;
    std::size_t intervals_scanned = 0;
    std::vector<double> running_max; // after each rung that was visited
};

// Running-max growth ratio that flags divergence: the final running max
// against the running max at the geometric middle of the visited widths.
inline constexpr double uah_divergence_factor = 10.0;

inline UahEstimate uah_constant(const Measure& eta, double alpha, const UahScan& scan)
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw argument_error("uah_constant: alpha must lie in (0,1]");
    UahEstimate out;
    std::vector<double> widths;
    for (const auto& rung : scan.rungs) {
        if (!(rung.width > 0.0))
            throw argument_error("uah_constant: scan widths must be positive");
        if (rung.width < scan.width_floor)
            continue;
        const double half = 0.5 * rung.width;
        const double denom = std::pow(rung.width, alpha);
        for (double c : rung.centers) {
            const double ratio = eta.interval_mass(c - half, c + half) / denom;
            ++out.intervals_scanned;
            if (ratio > out.constant) {
                out.constant = ratio;
                out.witness_lo = c - half;
                out.witness_hi = c + half;
            }
        }
        out.running_max.push_back(out.constant);
        widths.push_back(rung.width);
    }
    if (widths.size() >= 3) {
        const double mid_width = std::sqrt(widths.front() * widths.back());
        std::size_t mid = 0;
        while (mid + 1 < widths.size() && widths[mid] > mid_width)
            ++mid;
        const double at_mid = out.running_max[mid];
        out.divergent = out.running_max.back() > uah_divergence_factor * at_mid;
    }
    return out;
}

// Centers on a uniform grid over [lo, hi] at each width of a geometric ladder.
inline UahScan uniform_scan(double lo, double hi, std::size_t centers, double width_max,
                            double ratio, std::size_t rungs, double width_floor = 0.0)
{
    if (!(hi >= lo) || centers < 1)
        throw argument_error("uniform_scan: need lo <= hi and at least one center");
    UahScan scan;
    scan.width_floor = width_floor;
    std::vector<double> grid;
    grid.reserve(centers);
    for (std::size_t i = 0; i < centers; ++i)
        grid.push_back(centers == 1 ? 0.5 * (lo + hi)
                                    : lo + (hi - lo) * static_cast<double>(i) /
                                               static_cast<double>(centers - 1));
    for (double w : geometric_scales(width_max, ratio, rungs))
        scan.rungs.push_back({w, grid});
    return scan;
}

// Every triadic interval (k 3^-m, (k+1) 3^-m) in [0,1], m = 0..levels, that
// meets the Cantor set, probed as a centered open interval.
inline UahScan triadic_scan(int levels)
{
    if (levels < 0 || levels > 20)
        throw argument_error("triadic_scan: levels must lie in [0, 20]");
    UahScan scan;
    for (int m = 0; m <= levels; ++m) {
        const double denom = std::pow(3.0, m);
        ScanRung rung{1.0 / denom, {}};
        const std::size_t count = std::size_t{1} << m;
        rung.centers.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            double numerator = 0.0;
            for (int level = 0; level < m; ++level) {
                numerator *= 3.0;
                if ((k >> (m - 1 - level)) & 1U)
                    numerator += 2.0;
            }
            rung.centers.push_back((numerator + 0.5) / denom);
        }
        scan.rungs.push_back(std::move(rung));
    }
    scan.width_floor = 1.0 / std::pow(3.0, levels);
    return scan;
}

} // namespace specavg
