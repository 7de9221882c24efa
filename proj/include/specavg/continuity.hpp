#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "specavg/averaging.hpp"
#include "specavg/errors.hpp"
#include "specavg/measure.hpp"
#include "specavg/numeric.hpp"
#include "specavg/operator.hpp"
#include "specavg/transform.hpp"

namespace specavg
{

// Anything that can report local masses and Poisson values: plain measures
// through MeasureSource, averaged measures through KappaProbe.
template <class S>
concept ScalingSource = requires(const S& s, double x, double e) {
    { s.mass_near(x, e) } -> std::convertible_to<double>;
    { s.poisson_at(x, e) } -> std::convertible_to<double>;
    { s.resolution_floor_at(x) } -> std::convertible_to<double>;
};

class MeasureSource
{
public:
    explicit MeasureSource(const Measure& eta) : eta_(&eta) {}

    double mass_near(double x, double eps) const { return growth_function(*eta_, x, eps); }
    double poisson_at(double x, double eps) const
    {
        return poisson_transform(*eta_, UpperHalfPlanePoint(x, eps));
    }
    double resolution_floor_at(double) const { return eta_->resolution_floor(); }

private:
    const Measure* eta_;
};

static_assert(ScalingSource<MeasureSource>);
static_assert(ScalingSource<KappaProbe>);

struct ContinuityConfig
{
    std::size_t trend_rungs = 0; // trailing rungs used for the trend; 0 = all usable
    double divergence_factor = 2.0;
    double indeterminate_r2 = 0.5;
    double noise_floor = 1e-8; // rms log-residual below which a fit counts as exact

    void validate() const
    {
        if (!(divergence_factor > 1.0) || !std::isfinite(divergence_factor))
            throw argument_error("continuity: divergence_factor must exceed 1");
        if (!(indeterminate_r2 >= 0.0 && indeterminate_r2 <= 1.0))
            throw argument_error("continuity: indeterminate_r2 must lie in [0,1]");
        if (!(noise_floor >= 0.0))
            throw argument_error("continuity: noise_floor must be nonnegative");
        if (trend_rungs == 1 || trend_rungs == 2)
            throw argument_error("continuity: trend_rungs must be 0 or at least 3");
    }
};

enum class ScalingClass
{
    Zero,
    FinitePositive,
    Infinite
};

enum class ScalingRoute
{
    Growth,
    Poisson
};

inline std::string to_string(ScalingClass c)
{
    switch (c) {
    case ScalingClass::Zero: return "Zero";
    case ScalingClass::FinitePositive: return "FinitePositive";
    case ScalingClass::Infinite: return "Infinite";
    }
    return "Zero";
}

inline std::string to_string(ScalingRoute r)
{
    return r == ScalingRoute::Growth ? "growth" : "poisson";
}

struct ScalingEstimate
{
    ScalingRoute route = ScalingRoute::Growth;
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    EpsLadder ladder;
    double floor = 0.0;
    std::size_t rungs_used = 0;
    std::size_t rungs_dropped = 0;
    double reference_alpha = 0.0;
    // (M/eps^alpha at the finest trend rung) / (same at the coarsest), read
    // off the fitted line.
    double trend_factor = 1.0;
    ScalingClass classification = ScalingClass::FinitePositive;
    std::vector<double> scales;
    std::vector<double> values;
};

namespace detail
{

inline ScalingEstimate fit_scaling(ScalingRoute route, const std::vector<double>& scales,
                                   const std::vector<double>& raw, double alpha,
                                   const EpsLadder& ladder, double floor,
                                   const ContinuityConfig& cfg)
{
    ScalingEstimate out;
    out.route = route;
    out.ladder = ladder;
    out.floor = floor;
    out.reference_alpha = alpha;

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < scales.size(); ++k) {
        if (!(raw[k] > 0.0) || !std::isfinite(raw[k])) {
            ++out.rungs_dropped;
            continue;
        }
        out.scales.push_back(scales[k]);
        out.values.push_back(raw[k]);
        lx.push_back(std::log(scales[k]));
        ly.push_back(std::log(raw[k]));
    }
    out.rungs_used = lx.size();

    if (scales.size() >= 3 && lx.empty()) {
        // No mass anywhere on the ladder: faster than any power.
        out.exponent = std::numeric_limits<double>::infinity();
        out.classification = ScalingClass::Zero;
        out.trend_factor = 0.0;
        return out;
    }
    if (lx.size() < 3)
        throw insufficient_resolution("scaling exponent: fewer than 3 usable rungs above the floor (" +
                                      std::to_string(lx.size()) + ")");

    auto fit = least_squares(lx, ly);
    CompensatedSum ssr;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        const double r = ly[k] - (fit.slope * lx[k] + fit.intercept);
        ssr += r * r;
    }
    if (std::sqrt(ssr.value() / static_cast<double>(lx.size())) <= cfg.noise_floor)
        fit.r_squared = 1.0;

    // Poisson values scale like eps^(exponent - 1).
    const double offset = route == ScalingRoute::Growth ? 0.0 : 1.0;
    out.exponent = fit.slope + offset;
    out.intercept = fit.intercept;
    out.r_squared = fit.r_squared;

    std::size_t first = 0;
    double trend_slope = fit.slope;
    if (cfg.trend_rungs != 0 && cfg.trend_rungs < lx.size()) {
        first = lx.size() - cfg.trend_rungs;
        std::vector<double> tx(lx.begin() + static_cast<std::ptrdiff_t>(first), lx.end());
        std::vector<double> ty(ly.begin() + static_cast<std::ptrdiff_t>(first), ly.end());
        trend_slope = least_squares(tx, ty).slope;
    }
    const double span = lx.back() - lx[first];
    out.trend_factor = std::exp((trend_slope + offset - alpha) * span);
    if (out.trend_factor <= 1.0 / cfg.divergence_factor)
        out.classification = ScalingClass::Zero;
    else if (out.trend_factor >= cfg.divergence_factor)
        out.classification = ScalingClass::Infinite;
    else
        out.classification = ScalingClass::FinitePositive;
    return out;
}

inline void check_alpha(double alpha, const char* what)
{
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw argument_error(std::string(what) + ": reference alpha must be finite and nonnegative");
}

} // namespace detail

template <ScalingSource S>
ScalingEstimate scaling_exponent_growth(const S& src, double x, double alpha, const EpsLadder& ladder,
                                        const ContinuityConfig& cfg = {})
{
    cfg.validate();
    detail::check_alpha(alpha, "scaling_exponent_growth");
    const double floor = src.resolution_floor_at(x);
    const auto scales = ladder_scales(ladder, floor);
    std::vector<double> m;
    m.reserve(scales.size());
    for (double e : scales)
        m.push_back(src.mass_near(x, e));
    return detail::fit_scaling(ScalingRoute::Growth, scales, m, alpha, ladder, floor, cfg);
}

inline ScalingEstimate scaling_exponent_growth(const Measure& eta, double x, double alpha,
                                               const EpsLadder& ladder, const ContinuityConfig& cfg = {})
{
    return scaling_exponent_growth(MeasureSource(eta), x, alpha, ladder, cfg);
}

template <ScalingSource S>
ScalingEstimate scaling_exponent_poisson(const S& src, double x, double alpha, const EpsLadder& ladder,
                                         const ContinuityConfig& cfg = {})
{
    cfg.validate();
    detail::check_alpha(alpha, "scaling_exponent_poisson");
    const double floor = src.resolution_floor_at(x);
    const auto scales = ladder_scales(ladder, floor);
    std::vector<double> p;
    p.reserve(scales.size());
    for (double e : scales)
        p.push_back(src.poisson_at(x, e));
    return detail::fit_scaling(ScalingRoute::Poisson, scales, p, alpha, ladder, floor, cfg);
}

inline ScalingEstimate scaling_exponent_poisson(const Measure& eta, double x, double alpha,
                                                const EpsLadder& ladder, const ContinuityConfig& cfg = {})
{
    return scaling_exponent_poisson(MeasureSource(eta), x, alpha, ladder, cfg);
}

template <ScalingSource S>
ScalingEstimate scaling_exponent(const S& src, ScalingRoute route, double x, double alpha,
                                 const EpsLadder& ladder, const ContinuityConfig& cfg = {})
{
    return route == ScalingRoute::Growth ? scaling_exponent_growth(src, x, alpha, ladder, cfg)
                                         : scaling_exponent_poisson(src, x, alpha, ladder, cfg);
}

// ---------------------------------------------------------------------------
// Rogers-Taylor classification

enum class PointClass
{
    TZeroPlus,
    TInfinite,
    Indeterminate
};

inline std::string to_string(PointClass c)
{
    switch (c) {
    case PointClass::TZeroPlus: return "T_zero_plus";
    case PointClass::TInfinite: return "T_infinite";
    case PointClass::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

inline PointClass classify(const ScalingEstimate& est, const ContinuityConfig& cfg = {})
{
    switch (est.classification) {
    case ScalingClass::Infinite: return PointClass::TInfinite;
    case ScalingClass::Zero: return PointClass::TZeroPlus;
    case ScalingClass::FinitePositive:
        return est.r_squared < cfg.indeterminate_r2 ? PointClass::Indeterminate : PointClass::TZeroPlus;
    }
    return PointClass::Indeterminate;
}

template <ScalingSource S>
PointClass classify_point(const S& src, double x, double alpha, const EpsLadder& ladder,
                          ScalingRoute route = ScalingRoute::Growth, const ContinuityConfig& cfg = {})
{
    return classify(scaling_exponent(src, route, x, alpha, ladder, cfg), cfg);
}

inline PointClass classify_point(const Measure& eta, double x, double alpha, const EpsLadder& ladder,
                                 ScalingRoute route = ScalingRoute::Growth,
                                 const ContinuityConfig& cfg = {})
{
    return classify_point(MeasureSource(eta), x, alpha, ladder, route, cfg);
}

// ---------------------------------------------------------------------------
// Rogers-Taylor split

inline constexpr double split_ratio_slack = 1e-12;
inline constexpr double split_max_fraction = 0.99;

struct SplitResult
{
    Measure eta1;
    Measure eta2;
    double eta2_mass = 0.0;
    double total_mass = 0.0;
    bool success = false;
    double worst_ratio = 0.0; // sup eta1(I)/|I|^alpha over the scan at exit
    double worst_lo = 0.0;
    double worst_hi = 0.0;
    std::size_t iterations = 0;
    std::string message;
};

// Uniform grid over the support hull plus every atom, widths halving from
// the hull width down to the resolution floor.
inline UahScan split_scan(const Measure& eta, std::size_t centers = 257, std::size_t rungs = 30)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& at : eta.atoms()) {
        lo = std::min(lo, at.position);
        hi = std::max(hi, at.position);
    }
    for (const auto& p : eta.pieces()) {
        lo = std::min(lo, p.a);
        hi = std::max(hi, p.b);
    }
    if (!(hi >= lo))
        lo = hi = 0.0;
    const double width = hi > lo ? hi - lo : 1.0;
    auto scan = uniform_scan(lo, hi, centers, width, 0.5, rungs, eta.resolution_floor());
    for (auto& rung : scan.rungs) {
        for (const auto& at : eta.atoms())
            rung.centers.push_back(at.position);
        std::sort(rung.centers.begin(), rung.centers.end());
    }
    return scan;
}

inline SplitResult rogers_taylor_split(const Measure& eta, double alpha, double k_target,
                                       const UahScan& scan, std::size_t max_iterations = 10000)
{
    if (eta.analytic().kind != AnalyticKind::None && eta.analytic().coefficient > 0.0)
        throw precondition_error("rogers_taylor_split: measure must be finite and atomic or piecewise");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw argument_error("rogers_taylor_split: alpha must lie in (0,1]");
    if (!(k_target > 0.0) || !std::isfinite(k_target))
        throw argument_error("rogers_taylor_split: K_target must be positive and finite");

    std::vector<Atom> atoms1 = eta.atoms(), atoms2;
    std::vector<DensityPiece> pieces1 = eta.pieces(), pieces2;
    const double floor = eta.resolution_floor();
    auto build = [&](const std::vector<Atom>& a, const std::vector<DensityPiece>& p) {
        return Measure(a, p, AnalyticPart{}, FamilyTag{}, floor);
    };

    SplitResult out;
    out.total_mass = eta.total_mass();
    const double limit = k_target * (1.0 + split_ratio_slack);

    for (;;) {
        const Measure current = build(atoms1, pieces1);
        const auto est = uah_constant(current, alpha, scan);
        out.worst_ratio = est.constant;
        out.worst_lo = est.witness_lo;
        out.worst_hi = est.witness_hi;
        if (est.constant <= limit) {
            out.success = true;
            break;
        }
        if (out.iterations >= max_iterations) {
            out.message = "iteration cap reached";
            break;
        }
        ++out.iterations;

        const double lo = est.witness_lo, hi = est.witness_hi;
        auto heaviest = atoms1.end();
        for (auto it = atoms1.begin(); it != atoms1.end(); ++it)
            if (it->position > lo && it->position < hi && it->weight > 0.0 &&
                (heaviest == atoms1.end() || it->weight > heaviest->weight))
                heaviest = it;

        std::vector<DensityPiece> next1, moved;
        if (heaviest == atoms1.end()) {
            const double keep = k_target * std::pow(hi - lo, alpha) / current.interval_mass(lo, hi);
            for (const auto& p : pieces1) {
                if (!(p.b > lo && p.a < hi) || !(p.mass > 0.0)) {
                    next1.push_back(p);
                    continue;
                }
                // Uniform pieces are cut at the witness so only the overlap
                // gives up mass; shaped pieces are scaled whole.
                DensityPiece inner = p;
                if (p.is_uniform()) {
                    const double len = p.b - p.a;
                    inner.a = std::max(p.a, lo);
                    inner.b = std::min(p.b, hi);
                    inner.mass = p.mass * ((inner.b - inner.a) / len);
                    if (p.a < inner.a)
                        next1.push_back({p.a, inner.a, p.mass * ((inner.a - p.a) / len), nullptr});
                    if (inner.b < p.b)
                        next1.push_back({inner.b, p.b, p.mass * ((p.b - inner.b) / len), nullptr});
                }
                DensityPiece removed = inner;
                const double kept = inner.mass * keep;
                removed.mass = inner.mass - kept;
                inner.mass = kept;
                next1.push_back(inner);
                moved.push_back(removed);
            }
            if (moved.empty()) {
                out.message = "violation not attributable to any atom or piece";
                break;
            }
        }

        CompensatedSum m2;
        for (const auto& a : atoms2)
            m2 += a.weight;
        for (const auto& p : pieces2)
            m2 += p.mass;
        if (heaviest != atoms1.end())
            m2 += heaviest->weight;
        for (const auto& p : moved)
            m2 += p.mass;
        if (m2.value() > split_max_fraction * out.total_mass) {
            out.message = "K_target unachievable: eta2 would exceed 0.99 of the total mass";
            break;
        }
        if (heaviest != atoms1.end()) {
            atoms2.push_back(*heaviest);
            atoms1.erase(heaviest);
        } else {
            pieces1 = std::move(next1);
            pieces2.insert(pieces2.end(), moved.begin(), moved.end());
        }
    }
    out.eta1 = build(atoms1, pieces1);
    out.eta2 = build(atoms2, pieces2);
    out.eta2_mass = out.eta2.total_mass();
    return out;
}

inline SplitResult rogers_taylor_split(const Measure& eta, double alpha, double k_target)
{
    return rogers_taylor_split(eta, alpha, k_target, split_scan(eta));
}

// ---------------------------------------------------------------------------
// Exponent algebra

struct ExponentPair
{
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    bool valid = false;
};

inline double beta_threshold(double alpha)
{
    return std::max(0.0, (2.0 - 3.0 * alpha) / (2.0 * (1.0 - alpha)));
}

inline ExponentPair gamma_exponent(double alpha, double beta)
{
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0))
        throw argument_error("gamma_exponent: alpha and beta must lie in (0,1)");
    return {alpha, beta, alpha - 2.0 * (1.0 - beta) * (1.0 - alpha), beta > beta_threshold(alpha)};
}

struct BetaForDelta
{
    double beta = 0.0;
    bool valid = false; // beta in (0,1) and above the threshold
};

inline BetaForDelta beta_for_delta(double alpha, double delta)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw argument_error("beta_for_delta: alpha must lie in (0,1)");
    if (!(delta > 0.0) || !(delta < alpha))
        throw argument_error("beta_for_delta: need 0 < delta < alpha");
    const double beta = 1.0 - (alpha - delta) / (2.0 * (1.0 - alpha));
    return {beta, beta > 0.0 && beta < 1.0 && beta > beta_threshold(alpha)};
}

// ---------------------------------------------------------------------------
// Absolutely continuous density

struct AcDensityEstimate
{
    double density = 0.0;
    bool divergent = false;
    std::size_t rungs_used = 0;
    double last_raw = 0.0; // (1/pi) P at the finest rung
};

// Repeated Richardson elimination of eps, eps^2, eps^3 along the ladder.
// When P is blowing up the extrapolation means nothing, so the finest raw
// value is reported instead.
template <ScalingSource S>
AcDensityEstimate ac_density_estimate(const S& src, double x, const EpsLadder& ladder)
{
    const auto scales = ladder_scales(ladder, src.resolution_floor_at(x));
    if (scales.size() < 3)
        throw insufficient_resolution("ac_density_estimate: fewer than 3 rungs above the floor");
    std::vector<double> d;
    d.reserve(scales.size());
    for (double e : scales)
        d.push_back(src.poisson_at(x, e) / std::numbers::pi);

    AcDensityEstimate out;
    out.rungs_used = d.size();
    out.last_raw = d.back();
    out.divergent = d.back() >= 2.0 * d[d.size() - 3];
    if (out.divergent) {
        out.density = d.back();
        return out;
    }
    const std::size_t levels = std::min<std::size_t>(3, d.size() - 1);
    std::vector<double> t(d.end() - static_cast<std::ptrdiff_t>(levels + 1), d.end());
    double rp = 1.0;
    for (std::size_t j = 1; j <= levels; ++j) {
        rp *= ladder.ratio;
        for (std::size_t k = t.size() - 1; k >= j; --k)
            t[k] = (t[k] - rp * t[k - 1]) / (1.0 - rp);
    }
    out.density = std::max(0.0, t.back());
    return out;
}

inline AcDensityEstimate ac_density_estimate(const Measure& eta, double x, const EpsLadder& ladder)
{
    return ac_density_estimate(MeasureSource(eta), x, ladder);
}

// ---------------------------------------------------------------------------
// Averaged-measure report

struct ReportConfig
{
    double alpha = 1.0; // certified exponent of nu
    std::vector<double> delta_targets{0.4, 0.5};
    EpsLadder ladder{0.1, 0.5, 16};
    double outside_tolerance = 0.1;
    std::vector<double> outside_offsets{1.5, 2.5};   // beyond the top eigenvalue
    std::vector<double> gap_couplings{0.25, 0.75};   // eigenvalues of A_lambda off supp mu
    ContinuityConfig classify;
    bool local_ladders = true; // shrink eps_max by the local lambda-to-x scale
    bool parallel = true;

    void validate() const
    {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw argument_error("report: alpha must lie in (0,1]");
        if (delta_targets.empty())
            throw argument_error("report: need at least one delta target");
        for (double d : delta_targets)
            if (!(d > 0.0 && d <= alpha))
                throw argument_error("report: delta targets must lie in (0, alpha]");
        for (double o : outside_offsets)
            if (!(o > 1.0))
                throw argument_error("report: outside offsets must exceed 1");
        for (double c : gap_couplings)
            if (!(c != 0.0) || !std::isfinite(c))
                throw argument_error("report: gap couplings must be finite and nonzero");
        if (!(outside_tolerance >= 0.0))
            throw argument_error("report: outside_tolerance must be nonnegative");
        classify.validate();
    }
};

enum class PointRegion
{
    Inside,
    Outside
};

inline std::string to_string(PointRegion r)
{
    return r == PointRegion::Inside ? "inside" : "outside";
}

struct ReportPoint
{
    std::size_t index = 0;
    double x = 0.0;
    PointRegion region = PointRegion::Inside;
    double beta_mu = 0.0; // growth exponent of mu at x
    ScalingEstimate growth;
    ScalingEstimate poisson;
    std::optional<ExponentPair> lemma; // only when beta_mu lies in (0,1)
};

struct ReportRow
{
    std::size_t point = 0;
    double x = 0.0;
    PointRegion region = PointRegion::Inside;
    std::string route;
    double alpha_hat = 0.0;
    double r2 = 0.0;
    std::string classification;
    double delta_target = 0.0;
    std::string verdict; // consistent | violation | indeterminate | not-applicable
};

struct MainTheoremReport
{
    double alpha = 0.0;
    std::string nu_family;
    std::vector<ReportPoint> points;
    std::vector<ReportRow> rows;
    std::size_t violations = 0;
    std::size_t indeterminate = 0;
    bool consistent() const noexcept { return violations == 0; }
};

namespace detail
{

inline std::vector<std::pair<double, PointRegion>> report_points(const RankOneFamily& family,
                                                                  const ReportConfig& cfg)
{
    std::vector<std::pair<double, PointRegion>> pts;
    const auto& support = family.support();
    if (support.empty())
        throw precondition_error("report: spectral measure has no support");
    for (const auto& at : support)
        pts.emplace_back(at.position, PointRegion::Inside);
    const double top = support.back().position;
    for (double o : cfg.outside_offsets)
        pts.emplace_back(top + o, PointRegion::Outside);
    const double sep = 1e-9 * std::max(1.0, family.norm());
    for (double c : cfg.gap_couplings)
        for (const auto& at : family.perturbed_secular(c).atoms) {
            bool on_support = false;
            for (const auto& s : support)
                on_support = on_support || std::abs(s.position - at.position) <= sep;
            if (!on_support && at.weight > secular_weight_floor)
                pts.emplace_back(at.position, PointRegion::Outside);
        }
    std::stable_sort(pts.begin(), pts.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    return pts;
}

inline std::string verdict_for(PointRegion region, const ScalingEstimate& est, PointClass cls,
                               double alpha, const ReportConfig& cfg)
{
    if (cls == PointClass::TInfinite)
        return "violation";
    if (region == PointRegion::Outside && !(est.exponent >= alpha - cfg.outside_tolerance))
        return "violation";
    if (cls == PointClass::Indeterminate)
        return "indeterminate";
    return "consistent";
}

} // namespace detail

// Desk-scale diagnostic: checks that the finite-ladder estimates for kappa
// never contradict delta-continuity, and that off the support of mu the
// exponent stays within tolerance of alpha.
inline MainTheoremReport main_theorem_report(const KappaProbe& probe, const ReportConfig& cfg)
{
    cfg.validate();
    const auto kind = probe.nu().tag().kind;
    if (kind == FamilyKind::Generic)
        throw precondition_error("report: nu must be one of the certified families");

    const auto pts = detail::report_points(probe.family(), cfg);
    const Measure mu = probe.family().mu().to_measure();

    auto evaluate = [&](std::size_t i) {
        ReportPoint p;
        p.index = i;
        p.x = pts[i].first;
        p.region = pts[i].second;
        EpsLadder ladder = cfg.ladder;
        if (cfg.local_ladders)
            ladder.eps_max *= std::min(1.0, probe.local_scale(p.x));
        p.growth = scaling_exponent_growth(probe, p.x, cfg.alpha, ladder, cfg.classify);
        p.poisson = scaling_exponent_poisson(probe, p.x, cfg.alpha, ladder, cfg.classify);
        try {
            p.beta_mu = scaling_exponent_growth(mu, p.x, cfg.alpha, cfg.ladder, cfg.classify).exponent;
        } catch (const insufficient_resolution&) {
            // mu is exact; mass on fewer than 3 rungs means none near x.
            p.beta_mu = std::numeric_limits<double>::infinity();
        }
        if (p.beta_mu > 0.0 && p.beta_mu < 1.0 && cfg.alpha < 1.0)
            p.lemma = gamma_exponent(cfg.alpha, p.beta_mu);
        return p;
    };

    MainTheoremReport out;
    out.alpha = cfg.alpha;
    out.nu_family = to_string(kind);
    out.points.resize(pts.size());
    if (cfg.parallel) {
        std::vector<std::future<ReportPoint>> jobs;
        jobs.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            jobs.push_back(std::async(std::launch::async, evaluate, i));
        for (std::size_t i = 0; i < pts.size(); ++i)
            out.points[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < pts.size(); ++i)
            out.points[i] = evaluate(i);
    }

    for (const auto& p : out.points) {
        for (double delta : cfg.delta_targets) {
            for (const ScalingEstimate* est : {&p.growth, &p.poisson}) {
                ScalingEstimate at = *est;
                if (std::isfinite(est->exponent))
                    at = detail::fit_scaling(est->route, est->scales, est->values, delta, est->ladder,
                                             est->floor, cfg.classify);
                const auto cls = classify(at, cfg.classify);
                ReportRow row{p.index, p.x, p.region, to_string(est->route), est->exponent,
                              est->r_squared, to_string(cls), delta,
                              detail::verdict_for(p.region, *est, cls, cfg.alpha, cfg)};
                if (row.verdict == "violation")
                    ++out.violations;
                if (row.verdict == "indeterminate")
                    ++out.indeterminate;
                out.rows.push_back(std::move(row));
            }
            ReportRow lemma{p.index, p.x, p.region, "lemma",
                            p.lemma ? p.lemma->gamma : std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(), "n/a", delta, "not-applicable"};
            if (p.lemma) {
                lemma.classification = p.lemma->valid ? "valid" : "below-threshold";
                lemma.verdict = p.lemma->valid && p.lemma->gamma >= delta ? "consistent" : "not-applicable";
            }
            out.rows.push_back(std::move(lemma));
        }
    }
    return out;
}

} // namespace specavg
