#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "specavg/averaging.hpp"
#include "specavg/continuity.hpp"
#include "specavg/errors.hpp"
#include "specavg/io.hpp"
#include "specavg/measure.hpp"
#include "specavg/operator.hpp"
#include "specavg/transform.hpp"

namespace specavg::cli
{

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_check_failed = 2;

struct Options
{
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "specavg-out";
    std::optional<double> tol;
    bool quiet = false;
};

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"transform", "perturb",  "average",    "kotani",
                                                "identity",  "bound",    "continuity", "report"};
    return names;
}

inline std::string describe(const std::string& sub)
{
    if (sub == "transform") return "Borel and Poisson transforms of a measure on a z-grid";
    if (sub == "perturb") return "spectral measures of A + lambda <phi,.>phi, secular vs direct";
    if (sub == "average") return "averaged measure kappa of interval unions and its Poisson identity";
    if (sub == "kotani") return "integral of mu_lambda(B) over lambda against |B|";
    if (sub == "identity") return "Poisson and Borel identities for kappa";
    if (sub == "bound") return "growth, dyadic and uniform Hoelder bounds";
    if (sub == "continuity") return "local scaling exponents, classification and Rogers-Taylor split";
    if (sub == "report") return "finite-ladder exponent report for kappa";
    return "";
}

inline json default_config_json(const std::string& sub)
{
    const double cantor_dim = std::log(2.0) / std::log(3.0);
    ExperimentConfig c;
    c.seed = 42;
    if (sub == "transform") {
        c.tolerance = 1e-12;
    } else if (sub == "perturb") {
        c.tolerance = 1e-8;
    } else if (sub == "average") {
        c.nu.kind = NuKind::CauchyWeight;
        c.tolerance = 1e-7;
    } else if (sub == "kotani") {
        c.nu.kind = NuKind::Lebesgue;
        c.sets = {{{-0.5, 0.7}}, {{-2.0, -1.0}, {0.5, 1.5}}};
        c.tolerance = 1e-6;
    } else if (sub == "identity") {
        c.op.kind = OperatorSpec::Kind::Jacobi;
        c.op.n = 6;
        c.op.phi.kind = PhiSpec::Kind::Basis;
        c.nu.kind = NuKind::CauchyWeight;
        c.tolerance = 1e-8;
    } else if (sub == "bound") {
        c.nu.kind = NuKind::CantorApprox;
        c.nu.depth = 10;
        c.tolerance = 1e-12;
        c.grid.nx = 8;
        c.grid.ne = 8;
    } else if (sub == "continuity") {
        c.measure.kind = MeasureChoice::Kind::Family;
        c.measure.family.kind = NuKind::CantorApprox;
        c.measure.family.depth = 12;
        c.points = {0.0, 0.25, 2.0 / 3.0};
        c.alpha = cantor_dim;
        c.ladder = {1.0 / 3.0, 1.0 / 3.0, 10};
        c.split = SplitSpec{cantor_dim, 1.1};
        c.tolerance = 0.9; // r^2 above which the two routes must agree
    } else if (sub == "report") {
        c.op.kind = OperatorSpec::Kind::Jacobi;
        c.op.n = 6;
        c.op.phi.kind = PhiSpec::Kind::Basis;
        c.nu.kind = NuKind::CantorApprox;
        c.nu.depth = 10;
        c.alpha = cantor_dim;
        c.delta_targets = {0.4, 0.5};
        c.ladder = {0.1, 0.5, 16};
        c.tolerance = 0.1;
    } else {
        throw argument_error("unknown subcommand '" + sub + "'");
    }
    return config_to_json(c);
}

namespace detail
{

inline std::string csv_row(std::initializer_list<std::string> cells)
{
    std::string out;
    bool first = true;
    for (const auto& c : cells) {
        if (!first)
            out += ',';
        out += c;
        first = false;
    }
    out += '\n';
    return out;
}

inline std::string r(double v) { return format_real(v); }

class Run
{
public:
    Run(std::string name, const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
        : name_(std::move(name)), cfg_(cfg), opt_(opt), log_(log)
    {
        std::filesystem::create_directories(opt_.out_dir);
    }

    void check(const std::string& name, double value, double tolerance, bool passed)
    {
        checks_.push_back({{"name", name},
                           {"value", real_json(value)},
                           {"tolerance", real_json(tolerance)},
                           {"passed", passed}});
        all_passed_ = all_passed_ && passed;
        if (!opt_.quiet)
            log_ << name_ << ": " << name << " = " << format_real(value) << " (tolerance "
                 << format_real(tolerance) << ") " << (passed ? "PASS" : "FAIL") << '\n';
    }

    void note(const std::string& text)
    {
        notes_.push_back(text);
        if (!opt_.quiet)
            log_ << name_ << ": " << text << '\n';
    }

    void write(const std::string& file, const std::string& content)
    {
        const auto path = std::filesystem::path(opt_.out_dir) / file;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out)
            throw std::runtime_error("cannot write " + path.string());
        files_.push_back(file);
    }

    int finish(json results)
    {
        json doc;
        doc["subcommand"] = name_;
        doc["seed"] = cfg_.seed;
        doc["operator_seed"] = effective_seed(cfg_.op, cfg_.seed);
        doc["config"] = config_to_json(cfg_);
        doc["results"] = std::move(results);
        doc["checks"] = checks_;
        doc["notes"] = notes_;
        doc["files"] = files_;
        doc["passed"] = all_passed_;
        write(name_ + ".json", doc.dump(2) + "\n");
        if (!opt_.quiet)
            log_ << name_ << ": " << (all_passed_ ? "all checks passed" : "check failure") << " -> "
                 << opt_.out_dir << '\n';
        return all_passed_ ? exit_ok : exit_check_failed;
    }

private:
    std::string name_;
    const ExperimentConfig& cfg_;
    const Options& opt_;
    std::ostream& log_;
    json checks_ = json::array();
    std::vector<std::string> notes_;
    std::vector<std::string> files_;
    bool all_passed_ = true;
};

inline std::pair<double, double> spectrum_hull(const RankOneFamily& family)
{
    const auto& s = family.support();
    double lo = s.front().position, hi = s.back().position;
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    return {lo, hi};
}

inline std::vector<UpperHalfPlanePoint> grid_for(const ExperimentConfig& cfg, const RankOneFamily& family)
{
    const auto [lo, hi] = cfg.grid.x ? *cfg.grid.x : spectrum_hull(family);
    return make_z_grid(lo, hi, cfg.grid.nx, cfg.grid.eps.first, cfg.grid.eps.second, cfg.grid.ne);
}

inline std::vector<double> lambdas_for(const ExperimentConfig& cfg)
{
    if (!cfg.lambdas.values.empty())
        return cfg.lambdas.values;
    std::mt19937_64 rng(cfg.seed + 2);
    std::uniform_real_distribution<double> u(cfg.lambdas.range.first, cfg.lambdas.range.second);
    std::vector<double> out(cfg.lambdas.count);
    for (auto& l : out)
        l = u(rng);
    return out;
}

inline std::string identity_csv(const IdentityReport& rep, bool moduli)
{
    std::string csv = "x,epsilon,lhs,rhs,deviation\n";
    for (const auto& p : rep.points)
        csv += csv_row({r(p.x), r(p.eps), r(moduli ? std::abs(p.lhs) : p.lhs.real()),
                        r(moduli ? std::abs(p.rhs) : p.rhs.real()), r(p.deviation)});
    return csv;
}

// Families with a known UaH pair (alpha, K).
inline std::optional<std::pair<double, double>> certified_uah(const NuSpec& nu)
{
    switch (nu.kind) {
    case NuKind::Lebesgue: return std::pair{1.0, 1.0};
    case NuKind::CauchyWeight: return std::pair{1.0, 1.0};
    case NuKind::Uniform: return std::pair{1.0, 1.0 / (nu.b - nu.a)};
    case NuKind::CantorApprox: {
        const double alpha = std::log(2.0) / std::log(3.0);
        return std::pair{alpha, uah_constant(make_cantor(nu.depth), alpha, triadic_scan(nu.depth)).constant};
    }
    case NuKind::Atomic: break;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

inline int run_transform(const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
{
    Run run("transform", cfg, opt, log);
    const auto family = build_family(cfg.op, cfg.seed);
    const auto eta = resolve_measure(cfg.measure, family, cfg.nu);
    const bool has_q = eta.has_finite_1_over_1_plus_y();
    std::string csv = "x,epsilon,Q,P\n";
    double min_p = std::numeric_limits<double>::infinity(), mismatch = 0.0;
    const auto grid = grid_for(cfg, family);
    for (const auto& z : grid) {
        const double p = poisson_transform(eta, z);
        double q = std::numeric_limits<double>::quiet_NaN();
        if (has_q) {
            const auto t = borel_transform(eta, z);
            q = t.Q;
            mismatch = std::max(mismatch, std::abs(t.P - p) / std::max(1.0, p));
        }
        min_p = std::min(min_p, p);
        csv += csv_row({r(z.x()), r(z.eps()), r(q), r(p)});
    }
    run.write("transform.csv", csv);
    if (!has_q)
        run.note("Q omitted: the measure has no Borel transform");
    run.check("min_poisson", min_p, 0.0, min_p >= 0.0);
    if (has_q)
        run.check("borel_vs_poisson", mismatch, cfg.tolerance, mismatch <= cfg.tolerance);
    return run.finish({{"measure", to_string(eta.tag().kind)}, {"points", grid.size()}});
}

inline int run_perturb(const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
{
    Run run("perturb", cfg, opt, log);
    const auto family = build_family(cfg.op, cfg.seed);
    const double norm = family.norm();
    const double eig_tol = 1e-10 * std::max(1.0, norm);
    const double mass_tol = 1e-12;
    double eig_dev = 0.0, weight_dev = 0.0, mass_dev = 0.0;
    bool sizes_match = true;
    std::string csv = "lambda,route,eigenvalue,weight\n";
    json per_lambda = json::array();
    for (double lambda : lambdas_for(cfg)) {
        const auto direct = family.perturbed_direct(lambda);
        const auto secular = lambda == 0.0 ? family.mu() : family.perturbed_secular(lambda);
        for (const auto& at : direct.atoms)
            csv += csv_row({r(lambda), "direct", r(at.position), r(at.weight)});
        for (const auto& at : secular.atoms)
            csv += csv_row({r(lambda), "secular", r(at.position), r(at.weight)});
        std::vector<Atom> visible;
        for (const auto& at : direct.atoms)
            if (at.weight > secular_weight_floor)
                visible.push_back(at);
        sizes_match = sizes_match && visible.size() == secular.atoms.size();
        if (visible.size() == secular.atoms.size())
            for (std::size_t i = 0; i < visible.size(); ++i) {
                eig_dev = std::max(eig_dev, std::abs(visible[i].position - secular.atoms[i].position));
                weight_dev = std::max(weight_dev, std::abs(visible[i].weight - secular.atoms[i].weight));
            }
        mass_dev = std::max({mass_dev, std::abs(direct.total_mass() - 1.0), std::abs(secular.total_mass() - 1.0)});
        per_lambda.push_back({{"lambda", lambda}, {"atoms", secular.atoms.size()}});
    }
    run.write("perturb.csv", csv);
    run.check("atom_counts_match", sizes_match ? 0.0 : 1.0, 0.0, sizes_match);
    run.check("eigenvalue_deviation", eig_dev, eig_tol, eig_dev <= eig_tol);
    run.check("weight_deviation", weight_dev, cfg.tolerance, weight_dev <= cfg.tolerance);
    run.check("mass_deviation", mass_dev, mass_tol, mass_dev <= mass_tol);
    return run.finish({{"norm", norm}, {"lambdas", per_lambda}});
}

inline int run_average(const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
{
    Run run("average", cfg, opt, log);
    const KappaProbe probe(build_family(cfg.op, cfg.seed), make_nu(cfg.nu), cfg.quad);
    json sets = json::array();
    for (const auto& parts : cfg.sets) {
        const auto v = kappa_set(probe, IntervalUnion(parts));
        json intervals = json::array();
        for (const auto& [lo, hi] : parts)
            intervals.push_back({lo, hi});
        sets.push_back({{"set", intervals},
                        {"value", v.value},
                        {"error_estimate", v.error_estimate},
                        {"panels_used", v.panels_used},
                        {"warnings", v.warnings}});
    }
    const auto grid = grid_for(cfg, probe.family());
    const auto rep = poisson_identity_check(probe, grid);
    run.write("average.csv", identity_csv(rep, false));
    run.check("poisson_identity_max_deviation", rep.max_deviation, cfg.tolerance,
              rep.max_deviation <= cfg.tolerance);
    return run.finish({{"nu", to_string(cfg.nu.kind)}, {"kappa", sets}});
}

inline int run_kotani(const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
{
    Run run("kotani", cfg, opt, log);
    const auto family = build_family(cfg.op, cfg.seed);
    if (cfg.nu.kind != NuKind::Lebesgue)
        run.note("kotani always averages against Lebesgue measure; the nu entry is ignored");
    std::string csv = "set,lhs,rhs,abs_err,error_estimate,panels_used\n";
    json results = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg.sets.size(); ++i) {
        const auto k = kotani_check(family, IntervalUnion(cfg.sets[i]), cfg.quad);
        worst = std::max(worst, k.abs_err);
        csv += csv_row({std::to_string(i), r(k.lhs), r(k.rhs), r(k.abs_err), r(k.error_estimate),
                        std::to_string(k.panels_used)});
        results.push_back({{"set", i},
                           {"value", k.rhs},
                           {"error_estimate", k.error_estimate},
                           {"panels_used", k.panels_used},
                           {"lebesgue_measure", k.lhs},
                           {"abs_err", k.abs_err}});
    }
    run.write("kotani.csv", csv);
    run.check("max_abs_err", worst, cfg.tolerance, worst <= cfg.tolerance);
    return run.finish(results);
}

inline int run_identity(const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
{
    Run run("identity", cfg, opt, log);
    const KappaProbe probe(build_family(cfg.op, cfg.seed), make_nu(cfg.nu), cfg.quad);
    const auto grid = grid_for(cfg, probe.family());
    const auto poisson = poisson_identity_check(probe, grid);
    run.write("identity_poisson.csv", identity_csv(poisson, false));
    run.check("poisson_max_deviation", poisson.max_deviation, cfg.tolerance,
              poisson.max_deviation <= cfg.tolerance);
    json results{{"nu", to_string(cfg.nu.kind)},
                 {"poisson", {{"max_deviation", poisson.max_deviation},
                              {"worst_x", poisson.worst_x},
                              {"worst_epsilon", poisson.worst_eps}}}};
    if (cfg.nu.kind == NuKind::Lebesgue) {
        double off = 0.0;
        for (const auto& p : poisson.points)
            off = std::max({off, std::abs(p.lhs.real() - std::numbers::pi), std::abs(p.rhs.real() - std::numbers::pi)});
        run.check("lebesgue_equals_pi", off, cfg.tolerance, off <= cfg.tolerance);
        run.note("Borel identity skipped: Lebesgue nu has no Borel transform");
    } else {
        const auto borel = borel_identity_check(probe, grid);
        run.write("identity_borel.csv", identity_csv(borel, true));
        run.check("borel_max_deviation", borel.max_deviation, cfg.tolerance, borel.max_deviation <= cfg.tolerance);
        results["borel"] = {{"max_deviation", borel.max_deviation},
                            {"worst_x", borel.worst_x},
                            {"worst_epsilon", borel.worst_eps}};
    }
    return run.finish(results);
}

inline int run_bound(const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
{
    Run run("bound", cfg, opt, log);
    const KappaProbe probe(build_family(cfg.op, cfg.seed), make_nu(cfg.nu), cfg.quad);
    const auto [hlo, hhi] = spectrum_hull(probe.family());
    std::string csv = "check,x,epsilon,alpha,lhs,rhs,holds\n";

    std::vector<std::pair<std::string, Measure>> measures{{"mu", probe.family().mu().to_measure()}};
    measures.emplace_back("nu", probe.nu());
    std::mt19937_64 rng(cfg.seed + 3);
    std::uniform_real_distribution<double> ux(hlo - 1.0, hhi + 1.0), le(-5.0, 0.5), ua(0.0, 1.0);
    for (const auto& [label, eta] : measures) {
        const bool probability = eta.is_finite() && std::abs(eta.total_mass() - 1.0) <= 1e-12;
        std::size_t growth_fail = 0, dyadic_fail = 0;
        for (int i = 0; i < 100; ++i) {
            const double x = ux(rng), e = std::pow(10.0, le(rng)), a = ua(rng);
            const auto g = growth_lower_bound_check(eta, x, e, a);
            const bool g_ok = g.lhs + cfg.tolerance >= g.rhs;
            growth_fail += g_ok ? 0 : 1;
            csv += csv_row({"growth_" + label, r(x), r(e), r(a), r(g.lhs), r(g.rhs), g_ok ? "1" : "0"});
            if (probability) {
                const auto d = dyadic_bound_check(eta, x, e);
                const bool d_ok = d.lhs <= d.rhs + cfg.tolerance;
                dyadic_fail += d_ok ? 0 : 1;
                csv += csv_row({"dyadic_" + label, r(x), r(e), "nan", r(d.lhs), r(d.rhs), d_ok ? "1" : "0"});
            }
        }
        run.check("growth_bound_violations_" + label, static_cast<double>(growth_fail), 0.0, growth_fail == 0);
        if (probability)
            run.check("dyadic_bound_violations_" + label, static_cast<double>(dyadic_fail), 0.0, dyadic_fail == 0);
        else
            run.note("dyadic bound skipped for " + label + ": not a probability measure");
    }

    json results = json::object();
    if (const auto uah = certified_uah(cfg.nu)) {
        const auto [alpha, k] = *uah;
        const auto grid = grid_for(cfg, probe.family());
        const auto v = validate_c_alpha(probe.nu(), alpha, k, grid);
        run.check("c_alpha_covers_observed_sup", v.observed_sup, v.c_used, v.used_bounds_sup);
        results["c_alpha_validation"] = {{"alpha", alpha},
                                         {"k", k},
                                         {"observed_sup", v.observed_sup},
                                         {"c_used", v.c_used},
                                         {"c_without_width_factor", v.c_without_width_factor},
                                         {"without_width_factor_covers", v.without_factor_bounds_sup}};
        const auto rep = uah_bound_check(probe, alpha, k, grid);
        for (const auto& p : rep.points)
            csv += csv_row({"uah_kappa", r(p.x), r(p.eps), r(alpha), r(p.lhs), r(p.rhs), p.violated ? "0" : "1"});
        run.check("uah_bound_violations", static_cast<double>(rep.violations.size()), 0.0, rep.violations.empty());
    } else {
        run.note("C_alpha bound skipped: nu has no certified uniform Hoelder constant");
    }
    run.write("bound.csv", csv);
    return run.finish(results);
}

inline int run_continuity(const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
{
    Run run("continuity", cfg, opt, log);
    const auto family = build_family(cfg.op, cfg.seed);
    const auto eta = resolve_measure(cfg.measure, family, cfg.nu);
    std::string csv = "x,route,alpha_hat,r2,rungs_used,rungs_dropped,classification\n";
    json points = json::array();
    std::size_t disagreements = 0;
    for (double x : cfg.points) {
        const auto g = scaling_exponent_growth(eta, x, cfg.alpha, cfg.ladder, cfg.continuity);
        const auto p = scaling_exponent_poisson(eta, x, cfg.alpha, cfg.ladder, cfg.continuity);
        json entry{{"x", x}};
        for (const auto* est : {&g, &p}) {
            const auto cls = classify(*est, cfg.continuity);
            csv += csv_row({r(x), to_string(est->route), r(est->exponent), r(est->r_squared),
                            std::to_string(est->rungs_used), std::to_string(est->rungs_dropped), to_string(cls)});
            entry[to_string(est->route)] = {{"exponent", real_json(est->exponent)},
                                            {"r2", est->r_squared},
                                            {"trend_factor", real_json(est->trend_factor)},
                                            {"classification", to_string(cls)}};
        }
        if (g.r_squared >= cfg.tolerance && p.r_squared >= cfg.tolerance &&
            classify(g, cfg.continuity) != classify(p, cfg.continuity))
            ++disagreements;
        try {
            const auto d = ac_density_estimate(eta, x, cfg.ladder);
            entry["ac_density"] = {{"value", real_json(d.density)}, {"divergent", d.divergent}};
        } catch (const insufficient_resolution& e) {
            entry["ac_density"] = {{"error", e.what()}};
        }
        points.push_back(std::move(entry));
    }
    run.write("continuity.csv", csv);
    run.check("route_disagreements", static_cast<double>(disagreements), 0.0, disagreements == 0);

    json results{{"measure", to_string(eta.tag().kind)}, {"alpha", cfg.alpha}, {"points", points}};
    if (cfg.split) {
        if (!eta.is_finite() || eta.analytic().kind != AnalyticKind::None) {
            run.note("split skipped: measure is not finite and piecewise");
        } else {
            const auto s = rogers_taylor_split(eta, cfg.split->alpha, cfg.split->k_target);
            run.write("continuity_split.csv", atoms_to_csv(s.eta2));
            run.check("split_succeeded", s.eta2_mass, s.total_mass * split_max_fraction, s.success);
            results["split"] = {{"alpha", cfg.split->alpha},
                                {"k_target", cfg.split->k_target},
                                {"success", s.success},
                                {"eta2_mass", s.eta2_mass},
                                {"total_mass", s.total_mass},
                                {"worst_ratio", s.worst_ratio},
                                {"iterations", s.iterations},
                                {"message", s.message}};
        }
    }
    return run.finish(results);
}

inline int run_report(const ExperimentConfig& cfg, const Options& opt, std::ostream& log)
{
    Run run("report", cfg, opt, log);
    const KappaProbe probe(build_family(cfg.op, cfg.seed), make_nu(cfg.nu), cfg.quad);
    ReportConfig rc = cfg.report;
    rc.alpha = cfg.alpha;
    rc.delta_targets = cfg.delta_targets;
    rc.ladder = cfg.ladder;
    rc.outside_tolerance = cfg.tolerance;
    rc.classify = cfg.continuity;
    const auto rep = main_theorem_report(probe, rc);

    std::string csv = "point,route,alpha_hat,r2,classification,delta_target,verdict\n";
    for (const auto& row : rep.rows)
        csv += csv_row({std::to_string(row.point), row.route, r(row.alpha_hat), r(row.r2), row.classification,
                        r(row.delta_target), row.verdict});
    run.write("report.csv", csv);

    json points = json::array();
    for (const auto& p : rep.points)
        points.push_back({{"point", p.index},
                          {"x", p.x},
                          {"region", to_string(p.region)},
                          {"growth_exponent", real_json(p.growth.exponent)},
                          {"poisson_exponent", real_json(p.poisson.exponent)},
                          {"growth_rungs", p.growth.rungs_used},
                          {"poisson_rungs", p.poisson.rungs_used},
                          {"beta_mu", real_json(p.beta_mu)}});
    if (rep.indeterminate > 0)
        run.note(std::to_string(rep.indeterminate) + " indeterminate rows (resolution warning, not a failure)");
    run.check("classified_violations", static_cast<double>(rep.violations), 0.0, rep.consistent());
    return run.finish({{"diagnostic", "finite-ladder consistency check; limsup statements are not decidable here"},
                       {"nu", rep.nu_family},
                       {"alpha", rep.alpha},
                       {"indeterminate", rep.indeterminate},
                       {"points", points}});
}

} // namespace detail

inline ExperimentConfig resolve_config(const std::string& sub, const Options& opt)
{
    const json defaults = default_config_json(sub);
    ExperimentConfig cfg;
    if (opt.config_path) {
        const auto doc = read_config_file(*opt.config_path);
        cfg = load_config(defaults, &doc);
    } else {
        cfg = load_config(defaults, nullptr);
    }
    if (opt.seed)
        cfg.seed = *opt.seed;
    if (opt.tol) {
        if (!(*opt.tol > 0.0) || !std::isfinite(*opt.tol))
            throw config_error("--tol: must be a positive finite number");
        cfg.tolerance = *opt.tol;
    }
    cfg.quad.validate();
    return cfg;
}

// Runs one subcommand. Returns 0 when every check passes, 2 when a check
// fails, 1 on configuration or numerical errors (reported on `err`).
inline int run(const std::string& sub, const Options& opt, std::ostream& log, std::ostream& err)
{
    try {
        const auto cfg = resolve_config(sub, opt);
        if (sub == "transform")
            return detail::run_transform(cfg, opt, log);
        if (sub == "perturb")
            return detail::run_perturb(cfg, opt, log);
        if (sub == "average")
            return detail::run_average(cfg, opt, log);
        if (sub == "kotani")
            return detail::run_kotani(cfg, opt, log);
        if (sub == "identity")
            return detail::run_identity(cfg, opt, log);
        if (sub == "bound")
            return detail::run_bound(cfg, opt, log);
        if (sub == "continuity")
            return detail::run_continuity(cfg, opt, log);
        if (sub == "report")
            return detail::run_report(cfg, opt, log);
        err << "error: unknown subcommand '" << sub << "'\n";
    } catch (const config_error& e) {
        err << "config error: " << e.what() << '\n';
    } catch (const numerical_error& e) {
        err << "numerical error: " << e.what() << '\n';
    } catch (const insufficient_resolution& e) {
        err << "insufficient resolution: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return exit_error;
}

} // namespace specavg::cli
