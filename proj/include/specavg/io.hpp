#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "specavg/averaging.hpp"
#include "specavg/continuity.hpp"
#include "specavg/errors.hpp"
#include "specavg/measure.hpp"
#include "specavg/numeric.hpp"
#include "specavg/operator.hpp"
#include "specavg/transform.hpp"

namespace specavg
{

using json = nlohmann::ordered_json;

class config_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Non-finite reals have no JSON number form; they travel as "inf"/"nan".
inline json real_json(double v)
{
    return std::isfinite(v) ? json(v) : json(format_real(v));
}

// ---------------------------------------------------------------------------
// Source positions for config diagnostics

// Maps the JSON pointer of every value in a document to the line it starts
// on. Tolerates malformed input by stopping early; syntax errors are reported
// by the real parser.
class JsonLineIndex
{
public:
    JsonLineIndex() = default;
    explicit JsonLineIndex(std::string_view text) : text_(text)
    {
        try {
            skip_ws();
            if (pos_ < text_.size())
                value("");
        } catch (const std::out_of_range&) {
        }
        text_ = {};
    }

    // Line of the pointer, or of its nearest recorded ancestor.
    std::optional<int> line_of(std::string pointer) const
    {
        for (;;) {
            if (auto it = lines_.find(pointer); it != lines_.end())
                return it->second;
            if (pointer.empty())
                return std::nullopt;
            pointer.erase(pointer.rfind('/'));
        }
    }

private:
    char peek() const { return text_.at(pos_); }

    void advance()
    {
        if (text_.at(pos_) == '\n')
            ++line_;
        ++pos_;
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                       text_[pos_] == '\n' || text_[pos_] == '\r'))
            advance();
    }

    std::string string_token()
    {
        std::string out;
        advance(); // opening quote
        while (peek() != '"') {
            if (peek() == '\\') {
                advance();
                out.push_back(peek());
            } else {
                out.push_back(peek());
            }
            advance();
        }
        advance();
        return out;
    }

    static std::string escape(const std::string& key)
    {
        std::string out;
        for (char c : key) {
            if (c == '~')
                out += "~0";
            else if (c == '/')
                out += "~1";
            else
                out.push_back(c);
        }
        return out;
    }

    void value(const std::string& path)
    {
        lines_[path] = line_;
        const char c = peek();
        if (c == '{') {
            advance();
            skip_ws();
            while (peek() != '}') {
                const std::string key = string_token();
                skip_ws();
                advance(); // ':'
                skip_ws();
                value(path + "/" + escape(key));
                skip_ws();
                if (peek() == ',') {
                    advance();
                    skip_ws();
                }
            }
            advance();
        } else if (c == '[') {
            advance();
            skip_ws();
            for (std::size_t i = 0; peek() != ']'; ++i) {
                value(path + "/" + std::to_string(i));
                skip_ws();
                if (peek() == ',') {
                    advance();
                    skip_ws();
                }
            }
            advance();
        } else if (c == '"') {
            string_token();
        } else {
            while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(peek()) == std::string_view::npos)
                advance();
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::map<std::string, int> lines_;
};

struct ConfigDocument
{
    json value;
    JsonLineIndex lines;
    std::string origin;
};

inline ConfigDocument parse_config_text(std::string_view text, std::string origin)
{
    ConfigDocument doc;
    doc.origin = std::move(origin);
    try {
        doc.value = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        int line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw config_error(doc.origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                           ": invalid JSON: " + e.what());
    }
    doc.lines = JsonLineIndex(text);
    return doc;
}

inline ConfigDocument read_config_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw config_error(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

// Typed access to a JSON tree with errors that name the offending key and,
// when the key came from a file, its line.
class ConfigReader
{
public:
    ConfigReader(const JsonLineIndex* lines, std::string origin)
        : lines_(lines), origin_(std::move(origin))
    {
    }

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const
    {
        std::string where = origin_;
        if (lines_)
            if (auto line = lines_->line_of(ptr))
                where += ":" + std::to_string(*line);
        throw config_error(where + ": " + (ptr.empty() ? "/" : ptr) + ": " + msg);
    }

    void only_keys(const json& obj, const std::string& ptr, std::initializer_list<std::string_view> allowed) const
    {
        if (!obj.is_object())
            fail(ptr, "expected an object");
        for (const auto& [key, _] : obj.items()) {
            bool known = false;
            for (auto a : allowed)
                known = known || key == a;
            if (!known)
                fail(ptr + "/" + key, "unknown key");
        }
    }

    double real(const json& j, const std::string& ptr) const
    {
        if (!j.is_number())
            fail(ptr, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v))
            fail(ptr, "expected a finite number");
        return v;
    }

    double positive(const json& j, const std::string& ptr) const
    {
        const double v = real(j, ptr);
        if (!(v > 0.0))
            fail(ptr, "expected a positive number");
        return v;
    }

    std::uint64_t u64(const json& j, const std::string& ptr) const
    {
        if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0))
            fail(ptr, "expected a nonnegative integer");
        return j.get<std::uint64_t>();
    }

    std::size_t count(const json& j, const std::string& ptr, std::size_t min = 1) const
    {
        const auto v = u64(j, ptr);
        if (v < min)
            fail(ptr, "expected an integer >= " + std::to_string(min));
        return static_cast<std::size_t>(v);
    }

    bool boolean(const json& j, const std::string& ptr) const
    {
        if (!j.is_boolean())
            fail(ptr, "expected true or false");
        return j.get<bool>();
    }

    std::string string(const json& j, const std::string& ptr) const
    {
        if (!j.is_string())
            fail(ptr, "expected a string");
        return j.get<std::string>();
    }

    std::vector<double> reals(const json& j, const std::string& ptr) const
    {
        if (!j.is_array())
            fail(ptr, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(real(j[i], ptr + "/" + std::to_string(i)));
        return out;
    }

    std::pair<double, double> pair(const json& j, const std::string& ptr) const
    {
        auto v = reals(j, ptr);
        if (v.size() != 2)
            fail(ptr, "expected a pair [lo, hi]");
        return {v[0], v[1]};
    }

private:
    const JsonLineIndex* lines_;
    std::string origin_;
};

// ---------------------------------------------------------------------------
// Measures

inline FamilyKind family_kind_from_string(const std::string& s)
{
    for (auto k : {FamilyKind::Generic, FamilyKind::Lebesgue, FamilyKind::CauchyWeight, FamilyKind::Uniform,
                   FamilyKind::CantorApprox})
        if (to_string(k) == s)
            return k;
    throw argument_error("unknown measure tag '" + s + "'");
}

inline json measure_to_json(const Measure& eta)
{
    json atoms = json::array(), pieces = json::array();
    for (const auto& at : eta.atoms())
        atoms.push_back({at.position, at.weight});
    for (const auto& p : eta.pieces()) {
        if (!p.is_uniform())
            throw argument_error("measure_to_json: pieces with a density shape cannot be serialized");
        pieces.push_back({p.a, p.b, p.mass});
    }
    json out;
    out["atoms"] = std::move(atoms);
    out["pieces"] = std::move(pieces);
    out["tag"] = to_string(eta.tag().kind);
    if (eta.tag().kind == FamilyKind::Uniform) {
        out["a"] = eta.tag().a;
        out["b"] = eta.tag().b;
    }
    if (eta.tag().kind == FamilyKind::CantorApprox)
        out["depth"] = eta.tag().depth;
    if (eta.analytic().kind != AnalyticKind::None)
        out["analytic"] = {{"kind", eta.analytic().kind == AnalyticKind::Lebesgue ? "lebesgue" : "cauchy"},
                           {"coefficient", eta.analytic().coefficient}};
    if (eta.resolution_floor() > 0.0)
        out["resolution_floor"] = eta.resolution_floor();
    return out;
}

inline Measure measure_from_json(const json& j, const ConfigReader& r, const std::string& ptr = "")
{
    r.only_keys(j, ptr, {"atoms", "pieces", "tag", "a", "b", "depth", "analytic", "resolution_floor"});
    std::vector<Atom> atoms;
    std::vector<DensityPiece> pieces;
    if (j.contains("atoms")) {
        const auto& a = j["atoms"];
        if (!a.is_array())
            r.fail(ptr + "/atoms", "expected an array of [position, weight]");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto p = r.pair(a[i], ptr + "/atoms/" + std::to_string(i));
            if (!(p.second >= 0.0))
                r.fail(ptr + "/atoms/" + std::to_string(i), "weight must be nonnegative");
            atoms.push_back({p.first, p.second});
        }
    }
    if (j.contains("pieces")) {
        const auto& a = j["pieces"];
        if (!a.is_array())
            r.fail(ptr + "/pieces", "expected an array of [a, b, mass]");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto p = r.reals(a[i], ptr + "/pieces/" + std::to_string(i));
            if (p.size() != 3 || !(p[0] < p[1]) || !(p[2] >= 0.0))
                r.fail(ptr + "/pieces/" + std::to_string(i), "expected [a, b, mass] with a < b, mass >= 0");
            pieces.push_back({p[0], p[1], p[2], nullptr});
        }
    }
    FamilyTag tag;
    if (j.contains("tag")) {
        try {
            tag.kind = family_kind_from_string(r.string(j["tag"], ptr + "/tag"));
        } catch (const argument_error& e) {
            r.fail(ptr + "/tag", e.what());
        }
    }
    if (j.contains("a"))
        tag.a = r.real(j["a"], ptr + "/a");
    if (j.contains("b"))
        tag.b = r.real(j["b"], ptr + "/b");
    if (j.contains("depth"))
        tag.depth = static_cast<int>(r.count(j["depth"], ptr + "/depth", 0));
    AnalyticPart analytic;
    if (j.contains("analytic")) {
        const auto& a = j["analytic"];
        r.only_keys(a, ptr + "/analytic", {"kind", "coefficient"});
        const auto kind = a.contains("kind") ? r.string(a["kind"], ptr + "/analytic/kind") : "";
        if (kind == "lebesgue")
            analytic.kind = AnalyticKind::Lebesgue;
        else if (kind == "cauchy")
            analytic.kind = AnalyticKind::CauchyWeight;
        else
            r.fail(ptr + "/analytic/kind", "expected \"lebesgue\" or \"cauchy\"");
        analytic.coefficient =
            a.contains("coefficient") ? r.real(a["coefficient"], ptr + "/analytic/coefficient") : 1.0;
    }
    const double floor = j.contains("resolution_floor") ? r.real(j["resolution_floor"], ptr + "/resolution_floor") : 0.0;
    try {
        return Measure(std::move(atoms), std::move(pieces), analytic, tag, floor);
    } catch (const argument_error& e) {
        r.fail(ptr, e.what());
    }
}

inline std::string atoms_to_csv(const Measure& eta)
{
    std::string out = "position,weight\n";
    for (const auto& at : eta.atoms())
        out += format_real(at.position) + "," + format_real(at.weight) + "\n";
    return out;
}

inline Measure atoms_from_csv(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "position,weight")
        throw config_error("atom CSV: line 1: expected header 'position,weight'");
    std::vector<Atom> atoms;
    for (int n = 2; std::getline(in, line); ++n) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        char* end = nullptr;
        const double p = std::strtod(line.c_str(), &end);
        const bool p_ok = comma != std::string::npos && end == line.c_str() + comma;
        const double w = p_ok ? std::strtod(line.c_str() + comma + 1, &end) : 0.0;
        if (!p_ok || *end != '\0' || !std::isfinite(p) || !(w >= 0.0) || !std::isfinite(w))
            throw config_error("atom CSV: line " + std::to_string(n) + ": expected 'position,weight'");
        atoms.push_back({p, w});
    }
    return make_atomic(std::move(atoms));
}

// ---------------------------------------------------------------------------
// nu and operator specs

inline json nu_to_json(const NuSpec& s)
{
    json out;
    out["kind"] = to_string(s.kind);
    switch (s.kind) {
    case NuKind::Uniform:
        out["a"] = s.a;
        out["b"] = s.b;
        break;
    case NuKind::CantorApprox: out["depth"] = s.depth; break;
    case NuKind::Atomic: {
        json atoms = json::array();
        for (const auto& at : s.atoms)
            atoms.push_back({at.position, at.weight});
        out["atoms"] = std::move(atoms);
        break;
    }
    case NuKind::Lebesgue:
    case NuKind::CauchyWeight: break;
    }
    return out;
}

inline NuSpec nu_from_json(const json& j, const ConfigReader& r, const std::string& ptr)
{
    r.only_keys(j, ptr, {"kind", "a", "b", "depth", "atoms"});
    if (!j.contains("kind"))
        r.fail(ptr, "missing key 'kind'");
    NuSpec s;
    try {
        s.kind = nu_kind_from_string(r.string(j["kind"], ptr + "/kind"));
    } catch (const argument_error& e) {
        r.fail(ptr + "/kind", e.what());
    }
    if (j.contains("a"))
        s.a = r.real(j["a"], ptr + "/a");
    if (j.contains("b"))
        s.b = r.real(j["b"], ptr + "/b");
    if (j.contains("depth"))
        s.depth = static_cast<int>(r.count(j["depth"], ptr + "/depth", 0));
    if (j.contains("atoms")) {
        const auto& a = j["atoms"];
        if (!a.is_array())
            r.fail(ptr + "/atoms", "expected an array of [position, weight]");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto p = r.pair(a[i], ptr + "/atoms/" + std::to_string(i));
            s.atoms.push_back({p.first, p.second});
        }
    }
    try {
        make_nu(s);
    } catch (const argument_error& e) {
        r.fail(ptr, e.what());
    }
    return s;
}

struct PhiSpec
{
    enum class Kind
    {
        Random,
        Basis,
        Explicit
    };
    Kind kind = Kind::Random;
    std::size_t index = 0;
    std::vector<double> values;
};

struct OperatorSpec
{
    enum class Kind
    {
        DenseGaussian,
        Jacobi,
        Explicit
    };
    Kind kind = Kind::DenseGaussian;
    std::size_t n = 8;
    std::optional<std::uint64_t> seed; // falls back to the experiment seed
    std::vector<double> entries;
    double diag_lo = 0.0, diag_hi = 1.0;
    double off_diagonal = 1.0;
    PhiSpec phi;
};

inline std::string diagonal_distribution_string(const OperatorSpec& s)
{
    return "uniform[" + format_real(s.diag_lo) + "," + format_real(s.diag_hi) + "]";
}

inline json operator_to_json(const OperatorSpec& s)
{
    json out;
    switch (s.kind) {
    case OperatorSpec::Kind::DenseGaussian: out["kind"] = "dense-gaussian"; break;
    case OperatorSpec::Kind::Jacobi: out["kind"] = "jacobi"; break;
    case OperatorSpec::Kind::Explicit: out["kind"] = "explicit"; break;
    }
    out["n"] = s.n;
    if (s.kind == OperatorSpec::Kind::Explicit)
        out["entries"] = s.entries;
    if (s.seed)
        out["seed"] = *s.seed;
    if (s.kind == OperatorSpec::Kind::Jacobi) {
        out["diagonal_distribution"] = diagonal_distribution_string(s);
        out["off_diagonal"] = s.off_diagonal;
    }
    switch (s.phi.kind) {
    case PhiSpec::Kind::Random: out["phi"] = "random"; break;
    case PhiSpec::Kind::Basis: out["phi"] = {{"basis", s.phi.index}}; break;
    case PhiSpec::Kind::Explicit: out["phi"] = s.phi.values; break;
    }
    return out;
}

inline OperatorSpec operator_from_json(const json& j, const ConfigReader& r, const std::string& ptr)
{
    r.only_keys(j, ptr, {"kind", "n", "seed", "entries", "diagonal_distribution", "off_diagonal", "phi"});
    OperatorSpec s;
    if (j.contains("kind")) {
        const auto k = r.string(j["kind"], ptr + "/kind");
        if (k == "dense-gaussian")
            s.kind = OperatorSpec::Kind::DenseGaussian;
        else if (k == "jacobi")
            s.kind = OperatorSpec::Kind::Jacobi;
        else if (k == "explicit")
            s.kind = OperatorSpec::Kind::Explicit;
        else
            r.fail(ptr + "/kind", "expected \"jacobi\", \"dense-gaussian\" or \"explicit\"");
        if (s.kind == OperatorSpec::Kind::Explicit && !j.contains("entries"))
            r.fail(ptr, "explicit operator needs 'entries'");
        if (s.kind != OperatorSpec::Kind::Explicit && j.contains("entries"))
            r.fail(ptr + "/entries", "explicit entries conflict with a generator kind");
    } else if (j.contains("entries")) {
        s.kind = OperatorSpec::Kind::Explicit;
    } else {
        r.fail(ptr, "need either 'kind' or 'entries'");
    }
    if (!j.contains("n"))
        r.fail(ptr, "missing key 'n'");
    s.n = r.count(j["n"], ptr + "/n");
    if (j.contains("seed"))
        s.seed = r.u64(j["seed"], ptr + "/seed");
    if (s.kind == OperatorSpec::Kind::Explicit) {
        s.entries = r.reals(j["entries"], ptr + "/entries");
        if (s.entries.size() != s.n * s.n)
            r.fail(ptr + "/entries", "expected n*n = " + std::to_string(s.n * s.n) + " row-major entries");
        for (std::size_t i = 0; i < s.n; ++i)
            for (std::size_t k = i + 1; k < s.n; ++k)
                if (std::abs(s.entries[i * s.n + k] - s.entries[k * s.n + i]) > symmetry_tol)
                    r.fail(ptr + "/entries/" + std::to_string(i * s.n + k), "matrix is not symmetric");
    }
    if (j.contains("diagonal_distribution")) {
        if (s.kind != OperatorSpec::Kind::Jacobi)
            r.fail(ptr + "/diagonal_distribution", "only meaningful for kind \"jacobi\"");
        const auto d = r.string(j["diagonal_distribution"], ptr + "/diagonal_distribution");
        double lo = 0.0, hi = 0.0;
        char tail = 0;
        if (std::sscanf(d.c_str(), "uniform[%lf,%lf%c", &lo, &hi, &tail) != 3 || tail != ']' || !(lo < hi))
            r.fail(ptr + "/diagonal_distribution", "expected \"uniform[lo,hi]\" with lo < hi");
        s.diag_lo = lo;
        s.diag_hi = hi;
    }
    if (j.contains("off_diagonal")) {
        if (s.kind != OperatorSpec::Kind::Jacobi)
            r.fail(ptr + "/off_diagonal", "only meaningful for kind \"jacobi\"");
        s.off_diagonal = r.real(j["off_diagonal"], ptr + "/off_diagonal");
    }
    if (j.contains("phi")) {
        const auto& p = j["phi"];
        const std::string pp = ptr + "/phi";
        if (p.is_string()) {
            if (p.get<std::string>() != "random")
                r.fail(pp, "expected \"random\", {\"basis\": i}, or an explicit unit vector");
            s.phi.kind = PhiSpec::Kind::Random;
        } else if (p.is_object()) {
            r.only_keys(p, pp, {"basis"});
            if (!p.contains("basis"))
                r.fail(pp, "missing key 'basis'");
            s.phi.kind = PhiSpec::Kind::Basis;
            s.phi.index = r.count(p["basis"], pp + "/basis", 0);
            if (s.phi.index >= s.n)
                r.fail(pp + "/basis", "basis index out of range");
        } else {
            s.phi.kind = PhiSpec::Kind::Explicit;
            s.phi.values = r.reals(p, pp);
            if (s.phi.values.size() != s.n)
                r.fail(pp, "expected " + std::to_string(s.n) + " components");
            CompensatedSum norm;
            for (double v : s.phi.values)
                norm += v * v;
            if (std::abs(std::sqrt(norm.value()) - 1.0) > 1e-14)
                r.fail(pp, "phi must have unit norm");
        }
    }
    return s;
}

inline std::uint64_t effective_seed(const OperatorSpec& s, std::uint64_t experiment_seed)
{
    return s.seed.value_or(experiment_seed);
}

inline RankOneFamily build_family(const OperatorSpec& s, std::uint64_t experiment_seed)
{
    const auto seed = effective_seed(s, experiment_seed);
    auto op = [&] {
        switch (s.kind) {
        case OperatorSpec::Kind::DenseGaussian: return make_dense_gaussian(s.n, seed);
        case OperatorSpec::Kind::Jacobi: return make_jacobi(s.n, seed, s.diag_lo, s.diag_hi, s.off_diagonal);
        case OperatorSpec::Kind::Explicit: break;
        }
        return SelfAdjointOperator(Matrix(s.n, s.entries));
    }();
    switch (s.phi.kind) {
    case PhiSpec::Kind::Random: return RankOneFamily(std::move(op), random_unit_vector(s.n, seed + 1));
    case PhiSpec::Kind::Basis: return RankOneFamily(std::move(op), basis_vector(s.n, s.phi.index));
    case PhiSpec::Kind::Explicit: break;
    }
    return RankOneFamily(std::move(op), CyclicVector(s.phi.values));
}

// ---------------------------------------------------------------------------
// Experiment config

struct GridSpec
{
    std::optional<std::pair<double, double>> x; // empty: spectrum hull of mu
    std::size_t nx = 10;
    std::pair<double, double> eps{1e-3, 1.0};
    std::size_t ne = 10;
};

struct LambdaSpec
{
    std::vector<double> values;   // used when nonempty
    std::size_t count = 25;       // otherwise seeded uniform draws
    std::pair<double, double> range{-5.0, 5.0};
};

struct SplitSpec
{
    double alpha = 1.0;
    double k_target = 1.0;
};

// Which measure `transform`, `continuity` and `bound` act on.
struct MeasureChoice
{
    enum class Kind
    {
        Mu,
        Nu,
        Family,
        Serialized
    };
    Kind kind = Kind::Mu;
    NuSpec family;
    Measure serialized;
};

struct ExperimentConfig
{
    std::uint64_t seed = 42;
    OperatorSpec op;
    NuSpec nu;
    MeasureChoice measure;
    QuadratureConfig quad;
    EpsLadder ladder;
    std::vector<std::vector<std::pair<double, double>>> sets{{{-0.5, 0.7}}};
    GridSpec grid;
    LambdaSpec lambdas;
    std::vector<double> points{0.0};
    double alpha = 1.0;
    std::vector<double> delta_targets{0.4, 0.5};
    double tolerance = 1e-6;
    ContinuityConfig continuity;
    std::optional<SplitSpec> split;
    ReportConfig report; // alpha, delta_targets, ladder and tolerance come from the fields above
};

inline json config_to_json(const ExperimentConfig& c)
{
    json out;
    out["seed"] = c.seed;
    out["operator"] = operator_to_json(c.op);
    out["nu"] = nu_to_json(c.nu);
    switch (c.measure.kind) {
    case MeasureChoice::Kind::Mu: out["measure"] = "mu"; break;
    case MeasureChoice::Kind::Nu: out["measure"] = "nu"; break;
    case MeasureChoice::Kind::Family: out["measure"] = nu_to_json(c.measure.family); break;
    case MeasureChoice::Kind::Serialized: out["measure"] = measure_to_json(c.measure.serialized); break;
    }
    out["quadrature"] = {{"abs_tol", c.quad.abs_tol},
                         {"max_panels", c.quad.max_panels},
                         {"breakpoints", c.quad.breakpoints}};
    out["ladder"] = {{"eps_max", c.ladder.eps_max}, {"ratio", c.ladder.ratio}, {"rungs", c.ladder.rungs}};
    json sets = json::array();
    for (const auto& s : c.sets) {
        json parts = json::array();
        for (const auto& [lo, hi] : s)
            parts.push_back({lo, hi});
        sets.push_back(std::move(parts));
    }
    out["sets"] = std::move(sets);
    json grid;
    if (c.grid.x)
        grid["x"] = {c.grid.x->first, c.grid.x->second};
    else
        grid["x"] = "hull";
    grid["nx"] = c.grid.nx;
    grid["epsilon"] = {c.grid.eps.first, c.grid.eps.second};
    grid["ne"] = c.grid.ne;
    out["grid"] = std::move(grid);
    if (!c.lambdas.values.empty())
        out["lambdas"] = c.lambdas.values;
    else
        out["lambdas"] = {{"count", c.lambdas.count}, {"range", {c.lambdas.range.first, c.lambdas.range.second}}};
    out["points"] = c.points;
    out["alpha"] = c.alpha;
    out["delta_targets"] = c.delta_targets;
    out["tolerance"] = c.tolerance;
    out["continuity"] = {{"trend_rungs", c.continuity.trend_rungs},
                         {"divergence_factor", c.continuity.divergence_factor},
                         {"indeterminate_r2", c.continuity.indeterminate_r2},
                         {"noise_floor", c.continuity.noise_floor}};
    if (c.split)
        out["split"] = {{"alpha", c.split->alpha}, {"k_target", c.split->k_target}};
    out["report"] = {{"outside_offsets", c.report.outside_offsets},
                     {"gap_couplings", c.report.gap_couplings},
                     {"local_ladders", c.report.local_ladders}};
    return out;
}

inline ExperimentConfig config_from_json(const json& j, const ConfigReader& r)
{
    r.only_keys(j, "", {"seed", "operator", "nu", "measure", "quadrature", "ladder", "sets", "grid", "lambdas",
                        "points", "alpha", "delta_targets", "tolerance", "continuity", "split", "report"});
    ExperimentConfig c;
    if (!j.contains("seed"))
        r.fail("", "missing key 'seed'");
    c.seed = r.u64(j["seed"], "/seed");
    if (j.contains("operator"))
        c.op = operator_from_json(j["operator"], r, "/operator");
    if (j.contains("nu"))
        c.nu = nu_from_json(j["nu"], r, "/nu");
    if (j.contains("measure")) {
        const auto& m = j["measure"];
        if (m.is_string()) {
            const auto s = m.get<std::string>();
            if (s == "mu")
                c.measure.kind = MeasureChoice::Kind::Mu;
            else if (s == "nu")
                c.measure.kind = MeasureChoice::Kind::Nu;
            else
                r.fail("/measure", "expected \"mu\", \"nu\", a family object, or a serialized measure");
        } else if (m.is_object() && m.contains("kind")) {
            c.measure.kind = MeasureChoice::Kind::Family;
            c.measure.family = nu_from_json(m, r, "/measure");
        } else {
            c.measure.kind = MeasureChoice::Kind::Serialized;
            c.measure.serialized = measure_from_json(m, r, "/measure");
        }
    }
    if (j.contains("quadrature")) {
        const auto& q = j["quadrature"];
        r.only_keys(q, "/quadrature", {"abs_tol", "max_panels", "breakpoints"});
        if (q.contains("abs_tol"))
            c.quad.abs_tol = r.positive(q["abs_tol"], "/quadrature/abs_tol");
        if (q.contains("max_panels"))
            c.quad.max_panels = r.count(q["max_panels"], "/quadrature/max_panels");
        if (q.contains("breakpoints"))
            c.quad.breakpoints = r.reals(q["breakpoints"], "/quadrature/breakpoints");
    }
    if (j.contains("ladder")) {
        const auto& l = j["ladder"];
        r.only_keys(l, "/ladder", {"eps_max", "ratio", "rungs"});
        if (l.contains("eps_max"))
            c.ladder.eps_max = r.positive(l["eps_max"], "/ladder/eps_max");
        if (l.contains("ratio")) {
            c.ladder.ratio = r.real(l["ratio"], "/ladder/ratio");
            if (!(c.ladder.ratio > 0.0 && c.ladder.ratio < 1.0))
                r.fail("/ladder/ratio", "ratio must lie in (0,1)");
        }
        if (l.contains("rungs"))
            c.ladder.rungs = static_cast<int>(r.count(l["rungs"], "/ladder/rungs", 3));
    }
    if (j.contains("sets")) {
        const auto& s = j["sets"];
        if (!s.is_array() || s.empty())
            r.fail("/sets", "expected a nonempty array of interval lists");
        c.sets.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string p = "/sets/" + std::to_string(i);
            if (!s[i].is_array() || s[i].empty())
                r.fail(p, "expected a nonempty array of [lo, hi]");
            std::vector<std::pair<double, double>> parts;
            for (std::size_t k = 0; k < s[i].size(); ++k) {
                const auto iv = r.pair(s[i][k], p + "/" + std::to_string(k));
                if (!(iv.first < iv.second))
                    r.fail(p + "/" + std::to_string(k), "need lo < hi");
                parts.push_back(iv);
            }
            c.sets.push_back(std::move(parts));
        }
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        r.only_keys(g, "/grid", {"x", "nx", "epsilon", "ne"});
        if (g.contains("x")) {
            if (g["x"].is_string()) {
                if (g["x"].get<std::string>() != "hull")
                    r.fail("/grid/x", "expected \"hull\" or [lo, hi]");
                c.grid.x.reset();
            } else {
                c.grid.x = r.pair(g["x"], "/grid/x");
                if (!(c.grid.x->first <= c.grid.x->second))
                    r.fail("/grid/x", "need lo <= hi");
            }
        }
        if (g.contains("nx"))
            c.grid.nx = r.count(g["nx"], "/grid/nx");
        if (g.contains("epsilon")) {
            c.grid.eps = r.pair(g["epsilon"], "/grid/epsilon");
            if (!(c.grid.eps.first > 0.0 && c.grid.eps.first <= c.grid.eps.second))
                r.fail("/grid/epsilon", "need 0 < lo <= hi");
        }
        if (g.contains("ne"))
            c.grid.ne = r.count(g["ne"], "/grid/ne");
    }
    if (j.contains("lambdas")) {
        const auto& l = j["lambdas"];
        if (l.is_array()) {
            c.lambdas.values = r.reals(l, "/lambdas");
            if (c.lambdas.values.empty())
                r.fail("/lambdas", "expected at least one coupling");
        } else {
            r.only_keys(l, "/lambdas", {"count", "range"});
            if (l.contains("count"))
                c.lambdas.count = r.count(l["count"], "/lambdas/count");
            if (l.contains("range")) {
                c.lambdas.range = r.pair(l["range"], "/lambdas/range");
                if (!(c.lambdas.range.first < c.lambdas.range.second))
                    r.fail("/lambdas/range", "need lo < hi");
            }
        }
    }
    if (j.contains("points")) {
        c.points = r.reals(j["points"], "/points");
        if (c.points.empty())
            r.fail("/points", "expected at least one point");
    }
    if (j.contains("alpha")) {
        c.alpha = r.real(j["alpha"], "/alpha");
        if (!(c.alpha > 0.0 && c.alpha <= 1.0))
            r.fail("/alpha", "alpha must lie in (0,1]");
    }
    if (j.contains("delta_targets")) {
        c.delta_targets = r.reals(j["delta_targets"], "/delta_targets");
        for (std::size_t i = 0; i < c.delta_targets.size(); ++i)
            if (!(c.delta_targets[i] > 0.0 && c.delta_targets[i] <= 1.0))
                r.fail("/delta_targets/" + std::to_string(i), "delta must lie in (0,1]");
    }
    if (j.contains("tolerance"))
        c.tolerance = r.positive(j["tolerance"], "/tolerance");
    if (j.contains("continuity")) {
        const auto& k = j["continuity"];
        r.only_keys(k, "/continuity", {"trend_rungs", "divergence_factor", "indeterminate_r2", "noise_floor"});
        if (k.contains("trend_rungs"))
            c.continuity.trend_rungs = r.count(k["trend_rungs"], "/continuity/trend_rungs", 0);
        if (k.contains("divergence_factor"))
            c.continuity.divergence_factor = r.real(k["divergence_factor"], "/continuity/divergence_factor");
        if (k.contains("indeterminate_r2"))
            c.continuity.indeterminate_r2 = r.real(k["indeterminate_r2"], "/continuity/indeterminate_r2");
        if (k.contains("noise_floor"))
            c.continuity.noise_floor = r.real(k["noise_floor"], "/continuity/noise_floor");
        try {
            c.continuity.validate();
        } catch (const argument_error& e) {
            r.fail("/continuity", e.what());
        }
    }
    if (j.contains("split")) {
        const auto& s = j["split"];
        r.only_keys(s, "/split", {"alpha", "k_target"});
        SplitSpec sp;
        if (s.contains("alpha"))
            sp.alpha = r.positive(s["alpha"], "/split/alpha");
        if (s.contains("k_target"))
            sp.k_target = r.positive(s["k_target"], "/split/k_target");
        c.split = sp;
    }
    if (j.contains("report")) {
        const auto& p = j["report"];
        r.only_keys(p, "/report", {"outside_offsets", "gap_couplings", "local_ladders"});
        if (p.contains("outside_offsets"))
            c.report.outside_offsets = r.reals(p["outside_offsets"], "/report/outside_offsets");
        if (p.contains("gap_couplings"))
            c.report.gap_couplings = r.reals(p["gap_couplings"], "/report/gap_couplings");
        if (p.contains("local_ladders"))
            c.report.local_ladders = r.boolean(p["local_ladders"], "/report/local_ladders");
    }
    return c;
}

// Defaults as JSON with each top-level key of the user's file replacing the
// default wholesale, then validated as a whole.
inline ExperimentConfig load_config(const json& defaults, const ConfigDocument* user)
{
    json merged = defaults;
    if (user) {
        if (!user->value.is_object())
            ConfigReader(&user->lines, user->origin).fail("", "config must be a JSON object");
        for (const auto& [key, value] : user->value.items())
            merged[key] = value;
    }
    ConfigReader reader(user ? &user->lines : nullptr, user ? user->origin : std::string("built-in defaults"));
    return config_from_json(merged, reader);
}

inline Measure resolve_measure(const MeasureChoice& m, const RankOneFamily& family, const NuSpec& nu)
{
    switch (m.kind) {
    case MeasureChoice::Kind::Mu: return family.mu().to_measure();
    case MeasureChoice::Kind::Nu: return make_nu(nu);
    case MeasureChoice::Kind::Family: return make_nu(m.family);
    case MeasureChoice::Kind::Serialized: break;
    }
    return m.serialized;
}

} // namespace specavg
