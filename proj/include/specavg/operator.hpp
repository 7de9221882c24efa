#pragma once

// Finite real symmetric operators, spectral measures with respect to a unit
// vector, and the rank-one family A_lambda = A + lambda <phi, .> phi.
//
// Two independent routes give the spectral measure of A_lambda:
//   direct   - diagonalize A_lambda and take squared overlaps with phi;
//   secular  - roots of F_mu(x) = -1/lambda, one per gap of the positive-weight
//              atoms of mu plus one exterior root, weights 1/(lambda^2 F_mu').

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specavg/errors.hpp"
#include "specavg/measure.hpp"
#include "specavg/numeric.hpp"

namespace specavg
{

// Dense row-major square matrix.
class Matrix
{
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
    Matrix(std::size_t n, std::vector<double> row_major) : n_(n), data_(std::move(row_major))
    {
        if (data_.size() != n * n)
            throw argument_error("Matrix: entry count does not match n*n");
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    std::span<const double> data() const noexcept { return data_; }

    double max_abs() const noexcept
    {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

    std::vector<double> apply(std::span<const double> v) const
    {
        std::vector<double> out(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            CompensatedSum s;
            for (std::size_t j = 0; j < n_; ++j)
                s += (*this)(i, j) * v[j];
            out[i] = s.value();
        }
        return out;
    }

    double trace() const noexcept
    {
        double t = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            t += (*this)(i, i);
        return t;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

inline constexpr double symmetry_tol = 1e-14;

class SelfAdjointOperator
{
public:
    explicit SelfAdjointOperator(Matrix m) : m_(std::move(m))
    {
        if (m_.size() < 1)
            throw argument_error("SelfAdjointOperator: dimension must be at least 1");
        const double scale = m_.max_abs();
        for (std::size_t i = 0; i < m_.size(); ++i)
            for (std::size_t j = i + 1; j < m_.size(); ++j)
                if (std::abs(m_(i, j) - m_(j, i)) > symmetry_tol * scale)
                    throw precondition_error("SelfAdjointOperator: matrix is not symmetric");
        for (double v : m_.data())
            if (!std::isfinite(v))
                throw argument_error("SelfAdjointOperator: entries must be finite");
    }

    std::size_t dimension() const noexcept { return m_.size(); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

private:
    Matrix m_;
};

inline constexpr double unit_norm_tol = 1e-14;

class CyclicVector
{
public:
    explicit CyclicVector(std::vector<double> v) : v_(std::move(v))
    {
        if (v_.empty())
            throw argument_error("CyclicVector: empty vector");
        CompensatedSum s;
        for (double c : v_)
            s += c * c;
        if (std::abs(std::sqrt(s.value()) - 1.0) > unit_norm_tol)
            throw precondition_error("CyclicVector: vector must have unit Euclidean norm");
    }

    // Divides by the norm first.
    static CyclicVector normalized(std::vector<double> v)
    {
        CompensatedSum s;
        for (double c : v)
            s += c * c;
        const double norm = std::sqrt(s.value());
        if (!(norm > 0.0))
            throw argument_error("CyclicVector: cannot normalize the zero vector");
        for (double& c : v)
            c /= norm;
        return CyclicVector(std::move(v));
    }

    std::size_t size() const noexcept { return v_.size(); }
    std::span<const double> values() const noexcept { return v_; }
    double operator[](std::size_t i) const { return v_[i]; }

private:
    std::vector<double> v_;
};

struct EigenDecomposition
{
    std::vector<double> values; // ascending
    Matrix vectors;             // column j is the eigenvector for values[j]

    double norm() const noexcept
    {
        double m = 0.0;
        for (double e : values)
            m = std::max(m, std::abs(e));
        return m;
    }
};

inline constexpr int jacobi_max_sweeps = 100;

// Cyclic Jacobi rotations on the full dense matrix.
inline EigenDecomposition eigendecompose(const SelfAdjointOperator& op)
{
    const std::size_t n = op.dimension();
    Matrix a = op.matrix();
    // Symmetrize exactly so rotations see one value per pair.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
    Matrix v = Matrix::identity(n);

    double frob2 = 0.0;
    for (double x : a.data())
        frob2 += x * x;
    const double stop = frob2 * 1e-34;

    bool converged = n == 1;
    for (int sweep = 0; sweep < jacobi_max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (off <= stop) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (off > stop)
            throw numerical_error("eigendecompose: Jacobi sweeps did not converge", std::sqrt(off));
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&a](std::size_t l, std::size_t r) { return a(l, l) < a(r, r); });
    EigenDecomposition out;
    out.values.reserve(n);
    out.vectors = Matrix(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values.push_back(a(order[j], order[j]));
        for (std::size_t k = 0; k < n; ++k)
            out.vectors(k, j) = v(k, order[j]);
    }
    return out;
}

// Purely atomic probability measure (eigenvalue, squared overlap).
struct SpectralMeasure
{
    std::vector<Atom> atoms; // sorted by position

    double total_mass() const
    {
        CompensatedSum s;
        for (const auto& at : atoms)
            s += at.weight;
        return s.value();
    }

    // mu((lo, hi)), open interval.
    double mass_in(double lo, double hi) const
    {
        CompensatedSum s;
        for (const auto& at : atoms)
            if (at.position > lo && at.position < hi)
                s += at.weight;
        return s.value();
    }

    std::complex<double> borel(std::complex<double> z) const
    {
        CompensatedSum re, im;
        for (const auto& at : atoms) {
            const std::complex<double> term = at.weight / (at.position - z);
            re += term.real();
            im += term.imag();
        }
        return {re.value(), im.value()};
    }

    // F_mu(x) on the real axis away from atoms.
    double borel_real(double x) const
    {
        CompensatedSum s;
        for (const auto& at : atoms)
            if (at.weight > 0.0)
                s += at.weight / (at.position - x);
        return s.value();
    }

    double borel_real_derivative(double x) const
    {
        CompensatedSum s;
        for (const auto& at : atoms)
            if (at.weight > 0.0) {
                const double d = at.position - x;
                s += at.weight / (d * d);
            }
        return s.value();
    }

    // Zero-weight eigenvalues are not atoms of the measure.
    Measure to_measure() const
    {
        std::vector<Atom> positive;
        for (const auto& at : atoms)
            if (at.weight > 0.0)
                positive.push_back(at);
        return make_atomic(std::move(positive));
    }
};

inline constexpr double eigenvalue_merge_tol = 1e-11;

// Degenerate eigenvalues (within eigenvalue_merge_tol * ||A||) become one atom.
inline SpectralMeasure spectral_measure(const EigenDecomposition& eig, const CyclicVector& phi)
{
    const std::size_t n = eig.values.size();
    if (phi.size() != n)
        throw argument_error("spectral_measure: phi has the wrong length");
    const double tol = eigenvalue_merge_tol * eig.norm();
    SpectralMeasure out;
    std::size_t j = 0;
    while (j < n) {
        std::size_t end = j + 1;
        while (end < n && eig.values[end] - eig.values[j] <= tol)
            ++end;
        CompensatedSum weight, moment, plain;
        for (std::size_t k = j; k < end; ++k) {
            CompensatedSum overlap;
            for (std::size_t i = 0; i < n; ++i)
                overlap += phi[i] * eig.vectors(i, k);
            const double w = overlap.value() * overlap.value();
            weight += w;
            moment += w * eig.values[k];
            plain += eig.values[k];
        }
        const double w = weight.value();
        const double pos = end - j == 1 ? eig.values[j]
                           : w > 0.0    ? moment.value() / w
                                        : plain.value() / static_cast<double>(end - j);
        out.atoms.push_back({pos, w});
        j = end;
    }
    return out;
}

inline SpectralMeasure spectral_measure(const SelfAdjointOperator& op, const CyclicVector& phi)
{
    return spectral_measure(eigendecompose(op), phi);
}

// A + lambda phi phi^T
inline SelfAdjointOperator perturb(const SelfAdjointOperator& op, const CyclicVector& phi,
                                   double lambda)
{
    const std::size_t n = op.dimension();
    if (phi.size() != n)
        throw argument_error("perturb: phi has the wrong length");
    Matrix m = op.matrix();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = m(i, j) + lambda * phi[i] * phi[j];
            m(i, j) = v;
            m(j, i) = v;
        }
    return SelfAdjointOperator(std::move(m));
}

// F_{mu_lambda} = F_mu / (1 + lambda F_mu)
inline std::complex<double> aronszajn_krein(std::complex<double> f, double lambda)
{
    const std::complex<double> denom = 1.0 + lambda * f;
    if (std::abs(denom) < 1e-300)
        throw numerical_error("aronszajn_krein: 1 + lambda F vanishes");
    return f / denom;
}

// Atoms with weight at or below this are invisible to F_mu.
inline constexpr double secular_weight_floor = 1e-15;
inline constexpr double secular_bracket_rel = 1e-13;

class RankOneFamily
{
public:
    RankOneFamily(SelfAdjointOperator op, CyclicVector phi)
        : op_(std::move(op)), phi_(std::move(phi))
    {
        if (phi_.size() != op_.dimension())
            throw argument_error("RankOneFamily: phi has the wrong length");
        eig_ = eigendecompose(op_);
        mu_ = spectral_measure(eig_, phi_);
        norm_ = eig_.norm();
        for (const auto& at : mu_.atoms)
            if (at.weight > secular_weight_floor)
                support_.push_back(at);
    }

    const SelfAdjointOperator& op() const noexcept { return op_; }
    const CyclicVector& phi() const noexcept { return phi_; }
    const EigenDecomposition& eigen() const noexcept { return eig_; }
    const SpectralMeasure& mu() const noexcept { return mu_; }
    double norm() const noexcept { return norm_; }
    std::size_t dimension() const noexcept { return op_.dimension(); }

    // Positive-weight atoms of mu, the only ones F_mu sees.
    const std::vector<Atom>& support() const noexcept { return support_; }

    std::complex<double> borel(std::complex<double> z) const { return mu_.borel(z); }

    SpectralMeasure perturbed_direct(double lambda) const
    {
        if (lambda == 0.0)
            return mu_;
        return spectral_measure(perturb(op_, phi_, lambda), phi_);
    }

    SpectralMeasure perturbed_secular(double lambda) const;

    // Coupling at which an eigenvalue of A_lambda sits exactly at b:
    // lambda* = -1/F_mu(b). Zero when b is an atom of mu, empty when
    // F_mu(b) = 0 (no finite coupling reaches b).
    std::optional<double> crossing_coupling(double b) const
    {
        for (const auto& at : support_)
            if (at.position == b)
                return 0.0;
        const double f = mu_.borel_real(b);
        if (f == 0.0 || !std::isfinite(f))
            return std::nullopt;
        return -1.0 / f;
    }

private:
    SelfAdjointOperator op_;
    CyclicVector phi_;
    EigenDecomposition eig_;
    SpectralMeasure mu_;
    double norm_ = 0.0;
    std::vector<Atom> support_;
};

namespace detail
{

// F_mu and F_mu' at x = E[origin] + s, with differences taken relative to the
// origin atom to keep precision next to it.
struct SecularEval
{
    double f;
    double df;
};

inline SecularEval secular_eval(std::span<const Atom> atoms, std::size_t origin, double s)
{
    CompensatedSum f, df;
    const double base = atoms[origin].position;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        const double d = (atoms[j].position - base) - s;
        f += atoms[j].weight / d;
        df += atoms[j].weight / (d * d);
    }
    return {f.value(), df.value()};
}

// Root of F(E[origin] + s) = target for s strictly between lo and hi, where F
// is increasing in s (direction = +1) or decreasing (direction = -1 means s
// moves leftwards, so F decreases in s).
inline double secular_root(std::span<const Atom> atoms, std::size_t origin, double target,
                           double lo, double hi)
{
    auto g = [&](double s) { return secular_eval(atoms, origin, s).f - target; };
    const double width = std::abs(hi - lo) * secular_bracket_rel;
    // F increases with x; s increases with x here, so g(lo) < 0 < g(hi).
    for (int it = 0; it < 2000 && std::abs(hi - lo) > width; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        const double v = g(mid);
        if (v == 0.0)
            return mid;
        if (v < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double mid = 0.5 * (lo + hi);
    const auto e = secular_eval(atoms, origin, mid);
    if (e.df > 0.0 && std::isfinite(e.df)) {
        const double step = mid - (e.f - target) / e.df;
        if (step >= std::min(lo, hi) && step <= std::max(lo, hi))
            return step;
    }
    return mid;
}

} // namespace detail

inline SpectralMeasure RankOneFamily::perturbed_secular(double lambda) const
{
    if (lambda == 0.0)
        throw argument_error("perturbed_secular: lambda must be nonzero (use the direct route)");
    if (!std::isfinite(lambda))
        throw argument_error("perturbed_secular: lambda must be finite");
    const std::span<const Atom> atoms(support_);
    if (atoms.empty())
        throw precondition_error("perturbed_secular: mu has no atoms of positive weight");
    const double target = -1.0 / lambda;
    const double lambda2 = lambda * lambda;
    SpectralMeasure out;
    out.atoms.reserve(atoms.size());

    auto emit = [&](std::size_t origin, double s) {
        const auto e = detail::secular_eval(atoms, origin, s);
        out.atoms.push_back({atoms[origin].position + s, 1.0 / (lambda2 * e.df)});
    };

    const std::size_t m = atoms.size();
    if (lambda < 0.0) {
        // Left of the lowest atom: x = E_0 + s with s < 0.
        double reach = std::max({1.0, std::abs(lambda), atoms.back().position - atoms.front().position});
        int grow = 0;
        while (detail::secular_eval(atoms, 0, -reach).f - target > 0.0) {
            reach *= 2.0;
            if (++grow > 2000)
                throw numerical_error("perturbed_secular: could not bracket the exterior root");
        }
        emit(0, detail::secular_root(atoms, 0, target, -reach, 0.0));
    }
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double gap = atoms[k + 1].position - atoms[k].position;
        // Root in (E_k, E_k+1); use the nearer atom as the origin.
        const double mid = 0.5 * gap;
        const double f_mid = detail::secular_eval(atoms, k, mid).f;
        if (f_mid >= target)
            emit(k, detail::secular_root(atoms, k, target, 0.0, mid));
        else
            emit(k + 1, detail::secular_root(atoms, k + 1, target, -mid, 0.0) );
    }
    if (lambda > 0.0) {
        double reach = std::max({1.0, std::abs(lambda), atoms.back().position - atoms.front().position});
        int grow = 0;
        while (detail::secular_eval(atoms, m - 1, reach).f - target < 0.0) {
            reach *= 2.0;
            if (++grow > 2000)
                throw numerical_error("perturbed_secular: could not bracket the exterior root");
        }
        emit(m - 1, detail::secular_root(atoms, m - 1, target, 0.0, reach));
    }
    std::sort(out.atoms.begin(), out.atoms.end(),
              [](const Atom& l, const Atom& r) { return l.position < r.position; });
    return out;
}

inline constexpr double mutual_singularity_weight_floor = 1e-12;

// True iff no positive-weight atom of mu_lambda1 lies within tol of one of
// mu_lambda2.
inline bool mutual_singularity_check(const RankOneFamily& family, double lambda1, double lambda2,
                                     double tol)
{
    if (lambda1 == lambda2)
        throw precondition_error("mutual_singularity_check: couplings must differ");
    const auto m1 = family.perturbed_direct(lambda1);
    const auto m2 = family.perturbed_direct(lambda2);
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& a : m1.atoms) {
        if (a.weight <= mutual_singularity_weight_floor)
            continue;
        for (const auto& b : m2.atoms)
            if (b.weight > mutual_singularity_weight_floor)
                closest = std::min(closest, std::abs(a.position - b.position));
    }
    return closest > tol;
}

// ---------------------------------------------------------------------------
// Random ensembles

// (G + G^T)/2 with independent standard normal entries.
inline SelfAdjointOperator make_dense_gaussian(std::size_t n, std::uint64_t seed)
{
    if (n < 1)
        throw argument_error("make_dense_gaussian: n must be at least 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g(i, j) = normal(rng);
    Matrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = 0.5 * (g(i, j) + g(j, i));
    return SelfAdjointOperator(std::move(a));
}

// Tridiagonal: uniform [lo, hi) diagonal, constant off-diagonal.
inline SelfAdjointOperator make_jacobi(std::size_t n, std::uint64_t seed, double lo = 0.0,
                                       double hi = 1.0, double off_diagonal = 1.0)
{
    if (n < 1)
        throw argument_error("make_jacobi: n must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> diag(lo, hi);
    Matrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        a(i, i) = diag(rng);
    for (std::size_t i = 0; i + 1 < n; ++i)
        a(i, i + 1) = a(i + 1, i) = off_diagonal;
    return SelfAdjointOperator(std::move(a));
}

inline CyclicVector random_unit_vector(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& c : v)
        c = normal(rng);
    return CyclicVector::normalized(std::move(v));
}

inline CyclicVector basis_vector(std::size_t n, std::size_t index)
{
    if (index >= n)
        throw argument_error("basis_vector: index out of range");
    std::vector<double> v(n, 0.0);
    v[index] = 1.0;
    return CyclicVector(std::move(v));
}

} // namespace specavg
