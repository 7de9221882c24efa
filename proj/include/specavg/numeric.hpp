#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "specavg/errors.hpp"

namespace specavg
{

// Neumaier summation. Order of add() calls fixes the result bitwise.
class CompensatedSum
{
public:
    void add(double v) noexcept
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double v) noexcept
    {
        add(v);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct LinearFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares y = slope*x + intercept.
// r_squared is 1 when the residual vanishes (including constant y).
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw argument_error("least_squares: need at least two paired samples");

    const double n = static_cast<double>(x.size());
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx.value() / n;
    const double my = sy.value() / n;

    CompensatedSum sxx, sxy, syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx.value() <= 0.0)
        throw argument_error("least_squares: abscissae are all equal");

    LinearFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;

    CompensatedSum ssr;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ssr += r * r;
    }
    const double tot = syy.value();
    const double res = ssr.value();
    const double scale = std::max(1.0, std::abs(my));
    if (res <= 1e-24 * scale * scale * n)
        fit.r_squared = 1.0;
    else if (tot <= 0.0)
        fit.r_squared = 0.0;
    else
        fit.r_squared = std::clamp(1.0 - res / tot, 0.0, 1.0);
    return fit;
}

// eps_max * ratio^k, k = 0..count-1
inline std::vector<double> geometric_scales(double eps_max, double ratio, std::size_t count)
{
    if (!(eps_max > 0.0))
        throw argument_error("geometric_scales: eps_max must be positive");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw argument_error("geometric_scales: ratio must lie in (0,1)");
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(eps_max * std::pow(ratio, static_cast<double>(k)));
    return out;
}

// Shortest round-trip decimal form, used for every CSV cell.
inline std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

} // namespace specavg
