#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration over a list of panels.
//
// The panel with the largest error estimate is bisected until the summed
// estimate drops below the absolute tolerance or the panel cap is reached.
// Panels are reduced in left-endpoint order with compensated summation, so a
// given integrand and panel list always produce the same bits.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "specavg/errors.hpp"
#include "specavg/numeric.hpp"

namespace specavg
{

template <class T>
struct QuadratureResult
{
    T value{};
    double error = 0.0;
    std::size_t panels = 0;
    bool converged = false;
};

namespace detail
{

inline constexpr double gk15_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double gk15_kronrod_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for nodes 1, 3, 5, 7 above.
inline constexpr double gk15_gauss_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct PanelEstimate
{
    T value;
    double error;
};

template <class T, class F>
PanelEstimate<T> gauss_kronrod_15(F& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::abs(half);

    T fv[15];
    fv[7] = static_cast<T>(f(center));
    for (int j = 0; j < 7; ++j) {
        const double dx = half * gk15_nodes[j];
        fv[j] = static_cast<T>(f(center - dx));
        fv[14 - j] = static_cast<T>(f(center + dx));
    }

    T kronrod = gk15_kronrod_weights[7] * fv[7];
    T gauss = gk15_gauss_weights[3] * fv[7];
    double res_abs = gk15_kronrod_weights[7] * std::abs(fv[7]);
    for (int j = 0; j < 7; ++j) {
        const T pair = fv[j] + fv[14 - j];
        kronrod += gk15_kronrod_weights[j] * pair;
        res_abs += gk15_kronrod_weights[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
        if (j % 2 == 1)
            gauss += gk15_gauss_weights[j / 2] * pair;
    }
    const T mean = 0.5 * kronrod;
    double res_asc = gk15_kronrod_weights[7] * std::abs(fv[7] - mean);
    for (int j = 0; j < 7; ++j)
        res_asc += gk15_kronrod_weights[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));

    const T value = kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    double err = std::abs((kronrod - gauss) * half);
    if (res_asc != 0.0 && err != 0.0)
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * res_abs, err);
    if (!std::isfinite(std::abs(value)))
        err = std::numeric_limits<double>::infinity();
    return {value, err};
}

} // namespace detail

using Panel = std::pair<double, double>;

template <class T = double, class F>
QuadratureResult<T> integrate_panels(F&& f, std::span<const Panel> initial, double abs_tol,
                                     std::size_t max_panels)
{
    if (!(abs_tol > 0.0))
        throw argument_error("integrate: abs_tol must be positive");

    struct Node
    {
        double a, b;
        T value;
        double error;
        bool retired;
    };
    std::vector<Node> nodes;
    nodes.reserve(initial.size() * 4 + 16);

    auto by_error = [&nodes](std::size_t lhs, std::size_t rhs) {
        if (nodes[lhs].error != nodes[rhs].error)
            return nodes[lhs].error < nodes[rhs].error;
        return lhs > rhs;
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_error)> queue(by_error);

    double running = 0.0;
    auto push = [&](double a, double b) {
        const auto est = detail::gauss_kronrod_15<T>(f, a, b);
        const double mid = 0.5 * (a + b);
        const bool splittable = mid > std::min(a, b) && mid < std::max(a, b);
        nodes.push_back({a, b, est.value, est.error, false});
        running += est.error;
        if (splittable)
            queue.push(nodes.size() - 1);
    };

    for (const auto& [a, b] : initial) {
        if (a == b)
            continue;
        push(a, b);
    }

    std::size_t live = nodes.size();
    while (running > abs_tol && !queue.empty() && live < max_panels) {
        const std::size_t worst = queue.top();
        queue.pop();
        const double a = nodes[worst].a;
        const double b = nodes[worst].b;
        running -= nodes[worst].error;
        nodes[worst].retired = true;
        const double mid = 0.5 * (a + b);
        push(a, mid);
        push(mid, b);
        ++live;
    }

    std::vector<std::size_t> order;
    order.reserve(live);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!nodes[i].retired)
            order.push_back(i);
    std::sort(order.begin(), order.end(), [&nodes](std::size_t l, std::size_t r) {
        if (nodes[l].a != nodes[r].a)
            return nodes[l].a < nodes[r].a;
        return l < r;
    });

    QuadratureResult<T> out;
    CompensatedSum err;
    if constexpr (std::is_same_v<T, double>) {
        CompensatedSum total;
        for (auto i : order) {
            total += nodes[i].value;
            err += nodes[i].error;
        }
        out.value = total.value();
    } else {
        CompensatedSum re, im;
        for (auto i : order) {
            re += nodes[i].value.real();
            im += nodes[i].value.imag();
            err += nodes[i].error;
        }
        out.value = T(re.value(), im.value());
    }
    out.error = err.value();
    out.panels = order.size();
    out.converged = out.error <= abs_tol;
    return out;
}

// Panels between consecutive sorted, deduplicated edges.
inline std::vector<Panel> panels_from_edges(std::vector<double> edges)
{
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<Panel> out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        out.emplace_back(edges[i], edges[i + 1]);
    return out;
}

template <class T = double, class F>
QuadratureResult<T> integrate(F&& f, double a, double b, double abs_tol,
                              std::size_t max_panels = 1'000'000)
{
    const Panel p{a, b};
    return integrate_panels<T>(std::forward<F>(f), std::span<const Panel>(&p, 1), abs_tol,
                               max_panels);
}

// Integral over the whole real line through y = tan(theta). The integrand
// f(y)*(1+y^2) must stay bounded as |y| grows. Breakpoints are split exactly.
template <class T = double, class F>
QuadratureResult<T> integrate_real_line(F&& f, std::span<const double> breakpoints,
                                        double abs_tol, std::size_t max_panels = 1'000'000)
{
    constexpr double half_pi = 0.5 * std::numbers::pi;
    std::vector<double> edges{-half_pi, half_pi};
    for (double bp : breakpoints)
        if (std::isfinite(bp))
            edges.push_back(std::atan(bp));
    auto panels = panels_from_edges(std::move(edges));
    auto mapped = [&f](double theta) -> T {
        const double y = std::tan(theta);
        return static_cast<T>(f(y)) * (1.0 + y * y);
    };
    return integrate_panels<T>(mapped, std::span<const Panel>(panels), abs_tol, max_panels);
}

template <class T>
const QuadratureResult<T>& require_converged(const QuadratureResult<T>& r, const std::string& what)
{
    if (!r.converged)
        throw numerical_error(what + ": tolerance not met (achieved error estimate " +
                                  format_real(r.error) + " with " + std::to_string(r.panels) +
                                  " panels)",
                              r.error);
    return r;
}

} // namespace specavg
