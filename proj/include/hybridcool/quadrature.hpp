#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration over the real line.
//
// The caller supplies breakpoints that partition [-W, W]; the two tails
// beyond +-W are mapped onto (0, 1] with w = +-W / t. The worst panel is
// bisected until the summed error estimate meets the tolerance. Integrands
// are vector valued (std::array<double, N>) so several channels share one
// panel layout; the error that drives refinement is the sum over channels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "summation.hpp"

namespace hybridcool {

enum class QuadStatus { converged, not_converged, divergent };

template <std::size_t N>
struct QuadResult {
    std::array<double, N> value{};
    double error = 0.0;
    std::size_t evaluations = 0;
    QuadStatus status = QuadStatus::converged;
};

struct QuadLimits {
    double rel_tol = 1e-9;
    double abs_tol = 1e-15;
    std::size_t max_evaluations = 4'000'000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

enum class Map { identity, right_tail, left_tail };

template <std::size_t N>
struct Panel {
    double a = 0.0;
    double b = 0.0;
    Map map = Map::identity;
    std::array<double, N> value{};
    double error = 0.0;
    std::size_t order = 0; // insertion index; tie-break keeps the heap deterministic
};

template <std::size_t N>
struct PanelLess {
    bool operator()(const Panel<N>& x, const Panel<N>& y) const
    {
        if (x.error != y.error) return x.error < y.error;
        return x.order > y.order;
    }
};

template <std::size_t N, class F>
std::array<double, N> mapped(const F& f, Map map, double scale, double x)
{
    if (map == Map::identity) return f(x);
    const double w = (map == Map::right_tail ? scale : -scale) / x;
    auto v = f(w);
    const double jac = scale / (x * x);
    for (auto& c : v) c *= jac;
    return v;
}

template <std::size_t N, class F>
void apply_rule(const F& f, double scale, Panel<N>& p)
{
    const double centre = 0.5 * (p.a + p.b);
    const double half = 0.5 * (p.b - p.a);
    std::array<double, N> kron{}, gauss{};

    const auto fc = mapped<N>(f, p.map, scale, centre);
    for (std::size_t c = 0; c < N; ++c) {
        kron[c] = kKronrodWeights[7] * fc[c];
        gauss[c] = kGaussWeights[3] * fc[c];
    }
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const auto f1 = mapped<N>(f, p.map, scale, centre - dx);
        const auto f2 = mapped<N>(f, p.map, scale, centre + dx);
        for (std::size_t c = 0; c < N; ++c) {
            kron[c] += kKronrodWeights[j] * (f1[c] + f2[c]);
            if (j % 2 == 1) gauss[c] += kGaussWeights[j / 2] * (f1[c] + f2[c]);
        }
    }
    p.error = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
        p.value[c] = kron[c] * half;
        p.error += std::abs((kron[c] - gauss[c]) * half);
    }
}

} // namespace detail

/// Integrates f over the whole real line. `breakpoints` must be sorted and
/// strictly increasing; its first and last entries are -W and +W.
template <std::size_t N, class F>
QuadResult<N> integrate_real_line(const F& f, const std::vector<double>& breakpoints,
                                  const QuadLimits& limits)
{
    using detail::Map;
    using Panel = detail::Panel<N>;

    QuadResult<N> out;
    if (breakpoints.size() < 2) {
        out.status = QuadStatus::not_converged;
        return out;
    }
    const double scale = breakpoints.back();
    const double left_edge = -breakpoints.front();

    std::priority_queue<Panel, std::vector<Panel>, detail::PanelLess<N>> heap;
    std::size_t order = 0;
    auto push = [&](Panel p) {
        p.order = order++;
        detail::apply_rule<N>(f, p.map == Map::left_tail ? left_edge : scale, p);
        out.evaluations += 15;
        heap.push(p);
        return p;
    };

    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        push(Panel{breakpoints[i], breakpoints[i + 1], Map::identity});
    push(Panel{0.0, 1.0, Map::right_tail});
    push(Panel{0.0, 1.0, Map::left_tail});

    auto totals = [&]() {
        // Copy the heap to sum in a fixed order (by map, then left endpoint).
        auto copy = heap;
        std::vector<Panel> all;
        all.reserve(copy.size());
        while (!copy.empty()) {
            all.push_back(copy.top());
            copy.pop();
        }
        std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) {
            if (x.map != y.map) return x.map < y.map;
            return x.a < y.a;
        });
        std::array<CompensatedSum, N> sums;
        CompensatedSum err;
        for (const auto& p : all) {
            for (std::size_t c = 0; c < N; ++c) sums[c] += p.value[c];
            err += p.error;
        }
        std::array<double, N> v{};
        for (std::size_t c = 0; c < N; ++c) v[c] = sums[c].value();
        return std::pair{v, err.value()};
    };

    // Running totals steer the loop; they are re-summed exactly every 64
    // bisections and once more for the reported value.
    std::array<double, N> running{};
    double err_total = 0.0;
    auto resync = [&]() {
        auto [v, e] = totals();
        running = v;
        err_total = e;
    };
    auto magnitude = [&]() {
        double m = 0.0;
        for (double x : running) m += std::abs(x);
        return m;
    };
    resync();

    for (std::size_t step = 1;; ++step) {
        const double target = std::max(limits.abs_tol, limits.rel_tol * magnitude());
        if (err_total <= target) {
            resync();
            if (err_total <= std::max(limits.abs_tol, limits.rel_tol * magnitude())) break;
        }
        if (out.evaluations + 30 > limits.max_evaluations) {
            out.status = QuadStatus::not_converged;
            break;
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval exhausted at double resolution.
            out.status = QuadStatus::not_converged;
            heap.push(worst);
            break;
        }
        const Panel left = push(Panel{worst.a, mid, worst.map});
        const Panel right = push(Panel{mid, worst.b, worst.map});
        for (std::size_t c = 0; c < N; ++c)
            running[c] += (left.value[c] + right.value[c]) - worst.value[c];
        err_total += (left.error + right.error) - worst.error;
        if (step % 64 == 0) resync();
    }

    auto [v, e] = totals();
    out.value = v;
    out.error = e;
    for (double x : v)
        if (!std::isfinite(x)) out.status = QuadStatus::not_converged;
    return out;
}

} // namespace hybridcool
