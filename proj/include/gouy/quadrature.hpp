#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for scalar, complex and
// fixed-size vector integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <tuple>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace gouy {

struct QuadratureSettings {
    double relative_tolerance = 1e-9;
    double absolute_tolerance = 1e-14;
    int initial_intervals = 8;
    int max_intervals = 4000;
};

template <class T>
struct QuadratureResult {
    T value;
    double error;
    int evaluations;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct is_std_array : std::false_type {};
template <class U, std::size_t N>
struct is_std_array<std::array<U, N>> : std::true_type {};

template <class T>
void add_scaled(T& acc, const T& v, double w) {
    if constexpr (is_std_array<T>::value) {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
    } else {
        acc += w * v;
    }
}

template <class T>
T scaled(const T& v, double w) {
    T out{};
    add_scaled(out, v, w);
    return out;
}

template <class T>
double magnitude(const T& v) {
    if constexpr (is_std_array<T>::value) {
        double m = 0.0;
        for (const auto& x : v) m = std::max(m, std::abs(x));
        return m;
    } else {
        return std::abs(v);
    }
}

template <class T>
struct Segment {
    double a, b;
    T value;
    double error;
    double l1;  // integral of |f|, sets the roundoff floor
};

template <class T, class F>
Segment<T> kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const T fc = f(center);
    T kronrod = scaled(fc, kronrod_weights[7]);
    T gauss = scaled(fc, gauss_weights[3]);
    double l1 = kronrod_weights[7] * magnitude(fc);
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        const T lo = f(center - dx);
        const T hi = f(center + dx);
        l1 += kronrod_weights[j] * (magnitude(lo) + magnitude(hi));
        T pair = lo;
        add_scaled(pair, hi, 1.0);
        add_scaled(kronrod, pair, kronrod_weights[j]);
        if (j % 2 == 1) add_scaled(gauss, pair, gauss_weights[j / 2]);
    }
    T diff = kronrod;
    add_scaled(diff, gauss, -1.0);
    return {a, b, scaled(kronrod, half), magnitude(diff) * std::abs(half), l1 * std::abs(half)};
}

}  // namespace detail

// Integrates f over [a, b]. Throws quadrature_error if the requested accuracy
// is not reached within settings.max_intervals subintervals.
template <class F>
auto integrate(F&& f, double a, double b, const QuadratureSettings& settings = {})
    -> QuadratureResult<std::decay_t<std::invoke_result_t<F&, double>>> {
    using T = std::decay_t<std::invoke_result_t<F&, double>>;
    if (!(settings.relative_tolerance >= 0.0) || !(settings.absolute_tolerance >= 0.0) ||
        settings.initial_intervals < 1 || settings.max_intervals < settings.initial_intervals)
        throw invalid_input("integrate: invalid quadrature settings");
    if (!(b > a)) return {T{}, 0.0, 0};

    std::vector<detail::Segment<T>> segments;
    segments.reserve(static_cast<std::size_t>(settings.max_intervals));
    const int n0 = settings.initial_intervals;
    for (int i = 0; i < n0; ++i) {
        const double lo = a + (b - a) * i / n0;
        const double hi = (i + 1 == n0) ? b : a + (b - a) * (i + 1) / n0;
        segments.push_back(detail::kronrod15<T>(f, lo, hi));
    }

    auto totals = [&segments] {
        T value{};
        double error = 0.0, l1 = 0.0;
        for (const auto& s : segments) {
            detail::add_scaled(value, s.value, 1.0);
            error += s.error;
            l1 += s.l1;
        }
        return std::tuple{value, error, l1};
    };

    // Below about 50 ulp of the integral of |f| the error estimate is roundoff,
    // e.g. for integrals that cancel to zero.
    constexpr double roundoff = 50.0 * std::numeric_limits<double>::epsilon();
    while (true) {
        auto [value, error, l1] = totals();
        const double target = std::max({settings.absolute_tolerance,
                                        settings.relative_tolerance * detail::magnitude(value), roundoff * l1});
        const int evaluations = 15 * static_cast<int>(segments.size());
        if (error <= target) return {value, error, evaluations};
        if (static_cast<int>(segments.size()) >= settings.max_intervals)
            throw quadrature_error("integrate: adaptive quadrature did not converge", error, target);

        auto worst = std::max_element(segments.begin(), segments.end(),
                                      [](const auto& l, const auto& r) { return l.error < r.error; });
        const double lo = worst->a, hi = worst->b, mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
            throw quadrature_error("integrate: interval cannot be subdivided further", error, target);
        *worst = detail::kronrod15<T>(f, lo, mid);
        segments.push_back(detail::kronrod15<T>(f, mid, hi));
    }
}

}  // namespace gouy
