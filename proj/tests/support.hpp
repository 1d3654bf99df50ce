#pragma once

// Shared fixtures: ideal three-lens designs with exactly matched q, obtained by
// letting the third focal length vary continuously.

#include <gouy/config_search.hpp>

#include <array>
#include <stdexcept>

namespace gouy::testing {

inline const ComplexBeamParameter& default_q_in() {
    static const auto q = ComplexBeamParameter::from_waist(1e-3, 810e-9);
    return q;
}

// Newton on (d1, d2, f3) for q_A = q_B and an unwrapped Gouy difference `target`.
inline ThreeLensDesign exact_design(double f1, double f2, double target, ThreeLensDesign guess,
                                    const ComplexBeamParameter& q_in = default_q_in()) {
    auto residual = [&](const std::array<double, 3>& x) {
        const ThreeLensDesign d{f1, f2, x[2], x[0], x[1]};
        const auto arms = propagate_arms(d.interferometer(q_in));
        const complex dq = arms.a.q.q() - arms.b.q.q();
        return std::array<double, 3>{dq.real(), dq.imag(), arms.a.gouy - arms.b.gouy - target};
    };
    std::array<double, 3> x{guess.d1, guess.d2, guess.f3};
    for (int it = 0; it < 50; ++it) {
        const auto r = residual(x);
        if (std::abs(r[0]) + std::abs(r[1]) < 1e-14 && std::abs(r[2]) < 1e-14) break;
        double j[3][3];
        for (int c = 0; c < 3; ++c) {
            auto xp = x, xm = x;
            const double h = 1e-7 * std::abs(x[c]);
            xp[c] += h;
            xm[c] -= h;
            const auto rp = residual(xp), rm = residual(xm);
            for (int row = 0; row < 3; ++row) j[row][c] = (rp[row] - rm[row]) / (2 * h);
        }
        // Cramer's rule for J dx = -r
        auto det3 = [](double m[3][3]) {
            return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        };
        const double det = det3(j);
        for (int c = 0; c < 3; ++c) {
            double m[3][3];
            for (int row = 0; row < 3; ++row)
                for (int k = 0; k < 3; ++k) m[row][k] = k == c ? -r[row] : j[row][k];
            x[c] += det3(m) / det;
        }
    }
    const auto r = residual(x);
    if (std::abs(r[0]) + std::abs(r[1]) > 1e-12 || std::abs(r[2]) > 1e-12)
        throw std::runtime_error("exact_design: Newton did not converge");
    return {f1, f2, x[2], x[0], x[1]};
}

// Gouy difference 3pi/2, i.e. -pi/2 modulo 2pi: a pi/2 sorter.
inline const ThreeLensDesign& ideal_half_pi() {
    static const auto d = exact_design(0.5, 0.04, 1.5 * pi, {0.5, 0.04, 0.29790843, 0.56076532, 0.34098083});
    return d;
}

// Gouy difference 5pi/4, equivalent to pi/4 for radial sorting at fixed l.
inline const ThreeLensDesign& ideal_quarter_pi() {
    static const auto d = exact_design(0.5, 0.04, 1.25 * pi, {0.5, 0.04, 0.3038542, 0.50713607, 0.32888148});
    return d;
}

inline InterferometerConfig free_space_pair(double length, const ComplexBeamParameter& q_in = default_q_in()) {
    return {OpticalPath{free_space(length)}, OpticalPath{free_space(length)}, q_in};
}

}  // namespace gouy::testing
