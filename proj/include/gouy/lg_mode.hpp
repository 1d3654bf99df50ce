#pragma once

// Laguerre-Gaussian fields written in terms of the complex beam parameter,
// and transverse-plane overlap integrals between mode superpositions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "beam.hpp"
#include "laguerre.hpp"
#include "quadrature.hpp"

namespace gouy {

struct LGMode {
    int p = 0;
    int ell = 0;
    complex amplitude{1.0, 0.0};

    LGMode() = default;
    LGMode(int p_, int ell_, complex amp = {1.0, 0.0}) : p(p_), ell(ell_), amplitude(amp) {
        if (p < 0) throw invalid_input("LGMode: radial index p must be non-negative");
    }

    // m = 2p + |l| + 1, the multiplier of the Gouy phase.
    int order() const { return 2 * p + std::abs(ell) + 1; }

    friend bool same_indices(const LGMode& a, const LGMode& b) { return a.p == b.p && a.ell == b.ell; }
};

// sqrt(2 p! / (pi (p+|l|)!))
inline double lg_normalization(int p, int ell) {
    const int al = std::abs(ell);
    return std::sqrt(2.0 / pi) * std::exp(0.5 * (log_factorial(p) - log_factorial(p + al)));
}

class ModeSuperposition {
public:
    ModeSuperposition() = default;

    explicit ModeSuperposition(std::vector<LGMode> terms) : terms_(std::move(terms)) {
        for (std::size_t i = 0; i < terms_.size(); ++i)
            for (std::size_t j = i + 1; j < terms_.size(); ++j)
                if (same_indices(terms_[i], terms_[j]))
                    throw invalid_input("ModeSuperposition: duplicate (p, l) term");
    }

    ModeSuperposition(std::initializer_list<LGMode> terms) : ModeSuperposition(std::vector<LGMode>(terms)) {}

    static ModeSuperposition single(int p, int ell) { return ModeSuperposition{LGMode{p, ell}}; }

    std::span<const LGMode> terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    double weight_norm() const {
        double s = 0.0;
        for (const auto& t : terms_) s += std::norm(t.amplitude);
        return s;
    }

    bool is_normalized(double tol = 1e-9) const { return std::abs(weight_norm() - 1.0) <= tol; }

    ModeSuperposition normalized() const {
        const double n = weight_norm();
        if (!(n > 0.0)) throw invalid_input("ModeSuperposition: cannot normalize a zero superposition");
        ModeSuperposition out = *this;
        for (auto& t : out.terms_) t.amplitude /= std::sqrt(n);
        return out;
    }

    int max_order() const {
        int m = 1;
        for (const auto& t : terms_) m = std::max(m, t.order());
        return m;
    }

private:
    std::vector<LGMode> terms_;
};

// A beam at one transverse plane: its q and the Gouy phase carried by the
// fundamental mode there. For a freshly defined beam this is the local
// arctan(Re q / Im q); after propagation it is the unwrapped accumulated value.
struct BeamState {
    ComplexBeamParameter q;
    double gouy;

    static BeamState local(const ComplexBeamParameter& q) { return {q, gouy_phase(q)}; }
};

struct FieldOptions {
    // Include the k*Re(q) axial phase term.
    bool axial_phase = true;
};

// Complex field of the mode without the exp(-i l phi) azimuthal factor.
inline complex lg_radial(const LGMode& mode, const BeamState& state, double r, FieldOptions opts = {}) {
    const ComplexBeamParameter& q = state.q;
    const int al = std::abs(mode.ell);
    const double w = q.spot_size();
    const double k = q.wave_number();
    const double s = std::sqrt(2.0) * r / w;
    const double x = 2.0 * r * r / (w * w);
    const double amplitude = lg_normalization(mode.p, mode.ell) / w * std::pow(s, al) *
                             laguerre_poly(mode.p, al, x) * std::exp(-r * r / (w * w));
    double phase = mode.order() * state.gouy - 0.5 * k * r * r * q.inverse_curvature();
    // k z is ~1e7 rad; reducing it first keeps the phase sum accurate.
    if (opts.axial_phase) phase -= std::remainder(k * q.z(), 2.0 * pi);
    return mode.amplitude * amplitude * std::polar(1.0, phase);
}

inline complex lg_field(const LGMode& mode, const BeamState& state, double r, double phi, FieldOptions opts = {}) {
    if (!(r >= 0.0)) throw invalid_input("lg_field: r must be non-negative");
    return lg_radial(mode, state, r, opts) * std::polar(1.0, -mode.ell * phi);
}

// Field with the local Gouy phase of q.
inline complex lg_field(const LGMode& mode, const ComplexBeamParameter& q, double r, double phi) {
    return lg_field(mode, BeamState::local(q), r, phi);
}

inline complex superposition_field(const ModeSuperposition& psi, const BeamState& state, double r, double phi,
                                   FieldOptions opts = {}) {
    complex e{};
    for (const auto& t : psi.terms()) e += lg_field(t, state, r, phi, opts);
    return e;
}

// Radius beyond which a mode of order m carries negligible power.
inline double truncation_radius(const ComplexBeamParameter& q, int order) {
    const double m = order;
    return q.spot_size() * std::sqrt(2.0 * (m + 6.0 * std::sqrt(m)));
}

namespace detail {

inline std::map<int, std::vector<LGMode>> group_by_ell(const ModeSuperposition& psi) {
    std::map<int, std::vector<LGMode>> groups;
    for (const auto& t : psi.terms()) groups[t.ell].push_back(t);
    return groups;
}

inline complex radial_sum(std::span<const LGMode> modes, const BeamState& state, double r, FieldOptions opts) {
    complex s{};
    for (const auto& m : modes) s += lg_radial(m, state, r, opts);
    return s;
}

}  // namespace detail

// Integral of conj(E_a) * E_b over the transverse plane. The azimuthal integral
// is done analytically (2*pi for equal l, zero otherwise); radial adaptively.
inline complex overlap(const ModeSuperposition& a, const BeamState& qa, const ModeSuperposition& b,
                       const BeamState& qb, const QuadratureSettings& settings = {}, FieldOptions opts = {}) {
    const auto ga = detail::group_by_ell(a);
    const auto gb = detail::group_by_ell(b);
    const double r_max = std::max(truncation_radius(qa.q, a.max_order()), truncation_radius(qb.q, b.max_order()));
    complex total{};
    for (const auto& [ell, modes_a] : ga) {
        const auto it = gb.find(ell);
        if (it == gb.end()) continue;
        const auto& modes_b = it->second;
        auto integrand = [&](double r) {
            return std::conj(detail::radial_sum(modes_a, qa, r, opts)) * detail::radial_sum(modes_b, qb, r, opts) * r;
        };
        total += 2.0 * pi * integrate(integrand, 0.0, r_max, settings).value;
    }
    return total;
}

inline complex overlap(const ModeSuperposition& a, const ComplexBeamParameter& qa, const ModeSuperposition& b,
                       const ComplexBeamParameter& qb, const QuadratureSettings& settings = {}) {
    return overlap(a, BeamState::local(qa), b, BeamState::local(qb), settings);
}

// Row-major intensity samples on a square grid centred on the beam axis.
struct IntensityGrid {
    int size = 0;             // samples per side
    double half_width = 0.0;  // meters; grid spans [-half_width, half_width]
    std::vector<double> values;

    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * size + col]; }
    double max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }

    double coordinate(int index) const {
        return size == 1 ? 0.0 : -half_width + 2.0 * half_width * index / (size - 1);
    }
};

// Samples |E(x, y)|^2 for any transverse field functor E(r, phi).
template <class FieldFn>
IntensityGrid sample_intensity(FieldFn&& field, double half_width, int size) {
    if (size < 1 || !(half_width > 0.0)) throw invalid_input("sample_intensity: invalid grid");
    IntensityGrid grid{size, half_width, std::vector<double>(static_cast<std::size_t>(size) * size)};
    for (int row = 0; row < size; ++row) {
        const double y = grid.coordinate(size - 1 - row);  // first row is +y
        for (int col = 0; col < size; ++col) {
            const double x = grid.coordinate(col);
            grid.values[static_cast<std::size_t>(row) * size + col] =
                std::norm(field(std::hypot(x, y), std::atan2(y, x)));
        }
    }
    return grid;
}

inline IntensityGrid sample_intensity(const ModeSuperposition& psi, const BeamState& state, double half_width,
                                      int size) {
    return sample_intensity([&](double r, double phi) { return superposition_field(psi, state, r, phi); },
                            half_width, size);
}

}  // namespace gouy
