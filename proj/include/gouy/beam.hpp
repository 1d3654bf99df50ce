#pragma once

// Complex beam parameter algebra, ray-transfer propagation and accumulated Gouy phase.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace gouy {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// |C*q + D| below this is treated as an exact focus at the evaluation plane.
inline constexpr double singularity_tolerance = 1e-12;

inline double rayleigh_range(double waist, double wavelength) {
    if (!(waist > 0.0) || !(wavelength > 0.0))
        throw invalid_input("rayleigh_range: waist and wavelength must be positive");
    return pi * waist * waist / wavelength;
}

// q = z + i*zR, z measured from the waist (negative before it), SI units.
class ComplexBeamParameter {
public:
    ComplexBeamParameter(complex q, double wavelength) : q_(q), wavelength_(wavelength) {
        if (!(q.imag() > 0.0) || !std::isfinite(q.real()) || !std::isfinite(q.imag()))
            throw invalid_input("ComplexBeamParameter: Im(q) must be positive and finite");
        if (!(wavelength > 0.0)) throw invalid_input("ComplexBeamParameter: wavelength must be positive");
    }

    ComplexBeamParameter(double z, double rayleigh, double wavelength)
        : ComplexBeamParameter(complex{z, rayleigh}, wavelength) {}

    // Beam with waist radius w0 located a distance -z downstream of the reference plane.
    static ComplexBeamParameter from_waist(double waist, double wavelength, double z = 0.0) {
        return {z, rayleigh_range(waist, wavelength), wavelength};
    }

    complex q() const { return q_; }
    double z() const { return q_.real(); }
    double rayleigh() const { return q_.imag(); }
    double wavelength() const { return wavelength_; }
    double wave_number() const { return 2.0 * pi / wavelength_; }
    double waist() const { return std::sqrt(rayleigh() * wavelength_ / pi); }

    // w(z) = sqrt(-lambda / (pi * Im(1/q)))
    double spot_size() const { return std::sqrt(-wavelength_ / (pi * (1.0 / q_).imag())); }

    // 1/R(z) = Re(1/q); zero at the waist.
    double inverse_curvature() const { return (1.0 / q_).real(); }

private:
    complex q_;
    double wavelength_;
};

struct FreeSpace {
    double distance;
};

struct ThinLens {
    double focal_length;
};

using OpticalElement = std::variant<FreeSpace, ThinLens>;

inline OpticalElement free_space(double distance) {
    if (!(distance >= 0.0) || !std::isfinite(distance))
        throw invalid_input("free_space: distance must be finite and non-negative");
    return FreeSpace{distance};
}

inline OpticalElement thin_lens(double focal_length) {
    if (focal_length == 0.0 || !std::isfinite(focal_length))
        throw invalid_input("thin_lens: focal length must be finite and nonzero");
    return ThinLens{focal_length};
}

struct RayTransferMatrix {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    friend RayTransferMatrix operator*(const RayTransferMatrix& l, const RayTransferMatrix& r) {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
};

inline RayTransferMatrix matrix_of(const OpticalElement& e) {
    return std::visit(
        [](const auto& el) -> RayTransferMatrix {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, FreeSpace>)
                return {1.0, el.distance, 0.0, 1.0};
            else
                return {1.0, 0.0, -1.0 / el.focal_length, 1.0};
        },
        e);
}

// Bilinear map q' = (A q + B) / (C q + D).
inline ComplexBeamParameter apply(const RayTransferMatrix& m, const ComplexBeamParameter& q) {
    const complex den = m.c * q.q() + m.d;
    if (std::abs(den) < singularity_tolerance)
        throw singular_propagation("propagation is singular: |C*q + D| below tolerance");
    // Im q' = det(M) Im q / |Cq + D|^2, evaluated directly so roundoff in the
    // complex division cannot flip its sign.
    const double im = (m.a * m.d - m.b * m.c) * q.rayleigh() / std::norm(den);
    const complex out(((m.a * q.q() + m.b) / den).real(), im);
    if (!(out.imag() > 0.0)) throw singular_propagation("propagation produced Im(q) <= 0");
    return {out, q.wavelength()};
}

inline ComplexBeamParameter propagate_element(const ComplexBeamParameter& q, const OpticalElement& e) {
    if (const auto* fs = std::get_if<FreeSpace>(&e))
        return {q.q() + fs->distance, q.wavelength()};
    return apply(matrix_of(e), q);
}

// Local Gouy phase arctan(Re q / Im q), in (-pi/2, pi/2).
inline double gouy_phase(const ComplexBeamParameter& q) { return std::atan(q.z() / q.rayleigh()); }

class OpticalPath {
public:
    OpticalPath() = default;
    OpticalPath(std::initializer_list<OpticalElement> elements) : elements_(elements) {}
    explicit OpticalPath(std::vector<OpticalElement> elements) : elements_(std::move(elements)) {}

    OpticalPath& add(const OpticalElement& e) {
        elements_.push_back(e);
        return *this;
    }

    std::span<const OpticalElement> elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }

    // Geometric length; thin lenses contribute nothing.
    double length() const {
        double total = 0.0;
        for (const auto& e : elements_)
            if (const auto* fs = std::get_if<FreeSpace>(&e)) total += fs->distance;
        return total;
    }

    RayTransferMatrix system_matrix() const {
        RayTransferMatrix m;
        for (const auto& e : elements_) m = matrix_of(e) * m;
        return m;
    }

private:
    std::vector<OpticalElement> elements_;
};

struct PropagationResult {
    ComplexBeamParameter q_out;
    double gouy_accumulated;  // unwrapped, radians
};

inline PropagationResult accumulate_gouy(const ComplexBeamParameter& q_in, const OpticalPath& path) {
    ComplexBeamParameter q = q_in;
    double total = 0.0;
    for (const auto& e : path.elements()) {
        if (const auto* fs = std::get_if<FreeSpace>(&e)) {
            const double zr = q.rayleigh();
            total += std::atan((q.z() + fs->distance) / zr) - std::atan(q.z() / zr);
        }
        q = propagate_element(q, e);
    }
    return {q, total};
}

// Reduces an angle to (-pi, pi].
inline double wrap_pi(double angle) {
    double r = std::remainder(angle, 2.0 * pi);
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

// Reduces an angle modulo pi to (-pi/2, pi/2].
inline double wrap_half_pi(double angle) {
    double r = std::remainder(angle, pi);
    if (r <= -pi / 2.0) r += pi;
    return r;
}

// Reduces an angle to [0, 2*pi).
inline double wrap_two_pi(double angle) {
    double r = std::fmod(angle, 2.0 * pi);
    if (r < 0.0) r += 2.0 * pi;
    if (r >= 2.0 * pi) r = 0.0;
    return r;
}

}  // namespace gouy
