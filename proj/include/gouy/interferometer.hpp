#pragma once

// Two-arm Gouy-phase sorter: a lens arm and a free-space arm recombined on a
// symmetric 50/50 splitter.

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "beam.hpp"
#include "lg_mode.hpp"
#include "quadrature.hpp"

namespace gouy {

// Arms must have equal geometric length within this, unless overridden.
inline constexpr double arm_length_tolerance = 1e-9;

struct InterferometerConfig {
    OpticalPath arm_a;  // lens arm
    OpticalPath arm_b;  // free-space reference arm
    ComplexBeamParameter q_in;
    double ref_phase = 0.0;  // mode-independent offset applied to arm A
    QuadratureSettings quadrature{};
    bool allow_length_mismatch = false;
};

struct PortResult {
    double i1 = 0.0;
    double i2 = 0.0;
    double visibility = 0.0;      // (I1 - I2) / (I1 + I2)
    double visibility_abs = 0.0;  // |visibility|

    static PortResult from_intensities(double i1, double i2) {
        const double v = (i1 - i2) / (i1 + i2);
        return {i1, i2, v, std::abs(v)};
    }

    PortResult swapped() const { return from_intensities(i2, i1); }
};

struct ArmStates {
    BeamState a;
    BeamState b;
};

inline void check_arm_lengths(const InterferometerConfig& cfg) {
    if (!cfg.allow_length_mismatch &&
        std::abs(cfg.arm_a.length() - cfg.arm_b.length()) > arm_length_tolerance)
        throw invalid_input("interferometer: arm lengths differ (" + std::to_string(cfg.arm_a.length()) +
                            " m vs " + std::to_string(cfg.arm_b.length()) + " m)");
}

// Beam states at the recombination plane, carrying the accumulated Gouy phase.
inline ArmStates propagate_arms(const InterferometerConfig& cfg) {
    check_arm_lengths(cfg);
    const double g0 = gouy_phase(cfg.q_in);
    const auto ra = accumulate_gouy(cfg.q_in, cfg.arm_a);
    const auto rb = accumulate_gouy(cfg.q_in, cfg.arm_b);
    return {{ra.q_out, g0 + ra.gouy_accumulated}, {rb.q_out, g0 + rb.gouy_accumulated}};
}

// Accumulated Gouy phase of arm A minus arm B (unwrapped).
inline double arm_gouy_difference(const InterferometerConfig& cfg) {
    const auto s = propagate_arms(cfg);
    return s.a.gouy - s.b.gouy;
}

// Integrals over the recombination plane of the full-power arm fields a, b:
// |a|^2, |b|^2 and a*conj(b). Port intensities for any refPhase follow from these.
struct PortIntegrals {
    double power_a = 0.0;
    double power_b = 0.0;
    complex cross{};

    double input_power() const { return 0.5 * (power_a + power_b); }

    // E1 = (e^{i phi} E_A + E_B)/sqrt2, E2 = (e^{i phi} E_A - E_B)/sqrt2, E_A = a/sqrt2, E_B = b/sqrt2.
    PortResult at(double ref_phase) const {
        const double interference = 2.0 * (std::polar(1.0, ref_phase) * cross).real();
        const double sum = power_a + power_b;
        // Clamped so roundoff cannot produce a negative intensity.
        return PortResult::from_intensities(std::max(0.0, 0.25 * (sum + interference)),
                                            std::max(0.0, 0.25 * (sum - interference)));
    }
};

inline PortIntegrals port_integrals(const ArmStates& arms, const ModeSuperposition& psi,
                                    const QuadratureSettings& settings) {
    const FieldOptions opts{.axial_phase = false};
    const double r_max = std::max(truncation_radius(arms.a.q, psi.max_order()),
                                  truncation_radius(arms.b.q, psi.max_order()));
    PortIntegrals out;
    for (const auto& [ell, modes] : detail::group_by_ell(psi)) {
        auto integrand = [&](double r) {
            const complex a = detail::radial_sum(modes, arms.a, r, opts);
            const complex b = detail::radial_sum(modes, arms.b, r, opts);
            const complex x = a * std::conj(b);
            return std::array<double, 4>{std::norm(a) * r, std::norm(b) * r, x.real() * r, x.imag() * r};
        };
        const auto res = integrate(integrand, 0.0, r_max, settings).value;
        out.power_a += 2.0 * pi * res[0];
        out.power_b += 2.0 * pi * res[1];
        out.cross += 2.0 * pi * complex{res[2], res[3]};
    }
    return out;
}

inline PortIntegrals port_integrals(const InterferometerConfig& cfg, const ModeSuperposition& psi) {
    return port_integrals(propagate_arms(cfg), psi, cfg.quadrature);
}

inline PortResult simulate_port_fields(const InterferometerConfig& cfg, const ModeSuperposition& psi) {
    if (psi.empty() || !psi.is_normalized())
        throw invalid_input("simulate_port_fields: mode superposition must be non-empty and normalized");
    return port_integrals(cfg, psi).at(cfg.ref_phase);
}

inline PortResult simulate_port_fields(const InterferometerConfig& cfg, const LGMode& mode) {
    return simulate_port_fields(cfg, ModeSuperposition{LGMode{mode.p, mode.ell}});
}

struct PortSplit {
    double f1;
    double f2;
};

// Ideal port fractions for perfectly matched q: theta = m*dphi + refPhase.
inline PortSplit analytic_port_split(double delta_gouy, double ref_phase, const LGMode& mode) {
    const double theta = mode.order() * delta_gouy + ref_phase;
    const double c = std::cos(0.5 * theta);
    const double f1 = c * c;
    return {f1, 1.0 - f1};
}

// refPhase in [0, 2pi) maximizing the visibility of a mode with known port integrals;
// the optimum sends the mode to port 1.
inline double calibrate_ref_phase(const PortIntegrals& integrals) {
    const double sum = integrals.power_a + integrals.power_b;
    if (!(sum > 0.0) || std::abs(integrals.cross) <= 1e-12 * sum)
        throw optimization_error("calibrate_ref_phase: visibility does not depend on the reference phase");

    auto negative_visibility = [&](double phi) { return -integrals.at(phi).visibility; };

    constexpr int scan = 72;
    const double step = 2.0 * pi / scan;
    int best = 0;
    double best_value = negative_visibility(0.0);
    for (int i = 1; i < scan; ++i) {
        const double v = negative_visibility(i * step);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    const auto [phi, value] = boost::math::tools::brent_find_minima(
        negative_visibility, (best - 1) * step, (best + 1) * step, std::numeric_limits<double>::digits / 2);
    (void)value;
    return wrap_two_pi(phi);
}

inline double calibrate_ref_phase(const InterferometerConfig& cfg, const LGMode& mode) {
    return calibrate_ref_phase(port_integrals(cfg, ModeSuperposition{LGMode{mode.p, mode.ell}}));
}

struct MisalignmentSpec {
    double w0_actual;
    double z_offset = 0.0;  // Re(q_in) at the first element
    double d1_error = 0.0;
    double d2_error = 0.0;
    LGMode calibration_mode{};
};

// Replaces the input beam and lengthens the first two free-space gaps of arm A
// by the distance errors; arm B grows by the same total so the arms stay equal.
inline InterferometerConfig apply_misalignment(const InterferometerConfig& cfg, const MisalignmentSpec& mis) {
    if (!(mis.w0_actual > 0.0)) throw invalid_input("apply_misalignment: w0_actual must be positive");
    InterferometerConfig out = cfg;
    out.q_in = ComplexBeamParameter::from_waist(mis.w0_actual, cfg.q_in.wavelength(), mis.z_offset);

    auto shift_free_space = [](const OpticalPath& path, std::vector<double> errors) {
        std::vector<OpticalElement> elements(path.elements().begin(), path.elements().end());
        std::size_t next = 0;
        for (auto& e : elements) {
            if (next == errors.size()) break;
            if (auto* fs = std::get_if<FreeSpace>(&e)) e = free_space(fs->distance + errors[next++]);
        }
        if (next != errors.size()) throw invalid_input("apply_misalignment: arm has too few free-space gaps");
        return OpticalPath{std::move(elements)};
    };

    if (mis.d1_error != 0.0 || mis.d2_error != 0.0) {
        out.arm_a = shift_free_space(cfg.arm_a, {mis.d1_error, mis.d2_error});
        out.arm_b = shift_free_space(cfg.arm_b, {mis.d1_error + mis.d2_error});
    }
    return out;
}

struct SweepEntry {
    LGMode mode;
    PortResult result;
};

// Applies the misalignment, calibrates refPhase on the calibration mode, and
// reports each mode's ports at that phase.
inline std::vector<SweepEntry> visibility_sweep(const InterferometerConfig& cfg, const MisalignmentSpec& mis,
                                                std::span<const LGMode> modes) {
    InterferometerConfig actual = apply_misalignment(cfg, mis);
    const ArmStates arms = propagate_arms(actual);
    const auto cal = ModeSuperposition{LGMode{mis.calibration_mode.p, mis.calibration_mode.ell}};
    actual.ref_phase = calibrate_ref_phase(port_integrals(arms, cal, actual.quadrature));

    std::vector<SweepEntry> out;
    out.reserve(modes.size());
    for (const auto& m : modes) {
        const auto psi = ModeSuperposition{LGMode{m.p, m.ell}};
        out.push_back({LGMode{m.p, m.ell}, port_integrals(arms, psi, actual.quadrature).at(actual.ref_phase)});
    }
    return out;
}

// Port intensity images at the recombination plane.
inline std::pair<IntensityGrid, IntensityGrid> port_intensity_images(const InterferometerConfig& cfg,
                                                                     const ModeSuperposition& psi,
                                                                     double half_width, int size) {
    const ArmStates arms = propagate_arms(cfg);
    const FieldOptions opts{.axial_phase = false};
    const complex shift = std::polar(1.0, cfg.ref_phase);
    auto port = [&](double sign) {
        return sample_intensity(
            [&](double r, double phi) {
                const complex a = superposition_field(psi, arms.a, r, phi, opts);
                const complex b = superposition_field(psi, arms.b, r, phi, opts);
                return 0.5 * (shift * a + sign * b);
            },
            half_width, size);
    };
    return {port(1.0), port(-1.0)};
}

}  // namespace gouy
