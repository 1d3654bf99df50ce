#pragma once

// Search over a discrete lens catalog and continuous gaps (D1, D2) for
// three-lens arms whose output q matches a free-space arm of length D1 + D2
// while accumulating a target Gouy phase difference of +-pi/n.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "beam.hpp"
#include "interferometer.hpp"

namespace gouy {

class LensCatalog {
public:
    LensCatalog() = default;

    explicit LensCatalog(std::vector<double> focal_lengths_mm) : focal_mm_(std::move(focal_lengths_mm)) {
        std::set<double> seen;
        for (double f : focal_mm_) {
            if (f == 0.0 || !std::isfinite(f)) throw invalid_input("LensCatalog: focal lengths must be finite and nonzero");
            if (!seen.insert(f).second) throw invalid_input("LensCatalog: duplicate focal length " + std::to_string(f));
        }
    }

    // Stock bi-convex and bi-concave lenses.
    static LensCatalog standard() {
        return LensCatalog{{25.4, 30, 35, 40, 50, 60, 75, 100, 125, 150, 175, 200, 250, 300, 400, 500, 750, 1000,
                            -50, -75, -100}};
    }

    // One focal length in mm per line; '#' starts a comment, blank lines ignored.
    static LensCatalog parse(std::istream& in) {
        std::vector<double> values;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            double v;
            if (!(ls >> v)) {
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw invalid_input("LensCatalog: cannot parse line " + std::to_string(line_no));
                continue;
            }
            std::string rest;
            if (ls >> rest) throw invalid_input("LensCatalog: trailing text on line " + std::to_string(line_no));
            values.push_back(v);
        }
        return LensCatalog{std::move(values)};
    }

    const std::vector<double>& focal_lengths_mm() const { return focal_mm_; }
    std::size_t size() const { return focal_mm_.size(); }
    bool empty() const { return focal_mm_.empty(); }

private:
    std::vector<double> focal_mm_;
};

// Lens arm [L f1, FS d1, L f2, FS d2, L f3] against free space d1 + d2. Meters.
struct ThreeLensDesign {
    double f1, f2, f3;
    double d1, d2;

    OpticalPath lens_arm() const {
        return {thin_lens(f1), free_space(d1), thin_lens(f2), free_space(d2), thin_lens(f3)};
    }
    OpticalPath reference_arm() const { return {free_space(d1 + d2)}; }

    InterferometerConfig interferometer(const ComplexBeamParameter& q_in, const QuadratureSettings& quad = {}) const {
        return {lens_arm(), reference_arm(), q_in, 0.0, quad, false};
    }
};

struct DistanceSolution {
    double d1;
    double d2;
    double residual;  // |q_A - q_B|, meters
};

struct DistanceSolveOptions {
    double min_distance = 0.010;
    double max_distance = 1.500;
    int grid = 25;               // grid x grid starting points
    int max_iterations = 100;
    double root_tolerance = 1e-9;  // residuals below this count as exact
    double max_residual = 1e-3;
};

namespace detail {

struct ArmResidual {
    complex r;   // q_A - q_B
    complex j1;  // d r / d d1
    complex j2;  // d r / d d2
};

inline complex thin_lens_map(complex q, double f, complex& derivative) {
    const complex den = 1.0 - q / f;
    if (std::abs(den) < singularity_tolerance) throw singular_propagation("thin lens focuses onto the next element");
    derivative = 1.0 / (den * den);
    return q / den;
}

inline ArmResidual arm_residual(complex q0, double f1, double f2, double f3, double d1, double d2) {
    complex g1, g2, g3;
    const complex q1 = thin_lens_map(q0, f1, g1);
    const complex q2 = thin_lens_map(q1 + d1, f2, g2);
    const complex q3 = thin_lens_map(q2 + d2, f3, g3);
    const complex qb = q0 + d1 + d2;
    return {q3 - qb, g3 * g2 - 1.0, g3 - 1.0};
}

// Levenberg-Marquardt on the two real equations Re/Im(q_A - q_B) = 0 within the box.
inline std::optional<DistanceSolution> refine_distances(complex q0, double f1, double f2, double f3, double d1,
                                                        double d2, const DistanceSolveOptions& opt) {
    auto clamp = [&](double d) { return std::clamp(d, opt.min_distance, opt.max_distance); };
    ArmResidual cur = arm_residual(q0, f1, f2, f3, d1, d2);
    double cost = std::norm(cur.r);
    double lambda = 1e-3;
    for (int it = 0; it < opt.max_iterations && cost > 0.0; ++it) {
        // J = [[Re j1, Re j2], [Im j1, Im j2]]
        const double a11 = std::norm(cur.j1);
        const double a22 = std::norm(cur.j2);
        const double a12 = (std::conj(cur.j1) * cur.j2).real();
        const double g1 = (std::conj(cur.j1) * cur.r).real();
        const double g2 = (std::conj(cur.j2) * cur.r).real();

        bool improved = false;
        while (lambda < 1e12) {
            const double m11 = a11 * (1.0 + lambda), m22 = a22 * (1.0 + lambda);
            const double det = m11 * m22 - a12 * a12;
            if (!(std::abs(det) > 0.0)) {
                lambda *= 10.0;
                continue;
            }
            const double s1 = clamp(d1 - (m22 * g1 - a12 * g2) / det);
            const double s2 = clamp(d2 - (m11 * g2 - a12 * g1) / det);
            ArmResidual trial;
            try {
                trial = arm_residual(q0, f1, f2, f3, s1, s2);
            } catch (const singular_propagation&) {
                lambda *= 10.0;
                continue;
            }
            const double trial_cost = std::norm(trial.r);
            if (trial_cost < cost) {
                const double step = std::hypot(s1 - d1, s2 - d2);
                d1 = s1;
                d2 = s2;
                cur = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = step > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    const double lo = opt.min_distance * (1.0 + 1e-9), hi = opt.max_distance * (1.0 - 1e-9);
    if (!(d1 > lo && d1 < hi && d2 > lo && d2 < hi)) return std::nullopt;
    return DistanceSolution{d1, d2, std::sqrt(cost)};
}

}  // namespace detail

// Every distinct local minimum of |q_A - q_B| reached from the grid of starts,
// ordered by residual (exact roots tie and are ordered by d1 + d2).
inline std::vector<DistanceSolution> solve_distances_all(double f1, double f2, double f3,
                                                         const ComplexBeamParameter& q_in,
                                                         const DistanceSolveOptions& opt = {}) {
    if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0) throw invalid_input("solve_distances: zero focal length");
    if (opt.grid < 1 || !(opt.min_distance > 0.0) || !(opt.max_distance > opt.min_distance))
        throw invalid_input("solve_distances: invalid solver options");
    std::vector<DistanceSolution> found;
    const int n = opt.grid;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double t1 = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
            const double t2 = n == 1 ? 0.5 : static_cast<double>(j) / (n - 1);
            const double d1 = opt.min_distance + t1 * (opt.max_distance - opt.min_distance);
            const double d2 = opt.min_distance + t2 * (opt.max_distance - opt.min_distance);
            std::optional<DistanceSolution> s;
            try {
                s = detail::refine_distances(q_in.q(), f1, f2, f3, d1, d2, opt);
            } catch (const singular_propagation&) {
                continue;
            }
            if (!s) continue;
            auto same = std::find_if(found.begin(), found.end(), [&](const DistanceSolution& o) {
                return std::abs(o.d1 - s->d1) < 1e-5 && std::abs(o.d2 - s->d2) < 1e-5;
            });
            if (same == found.end())
                found.push_back(*s);
            else if (s->residual < same->residual)
                *same = *s;
        }
    }
    const double tol = opt.root_tolerance;
    std::sort(found.begin(), found.end(), [tol](const DistanceSolution& a, const DistanceSolution& b) {
        const double ra = std::max(a.residual, tol), rb = std::max(b.residual, tol);
        if (ra != rb) return ra < rb;
        if (a.d1 + a.d2 != b.d1 + b.d2) return a.d1 + a.d2 < b.d1 + b.d2;
        return a.d1 < b.d1;
    });
    return found;
}

inline std::optional<DistanceSolution> solve_distances(double f1, double f2, double f3,
                                                       const ComplexBeamParameter& q_in,
                                                       const DistanceSolveOptions& opt = {}) {
    const auto all = solve_distances_all(f1, f2, f3, q_in, opt);
    if (all.empty() || all.front().residual > opt.max_residual) return std::nullopt;
    return all.front();
}

struct ConfigurationRecord {
    double f1 = 0.0, f2 = 0.0, f3 = 0.0;  // meters
    double d1 = 0.0, d2 = 0.0;            // meters
    double delta_gouy = 0.0;              // radians, reduced modulo pi to (-pi/2, pi/2]
    double delta_gouy_unwrapped = 0.0;    // radians, arm A minus arm B
    double q_residual = 0.0;              // meters
    double vis_p0 = 0.0;
    double vis_pn = 0.0;
    int target_n = 0;  // radial index used for vis_pn

    ThreeLensDesign design() const { return {f1, f2, f3, d1, d2}; }
};

struct ArmEvaluation {
    double delta_gouy_unwrapped;
    double q_residual;
    double ref_phase;  // calibrated on LG(0, 0)
    double vis_p0;
    double vis_pn;
};

// Gouy difference, q mismatch and calibrated visibilities of LG(0,0) and LG(n,0).
inline ArmEvaluation evaluate_interferometer(const InterferometerConfig& cfg, int target_n) {
    if (target_n < 0) throw invalid_input("evaluate: target radial index must be non-negative");
    const ArmStates arms = propagate_arms(cfg);
    const auto p0 = port_integrals(arms, ModeSuperposition::single(0, 0), cfg.quadrature);
    const double phase = calibrate_ref_phase(p0);
    const double vis_p0 = p0.at(phase).visibility_abs;
    const double vis_pn =
        target_n == 0 ? vis_p0
                      : port_integrals(arms, ModeSuperposition::single(target_n, 0), cfg.quadrature).at(phase).visibility_abs;
    return {arms.a.gouy - arms.b.gouy, std::abs(arms.a.q.q() - arms.b.q.q()), phase, vis_p0, vis_pn};
}

inline ConfigurationRecord evaluate_configuration(ConfigurationRecord rec, const ComplexBeamParameter& q_in,
                                                  const QuadratureSettings& quad = {}) {
    if (!(rec.d1 > 0.0) || !(rec.d2 > 0.0)) throw invalid_input("evaluate_configuration: distances must be positive");
    const auto ev = evaluate_interferometer(rec.design().interferometer(q_in, quad), rec.target_n);
    rec.delta_gouy_unwrapped = ev.delta_gouy_unwrapped;
    rec.delta_gouy = wrap_half_pi(ev.delta_gouy_unwrapped);
    rec.q_residual = ev.q_residual;
    rec.vis_p0 = ev.vis_p0;
    rec.vis_pn = ev.vis_pn;
    return rec;
}

// |(|dphi| mod pi) - pi/n| for dphi reduced to (-pi/2, pi/2].
inline double phase_target_error(double delta_gouy, int target_n) {
    return std::abs(std::abs(wrap_half_pi(delta_gouy)) - pi / target_n);
}

struct SearchRequest {
    int target_n = 2;
    ComplexBeamParameter q_in = ComplexBeamParameter::from_waist(1e-3, 810e-9);
    LensCatalog catalog = LensCatalog::standard();
    double phase_tolerance = 0.01 * pi;
    double max_residual = 1e-3;
    int max_results = 20;  // 0 keeps every match
    DistanceSolveOptions solver{};
    QuadratureSettings quadrature{};
    unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
    };
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
}

}  // namespace detail

// Matching configurations, best high-order visibility first. Output order does
// not depend on the number of threads.
inline std::vector<ConfigurationRecord> search(const SearchRequest& req) {
    if (req.target_n < 2) throw invalid_input("search: target n must be at least 2");
    if (!(req.phase_tolerance >= 0.0) || !(req.max_residual >= 0.0) || req.max_results < 0)
        throw invalid_input("search: invalid tolerances");
    const auto& lenses = req.catalog.focal_lengths_mm();
    const std::size_t n = lenses.size();
    const std::size_t triples = n * n * n;

    DistanceSolveOptions solver = req.solver;
    solver.max_residual = req.max_residual;

    std::vector<std::vector<ConfigurationRecord>> per_triple(triples);
    detail::parallel_for(triples, req.threads, [&](std::size_t t) {
        const double f1 = lenses[t / (n * n)] * 1e-3;
        const double f2 = lenses[(t / n) % n] * 1e-3;
        const double f3 = lenses[t % n] * 1e-3;
        for (const auto& s : solve_distances_all(f1, f2, f3, req.q_in, solver)) {
            if (s.residual > req.max_residual) continue;
            const ThreeLensDesign design{f1, f2, f3, s.d1, s.d2};
            double dg;
            try {
                dg = arm_gouy_difference(design.interferometer(req.q_in));
            } catch (const singular_propagation&) {
                continue;
            }
            if (phase_target_error(dg, req.target_n) > req.phase_tolerance) continue;
            ConfigurationRecord rec;
            rec.f1 = f1;
            rec.f2 = f2;
            rec.f3 = f3;
            rec.d1 = s.d1;
            rec.d2 = s.d2;
            rec.target_n = req.target_n;
            per_triple[t].push_back(rec);
        }
    });

    std::vector<ConfigurationRecord> candidates;
    for (auto& v : per_triple) candidates.insert(candidates.end(), v.begin(), v.end());

    detail::parallel_for(candidates.size(), req.threads, [&](std::size_t i) {
        candidates[i] = evaluate_configuration(candidates[i], req.q_in, req.quadrature);
    });

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const ConfigurationRecord& a, const ConfigurationRecord& b) { return a.vis_pn > b.vis_pn; });
    if (req.max_results > 0 && candidates.size() > static_cast<std::size_t>(req.max_results))
        candidates.resize(static_cast<std::size_t>(req.max_results));
    return candidates;
}

// Three-lens configurations for dphi = +-pi/n, 2 <= n <= 8, as published
// (lengths in mm, visibilities in percent).
struct PublishedConfiguration {
    int n;
    double delta_gouy_over_pi;
    double f1_mm, f2_mm, f3_mm;
    double d1_mm, d2_mm;
    double vis_p0_percent;
    double vis_pn_percent;
};

inline const std::vector<PublishedConfiguration>& published_configurations() {
    static const std::vector<PublishedConfiguration> rows = {
        {2, -0.501, 500, 40, 300, 555.6, 339.0, 99.96, 99.93},
        {3, 0.333, 400, 30, 300, 414.3, 316.2, 99.99, 99.98},
        {4, 0.251, 500, 40, 300, 502.7, 320.9, 99.91, 99.29},
        {5, 0.199, 300, 35, 400, 313.5, 395.8, 99.98, 98.55},
        {6, -0.166, 300, 75, 200, 485.3, 316.2, 99.83, 97.89},
        {7, -0.143, 150, 75, 300, 266.0, 155.4, 99.97, 96.57},
        {8, 0.124, 300, 30, 250, 294.6, 253.6, 99.80, 98.12},
    };
    return rows;
}

inline ConfigurationRecord to_record(const PublishedConfiguration& row) {
    ConfigurationRecord rec;
    rec.f1 = row.f1_mm * 1e-3;
    rec.f2 = row.f2_mm * 1e-3;
    rec.f3 = row.f3_mm * 1e-3;
    rec.d1 = row.d1_mm * 1e-3;
    rec.d2 = row.d2_mm * 1e-3;
    rec.target_n = row.n;
    return rec;
}

}  // namespace gouy
