// gouy: configuration search, interferometer simulation, misalignment sweeps,
// cascade routing and the published-table comparison.
//
// Exit codes: 0 success, 1 invalid input, 2 empty search, 3 numerical failure.

#include "cli_parse.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

using namespace gouy;
using gouy::cli::json;

namespace {

constexpr int exit_invalid = 1;
constexpr int exit_empty = 2;
constexpr int exit_numerical = 3;

std::string fmt(double v, int sig = 10) { return io::format_number(v, sig); }

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

unsigned thread_cap(unsigned requested) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    if (const char* env = std::getenv("GOUY_THREADS")) {
        const int cap = cli::parse_int(env, "GOUY_THREADS");
        if (cap < 1) throw invalid_input("GOUY_THREADS must be a positive integer");
        n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("cannot write '" + path + "'");
    out << text;
}

std::string csv_text(const io::CsvTable& t) {
    std::ostringstream ss;
    io::write_csv(ss, t);
    return ss.str();
}

LGMode single_mode(const std::string& text) {
    const auto psi = cli::parse_superposition(text);
    if (psi.terms().size() != 1) throw invalid_input("'" + text + "' must be a single mode (p,l)");
    return LGMode{psi.terms()[0].p, psi.terms()[0].ell};
}

// ---- search -------------------------------------------------------------

struct SearchArgs {
    int target_n = 2;
    std::string catalog;
    double w0_mm = 1.0;
    double lambda_nm = 810.0;
    double phase_tol_pi = 0.01;
    double max_residual_mm = 1.0;
    int max_results = 20;
    unsigned threads = 0;
    std::string out;
};

int run_search(const SearchArgs& a) {
    SearchRequest req;
    if (a.target_n < 2) throw invalid_input("--target-n must be at least 2");
    req.target_n = a.target_n;
    req.q_in = cli::input_beam(a.w0_mm, a.lambda_nm);
    if (!a.catalog.empty()) {
        std::ifstream in(a.catalog);
        if (!in) throw invalid_input("cannot open catalog '" + a.catalog + "'");
        req.catalog = LensCatalog::parse(in);
    }
    if (!(a.phase_tol_pi >= 0.0)) throw invalid_input("--phase-tol must be non-negative");
    if (!(a.max_residual_mm >= 0.0)) throw invalid_input("--max-residual-mm must be non-negative");
    if (a.max_results < 0) throw invalid_input("--max-results must be non-negative");
    req.phase_tolerance = a.phase_tol_pi * pi;
    req.max_residual = a.max_residual_mm * 1e-3;
    req.max_results = a.max_results;
    req.threads = thread_cap(a.threads);

    const auto records = search(req);
    const auto table = io::search_table(
        records, {"gouy search", "target_n: " + std::to_string(req.target_n),
                  "catalog: " + (a.catalog.empty() ? std::string("standard") : a.catalog) + " (" +
                      std::to_string(req.catalog.size()) + " lenses)",
                  "w0_mm: " + fmt(a.w0_mm) + ", lambda_nm: " + fmt(a.lambda_nm) + ", focus at L1",
                  "phase_tol_pi: " + fmt(a.phase_tol_pi) + ", max_residual_mm: " + fmt(a.max_residual_mm) +
                      ", max_results: " + std::to_string(a.max_results),
                  "vis_pn is the calibrated visibility of LG(" + std::to_string(req.target_n) + ",0)",
                  "results: " + std::to_string(records.size())});
    emit(a.out, csv_text(table));
    if (records.empty()) {
        std::cerr << "search: no configuration matched\n";
        return exit_empty;
    }
    return 0;
}

// ---- simulate -----------------------------------------------------------

struct SimulateArgs {
    std::string lenses = "500,40,300";
    std::string distances = "560,343";
    double w0_mm = 1.0;
    double lambda_nm = 810.0;
    double z_mm = 0.0;
    std::string p = "0:3";
    std::string ell = "0";
    std::vector<std::string> modes;
    std::string calibrate;
    std::optional<double> ref_phase_pi;
    std::string images;
    std::string image_format = "pgm";
    int image_size = 129;
    double image_half_width_mm = 0.0;
    std::string out;
};

void write_images(const std::string& prefix, const std::string& format, const std::string& label,
                  const std::pair<IntensityGrid, IntensityGrid>& grids) {
    auto write = [&](const IntensityGrid& g, int port) {
        const std::string base = prefix + "_" + label + "_port" + std::to_string(port);
        if (format == "pgm" || format == "both") {
            std::ofstream f(base + ".pgm", std::ios::binary);
            if (!f) throw invalid_input("cannot write '" + base + ".pgm'");
            io::write_pgm(f, g);
        }
        if (format == "csv" || format == "both") {
            std::ofstream f(base + ".csv");
            if (!f) throw invalid_input("cannot write '" + base + ".csv'");
            io::write_intensity_csv(f, g);
        }
    };
    write(grids.first, 1);
    write(grids.second, 2);
}

int run_simulate(const SimulateArgs& a) {
    const auto lenses = cli::parse_number_list(a.lenses, 3, "--lenses-mm");
    const auto distances = cli::parse_number_list(a.distances, 2, "--distances-mm");
    auto cfg = cli::design_mm(lenses, distances).interferometer(cli::input_beam(a.w0_mm, a.lambda_nm, a.z_mm));

    std::vector<ModeSuperposition> rows;
    if (!a.modes.empty()) {
        for (const auto& m : a.modes) rows.push_back(cli::parse_superposition(m));
    } else {
        for (const auto& m : cli::mode_grid(cli::parse_index_list(a.p, "--p"), cli::parse_index_list(a.ell, "--ell")))
            rows.push_back(ModeSuperposition{m});
    }
    if (a.image_size < 1) throw invalid_input("--image-size must be positive");
    if (a.image_format != "pgm" && a.image_format != "csv" && a.image_format != "both")
        throw invalid_input("--image-format must be pgm, csv or both");

    // Reference phase per row: fixed, calibrated once, or calibrated on the first
    // listed mode of each azimuthal index (as when the piezo is re-adjusted per l).
    std::vector<double> phases(rows.size());
    std::string phase_note;
    auto first_term = [](const ModeSuperposition& psi) { return LGMode{psi.terms()[0].p, psi.terms()[0].ell}; };
    if (a.ref_phase_pi) {
        std::fill(phases.begin(), phases.end(), *a.ref_phase_pi * pi);
        phase_note = "given";
    } else if (a.calibrate == "per-l") {
        std::map<int, double> by_ell;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const LGMode lead = first_term(rows[i]);
            auto it = by_ell.find(lead.ell);
            if (it == by_ell.end()) it = by_ell.emplace(lead.ell, calibrate_ref_phase(cfg, lead)).first;
            phases[i] = it->second;
        }
        phase_note = "calibrated on the first listed mode of each l";
    } else {
        const LGMode cal = a.calibrate.empty() || a.calibrate == "first" ? first_term(rows.front()) : single_mode(a.calibrate);
        std::fill(phases.begin(), phases.end(), calibrate_ref_phase(cfg, cal));
        phase_note = "calibrated on LG(" + std::to_string(cal.p) + "," + std::to_string(cal.ell) + ")";
    }

    const auto arms = propagate_arms(cfg);
    io::CsvTable t{{"gouy simulate", "lenses_mm: " + join(lenses), "distances_mm: " + join(distances),
                    "w0_mm: " + fmt(a.w0_mm) + ", lambda_nm: " + fmt(a.lambda_nm) + ", waist_z_mm: " + fmt(a.z_mm),
                    "delta_gouy_over_pi: " + fmt((arms.a.gouy - arms.b.gouy) / pi) +
                        ", q_residual_m: " + fmt(std::abs(arms.a.q.q() - arms.b.q.q()), 6),
                    "ref phase " + phase_note},
                   {"mode", "p", "ell", "m", "ref_phase_pi", "I1", "I2", "visibility", "visibility_abs"},
                   {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& psi = rows[i];
        cfg.ref_phase = phases[i];
        const auto r = simulate_port_fields(cfg, psi);
        const bool single = psi.terms().size() == 1;
        const auto& t0 = psi.terms()[0];
        t.rows.push_back({cli::superposition_label(psi), single ? std::to_string(t0.p) : "",
                          single ? std::to_string(t0.ell) : "", single ? std::to_string(t0.order()) : "",
                          fmt(wrap_two_pi(cfg.ref_phase) / pi), fmt(r.i1), fmt(r.i2), fmt(r.visibility),
                          fmt(r.visibility_abs)});
        if (!a.images.empty()) {
            const double hw = a.image_half_width_mm > 0.0
                                  ? a.image_half_width_mm * 1e-3
                                  : 1.2 * truncation_radius(arms.b.q, psi.max_order());
            write_images(a.images, a.image_format, cli::superposition_label(psi),
                         port_intensity_images(cfg, psi, hw, a.image_size));
        }
    }
    emit(a.out, csv_text(t));
    return 0;
}

// ---- sweep --------------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::string lenses = "500,40,300";
    std::string distances = "560,343";
    double w0_mm = 1.0;
    double lambda_nm = 810.0;
    double w0_actual_mm = 0.96;
    double z_offset_mm = -200.0;
    double d1_error_mm = 3.0;
    double d2_error_mm = 3.0;
    std::string calibrate = "(2,0)";
    std::string p = "0:3";
    std::string ell = "0";
    std::string out;
};

int run_sweep(SweepArgs a, const CLI::App& sub) {
    std::vector<double> lenses = cli::parse_number_list(a.lenses, 3, "--lenses-mm");
    std::vector<double> distances = cli::parse_number_list(a.distances, 2, "--distances-mm");
    LGMode cal = single_mode(a.calibrate);
    std::vector<LGMode> modes = cli::mode_grid(cli::parse_index_list(a.p, "--p"), cli::parse_index_list(a.ell, "--ell"));

    if (!a.config.empty()) {
        // File values apply unless the matching flag was given explicitly.
        const json j = cli::read_json_file(a.config);
        cli::require_keys(j, {"lenses_mm", "distances_mm", "w0_mm", "lambda_nm", "w0_actual_mm", "z_offset_mm",
                              "d1_error_mm", "d2_error_mm", "calibrate", "modes"},
                          "sweep config");
        auto given = [&](const char* flag) { return sub.count(flag) > 0; };
        const std::string where = "sweep config";
        if (j.contains("lenses_mm") && !given("--lenses-mm")) lenses = cli::json_get<std::vector<double>>(j, "lenses_mm", where);
        if (j.contains("distances_mm") && !given("--distances-mm"))
            distances = cli::json_get<std::vector<double>>(j, "distances_mm", where);
        if (j.contains("w0_mm") && !given("--w0-mm")) a.w0_mm = cli::json_get<double>(j, "w0_mm", where);
        if (j.contains("lambda_nm") && !given("--lambda-nm")) a.lambda_nm = cli::json_get<double>(j, "lambda_nm", where);
        if (j.contains("w0_actual_mm") && !given("--w0-actual-mm"))
            a.w0_actual_mm = cli::json_get<double>(j, "w0_actual_mm", where);
        if (j.contains("z_offset_mm") && !given("--z-offset-mm"))
            a.z_offset_mm = cli::json_get<double>(j, "z_offset_mm", where);
        if (j.contains("d1_error_mm") && !given("--d1-error-mm"))
            a.d1_error_mm = cli::json_get<double>(j, "d1_error_mm", where);
        if (j.contains("d2_error_mm") && !given("--d2-error-mm"))
            a.d2_error_mm = cli::json_get<double>(j, "d2_error_mm", where);
        if (j.contains("calibrate") && !given("--calibrate")) cal = cli::json_mode(j["calibrate"], where);
        if (j.contains("modes") && !given("--p") && !given("--ell")) modes = cli::json_modes(j["modes"], where);
        if (lenses.size() != 3 || distances.size() != 2)
            throw invalid_input("sweep config: lenses_mm needs 3 values and distances_mm 2");
    }
    if (modes.empty()) throw invalid_input("sweep: no modes");

    const auto cfg = cli::design_mm(lenses, distances).interferometer(cli::input_beam(a.w0_mm, a.lambda_nm));
    const MisalignmentSpec mis{a.w0_actual_mm * 1e-3, a.z_offset_mm * 1e-3, a.d1_error_mm * 1e-3, a.d2_error_mm * 1e-3,
                               cal};
    const auto entries = visibility_sweep(cfg, mis, modes);
    const auto table = io::sweep_table(
        entries, {"gouy sweep", "lenses_mm: " + join(lenses), "distances_mm: " + join(distances),
                  "design beam: w0_mm " + fmt(a.w0_mm) + ", lambda_nm " + fmt(a.lambda_nm) + ", focus at L1",
                  "actual beam: w0_mm " + fmt(a.w0_actual_mm) + ", waist_z_mm " + fmt(a.z_offset_mm),
                  "distance errors_mm: d1 " + fmt(a.d1_error_mm) + ", d2 " + fmt(a.d2_error_mm),
                  "ref phase calibrated on LG(" + std::to_string(cal.p) + "," + std::to_string(cal.ell) + ")"});
    emit(a.out, csv_text(table));
    return 0;
}

// ---- cascade ------------------------------------------------------------

struct CascadeArgs {
    std::string config;
    int levels = 2;
    int ell = 0;
    std::string p;
    std::string out;
};

int run_cascade(const CascadeArgs& a) {
    CascadeNode tree;
    std::vector<LGMode> modes;
    std::vector<std::string> comments{"gouy cascade"};
    if (!a.config.empty()) {
        const json j = cli::read_json_file(a.config);
        cli::require_keys(j, {"w0_mm", "lambda_nm", "tree", "modes"}, "cascade config");
        const double w0 = j.contains("w0_mm") ? cli::json_get<double>(j, "w0_mm", "cascade config") : 1.0;
        const double lam = j.contains("lambda_nm") ? cli::json_get<double>(j, "lambda_nm", "cascade config") : 810.0;
        if (!j.contains("tree")) throw invalid_input("cascade config: missing 'tree'");
        tree = cli::json_tree(j["tree"], cli::input_beam(w0, lam));
        if (!j.contains("modes")) throw invalid_input("cascade config: missing 'modes'");
        modes = cli::json_modes(j["modes"], "cascade config");
        comments.push_back("tree: " + a.config);
    } else {
        if (a.levels < 0 || a.levels > 8) throw invalid_input("--levels must be between 0 and 8");
        tree = radial_sorter_tree(a.levels, a.ell);
        const std::string p = a.p.empty() ? "0:" + std::to_string((1 << a.levels) - 1) : a.p;
        for (int pi_ : cli::parse_index_list(p, "--p")) modes.emplace_back(pi_, a.ell);
        comments.push_back("tree: ideal radial sorter, levels " + std::to_string(a.levels) + ", ell " +
                           std::to_string(a.ell));
        comments.push_back("stage k uses delta_gouy = -pi/2^(k+1)");
    }
    comments.push_back("channels numbered depth-first, port 1 first");
    emit(a.out, csv_text(io::routing_table(routing_matrix(tree, modes), comments)));
    return 0;
}

// ---- table2 -------------------------------------------------------------

int run_table2(const std::string& out) {
    const auto q_in = ComplexBeamParameter::from_waist(1e-3, 810e-9);
    io::CsvTable t{{"gouy table2: published three-lens configurations against the thin-lens model",
                    "tolerances: phase 0.002 pi (modulo pi), distances 2 mm, visibilities 1 percentage point",
                    "model visibilities at the published distances, ref phase calibrated on LG(0,0)"},
                   {"n", "dg_pub_pi", "dg_model_pi", "dg_ok", "d1_pub_mm", "d2_pub_mm", "d1_solved_mm", "d2_solved_mm",
                    "d_ok", "v0_pub", "v0_model", "vn_pub", "vn_model", "vis_ok"},
                   {}};
    int passed = 0, checks = 0;
    auto flag = [&](bool ok) {
        ++checks;
        passed += ok;
        return std::string(ok ? "pass" : "FAIL");
    };
    for (const auto& row : published_configurations()) {
        const auto rec = evaluate_configuration(to_record(row), q_in);
        const double dg_err = std::abs(wrap_half_pi(rec.delta_gouy_unwrapped - row.delta_gouy_over_pi * pi));
        const auto sol = solve_distances(row.f1_mm * 1e-3, row.f2_mm * 1e-3, row.f3_mm * 1e-3, q_in);
        const double d1 = sol ? sol->d1 * 1e3 : std::nan("");
        const double d2 = sol ? sol->d2 * 1e3 : std::nan("");
        const bool d_ok = sol && std::abs(d1 - row.d1_mm) <= 2.0 && std::abs(d2 - row.d2_mm) <= 2.0;
        const bool v_ok = std::abs(rec.vis_p0 * 100 - row.vis_p0_percent) <= 1.0 &&
                          std::abs(rec.vis_pn * 100 - row.vis_pn_percent) <= 1.0;
        t.rows.push_back({std::to_string(row.n), fmt(row.delta_gouy_over_pi), fmt(rec.delta_gouy / pi, 6),
                          flag(dg_err <= 0.002 * pi), fmt(row.d1_mm), fmt(row.d2_mm), sol ? fmt(d1, 6) : "none",
                          sol ? fmt(d2, 6) : "none", flag(d_ok), fmt(row.vis_p0_percent), fmt(rec.vis_p0 * 100, 6),
                          fmt(row.vis_pn_percent), fmt(rec.vis_pn * 100, 6), flag(v_ok)});
    }
    t.comments.push_back("checks passed: " + std::to_string(passed) + " of " + std::to_string(checks));
    emit(out, csv_text(t));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gouy-phase mode sorter design and simulation"};
    app.require_subcommand(1);

    SearchArgs search_args;
    auto* s = app.add_subcommand("search", "Search the lens catalog for pi/n sorter configurations");
    s->add_option("--target-n", search_args.target_n, "Target delta Gouy phase pi/n (n >= 2)")->capture_default_str();
    s->add_option("--catalog", search_args.catalog, "Focal lengths in mm, one per line, '#' comments");
    s->add_option("--w0-mm", search_args.w0_mm, "Input waist at L1 (mm)")->capture_default_str();
    s->add_option("--lambda-nm", search_args.lambda_nm, "Wavelength (nm)")->capture_default_str();
    s->add_option("--phase-tol", search_args.phase_tol_pi, "Phase tolerance in units of pi")->capture_default_str();
    s->add_option("--max-residual-mm", search_args.max_residual_mm, "Largest accepted |qA - qB| (mm)")
        ->capture_default_str();
    s->add_option("--max-results", search_args.max_results, "Keep at most this many rows (0: all)")
        ->capture_default_str();
    s->add_option("--threads", search_args.threads, "Worker threads (0: all cores; GOUY_THREADS caps)");
    s->add_option("--out", search_args.out, "Output CSV (default stdout)");

    SimulateArgs sim;
    auto* m = app.add_subcommand("simulate", "Port intensities of a three-lens sorter");
    m->add_option("--lenses-mm", sim.lenses, "f1,f2,f3 in mm")->capture_default_str();
    m->add_option("--distances-mm", sim.distances, "d1,d2 in mm")->capture_default_str();
    m->add_option("--w0-mm", sim.w0_mm, "Input waist (mm)")->capture_default_str();
    m->add_option("--lambda-nm", sim.lambda_nm, "Wavelength (nm)")->capture_default_str();
    m->add_option("--waist-z-mm", sim.z_mm, "Position of L1 relative to the input waist (mm)")->capture_default_str();
    m->add_option("--p", sim.p, "Radial indices, e.g. 0:3 or 0,2")->capture_default_str();
    m->add_option("--ell", sim.ell, "Azimuthal indices, e.g. -2:2")->capture_default_str();
    m->add_option("--mode", sim.modes, "Mode or superposition, e.g. \"(2,0)+(0,2)\"; repeatable, overrides --p/--ell");
    m->add_option("--calibrate", sim.calibrate, "Calibration: (p,l), first (default: first row's mode) or per-l");
    m->add_option("--ref-phase-pi", sim.ref_phase_pi, "Fixed reference phase in units of pi")->excludes("--calibrate");
    m->add_option("--images", sim.images, "Write port images as PREFIX_<mode>_port<k>.<ext>");
    m->add_option("--image-format", sim.image_format, "pgm, csv or both")->capture_default_str();
    m->add_option("--image-size", sim.image_size, "Pixels per side")->capture_default_str();
    m->add_option("--image-half-width-mm", sim.image_half_width_mm, "Image half width (mm; 0: automatic)");
    m->add_option("--out", sim.out, "Output CSV (default stdout)");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "Visibilities under input-beam and distance errors");
    w->add_option("--config", sw.config, "JSON file with the same fields as the flags");
    w->add_option("--lenses-mm", sw.lenses, "f1,f2,f3 in mm")->capture_default_str();
    w->add_option("--distances-mm", sw.distances, "Design d1,d2 in mm")->capture_default_str();
    w->add_option("--w0-mm", sw.w0_mm, "Design input waist (mm)")->capture_default_str();
    w->add_option("--lambda-nm", sw.lambda_nm, "Wavelength (nm)")->capture_default_str();
    w->add_option("--w0-actual-mm", sw.w0_actual_mm, "Actual input waist (mm)")->capture_default_str();
    w->add_option("--z-offset-mm", sw.z_offset_mm, "Actual waist position relative to L1 (mm)")->capture_default_str();
    w->add_option("--d1-error-mm", sw.d1_error_mm, "Error added to d1 (mm)")->capture_default_str();
    w->add_option("--d2-error-mm", sw.d2_error_mm, "Error added to d2 (mm)")->capture_default_str();
    w->add_option("--calibrate", sw.calibrate, "Calibration mode (p,l)")->capture_default_str();
    w->add_option("--p", sw.p, "Radial indices")->capture_default_str();
    w->add_option("--ell", sw.ell, "Azimuthal indices")->capture_default_str();
    w->add_option("--out", sw.out, "Output CSV (default stdout)");

    CascadeArgs cas;
    auto* c = app.add_subcommand("cascade", "Routing matrix of a tree of sorters");
    c->add_option("--config", cas.config, "JSON file with tree and modes");
    c->add_option("--levels", cas.levels, "Depth of the ideal radial sorter tree")->capture_default_str();
    c->add_option("--ell", cas.ell, "Azimuthal index of the routed modes")->capture_default_str();
    c->add_option("--p", cas.p, "Radial indices (default 0 .. 2^levels - 1)");
    c->add_option("--out", cas.out, "Output CSV (default stdout)");

    std::string table_out;
    auto* t = app.add_subcommand("table2", "Compare the published configurations with the model");
    t->add_option("--out", table_out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid;
    }

    try {
        if (s->parsed()) return run_search(search_args);
        if (m->parsed()) return run_simulate(sim);
        if (w->parsed()) return run_sweep(sw, *w);
        if (c->parsed()) return run_cascade(cas);
        if (t->parsed()) return run_table2(table_out);
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_invalid;
}
