#pragma once

// Text and JSON front-end parsing for the gouy tool. Lengths arrive in mm and
// phases in units of pi; everything is converted to SI here.

#include <gouy/gouy.hpp>

#include <json.hpp>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gouy::cli {

using nlohmann::json;

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline int parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || *end != '\0') throw invalid_input(what + ": '" + text + "' is not an integer");
    return static_cast<int>(v);
}

inline double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || !std::isfinite(v)) throw invalid_input(what + ": '" + text + "' is not a number");
    return v;
}

// "0:3", "0,2,5", "-3:3" or mixtures such as "0,4:6".
inline std::vector<int> parse_index_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            out.push_back(parse_int(item, what));
        } else {
            const int lo = parse_int(item.substr(0, colon), what);
            const int hi = parse_int(item.substr(colon + 1), what);
            if (hi < lo) throw invalid_input(what + ": empty range '" + item + "'");
            for (int i = lo; i <= hi; ++i) out.push_back(i);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

// "(2,0)", "(2,0)+(0,2)", "(1,0)-0.5*(3,0)". Weights are real; the result is normalized.
inline ModeSuperposition parse_superposition(const std::string& text) {
    std::vector<LGMode> terms;
    std::size_t i = 0;
    auto fail = [&](const std::string& why) { throw invalid_input("mode '" + text + "': " + why); };
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    bool first = true;
    while (true) {
        skip();
        if (i == text.size()) break;
        double sign = 1.0;
        if (text[i] == '+' || text[i] == '-') {
            sign = text[i] == '-' ? -1.0 : 1.0;
            ++i;
            skip();
        } else if (!first) {
            fail("expected '+' or '-' between terms");
        }
        double weight = 1.0;
        if (i < text.size() && text[i] != '(') {
            const auto star = text.find('*', i);
            if (star == std::string::npos) fail("expected '(p,l)'");
            weight = parse_double(text.substr(i, star - i), "mode weight");
            i = star + 1;
            skip();
        }
        if (i == text.size() || text[i] != '(') fail("expected '('");
        const auto close = text.find(')', i);
        if (close == std::string::npos) fail("missing ')'");
        const std::string inner = text.substr(i + 1, close - i - 1);
        const auto comma = inner.find(',');
        if (comma == std::string::npos) fail("expected '(p,l)'");
        terms.emplace_back(parse_int(inner.substr(0, comma), "p"), parse_int(inner.substr(comma + 1), "l"),
                           complex(sign * weight, 0.0));
        i = close + 1;
        first = false;
    }
    if (terms.empty()) fail("no terms");
    return ModeSuperposition{std::move(terms)}.normalized();
}

// CSV-safe label, e.g. "LG2_0+LG0_2" or "0.5*LG1_0".
inline std::string superposition_label(const ModeSuperposition& psi) {
    const auto t = psi.terms();
    const double first = std::abs(t.front().amplitude.real());
    std::string out;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double w = t[k].amplitude.real();
        if (k) out += w < 0 ? "-" : "+";
        else if (w < 0) out += "-";
        if (std::abs(std::abs(w) - first) > 1e-12) out += io::format_number(std::abs(w) / first, 6) + "*";
        out += "LG" + std::to_string(t[k].p) + "_" + std::to_string(t[k].ell);
    }
    return out;
}

inline std::vector<double> parse_number_list(const std::string& text, std::size_t expected, const std::string& what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_double(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start), what));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.size() != expected)
        throw invalid_input(what + ": expected " + std::to_string(expected) + " comma-separated values");
    return out;
}

inline std::vector<LGMode> mode_grid(const std::vector<int>& ps, const std::vector<int>& ells) {
    std::vector<LGMode> out;
    for (int ell : ells)
        for (int p : ps) out.emplace_back(p, ell);
    return out;
}

inline ComplexBeamParameter input_beam(double w0_mm, double lambda_nm, double z_mm = 0.0) {
    if (!(w0_mm > 0.0)) throw invalid_input("w0 must be positive");
    if (!(lambda_nm > 0.0)) throw invalid_input("wavelength must be positive");
    return ComplexBeamParameter::from_waist(w0_mm * 1e-3, lambda_nm * 1e-9, z_mm * 1e-3);
}

inline ThreeLensDesign design_mm(const std::vector<double>& lenses, const std::vector<double>& distances) {
    for (double f : lenses)
        if (f == 0.0) throw invalid_input("focal lengths must be nonzero");
    for (double d : distances)
        if (!(d > 0.0)) throw invalid_input("distances must be positive");
    return {lenses[0] * 1e-3, lenses[1] * 1e-3, lenses[2] * 1e-3, distances[0] * 1e-3, distances[1] * 1e-3};
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw invalid_input("config file '" + path + "': " + e.what());
    }
}

inline void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw invalid_input(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw invalid_input(where + ": unknown key '" + key + "'");
}

template <class T>
T json_get(const json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw invalid_input(where + ": missing or invalid '" + key + "'");
    }
}

inline LGMode json_mode(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw invalid_input(where + ": a mode is written [p, l]");
    return LGMode{j[0].get<int>(), j[1].get<int>()};
}

inline std::vector<LGMode> json_modes(const json& j, const std::string& where) {
    if (!j.is_array()) throw invalid_input(where + ": modes must be a list of [p, l]");
    std::vector<LGMode> out;
    for (const auto& m : j) out.push_back(json_mode(m, where));
    return out;
}

// Tree nodes: {} is a leaf. A stage is either analytic
//   {"delta_gouy_pi": -0.5, "ref_phase_pi": 0.5 | "target": [p, l], "port1": {...}, "port2": {...}}
// or a simulated three-lens interferometer
//   {"lenses_mm": [...], "distances_mm": [...], "ref_phase_pi": x | "calibrate": [p, l], ...}.
inline CascadeNode json_tree(const json& j, const ComplexBeamParameter& q_in, const std::string& where = "tree") {
    if (j.is_object() && j.empty()) return CascadeNode::leaf();
    require_keys(j, {"delta_gouy_pi", "ref_phase_pi", "target", "lenses_mm", "distances_mm", "calibrate", "port1", "port2"},
                 where);
    if (!j.contains("port1") || !j.contains("port2")) throw invalid_input(where + ": a stage needs port1 and port2");
    const bool analytic = j.contains("delta_gouy_pi");
    const bool simulated = j.contains("lenses_mm") || j.contains("distances_mm");
    if (analytic == simulated) throw invalid_input(where + ": give either delta_gouy_pi or lenses_mm/distances_mm");

    SorterStage stage;
    if (analytic) {
        const double dg = json_get<double>(j, "delta_gouy_pi", where) * pi;
        if (j.contains("ref_phase_pi") == j.contains("target"))
            throw invalid_input(where + ": give exactly one of ref_phase_pi or target");
        const double phase = j.contains("target") ? solve_stage_offset(dg, json_mode(j["target"], where))
                                                  : json_get<double>(j, "ref_phase_pi", where) * pi;
        stage = AnalyticStage{dg, phase};
    } else {
        const auto lenses = json_get<std::vector<double>>(j, "lenses_mm", where);
        const auto dists = json_get<std::vector<double>>(j, "distances_mm", where);
        if (lenses.size() != 3 || dists.size() != 2)
            throw invalid_input(where + ": lenses_mm needs 3 values and distances_mm 2");
        auto cfg = design_mm(lenses, dists).interferometer(q_in);
        if (j.contains("ref_phase_pi") == j.contains("calibrate"))
            throw invalid_input(where + ": give exactly one of ref_phase_pi or calibrate");
        cfg.ref_phase = j.contains("calibrate") ? calibrate_ref_phase(cfg, json_mode(j["calibrate"], where))
                                                : json_get<double>(j, "ref_phase_pi", where) * pi;
        stage = cfg;
    }
    return CascadeNode::split(std::move(stage), json_tree(j["port1"], q_in, where + ".port1"),
                              json_tree(j["port2"], q_in, where + ".port2"));
}

}  // namespace gouy::cli
