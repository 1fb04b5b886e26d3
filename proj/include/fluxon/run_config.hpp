#pragma once

#include "fluxon/common.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fluxon {

// Parsed CLI configuration. Serializable so a run is reproducible from its
// config alone; identical configs produce byte-identical outputs.
struct RunConfig {
    std::string subcommand;
    std::string surface = "plane";
    double u0 = 0.0, v0 = 0.0;
    int nu = 1;
    std::string phi0 = "1";  // numeric value, or "si"
    double gauge_d = 0.0;    // 0: surface default (sphere: 2a, otherwise 1)
    std::vector<std::string> points;
    std::string check_suite = "all";
    // sphere-compare
    double sphere_a = 1.0;
    double theta = 0.75 * kPi;
    double curvature_scale = 1.0;
    double r_lo = 1e-6, r_hi = 1e-1;
    int n_points = 14;
    // smear
    double k_x = 1.0, k_y = 1.0;
    double width = 1e-3;
    std::string w_sweep;  // "wmin,wmax,n"
    std::string output;   // empty: stdout
    std::string format = "csv";

    nlohmann::json to_json() const {
        return nlohmann::json{{"subcommand", subcommand},
                              {"surface", surface},
                              {"u0", u0},
                              {"v0", v0},
                              {"nu", nu},
                              {"phi0", phi0},
                              {"gauge_d", gauge_d},
                              {"points", points},
                              {"check_suite", check_suite},
                              {"sphere_a", sphere_a},
                              {"theta", theta},
                              {"curvature_scale", curvature_scale},
                              {"r_lo", r_lo},
                              {"r_hi", r_hi},
                              {"n_points", n_points},
                              {"k_x", k_x},
                              {"k_y", k_y},
                              {"width", width},
                              {"w_sweep", w_sweep},
                              {"output", output},
                              {"format", format}};
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        j.at("subcommand").get_to(c.subcommand);
        j.at("surface").get_to(c.surface);
        j.at("u0").get_to(c.u0);
        j.at("v0").get_to(c.v0);
        j.at("nu").get_to(c.nu);
        j.at("phi0").get_to(c.phi0);
        j.at("gauge_d").get_to(c.gauge_d);
        j.at("points").get_to(c.points);
        j.at("check_suite").get_to(c.check_suite);
        j.at("sphere_a").get_to(c.sphere_a);
        j.at("theta").get_to(c.theta);
        j.at("curvature_scale").get_to(c.curvature_scale);
        j.at("r_lo").get_to(c.r_lo);
        j.at("r_hi").get_to(c.r_hi);
        j.at("n_points").get_to(c.n_points);
        j.at("k_x").get_to(c.k_x);
        j.at("k_y").get_to(c.k_y);
        j.at("width").get_to(c.width);
        j.at("w_sweep").get_to(c.w_sweep);
        j.at("output").get_to(c.output);
        j.at("format").get_to(c.format);
        return c;
    }

    bool operator==(const RunConfig&) const = default;
};

inline double parse_phi0_value(const std::string& s) {
    if (s == "si" || s == "SI") return kFluxQuantumSI;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw Error("bad --phi0 value '" + s + "'");
    }
    if (pos != s.size()) throw Error("bad --phi0 value '" + s + "'");
    if (!(v > 0)) throw Error("--phi0 must be positive");
    return v;
}

inline Vec3 parse_triple(const std::string& s) {
    std::vector<double> vals;
    std::string::size_type start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const std::string item =
            s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            vals.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error("bad numeric component in '" + s + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (vals.size() != 3) throw Error("'" + s + "' must have exactly three components");
    return {vals[0], vals[1], vals[2]};
}

}  // namespace fluxon
