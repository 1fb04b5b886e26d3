// fluxon: evaluate the singular expansion of the magnetostatic potential and
// field near a surface point flux source, and run the numerical verification
// suites. Emits CSV or JSON tables.

#include "fluxon/fluxon.hpp"
#include "fluxon/run_config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using fluxon::RunConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// RFC-4180-style field quoting; numeric fields pass through unquoted.
std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_escape(fields[i]);
    }
    os << '\n';
}

double parse_phi0(const std::string& s) { return fluxon::parse_phi0_value(s); }
fluxon::Vec3 parse_point(const std::string& s) { return fluxon::parse_triple(s); }

struct OutputStream {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit OutputStream(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw fluxon::Error("cannot open output file '" + path + "'");
            os = &file;
        }
    }
    std::ostream& get() { return *os; }
};

// ---------------------------------------------------------------------------
// Subcommand runners.
// ---------------------------------------------------------------------------

struct EvalSetup {
    fluxon::Charge charge;
    fluxon::LocalFrame frame;
    fluxon::ExpansionParams params;
};

EvalSetup make_setup(const RunConfig& cfg) {
    const fluxon::Charge charge(cfg.nu, parse_phi0(cfg.phi0));
    const fluxon::NamedSurface surf = fluxon::parse_surface_spec(cfg.surface);
    const fluxon::LocalFrame frame = fluxon::build_local_frame(surf.patch, cfg.u0, cfg.v0);
    double d = cfg.gauge_d;
    if (d <= 0) d = surf.default_gauge_length.value_or(1.0);
    return {charge, frame, fluxon::ExpansionParams::from_frame(charge, frame, d)};
}

int run_eval(const RunConfig& cfg, bool field_mode) {
    const EvalSetup setup = make_setup(cfg);
    if (cfg.points.empty()) throw fluxon::Error("at least one --point is required");

    OutputStream out(cfg.output);
    json rows = json::array();
    std::vector<std::vector<std::string>> csv_rows;

    for (const std::string& ps : cfg.points) {
        const fluxon::LocalPoint p(parse_point(ps));
        const fluxon::Spherical sph = fluxon::to_spherical(p);
        if (field_mode) {
            const fluxon::FieldVector B = fluxon::b_field_singular(p, setup.charge, setup.params);
            rows.push_back(json{{"x", p.x()}, {"y", p.y()}, {"z", p.z()},
                                {"r", sph.r}, {"theta", sph.theta}, {"phi", sph.phi},
                                {"B_r", B.B_r}, {"B_theta", B.B_theta}, {"B_phi", B.B_phi},
                                {"B_mag", B.norm()}});
            csv_rows.push_back({fmt17(p.x()), fmt17(p.y()), fmt17(p.z()), fmt17(sph.r),
                                fmt17(sph.theta), fmt17(sph.phi), fmt17(B.B_r),
                                fmt17(B.B_theta), fmt17(B.B_phi), fmt17(B.norm())});
        } else {
            const fluxon::PotentialBreakdown b =
                fluxon::psi_singular(p, setup.charge, setup.params);
            rows.push_back(json{{"x", p.x()}, {"y", p.y()}, {"z", p.z()},
                                {"r", sph.r}, {"theta", sph.theta}, {"phi", sph.phi},
                                {"psi0", b.psi0}, {"psi1s", b.psi1s}, {"psi1r", b.psi1r},
                                {"total", b.total}});
            csv_rows.push_back({fmt17(p.x()), fmt17(p.y()), fmt17(p.z()), fmt17(sph.r),
                                fmt17(sph.theta), fmt17(sph.phi), fmt17(b.psi0),
                                fmt17(b.psi1s), fmt17(b.psi1r), fmt17(b.total)});
        }
    }

    if (cfg.format == "json") {
        json doc{{"schema", 1},
                 {"command", field_mode ? "field" : "eval"},
                 {"config", cfg.to_json()},
                 {"frame", {{"k_x", setup.frame.k_x},
                            {"k_y", setup.frame.k_y},
                            {"rotation_angle", setup.frame.rotation_angle},
                            {"d", setup.params.d}}},
                 {"rows", rows}};
        out.get() << doc.dump(2) << '\n';
    } else {
        out.get() << "#schema=1\n";
        if (field_mode)
            write_csv_row(out.get(), {"x", "y", "z", "r", "theta", "phi", "B_r", "B_theta",
                                      "B_phi", "B_mag"});
        else
            write_csv_row(out.get(), {"x", "y", "z", "r", "theta", "phi", "psi0", "psi1s",
                                      "psi1r", "total"});
        for (const auto& row : csv_rows) write_csv_row(out.get(), row);
    }
    return kExitOk;
}

int run_check(const RunConfig& cfg) {
    static const std::vector<std::string> all = {"harmonicity", "boundary", "hankel", "flux",
                                                 "rhs"};
    std::vector<std::string> suites;
    if (cfg.check_suite == "all")
        suites = all;
    else
        suites.push_back(cfg.check_suite);

    OutputStream out(cfg.output);
    bool all_pass = true;
    json reports = json::array();
    for (const std::string& name : suites) {
        fluxon::CheckReport rep;
        try {
            rep = fluxon::run_check(name);
        } catch (const fluxon::Error& e) {
            rep.name = name;
            rep.pass = false;
            rep.worst_point = e.what();
        }
        all_pass = all_pass && rep.pass;
        reports.push_back(rep.to_json());
    }

    if (cfg.format == "json") {
        json doc{{"schema", 1}, {"command", "check"}, {"pass", all_pass}, {"checks", reports}};
        out.get() << doc.dump(2) << '\n';
    } else {
        out.get() << "#schema=1\n";
        write_csv_row(out.get(), {"check", "pass", "metric", "value"});
        for (const auto& rep : reports) {
            for (auto it = rep["metrics"].begin(); it != rep["metrics"].end(); ++it)
                write_csv_row(out.get(), {rep["check"].get<std::string>(),
                                          rep["pass"].get<bool>() ? "1" : "0", it.key(),
                                          fmt17(it.value().get<double>())});
        }
    }
    return all_pass ? kExitOk : kExitCheckFailed;
}

int run_sphere_compare(const RunConfig& cfg) {
    const fluxon::Charge charge(cfg.nu, parse_phi0(cfg.phi0));
    fluxon::RemainderOptions opt;
    opt.theta = cfg.theta;
    opt.gauge_d = cfg.gauge_d;
    opt.curvature_scale = cfg.curvature_scale;
    opt.r_lo_factor = cfg.r_lo;
    opt.r_hi_factor = cfg.r_hi;
    opt.n = cfg.n_points;
    const auto curve = fluxon::remainder_analysis(cfg.sphere_a, charge, opt);

    OutputStream out(cfg.output);
    if (cfg.format == "json") {
        json rows = json::array();
        for (const auto& pt : curve) rows.push_back(json{{"r", pt.r}, {"remainder", pt.remainder}});
        json doc{{"schema", 1},
                 {"command", "sphere-compare"},
                 {"config", cfg.to_json()},
                 {"cauchy_slope", fluxon::remainder_cauchy_slope(cfg.sphere_a, charge, opt)},
                 {"rows", rows}};
        out.get() << doc.dump(2) << '\n';
    } else {
        out.get() << "#schema=1\n";
        write_csv_row(out.get(), {"r", "remainder"});
        for (const auto& pt : curve) write_csv_row(out.get(), {fmt17(pt.r), fmt17(pt.remainder)});
    }
    return kExitOk;
}

int run_smear(const RunConfig& cfg) {
    const fluxon::Charge charge(cfg.nu, parse_phi0(cfg.phi0));
    const double d = cfg.gauge_d > 0 ? cfg.gauge_d : 1.0;
    const fluxon::ExpansionParams params(charge, cfg.k_x, cfg.k_y, d);
    OutputStream out(cfg.output);

    if (!cfg.w_sweep.empty()) {
        // Origin-value sweep over the core width; the curvature part of the
        // origin value follows K_plus ln(w) once the planar reference is
        // subtracted.
        const fluxon::Vec3 sweep = parse_point(cfg.w_sweep);
        const int n = static_cast<int>(sweep.z());
        if (n < 2) throw fluxon::Error("--w-sweep needs wmin,wmax,n with n >= 2");
        const fluxon::ExpansionParams planar(charge, 0.0, 0.0, d);
        std::vector<double> lws, deltas;
        json rows = json::array();
        std::vector<std::vector<std::string>> csv_rows;
        for (double w : fluxon::log_spaced(sweep.x(), sweep.y(), n)) {
            const auto density = fluxon::SmearDensity::gaussian(charge, w);
            const fluxon::LocalPoint origin(0, 0, 0);
            const double value = fluxon::smeared_potential(density, params, origin);
            const double reference = fluxon::smeared_potential(density, planar, origin);
            lws.push_back(std::log(w));
            deltas.push_back(value - reference);
            rows.push_back(json{{"w", w}, {"origin_value", value},
                                {"planar_reference", reference},
                                {"curvature_delta", value - reference}});
            csv_rows.push_back({fmt17(w), fmt17(value), fmt17(reference),
                                fmt17(value - reference)});
        }
        const double log_coeff = fluxon::fit_line(lws, deltas).slope;
        if (cfg.format == "json") {
            json doc{{"schema", 1},       {"command", "smear"},
                     {"config", cfg.to_json()}, {"fitted_log_coefficient", log_coeff},
                     {"K_plus", params.K_plus}, {"rows", rows}};
            out.get() << doc.dump(2) << '\n';
        } else {
            out.get() << "#schema=1\n";
            write_csv_row(out.get(), {"w", "origin_value", "planar_reference",
                                      "curvature_delta"});
            for (const auto& row : csv_rows) write_csv_row(out.get(), row);
        }
        return kExitOk;
    }

    if (cfg.points.empty()) throw fluxon::Error("smear needs --point entries or --w-sweep");
    const auto density = fluxon::SmearDensity::gaussian(charge, cfg.width);
    json rows = json::array();
    std::vector<std::vector<std::string>> csv_rows;
    for (const std::string& ps : cfg.points) {
        const fluxon::LocalPoint p(parse_point(ps));
        const double smeared = fluxon::smeared_potential(density, params, p);
        double point_total = std::numeric_limits<double>::quiet_NaN();
        if (!p.at_origin()) point_total = fluxon::psi_singular(p, charge, params).total;
        const double rel = (p.at_origin() || point_total == 0.0)
                               ? std::numeric_limits<double>::quiet_NaN()
                               : (smeared - point_total) / point_total;
        rows.push_back(json{{"x", p.x()}, {"y", p.y()}, {"z", p.z()},
                            {"smeared", smeared}, {"point_total", point_total},
                            {"rel_diff", rel}});
        csv_rows.push_back({fmt17(p.x()), fmt17(p.y()), fmt17(p.z()), fmt17(smeared),
                            fmt17(point_total), fmt17(rel)});
    }
    if (cfg.format == "json") {
        json doc{{"schema", 1}, {"command", "smear"}, {"config", cfg.to_json()}, {"rows", rows}};
        out.get() << doc.dump(2) << '\n';
    } else {
        out.get() << "#schema=1\n";
        write_csv_row(out.get(), {"x", "y", "z", "smeared", "point_total", "rel_diff"});
        for (const auto& row : csv_rows) write_csv_row(out.get(), row);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular expansion of the magnetostatic potential near a "
                 "surface point flux source"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_charge_flags = [&](CLI::App* sub) {
        sub->add_option("--nu", cfg.nu, "charge sign, +1 or -1");
        sub->add_option("--phi0", cfg.phi0, "flux quantum value, or 'si'");
    };

    CLI::App* eval = app.add_subcommand("eval", "evaluate the potential breakdown at points");
    eval->add_option("--surface", cfg.surface, "surface spec, e.g. sphere:a=1")->required();
    eval->add_option("--point", cfg.points, "evaluation point x,y,z (repeatable)")->required();
    eval->add_option("--u0", cfg.u0, "charge parameter u0");
    eval->add_option("--v0", cfg.v0, "charge parameter v0");
    eval->add_option("--d", cfg.gauge_d, "gauge length (default: surface-specific)");
    add_charge_flags(eval);

    CLI::App* field = app.add_subcommand("field", "evaluate the singular magnetic field");
    field->add_option("--surface", cfg.surface)->required();
    field->add_option("--point", cfg.points)->required();
    field->add_option("--u0", cfg.u0);
    field->add_option("--v0", cfg.v0);
    field->add_option("--d", cfg.gauge_d);
    add_charge_flags(field);

    CLI::App* check = app.add_subcommand("check", "run a verification suite");
    check->add_option("suite", cfg.check_suite,
                      "harmonicity|boundary|hankel|flux|rhs|all")
        ->check(CLI::IsMember({"harmonicity", "boundary", "hankel", "flux", "rhs", "all"}));

    CLI::App* sphere = app.add_subcommand("sphere-compare",
                                          "remainder of the exact sphere solution vs the "
                                          "singular expansion");
    sphere->add_option("--a", cfg.sphere_a, "sphere radius");
    sphere->add_option("--theta", cfg.theta, "approach direction in (pi/2, pi]");
    sphere->add_option("--d", cfg.gauge_d, "gauge length (0: use 2a)");
    sphere->add_option("--curvature-scale", cfg.curvature_scale,
                       "scale factor on 1/a used by the expansion (negative control)");
    sphere->add_option("--rmin", cfg.r_lo, "smallest r in units of a");
    sphere->add_option("--rmax", cfg.r_hi, "largest r in units of a");
    sphere->add_option("--n", cfg.n_points, "number of log-spaced radii");
    add_charge_flags(sphere);

    CLI::App* smear = app.add_subcommand("smear", "finite-size fluxon smearing study");
    smear->add_option("--kx", cfg.k_x);
    smear->add_option("--ky", cfg.k_y);
    smear->add_option("--d", cfg.gauge_d);
    smear->add_option("--w", cfg.width, "density core width");
    smear->add_option("--point", cfg.points, "evaluation point x,y,z (repeatable)");
    smear->add_option("--w-sweep", cfg.w_sweep, "origin study: wmin,wmax,n");
    add_charge_flags(smear);

    for (CLI::App* sub : {eval, field, check, sphere, smear}) {
        sub->add_option("--output", cfg.output, "output file (default: stdout)");
        sub->add_option("--format", cfg.format)->check(CLI::IsMember({"csv", "json"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (eval->parsed()) { cfg.subcommand = "eval"; return run_eval(cfg, false); }
        if (field->parsed()) { cfg.subcommand = "field"; return run_eval(cfg, true); }
        if (check->parsed()) { cfg.subcommand = "check"; return run_check(cfg); }
        if (sphere->parsed()) { cfg.subcommand = "sphere-compare"; return run_sphere_compare(cfg); }
        if (smear->parsed()) { cfg.subcommand = "smear"; return run_smear(cfg); }
    } catch (const fluxon::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
