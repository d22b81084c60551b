// gammaz: curvature tensors, curvature-dimension scans, Bochner-identity
// verification and entropy-dissipation runs for sub-Riemannian structures.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gammaz/bochner.hpp"
#include "gammaz/bound.hpp"
#include "gammaz/dynamics.hpp"
#include "gammaz/errors.hpp"
#include "gammaz/gamma.hpp"
#include "gammaz/kernels.hpp"
#include "gammaz/structure.hpp"

using nlohmann::json;
using namespace gammaz;

namespace {

constexpr int kExitVerification = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

struct StructureArgs {
    std::string config_path;
    std::string preset;
    std::vector<std::string> params;   // k=v
    std::string g_expr;                // se2 direction magnitude
    std::string V_expr;
};

void add_structure_flags(CLI::App* cmd, StructureArgs& a) {
    cmd->add_option("--config", a.config_path, "structure config file (JSON)");
    cmd->add_option("--preset", a.preset, "builtin structure: heisenberg|se2|martinet|ou1d");
    cmd->add_option("--param", a.params, "expression parameter k=v (repeatable)");
    cmd->add_option("--g", a.g_expr, "se2 vertical magnitude g(theta,x,y), default beta");
    cmd->add_option("--V", a.V_expr, "potential expression");
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects k=v, got '" + kv + "'");
        // allow g as a parameter spelling: --param g="..."
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return out;
}

SubRiemannianStructure load_config_file(const std::string& path,
                                        const std::map<std::string, double>& extra_params) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    std::map<std::string, double> params;
    if (j.contains("params"))
        for (auto& [k, v] : j["params"].items()) params[k] = v.get<double>();
    for (auto& [k, v] : extra_params) params[k] = v;

    SubRiemannianStructure s;
    if (j.contains("preset")) {
        s = make_preset(preset_from_name(j["preset"].get<std::string>()), params,
                        j.value("g", std::string{}));
    } else {
        s.n = j.at("n").get<int>();
        s.m = j.at("m").get<int>();
        s.coords = j.at("coords").get<std::vector<std::string>>();
        if (static_cast<int>(s.coords.size()) != s.n + s.m)
            throw ConfigError("coords must list n+m names");
        auto load_matrix = [&](const json& rows, int cols) {
            std::vector<Expression> out;
            if (static_cast<int>(rows.size()) != s.dim())
                throw ConfigError("matrix must have n+m rows");
            for (const auto& row : rows) {
                if (static_cast<int>(row.size()) != cols)
                    throw ConfigError("matrix row width mismatch");
                for (const auto& e : row) out.push_back(parse(e.get<std::string>(), s.coords, params));
            }
            return out;
        };
        s.a = load_matrix(j.at("a"), s.n);
        if (s.m > 0) s.z = load_matrix(j.at("z"), s.m);
        s.V = parse(j.value("V", "0"), s.coords, params);
        s.log_vol = parse(j.value("log_vol", "0"), s.coords, params);
    }
    if (j.contains("V")) s.V = parse(j["V"].get<std::string>(), s.coords, params);
    if (j.contains("log_vol")) s.log_vol = parse(j["log_vol"].get<std::string>(), s.coords, params);
    return s;
}

SubRiemannianStructure load_structure(const StructureArgs& a) {
    const std::map<std::string, double> params = parse_params(a.params);
    SubRiemannianStructure s;
    if (!a.config_path.empty()) {
        s = load_config_file(a.config_path, params);
    } else if (!a.preset.empty()) {
        s = make_preset(preset_from_name(a.preset), params, a.g_expr);
    } else {
        throw ConfigError("provide --config or --preset");
    }
    if (!a.V_expr.empty()) s = with_potential(std::move(s), a.V_expr, params);
    return s;
}

std::vector<double> parse_point(const std::string& text, int want) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (static_cast<int>(out.size()) != want)
        throw ConfigError("expected " + std::to_string(want) + " comma-separated values, got " +
                          std::to_string(out.size()));
    return out;
}

std::vector<std::pair<double, double>> parse_ranges(const std::string& text, int want) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw ConfigError("range token '" + tok + "' needs lo:hi");
        out.emplace_back(std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    }
    if (static_cast<int>(out.size()) != want)
        throw ConfigError("expected " + std::to_string(want) + " range tokens, got " +
                          std::to_string(out.size()));
    return out;
}

LambdaMode parse_mode(const std::string& text) {
    if (text == "preset") return LambdaMode::preset;
    if (text == "ls" || text == "least_squares") return LambdaMode::least_squares;
    throw ConfigError("--mode must be preset or ls");
}

json matrix_json(std::span<const double> A, int D) {
    json rows = json::array();
    for (int i = 0; i < D; ++i) {
        json row = json::array();
        for (int j = 0; j < D; ++j) row.push_back(A[static_cast<std::size_t>(i * D + j)]);
        rows.push_back(row);
    }
    return rows;
}

void print_matrix(std::ostream& os, const std::string& name, std::span<const double> A, int D) {
    os << name << ":\n";
    for (int i = 0; i < D; ++i) {
        os << "  [";
        for (int j = 0; j < D; ++j)
            os << (j ? ", " : " ") << A[static_cast<std::size_t>(i * D + j)];
        os << " ]\n";
    }
}

int cmd_tensor(const StructureArgs& sa, const std::string& point_text, const std::string& mode_text,
               bool as_json) {
    SubRiemannianStructure s = load_structure(sa);
    const std::vector<double> x = parse_point(point_text, s.dim());
    CurvatureMatrix cm = extract_A(s, x, parse_mode(mode_text));
    const double lmin = lambda_min(cm.A, cm.D);
    if (as_json) {
        json out;
        out["structure"] = std::string(preset_name(s.preset));
        out["point"] = x;
        out["A"] = matrix_json(cm.A, cm.D);
        out["A_rg_ab"] = matrix_json(cm.A_rg_ab, cm.D);
        out["A_zb"] = matrix_json(cm.A_zb, cm.D);
        out["A_rho"] = matrix_json(cm.A_rho, cm.D);
        out["lambda_min"] = lmin;
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout.precision(12);
        print_matrix(std::cout, "A", cm.A, cm.D);
        print_matrix(std::cout, "R^G_ab component", cm.A_rg_ab, cm.D);
        print_matrix(std::cout, "R_zb component", cm.A_zb, cm.D);
        print_matrix(std::cout, "R_rho* component", cm.A_rho, cm.D);
        std::cout << "lambda_min(A) = " << lmin << '\n';
    }
    return 0;
}

int cmd_scan(const StructureArgs& sa, const std::string& region_text, const std::string& grid_text,
             const std::string& out_path, const std::string& mode_text, int threads,
             bool keep_matrices) {
    SubRiemannianStructure s = load_structure(sa);
    const int D = s.dim();
    auto ranges = parse_ranges(region_text, D);
    std::vector<double> gridtok;
    {
        std::stringstream ss(grid_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) gridtok.push_back(std::stod(tok));
    }
    if (static_cast<int>(gridtok.size()) != D)
        throw ConfigError("--grid needs one token per coordinate");
    std::vector<ScanAxis> axes(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) {
        axes[static_cast<std::size_t>(d)] = {ranges[static_cast<std::size_t>(d)].first,
                                             ranges[static_cast<std::size_t>(d)].second,
                                             static_cast<int>(gridtok[static_cast<std::size_t>(d)])};
        if (axes[static_cast<std::size_t>(d)].cells < 1) throw ConfigError("--grid entries must be >= 1");
    }
    ScanResult r = scan_region(s, axes, parse_mode(mode_text), threads, keep_matrices);
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw ConfigError("cannot write '" + out_path + "'");
        write_scan_csv(f, r, s.coords);
    }
    json summary;
    summary["kappa"] = r.kappa;
    summary["argmin"] = r.argmin_point;
    summary["lambda_min_best"] = r.best;
    summary["argbest"] = r.argbest_point;
    summary["holes"] = r.holes;
    summary["cells"] = r.cell_count();
    if (!out_path.empty()) summary["csv"] = out_path;
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_verify(const StructureArgs& sa, int trials, std::uint64_t seed, const std::string& mode_text) {
    SubRiemannianStructure s = load_structure(sa);
    const int D = s.dim();
    const LambdaMode mode = parse_mode(mode_text);
    std::uint64_t state = seed;
    auto unit = [&state]() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z = z ^ (z >> 31);
        return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
    };
    double worst = 0.0;
    std::vector<double> worst_x;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(static_cast<std::size_t>(D));
        for (double& v : x) v = unit();
        Expression f = random_cubic_polynomial(s.coords, state);
        const double res = verify_bochner(s, f, x, mode);
        if (res > worst) { worst = res; worst_x = x; }
    }
    // invariant-measure identity on the same draw
    std::vector<double> pts(static_cast<std::size_t>(trials * D));
    for (double& v : pts) v = unit();
    const double inv_res = check_invariant_measure(s, pts, trials);
    json out;
    out["trials"] = trials;
    out["seed"] = seed;
    out["max_bochner_residual"] = worst;
    out["worst_point"] = worst_x;
    out["invariant_measure_residual"] = inv_res;
    const bool ok = worst <= 1e-8;
    out["pass"] = ok;
    std::cout << out.dump(2) << '\n';
    return ok ? 0 : kExitVerification;
}

int cmd_dissipate(const StructureArgs& sa, const std::string& box_text, const std::string& cells_text,
                  double t_end, double dt, int samples, const std::string& rho0_expr,
                  const std::string& out_path, double kappa_flag, int kappa_grid,
                  const std::string& dump_final) {
    if (!(t_end > 0.0)) throw ConfigError("--t-end must be positive");
    SubRiemannianStructure s = load_structure(sa);
    const int D = s.dim();
    auto ranges = parse_ranges(box_text, D);
    std::vector<double> lo, hi;
    for (auto& r : ranges) { lo.push_back(r.first); hi.push_back(r.second); }
    std::vector<int> cells;
    {
        std::stringstream ss(cells_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) cells.push_back(std::stoi(tok));
    }
    if (static_cast<int>(cells.size()) != D) throw ConfigError("--cells needs one count per coordinate");

    Expression rho0e;
    if (!rho0_expr.empty()) {
        rho0e = parse(rho0_expr, s.coords, parse_params(sa.params));
    } else {
        // centered-offset Gaussian bump scaled to the box
        std::ostringstream os;
        os << "exp(-(";
        for (int d = 0; d < D; ++d) {
            const double c = 0.5 * (lo[static_cast<std::size_t>(d)] + hi[static_cast<std::size_t>(d)]) +
                             (d == 0 ? 0.15 * (hi[0] - lo[0]) : 0.0);
            const double w = hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)];
            if (d) os << "+";
            os << "(" << s.coords[static_cast<std::size_t>(d)] << "-(" << c << "))^2/(2*(" << 0.25 * w
               << ")^2)";
        }
        os << "))";
        rho0e = parse(os.str(), s.coords);
    }
    DensityGrid rho0 = DensityGrid::from_expression(lo, hi, cells, rho0e);

    FpOptions opt;
    opt.t_end = t_end;
    opt.dt = dt;
    opt.samples = samples;
    FpResult res = fp_run(s, rho0, opt);

    double kappa = kappa_flag;
    if (std::isnan(kappa)) {
        std::vector<ScanAxis> axes(static_cast<std::size_t>(D));
        for (int d = 0; d < D; ++d)
            axes[static_cast<std::size_t>(d)] = {lo[static_cast<std::size_t>(d)], hi[static_cast<std::size_t>(d)], kappa_grid};
        ScanResult sr = scan_region(s, axes, LambdaMode::least_squares, 1, false);
        kappa = sr.kappa;
    }
    DissipationReport rep = verify_dissipation(res.diag, kappa);

    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw ConfigError("cannot write '" + out_path + "'");
        f << "# gammaz dissipate v1\n";
        f << "t,kl,fisher_az,l1\n";
        f.precision(17);
        for (std::size_t i = 0; i < res.diag.t.size(); ++i)
            f << res.diag.t[i] << ',' << res.diag.kl[i] << ',' << res.diag.fisher_az[i] << ','
              << res.diag.l1[i] << '\n';
    }
    if (!dump_final.empty()) save_density(res.rho, dump_final);

    json out;
    out["steps"] = res.steps;
    out["dt"] = res.dt;
    out["kernels"] = kernels::active_table().name;
    out["kl_initial"] = res.diag.kl.front();
    out["kl_final"] = res.diag.kl.back();
    out["mass_drift"] = res.diag.mass_drift;
    out["clip_events"] = res.diag.clip_events;
    out["kappa"] = kappa;
    out["kl_monotone"] = rep.monotone;
    out["pinsker_all"] = rep.all_pinsker;
    out["measured_rate"] = rep.measured_rate;
    if (rep.envelopes_checked) {
        out["envelope_kl_all"] = rep.all_env_kl;
        out["envelope_l1_all"] = rep.all_env_l1;
    } else {
        out["envelope_note"] = "kappa <= 0: only monotonicity asserted";
    }
    if (!out_path.empty()) out["csv"] = out_path;
    std::cout << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Gamma-z curvature tensors and dissipation bounds"};
    app.require_subcommand(1);

    StructureArgs sa_tensor, sa_scan, sa_verify, sa_diss;

    auto* tensor = app.add_subcommand("tensor", "print the curvature matrix A at a point");
    add_structure_flags(tensor, sa_tensor);
    std::string point_text, tensor_mode = "preset";
    bool tensor_json = false;
    tensor->add_option("--point", point_text, "evaluation point, comma separated")->required();
    tensor->add_option("--mode", tensor_mode, "shift-vector mode: preset|ls");
    tensor->add_flag("--json", tensor_json, "machine-readable output");

    auto* scan = app.add_subcommand("scan", "lambda_min(A) field over a region");
    add_structure_flags(scan, sa_scan);
    std::string region_text, grid_text, scan_out, scan_mode = "preset";
    int scan_threads = 1;
    bool scan_mats = false;
    scan->add_option("--region", region_text, "per-axis lo:hi, comma separated")->required();
    scan->add_option("--grid", grid_text, "per-axis cell counts")->required();
    scan->add_option("--out", scan_out, "CSV output path");
    scan->add_option("--mode", scan_mode, "shift-vector mode: preset|ls");
    scan->add_option("--threads", scan_threads, "scan parallelism");
    scan->add_flag("--matrices", scan_mats, "emit A entries per cell");

    auto* verify = app.add_subcommand("verify", "randomized Bochner-identity check");
    add_structure_flags(verify, sa_verify);
    int trials = 100;
    std::uint64_t seed = 1;
    std::string verify_mode = "ls";
    verify->add_option("--trials", trials, "number of random (point, f) draws");
    verify->add_option("--seed", seed, "RNG seed");
    verify->add_option("--mode", verify_mode, "shift-vector mode: preset|ls");

    auto* diss = app.add_subcommand("dissipate", "degenerate Fokker-Planck run with diagnostics");
    add_structure_flags(diss, sa_diss);
    std::string box_text, cells_text, rho0_expr, diss_out, dump_final;
    double t_end = 1.0, diss_dt = 0.0;
    double kappa_flag = std::nan("");
    int samples = 100, kappa_grid = 9;
    diss->add_option("--box", box_text, "per-axis lo:hi")->required();
    diss->add_option("--cells", cells_text, "per-axis cell counts")->required();
    diss->add_option("--t-end", t_end, "final time")->required();
    diss->add_option("--dt", diss_dt, "time step (omit for auto CFL)");
    diss->add_option("--samples", samples, "diagnostic samples");
    diss->add_option("--rho0", rho0_expr, "initial density expression (positive)");
    diss->add_option("--out", diss_out, "diagnostics CSV path");
    diss->add_option("--kappa", kappa_flag, "curvature constant for the envelopes");
    diss->add_option("--kappa-grid", kappa_grid, "scan resolution when kappa is computed");
    diss->add_option("--dump-final", dump_final, "write final density snapshot");

    // the finite-d branch is intentionally rejected: the trace term of the
    // curvature-dimension inequality is only defined here for d = infinity
    std::string d_flag;
    app.add_option("--d", d_flag, "")->group("");

    try {
        app.parse(argc, argv);
        if (!d_flag.empty())
            throw ConfigError("finite-dimension CD(kappa,d) is not evaluated; only d = infinity is defined");
        if (tensor->parsed()) return cmd_tensor(sa_tensor, point_text, tensor_mode, tensor_json);
        if (scan->parsed())
            return cmd_scan(sa_scan, region_text, grid_text, scan_out, scan_mode, scan_threads, scan_mats);
        if (verify->parsed()) return cmd_verify(sa_verify, trials, seed, verify_mode);
        if (diss->parsed())
            return cmd_dissipate(sa_diss, box_text, cells_text, t_end, diss_dt, samples, rho0_expr,
                                 diss_out, kappa_flag, kappa_grid, dump_final);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfig : 0;
    } catch (const SingularFrame& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const AssumptionUnsatisfied& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const NonpositiveKappa& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UnknownIdentifier& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
