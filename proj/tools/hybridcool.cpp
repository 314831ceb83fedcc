// hybridcool: spectra, single-point cooling limits and parameter sweeps.
//
//   hybridcool presets
//   hybridcool spectrum --preset fig3 --out fig3.csv
//   hybridcool cool --preset fig4a --set delta=0.38
//   hybridcool sweep --config scan.toml --jobs 8 --out scan.csv
//
// Exit codes: 0 ok, 2 bad configuration, 3 unstable point, 4 no convergence.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridcool/hybridcool.hpp"

namespace hc = hybridcool;
using nlohmann::json;

namespace {

enum Exit { ok = 0, config_error = 2, unstable = 3, no_convergence = 4 };

struct CommonOptions {
    std::string preset;
    std::string config_file;
    std::vector<std::string> overrides;
    std::string out;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    double quad_tol = 0.0;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_jobs)
{
    cmd->add_option("--preset", o.preset, "built-in parameter set (see `presets`)");
    cmd->add_option("--config", o.config_file, "key = value configuration file");
    cmd->add_option("--set", o.overrides, "override, key=value (repeatable)");
    cmd->add_option("--out", o.out, "output path (default: standard output)");
    cmd->add_option("--quad-tol", o.quad_tol, "relative tolerance of the n0 integral")
        ->check(CLI::PositiveNumber);
    if (with_jobs)
        cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(1u, 4096u));
}

hc::RunConfig load(const CommonOptions& o)
{
    std::vector<hc::ConfigEntry> file;
    if (!o.config_file.empty()) file = hc::read_config_file(o.config_file);
    std::vector<hc::ConfigEntry> sets;
    for (const auto& s : o.overrides) sets.push_back(hc::parse_override(s));
    auto cfg = hc::assemble_config(o.preset.empty() ? std::nullopt : std::optional(o.preset), file, sets);
    if (o.quad_tol > 0.0) cfg.quad.rel_tol = o.quad_tol;
    hc::require_valid(cfg.params);
    return cfg;
}

/// Writes to --out, or stdout when it is empty.
template <class Fn>
void emit(const std::string& path, Fn&& write)
{
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    write(f);
    f.close();
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

json params_json(const hc::SystemParams& p)
{
    json j = json::object();
    for (auto n : hc::kParamNames) j[std::string(n)] = *hc::param_field(p, n);
    return j;
}

json axis_json(const std::optional<hc::Axis>& a)
{
    if (!a) return nullptr;
    return {{"param", a->param}, {"min", a->min}, {"max", a->max},
            {"count", a->count}, {"scale", a->log_scale ? "log" : "linear"}};
}

json cooling_json(const hc::CoolingResult& r)
{
    return {{"n0", r.n0}, {"n0_drive", r.n0_drive}, {"n0_local", r.n0_local},
            {"n0_ancilla", r.n0_ancilla}};
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

int cmd_presets()
{
    for (const auto& pr : hc::presets()) {
        const auto& c = pr.config;
        std::cout << pr.name << "  " << pr.description << '\n';
        for (auto n : hc::kParamNames)
            std::cout << "    " << n << " = " << hc::format_real(*hc::param_field(c.params, n)) << '\n';
        std::cout << "    spectrum = [" << hc::format_real(c.spectrum.min) << ", "
                  << hc::format_real(c.spectrum.max) << "] x " << c.spectrum.count << '\n';
        for (const auto* a : {&c.axis1, &c.axis2}) {
            if (!*a) continue;
            std::cout << "    " << (a == &c.axis1 ? "axis1" : "axis2") << " = " << (*a)->param << " ["
                      << hc::format_real((*a)->min) << ", " << hc::format_real((*a)->max) << "] x "
                      << (*a)->count << ((*a)->log_scale ? " log" : "") << '\n';
        }
    }
    return ok;
}

int cmd_spectrum(const CommonOptions& o)
{
    const auto cfg = load(o);
    emit(o.out, [&](std::ostream& os) { hc::write_spectrum_csv(os, cfg.params, cfg.spectrum); });
    return ok;
}

int cmd_cool(const CommonOptions& o)
{
    const auto cfg = load(o);
    const auto t0 = std::chrono::steady_clock::now();
    const auto& p = cfg.params;

    json rec;
    rec["params"] = params_json(p);
    const auto st = hc::stability(hc::build_drift(p));
    rec["stable"] = st.stable;
    rec["stability_margin"] = st.margin;
    if (!st.stable) {
        rec["verdict"] = "unstable";
        emit(o.out, [&](std::ostream& os) { os << rec.dump(2) << '\n'; });
        std::cerr << "hybridcool: unstable parameter point (margin " << st.margin << ")\n";
        return unstable;
    }

    const auto exact = hc::exact_n0(p, cfg.quad);
    const auto lyap = hc::lyapunov_n0(p);
    rec["verdict"] = "stable";
    rec["exact"] = cooling_json(exact);
    rec["exact"]["integration_error_estimate"] = exact.integration_error_estimate;
    rec["lyapunov"] = cooling_json(lyap);
    rec["lyapunov_rel_dev"] = relative(exact.n0, lyap.n0);
    try {
        const auto q = hc::qnoise_cooling_prediction(p);
        rec["qnoise"] = {{"n_opt0", q.n_opt0}, {"gamma_opt0", q.gamma_opt0}, {"n0_pred", q.n0_pred}};
        rec["qnoise_rel_dev"] = relative(q.n0_pred, exact.n0);
    } catch (const hc::Error& e) {
        rec["qnoise"] = nullptr;
        rec["qnoise_error"] = e.what();
    }
    rec["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit(o.out, [&](std::ostream& os) { os << rec.dump(2) << '\n'; });
    return ok;
}

int cmd_sweep(const CommonOptions& o)
{
    const auto cfg = load(o);
    const auto spec = hc::make_sweep_spec(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = hc::run_sweep(spec, o.jobs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    emit(o.out, [&](std::ostream& os) { hc::write_sweep_csv(os, rows, spec.outputs); });
    if (o.out.empty()) return ok;

    json meta;
    meta["tool"] = "hybridcool";
    meta["version"] = HYBRIDCOOL_VERSION;
    meta["preset"] = cfg.preset;
    meta["base"] = params_json(spec.base);
    meta["axis1"] = axis_json(spec.axis1);
    meta["axis2"] = axis_json(spec.axis2);
    meta["quadrature"] = {{"rel_tol", spec.quad.rel_tol},
                          {"abs_tol", spec.quad.abs_tol},
                          {"tail_factor", spec.quad.tail_factor},
                          {"max_evaluations", spec.quad.max_evaluations},
                          {"route", spec.quad.route == hc::CoefficientRoute::linear_solve ? "linear_solve"
                                                                                           : "closed_form"}};
    meta["outputs"] = {{"n0", spec.outputs.n0},
                       {"contributions", spec.outputs.contributions},
                       {"stability", spec.outputs.stability},
                       {"qnoise_prediction", spec.outputs.qnoise_prediction}};
    meta["jobs"] = o.jobs;
    meta["rows"] = rows.size();
    meta["wall_seconds"] = wall;
    json per_point = json::array();
    for (const auto& r : rows) per_point.push_back(r.wall_seconds);
    meta["point_wall_seconds"] = per_point;
    emit(o.out + ".meta.json", [&](std::ostream& os) { os << meta.dump(2) << '\n'; });
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cooling of a dispersively coupled oscillator assisted by a dissipatively coupled ancilla"};
    app.set_version_flag("--version", HYBRIDCOOL_VERSION);
    app.require_subcommand(1);

    CommonOptions opts;
    auto* presets = app.add_subcommand("presets", "list built-in parameter sets");
    auto* spectrum = app.add_subcommand("spectrum", "write g0^2 S_nn as CSV");
    auto* cool = app.add_subcommand("cool", "exact n0 at one parameter point, as JSON");
    auto* sweep = app.add_subcommand("sweep", "n0 over a 1D or 2D grid, as CSV");
    add_common(spectrum, opts, false);
    add_common(cool, opts, false);
    add_common(sweep, opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

    try {
        if (*presets) return cmd_presets();
        if (*spectrum) return cmd_spectrum(opts);
        if (*cool) return cmd_cool(opts);
        if (*sweep) return cmd_sweep(opts);
    } catch (const hc::Error& e) {
        std::cerr << "hybridcool: " << e.what() << '\n';
        switch (e.kind()) {
        case hc::ErrorKind::instability: return unstable;
        case hc::ErrorKind::convergence: return no_convergence;
        case hc::ErrorKind::config:
        case hc::ErrorKind::domain: return config_error;
        }
    } catch (const std::exception& e) {
        std::cerr << "hybridcool: " << e.what() << '\n';
        return 1;
    }
    return ok;
}
