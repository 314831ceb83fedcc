#pragma once

// Parameter sweeps over one or two axes and their CSV output.

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "exact.hpp"
#include "model.hpp"
#include "qnoise.hpp"

namespace hybridcool {

/// Shortest decimal string that reads back to the same double.
inline std::string format_real(real x)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string csv_quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += (c == '\n' || c == '\r') ? ' ' : c;
    }
    return out + "\"";
}

struct SweepSpec {
    SystemParams base;
    Axis axis1;
    std::optional<Axis> axis2;
    OutputSet outputs;
    QuadratureSpec quad;
};

inline void validate_axis(const Axis& a, const char* which)
{
    const std::string w = which;
    if (!is_param_name(a.param))
        throw Error(ErrorKind::config, w + ": unknown parameter '" + a.param + "'");
    if (a.count < 2) throw Error(ErrorKind::config, w + ": count must be >= 2");
    if (!(a.min < a.max)) throw Error(ErrorKind::config, w + ": requires min < max");
    if (a.log_scale && !(a.min > 0.0))
        throw Error(ErrorKind::config, w + ": log scale requires min > 0");
}

inline SweepSpec make_sweep_spec(const RunConfig& cfg)
{
    if (!cfg.axis1) throw Error(ErrorKind::config, "sweep needs sweep.axis1");
    SweepSpec s{cfg.params, *cfg.axis1, cfg.axis2, cfg.outputs, cfg.quad};
    validate_axis(s.axis1, "sweep.axis1");
    if (s.axis2) {
        validate_axis(*s.axis2, "sweep.axis2");
        if (s.axis2->param == s.axis1.param)
            throw Error(ErrorKind::config, "sweep axes must vary different parameters");
    }
    return s;
}

inline std::vector<real> axis_values(const Axis& a)
{
    if (!a.log_scale) return linspace(a.min, a.max, a.count);
    auto v = linspace(std::log(a.min), std::log(a.max), a.count);
    for (auto& x : v) x = std::exp(x);
    v.front() = a.min;
    v.back() = a.max;
    return v;
}

/// Parameter sets in output order: axis1 outer, axis2 inner.
inline std::vector<SystemParams> sweep_points(const SweepSpec& s)
{
    const auto v1 = axis_values(s.axis1);
    const std::vector<real> v2 = s.axis2 ? axis_values(*s.axis2) : std::vector<real>{};
    std::vector<SystemParams> pts;
    pts.reserve(v1.size() * std::max<std::size_t>(1, v2.size()));
    for (real a : v1) {
        SystemParams p = s.base;
        *param_field(p, s.axis1.param) = a;
        if (!s.axis2) {
            pts.push_back(p);
            continue;
        }
        for (real b : v2) {
            *param_field(p, s.axis2->param) = b;
            pts.push_back(p);
        }
    }
    return pts;
}

struct RunRecord {
    SystemParams params;
    bool stable = false;
    real stability_margin = 0.0;
    std::optional<CoolingResult> result;
    std::optional<real> n0_qnoise;
    std::string error; ///< empty iff `result` is set
    double wall_seconds = 0.0;
};

inline RunRecord evaluate_point(const SystemParams& p, const QuadratureSpec& quad,
                                bool with_qnoise = true)
{
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord r;
    r.params = p;
    try {
        const auto report = validate(p);
        if (!report.valid()) throw Error(ErrorKind::config, report.violations.front());
        const auto st = stability(build_drift(p));
        r.stable = st.stable;
        r.stability_margin = st.margin;
        if (!st.stable) {
            r.error = "unstable";
        } else {
            r.result = exact_n0(p, quad);
            if (with_qnoise) {
                try {
                    r.n0_qnoise = qnoise_cooling_prediction(p).n0_pred;
                } catch (const Error&) {
                    // heating or softened ancilla: no golden-rule prediction
                }
            }
        }
    } catch (const std::exception& e) {
        r.result.reset();
        r.error = e.what();
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Evaluates every grid point on `jobs` worker threads. Results are stored by
/// grid index, so the output does not depend on scheduling.
inline std::vector<RunRecord> run_sweep(const SweepSpec& s, unsigned jobs)
{
    const auto pts = sweep_points(s);
    std::vector<RunRecord> out(pts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < pts.size();)
            out[i] = evaluate_point(pts[i], s.quad, s.outputs.qnoise_prediction);
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(pts.size())));
    if (jobs == 1) {
        worker();
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    pool.clear();
    return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<RunRecord>& rows, const OutputSet& outs)
{
    for (auto n : kParamNames) os << n << ',';
    if (outs.stability) os << "stable,";
    if (outs.n0) os << "n0,";
    if (outs.contributions) os << "n0_drive,n0_local,n0_ancilla,";
    if (outs.qnoise_prediction) os << "n0_qnoise,";
    os << "error\n";

    auto opt = [](const std::optional<real>& v) { return v ? format_real(*v) : std::string(); };
    for (const auto& r : rows) {
        for (auto n : kParamNames) os << format_real(*param_field(r.params, n)) << ',';
        if (outs.stability) os << (r.stable ? "1" : "0") << ',';
        const auto& c = r.result;
        if (outs.n0) os << opt(c ? std::optional(c->n0) : std::nullopt) << ',';
        if (outs.contributions) {
            os << opt(c ? std::optional(c->n0_drive) : std::nullopt) << ','
               << opt(c ? std::optional(c->n0_local) : std::nullopt) << ','
               << opt(c ? std::optional(c->n0_ancilla) : std::nullopt) << ',';
        }
        if (outs.qnoise_prediction) os << (c ? opt(r.n0_qnoise) : std::string()) << ',';
        os << csv_quote(r.error) << '\n';
    }
}

/// Spectrum table: omega, gnn_full, gnn_bare, gnn_optical_part, gnn_thermal_part.
inline void write_spectrum_csv(std::ostream& os, const SystemParams& p, const SpectrumGrid& g)
{
    const auto grid = linspace(g.min, g.max, g.count);
    os << "omega,gnn_full,gnn_bare,gnn_optical_part,gnn_thermal_part\n";
    for (real w : grid) {
        const auto parts = source_decomposition(p, w);
        const real full = parts.optical + parts.thermal;
        const real bare = bare_nn_spectrum(p, w);
        if (!std::isfinite(full) || !std::isfinite(bare))
            throw Error(ErrorKind::convergence, "non-finite spectrum value at omega = " + format_real(w));
        os << format_real(w) << ',' << format_real(full) << ',' << format_real(bare) << ','
           << format_real(parts.optical) << ',' << format_real(parts.thermal) << '\n';
    }
}

} // namespace hybridcool
