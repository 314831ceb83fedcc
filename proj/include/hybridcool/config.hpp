#pragma once

// Run configuration: named presets, a small TOML-style key/value reader and
// the layering preset < file < command-line overrides.
//
// File format:
//
//     preset = "fig6"          # optional base preset
//     [params]
//     kappa = 300
//     [sweep]
//     axis1 = "g1as"
//     axis1_min = 0.25
//
// Keys are flattened to "section.key". Parameter names may also be given
// bare ("kappa = 300" outside any section, or "--set kappa=300").

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "exact.hpp"
#include "model.hpp"

namespace hybridcool {

struct Axis {
    std::string param;
    real min = 0.0;
    real max = 1.0;
    std::size_t count = 2;
    bool log_scale = false;
};

struct SpectrumGrid {
    real min = -1.5;
    real max = 1.5;
    std::size_t count = 3001;
};

/// Sweep outputs. Unselected outputs are omitted from the CSV.
struct OutputSet {
    bool n0 = true;
    bool contributions = true;
    bool stability = true;
    bool qnoise_prediction = true;
};

struct RunConfig {
    std::string preset;
    SystemParams params;
    SpectrumGrid spectrum;
    std::optional<Axis> axis1;
    std::optional<Axis> axis2;
    OutputSet outputs;
    QuadratureSpec quad;
};

struct Preset {
    std::string name;
    std::string description;
    RunConfig config;
};

namespace detail {

inline SystemParams base_params()
{
    SystemParams p;
    p.omega0 = 0.7;
    p.omega1 = 1.0;
    p.kappa = 300.0;
    p.gamma0 = 1e-6;
    p.gamma1 = 1e-6;
    p.g0as = 0.1;
    p.g1as = 0.3;
    p.delta = 0.5;
    p.nth0 = 100.0;
    p.nth1 = 100.0;
    return p;
}

} // namespace detail

/// Built-in parameter sets. Sweep axes for the heatmaps are reconstructions
/// chosen to contain every annotated feature.
inline const std::vector<Preset>& presets()
{
    static const std::vector<Preset> all = [] {
        std::vector<Preset> v;

        {
            Preset p{"fig2", "spectrum of the dressed cavity, target off resonance (omega0 = 0.7)", {}};
            p.config.params = detail::base_params();
            p.config.spectrum = {-1.2, 1.2, 2401};
            v.push_back(p);
        }
        {
            Preset p{"fig3", "spectrum at delta = omega0/2 (omega0 = 0.76, delta = 0.38)", {}};
            p.config.params = detail::base_params();
            p.config.params.omega0 = 0.76;
            p.config.params.delta = 0.38;
            p.config.spectrum = {-1.2, 1.2, 2401};
            v.push_back(p);
        }
        {
            Preset p{"fig4a", "unresolved regime kappa = 300; point inside the n0 < 0.05 region", {}};
            auto& c = p.config;
            c.params = detail::base_params();
            c.params.g1as = 0.336;
            c.params.g0as = 0.013;
            c.params.delta = 0.376;
            c.axis1 = Axis{"g0as", 0.005, 0.05, 46, false};
            c.axis2 = Axis{"delta", 0.3, 0.45, 31, false};
            v.push_back(p);
        }
        {
            Preset p{"fig4b", "unresolved regime kappa = 7000; point inside the n0 < 1.1 region", {}};
            auto& c = p.config;
            c.params = detail::base_params();
            c.params.kappa = 7000.0;
            c.params.g1as = 0.336;
            c.params.g0as = 0.03;
            c.params.delta = 0.37;
            c.axis1 = Axis{"g0as", 0.005, 0.1, 39, false};
            c.axis2 = Axis{"delta", 0.3, 0.45, 31, false};
            v.push_back(p);
        }
        {
            Preset p{"fig5", "G0 profile at omega0 = 0.76, delta = 0.377", {}};
            auto& c = p.config;
            c.params = detail::base_params();
            c.params.omega0 = 0.76;
            c.params.delta = 0.377;
            c.params.g0as = 0.01;
            c.axis1 = Axis{"g0as", 1e-4, 0.2, 34, true};
            v.push_back(p);
        }
        {
            Preset p{"fig6", "n0 over (g1as, delta) at G0 = 0.1", {}};
            auto& c = p.config;
            c.params = detail::base_params();
            c.params.g1as = 0.336;
            c.params.delta = 0.377;
            c.axis1 = Axis{"g1as", 0.25, 0.45, 21, false};
            c.axis2 = Axis{"delta", 0.3, 0.5, 21, false};
            v.push_back(p);
        }
        for (auto& p : v) p.config.preset = p.name;
        return v;
    }();
    return all;
}

inline const Preset& find_preset(std::string_view name)
{
    for (const auto& p : presets())
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
    throw Error(ErrorKind::config, "unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

// --- key/value reader -------------------------------------------------------

struct ConfigEntry {
    std::string key;   ///< flattened "section.key"
    std::string value; ///< unquoted
    std::string origin;
};

namespace detail {

inline std::string trim(std::string_view s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

/// Strips a trailing comment and surrounding quotes from a value.
inline std::string parse_value(std::string_view raw, const std::string& where)
{
    std::string v = trim(raw);
    if (!v.empty() && (v.front() == '"' || v.front() == '\'')) {
        const char q = v.front();
        const auto close = v.find(q, 1);
        if (close == std::string::npos) throw Error(ErrorKind::config, where + ": unterminated string");
        const std::string rest = trim(std::string_view(v).substr(close + 1));
        if (!rest.empty() && rest.front() != '#')
            throw Error(ErrorKind::config, where + ": trailing characters after string");
        return v.substr(1, close - 1);
    }
    const auto hash = v.find('#');
    if (hash != std::string::npos) v = trim(std::string_view(v).substr(0, hash));
    return v;
}

inline bool valid_key(std::string_view k)
{
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'))
            return false;
    return true;
}

} // namespace detail

inline std::vector<ConfigEntry> parse_config_text(std::string_view text, const std::string& origin)
{
    std::vector<ConfigEntry> out;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);

        std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t.front() == '[') {
            const auto close = t.find(']');
            if (close == std::string::npos) throw Error(ErrorKind::config, where + ": unterminated section header");
            section = detail::trim(std::string_view(t).substr(1, close - 1));
            if (!detail::valid_key(section)) throw Error(ErrorKind::config, where + ": bad section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::config, where + ": expected key = value");
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        if (!detail::valid_key(key)) throw Error(ErrorKind::config, where + ": bad key '" + key + "'");
        const std::string value = detail::parse_value(std::string_view(t).substr(eq + 1), where);
        out.push_back({section.empty() ? key : section + "." + key, value, where});
    }
    return out;
}

inline std::vector<ConfigEntry> read_config_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::config, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

/// Parses a "key=value" override.
inline ConfigEntry parse_override(std::string_view kv)
{
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos)
        throw Error(ErrorKind::config, "override '" + std::string(kv) + "' is not key=value");
    const std::string key = detail::trim(kv.substr(0, eq));
    if (!detail::valid_key(key)) throw Error(ErrorKind::config, "bad override key '" + key + "'");
    return {key, detail::parse_value(kv.substr(eq + 1), "--set " + key), "--set"};
}

// --- applying entries --------------------------------------------------------

namespace detail {

inline real to_real(const ConfigEntry& e)
{
    real v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    if (!e.value.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || e.value.empty())
        throw Error(ErrorKind::config, e.origin + ": '" + e.key + "' expects a number, got '" + e.value + "'");
    return v;
}

inline std::size_t to_count(const ConfigEntry& e)
{
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size() || e.value.empty())
        throw Error(ErrorKind::config, e.origin + ": '" + e.key + "' expects a non-negative integer, got '" + e.value + "'");
    return v;
}

inline bool to_bool(const ConfigEntry& e)
{
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw Error(ErrorKind::config, e.origin + ": '" + e.key + "' expects true or false");
}

inline void apply_axis(std::optional<Axis>& axis, std::string_view field, const ConfigEntry& e)
{
    if (field.empty()) {
        if (e.value.empty() || e.value == "none") {
            axis.reset();
            return;
        }
        if (!axis) axis = Axis{};
        axis->param = e.value;
        return;
    }
    if (!axis) axis = Axis{};
    if (field == "_min") axis->min = to_real(e);
    else if (field == "_max") axis->max = to_real(e);
    else if (field == "_count") axis->count = to_count(e);
    else if (field == "_scale") {
        if (e.value == "log") axis->log_scale = true;
        else if (e.value == "linear") axis->log_scale = false;
        else throw Error(ErrorKind::config, e.origin + ": axis scale must be 'linear' or 'log'");
    } else
        throw Error(ErrorKind::config, e.origin + ": unknown key '" + e.key + "'");
}

inline OutputSet parse_outputs(const ConfigEntry& e)
{
    OutputSet o{false, false, false, false};
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item == "n0") o.n0 = true;
        else if (item == "contributions") o.contributions = true;
        else if (item == "stability") o.stability = true;
        else if (item == "qnoise_prediction") o.qnoise_prediction = true;
        else if (!item.empty())
            throw Error(ErrorKind::config, e.origin + ": unknown output '" + item + "'");
    }
    return o;
}

} // namespace detail

/// Applies one entry to `cfg`; "preset" entries are handled by the caller.
inline void apply_entry(RunConfig& cfg, const ConfigEntry& e)
{
    std::string_view key = e.key;
    if (key.starts_with("params.")) key.remove_prefix(7);
    if (is_param_name(key)) {
        *param_field(cfg.params, key) = detail::to_real(e);
        return;
    }
    if (key == "spectrum.min") cfg.spectrum.min = detail::to_real(e);
    else if (key == "spectrum.max") cfg.spectrum.max = detail::to_real(e);
    else if (key == "spectrum.count") cfg.spectrum.count = detail::to_count(e);
    else if (key.starts_with("sweep.axis1")) detail::apply_axis(cfg.axis1, key.substr(11), e);
    else if (key.starts_with("sweep.axis2")) detail::apply_axis(cfg.axis2, key.substr(11), e);
    else if (key == "sweep.outputs") cfg.outputs = detail::parse_outputs(e);
    else if (key == "quad.rel_tol") cfg.quad.rel_tol = detail::to_real(e);
    else if (key == "quad.abs_tol") cfg.quad.abs_tol = detail::to_real(e);
    else if (key == "quad.tail_factor") cfg.quad.tail_factor = detail::to_real(e);
    else if (key == "quad.max_evaluations") cfg.quad.max_evaluations = detail::to_count(e);
    else if (key == "quad.route") {
        if (e.value == "linear_solve") cfg.quad.route = CoefficientRoute::linear_solve;
        else if (e.value == "closed_form") cfg.quad.route = CoefficientRoute::closed_form;
        else throw Error(ErrorKind::config, e.origin + ": quad.route must be linear_solve or closed_form");
    } else
        throw Error(ErrorKind::config, e.origin + ": unknown key '" + e.key + "'");
}

/// Layers preset < file < overrides. An explicit `preset_flag` wins over a
/// preset named in the file.
inline RunConfig assemble_config(const std::optional<std::string>& preset_flag,
                                 const std::vector<ConfigEntry>& file_entries,
                                 const std::vector<ConfigEntry>& overrides)
{
    std::optional<std::string> preset = preset_flag;
    std::vector<ConfigEntry> rest;
    for (const auto& e : file_entries) {
        if (e.key == "preset") {
            if (!preset) preset = e.value;
        } else
            rest.push_back(e);
    }
    RunConfig cfg;
    if (preset) cfg = find_preset(*preset).config;
    for (const auto& e : rest) apply_entry(cfg, e);
    for (const auto& e : overrides) {
        if (e.key == "preset") throw Error(ErrorKind::config, "use --preset to select a preset");
        apply_entry(cfg, e);
    }
    if (!(cfg.quad.rel_tol > 0.0) || !(cfg.quad.tail_factor >= 1.0))
        throw Error(ErrorKind::config, "quadrature needs rel_tol > 0 and tail_factor >= 1");
    return cfg;
}

/// Throws a config error listing every violated parameter invariant.
inline void require_valid(const SystemParams& p)
{
    const auto report = validate(p);
    if (report.valid()) return;
    std::string msg = "invalid parameters:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    msg.pop_back();
    throw Error(ErrorKind::config, msg);
}

} // namespace hybridcool
