#pragma once

// Physical parameters of the hybrid system and the elementary susceptibilities.
//
// All quantities are dimensionless, in units of the ancilla frequency omega1
// (conventionally omega1 = 1). Couplings enter only through the products
// G0 = g0 * alpha_s (dispersive) and G1 = g1 * alpha_s (dissipative).

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace hybridcool {

using real = double;
using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};

struct SystemParams {
    real omega0 = 1.0;  ///< target (dispersively coupled) oscillator frequency
    real omega1 = 1.0;  ///< ancilla (dissipatively coupled) oscillator frequency
    real kappa = 1.0;   ///< cavity line width
    real gamma0 = 1e-6; ///< intrinsic damping of the target
    real gamma1 = 1e-6; ///< intrinsic damping of the ancilla
    real g0as = 0.0;    ///< G0 = g0 * alpha_s
    real g1as = 0.0;    ///< G1 = g1 * alpha_s
    real delta = 0.0;   ///< laser detuning omega_d - omega_c
    real nth0 = 0.0;    ///< bath occupation of the target
    real nth1 = 0.0;    ///< bath occupation of the ancilla

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Field names in declaration order; this order is also the CSV column order.
inline constexpr std::array<std::string_view, 10> kParamNames{
    "omega0", "omega1", "kappa", "gamma0", "gamma1",
    "g0as",   "g1as",   "delta", "nth0",   "nth1"};

/// Pointer to the field called `name`, or nullptr. Works on const and
/// non-const parameter sets.
template <class Params>
auto param_field(Params& p, std::string_view name) -> decltype(&p.omega0)
{
    if (name == "omega0") return &p.omega0;
    if (name == "omega1") return &p.omega1;
    if (name == "kappa") return &p.kappa;
    if (name == "gamma0") return &p.gamma0;
    if (name == "gamma1") return &p.gamma1;
    if (name == "g0as") return &p.g0as;
    if (name == "g1as") return &p.g1as;
    if (name == "delta") return &p.delta;
    if (name == "nth0") return &p.nth0;
    if (name == "nth1") return &p.nth1;
    return nullptr;
}

inline bool is_param_name(std::string_view name)
{
    for (auto n : kParamNames)
        if (n == name) return true;
    return false;
}

struct ValidationReport {
    std::vector<std::string> violations;
    bool unresolved_sideband = false;

    bool valid() const noexcept { return violations.empty(); }
};

/// Lists every violated invariant. Never throws.
inline ValidationReport validate(const SystemParams& p)
{
    ValidationReport r;
    for (auto name : kParamNames) {
        if (!std::isfinite(*param_field(p, name)))
            r.violations.push_back(std::string(name) + " must be finite");
    }
    auto positive = [&](real v, const char* name) {
        if (!(v > 0.0)) r.violations.push_back(std::string(name) + " must be positive");
    };
    auto nonnegative = [&](real v, const char* name) {
        if (!(v >= 0.0)) r.violations.push_back(std::string(name) + " must be non-negative");
    };
    positive(p.kappa, "kappa");
    positive(p.omega0, "omega0");
    positive(p.omega1, "omega1");
    positive(p.gamma0, "gamma0");
    positive(p.gamma1, "gamma1");
    nonnegative(p.g0as, "g0as");
    nonnegative(p.g1as, "g1as");
    nonnegative(p.nth0, "nth0");
    nonnegative(p.nth1, "nth1");
    r.unresolved_sideband = p.kappa > p.omega0 && p.kappa > p.omega1;
    return r;
}

enum class Oscillator { target = 0, ancilla = 1 };

inline real frequency(const SystemParams& p, Oscillator k)
{
    return k == Oscillator::target ? p.omega0 : p.omega1;
}

inline real damping(const SystemParams& p, Oscillator k)
{
    return k == Oscillator::target ? p.gamma0 : p.gamma1;
}

// Inverse susceptibilities. The `_reflected` variants are the analytic
// continuation of conj(chi^-1(-w)) off the real axis, so the same expressions
// serve for complex w (pole searches).

inline cplx chi_c_inv(const SystemParams& p, cplx w)
{
    return p.kappa / 2.0 - I * (w + p.delta);
}

inline cplx chi_c_inv_reflected(const SystemParams& p, cplx w)
{
    return p.kappa / 2.0 - I * (w - p.delta);
}

inline cplx chi_osc_inv(const SystemParams& p, Oscillator k, cplx w)
{
    return damping(p, k) / 2.0 - I * (w - frequency(p, k));
}

inline cplx chi_osc_inv_reflected(const SystemParams& p, Oscillator k, cplx w)
{
    return damping(p, k) / 2.0 - I * (w + frequency(p, k));
}

/// Cavity susceptibility 1/(kappa/2 - i(w + delta)).
inline cplx chi_c(const SystemParams& p, real w) { return 1.0 / chi_c_inv(p, w); }

/// Mechanical susceptibility 1/(gamma_k/2 - i(w - omega_k)).
inline cplx chi_osc(const SystemParams& p, Oscillator k, real w)
{
    return 1.0 / chi_osc_inv(p, k, w);
}

} // namespace hybridcool
