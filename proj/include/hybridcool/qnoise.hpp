#pragma once

// Quantum-noise (golden-rule) description of the cooling: photon-number and
// force spectra, the optically dressed ancilla, and perturbative cooling
// predictions for the target oscillator.
//
// Every photon-number spectrum returned here is weighted by g0^2, i.e. it is
// g0^2 * S_nn[w] expressed through G0 = g0 alpha_s and G1 = g1 alpha_s.

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "summation.hpp"

namespace hybridcool {

/// g0^2 S_nn^0[w]: cavity-filtered shot noise without the ancilla.
inline real bare_nn_spectrum(const SystemParams& p, real w)
{
    const real x = w + p.delta;
    return p.g0as * p.g0as * p.kappa / (p.kappa * p.kappa / 4.0 + x * x);
}

/// Golden-rule occupation of plain dispersive sideband cooling. Requires red
/// detuning.
inline real dispersive_nopt(const SystemParams& p)
{
    if (!(p.delta < 0.0))
        throw Error(ErrorKind::domain, "dispersive n_opt defined for red detuning");
    const real x = p.omega0 + p.delta;
    return -(x * x + p.kappa * p.kappa / 4.0) / (4.0 * p.omega0 * p.delta);
}

inline real dispersive_gamma_opt(const SystemParams& p)
{
    return bare_nn_spectrum(p, p.omega0) - bare_nn_spectrum(p, -p.omega0);
}

/// Occupation reached when an optical bath (rate gamma_opt, occupation n_opt)
/// competes with a thermal bath (rate gamma, occupation n_th).
inline real thermal_mix(real n_opt, real gamma_opt, real n_th, real gamma)
{
    const real denom = gamma_opt + gamma;
    if (!(denom > 0.0))
        throw Error(ErrorKind::domain, "thermal_mix: total damping must be positive");
    return (gamma_opt * n_opt + gamma * n_th) / denom;
}

/// kappa G1^2 weighted force spectrum acting on the ancilla.
inline real force_spectrum(const SystemParams& p, real w)
{
    const real num = w + 2.0 * p.delta;
    const real x = w + p.delta;
    return p.kappa * p.g1as * p.g1as * num * num / (p.kappa * p.kappa / 4.0 + x * x);
}

/// Optically induced self-energy of the ancilla. Analytic in w.
inline cplx self_energy(const SystemParams& p, cplx w)
{
    const cplx plus = I * p.delta + p.kappa / 2.0;
    const cplx minus = I * p.delta - p.kappa / 2.0;
    return I * p.g1as * p.g1as *
           (plus * plus / chi_c_inv(p, w) - minus * minus / chi_c_inv_reflected(p, w));
}

/// alpha(w) = 1 - chi_c(w) (i delta + kappa/2).
inline cplx aux_alpha(const SystemParams& p, cplx w)
{
    return 1.0 - (I * p.delta + p.kappa / 2.0) / chi_c_inv(p, w);
}

/// A(w) = chi_c(w)(i delta + kappa/2) + conj(chi_c(-w))(kappa/2 - i delta).
inline cplx aux_A(const SystemParams& p, cplx w)
{
    return (I * p.delta + p.kappa / 2.0) / chi_c_inv(p, w) +
           (p.kappa / 2.0 - I * p.delta) / chi_c_inv_reflected(p, w);
}

/// N[w] = chi1^-1(w) conj(chi1^-1(-w)) + 2 omega1 Sigma[w]. Analytic in w.
inline cplx aux_N(const SystemParams& p, cplx w)
{
    return chi_osc_inv(p, Oscillator::ancilla, w) *
               chi_osc_inv_reflected(p, Oscillator::ancilla, w) +
           2.0 * p.omega1 * self_energy(p, w);
}

// --- the optically dressed ancilla -----------------------------------------

struct EffectiveOscillator {
    real omega1_eff = 0.0;
    real gamma1_eff = 0.0;
    real n1_eff = 0.0;
};

inline EffectiveOscillator effective_ancilla(const SystemParams& p)
{
    if (p.g1as == 0.0) return {p.omega1, p.gamma1, p.nth1};

    const cplx sigma = self_energy(p, p.omega1);
    const real radicand = p.omega1 * p.omega1 + 2.0 * p.omega1 * sigma.real();
    if (!(radicand > 0.0))
        throw Error(ErrorKind::domain, "ancilla softened to instability");

    const real s_plus = force_spectrum(p, p.omega1);
    const real s_minus = force_spectrum(p, -p.omega1);
    const real gamma_opt = s_plus - s_minus;
    if (!(gamma_opt > 0.0)) throw Error(ErrorKind::domain, "dissipative heating");

    EffectiveOscillator e;
    e.omega1_eff = std::sqrt(radicand);
    e.gamma1_eff = p.gamma1 - 2.0 * sigma.imag();
    e.n1_eff = thermal_mix(s_minus / gamma_opt, gamma_opt, p.nth1, p.gamma1);
    return e;
}

inline cplx effective_susceptibility(const EffectiveOscillator& e, real w)
{
    return 1.0 / (e.gamma1_eff / 2.0 - I * (w - e.omega1_eff));
}

/// beta = omega1 / (omega0 + omega1_eff); slightly above 1/2 near resonance.
inline real beta_factor(const SystemParams& p, const EffectiveOscillator& e)
{
    return p.omega1 / (p.omega0 + e.omega1_eff);
}

/// Position spectrum of the dressed ancilla (Lorentzian pair at +-omega1_eff).
inline real xx1_spectrum(const EffectiveOscillator& e, real w)
{
    return e.gamma1_eff * (std::norm(effective_susceptibility(e, w)) * (e.n1_eff + 1.0) +
                           std::norm(effective_susceptibility(e, -w)) * e.n1_eff);
}

struct InterferencePair {
    cplx cx; ///< cavity quadrature x ancilla position
    cplx xc; ///< ancilla position x cavity quadrature
};

/// Interference spectra carrying a single factor G1 sqrt(kappa).
inline InterferencePair interference_spectra(const SystemParams& p, real w)
{
    const cplx pre = 2.0 * I * p.omega1 * p.g1as * std::sqrt(p.kappa);
    const cplx chi = chi_c(p, w);
    const cplx a = aux_alpha(p, w);
    return {-pre * chi * std::conj(a) / aux_N(p, -w), pre * std::conj(chi) * a / aux_N(p, w)};
}

/// Perturbative composition: bare + |A|^2 S_xx^1 + interference, with the
/// ancilla replaced by its effective Lorentzian. Qualitative only; the
/// reported spectra use `full_nn_spectrum`.
inline real perturbative_nn_spectrum(const SystemParams& p, const EffectiveOscillator& e,
                                     real w)
{
    const real g0sq = p.g0as * p.g0as;
    const cplx A = aux_A(p, w);
    CompensatedSum s;
    s += bare_nn_spectrum(p, w);
    s += g0sq * p.g1as * p.g1as * std::norm(A) * xx1_spectrum(e, w);
    s += g0sq * p.g1as * std::sqrt(p.kappa) * 2.0 * (A * interference_spectra(p, w).xc).real();
    return s.value();
}

// --- exact spectrum without target backaction ------------------------------

struct SourceParts {
    real optical = 0.0; ///< driven by the laser input noise d_in
    real thermal = 0.0; ///< driven by the ancilla's thermal bath
};

/// Splits g0^2 S_nn[w] by noise source. The cavity quadrature is written in
/// the independent inputs d_in and b_in,1; the target's backaction on the
/// field is neglected.
inline SourceParts source_decomposition(const SystemParams& p, real w)
{
    const real g0sq = p.g0as * p.g0as;
    const real g1sq = p.g1as * p.g1as;
    const cplx chi = chi_c(p, w);
    const cplx N = aux_N(p, w);
    const cplx A = aux_A(p, w);

    // d_in amplitude: -sqrt(kappa) (chi_c + ancilla-mediated term).
    const cplx mediated = 2.0 * I * p.omega1 * g1sq * aux_alpha(p, w) * A / N;
    CompensatedSum optical;
    optical += bare_nn_spectrum(p, w);
    optical += g0sq * p.kappa * 2.0 * (std::conj(chi) * mediated).real();
    optical += g0sq * p.kappa * std::norm(mediated);

    // b_in,1 enters with conj(chi1^-1(-w)), its adjoint with chi1^-1(w).
    const real bath_in = std::norm(chi_osc_inv_reflected(p, Oscillator::ancilla, w));
    const real bath_out = std::norm(chi_osc_inv(p, Oscillator::ancilla, w));
    const real thermal = g0sq * g1sq * p.gamma1 * std::norm(A / N) *
                         (bath_in * (p.nth1 + 1.0) + bath_out * p.nth1);
    return {optical.value(), thermal};
}

/// g0^2 S_nn[w] including the dissipatively coupled ancilla. Reduces to
/// `bare_nn_spectrum` exactly when G1 = 0.
inline real full_nn_spectrum(const SystemParams& p, real w)
{
    const auto parts = source_decomposition(p, w);
    return parts.optical + parts.thermal;
}

struct CoolingPrediction {
    real n_opt0 = 0.0;
    real gamma_opt0 = 0.0;
    real n0_pred = 0.0;
};

inline CoolingPrediction qnoise_cooling_prediction(const SystemParams& p)
{
    const real s_plus = full_nn_spectrum(p, p.omega0);
    const real s_minus = full_nn_spectrum(p, -p.omega0);
    if (!(s_plus > s_minus)) throw Error(ErrorKind::domain, "no net cooling at omega0");
    CoolingPrediction c;
    c.gamma_opt0 = s_plus - s_minus;
    c.n_opt0 = s_minus / c.gamma_opt0;
    c.n0_pred = thermal_mix(c.n_opt0, c.gamma_opt0, p.nth0, p.gamma0);
    return c;
}

/// Optical over thermal contribution at w, with alpha(w) in its large-kappa
/// form: (omega1/gamma1)/(kappa/omega1) * 16 G1^2 (w + 2 delta)^2 /
/// (nth1 (|chi1^-1(w)|^2 + |chi1^-1(-w)|^2)).
inline real quality_ratio_diagnostic(const SystemParams& p, real w)
{
    if (!(p.nth1 > 0.0))
        throw Error(ErrorKind::domain, "quality ratio undefined for nth1 = 0");
    const real q = (p.omega1 / p.gamma1) / (p.kappa / p.omega1);
    const real num = 16.0 * p.g1as * p.g1as * (w + 2.0 * p.delta) * (w + 2.0 * p.delta);
    const real den = p.nth1 * (std::norm(chi_osc_inv(p, Oscillator::ancilla, w)) +
                               std::norm(chi_osc_inv(p, Oscillator::ancilla, -w)));
    return q * num / den;
}

// --- sampled traces ---------------------------------------------------------

enum class SpectrumLabel { bare_nn, full_nn, force, xx1, cx, xc, source_optical, source_thermal };

struct SpectrumTrace {
    std::vector<real> grid;
    std::vector<cplx> values;
    SpectrumLabel label = SpectrumLabel::full_nn;
};

/// `count` equally spaced points from lo to hi inclusive; endpoints exact.
inline std::vector<real> linspace(real lo, real hi, std::size_t count)
{
    if (count < 2) throw Error(ErrorKind::config, "grid count must be >= 2");
    if (!(lo < hi)) throw Error(ErrorKind::config, "grid requires min < max");
    std::vector<real> g(count);
    const real span = hi - lo;
    for (std::size_t i = 0; i < count; ++i)
        g[i] = lo + span * static_cast<real>(i) / static_cast<real>(count - 1);
    g.back() = hi;
    return g;
}

inline SpectrumTrace sample_spectrum(const SystemParams& p, SpectrumLabel label,
                                     std::vector<real> grid)
{
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw Error(ErrorKind::config, "spectrum grid must be strictly increasing");

    SpectrumTrace t{std::move(grid), {}, label};
    t.values.reserve(t.grid.size());
    EffectiveOscillator eff;
    if (label == SpectrumLabel::xx1) eff = effective_ancilla(p);

    for (real w : t.grid) {
        cplx v;
        switch (label) {
        case SpectrumLabel::bare_nn: v = bare_nn_spectrum(p, w); break;
        case SpectrumLabel::full_nn: v = full_nn_spectrum(p, w); break;
        case SpectrumLabel::force: v = force_spectrum(p, w); break;
        case SpectrumLabel::xx1: v = xx1_spectrum(eff, w); break;
        case SpectrumLabel::cx: v = interference_spectra(p, w).cx; break;
        case SpectrumLabel::xc: v = interference_spectra(p, w).xc; break;
        case SpectrumLabel::source_optical: v = source_decomposition(p, w).optical; break;
        case SpectrumLabel::source_thermal: v = source_decomposition(p, w).thermal; break;
        }
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorKind::convergence, "non-finite spectrum value");
        t.values.push_back(v);
    }
    return t;
}

} // namespace hybridcool
