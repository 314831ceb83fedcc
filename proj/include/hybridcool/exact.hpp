#pragma once

// Exact solution of the linearized Langevin dynamics.
//
// Operator basis V = (d, d^+, b0, b0^+, b1, b1^+), dV/dt = M V + L xi with
// inputs xi = (d_in, d_in^+, b_in0, b_in0^+, b_in1, b_in1^+). Fourier
// convention f_w = int dt e^{iwt} f(t), so (-iw - M) V_w = L xi_w and the
// delta-correlated inputs give <xi_a,w xi_b,w'> = 2 pi K_ab delta(w + w').

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "qnoise.hpp"
#include "quadrature.hpp"
#include "summation.hpp"

namespace hybridcool {

using Mat6 = Eigen::Matrix<cplx, 6, 6>;
using Vec6 = Eigen::Matrix<cplx, 6, 1>;

namespace idx {
inline constexpr int d = 0, d_dag = 1, b0 = 2, b0_dag = 3, b1 = 4, b1_dag = 5;
}

/// Noise channels, each a pair of input operators.
enum class Channel { drive = 0, local = 1, ancilla = 2 };

struct DriftSystem {
    Mat6 M = Mat6::Zero();
    Mat6 noise_map = Mat6::Zero();
    real nth0 = 0.0;
    real nth1 = 0.0;

    /// <xi_a xi_a^+> (anti-normal order); the input correlators are diagonal
    /// in this basis.
    std::array<real, 6> antinormal_weights() const
    {
        return {1.0, 0.0, nth0 + 1.0, nth0, nth1 + 1.0, nth1};
    }

    /// <xi_a^+ xi_a> (normal order).
    std::array<real, 6> normal_weights() const
    {
        return {0.0, 1.0, nth0, nth0 + 1.0, nth1, nth1 + 1.0};
    }
};

inline DriftSystem build_drift(const SystemParams& p)
{
    DriftSystem s;
    auto& M = s.M;
    const real D = p.delta, k = p.kappa, G0 = p.g0as, G1 = p.g1as;
    using namespace idx;

    M(d, d) = I * D - k / 2.0;
    M(d, b0) = M(d, b0_dag) = I * G0;
    M(d, b1) = M(d, b1_dag) = -G1 * (I * D + k / 2.0);

    M(d_dag, d_dag) = -I * D - k / 2.0;
    M(d_dag, b0) = M(d_dag, b0_dag) = -I * G0;
    M(d_dag, b1) = M(d_dag, b1_dag) = -G1 * (-I * D + k / 2.0);

    M(b0, b0) = -(I * p.omega0 + p.gamma0 / 2.0);
    M(b0, d) = M(b0, d_dag) = I * G0;
    M(b0_dag, b0_dag) = -(-I * p.omega0 + p.gamma0 / 2.0);
    M(b0_dag, d) = M(b0_dag, d_dag) = -I * G0;

    M(b1, b1) = -(I * p.omega1 + p.gamma1 / 2.0);
    M(b1, d) = -I * G1 * D - G1 * k / 2.0;
    M(b1, d_dag) = -I * G1 * D + G1 * k / 2.0;
    M(b1_dag, b1_dag) = -(-I * p.omega1 + p.gamma1 / 2.0);
    M(b1_dag, d_dag) = I * G1 * D - G1 * k / 2.0;
    M(b1_dag, d) = I * G1 * D + G1 * k / 2.0;

    auto& L = s.noise_map;
    const real sk = std::sqrt(k);
    L(d, 0) = L(d_dag, 1) = -sk;
    L(b0, 2) = L(b0_dag, 3) = -std::sqrt(p.gamma0);
    L(b1, 4) = L(b1_dag, 5) = -std::sqrt(p.gamma1);
    // The dissipative coupling feeds the laser noise straight into b1.
    L(b1, 0) = -G1 * sk;
    L(b1, 1) = G1 * sk;
    L(b1_dag, 0) = G1 * sk;
    L(b1_dag, 1) = -G1 * sk;

    s.nth0 = p.nth0;
    s.nth1 = p.nth1;
    return s;
}

struct StabilityReport {
    bool stable = false;
    real margin = 0.0; ///< -max Re(eigenvalue)
    std::array<cplx, 6> eigenvalues{};
};

inline std::array<cplx, 6> drift_eigenvalues(const DriftSystem& s)
{
    Eigen::ComplexEigenSolver<Mat6> solver(s.M, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eigen-solver did not converge; |M|_F = " << s.M.norm();
        throw Error(ErrorKind::convergence, msg.str());
    }
    std::array<cplx, 6> ev;
    for (int i = 0; i < 6; ++i) ev[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

/// Stable iff every eigenvalue has real part below -tol.
inline StabilityReport stability(const DriftSystem& s, real tol = 1e-12)
{
    StabilityReport r;
    r.eigenvalues = drift_eigenvalues(s);
    real max_re = -std::numeric_limits<real>::infinity();
    for (auto e : r.eigenvalues) max_re = std::max(max_re, e.real());
    r.margin = -max_re;
    r.stable = max_re < -tol;
    return r;
}

// --- b0 in terms of the inputs -----------------------------------------------

/// b0_w = A_d d_in + B_d d_in^+ + A0 b_in0 + B0 b_in0^+ + A1 b_in1 + B1 b_in1^+.
struct NoiseCoefficients {
    std::array<cplx, 6> c{};

    cplx A_d() const { return c[0]; }
    cplx B_d() const { return c[1]; }
    cplx A0() const { return c[2]; }
    cplx B0() const { return c[3]; }
    cplx A1() const { return c[4]; }
    cplx B1() const { return c[5]; }
};

/// Closed-form denominator shared by all coefficients; analytic in w. Its
/// zeros are the normal-mode frequencies (w = i * eigenvalue of M).
inline cplx closed_form_denominator(const SystemParams& p, cplx w)
{
    using O = Oscillator;
    const real G0sq = p.g0as * p.g0as, G1sq = p.g1as * p.g1as;
    const cplx c1 = chi_osc_inv(p, O::ancilla, w) * chi_osc_inv_reflected(p, O::ancilla, w);
    return chi_c_inv(p, w) * chi_c_inv_reflected(p, w) * chi_osc_inv(p, O::target, w) *
               chi_osc_inv_reflected(p, O::target, w) * aux_N(p, w) -
           4.0 * p.omega0 * p.omega1 * p.kappa * p.kappa * G0sq * G1sq +
           4.0 * p.delta * p.omega0 * G0sq * c1;
}

/// Closed-form coefficients of b0 in the six inputs.
inline NoiseCoefficients closed_form_coefficients(const SystemParams& p, real w)
{
    using O = Oscillator;
    const real D = p.delta, k = p.kappa, G0 = p.g0as, G1 = p.g1as;
    const real G0sq = G0 * G0, G1sq = G1 * G1;
    const real w1 = p.omega1;

    const cplx denom = closed_form_denominator(p, w);
    const cplx cc = chi_c_inv(p, w);
    const cplx cc_r = chi_c_inv_reflected(p, w);
    const cplx c0_r = chi_osc_inv_reflected(p, O::target, w);
    const cplx c1 = chi_osc_inv(p, O::ancilla, w);
    const cplx c1_r = chi_osc_inv_reflected(p, O::ancilla, w);
    const cplx c1c1 = c1 * c1_r;
    const cplx N = aux_N(p, w);

    const real scale = std::abs(cc * cc_r * chi_osc_inv(p, O::target, w) * c0_r * N) +
                       4.0 * std::abs(p.omega0 * w1) * k * k * G0sq * G1sq +
                       4.0 * std::abs(D * p.omega0) * G0sq * std::abs(c1c1);
    if (!(std::abs(denom) > 1e-300 + 64.0 * std::numeric_limits<real>::epsilon() * scale))
        throw Error(ErrorKind::domain, "evaluated at system pole");

    NoiseCoefficients out;
    const cplx drive_pre = -I * G0 * std::sqrt(k) * c0_r / denom;
    out.c[0] = drive_pre * (cc_r * c1c1 + 2.0 * I * w1 * G1sq * (-2.0 * D * D + I * D * k - I * w * k));
    out.c[1] = drive_pre * (cc * c1c1 + 2.0 * I * w1 * G1sq * (2.0 * D * D + I * D * k + I * w * k));

    const real sg0 = std::sqrt(p.gamma0);
    out.c[2] = -sg0 / denom * (2.0 * I * G0sq * (k * k * w1 * G1sq - D * c1c1) + cc * cc_r * c0_r * N);
    out.c[3] = 2.0 * I * sg0 * G0sq / denom * (D * c1c1 - w1 * k * k * G1sq);

    const cplx anc_pre = G0 * G1 * c0_r * std::sqrt(p.gamma1) / (2.0 * denom) *
                         (I * k * k + 2.0 * k * w - 4.0 * I * D * D);
    out.c[4] = anc_pre * c1_r;
    out.c[5] = anc_pre * c1;
    return out;
}

/// Row b0 of (-iw - M)^{-1} L, by a dense 6x6 solve.
inline NoiseCoefficients solve_coefficients(const DriftSystem& s, real w)
{
    const Mat6 resolvent_inv = (-I * w) * Mat6::Identity() - s.M;
    // y^T (-iw - M) = e_b0^T  <=>  (-iw - M)^T y = e_b0
    Vec6 e = Vec6::Zero();
    e(idx::b0) = 1.0;
    const Vec6 y = resolvent_inv.transpose().partialPivLu().solve(e);
    const Eigen::Matrix<cplx, 1, 6> row = y.transpose() * s.noise_map;
    NoiseCoefficients out;
    for (int j = 0; j < 6; ++j) out.c[static_cast<std::size_t>(j)] = row(j);
    return out;
}

/// n0 spectral density split by channel: drive, local bath, ancilla bath.
/// Each term is |coefficient|^2 times the normal-ordered input occupation.
inline std::array<real, 3> n0_integrand(const NoiseCoefficients& c, real nth0, real nth1)
{
    return {std::norm(c.B_d()),
            nth0 * std::norm(c.A0()) + (nth0 + 1.0) * std::norm(c.B0()),
            nth1 * std::norm(c.A1()) + (nth1 + 1.0) * std::norm(c.B1())};
}

// --- cooling limit -------------------------------------------------------------

enum class CoefficientRoute { linear_solve, closed_form };

struct QuadratureSpec {
    real rel_tol = 1e-9;
    real abs_tol = 1e-14;
    /// Finite panels cover [-W, W] with W = tail_factor * max(kappa, |delta|,
    /// omega0, omega1); beyond that the tails are mapped to (0, 1].
    real tail_factor = 10.0;
    std::size_t max_evaluations = 4'000'000;
    CoefficientRoute route = CoefficientRoute::linear_solve;
};

struct CoolingResult {
    real n0 = 0.0;
    real n0_drive = 0.0;
    real n0_local = 0.0;
    real n0_ancilla = 0.0;
    bool stable = false;
    real integration_error_estimate = 0.0;
};

/// Panel breakpoints: every resonance centre +-Im(lambda) with geometric
/// spacing scaled by its width -Re(lambda), clipped to [-W, W].
inline std::vector<real> resonance_breakpoints(const std::array<cplx, 6>& eigenvalues, real window)
{
    std::vector<real> pts{-window, 0.0, window};
    for (auto ev : eigenvalues) {
        const real width = -ev.real();
        for (real centre : {ev.imag(), -ev.imag()}) {
            if (std::abs(centre) >= window) continue;
            pts.push_back(centre);
            for (real step = width; step < window; step *= 4.0) {
                pts.push_back(centre - step);
                pts.push_back(centre + step);
            }
        }
    }
    std::sort(pts.begin(), pts.end());
    std::vector<real> out;
    for (real x : pts) {
        if (x < -window || x > window) continue;
        if (!out.empty() && !(x > out.back())) continue;
        out.push_back(x);
    }
    return out;
}

inline real integration_window(const SystemParams& p, real tail_factor)
{
    return tail_factor * std::max({p.kappa, std::abs(p.delta), p.omega0, p.omega1});
}

/// Integrates the n0 density over the real line. Does not check stability
/// up front: an unstable spectrum has no positive resonance widths and is
/// reported as `divergent`.
inline QuadResult<3> integrate_n0(const SystemParams& p, const DriftSystem& s,
                                  const std::array<cplx, 6>& eigenvalues,
                                  const QuadratureSpec& spec)
{
    QuadResult<3> bad;
    for (auto ev : eigenvalues) {
        if (!(ev.real() < 0.0)) {
            bad.status = QuadStatus::divergent;
            return bad;
        }
    }
    const real window = integration_window(p, spec.tail_factor);
    const auto breaks = resonance_breakpoints(eigenvalues, window);

    auto density = [&](real w) {
        const NoiseCoefficients c = spec.route == CoefficientRoute::linear_solve
                                        ? solve_coefficients(s, w)
                                        : closed_form_coefficients(p, w);
        auto v = n0_integrand(c, s.nth0, s.nth1);
        constexpr real inv_two_pi = 0.15915494309189533577;
        for (auto& x : v) x *= inv_two_pi;
        return v;
    };
    return integrate_real_line<3>(density, breaks,
                                  QuadLimits{spec.rel_tol, spec.abs_tol, spec.max_evaluations});
}

/// Steady-state phonon number of the target from the frequency integral.
inline CoolingResult exact_n0(const SystemParams& p, const QuadratureSpec& spec = {})
{
    const DriftSystem s = build_drift(p);
    const StabilityReport st = stability(s);
    if (!st.stable) throw Error(ErrorKind::instability, "divergent integral: system is unstable");

    const auto q = integrate_n0(p, s, st.eigenvalues, spec);
    if (q.status != QuadStatus::converged) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "n0 quadrature did not converge: estimate " << (q.value[0] + q.value[1] + q.value[2])
            << " +- " << q.error << " after " << q.evaluations << " evaluations";
        throw Error(ErrorKind::convergence, msg.str());
    }
    CoolingResult r;
    r.n0_drive = q.value[0];
    r.n0_local = q.value[1];
    r.n0_ancilla = q.value[2];
    CompensatedSum total;
    total += r.n0_drive;
    total += r.n0_local;
    total += r.n0_ancilla;
    r.n0 = total.value();
    r.stable = true;
    r.integration_error_estimate = q.error;
    return r;
}

// --- steady-state covariance oracle ------------------------------------------

/// Bit mask over channels; all three by default.
struct ChannelMask {
    bool drive = true;
    bool local = true;
    bool ancilla = true;

    static ChannelMask only(Channel c)
    {
        return {c == Channel::drive, c == Channel::local, c == Channel::ancilla};
    }
};

inline Mat6 diffusion_matrix(const DriftSystem& s, ChannelMask mask)
{
    const auto w = s.antinormal_weights();
    Mat6 K = Mat6::Zero();
    const bool on[3] = {mask.drive, mask.local, mask.ancilla};
    for (int a = 0; a < 6; ++a)
        if (on[a / 2]) K(a, a) = w[static_cast<std::size_t>(a)];
    return s.noise_map * K * s.noise_map.adjoint();
}

/// Solves M C + C M^H + D = 0 for C_ij = <V_i V_j^+>, vectorized to a 36x36
/// system, for several diffusion matrices sharing one factorization.
inline std::vector<Mat6> steady_state_covariances(const DriftSystem& s,
                                                  const std::vector<Mat6>& diffusions)
{
    using Mat36 = Eigen::Matrix<cplx, 36, 36>;
    const Mat6 Id = Mat6::Identity();
    Mat36 A;
    // vec(M C) = (I kron M) vec C;  vec(C M^H) = (conj(M) kron I) vec C
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            A.block<6, 6>(6 * i, 6 * j) = Id(i, j) * s.M + std::conj(s.M(i, j)) * Id;

    const Eigen::PartialPivLU<Mat36> lu(A);
    const real rcond = lu.rcond();
    if (!(rcond > 36.0 * std::numeric_limits<real>::epsilon()))
        throw Error(ErrorKind::instability,
                    "Lyapunov system singular (marginal stability), rcond = " + std::to_string(rcond));

    std::vector<Mat6> out;
    out.reserve(diffusions.size());
    for (const auto& D : diffusions) {
        Eigen::Matrix<cplx, 36, 1> rhs;
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 6; ++i) rhs(6 * j + i) = -D(i, j);
        const auto x = lu.solve(rhs).eval();
        Mat6 C;
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 6; ++i) C(i, j) = x(6 * j + i);
        out.push_back(C);
    }
    return out;
}

inline Mat6 steady_state_covariance(const DriftSystem& s, ChannelMask mask = {})
{
    return steady_state_covariances(s, {diffusion_matrix(s, mask)}).front();
}

/// <b^+ b> for the target (k = target) or ancilla from a covariance matrix.
inline real occupation(const Mat6& C, Oscillator k)
{
    const int i = k == Oscillator::target ? idx::b0_dag : idx::b1_dag;
    return C(i, i).real();
}

/// Steady-state n0 from the covariance equation, per channel and in total.
inline CoolingResult lyapunov_n0(const SystemParams& p)
{
    const DriftSystem s = build_drift(p);
    if (!stability(s).stable)
        throw Error(ErrorKind::instability, "steady state does not exist: system is unstable");

    const auto C = steady_state_covariances(
        s, {diffusion_matrix(s, ChannelMask::only(Channel::drive)),
            diffusion_matrix(s, ChannelMask::only(Channel::local)),
            diffusion_matrix(s, ChannelMask::only(Channel::ancilla)),
            diffusion_matrix(s, ChannelMask{})});
    CoolingResult r;
    r.n0_drive = occupation(C[0], Oscillator::target);
    r.n0_local = occupation(C[1], Oscillator::target);
    r.n0_ancilla = occupation(C[2], Oscillator::target);
    r.n0 = occupation(C[3], Oscillator::target);
    r.stable = true;
    return r;
}

// --- G0 profile ------------------------------------------------------------

struct ProfilePoint {
    real g0as = 0.0;
    std::optional<CoolingResult> exact;
    std::optional<real> qnoise_n0;
    std::string error; ///< empty when `exact` is set
};

/// Exact n0 and the golden-rule prediction along a G0 sweep. Failures are
/// recorded per point.
inline std::vector<ProfilePoint> contribution_profile(const SystemParams& base,
                                                      const std::vector<real>& g0_grid,
                                                      const QuadratureSpec& spec = {})
{
    std::vector<ProfilePoint> out;
    out.reserve(g0_grid.size());
    for (real g0 : g0_grid) {
        SystemParams p = base;
        p.g0as = g0;
        ProfilePoint pt;
        pt.g0as = g0;
        try {
            pt.exact = exact_n0(p, spec);
        } catch (const Error& e) {
            pt.error = e.what();
        }
        try {
            pt.qnoise_n0 = qnoise_cooling_prediction(p).n0_pred;
        } catch (const Error&) {
        }
        out.push_back(std::move(pt));
    }
    return out;
}

} // namespace hybridcool
