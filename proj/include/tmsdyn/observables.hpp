#pragma once

// Particle numbers, negativity and energy change, each available from a covariance
// matrix (general path) and from the closed forms in (A, phi) or (F_+, F_-).

#include <algorithm>
#include <cmath>

#include "tmsdyn/analytic_solutions.hpp"
#include "tmsdyn/core_symplectic.hpp"
#include "tmsdyn/hamiltonian_model.hpp"

namespace tmsdyn {

/// nu_+/- = (nu_D +/- nu_d) / 2.
struct NuCombination {
    double nu_plus = 1.0;
    double nu_minus = 0.0;

    static NuCombination from_spectrum(double nu_D, double nu_d) {
        NuCombination n{0.5 * (nu_D + nu_d), 0.5 * (nu_D - nu_d)};
        n.validate();
        return n;
    }
    static NuCombination from_spec(const InitialStateSpec& spec) { return from_spectrum(spec.nu_D, spec.nu_d); }

    void validate() const {
        if (!(nu_plus >= 1.0 - kPhysicalTolerance) || !std::isfinite(nu_plus))
            throw DomainError("nu_plus must be >= 1");
        if (!(std::abs(nu_minus) < nu_plus)) throw DomainError("|nu_minus| must be below nu_plus");
    }
    double nu_D() const { return nu_plus + nu_minus; }
    double nu_d() const { return nu_plus - nu_minus; }
};

struct NumberPair {
    double n_D = 0.0;
    double n_d = 0.0;
    double n_plus() const { return n_D + n_d; }
    double n_minus() const { return n_D - n_d; }
};

struct NumberCombination {
    double n_plus = 0.0;
    double n_minus = 0.0;
};

/// N_n = (sigma_nn - 1) / 2 for n = D, d.
inline NumberPair number_expectation(const CovarianceMatrix& sigma) {
    if (!is_physical(sigma)) throw DomainError("number_expectation: state is not physical");
    const Complex s11 = sigma(0, 0);
    const Complex s22 = sigma(1, 1);
    if (std::abs(s11.imag()) > 1e-10 || std::abs(s22.imag()) > 1e-10)
        throw DomainError("number_expectation: diagonal entries are not real");
    return {0.5 * (s11.real() - 1.0), 0.5 * (s22.real() - 1.0)};
}

/// Ch = cosh F_+ cosh(F_- + 2r).
inline double ch_from_F(double f_plus, double f_minus, double r) {
    return std::cosh(f_plus) * std::cosh(f_minus + 2.0 * r);
}

/// Ch after switch-off: sqrt(1+A^2) cosh 2r - A sinh 2r cos(chi eta + phi).
inline double ch_closed(const OscillatorySolution& sol, double eta, double r) {
    sol.validate();
    const double a = sol.amplitude;
    return std::sqrt(1.0 + a * a) * std::cosh(2.0 * r) - a * std::sinh(2.0 * r) * std::cos(sol.argument(eta));
}

inline NumberCombination N_plusminus_from_ch(double ch, const NuCombination& nus) {
    return {nus.nu_plus * ch - 1.0, nus.nu_minus};
}

inline NumberCombination N_plusminus_closed(const OscillatorySolution& sol, double eta, double r,
                                            const NuCombination& nus) {
    nus.validate();
    return N_plusminus_from_ch(ch_closed(sol, eta, r), nus);
}

/// nu~_- = nu_+ [Ch - sqrt(Ch^2 - 1 + q)], q = nu_-^2 / nu_+^2, in cancellation-free form.
inline double nu_tilde_from_ch(double ch, const NuCombination& nus) {
    const double q = (nus.nu_minus / nus.nu_plus) * (nus.nu_minus / nus.nu_plus);
    return nus.nu_plus * (1.0 - q) / (ch + std::sqrt(ch * ch - 1.0 + q));
}

inline double nu_tilde_minus_closed(double f_plus, double f_minus, double r, const NuCombination& nus) {
    nus.validate();
    return nu_tilde_from_ch(ch_from_F(f_plus, f_minus, r), nus);
}

/// Smallest symplectic eigenvalue of the partial transpose.
inline double nu_tilde_minus(const CovarianceMatrix& sigma) {
    return symplectic_eigenvalues(partial_transpose(sigma)).low;
}

/// Negativity in the form max{0, (1 - nu~) / nu~}.
inline double negativity_from_nu_tilde(double nu_tilde) { return std::max(0.0, (1.0 - nu_tilde) / nu_tilde); }

/// Conventional log-negativity max{0, -ln nu~}.
inline double log_negativity_conventional_from_nu_tilde(double nu_tilde) {
    return std::max(0.0, -std::log(nu_tilde));
}

inline double log_negativity(const CovarianceMatrix& sigma) {
    if (!is_physical(sigma)) throw DomainError("log_negativity: state is not physical");
    return negativity_from_nu_tilde(nu_tilde_minus(sigma));
}

inline double log_negativity_conventional(const CovarianceMatrix& sigma) {
    if (!is_physical(sigma)) throw DomainError("log_negativity_conventional: state is not physical");
    return log_negativity_conventional_from_nu_tilde(nu_tilde_minus(sigma));
}

/// Entanglement threshold on Ch: the negativity is positive iff Ch > (1 + nu_+^2 - nu_-^2) / (2 nu_+).
inline double negativity_threshold(const NuCombination& nus) {
    return (1.0 + nus.nu_plus * nus.nu_plus - nus.nu_minus * nus.nu_minus) / (2.0 * nus.nu_plus);
}

inline double negativity_from_ch(double ch, const NuCombination& nus) {
    if (!(ch > negativity_threshold(nus))) return 0.0;
    return negativity_from_nu_tilde(nu_tilde_from_ch(ch, nus));
}

inline double log_negativity_from_F(double f_plus, double f_minus, double r, const NuCombination& nus) {
    nus.validate();
    return negativity_from_ch(ch_from_F(f_plus, f_minus, r), nus);
}

inline double log_negativity_closed(const OscillatorySolution& sol, double eta, double r, const NuCombination& nus) {
    nus.validate();
    return negativity_from_ch(ch_closed(sol, eta, r), nus);
}

/// Delta E = [w_D (sigma_f - sigma_i)_11 + w_d (sigma_f - sigma_i)_22] / 2, hbar = 1.
inline double delta_E(const CovarianceMatrix& sigma_i, const CovarianceMatrix& sigma_f, const ModePair& modes) {
    return 0.5 * (modes.omega_D * (sigma_f(0, 0) - sigma_i(0, 0)).real() +
                  modes.omega_d * (sigma_f(1, 1) - sigma_i(1, 1)).real());
}

/// Delta E after switch-off: A nu_+ (w_D + w_d) cosh 2r [A / (sqrt(1+A^2) + 1) - tanh 2r cos x] / 2.
inline double delta_E_closed(const OscillatorySolution& sol, double eta, double r, const NuCombination& nus,
                             const ModePair& modes) {
    sol.validate();
    nus.validate();
    const double a = sol.amplitude;
    const double bracket = a / (std::sqrt(1.0 + a * a) + 1.0) - std::tanh(2.0 * r) * std::cos(sol.argument(eta));
    return 0.5 * a * nus.nu_plus * (modes.omega_D + modes.omega_d) * std::cosh(2.0 * r) * bracket;
}

/// Small-input energy estimate (w_D + w_d) A^2, with A^2 the double cosine integral of h.
inline double delta_E_weak(double amplitude, const ModePair& modes) {
    return (modes.omega_D + modes.omega_d) * amplitude * amplitude;
}

// ---------------------------------------------------------------------------
// Matrix-path evaluation at one point of a trajectory.

struct ObservableSample {
    double eta = 0.0;
    double n_D = 0.0;
    double n_d = 0.0;
    double negativity = 0.0;
    double log_negativity = 0.0;
    double delta_E = 0.0;
    double symplectic_defect = 0.0;

    double n_plus() const { return n_D + n_d; }
    double n_minus() const { return n_D - n_d; }
};

/// Builds S from the decoupling angles, evolves sigma_i and reads every observable.
inline ObservableSample matrix_path_observables(double eta, const DecouplingAngles& angles,
                                                const CovarianceMatrix& sigma_i, const ModePair& modes) {
    const SymplecticMatrix s = decoupled_evolution(angles);
    const CovarianceMatrix sigma_f = evolve_state(sigma_i, s);
    const NumberPair n = number_expectation(sigma_f);
    const double nu_t = nu_tilde_minus(sigma_f);
    ObservableSample out;
    out.eta = eta;
    out.n_D = n.n_D;
    out.n_d = n.n_d;
    out.negativity = negativity_from_nu_tilde(nu_t);
    out.log_negativity = log_negativity_conventional_from_nu_tilde(nu_t);
    out.delta_E = delta_E(sigma_i, sigma_f, modes);
    out.symplectic_defect = symplectic_defect(s);
    return out;
}

}  // namespace tmsdyn
