#pragma once

// Closed-form and perturbative solutions for F_+/-:
//  - the exact oscillation after switch-off, parameterised by (A, phi);
//  - its small-amplitude limit;
//  - the first-order (perturbative) quadrature solution and the (A, phi) it implies;
//  - algebraic extraction of (A, phi) from a single post-switch-off point;
//  - the linearised solver F' = M F + H for a constant matrix M.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "tmsdyn/core_symplectic.hpp"
#include "tmsdyn/hamiltonian_model.hpp"
#include "tmsdyn/quadrature.hpp"

namespace tmsdyn {

/// Maps an angle to (-pi, pi].
inline double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::remainder(phi, two_pi);
    if (w <= -std::numbers::pi) w += two_pi;
    return w;
}

struct OscillatorySolution {
    double amplitude = 0.0;
    double phase = 0.0;
    double chi = 1.0;

    void validate() const {
        if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw DomainError("amplitude A must be >= 0");
        if (!std::isfinite(phase)) throw DomainError("phase must be finite");
        if (!(chi > 0.0) || !std::isfinite(chi)) throw DomainError("chi must be positive");
    }
    /// The integration constant C = 1 + A^2.
    double c_constant() const { return 1.0 + amplitude * amplitude; }
    double argument(double eta) const { return chi * eta + phase; }
};

struct FPair {
    double f_plus = 0.0;
    double f_minus = 0.0;
};

/// F_+ = asinh(A sin x), F_- = ln(sqrt(1+A^2) - A cos x) - ln(1 + A^2 sin^2 x) / 2, x = chi eta + phi.
inline FPair closed_form_F(const OscillatorySolution& sol, double eta) {
    sol.validate();
    const double a = sol.amplitude;
    const double x = sol.argument(eta);
    const double sx = std::sin(x);
    const double half = std::sin(0.5 * x);
    // sqrt(1+A^2) - A cos x, rewritten as a sum of non-negative terms to avoid cancellation at large A.
    const double gap = 1.0 / (std::sqrt(1.0 + a * a) + a) + 2.0 * a * half * half;
    return {std::asinh(a * sx), std::log(gap) - 0.5 * std::log1p(a * a * sx * sx)};
}

/// First-order limit: (A sin x, -A cos x).
inline FPair small_amplitude_F(const OscillatorySolution& sol, double eta) {
    sol.validate();
    const double x = sol.argument(eta);
    return {sol.amplitude * std::sin(x), -sol.amplitude * std::cos(x)};
}

/// sinh^2 F_+ + sinh^2 F_- cosh^2 F_+; equals A^2 wherever h = 0.
inline double first_integral(double f_plus, double f_minus) {
    const double sp = std::sinh(f_plus);
    const double smcp = std::sinh(f_minus) * std::cosh(f_plus);
    return sp * sp + smcp * smcp;
}

/// (int_0^eta sin(chi t) h dt, int_0^eta cos(chi t) h dt).
struct DriveMoments {
    double s = 0.0;
    double c = 0.0;
};

inline DriveMoments drive_moments(const CouplingPulse& pulse, double chi, double eta) {
    const double upper = std::min(eta, pulse.switch_off_eta());
    if (pulse.is_null() || !(upper > 0.0)) return {};
    const auto knots = pulse.breakpoints();
    return {quadrature::integrate([&](double t) { return std::sin(chi * t) * pulse.value(t); }, 0.0, upper, knots),
            quadrature::integrate([&](double t) { return std::cos(chi * t) * pulse.value(t); }, 0.0, upper, knots)};
}

inline FPair perturbative_from_moments(const DriveMoments& m, double chi, double eta) {
    const double c = std::cos(chi * eta);
    const double s = std::sin(chi * eta);
    return {c * m.s - s * m.c, c * m.c + s * m.s};
}

/// Variation-of-parameters solution of F_+' = -chi F_-, F_-' = chi F_+ + h with F(0) = 0.
inline FPair perturbative_F(const CouplingPulse& pulse, double chi, double eta) {
    if (!(chi > 0.0)) throw DomainError("perturbative_F: chi must be positive");
    if (!(eta >= 0.0)) throw DomainError("perturbative_F: eta must be >= 0");
    return perturbative_from_moments(drive_moments(pulse, chi, eta), chi, eta);
}

/// perturbative_F on an ascending grid. The moments are accumulated interval by interval
/// with composite Gauss-Legendre, which stays cheap on the many short intervals of a trajectory.
inline std::vector<FPair> perturbative_F_series(const CouplingPulse& pulse, double chi, std::span<const double> etas,
                                                double max_panel = 0.25) {
    if (!(chi > 0.0)) throw DomainError("perturbative_F: chi must be positive");
    std::vector<FPair> out;
    out.reserve(etas.size());
    const auto knots = pulse.breakpoints();
    const double eta_f = pulse.switch_off_eta();
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();  // (S, C)
    double prev = 0.0;
    for (double eta : etas) {
        if (!(eta >= prev)) throw DomainError("perturbative_F_series: grid must be ascending and >= 0");
        const double lo = std::min(prev, eta_f);
        const double hi = std::min(eta, eta_f);
        if (!pulse.is_null() && hi > lo) {
            acc += quadrature::integrate_composite<Eigen::Vector2d>(
                [&](double t) {
                    const double h = pulse.value(t);
                    return Eigen::Vector2d(std::sin(chi * t) * h, std::cos(chi * t) * h);
                },
                lo, hi, Eigen::Vector2d::Zero(), max_panel, knots);
        }
        out.push_back(perturbative_from_moments({acc(0), acc(1)}, chi, eta));
        prev = eta;
    }
    return out;
}

/// Weak-coupling (A, phi): A = sqrt(S^2 + C^2) over the whole pulse, A sin phi = S, A cos phi = -C.
inline OscillatorySolution weak_coupling_A_phi(const CouplingPulse& pulse, double chi) {
    if (!(chi > 0.0)) throw DomainError("weak_coupling_A_phi: chi must be positive");
    const DriveMoments m = drive_moments(pulse, chi, pulse.switch_off_eta());
    const double a = std::hypot(m.s, m.c);
    return {a, a == 0.0 ? 0.0 : wrap_phase(std::atan2(m.s, -m.c)), chi};
}

/// Inverts the closed form at one point: A^2 is the first integral and
/// (A sin x, -A cos x) = (sinh F_+, sinh F_- cosh F_+) with x = xi + phi, xi = chi eta.
inline OscillatorySolution extract_A_phi(double f_plus, double f_minus, double xi, double chi) {
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus) || !std::isfinite(xi))
        throw DomainError("extract_A_phi: non-finite input");
    if (!(chi > 0.0)) throw DomainError("extract_A_phi: chi must be positive");
    const double sp = std::sinh(f_plus);
    const double smcp = std::sinh(f_minus) * std::cosh(f_plus);
    const double a = std::hypot(sp, smcp);
    if (a == 0.0) return {0.0, 0.0, chi};
    return {a, wrap_phase(std::atan2(sp, -smcp) - xi), chi};
}

// ---------------------------------------------------------------------------
// Linearised solver.

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// F' = M F + H(eta), F(0) = 0, with H(0) = 0 and H vanishing from `drive_end` on.
struct LinearizedSystem {
    Eigen::MatrixXd m;
    std::function<Eigen::VectorXd(double)> drive;
    std::function<Eigen::VectorXd(double)> drive_rate;
    double drive_end = std::numeric_limits<double>::infinity();
    std::vector<double> breakpoints;
};

namespace detail {

/// sinh(M x) and cosh(M x) for fixed M: eigendecomposition when the eigenvectors are
/// well conditioned, otherwise Eigen's Schur-Parlett matrix functions.
class HyperbolicMatrixFunctions {
public:
    static constexpr double kMaxCondition = 1e8;

    explicit HyperbolicMatrixFunctions(const Eigen::MatrixXd& m) : m_(m) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(m);
        if (es.info() == Eigen::Success) {
            const Eigen::MatrixXcd v = es.eigenvectors();
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
            const auto& sv = svd.singularValues();
            const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                        : std::numeric_limits<double>::infinity();
            if (cond < kMaxCondition) {
                diagonal_ = true;
                v_ = v;
                v_inv_ = v.inverse();
                lambda_ = es.eigenvalues();
            }
        }
    }

    bool diagonalised() const { return diagonal_; }

    Eigen::MatrixXd sinh(double x) const {
        if (!diagonal_) return Eigen::MatrixXd((m_ * x).sinh());
        return apply([](std::complex<double> z) { return std::sinh(z); }, x);
    }
    Eigen::MatrixXd cosh(double x) const {
        if (!diagonal_) return Eigen::MatrixXd((m_ * x).cosh());
        return apply([](std::complex<double> z) { return std::cosh(z); }, x);
    }

private:
    template <typename Fn>
    Eigen::MatrixXd apply(Fn fn, double x) const {
        Eigen::VectorXcd d(lambda_.size());
        for (Eigen::Index k = 0; k < lambda_.size(); ++k) d(k) = fn(lambda_(k) * x);
        return (v_ * d.asDiagonal() * v_inv_).real();
    }

    Eigen::MatrixXd m_;
    bool diagonal_ = false;
    Eigen::MatrixXcd v_;
    Eigen::MatrixXcd v_inv_;
    Eigen::VectorXcd lambda_;
};

}  // namespace detail

/// F(eta) = sinh(M eta) int_0^eta cosh(M t) w dt - cosh(M eta) int_0^eta sinh(M t) w dt,
/// w = H + M^{-1} H'. Integrals use composite 20-point Gauss-Legendre.
inline Eigen::VectorXd linearized_solve(const LinearizedSystem& sys, double eta, double max_panel = 0.25) {
    const auto n = sys.m.rows();
    if (n == 0 || sys.m.cols() != n) throw DomainError("linearized_solve: M must be square and non-empty");
    if (!sys.drive || !sys.drive_rate) throw DomainError("linearized_solve: drive and drive_rate are required");
    if (!(eta >= 0.0)) throw DomainError("linearized_solve: eta must be >= 0");

    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.m);
    if (!lu.isInvertible()) throw SingularMatrixError("linearized_solve: M is singular");
    const Eigen::MatrixXd m_inv = lu.inverse();

    const detail::HyperbolicMatrixFunctions fn(sys.m);
    const double upper = std::min(eta, sys.drive_end);
    auto w = [&](double t) -> Eigen::VectorXd { return sys.drive(t) + m_inv * sys.drive_rate(t); };

    using Pair = Eigen::MatrixXd;  // column 0: cosh-weighted, column 1: sinh-weighted
    const Pair zero = Pair::Zero(n, 2);
    const Pair integrals = quadrature::integrate_composite<Pair>(
        [&](double t) -> Pair {
            const Eigen::VectorXd wt = w(t);
            Pair p(n, 2);
            p.col(0) = fn.cosh(t) * wt;
            p.col(1) = fn.sinh(t) * wt;
            return p;
        },
        0.0, upper, zero, max_panel, sys.breakpoints);
    return fn.sinh(eta) * integrals.col(0) - fn.cosh(eta) * integrals.col(1);
}

/// The two-mode first-order system: F = (F_+, F_-), M = [[0, -chi], [chi, 0]], H = (0, h).
inline LinearizedSystem two_mode_linearized_system(const CouplingPulse& pulse, double chi) {
    if (!(chi > 0.0)) throw DomainError("two_mode_linearized_system: chi must be positive");
    LinearizedSystem sys;
    sys.m = Eigen::MatrixXd(2, 2);
    sys.m << 0.0, -chi, chi, 0.0;
    sys.drive = [pulse](double t) {
        Eigen::VectorXd v(2);
        v << 0.0, pulse.value(t);
        return v;
    };
    sys.drive_rate = [pulse](double t) {
        Eigen::VectorXd v(2);
        v << 0.0, pulse.rate(t);
        return v;
    };
    sys.drive_end = pulse.switch_off_eta();
    sys.breakpoints = pulse.breakpoints();
    return sys;
}

}  // namespace tmsdyn
