#pragma once

// Covariance-matrix machinery for two bosonic modes in the (D, d, D^dag, d^dag)
// ordering: symplectic form, squeezers, Heisenberg evolution, symplectic
// spectra and partial transposition.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace tmsdyn {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix<Complex, 4, 4>;

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Symplectic eigenvalues down to 1 - kPhysicalTolerance count as physical.
inline constexpr double kPhysicalTolerance = 1e-9;
/// Relative tolerance used when pairing the +nu/-nu eigenvalues of i*Omega*sigma.
inline constexpr double kPairingTolerance = 1e-9;
/// Relative tolerance on sigma - sigma^dag.
inline constexpr double kHermitianTolerance = 1e-10;

namespace detail {

inline double max_abs(const Matrix4c& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Matrix4c& m, double rel_tol = kHermitianTolerance) {
    return max_abs(m - m.adjoint()) <= rel_tol * std::max(1.0, max_abs(m));
}

}  // namespace detail

/// A 4x4 complex matrix representing a linear (Bogoliubov) map on the mode
/// operators. The defining relation S^dag Omega S = Omega is not enforced at
/// construction; use is_symplectic().
class SymplecticMatrix {
public:
    SymplecticMatrix() : m_(Matrix4c::Identity()) {}
    explicit SymplecticMatrix(Matrix4c m) : m_(std::move(m)) {}

    const Matrix4c& matrix() const { return m_; }
    Complex operator()(int row, int col) const { return m_(row, col); }

    friend SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b) {
        return SymplecticMatrix(a.m_ * b.m_);
    }

private:
    Matrix4c m_;
};

/// Second-moment matrix of a zero-mean two-mode Gaussian state. Always Hermitian.
class CovarianceMatrix {
public:
    CovarianceMatrix() : m_(Matrix4c::Identity()) {}

    /// Throws DomainError if `m` is not Hermitian. The lower triangle is
    /// re-symmetrised so that roundoff from products never accumulates.
    explicit CovarianceMatrix(const Matrix4c& m) {
        if (!m.allFinite()) throw DomainError("covariance matrix has non-finite entries");
        if (!detail::is_hermitian(m)) throw DomainError("covariance matrix is not Hermitian");
        m_ = 0.5 * (m + m.adjoint());
    }

    const Matrix4c& matrix() const { return m_; }
    Complex operator()(int row, int col) const { return m_(row, col); }

private:
    Matrix4c m_;
};

/// Williamson form parameters (nu_D, nu_d) of a two-mode state.
struct WilliamsonSpectrum {
    double nu_D = 1.0;
    double nu_d = 1.0;
};

/// Symplectic eigenvalues sorted ascending.
struct SymplecticSpectrum {
    double low = 1.0;
    double high = 1.0;
};

/// Two-mode squeezed thermal state: squeezing r applied to diag(nu_D, nu_d, nu_D, nu_d).
struct InitialStateSpec {
    double r = 0.0;
    double nu_D = 1.0;
    double nu_d = 1.0;

    void validate() const {
        if (!std::isfinite(r)) throw DomainError("squeezing parameter r must be finite");
        if (!(nu_D >= 1.0 - kPhysicalTolerance) || !(nu_d >= 1.0 - kPhysicalTolerance) ||
            !std::isfinite(nu_D) || !std::isfinite(nu_d)) {
            throw DomainError("symplectic eigenvalues must satisfy nu >= 1");
        }
    }
};

/// Omega with i*Omega = diag(1, 1, -1, -1).
inline Matrix4c symplectic_form() {
    const Complex i(0.0, 1.0);
    Matrix4c omega = Matrix4c::Zero();
    omega(0, 0) = -i;
    omega(1, 1) = -i;
    omega(2, 2) = i;
    omega(3, 3) = i;
    return omega;
}

/// max |S^dag Omega S - Omega|.
inline double symplectic_defect(const SymplecticMatrix& s) {
    const Matrix4c omega = symplectic_form();
    return detail::max_abs(s.matrix().adjoint() * omega * s.matrix() - omega);
}

inline bool is_symplectic(const SymplecticMatrix& s, double tol) {
    if (!(tol > 0.0)) throw DomainError("is_symplectic: tolerance must be positive");
    return symplectic_defect(s) <= tol;
}

/// nu = coth(2 omega / T) in units hbar = k_B = 1; exactly 1 at T = 0.
inline double thermal_nu(double omega, double temperature) {
    if (!(omega > 0.0)) throw DomainError("thermal_nu: frequency must be positive");
    if (!(temperature >= 0.0)) throw DomainError("thermal_nu: temperature must be non-negative");
    if (temperature == 0.0) return 1.0;
    const double x = 2.0 * omega / temperature;
    if (x > 40.0) return 1.0;  // coth(x) - 1 < 1e-34
    return 1.0 / std::tanh(x);
}

/// Two-mode squeezer: cosh r on the diagonal, sinh r coupling D <-> d^dag and d <-> D^dag.
inline SymplecticMatrix two_mode_squeezer(double r) {
    const double c = std::cosh(r);
    const double s = std::sinh(r);
    Matrix4c m = Matrix4c::Zero();
    m(0, 0) = c;
    m(1, 1) = c;
    m(2, 2) = c;
    m(3, 3) = c;
    m(0, 3) = s;
    m(1, 2) = s;
    m(2, 1) = s;
    m(3, 0) = s;
    return SymplecticMatrix(m);
}

/// sigma_f = S^dag sigma_i S.
inline CovarianceMatrix evolve_state(const CovarianceMatrix& sigma, const SymplecticMatrix& s) {
    return CovarianceMatrix(Matrix4c(s.matrix().adjoint() * sigma.matrix() * s.matrix()));
}

inline CovarianceMatrix williamson_state(const WilliamsonSpectrum& nu) {
    Matrix4c m = Matrix4c::Zero();
    m(0, 0) = nu.nu_D;
    m(1, 1) = nu.nu_d;
    m(2, 2) = nu.nu_D;
    m(3, 3) = nu.nu_d;
    return CovarianceMatrix(m);
}

/// sigma_i = S_TMS(r)^dag diag(nu_D, nu_d, nu_D, nu_d) S_TMS(r).
inline CovarianceMatrix initial_state(const InitialStateSpec& spec) {
    spec.validate();
    return evolve_state(williamson_state({spec.nu_D, spec.nu_d}), two_mode_squeezer(spec.r));
}

/// P sigma P with P swapping d and d^dag. Pure permutation, so exactly involutive.
inline CovarianceMatrix partial_transpose(const CovarianceMatrix& sigma) {
    static constexpr std::array<int, 4> perm{0, 3, 2, 1};
    Matrix4c out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(r, c) = sigma(perm[r], perm[c]);
    return CovarianceMatrix(out);
}

/// Absolute values of the eigenvalues of i*Omega*sigma, paired into (low, high).
inline SymplecticSpectrum symplectic_eigenvalues(const Matrix4c& sigma) {
    if (!sigma.allFinite()) throw DomainError("symplectic_eigenvalues: non-finite input");
    if (!detail::is_hermitian(sigma)) throw DomainError("symplectic_eigenvalues: input is not Hermitian");
    const Complex i(0.0, 1.0);
    const Matrix4c k = i * symplectic_form();
    Eigen::ComplexEigenSolver<Matrix4c> solver(k * sigma, false);
    if (solver.info() != Eigen::Success) throw DomainError("symplectic_eigenvalues: eigen-solver failed");
    std::array<double, 4> mags{};
    for (int j = 0; j < 4; ++j) mags[j] = std::abs(solver.eigenvalues()(j));
    std::sort(mags.begin(), mags.end());
    const double scale = std::max({1.0, mags[3], detail::max_abs(sigma)});
    if (std::abs(mags[0] - mags[1]) > kPairingTolerance * scale ||
        std::abs(mags[2] - mags[3]) > kPairingTolerance * scale) {
        throw DomainError("symplectic_eigenvalues: eigenvalues do not come in +/- pairs");
    }
    return {0.5 * (mags[0] + mags[1]), 0.5 * (mags[2] + mags[3])};
}

inline SymplecticSpectrum symplectic_eigenvalues(const CovarianceMatrix& sigma) {
    return symplectic_eigenvalues(sigma.matrix());
}

inline bool is_physical(const CovarianceMatrix& sigma) {
    return symplectic_eigenvalues(sigma).low >= 1.0 - kPhysicalTolerance;
}

/// det(sigma); equals (nu_D nu_d)^2 and is 1 iff the state is pure.
inline double purity(const CovarianceMatrix& sigma) { return sigma.matrix().determinant().real(); }

// ---------------------------------------------------------------------------
// Decoupled evolution factors for the two-mode-squeezing subalgebra
// {G_D, G_d, G_+, G_-}. Each factor is exp(-F Omega G) written out in closed form.

/// Local phase rotation of mode D by F_D / 2.
inline SymplecticMatrix phase_rotation_D(double f_D) {
    const Complex i(0.0, 1.0);
    Matrix4c m = Matrix4c::Identity();
    m(0, 0) = std::exp(-i * (f_D / 2.0));
    m(2, 2) = std::exp(i * (f_D / 2.0));
    return SymplecticMatrix(m);
}

/// Local phase rotation of mode d by F_d / 2.
inline SymplecticMatrix phase_rotation_d(double f_d) {
    const Complex i(0.0, 1.0);
    Matrix4c m = Matrix4c::Identity();
    m(1, 1) = std::exp(-i * (f_d / 2.0));
    m(3, 3) = std::exp(i * (f_d / 2.0));
    return SymplecticMatrix(m);
}

/// Squeezer generated by G_+ = D^dag d^dag + D d.
inline SymplecticMatrix squeeze_plus(double f_plus) {
    const Complex i(0.0, 1.0);
    const double c = std::cosh(f_plus / 2.0);
    const double s = std::sinh(f_plus / 2.0);
    Matrix4c m = Matrix4c::Zero();
    m(0, 0) = c;
    m(1, 1) = c;
    m(2, 2) = c;
    m(3, 3) = c;
    m(0, 3) = -i * s;
    m(1, 2) = -i * s;
    m(2, 1) = i * s;
    m(3, 0) = i * s;
    return SymplecticMatrix(m);
}

/// Squeezer generated by G_- = i (D^dag d^dag - D d); squeeze_minus(2r) == two_mode_squeezer(r).
inline SymplecticMatrix squeeze_minus(double f_minus) { return two_mode_squeezer(f_minus / 2.0); }

/// The four decoupling functions; theta_plus/minus = F_D +/- F_d.
struct DecouplingAngles {
    double f_plus = 0.0;
    double f_minus = 0.0;
    double theta_plus = 0.0;
    double theta_minus = 0.0;

    double f_D() const { return 0.5 * (theta_plus + theta_minus); }
    double f_d() const { return 0.5 * (theta_plus - theta_minus); }
};

/// S = S_- S_+ S_d S_D written entry by entry; all entries not set below vanish.
inline SymplecticMatrix decoupled_evolution(const DecouplingAngles& a) {
    const Complex i(0.0, 1.0);
    const double cp = std::cosh(a.f_plus / 2.0);
    const double sp = std::sinh(a.f_plus / 2.0);
    const double cm = std::cosh(a.f_minus / 2.0);
    const double sm = std::sinh(a.f_minus / 2.0);
    const Complex diag_core(cm * cp, sm * sp);
    const Complex cross_core(sm * cp, -cm * sp);
    const Complex phase_D = std::exp(-i * (a.f_D() / 2.0));
    const Complex phase_d = std::exp(-i * (a.f_d() / 2.0));

    Matrix4c m = Matrix4c::Zero();
    m(0, 0) = phase_D * diag_core;
    m(1, 1) = phase_d * diag_core;
    m(0, 3) = std::conj(phase_d) * cross_core;
    m(1, 2) = std::conj(phase_D) * cross_core;
    m(2, 2) = std::conj(m(0, 0));
    m(3, 3) = std::conj(m(1, 1));
    m(2, 1) = std::conj(m(0, 3));
    m(3, 0) = std::conj(m(1, 2));
    return SymplecticMatrix(m);
}

}  // namespace tmsdyn
