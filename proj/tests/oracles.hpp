#pragma once

// Test-only reference computations, built on formulas independent of the
// library code paths they check.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "tmsdyn/core_symplectic.hpp"

namespace oracle {

/// Real covariance of (x_D, p_D, x_d, p_d) from the complex (D, d, D^dag, d^dag) matrix.
/// With a = (x + i p) / sqrt 2 the map L is unitary, so V = L^dag sigma L.
inline Eigen::Matrix4d quadrature_covariance(const tmsdyn::Matrix4c& sigma) {
    const std::complex<double> i(0.0, 1.0);
    const double s = 1.0 / std::sqrt(2.0);
    // Rows: D, d, D^dag, d^dag. Columns: x_D, x_d, p_D, p_d.
    tmsdyn::Matrix4c l = tmsdyn::Matrix4c::Zero();
    l(0, 0) = s;
    l(0, 2) = i * s;
    l(1, 1) = s;
    l(1, 3) = i * s;
    l(2, 0) = s;
    l(2, 2) = -i * s;
    l(3, 1) = s;
    l(3, 3) = -i * s;
    const tmsdyn::Matrix4c v = l.adjoint() * sigma * l;
    // Reorder (x_D, x_d, p_D, p_d) -> (x_D, p_D, x_d, p_d).
    const int perm[4] = {0, 2, 1, 3};
    Eigen::Matrix4d out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(r, c) = v(perm[r], perm[c]).real();
    return out;
}

/// Two-mode symplectic eigenvalues from the invariants det V and
/// Delta = det A + det B + 2 det C (Serafini's formula), ascending.
inline std::pair<double, double> invariant_symplectic_eigenvalues(const Eigen::Matrix4d& v) {
    const double det_a = v.block<2, 2>(0, 0).determinant();
    const double det_b = v.block<2, 2>(2, 2).determinant();
    const double det_c = v.block<2, 2>(0, 2).determinant();
    const double delta = det_a + det_b + 2.0 * det_c;
    const double disc = std::sqrt(std::max(0.0, delta * delta - 4.0 * v.determinant()));
    return {std::sqrt((delta - disc) / 2.0), std::sqrt((delta + disc) / 2.0)};
}

/// Partial transpose in quadratures: p_d -> -p_d.
inline Eigen::Matrix4d flip_pd(const Eigen::Matrix4d& v) {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(3, 3) = -1.0;
    return f * v * f;
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return sum * h / 3.0;
}

/// Random symplectic matrix: product of every generated factor with random arguments.
/// `squeeze` bounds each squeezing argument; determinant-based checks lose about
/// eps * |sigma|^4, so they use small values.
inline tmsdyn::SymplecticMatrix random_symplectic(std::mt19937_64& rng, double squeeze = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    tmsdyn::SymplecticMatrix s;
    for (int k = 0; k < 3; ++k) {
        s = s * tmsdyn::two_mode_squeezer(squeeze * u(rng)) * tmsdyn::phase_rotation_D(3.0 * u(rng)) *
            tmsdyn::squeeze_plus(squeeze * u(rng)) * tmsdyn::phase_rotation_d(3.0 * u(rng)) *
            tmsdyn::squeeze_minus(squeeze * u(rng));
    }
    return s;
}

}  // namespace oracle
