#pragma once

// Dimensionless two-mode-squeezing Hamiltonian, its spectrum, and the coupling
// pulse h(eta) that drives it.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tmsdyn/core_symplectic.hpp"
#include "tmsdyn/quadrature.hpp"

namespace tmsdyn {

// ---------------------------------------------------------------------------
// Mode frequencies and the derived oscillation scale.

inline double chi_from_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive and finite");
    return (1.0 + epsilon * epsilon) / (2.0 * epsilon);
}

enum class EpsilonBranch { Lower, Upper };

/// Inverse of chi_from_epsilon. Lower branch gives epsilon <= 1, upper gives epsilon >= 1.
inline double epsilon_from_chi(double chi, EpsilonBranch branch) {
    if (!(chi >= 1.0) || !std::isfinite(chi)) throw DomainError("epsilon_from_chi: chi must be >= 1");
    const double root = std::sqrt((chi - 1.0) * (chi + 1.0));
    return branch == EpsilonBranch::Lower ? 1.0 / (chi + root) : chi + root;
}

struct ModePair {
    double omega_D = 1.0;
    double omega_d = 1.0;

    ModePair() = default;
    ModePair(double w_D, double w_d) : omega_D(w_D), omega_d(w_d) {
        if (!(w_D > 0.0) || !(w_d > 0.0) || !std::isfinite(w_D) || !std::isfinite(w_d))
            throw DomainError("mode frequencies must be positive and finite");
    }

    double epsilon() const { return std::sqrt(omega_d / omega_D); }
    double chi() const { return chi_from_epsilon(epsilon()); }
    /// g_c = sqrt(omega_D omega_d) / 2; also the factor converting lab time to eta.
    double critical_coupling() const { return 0.5 * std::sqrt(omega_D * omega_d); }
};

/// The parameters the ODE system needs: chi always, epsilon only when the run is
/// tied to physical frequencies. A free chi may lie below 1.
class ModelParams {
public:
    static ModelParams from_chi(double chi) {
        if (!(chi > 0.0) || !std::isfinite(chi)) throw DomainError("chi must be positive and finite");
        return ModelParams(chi, std::nullopt);
    }
    static ModelParams from_epsilon(double epsilon) {
        return ModelParams(chi_from_epsilon(epsilon), epsilon);
    }
    static ModelParams from_modes(const ModePair& modes) { return from_epsilon(modes.epsilon()); }

    double chi() const { return chi_; }
    const std::optional<double>& epsilon() const { return epsilon_; }
    bool has_epsilon() const { return epsilon_.has_value(); }
    /// Theta_- rate (1 - eps^2) / eps, when epsilon is known.
    std::optional<double> theta_minus_rate() const {
        if (!epsilon_) return std::nullopt;
        return (1.0 - *epsilon_ * *epsilon_) / *epsilon_;
    }

private:
    ModelParams(double chi, std::optional<double> eps) : chi_(chi), epsilon_(eps) {}
    double chi_;
    std::optional<double> epsilon_;
};

// ---------------------------------------------------------------------------
// Coupling pulses.

inline constexpr double kDefaultSwitchOffThreshold = 1e-12;

/// Raised when a pulse never decays below the switch-off threshold.
class NoSwitchOffError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NullShape {};

/// h(eta) = lambda eta^2 exp(-eta^2 / eta0^2).
struct GaussianQuadratic {
    double lambda = 0.0;
    double eta0 = 1.0;
};

/// Piecewise-linear samples, clamped to zero outside [eta.front(), eta.back()].
struct Tabulated {
    std::vector<double> eta;
    std::vector<double> h;
};

/// h = amplitude * (1 - cos(2 pi (eta - start) / duration)) / 2 on [start, start + duration].
struct RaisedCosine {
    double amplitude = 0.0;
    double start = 0.0;
    double duration = 1.0;
};

using PulseShape = std::variant<NullShape, GaussianQuadratic, Tabulated, RaisedCosine>;

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void validate_shape(const PulseShape& shape) {
    std::visit(overloaded{
                   [](const NullShape&) {},
                   [](const GaussianQuadratic& g) {
                       if (!std::isfinite(g.lambda)) throw DomainError("gaussian pulse: lambda must be finite");
                       if (!(g.eta0 > 0.0) || !std::isfinite(g.eta0))
                           throw DomainError("gaussian pulse: eta0 must be positive and finite");
                   },
                   [](const Tabulated& t) {
                       if (t.eta.size() != t.h.size()) throw DomainError("tabulated pulse: eta/h length mismatch");
                       if (t.eta.size() < 2) throw DomainError("tabulated pulse: need at least two samples");
                       if (!(t.eta.front() >= 0.0)) throw DomainError("tabulated pulse: samples must start at eta >= 0");
                       for (std::size_t k = 0; k < t.eta.size(); ++k) {
                           if (!std::isfinite(t.eta[k]) || !std::isfinite(t.h[k]))
                               throw DomainError("tabulated pulse: non-finite sample");
                           if (k > 0 && !(t.eta[k] > t.eta[k - 1]))
                               throw DomainError("tabulated pulse: eta must be strictly increasing");
                       }
                   },
                   [](const RaisedCosine& c) {
                       if (!std::isfinite(c.amplitude)) throw DomainError("raised-cosine pulse: amplitude must be finite");
                       if (!(c.start >= 0.0) || !std::isfinite(c.start))
                           throw DomainError("raised-cosine pulse: start must be >= 0");
                       if (!(c.duration > 0.0) || !std::isfinite(c.duration))
                           throw DomainError("raised-cosine pulse: duration must be positive");
                   },
               },
               shape);
}

/// Untruncated h(eta).
inline double shape_value(const PulseShape& shape, double eta) {
    return std::visit(
        overloaded{
            [](const NullShape&) { return 0.0; },
            [eta](const GaussianQuadratic& g) {
                return g.lambda * eta * eta * std::exp(-(eta * eta) / (g.eta0 * g.eta0));
            },
            [eta](const Tabulated& t) {
                if (eta < t.eta.front() || eta > t.eta.back()) return 0.0;
                const auto it = std::upper_bound(t.eta.begin(), t.eta.end(), eta);
                if (it == t.eta.end()) return t.h.back();
                const auto k = static_cast<std::size_t>(it - t.eta.begin());
                const double w = (eta - t.eta[k - 1]) / (t.eta[k] - t.eta[k - 1]);
                return t.h[k - 1] + w * (t.h[k] - t.h[k - 1]);
            },
            [eta](const RaisedCosine& c) {
                if (eta < c.start || eta > c.start + c.duration) return 0.0;
                const double theta = 2.0 * std::numbers::pi * (eta - c.start) / c.duration;
                return 0.5 * c.amplitude * (1.0 - std::cos(theta));
            },
        },
        shape);
}

/// Untruncated dh/deta (one-sided at kinks of tabulated pulses).
inline double shape_rate(const PulseShape& shape, double eta) {
    return std::visit(
        overloaded{
            [](const NullShape&) { return 0.0; },
            [eta](const GaussianQuadratic& g) {
                const double s2 = g.eta0 * g.eta0;
                return g.lambda * std::exp(-(eta * eta) / s2) * (2.0 * eta - 2.0 * eta * eta * eta / s2);
            },
            [eta](const Tabulated& t) {
                if (eta < t.eta.front() || eta >= t.eta.back()) return 0.0;
                const auto it = std::upper_bound(t.eta.begin(), t.eta.end(), eta);
                const auto k = static_cast<std::size_t>(it - t.eta.begin());
                return (t.h[k] - t.h[k - 1]) / (t.eta[k] - t.eta[k - 1]);
            },
            [eta](const RaisedCosine& c) {
                if (eta < c.start || eta > c.start + c.duration) return 0.0;
                const double theta = 2.0 * std::numbers::pi * (eta - c.start) / c.duration;
                return c.amplitude * std::numbers::pi / c.duration * std::sin(theta);
            },
        },
        shape);
}

/// Bisection for the crossing of a monotone function on [lo, hi]; `above(lo) != above(hi)`.
template <typename Pred>
double bisect(Pred above, double lo, double hi) {
    const bool lo_above = above(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (above(mid) == lo_above)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

}  // namespace detail

/// Smallest eta_f with |h(eta)| < threshold for every eta >= eta_f.
inline double pulse_switch_off(const PulseShape& shape, double threshold) {
    if (!(threshold > 0.0)) throw DomainError("pulse_switch_off: threshold must be positive");
    detail::validate_shape(shape);
    return std::visit(
        detail::overloaded{
            [](const NullShape&) { return 0.0; },
            [threshold](const GaussianQuadratic& g) {
                const double lam = std::abs(g.lambda);
                const double peak = lam * g.eta0 * g.eta0 / std::numbers::e;
                if (peak < threshold) return 0.0;
                // The envelope decreases monotonically beyond its maximum at eta0.
                auto above = [&](double eta) {
                    return lam * eta * eta * std::exp(-(eta * eta) / (g.eta0 * g.eta0)) >= threshold;
                };
                double hi = 2.0 * g.eta0;
                while (above(hi)) {
                    hi *= 2.0;
                    if (hi > 1e6 * g.eta0) throw NoSwitchOffError("gaussian pulse never decays below threshold");
                }
                return detail::bisect(above, g.eta0, hi);
            },
            [threshold](const Tabulated& t) {
                std::optional<std::size_t> last;
                for (std::size_t k = 0; k < t.h.size(); ++k)
                    if (std::abs(t.h[k]) >= threshold) last = k;
                if (!last) return 0.0;
                return *last + 1 < t.eta.size() ? t.eta[*last + 1] : t.eta.back();
            },
            [threshold](const RaisedCosine& c) {
                const double a = std::abs(c.amplitude);
                if (a < threshold) return 0.0;
                const double arg = std::clamp(1.0 - 2.0 * threshold / a, -1.0, 1.0);
                const double theta = 2.0 * std::numbers::pi - std::acos(arg);
                return c.start + c.duration * theta / (2.0 * std::numbers::pi);
            },
        },
        shape);
}

/// A coupling pulse with its switch-off time; h is exactly zero from eta_f on.
class CouplingPulse {
public:
    CouplingPulse() : CouplingPulse(NullShape{}) {}

    explicit CouplingPulse(PulseShape shape, double threshold = kDefaultSwitchOffThreshold)
        : shape_(std::move(shape)), threshold_(threshold) {
        detail::validate_shape(shape_);
        switch_off_ = pulse_switch_off(shape_, threshold_);
        if (std::abs(detail::shape_value(shape_, 0.0)) > threshold_)
            throw DomainError("coupling pulse must vanish at eta = 0");
    }

    static CouplingPulse null() { return CouplingPulse(NullShape{}); }
    static CouplingPulse gaussian_quadratic(double lambda, double eta0,
                                            double threshold = kDefaultSwitchOffThreshold) {
        return CouplingPulse(GaussianQuadratic{lambda, eta0}, threshold);
    }
    static CouplingPulse tabulated(std::vector<double> eta, std::vector<double> h,
                                   double threshold = kDefaultSwitchOffThreshold) {
        return CouplingPulse(Tabulated{std::move(eta), std::move(h)}, threshold);
    }
    static CouplingPulse raised_cosine(double amplitude, double start, double duration,
                                       double threshold = kDefaultSwitchOffThreshold) {
        return CouplingPulse(RaisedCosine{amplitude, start, duration}, threshold);
    }

    const PulseShape& shape() const { return shape_; }
    double threshold() const { return threshold_; }
    double switch_off_eta() const { return switch_off_; }
    bool is_null() const { return std::holds_alternative<NullShape>(shape_) || switch_off_ == 0.0; }

    double value(double eta) const {
        if (eta >= switch_off_) return 0.0;
        return detail::shape_value(shape_, eta);
    }
    double rate(double eta) const {
        if (eta >= switch_off_) return 0.0;
        return detail::shape_rate(shape_, eta);
    }

    /// Points where h or its derivative may be non-smooth, plus the switch-off.
    std::vector<double> breakpoints() const {
        std::vector<double> pts{switch_off_};
        if (const auto* t = std::get_if<Tabulated>(&shape_)) pts.insert(pts.end(), t->eta.begin(), t->eta.end());
        if (const auto* c = std::get_if<RaisedCosine>(&shape_)) {
            pts.push_back(c->start);
            pts.push_back(c->start + c->duration);
        }
        if (const auto* g = std::get_if<GaussianQuadratic>(&shape_)) pts.push_back(g->eta0);
        return pts;
    }

private:
    PulseShape shape_;
    double threshold_;
    double switch_off_ = 0.0;
};

inline double pulse_value(const CouplingPulse& pulse, double eta) {
    if (!(eta >= 0.0)) throw DomainError("pulse_value: eta must be >= 0");
    return pulse.value(eta);
}

inline double pulse_switch_off(const CouplingPulse& pulse, double threshold) {
    return pulse_switch_off(pulse.shape(), threshold);
}

// ---------------------------------------------------------------------------
// Hamiltonian matrix and spectrum.

struct HamiltonianMatrix {
    Matrix4c entries;
};

/// H = 1/2 [diag(1/eps, eps, 1/eps, eps) + i h at (1,4), (2,3) and -i h at (3,2), (4,1)].
inline HamiltonianMatrix hamiltonian_matrix(double epsilon, double h) {
    if (!(epsilon > 0.0)) throw DomainError("hamiltonian_matrix: epsilon must be positive");
    const Complex i(0.0, 1.0);
    Matrix4c m = Matrix4c::Zero();
    m(0, 0) = 0.5 / epsilon;
    m(1, 1) = 0.5 * epsilon;
    m(2, 2) = 0.5 / epsilon;
    m(3, 3) = 0.5 * epsilon;
    m(0, 3) = 0.5 * i * h;
    m(1, 2) = 0.5 * i * h;
    m(2, 1) = -0.5 * i * h;
    m(3, 0) = -0.5 * i * h;
    return {m};
}

struct HamiltonianSpectrum {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
};

/// lambda_+/- = (chi +/- sqrt(chi^2 + h^2 - 1)) / 2, each doubly degenerate.
inline HamiltonianSpectrum hamiltonian_eigenvalues(double chi, double h) {
    if (!(chi >= 1.0)) throw DomainError("hamiltonian_eigenvalues: chi must be >= 1");
    // (h - 1)(h + 1) vanishes exactly at |h| = 1, so lambda_- is then exactly 0.
    const double root = std::sqrt(chi * chi + (h - 1.0) * (h + 1.0));
    return {0.5 * (chi + root), 0.5 * (chi - root)};
}

struct StabilityReport {
    bool ok = true;
    double sup_abs_h = 0.0;
    double eta_at_sup = 0.0;
    /// First eta with |h| > 1, if any.
    std::optional<double> first_violation_eta;
};

/// Checks sup |h| <= 1, the condition for a spectrum bounded from below.
inline StabilityReport stability_check(const CouplingPulse& pulse) {
    StabilityReport report;
    std::visit(
        detail::overloaded{
            [](const NullShape&) {},
            [&](const GaussianQuadratic& g) {
                if (pulse.switch_off_eta() == 0.0) return;
                const double lam = std::abs(g.lambda);
                report.sup_abs_h = lam * g.eta0 * g.eta0 / std::numbers::e;
                report.eta_at_sup = g.eta0;
                if (report.sup_abs_h > 1.0) {
                    auto above = [&](double eta) {
                        return lam * eta * eta * std::exp(-(eta * eta) / (g.eta0 * g.eta0)) > 1.0;
                    };
                    report.first_violation_eta = detail::bisect(above, 0.0, g.eta0);
                }
            },
            [&](const Tabulated& t) {
                for (std::size_t k = 0; k < t.h.size(); ++k) {
                    const double a = std::abs(t.h[k]);
                    if (a > report.sup_abs_h) {
                        report.sup_abs_h = a;
                        report.eta_at_sup = t.eta[k];
                    }
                    if (!report.first_violation_eta && a > 1.0) {
                        if (k == 0) {
                            report.first_violation_eta = t.eta[0];
                        } else {
                            // h is linear on the segment; solve h = sign(h_k).
                            const double target = std::copysign(1.0, t.h[k]);
                            const double w = (target - t.h[k - 1]) / (t.h[k] - t.h[k - 1]);
                            report.first_violation_eta = t.eta[k - 1] + w * (t.eta[k] - t.eta[k - 1]);
                        }
                    }
                }
            },
            [&](const RaisedCosine& c) {
                report.sup_abs_h = std::abs(c.amplitude);
                report.eta_at_sup = c.start + 0.5 * c.duration;
                if (report.sup_abs_h > 1.0) {
                    const double theta = std::acos(1.0 - 2.0 / report.sup_abs_h);
                    report.first_violation_eta = c.start + c.duration * theta / (2.0 * std::numbers::pi);
                }
            },
        },
        pulse.shape());
    report.ok = report.sup_abs_h <= 1.0;
    return report;
}

/// (int_0^eta_f |h|)^2; the run is perturbative when this is << 1.
inline double energy_input_bound(const CouplingPulse& pulse) {
    if (pulse.is_null()) return 0.0;
    const auto knots = pulse.breakpoints();
    const double integral = quadrature::integrate([&](double eta) { return std::abs(pulse.value(eta)); }, 0.0,
                                                  pulse.switch_off_eta(), knots);
    return integral * integral;
}

}  // namespace tmsdyn
