#pragma once

// Numerical integration of the decoupling functions (Theta_+, Theta_-, F_+, F_-):
//
//   Theta_+' = 2 chi cosh F_- / cosh F_+
//   Theta_-' = (1 - eps^2) / eps
//   F_+'     = -chi sinh F_-
//   F_-'     = h(eta) + chi cosh F_- tanh F_+
//
// with all functions zero at eta = 0. Theta_- is skipped when chi is given
// without an epsilon.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tmsdyn/core_symplectic.hpp"
#include "tmsdyn/hamiltonian_model.hpp"
#include "tmsdyn/ode_integrators.hpp"

namespace tmsdyn {

struct FState {
    double eta = 0.0;
    double theta_plus = 0.0;
    std::optional<double> theta_minus;
    double f_plus = 0.0;
    double f_minus = 0.0;

    DecouplingAngles angles() const { return {f_plus, f_minus, theta_plus, theta_minus.value_or(0.0)}; }
};

struct StateRate {
    double theta_plus = 0.0;
    std::optional<double> theta_minus;
    double f_plus = 0.0;
    double f_minus = 0.0;
};

inline StateRate rhs(const FState& s, double eta, const CouplingPulse& pulse, const ModelParams& model) {
    const double chi = model.chi();
    const double ch_m = std::cosh(s.f_minus);
    StateRate r;
    r.theta_plus = 2.0 * chi * ch_m / std::cosh(s.f_plus);
    r.theta_minus = model.theta_minus_rate();
    r.f_plus = -chi * std::sinh(s.f_minus);
    r.f_minus = pulse.value(eta) + chi * ch_m * std::tanh(s.f_plus);
    return r;
}

using RhsFunction = std::function<StateRate(const FState&, double, const CouplingPulse&, const ModelParams&)>;

enum class IntegrationMethod { RK4, RK45 };

struct IntegratorConfig {
    IntegrationMethod method = IntegrationMethod::RK45;
    double step = 1e-3;  // RK4 only
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.5;  // RK45 only
    int sample_stride = 1;

    static IntegratorConfig fixed_step(double h) {
        IntegratorConfig c;
        c.method = IntegrationMethod::RK4;
        c.step = h;
        return c;
    }

    void validate() const {
        if (method == IntegrationMethod::RK4 && !(step > 0.0)) throw DomainError("integrator: step must be positive");
        if (method == IntegrationMethod::RK45) {
            if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("integrator: tolerances must be positive");
            if (!(max_step > 0.0)) throw DomainError("integrator: max_step must be positive");
        }
        if (sample_stride < 1) throw DomainError("integrator: sample_stride must be >= 1");
    }
};

class Trajectory {
public:
    Trajectory(std::vector<FState> samples, CouplingPulse pulse, ModelParams model)
        : samples_(std::move(samples)), pulse_(std::move(pulse)), model_(model) {}

    const std::vector<FState>& samples() const { return samples_; }
    const CouplingPulse& pulse() const { return pulse_; }
    const ModelParams& model() const { return model_; }
    double chi() const { return model_.chi(); }
    std::size_t size() const { return samples_.size(); }
    const FState& front() const { return samples_.front(); }
    const FState& back() const { return samples_.back(); }

    /// Index of the first sample at or after the switch-off.
    std::size_t tail_begin() const {
        const double eta_f = pulse_.switch_off_eta();
        const auto it = std::lower_bound(samples_.begin(), samples_.end(), eta_f,
                                         [](const FState& s, double e) { return s.eta < e; });
        return static_cast<std::size_t>(it - samples_.begin());
    }

    /// Linear interpolation between stored samples.
    FState at(double eta) const {
        if (samples_.empty()) throw DomainError("empty trajectory");
        if (eta < samples_.front().eta || eta > samples_.back().eta)
            throw DomainError("Trajectory::at: eta outside the integrated range");
        const auto it = std::lower_bound(samples_.begin(), samples_.end(), eta,
                                         [](const FState& s, double e) { return s.eta < e; });
        if (it->eta == eta) return *it;
        const FState& b = *it;
        const FState& a = *(it - 1);
        const double w = (eta - a.eta) / (b.eta - a.eta);
        auto lerp = [w](double x, double y) { return x + w * (y - x); };
        FState out;
        out.eta = eta;
        out.theta_plus = lerp(a.theta_plus, b.theta_plus);
        if (a.theta_minus && b.theta_minus) out.theta_minus = lerp(*a.theta_minus, *b.theta_minus);
        out.f_plus = lerp(a.f_plus, b.f_plus);
        out.f_minus = lerp(a.f_minus, b.f_minus);
        return out;
    }

private:
    std::vector<FState> samples_;
    CouplingPulse pulse_;
    ModelParams model_;
};

/// Integrates from the zero state at eta = 0 to eta_end. Steps land exactly on the
/// switch-off time, so the trajectory always holds a sample at eta_f when eta_f < eta_end.
inline Trajectory integrate(const CouplingPulse& pulse, const ModelParams& model, double eta_end,
                            const IntegratorConfig& config, const RhsFunction& rhs_fn) {
    if (!(eta_end > 0.0) || !std::isfinite(eta_end)) throw DomainError("integrate: eta_end must be positive");
    config.validate();

    using Y = ode::State<4>;  // theta_plus, theta_minus, f_plus, f_minus
    const bool with_theta_minus = model.has_epsilon();
    auto to_state = [&](double t, const Y& y) {
        FState s;
        s.eta = t;
        s.theta_plus = y[0];
        if (with_theta_minus) s.theta_minus = y[1];
        s.f_plus = y[2];
        s.f_minus = y[3];
        return s;
    };
    auto system = [&](double t, const Y& y) {
        const StateRate r = rhs_fn(to_state(t, y), t, pulse, model);
        return Y{r.theta_plus, r.theta_minus.value_or(0.0), r.f_plus, r.f_minus};
    };

    std::vector<FState> samples;
    long counter = 0;
    auto observe = [&](double t, const Y& y) {
        const bool keep = counter % config.sample_stride == 0 || t == eta_end;
        ++counter;
        if (keep) samples.push_back(to_state(t, y));
    };

    const std::array<double, 1> stops{pulse.switch_off_eta()};
    const Y y0{};
    if (config.method == IntegrationMethod::RK4) {
        ode::integrate_rk4<4>(system, y0, 0.0, eta_end, config.step, observe, stops);
    } else {
        ode::AdaptiveOptions opt;
        opt.rel_tol = config.rel_tol;
        opt.abs_tol = config.abs_tol;
        opt.max_step = config.max_step;
        ode::integrate_dopri5<4>(system, y0, 0.0, eta_end, opt, observe, stops);
    }
    return Trajectory(std::move(samples), pulse, model);
}

inline Trajectory integrate(const CouplingPulse& pulse, const ModelParams& model, double eta_end,
                            const IntegratorConfig& config = {}) {
    return integrate(pulse, model, eta_end, config,
                     [](const FState& s, double eta, const CouplingPulse& p, const ModelParams& m) {
                         return rhs(s, eta, p, m);
                     });
}

/// Theta_-(eta) = (1 - eps^2) / eps * eta.
inline double theta_minus_closed(double epsilon, double eta) {
    if (!(epsilon > 0.0)) throw DomainError("theta_minus_closed: epsilon must be positive");
    return (1.0 - epsilon * epsilon) / epsilon * eta;
}

/// Max over interior samples of |three-point derivative - rhs|, over every integrated component.
inline double residual(const Trajectory& traj) {
    const auto& s = traj.samples();
    if (s.size() < 3) throw DomainError("residual: need at least three samples");
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double h1 = s[i].eta - s[i - 1].eta;
        const double h2 = s[i + 1].eta - s[i].eta;
        const double w0 = -h2 / (h1 * (h1 + h2));
        const double w1 = (h2 - h1) / (h1 * h2);
        const double w2 = h1 / (h2 * (h1 + h2));
        auto fd = [&](auto get) { return w0 * get(s[i - 1]) + w1 * get(s[i]) + w2 * get(s[i + 1]); };

        const StateRate r = rhs(s[i], s[i].eta, traj.pulse(), traj.model());
        worst = std::max(worst, std::abs(fd([](const FState& x) { return x.theta_plus; }) - r.theta_plus));
        worst = std::max(worst, std::abs(fd([](const FState& x) { return x.f_plus; }) - r.f_plus));
        worst = std::max(worst, std::abs(fd([](const FState& x) { return x.f_minus; }) - r.f_minus));
        if (s[i].theta_minus && r.theta_minus)
            worst = std::max(worst, std::abs(fd([](const FState& x) { return *x.theta_minus; }) - *r.theta_minus));
    }
    return worst;
}

}  // namespace tmsdyn
