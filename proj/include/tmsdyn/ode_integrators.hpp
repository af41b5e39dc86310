#pragma once

// Explicit Runge-Kutta drivers for small fixed-size systems y' = f(t, y).
//
// integrate_dopri5 is the Dormand-Prince 5(4) pair with the usual mixed
// absolute/relative RMS error norm (Hairer, Norsett & Wanner, "Solving ODEs I",
// II.4). integrate_rk4 is the classical fixed-step scheme. Both call the
// observer after every accepted step, including the initial point.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmsdyn {

/// Raised when the solution stops being finite or the step size collapses.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double last_valid_t)
        : std::runtime_error(what + " (last valid eta = " + std::to_string(last_valid_t) + ")"),
          last_valid_t_(last_valid_t) {}
    double last_valid_eta() const { return last_valid_t_; }

private:
    double last_valid_t_;
};

namespace ode {

template <std::size_t N>
using State = std::array<double, N>;

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
};

struct AdaptiveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 selects a step automatically
    long max_steps = 10'000'000;
};

namespace detail {

template <std::size_t N>
bool all_finite(const State<N>& y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
    State<N> out = y;
    for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (const auto& [c, k] : terms) acc += c * (*k)[i];
        out[i] += h * acc;
    }
    return out;
}

/// Sorted interior stop points in (t0, t1]; t1 always last.
inline std::vector<double> stop_list(double t0, double t1, std::span<const double> stops) {
    std::vector<double> out;
    for (double s : stops)
        if (s > t0 && s < t1) out.push_back(s);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.push_back(t1);
    return out;
}

}  // namespace detail

/// Classical RK4 with step h, shortened so every entry of `stops` and t1 is hit exactly.
template <std::size_t N, typename System, typename Observer>
StepStats integrate_rk4(System&& f, State<N> y, double t0, double t1, double h, Observer&& observe,
                        std::span<const double> stops = {}) {
    if (!(h > 0.0)) throw std::invalid_argument("integrate_rk4: step must be positive");
    StepStats stats;
    double t = t0;
    observe(t, y);
    for (double target : detail::stop_list(t0, t1, stops)) {
        const auto n = static_cast<long>(std::ceil((target - t) / h * (1.0 - 1e-12)));
        const double t_start = t;
        for (long k = 1; k <= n; ++k) {
            const double t_next = k == n ? target : t_start + static_cast<double>(k) * h;
            const double dt = t_next - t;
            const State<N> k1 = f(t, y);
            const State<N> k2 = f(t + 0.5 * dt, detail::axpy<N>(y, 0.5 * dt, {{1.0, &k1}}));
            const State<N> k3 = f(t + 0.5 * dt, detail::axpy<N>(y, 0.5 * dt, {{1.0, &k2}}));
            const State<N> k4 = f(t + dt, detail::axpy<N>(y, dt, {{1.0, &k3}}));
            State<N> next = detail::axpy<N>(y, dt / 6.0, {{1.0, &k1}, {2.0, &k2}, {2.0, &k3}, {1.0, &k4}});
            stats.evaluations += 4;
            if (!detail::all_finite(next)) throw DivergenceError("non-finite state", t);
            y = next;
            t = t_next;
            ++stats.accepted;
            observe(t, y);
        }
    }
    return stats;
}

/// Adaptive Dormand-Prince 5(4). Steps land exactly on every entry of `stops` and on t1.
template <std::size_t N, typename System, typename Observer>
StepStats integrate_dopri5(System&& f, State<N> y, double t0, double t1, const AdaptiveOptions& opt,
                           Observer&& observe, std::span<const double> stops = {}) {
    if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0))
        throw std::invalid_argument("integrate_dopri5: tolerances must be positive");

    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                     a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;

    StepStats stats;
    double t = t0;
    observe(t, y);
    if (!(t1 > t0)) return stats;

    auto error_norm = [&](const State<N>& y0, const State<N>& y1, const State<N>& err) {
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            sum += (err[i] / sc) * (err[i] / sc);
        }
        return std::sqrt(sum / static_cast<double>(N));
    };

    State<N> k1 = f(t, y);
    ++stats.evaluations;

    double h = opt.initial_step;
    if (!(h > 0.0)) {
        // Starting step from the size of y and y' (Hairer's HINIT, first stage only).
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h = std::min(h, 1e-3 * (t1 - t0));
    }
    h = std::min(h, opt.max_step);

    bool last_rejected = false;
    for (double target : detail::stop_list(t0, t1, stops)) {
        while (t < target) {
            if (stats.accepted + stats.rejected >= opt.max_steps) throw DivergenceError("step budget exhausted", t);
            const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (h < min_step) throw DivergenceError("step size underflow", t);

            bool lands = false;
            double dt = std::min(h, opt.max_step);
            if (t + dt >= target || target - (t + dt) < min_step) {
                dt = target - t;
                lands = true;
            }

            const State<N> k2 = f(t + c2 * dt, detail::axpy<N>(y, dt, {{a21, &k1}}));
            const State<N> k3 = f(t + c3 * dt, detail::axpy<N>(y, dt, {{a31, &k1}, {a32, &k2}}));
            const State<N> k4 = f(t + c4 * dt, detail::axpy<N>(y, dt, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
            const State<N> k5 =
                f(t + c5 * dt, detail::axpy<N>(y, dt, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
            const State<N> k6 = f(t + dt, detail::axpy<N>(y, dt, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4},
                                                                   {a65, &k5}}));
            const State<N> next =
                detail::axpy<N>(y, dt, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
            const State<N> k7 = f(t + dt, next);
            stats.evaluations += 6;

            State<N> err{};
            for (std::size_t i = 0; i < N; ++i)
                err[i] = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double en = error_norm(y, next, err);

            if (!std::isfinite(en) || !detail::all_finite(next)) {
                ++stats.rejected;
                h = 0.1 * dt;
                last_rejected = true;
                continue;
            }

            if (en <= 1.0) {
                y = next;
                k1 = k7;  // first-same-as-last
                t = lands ? target : t + dt;
                ++stats.accepted;
                observe(t, y);
                double fac = en == 0.0 ? fac_max : safety * std::pow(en, -0.2);
                fac = std::clamp(fac, fac_min, last_rejected ? 1.0 : fac_max);
                // A step shortened to hit a stop says nothing about the natural step size.
                h = lands ? std::max(h, dt * fac) : dt * fac;
                last_rejected = false;
            } else {
                ++stats.rejected;
                h = dt * std::max(fac_min, safety * std::pow(en, -0.2));
                last_rejected = true;
            }
        }
    }
    return stats;
}

}  // namespace ode
}  // namespace tmsdyn
