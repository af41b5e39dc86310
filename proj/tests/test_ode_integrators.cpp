#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tmsdyn/ode_integrators.hpp"

using namespace tmsdyn;

namespace {

using Y1 = ode::State<1>;
using Y2 = ode::State<2>;

auto growth = [](double, const Y1& y) { return Y1{y[0]}; };
auto nothing = [](double, const auto&) {};

double rk4_exp_error(double h) {
    Y1 last{};
    ode::integrate_rk4<1>(growth, Y1{1.0}, 0.0, 1.0, h, [&](double, const Y1& y) { last = y; });
    return std::abs(last[0] - std::exp(1.0));
}

}  // namespace

TEST(Rk4, ExponentialGrowth) { EXPECT_LT(rk4_exp_error(1e-3), 1e-13); }

TEST(Rk4, FourthOrderConvergence) {
    const double ratio = rk4_exp_error(0.02) / rk4_exp_error(0.01);
    EXPECT_NEAR(ratio, 16.0, 0.5);
}

TEST(Rk4, LandsExactlyOnStopsAndEnd) {
    std::vector<double> ts;
    const std::vector<double> stops{0.123456, 0.7};
    ode::integrate_rk4<1>(growth, Y1{1.0}, 0.0, 1.05, 0.1, [&](double t, const Y1&) { ts.push_back(t); }, stops);
    EXPECT_EQ(ts.front(), 0.0);
    EXPECT_EQ(ts.back(), 1.05);
    EXPECT_NE(std::find(ts.begin(), ts.end(), 0.123456), ts.end());
    EXPECT_NE(std::find(ts.begin(), ts.end(), 0.7), ts.end());
    for (std::size_t k = 1; k < ts.size(); ++k) EXPECT_GT(ts[k], ts[k - 1]);
}

TEST(Rk4, RejectsNonPositiveStep) {
    EXPECT_THROW(ode::integrate_rk4<1>(growth, Y1{1.0}, 0.0, 1.0, 0.0, nothing), std::invalid_argument);
}

TEST(Dopri5, HarmonicOscillatorToTolerance) {
    auto osc = [](double, const Y2& y) { return Y2{y[1], -y[0]}; };
    ode::AdaptiveOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    Y2 last{};
    double t_last = 0.0;
    ode::integrate_dopri5<2>(osc, Y2{1.0, 0.0}, 0.0, 20.0, opt, [&](double t, const Y2& y) {
        last = y;
        t_last = t;
    });
    EXPECT_EQ(t_last, 20.0);
    EXPECT_NEAR(last[0], std::cos(20.0), 1e-9);
    EXPECT_NEAR(last[1], -std::sin(20.0), 1e-9);
}

TEST(Dopri5, RespectsMaxStepAndStops) {
    ode::AdaptiveOptions opt;
    opt.max_step = 0.05;
    std::vector<double> ts;
    const std::vector<double> stops{0.31};
    ode::integrate_dopri5<1>(growth, Y1{1.0}, 0.0, 1.0, opt, [&](double t, const Y1&) { ts.push_back(t); }, stops);
    for (std::size_t k = 1; k < ts.size(); ++k) EXPECT_LE(ts[k] - ts[k - 1], 0.05 * (1.0 + 1e-12));
    EXPECT_NE(std::find(ts.begin(), ts.end(), 0.31), ts.end());
    EXPECT_EQ(ts.back(), 1.0);
}

TEST(Dopri5, Deterministic) {
    auto run = [] {
        std::vector<double> out;
        ode::integrate_dopri5<1>(growth, Y1{1.0}, 0.0, 3.0, ode::AdaptiveOptions{},
                                 [&](double t, const Y1& y) {
                                     out.push_back(t);
                                     out.push_back(y[0]);
                                 });
        return out;
    };
    EXPECT_EQ(run(), run());
}

TEST(Dopri5, BlowUpRaisesDivergence) {
    // y' = y^2, y(0) = 1 blows up at t = 1.
    auto blow = [](double, const Y1& y) { return Y1{y[0] * y[0]}; };
    try {
        ode::integrate_dopri5<1>(blow, Y1{1.0}, 0.0, 2.0, ode::AdaptiveOptions{}, nothing);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.last_valid_eta(), 0.9);
        EXPECT_LE(e.last_valid_eta(), 1.0);
    }
}

TEST(Rk4, BlowUpRaisesDivergence) {
    auto blow = [](double, const Y1& y) { return Y1{y[0] * y[0]}; };
    EXPECT_THROW(ode::integrate_rk4<1>(blow, Y1{1.0}, 0.0, 2.0, 0.01, nothing), DivergenceError);
}

TEST(Dopri5, RejectsBadTolerances) {
    ode::AdaptiveOptions opt;
    opt.rel_tol = 0.0;
    EXPECT_THROW(ode::integrate_dopri5<1>(growth, Y1{1.0}, 0.0, 1.0, opt, nothing), std::invalid_argument);
}
