#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tmsdyn/validation.hpp"

using namespace tmsdyn;

namespace {

const AcceptanceReport& default_report() {
    static const AcceptanceReport report = run_acceptance();
    return report;
}

}  // namespace

TEST(Acceptance, ReportsElevenCriteria) {
    const auto& r = default_report();
    ASSERT_EQ(r.results.size(), 11u);
    for (int id = 1; id <= 11; ++id) EXPECT_NO_THROW(r.criterion(id));
    EXPECT_THROW(r.criterion(12), std::out_of_range);
}

TEST(Acceptance, CriteriaPassWithDefaults) {
    const auto& r = default_report();
    for (int id : {1, 2, 4, 5, 6, 7, 8, 9, 10, 11}) {
        const AcceptanceResult& c = r.criterion(id);
        EXPECT_TRUE(c.pass) << id << " " << c.name << ": measured " << c.measured << ", " << c.detail;
    }
}

TEST(Acceptance, SmallAmplitudeTailsMeetClosedForm) {
    // Criterion 3 as a whole is limited by large-A tails; the weak pulses must still agree.
    for (const auto& c : detail::tail_cases()) {
        if (c.lambda != 0.1) continue;
        const CouplingPulse pulse = CouplingPulse::gaussian_quadratic(c.lambda, c.eta0);
        const double eta_end = pulse.switch_off_eta() + 4.0 * std::numbers::pi / c.chi;
        const Trajectory t = integrate(pulse, ModelParams::from_chi(c.chi), eta_end);
        const FState& s0 = t.samples()[t.tail_begin()];
        const OscillatorySolution sol = extract_A_phi(s0.f_plus, s0.f_minus, c.chi * s0.eta, c.chi);
        double dev = 0.0;
        for (std::size_t k = t.tail_begin(); k < t.size(); ++k) {
            const FState& s = t.samples()[k];
            const FPair f = closed_form_F(sol, s.eta);
            dev = std::max({dev, std::abs(f.f_plus - s.f_plus), std::abs(f.f_minus - s.f_minus)});
        }
        EXPECT_LE(dev, 1e-7) << c.chi << " " << c.eta0;
    }
}

TEST(Acceptance, TightToleranceReachesClosedForm) {
    AcceptanceOptions opt;
    opt.integrator.rel_tol = 1e-13;
    opt.integrator.abs_tol = 1e-13;
    opt.integrator.max_step = 0.05;
    const AcceptanceReport r = run_acceptance(opt);
    EXPECT_LE(r.criterion(3).measured, 1e-7);
}

TEST(Acceptance, SignFlipInRhsIsDetected) {
    AcceptanceOptions opt;
    opt.rhs = [](const FState& s, double eta, const CouplingPulse& p, const ModelParams& m) {
        StateRate d = rhs(s, eta, p, m);
        d.f_minus *= 1.01;
        return d;
    };
    const AcceptanceReport r = run_acceptance(opt);
    EXPECT_FALSE(r.all_passed());
    EXPECT_FALSE(r.criterion(4).pass);
    // N_D - N_d is conserved for any Bogoliubov angles, so a wrong rhs cannot break it.
    EXPECT_TRUE(r.criterion(5).pass);
}

TEST(Acceptance, DivergingRhsIsReportedNotThrown) {
    AcceptanceOptions opt;
    opt.rhs = [](const FState& s, double eta, const CouplingPulse& p, const ModelParams& m) {
        StateRate d = rhs(s, eta, p, m);
        d.f_plus = -d.f_plus;
        return d;
    };
    AcceptanceReport r;
    ASSERT_NO_THROW(r = run_acceptance(opt));
    ASSERT_EQ(r.results.size(), 11u);
    EXPECT_FALSE(r.criterion(2).pass);
    EXPECT_FALSE(r.criterion(4).pass);
    EXPECT_NE(r.criterion(4).detail.find("error:"), std::string::npos);
    EXPECT_EQ(r.criterion(4).tolerance, 1e-8);
    EXPECT_TRUE(r.criterion(7).pass);
}

TEST(Acceptance, RunsWithinBudget) {
    const auto& r = default_report();
    double total = 0.0;
    for (const auto& c : r.results) total += c.seconds;
    EXPECT_LT(total, 60.0);
}

TEST(Acceptance, SeedChangesDrawsButNotVerdicts) {
    AcceptanceOptions opt;
    opt.seed = 7;
    const AcceptanceReport r = run_acceptance(opt);
    EXPECT_TRUE(r.criterion(6).pass);
    EXPECT_NE(r.criterion(6).measured, default_report().criterion(6).measured);
}

TEST(Acceptance, FormatHasOneLinePerCriterion) {
    const std::string text = format_report(default_report());
    std::istringstream in(text);
    std::string line;
    int verdicts = 0;
    while (std::getline(in, line))
        if (line.rfind("[PASS]", 0) == 0 || line.rfind("[FAIL]", 0) == 0) ++verdicts;
    EXPECT_EQ(verdicts, 11);
    EXPECT_NE(text.find("criterion  1"), std::string::npos);
    EXPECT_NE(text.find("criterion 11"), std::string::npos);
}
