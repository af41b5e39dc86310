#pragma once

// Acceptance suite: each criterion measures one number, compares it with its
// tolerance and times itself.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "tmsdyn/analytic_solutions.hpp"
#include "tmsdyn/core_symplectic.hpp"
#include "tmsdyn/evolution_ode.hpp"
#include "tmsdyn/hamiltonian_model.hpp"
#include "tmsdyn/observables.hpp"

namespace tmsdyn {

struct AcceptanceResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    double time_limit = std::numeric_limits<double>::infinity();
    std::string detail;
};

struct AcceptanceReport {
    std::vector<AcceptanceResult> results;
    std::vector<std::string> notes;

    bool all_passed() const {
        return std::all_of(results.begin(), results.end(), [](const AcceptanceResult& r) { return r.pass; });
    }
    const AcceptanceResult& criterion(int id) const {
        for (const auto& r : results)
            if (r.id == id) return r;
        throw std::out_of_range("no such criterion");
    }
};

struct AcceptanceOptions {
    /// Right-hand side used for every integration; replaceable to test that the suite detects errors.
    RhsFunction rhs = [](const FState& s, double eta, const CouplingPulse& p, const ModelParams& m) {
        return tmsdyn::rhs(s, eta, p, m);
    };
    IntegratorConfig integrator{};
    std::uint64_t seed = 20240611;
};

namespace detail {

inline std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline AcceptanceResult finish(int id, std::string name, double measured, double tol, double limit,
                               const Stopwatch& clock, std::string detail) {
    AcceptanceResult r;
    r.id = id;
    r.name = std::move(name);
    r.measured = measured;
    r.tolerance = tol;
    r.seconds = clock.seconds();
    r.time_limit = limit;
    r.pass = std::isfinite(measured) && measured <= tol && r.seconds < limit;
    r.detail = std::move(detail);
    return r;
}

struct TailCase {
    double chi;
    double lambda;
    double eta0;
};

inline std::vector<TailCase> tail_cases() {
    std::vector<TailCase> out;
    for (double chi : {0.1, 1.0, 2.0})
        for (double lambda : {0.1, 1.0})
            for (double eta0 : {1.0, 3.0}) out.push_back({chi, lambda, eta0});
    return out;
}

}  // namespace detail

/// Runs acceptance criteria 1-11 and a few reported-only comparisons.
inline AcceptanceReport run_acceptance(const AcceptanceOptions& opt = {}) {
    using detail::format;
    using detail::Stopwatch;
    AcceptanceReport report;
    double max_defect = 0.0;  // criterion 9, over every matrix composed below
    std::vector<std::string> defect_sources;
    auto track = [&](double defect) { max_defect = std::max(max_defect, defect); };
    // A criterion that throws (for example a diverging integration) is recorded as failed.
    auto guarded = [&](std::vector<std::tuple<int, const char*, double>> ids, const auto& body) {
        Stopwatch clock;
        try {
            body();
        } catch (const std::exception& e) {
            for (const auto& [id, name, tol] : ids) {
                AcceptanceResult r = detail::finish(id, name, std::numeric_limits<double>::infinity(), tol, 1.0,
                                                    clock, std::string("error: ") + e.what());
                const auto done = [&, id = id](const AcceptanceResult& x) { return x.id == id; };
                if (std::none_of(report.results.begin(), report.results.end(), done)) report.results.push_back(r);
            }
            if (ids.empty()) report.notes.push_back(std::string("comparison skipped: ") + e.what());
        }
    };

    // 1. Null drive keeps F identically zero.
    guarded({{1, "null-drive fixed point", 1e-12}}, [&] {
        Stopwatch clock;
        double worst = 0.0;
        for (double chi : {0.1, 1.0, 2.0}) {
            const Trajectory t =
                integrate(CouplingPulse::null(), ModelParams::from_chi(chi), 100.0, opt.integrator, opt.rhs);
            for (const auto& s : t.samples()) worst = std::max({worst, std::abs(s.f_plus), std::abs(s.f_minus)});
        }
        report.results.push_back(detail::finish(1, "null-drive fixed point", worst, 1e-12, 1.0, clock,
                                                "max |F| over eta in [0, 100], chi in {0.1, 1, 2}"));
    });

    // 2. Perturbative F_+ against the ODE in the weak regime.
    guarded({{2, "weak-regime perturbative F_+ vs ODE", 1.0}}, [&] {
        Stopwatch clock;
        std::string detail;
        double worst_ratio = 0.0;  // deviation / allowed bound, pass iff <= 1
        for (const auto& [lambda, bound] : {std::pair{0.1, 0.01}, std::pair{1.0, 0.05}}) {
            const CouplingPulse pulse = CouplingPulse::gaussian_quadratic(lambda, 1.0);
            const Trajectory t = integrate(pulse, ModelParams::from_chi(0.1), 60.0, opt.integrator, opt.rhs);
            std::vector<double> etas;
            for (const auto& s : t.samples()) etas.push_back(s.eta);
            const auto pert = perturbative_F_series(pulse, 0.1, etas);
            double dev = 0.0, ref = 0.0, dev_m = 0.0, ref_m = 0.0;
            for (std::size_t k = 0; k < etas.size(); ++k) {
                dev = std::max(dev, std::abs(pert[k].f_plus - t.samples()[k].f_plus));
                ref = std::max(ref, std::abs(t.samples()[k].f_plus));
                dev_m = std::max(dev_m, std::abs(pert[k].f_minus - t.samples()[k].f_minus));
                ref_m = std::max(ref_m, std::abs(t.samples()[k].f_minus));
            }
            const double rel = dev / ref;
            worst_ratio = std::max(worst_ratio, rel / bound);
            detail += format("lambda=%g: F_+ rel dev %.3e (bound %.0e), F_- rel dev %.3e; ", lambda, rel, bound,
                             dev_m / ref_m);
        }
        report.results.push_back(detail::finish(2, "weak-regime perturbative F_+ vs ODE", worst_ratio, 1.0, 5.0,
                                                clock, detail + "measured = max(rel dev / bound)"));
    });

    // 3 and 4. Closed-form tail and first integral along post-switch-off tails.
    guarded({{3, "closed-form tail after switch-off", 1e-7}, {4, "first-integral conservation on tails", 1e-8}}, [&] {
        Stopwatch clock;
        double worst_tail = 0.0;
        double worst_integral = 0.0;  // |I - I0| / max(1, I0)
        double tail_seconds = 0.0;
        std::string fails;
        std::string integral_detail;
        for (const auto& c : detail::tail_cases()) {
            const CouplingPulse pulse = CouplingPulse::gaussian_quadratic(c.lambda, c.eta0);
            const double period = 2.0 * std::numbers::pi / c.chi;
            const double eta_end = pulse.switch_off_eta() + 2.0 * period;
            Stopwatch run_clock;
            const Trajectory t = integrate(pulse, ModelParams::from_chi(c.chi), eta_end, opt.integrator, opt.rhs);
            const std::size_t k0 = t.tail_begin();
            const FState& s0 = t.samples()[k0];
            const OscillatorySolution sol = extract_A_phi(s0.f_plus, s0.f_minus, c.chi * s0.eta, c.chi);
            double dev = 0.0;
            const double i0 = first_integral(s0.f_plus, s0.f_minus);
            double di = 0.0;
            for (std::size_t k = k0; k < t.size(); ++k) {
                const FState& s = t.samples()[k];
                const FPair f = closed_form_F(sol, s.eta);
                dev = std::max({dev, std::abs(f.f_plus - s.f_plus), std::abs(f.f_minus - s.f_minus)});
                di = std::max(di, std::abs(first_integral(s.f_plus, s.f_minus) - i0));
            }
            tail_seconds += run_clock.seconds();
            worst_tail = std::max(worst_tail, dev);
            worst_integral = std::max(worst_integral, di / std::max(1.0, i0));
            if (dev > 1e-7)
                fails += format("(chi=%g, lambda=%g, eta0=%g: A=%.4g, sup %.2e) ", c.chi, c.lambda, c.eta0,
                                sol.amplitude, dev);
            integral_detail += format("[%g,%g,%g] I0=%.3e |dI|=%.2e; ", c.chi, c.lambda, c.eta0, i0, di);
        }
        const double seconds = clock.seconds();
        AcceptanceResult r3 = detail::finish(
            3, "closed-form tail after switch-off", worst_tail, 1e-7, 10.0, clock,
            fails.empty() ? std::string("all 12 cases within tolerance")
                          : "cases over tolerance: " + fails +
                                "; F error ~ A x phase error, so rel_tol 1e-10 cannot reach 1e-7 absolute at large A");
        r3.seconds = seconds;
        r3.pass = worst_tail <= 1e-7 && seconds < 10.0;
        report.results.push_back(r3);
        AcceptanceResult r4 = detail::finish(4, "first-integral conservation on tails", worst_integral, 1e-8, 2.0,
                                             clock, "measured = max |I - I0| / max(1, I0); " + integral_detail);
        r4.seconds = tail_seconds;
        r4.pass = worst_integral <= 1e-8 && tail_seconds < 2.0;
        report.results.push_back(r4);
    });

    // 5. N_D - N_d conserved along full trajectories, pulse window included.
    guarded({{5, "number-difference conservation", 1e-8}}, [&] {
        Stopwatch clock;
        double worst = 0.0;
        struct Run {
            CouplingPulse pulse;
            ModelParams model;
            ModePair modes;
        };
        const std::vector<Run> runs{
            {CouplingPulse::gaussian_quadratic(1.0, 1.0), ModelParams::from_chi(0.1), ModePair{}},
            {CouplingPulse::gaussian_quadratic(1.0, 1.0), ModelParams::from_modes(ModePair(1.0, 0.64)),
             ModePair(1.0, 0.64)},
        };
        for (const auto& run : runs) {
            const Trajectory t = integrate(run.pulse, run.model, 30.0, opt.integrator, opt.rhs);
            for (double r : {0.0, 0.5})
                for (double nu_D : {1.0, 1.3})
                    for (double nu_d : {1.0, 1.3}) {
                        const CovarianceMatrix sigma_i = initial_state({r, nu_D, nu_d});
                        const double ref = number_expectation(sigma_i).n_minus();
                        for (const auto& s : t.samples()) {
                            const ObservableSample o = matrix_path_observables(s.eta, s.angles(), sigma_i, run.modes);
                            track(o.symplectic_defect);
                            worst = std::max(worst, std::abs(o.n_minus() - ref));
                        }
                    }
        }
        defect_sources.push_back("criterion 5 trajectories");
        report.results.push_back(detail::finish(5, "number-difference conservation", worst, 1e-8, 5.0, clock,
                                                "max |(N_D - N_d)(eta) - (N_D - N_d)(0)| over 2 runs x 8 states"));
    });

    // 6. Closed forms against the covariance pipeline on random draws.
    guarded({{6, "closed-form vs matrix-path observables", 1e-9}}, [&] {
        Stopwatch clock;
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        double worst = 0.0;
        const ModePair modes(1.0, 0.7);
        for (int k = 0; k < 200; ++k) {
            const double a = 2.0 * u01(rng);
            const double phi = std::numbers::pi * (2.0 * u01(rng) - 1.0);
            const double chi = 0.05 + 4.95 * u01(rng);
            const double eta = 50.0 * u01(rng);
            const double r = u01(rng);
            const double nu_D = 1.0 + u01(rng);
            const double nu_d = 1.0 + u01(rng);
            const OscillatorySolution sol{a, phi, chi};
            const FPair f = closed_form_F(sol, eta);
            const DecouplingAngles angles{f.f_plus, f.f_minus, 10.0 * u01(rng), 10.0 * u01(rng)};
            const CovarianceMatrix sigma_i = initial_state({r, nu_D, nu_d});
            const NuCombination nus = NuCombination::from_spectrum(nu_D, nu_d);
            const SymplecticMatrix s = decoupled_evolution(angles);
            track(symplectic_defect(s));
            const CovarianceMatrix sigma_f = evolve_state(sigma_i, s);
            const NumberPair n = number_expectation(sigma_f);
            const NumberCombination nc = N_plusminus_closed(sol, eta, r, nus);
            worst = std::max(worst, std::abs(n.n_plus() - nc.n_plus));
            worst = std::max(worst, std::abs(n.n_minus() - nc.n_minus));
            const double nu_t = nu_tilde_minus(sigma_f);
            worst = std::max(worst, std::abs(nu_t - nu_tilde_minus_closed(f.f_plus, f.f_minus, r, nus)));
            worst = std::max(worst, std::abs(negativity_from_nu_tilde(nu_t) - log_negativity_closed(sol, eta, r, nus)));
            worst = std::max(worst, std::abs(delta_E(sigma_i, sigma_f, modes) - delta_E_closed(sol, eta, r, nus, modes)));
        }
        defect_sources.push_back("criterion 6 draws");
        report.results.push_back(detail::finish(6, "closed-form vs matrix-path observables", worst, 1e-9, 5.0, clock,
                                                "max abs deviation of N_+, N_-, nu~_-, negativity, Delta E over 200 draws"));
    });

    // 7. Two-mode squeezed vacuum anchors.
    guarded({{7, "two-mode squeezed vacuum anchors", 1e-12}}, [&] {
        Stopwatch clock;
        double worst = 0.0;
        const CovarianceMatrix vacuum = williamson_state({thermal_nu(1.0, 0.0), thermal_nu(1.0, 0.0)});
        for (double r : {0.1, 0.5, 1.0}) {
            const SymplecticMatrix s = decoupled_evolution({}) * two_mode_squeezer(r);
            track(symplectic_defect(s));
            const CovarianceMatrix sigma = evolve_state(vacuum, s);
            const NumberPair n = number_expectation(sigma);
            const double nu_t = nu_tilde_minus(sigma);
            worst = std::max(worst, std::abs(n.n_plus() - (std::cosh(2.0 * r) - 1.0)));
            worst = std::max(worst, std::abs(nu_t - std::exp(-2.0 * r)));
            worst = std::max(worst, std::abs(log_negativity(sigma) - std::expm1(2.0 * r)));
            const NuCombination nus{1.0, 0.0};
            worst = std::max(worst, std::abs(nu_tilde_minus_closed(0.0, 0.0, r, nus) - std::exp(-2.0 * r)));
            worst = std::max(worst, std::abs(log_negativity_from_F(0.0, 0.0, r, nus) - std::expm1(2.0 * r)));
        }
        defect_sources.push_back("criterion 7 squeezers");
        report.results.push_back(detail::finish(7, "two-mode squeezed vacuum anchors", worst, 1e-12, 1.0, clock,
                                                "r in {0.1, 0.5, 1}, matrix and closed paths"));
    });

    // 8. Hamiltonian spectrum against a direct eigendecomposition.
    guarded({{8, "Hamiltonian spectrum", 1e-10}}, [&] {
        Stopwatch clock;
        std::mt19937_64 rng(opt.seed + 1);
        std::uniform_real_distribution<double> chi_dist(1.0, 5.0);
        std::uniform_real_distribution<double> h_dist(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double chi = chi_dist(rng);
            const double h = h_dist(rng);
            const double eps = epsilon_from_chi(chi, EpsilonBranch::Lower);
            Eigen::SelfAdjointEigenSolver<Matrix4c> es(hamiltonian_matrix(eps, h).entries, Eigen::EigenvaluesOnly);
            const auto& ev = es.eigenvalues();  // ascending
            const HamiltonianSpectrum spec = hamiltonian_eigenvalues(chi, h);
            worst = std::max({worst, std::abs(ev(0) - spec.lambda_minus), std::abs(ev(1) - spec.lambda_minus),
                              std::abs(ev(2) - spec.lambda_plus), std::abs(ev(3) - spec.lambda_plus)});
        }
        bool exact_zero = true;
        for (double chi : {1.0, 1.25, 2.0, 3.7, 5.0}) exact_zero = exact_zero && hamiltonian_eigenvalues(chi, 1.0).lambda_minus == 0.0;
        AcceptanceResult r = detail::finish(8, "Hamiltonian spectrum", worst, 1e-10, 2.0, clock,
                                            exact_zero ? "lambda_- == 0 exactly at h = 1"
                                                       : "lambda_- not exactly 0 at h = 1");
        r.pass = r.pass && exact_zero;
        report.results.push_back(r);
    });

    // 10. Linearised solver against the perturbative quadrature.
    guarded({{10, "linearised solver vs perturbative F", 1e-8}}, [&] {
        Stopwatch clock;
        double worst = 0.0;
        for (double lambda : {0.1, 1.0}) {
            const CouplingPulse pulse = CouplingPulse::gaussian_quadratic(lambda, 1.0);
            const LinearizedSystem sys = two_mode_linearized_system(pulse, 0.1);
            for (int k = 0; k <= 120; ++k) {
                const double eta = 0.5 * k;
                const Eigen::VectorXd lin = linearized_solve(sys, eta);
                const FPair pert = perturbative_F(pulse, 0.1, eta);
                worst = std::max({worst, std::abs(lin(0) - pert.f_plus), std::abs(lin(1) - pert.f_minus)});
            }
        }
        report.results.push_back(detail::finish(10, "linearised solver vs perturbative F", worst, 1e-8, 2.0, clock,
                                                "chi = 0.1, eta0 = 1, lambda in {0.1, 1}, eta = 0, 0.5, ..., 60"));
    });

    // 11. r = 0: N_+, negativity and Delta E constant after switch-off.
    guarded({{11, "r = 0 stationarity after switch-off", 1e-9}}, [&] {
        Stopwatch clock;
        double worst = 0.0;
        struct Run {
            CouplingPulse pulse;
            ModelParams model;
            ModePair modes;
        };
        const std::vector<Run> runs{
            {CouplingPulse::gaussian_quadratic(0.1, 1.0), ModelParams::from_chi(0.1), ModePair{}},
            {CouplingPulse::gaussian_quadratic(1.0, 1.0), ModelParams::from_chi(0.1), ModePair{}},
            {CouplingPulse::gaussian_quadratic(1.0, 1.0), ModelParams::from_modes(ModePair(1.0, 0.64)),
             ModePair(1.0, 0.64)},
        };
        for (const auto& run : runs) {
            const double eta_end = run.pulse.switch_off_eta() + 2.0 * 2.0 * std::numbers::pi / run.model.chi();
            const Trajectory t = integrate(run.pulse, run.model, eta_end, opt.integrator, opt.rhs);
            for (const auto& [nu_D, nu_d] : {std::pair{1.0, 1.0}, std::pair{1.3, 1.0}}) {
                const CovarianceMatrix sigma_i = initial_state({0.0, nu_D, nu_d});
                std::optional<ObservableSample> first;
                for (std::size_t k = t.tail_begin(); k < t.size(); ++k) {
                    const FState& s = t.samples()[k];
                    const ObservableSample o = matrix_path_observables(s.eta, s.angles(), sigma_i, run.modes);
                    track(o.symplectic_defect);
                    if (!first) first = o;
                    worst = std::max({worst, std::abs(o.n_plus() - first->n_plus()),
                                      std::abs(o.negativity - first->negativity),
                                      std::abs(o.delta_E - first->delta_E)});
                }
            }
        }
        defect_sources.push_back("criterion 11 tails");
        report.results.push_back(detail::finish(11, "r = 0 stationarity after switch-off", worst, 1e-9, 2.0, clock,
                                                "max variation of N_+, negativity, Delta E over 3 tails x 2 states"));
    });

    // 9. Symplectic integrity of every matrix composed above.
    {
        Stopwatch clock;
        std::string sources;
        for (const auto& s : defect_sources) sources += (sources.empty() ? "" : ", ") + s;
        report.results.push_back(detail::finish(9, "symplectic integrity", max_defect, 1e-10, 1e300, clock,
                                                "max |S^dag Omega S - Omega| over " + sources));
    }
    std::sort(report.results.begin(), report.results.end(),
              [](const AcceptanceResult& a, const AcceptanceResult& b) { return a.id < b.id; });

    // Reported, not asserted.
    guarded({}, [&] {
        const CouplingPulse pulse = CouplingPulse::gaussian_quadratic(1.0, 3.0);
        const double chi = 0.1;
        const double eta_f = pulse.switch_off_eta();
        const Trajectory t = integrate(pulse, ModelParams::from_chi(chi), eta_f + 100.0, opt.integrator, opt.rhs);
        const FState a = t.samples()[t.tail_begin()];
        const FState b = t.samples().back();
        const OscillatorySolution sa = extract_A_phi(a.f_plus, a.f_minus, chi * a.eta, chi);
        const OscillatorySolution sb = extract_A_phi(b.f_plus, b.f_minus, chi * b.eta, chi);
        report.notes.push_back(format(
            "strong pulse (lambda=1, eta0=3, chi=0.1): A=%.6g (asinh A=%.4f), phi=%.4f at eta=%.2f; "
            "A=%.6g, phi=%.4f at eta=%.2f; figure values ln sinh 12=%.4f, phi=-0.6",
            sa.amplitude, std::asinh(sa.amplitude), sa.phase, a.eta, sb.amplitude, sb.phase, b.eta,
            std::log(std::sinh(12.0))));
    });
    guarded({}, [&] {
        const double a = 0.01;
        const ModePair modes{};
        const double closed = delta_E_closed({a, 0.0, 1.0}, 0.0, 0.0, {1.0, 0.0}, modes);
        report.notes.push_back(format("small-input energy: (w_D+w_d) A^2 = %.6e vs closed form %.6e at A=%g, r=0; "
                                      "ratio %.6f",
                                      delta_E_weak(a, modes), closed, a, delta_E_weak(a, modes) / closed));
    });
    return report;
}

/// One line per criterion, then the notes.
inline std::string format_report(const AcceptanceReport& report) {
    std::string out;
    for (const auto& r : report.results) {
        out += detail::format("[%s] criterion %2d  %-40s measured %.3e  tol %.1e  %.3f s", r.pass ? "PASS" : "FAIL",
                              r.id, r.name.c_str(), r.measured, r.tolerance, r.seconds);
        out += "\n        " + r.detail + "\n";
    }
    for (const auto& n : report.notes) out += "[INFO] " + n + "\n";
    out += report.all_passed() ? "all criteria passed\n" : "some criteria failed\n";
    return out;
}

}  // namespace tmsdyn
