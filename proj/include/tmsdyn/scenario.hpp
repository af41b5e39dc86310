#pragma once

// Configuration-driven runs: JSON scenario parsing, single runs with CSV and JSON
// output, and parameter sweeps.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tmsdyn/analytic_solutions.hpp"
#include "tmsdyn/core_symplectic.hpp"
#include "tmsdyn/evolution_ode.hpp"
#include "tmsdyn/hamiltonian_model.hpp"
#include "tmsdyn/observables.hpp"
#include "tmsdyn/presets.hpp"
#include "tmsdyn/validation.hpp"

namespace tmsdyn {

using Json = nlohmann::ordered_json;

/// Invalid configuration; `path()` is the dotted location of the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error("config error at '" + path + "': " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class RunMode { Evolve, Analytic, Both, Validate, Sweep };
enum class AnalyticCurve { Auto, Perturbative, ClosedForm };

inline std::string_view to_string(RunMode m) {
    switch (m) {
        case RunMode::Evolve: return "evolve";
        case RunMode::Analytic: return "analytic";
        case RunMode::Both: return "both";
        case RunMode::Validate: return "validate";
        case RunMode::Sweep: return "sweep";
    }
    return "?";
}

struct OutputConfig {
    std::string csv;      // empty: no CSV
    std::string summary;  // empty: no JSON summary
    AnalyticCurve analytic = AnalyticCurve::Auto;
    int samples = 1001;  // grid size for analytic-only runs
};

struct SweepAxis {
    std::string path;
    std::vector<Json> values;
};

struct ScenarioConfig {
    std::string name = "run";
    std::string description;
    RunMode mode = RunMode::Both;
    double eta_end = 60.0;
    ModelParams model = ModelParams::from_chi(1.0);
    std::optional<ModePair> modes;
    CouplingPulse pulse;
    InitialStateSpec state;
    IntegratorConfig integrator;
    OutputConfig output;
    std::vector<SweepAxis> sweep;
    Json source;

    /// Frequencies weighting Delta E; unit weights when only chi is given.
    ModePair energy_weights() const { return modes.value_or(ModePair{}); }
};

// ---------------------------------------------------------------------------
// Parsing.

namespace detail::cfg {

inline std::string join(const std::string& base, std::string_view key) {
    return base.empty() ? std::string(key) : base + "." + std::string(key);
}

inline void require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

inline void check_keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(join(path, key), "unknown key");
    }
}

inline double number(const Json& j, std::string_view key, const std::string& path) {
    const std::string p = join(path, key);
    if (!j.contains(key)) throw ConfigError(p, "required number is missing");
    const Json& v = j.at(std::string(key));
    if (!v.is_number()) throw ConfigError(p, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(p, "must be finite");
    return d;
}

inline std::optional<double> opt_number(const Json& j, std::string_view key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    return number(j, key, path);
}

inline std::string string(const Json& j, std::string_view key, const std::string& path, std::string fallback) {
    if (!j.contains(key)) return fallback;
    const Json& v = j.at(std::string(key));
    if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> number_array(const Json& j, std::string_view key, const std::string& path) {
    const std::string p = join(path, key);
    if (!j.contains(key)) throw ConfigError(p, "required array is missing");
    const Json& v = j.at(std::string(key));
    if (!v.is_array()) throw ConfigError(p, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_number()) throw ConfigError(p + "[" + std::to_string(k) + "]", "expected a number");
        out.push_back(v[k].get<double>());
    }
    return out;
}

/// Runs `fn`, turning domain errors into config errors at `path`.
template <typename Fn>
auto guarded(const std::string& path, Fn fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
    }
}

inline CouplingPulse parse_pulse(const Json& j, const std::string& path) {
    require_object(j, path);
    const std::string type = string(j, "type", path, "");
    if (type.empty()) throw ConfigError(join(path, "type"), "required string is missing");
    const double thr = opt_number(j, "switch_off_threshold", path).value_or(kDefaultSwitchOffThreshold);
    return guarded(path, [&] {
        if (type == "null") {
            check_keys(j, path, {"type", "switch_off_threshold"});
            return CouplingPulse(NullShape{}, thr);
        }
        if (type == "gaussian_quadratic") {
            check_keys(j, path, {"type", "switch_off_threshold", "lambda", "eta0"});
            return CouplingPulse::gaussian_quadratic(number(j, "lambda", path), number(j, "eta0", path), thr);
        }
        if (type == "tabulated") {
            check_keys(j, path, {"type", "switch_off_threshold", "eta", "h"});
            return CouplingPulse::tabulated(number_array(j, "eta", path), number_array(j, "h", path), thr);
        }
        if (type == "raised_cosine") {
            check_keys(j, path, {"type", "switch_off_threshold", "amplitude", "start", "duration"});
            return CouplingPulse::raised_cosine(number(j, "amplitude", path), number(j, "start", path),
                                                number(j, "duration", path), thr);
        }
        throw ConfigError(join(path, "type"),
                          "unknown pulse type '" + type + "' (null, gaussian_quadratic, tabulated, raised_cosine)");
    });
}

inline IntegratorConfig parse_integrator(const Json& j, const std::string& path) {
    require_object(j, path);
    check_keys(j, path, {"method", "rel_tol", "abs_tol", "max_step", "step", "sample_stride"});
    IntegratorConfig c;
    const std::string method = string(j, "method", path, "rk45");
    if (method == "rk45")
        c.method = IntegrationMethod::RK45;
    else if (method == "rk4")
        c.method = IntegrationMethod::RK4;
    else
        throw ConfigError(join(path, "method"), "expected 'rk45' or 'rk4'");
    c.rel_tol = opt_number(j, "rel_tol", path).value_or(c.rel_tol);
    c.abs_tol = opt_number(j, "abs_tol", path).value_or(c.abs_tol);
    c.max_step = opt_number(j, "max_step", path).value_or(c.max_step);
    c.step = opt_number(j, "step", path).value_or(c.step);
    if (j.contains("sample_stride")) {
        const Json& v = j.at("sample_stride");
        if (!v.is_number_integer()) throw ConfigError(join(path, "sample_stride"), "expected an integer");
        c.sample_stride = v.get<int>();
    }
    guarded(path, [&] {
        c.validate();
        return 0;
    });
    return c;
}

inline OutputConfig parse_output(const Json& j, const std::string& path, const std::string& name) {
    require_object(j, path);
    check_keys(j, path, {"csv", "summary", "analytic", "samples"});
    OutputConfig o;
    o.csv = string(j, "csv", path, name + ".csv");
    o.summary = string(j, "summary", path, name + ".json");
    const std::string curve = string(j, "analytic", path, "auto");
    if (curve == "auto")
        o.analytic = AnalyticCurve::Auto;
    else if (curve == "perturbative")
        o.analytic = AnalyticCurve::Perturbative;
    else if (curve == "closed_form")
        o.analytic = AnalyticCurve::ClosedForm;
    else
        throw ConfigError(join(path, "analytic"), "expected 'auto', 'perturbative' or 'closed_form'");
    if (j.contains("samples")) {
        const Json& v = j.at("samples");
        if (!v.is_number_integer() || v.get<long>() < 2) throw ConfigError(join(path, "samples"), "expected an integer >= 2");
        o.samples = v.get<int>();
    }
    return o;
}

}  // namespace detail::cfg

inline ScenarioConfig parse_config(const Json& root) {
    using namespace detail::cfg;
    require_object(root, "");
    check_keys(root, "", {"name", "description", "mode", "eta_end", "model", "pulse", "state", "integrator", "output",
                          "sweep"});
    ScenarioConfig c;
    c.source = root;
    c.name = string(root, "name", "", "run");
    c.description = string(root, "description", "", "");

    const std::string mode = string(root, "mode", "", "both");
    if (mode == "evolve")
        c.mode = RunMode::Evolve;
    else if (mode == "analytic")
        c.mode = RunMode::Analytic;
    else if (mode == "both")
        c.mode = RunMode::Both;
    else if (mode == "validate")
        c.mode = RunMode::Validate;
    else if (mode == "sweep")
        c.mode = RunMode::Sweep;
    else
        throw ConfigError("mode", "expected one of evolve, analytic, both, validate, sweep");

    const bool needs_physics = c.mode != RunMode::Validate;

    if (root.contains("eta_end")) {
        c.eta_end = number(root, "eta_end", "");
        if (!(c.eta_end > 0.0)) throw ConfigError("eta_end", "must be positive");
    } else if (needs_physics) {
        throw ConfigError("eta_end", "required number is missing");
    }

    if (root.contains("model")) {
        const Json& m = root.at("model");
        require_object(m, "model");
        check_keys(m, "model", {"chi", "omega_D", "omega_d"});
        const bool has_chi = m.contains("chi");
        const bool has_w = m.contains("omega_D") || m.contains("omega_d");
        if (has_chi == has_w) throw ConfigError("model", "give exactly one of 'chi' or ('omega_D', 'omega_d')");
        if (has_chi) {
            const double chi = number(m, "chi", "model");
            c.model = guarded("model.chi", [&] { return ModelParams::from_chi(chi); });
        } else {
            const double w_D = number(m, "omega_D", "model");
            const double w_d = number(m, "omega_d", "model");
            c.modes = guarded("model", [&] { return ModePair(w_D, w_d); });
            c.model = ModelParams::from_modes(*c.modes);
        }
    } else if (needs_physics) {
        throw ConfigError("model", "required section is missing");
    }

    if (root.contains("pulse"))
        c.pulse = parse_pulse(root.at("pulse"), "pulse");
    else if (needs_physics)
        throw ConfigError("pulse", "required section is missing");

    if (root.contains("state")) {
        const Json& s = root.at("state");
        require_object(s, "state");
        check_keys(s, "state", {"r", "nu_D", "nu_d", "temperature"});
        c.state.r = opt_number(s, "r", "state").value_or(0.0);
        const bool has_nu = s.contains("nu_D") || s.contains("nu_d");
        if (s.contains("temperature")) {
            if (has_nu) throw ConfigError("state", "give either nu_D/nu_d or temperature, not both");
            if (!c.modes) throw ConfigError("state.temperature", "temperature needs model.omega_D and model.omega_d");
            const double temp = number(s, "temperature", "state");
            c.state.nu_D = guarded("state.temperature", [&] { return thermal_nu(c.modes->omega_D, temp); });
            c.state.nu_d = guarded("state.temperature", [&] { return thermal_nu(c.modes->omega_d, temp); });
        } else {
            c.state.nu_D = opt_number(s, "nu_D", "state").value_or(1.0);
            c.state.nu_d = opt_number(s, "nu_d", "state").value_or(1.0);
        }
        guarded("state", [&] {
            c.state.validate();
            return 0;
        });
    }

    if (root.contains("integrator")) c.integrator = parse_integrator(root.at("integrator"), "integrator");
    c.output = parse_output(root.contains("output") ? root.at("output") : Json::object(), "output", c.name);

    if (root.contains("sweep")) {
        if (c.mode != RunMode::Sweep) throw ConfigError("sweep", "only allowed with mode 'sweep'");
        const Json& s = root.at("sweep");
        require_object(s, "sweep");
        check_keys(s, "sweep", {"grid"});
        if (!s.contains("grid") || !s.at("grid").is_object() || s.at("grid").empty())
            throw ConfigError("sweep.grid", "expected a non-empty object of dotted path -> value list");
        for (const auto& [path, values] : s.at("grid").items()) {
            if (!values.is_array() || values.empty())
                throw ConfigError("sweep.grid." + path, "expected a non-empty array of values");
            SweepAxis axis{path, {}};
            for (const auto& v : values) axis.values.push_back(v);
            c.sweep.push_back(std::move(axis));
        }
    } else if (c.mode == RunMode::Sweep) {
        throw ConfigError("sweep", "mode 'sweep' needs a sweep section");
    }
    return c;
}

inline ScenarioConfig parse_config(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ScenarioConfig parse_config(const std::string& text) { return parse_config(std::string_view(text)); }
inline ScenarioConfig parse_config(const char* text) { return parse_config(std::string_view(text)); }

/// Loads a config file, or a built-in preset when `path_or_preset` names one and no such file exists.
inline ScenarioConfig load_config(const std::string& path_or_preset) {
    if (!std::filesystem::exists(path_or_preset) && presets::exists(path_or_preset))
        return parse_config(presets::get(path_or_preset));
    std::ifstream in(path_or_preset);
    if (!in) throw ConfigError("<file>", "cannot read '" + path_or_preset + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Single runs.

struct Range {
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();

    void add(double v) {
        if (std::isnan(min) || v < min) min = v;
        if (std::isnan(max) || v > max) max = v;
    }
    double span() const { return max - min; }
};

struct RunReport {
    std::string name;
    std::string mode;
    double chi = 0.0;
    std::optional<double> epsilon;
    bool chi_below_resonance_bound = false;
    double eta_end = 0.0;
    double switch_off_eta = 0.0;
    double energy_input_bound = 0.0;
    StabilityReport stability;
    std::optional<OscillatorySolution> extracted;      // from the numeric trajectory
    std::optional<OscillatorySolution> weak_coupling;  // from the drive moments
    /// Max over the post-switch-off tail of |matrix path - closed form| / max(1, |closed form|)
    /// for N_+, negativity and Delta E.
    std::optional<double> max_cross_path_deviation;
    std::optional<double> max_tail_F_deviation;  // sup |F_num - F_closed| on the tail
    std::optional<double> perturbative_F_plus_rel_deviation;
    std::optional<double> perturbative_F_minus_rel_deviation;
    std::optional<double> first_integral_rel_variation;
    double max_symplectic_defect = 0.0;
    Range n_plus;
    Range negativity;
    Range delta_E;
    std::optional<double> delta_E_weak;
    std::size_t samples = 0;
    double runtime_seconds = 0.0;
    std::string csv_path;
    std::string summary_path;
    std::optional<AcceptanceReport> acceptance;
};

inline Json to_json(const RunReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    auto sol = [](const std::optional<OscillatorySolution>& s) {
        return s ? Json{{"A", s->amplitude}, {"phi", s->phase}} : Json(nullptr);
    };
    auto range = [&](const Range& g) { return Json{{"min", num(g.min)}, {"max", num(g.max)}}; };
    Json j;
    j["name"] = r.name;
    j["mode"] = r.mode;
    j["chi"] = r.chi;
    j["epsilon"] = opt(r.epsilon);
    j["chi_below_resonance_bound"] = r.chi_below_resonance_bound;
    j["eta_end"] = r.eta_end;
    j["switch_off_eta"] = r.switch_off_eta;
    j["energy_input_bound"] = r.energy_input_bound;
    j["stability"] = {{"ok", r.stability.ok},
                      {"sup_abs_h", r.stability.sup_abs_h},
                      {"eta_at_sup", r.stability.eta_at_sup},
                      {"first_violation_eta", opt(r.stability.first_violation_eta)}};
    j["extracted"] = sol(r.extracted);
    j["weak_coupling"] = sol(r.weak_coupling);
    j["max_cross_path_deviation"] = opt(r.max_cross_path_deviation);
    j["max_tail_F_deviation"] = opt(r.max_tail_F_deviation);
    j["perturbative_F_plus_rel_deviation"] = opt(r.perturbative_F_plus_rel_deviation);
    j["perturbative_F_minus_rel_deviation"] = opt(r.perturbative_F_minus_rel_deviation);
    j["first_integral_rel_variation"] = opt(r.first_integral_rel_variation);
    j["max_symplectic_defect"] = r.max_symplectic_defect;
    j["tail_ranges"] = {{"N_plus", range(r.n_plus)}, {"negativity", range(r.negativity)}, {"delta_E", range(r.delta_E)}};
    j["delta_E_weak"] = opt(r.delta_E_weak);
    j["samples"] = r.samples;
    j["runtime_seconds"] = r.runtime_seconds;
    j["csv"] = r.csv_path;
    if (r.acceptance) {
        Json a = Json::array();
        for (const auto& c : r.acceptance->results)
            a.push_back({{"id", c.id},
                         {"name", c.name},
                         {"pass", c.pass},
                         {"measured", num(c.measured)},
                         {"tolerance", c.tolerance},
                         {"seconds", c.seconds},
                         {"detail", c.detail}});
        j["acceptance"] = a;
        j["acceptance_notes"] = r.acceptance->notes;
    }
    return j;
}

inline constexpr std::string_view kCsvHeader =
    "eta,h,F_plus_num,F_minus_num,F_plus_analytic,F_minus_analytic,N_D,N_d,N_plus,N_minus,neg_paper,neg_log,delta_E";

/// Shortest exact decimal is not needed; 17 significant digits round-trip every double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvRow {
    double eta, h, f_plus_num, f_minus_num, f_plus_analytic, f_minus_analytic;
    double n_D, n_d, n_plus, n_minus, neg_paper, neg_log, delta_E;
};

inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        const double cols[] = {r.eta,  r.h,   r.f_plus_num, r.f_minus_num, r.f_plus_analytic, r.f_minus_analytic,
                               r.n_D,  r.n_d, r.n_plus,     r.n_minus,     r.neg_paper,       r.neg_log,
                               r.delta_E};
        for (std::size_t k = 0; k < std::size(cols); ++k) os << (k ? "," : "") << format_double(cols[k]);
        os << '\n';
    }
}

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& out_dir, const std::string& file) {
    const std::filesystem::path p(file);
    return p.is_absolute() ? p : out_dir / p;
}

inline std::ofstream open_output(const std::filesystem::path& path, const std::string& field) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path);
    if (!out) throw ConfigError(field, "cannot write '" + path.string() + "'");
    return out;
}

struct RunData {
    RunReport report;
    std::vector<CsvRow> rows;
};

inline RunData execute_single(const ScenarioConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    RunData data;
    RunReport& rep = data.report;
    rep.name = c.name;
    rep.mode = std::string(to_string(c.mode));
    rep.chi = c.model.chi();
    rep.epsilon = c.model.epsilon();
    rep.chi_below_resonance_bound = c.model.chi() < 1.0;
    rep.eta_end = c.eta_end;
    rep.switch_off_eta = c.pulse.switch_off_eta();
    rep.energy_input_bound = energy_input_bound(c.pulse);
    rep.stability = stability_check(c.pulse);
    rep.weak_coupling = weak_coupling_A_phi(c.pulse, rep.chi);

    const ModePair weights = c.energy_weights();
    const CovarianceMatrix sigma_i = initial_state(c.state);
    const NuCombination nus = NuCombination::from_spec(c.state);
    rep.delta_E_weak = delta_E_weak(rep.weak_coupling->amplitude, weights);
    const double eta_f = rep.switch_off_eta;
    const bool numeric = c.mode != RunMode::Analytic;

    // Sample grid and numeric F.
    std::vector<FState> states;
    if (numeric) {
        states = integrate(c.pulse, c.model, c.eta_end, c.integrator).samples();
    } else {
        for (int k = 0; k < c.output.samples; ++k) {
            FState s;
            s.eta = c.eta_end * static_cast<double>(k) / static_cast<double>(c.output.samples - 1);
            states.push_back(s);
        }
    }
    std::vector<double> etas;
    for (const auto& s : states) etas.push_back(s.eta);
    const auto tail = static_cast<std::size_t>(
        std::lower_bound(etas.begin(), etas.end(), eta_f) - etas.begin());
    rep.samples = etas.size();

    if (numeric && tail < states.size()) {
        const FState& s0 = states[tail];
        rep.extracted = extract_A_phi(s0.f_plus, s0.f_minus, rep.chi * s0.eta, rep.chi);
    }

    // Analytic curve.
    const bool want_analytic = c.mode != RunMode::Evolve;
    const OscillatorySolution closed_sol = rep.extracted.value_or(*rep.weak_coupling);
    std::vector<FPair> analytic(etas.size(), FPair{nan, nan});
    if (want_analytic) {
        const bool need_pert = c.output.analytic != AnalyticCurve::ClosedForm;
        const auto pert = need_pert ? perturbative_F_series(c.pulse, rep.chi, etas) : std::vector<FPair>{};
        for (std::size_t k = 0; k < etas.size(); ++k) {
            const bool closed = c.output.analytic == AnalyticCurve::ClosedForm ||
                                (c.output.analytic == AnalyticCurve::Auto && k >= tail);
            analytic[k] = closed ? closed_form_F(closed_sol, etas[k]) : pert[k];
        }
    }

    // Observables on the matrix path, plus cross-checks against the closed forms.
    const bool both = c.mode == RunMode::Both;
    double cross = 0.0, tail_F = 0.0, integral_var = 0.0;
    double pert_dev_p = 0.0, pert_ref_p = 0.0, pert_dev_m = 0.0, pert_ref_m = 0.0;
    const double i0 = tail < states.size() && numeric ? first_integral(states[tail].f_plus, states[tail].f_minus) : 0.0;
    const auto pert_all = both ? perturbative_F_series(c.pulse, rep.chi, etas) : std::vector<FPair>{};
    for (std::size_t k = 0; k < states.size(); ++k) {
        DecouplingAngles angles = states[k].angles();
        if (!numeric) angles = {analytic[k].f_plus, analytic[k].f_minus, 0.0, 0.0};
        const ObservableSample o = matrix_path_observables(etas[k], angles, sigma_i, weights);
        rep.max_symplectic_defect = std::max(rep.max_symplectic_defect, o.symplectic_defect);
        CsvRow row{etas[k],
                   c.pulse.value(etas[k]),
                   numeric ? states[k].f_plus : nan,
                   numeric ? states[k].f_minus : nan,
                   analytic[k].f_plus,
                   analytic[k].f_minus,
                   o.n_D,
                   o.n_d,
                   o.n_plus(),
                   o.n_minus(),
                   o.negativity,
                   o.log_negativity,
                   o.delta_E};
        data.rows.push_back(row);

        if (k >= tail || tail >= states.size()) {
            rep.n_plus.add(o.n_plus());
            rep.negativity.add(o.negativity);
            rep.delta_E.add(o.delta_E);
        }
        if (numeric && k >= tail) {
            integral_var = std::max(integral_var, std::abs(first_integral(states[k].f_plus, states[k].f_minus) - i0));
        }
        if (both && k >= tail && rep.extracted) {
            const OscillatorySolution& sol = *rep.extracted;
            const FPair f = closed_form_F(sol, etas[k]);
            tail_F = std::max({tail_F, std::abs(f.f_plus - states[k].f_plus), std::abs(f.f_minus - states[k].f_minus)});
            auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
            cross = std::max({cross, rel(o.n_plus(), N_plusminus_closed(sol, etas[k], c.state.r, nus).n_plus),
                              rel(o.negativity, log_negativity_closed(sol, etas[k], c.state.r, nus)),
                              rel(o.delta_E, delta_E_closed(sol, etas[k], c.state.r, nus, weights))});
        }
        if (both) {
            pert_dev_p = std::max(pert_dev_p, std::abs(pert_all[k].f_plus - states[k].f_plus));
            pert_ref_p = std::max(pert_ref_p, std::abs(states[k].f_plus));
            pert_dev_m = std::max(pert_dev_m, std::abs(pert_all[k].f_minus - states[k].f_minus));
            pert_ref_m = std::max(pert_ref_m, std::abs(states[k].f_minus));
        }
    }
    if (both && rep.extracted) {
        rep.max_cross_path_deviation = cross;
        rep.max_tail_F_deviation = tail_F;
    }
    if (numeric && tail < states.size()) rep.first_integral_rel_variation = integral_var / std::max(1.0, i0);
    if (both) {
        rep.perturbative_F_plus_rel_deviation = pert_ref_p > 0.0 ? pert_dev_p / pert_ref_p : pert_dev_p;
        rep.perturbative_F_minus_rel_deviation = pert_ref_m > 0.0 ? pert_dev_m / pert_ref_m : pert_dev_m;
    }
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return data;
}

}  // namespace detail

/// Runs one evolve / analytic / both / validate scenario and writes its outputs under `out_dir`.
inline RunReport run_scenario(const ScenarioConfig& c, const std::filesystem::path& out_dir = ".") {
    if (c.mode == RunMode::Sweep) throw ConfigError("mode", "use run_sweep for mode 'sweep'");
    RunReport rep;
    if (c.mode == RunMode::Validate) {
        const auto start = std::chrono::steady_clock::now();
        rep.name = c.name;
        rep.mode = "validate";
        rep.acceptance = run_acceptance();
        rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } else {
        detail::RunData data = detail::execute_single(c);
        rep = std::move(data.report);
        if (!c.output.csv.empty()) {
            const auto path = detail::resolve(out_dir, c.output.csv);
            auto out = detail::open_output(path, "output.csv");
            write_csv(out, data.rows);
            rep.csv_path = path.string();
        }
    }
    if (!c.output.summary.empty()) {
        const auto path = detail::resolve(out_dir, c.output.summary);
        auto out = detail::open_output(path, "output.summary");
        rep.summary_path = path.string();
        out << to_json(rep).dump(2) << '\n';
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepRow {
    std::size_t index = 0;
    std::vector<Json> values;  // one per axis
    std::optional<RunReport> report;
    std::string error;
};

struct SweepResult {
    std::vector<std::string> parameters;
    std::vector<SweepRow> rows;
};

namespace detail {

inline void set_dotted(Json& root, const std::string& path, const Json& value) {
    Json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("sweep.grid." + path, "malformed path");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) (*node)[key] = Json::object();
        node = &(*node)[key];
        if (!node->is_object()) throw ConfigError("sweep.grid." + path, "'" + key + "' is not an object");
        start = dot + 1;
    }
}

}  // namespace detail

/// Runs every point of the cartesian grid (first axis slowest) in mode "both", without
/// per-point files. Points run on `threads` workers; rows keep grid order.
inline SweepResult run_sweep(const ScenarioConfig& c, unsigned threads = 0) {
    if (c.sweep.empty()) throw ConfigError("sweep", "no sweep axes");
    SweepResult result;
    std::size_t total = 1;
    for (const auto& axis : c.sweep) {
        result.parameters.push_back(axis.path);
        total *= axis.values.size();
    }
    result.rows.resize(total);

    Json base = c.source;
    base.erase("sweep");
    base["mode"] = "both";
    if (!base.contains("output") || !base["output"].is_object()) base["output"] = Json::object();
    base["output"]["csv"] = "";
    base["output"]["summary"] = "";

    for (std::size_t idx = 0; idx < total; ++idx) {
        SweepRow& row = result.rows[idx];
        row.index = idx;
        std::size_t rem = idx;
        row.values.resize(c.sweep.size());
        for (std::size_t a = c.sweep.size(); a-- > 0;) {
            row.values[a] = c.sweep[a].values[rem % c.sweep[a].values.size()];
            rem /= c.sweep[a].values.size();
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t idx = next++; idx < total; idx = next++) {
            SweepRow& row = result.rows[idx];
            try {
                Json point = base;
                for (std::size_t a = 0; a < c.sweep.size(); ++a)
                    detail::set_dotted(point, c.sweep[a].path, row.values[a]);
                row.report = detail::execute_single(parse_config(point)).report;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return result;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    os << "index";
    for (const auto& p : r.parameters) os << ',' << csv_quote(p);
    os << ",A,phi,N_plus_min,N_plus_max,neg_min,neg_max,delta_E_min,delta_E_max,energy_input_bound,stable,error\n";
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : r.rows) {
        os << row.index;
        for (const auto& v : row.values)
            os << ',' << (v.is_number() ? format_double(v.get<double>()) : csv_quote(v.is_string() ? v.get<std::string>() : v.dump()));
        const RunReport* rep = row.report ? &*row.report : nullptr;
        const double cols[] = {
            rep && rep->extracted ? rep->extracted->amplitude : nan,
            rep && rep->extracted ? rep->extracted->phase : nan,
            rep ? rep->n_plus.min : nan,
            rep ? rep->n_plus.max : nan,
            rep ? rep->negativity.min : nan,
            rep ? rep->negativity.max : nan,
            rep ? rep->delta_E.min : nan,
            rep ? rep->delta_E.max : nan,
            rep ? rep->energy_input_bound : nan,
        };
        for (double v : cols) os << ',' << format_double(v);
        os << ',' << (rep ? (rep->stability.ok ? "true" : "false") : "") << ',' << csv_quote(row.error) << '\n';
    }
}

/// Runs a sweep scenario and writes its table to output.csv under `out_dir`.
inline SweepResult run_sweep_to_files(const ScenarioConfig& c, const std::filesystem::path& out_dir,
                                      unsigned threads = 0) {
    SweepResult r = run_sweep(c, threads);
    if (!c.output.csv.empty()) {
        auto out = detail::open_output(detail::resolve(out_dir, c.output.csv), "output.csv");
        write_sweep_csv(out, r);
    }
    return r;
}

}  // namespace tmsdyn
