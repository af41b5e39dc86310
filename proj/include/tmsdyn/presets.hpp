#pragma once

// Built-in scenario configurations reproducing the two published figures.
// The same documents ship as presets/<name>.json.

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tmsdyn::presets {

struct Preset {
    std::string_view name;
    std::string_view json;
};

inline constexpr std::string_view kFig1a = R"json({
  "name": "fig1a",
  "description": "Weak pulse lambda = 0.1, eta0 = 1, chi = 0.1: numeric F against the perturbative solution",
  "mode": "both",
  "eta_end": 60,
  "model": { "chi": 0.1 },
  "pulse": { "type": "gaussian_quadratic", "lambda": 0.1, "eta0": 1 },
  "state": { "r": 0, "nu_D": 1, "nu_d": 1 },
  "integrator": { "method": "rk45", "rel_tol": 1e-10, "abs_tol": 1e-12, "max_step": 0.1 },
  "output": { "csv": "fig1a.csv", "summary": "fig1a.json", "analytic": "perturbative" }
}
)json";

inline constexpr std::string_view kFig1b = R"json({
  "name": "fig1b",
  "description": "Pulse lambda = 1, eta0 = 1, chi = 0.1 (peak coupling 1/e): numeric F against the perturbative solution",
  "mode": "both",
  "eta_end": 60,
  "model": { "chi": 0.1 },
  "pulse": { "type": "gaussian_quadratic", "lambda": 1, "eta0": 1 },
  "state": { "r": 0, "nu_D": 1, "nu_d": 1 },
  "integrator": { "method": "rk45", "rel_tol": 1e-10, "abs_tol": 1e-12, "max_step": 0.1 },
  "output": { "csv": "fig1b.csv", "summary": "fig1b.json", "analytic": "perturbative" }
}
)json";

inline constexpr std::string_view kFig2a = R"json({
  "name": "fig2a",
  "description": "Pulse lambda = 0.1, eta0 = 3, chi = 0.1: numeric F against the closed form with extracted (A, phi)",
  "mode": "both",
  "eta_end": 100,
  "model": { "chi": 0.1 },
  "pulse": { "type": "gaussian_quadratic", "lambda": 0.1, "eta0": 3 },
  "state": { "r": 0, "nu_D": 1, "nu_d": 1 },
  "integrator": { "method": "rk45", "rel_tol": 1e-10, "abs_tol": 1e-12, "max_step": 0.1 },
  "output": { "csv": "fig2a.csv", "summary": "fig2a.json", "analytic": "closed_form" }
}
)json";

inline constexpr std::string_view kFig2b = R"json({
  "name": "fig2b",
  "description": "Strong pulse lambda = 1, eta0 = 3, chi = 0.1: numeric F against the closed form with extracted (A, phi)",
  "mode": "both",
  "eta_end": 100,
  "model": { "chi": 0.1 },
  "pulse": { "type": "gaussian_quadratic", "lambda": 1, "eta0": 3 },
  "state": { "r": 0, "nu_D": 1, "nu_d": 1 },
  "integrator": { "method": "rk45", "rel_tol": 1e-10, "abs_tol": 1e-12, "max_step": 0.1 },
  "output": { "csv": "fig2b.csv", "summary": "fig2b.json", "analytic": "closed_form" }
}
)json";

inline const std::vector<Preset>& all() {
    static const std::vector<Preset> list{
        {"fig1a", kFig1a},
        {"fig1b", kFig1b},
        {"fig2a", kFig2a},
        {"fig2b", kFig2b},
    };
    return list;
}

inline bool exists(std::string_view name) {
    for (const auto& p : all())
        if (p.name == name) return true;
    return false;
}

inline std::string_view get(std::string_view name) {
    for (const auto& p : all())
        if (p.name == name) return p.json;
    throw std::invalid_argument("unknown preset: " + std::string(name));
}

}  // namespace tmsdyn::presets
