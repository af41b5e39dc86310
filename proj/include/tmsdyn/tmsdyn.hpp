#pragma once

#include "tmsdyn/core_symplectic.hpp"
#include "tmsdyn/hamiltonian_model.hpp"
#include "tmsdyn/ode_integrators.hpp"
#include "tmsdyn/evolution_ode.hpp"
#include "tmsdyn/analytic_solutions.hpp"
#include "tmsdyn/observables.hpp"
#include "tmsdyn/validation.hpp"
#include "tmsdyn/presets.hpp"
#include "tmsdyn/scenario.hpp"
