#pragma once

#include "monoglm/design.hpp"
#include "monoglm/error.hpp"
#include "monoglm/families.hpp"
#include "monoglm/inference.hpp"
#include "monoglm/model_spec.hpp"
#include "monoglm/observation_table.hpp"
#include "monoglm/solver.hpp"

#ifdef MONOGLM_DIAGNOSTICS
#include "monoglm/diagnostics/oracles.hpp"
#include "monoglm/diagnostics/random_problems.hpp"
#endif
