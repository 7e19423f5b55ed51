#pragma once

#include "monoglm/design.hpp"
#include "monoglm/inference.hpp"
#include "monoglm/solver.hpp"
#include "monoglm_cli/config.hpp"

#include <json.hpp>

#include <string>

namespace monoglm::cli {

inline constexpr int report_version = 1;

/// Machine-readable fit report: coefficients, per-level effects, log-likelihood, active set,
/// KKT report and a summary of the outer iterations.
nlohmann::ordered_json fit_report(const RunConfig& config, const DesignSystem& design, const FitResult& fit);

/// Adds the likelihood ratio test section to a fit report.
void add_test_section(nlohmann::ordered_json& report, const DesignSystem& design, const TestConfig& test,
                      const LrtResult& result);

/// Coefficient table rows: index, label, kind, estimate, constrained, active.
nlohmann::ordered_json coefficient_table(const DesignSystem& design, const FitResult& fit);

std::string render_text(const nlohmann::ordered_json& report);

} // namespace monoglm::cli
