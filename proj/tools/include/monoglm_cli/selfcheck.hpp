#pragma once

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>

namespace monoglm::cli {

struct SelfcheckOptions {
    std::size_t size = 50;                    // random problems per family for the oracle and gradient suites
    std::optional<std::size_t> calibration;   // null replicates; default 8 * size
    std::uint64_t seed = 1;
    double kkt_tolerance = 1e-7;
};

struct SelfcheckResult {
    nlohmann::ordered_json report;
    nlohmann::ordered_json failures = nlohmann::ordered_json::array();  // replayable cases
    bool pass = true;
};

/// Randomized oracle equivalence, derivative and calibration suites.
SelfcheckResult run_selfcheck(const SelfcheckOptions& options);

/// Re-runs one serialized case and returns its diagnostics entry.
nlohmann::ordered_json replay_case(const nlohmann::json& failing_case);

} // namespace monoglm::cli
