#pragma once

#include "monoglm/inference.hpp"
#include "monoglm/model_spec.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace monoglm::cli {

enum class OutputFormat { json, text };

/// Null hypothesis as written in the configuration: a factor name or column labels.
struct NullConfig {
    std::optional<std::string> factor;
    std::vector<std::string> columns;
};

struct TestConfig {
    NullConfig null;
    TestMethod method = TestMethod::chibar_weights;
    std::size_t n_sim = 10000;
    std::optional<std::uint64_t> seed;
    std::optional<double> sigma2;
    unsigned threads = 1;
};

struct RunConfig {
    std::string data_path;
    ModelSpec model;
    std::optional<TestConfig> test;
    std::string output_path;  // empty: standard output
    OutputFormat format = OutputFormat::json;
};

/**
 * Parses the declarative model configuration. Recognized keys: data, family, response, time,
 * event, intercept, factors [{column, levels, direction}], covariates, test {null {factor |
 * columns}, method, n_sim, seed, sigma2, threads}, tolerances {kkt, feasibility,
 * inner_gradient, max_outer_iterations}, output {path, format}. Unknown keys are rejected.
 */
RunConfig parse_config(const nlohmann::json& config);
RunConfig load_config(const std::string& path);

OutputFormat parse_format(const std::string& name);

} // namespace monoglm::cli
