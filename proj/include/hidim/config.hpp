#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hidim/input_spec.hpp"
#include "hidim/joint_gp.hpp"
#include "hidim/screening.hpp"

namespace hidim::config {

struct DesignConfig {
    std::size_t n = 0;  // 0: default to 10 * d
    std::uint64_t seed = 1;
    std::size_t optimize_budget = 2000;
    bool centered = false;
};

struct ScreeningConfig {
    double alpha = 0.1;
    screening::TestKind test = screening::TestKind::asymptotic_gamma;
    std::size_t permutations = 199;
};

struct GpSection {
    int multi_starts = 5;
    int optimizer_budget = 300;
    double dispersion_floor_factor = 1e-6;
    double smoothness = 2.5;
};

struct ValidationConfig {
    jointgp::ValidationMode mode = jointgp::ValidationMode::leave_one_out;
    double test_fraction = 0.2;
};

/// Whole-pipeline configuration; sections mirror the config file.
struct PipelineConfig {
    std::vector<InputSpec> inputs;
    DesignConfig design;
    ScreeningConfig screening;
    GpSection gp;
    ValidationConfig validation;
};

/// Parse the key = value sectioned format:
///   [inputs]           one "name = lower, upper" line per input
///   [design]           n, seed, optimize_budget, centered
///   [screening]        alpha, test (gamma|permutation), permutations
///   [gp]               multi_starts, optimizer_budget, dispersion_floor_factor, smoothness
///   [validation]       mode (test|loo), test_fraction
/// Unknown sections or keys are errors; '#' starts a comment.
PipelineConfig parse_config(const std::string& content);
PipelineConfig load_config(const std::string& path);

/// Deterministic canonical rendering (also valid config syntax); its hash
/// identifies the configuration in run manifests.
std::string canonical_dump(const PipelineConfig& config);

/// Validates cross-field invariants; throws std::invalid_argument.
void validate(const PipelineConfig& config);

}  // namespace hidim::config
