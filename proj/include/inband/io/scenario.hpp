#pragma once

// Scenario files: JSON with an optional "defaults" object and a "scenarios"
// array. Every scenario object takes the same keys as "defaults":
//
//   id, scene, scene_seed, source_side, target_side,
//   sigma, theta, tx, ty,                      true parameters
//   mode ("bicubic" | "exact"), snr_db, sparsity,
//   sparsity_mode ("largest" | "random"), sparsify_reference, seed,
//   tau, k (integer or "auto"), h_max, bins, threshold ("universal" | "frac=P"),
//   estimate_scale, estimate_rotation
//
// Unknown keys and out-of-range values raise FormatError.

#include <filesystem>
#include <string>
#include <vector>

#include "inband/haar.hpp"
#include "inband/sim/harness.hpp"

namespace inband::io {

/// "universal" or "frac=P" with 0 < P <= 1.
ThresholdMode parse_threshold(const std::string& text);

std::vector<sim::ScenarioSpec> parse_scenarios(const std::string& json_text, const std::string& name = "<memory>");

std::vector<sim::ScenarioSpec> load_scenarios(const std::filesystem::path& path);

}  // namespace inband::io
