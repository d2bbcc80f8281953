#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "inband/sim/harness.hpp"

namespace inband::io {

inline constexpr const char* kCsvHeader =
    "scenario,true_sx,true_sy,true_theta,true_sigma,est_sx,est_sy,est_theta,est_sigma,psnr_db,mse,ncc,iters,outlier,ms";

/// Shortest round-trip decimal; infinities as "inf" / "-inf", NaN as "nan".
std::string format_number(double v);

/// Header plus one row per record, in order. Scenario ids containing commas,
/// quotes or newlines are quoted.
std::string format_csv(const std::vector<sim::ExperimentRecord>& records);

/// Writes format_csv(records); throws IoError on failure.
void emit_csv(const std::vector<sim::ExperimentRecord>& records, const std::filesystem::path& path);

}  // namespace inband::io
