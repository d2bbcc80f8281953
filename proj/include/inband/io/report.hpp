#pragma once

// Text the command-line tool prints, kept in the library so the tool adds
// nothing of its own.

#include <string>

#include "inband/estimators.hpp"
#include "inband/inband_shift.hpp"

namespace inband::io {

/// "(sigma, theta, tx, ty)" with shortest round-trip numbers.
std::string format_estimate(const SimilarityParams& p);

/// JSON report of a registration: estimate, NCC, intermediate angles, k, BnB
/// statistics and timing.
std::string report_json(const RegistrationReport& r);

/// Applied shift per axis as "sx/2^h" fractions of a pixel.
std::string format_shift(const DyadicShift& x, const DyadicShift& y);

}  // namespace inband::io
