#include "inband/io/report.hpp"

#include <json.hpp>

#include "inband/io/csv.hpp"

namespace inband::io {

std::string format_estimate(const SimilarityParams& p) {
  return "(" + format_number(p.sigma) + ", " + format_number(p.theta_deg) + ", " + format_number(p.tx) + ", " +
         format_number(p.ty) + ")";
}

std::string report_json(const RegistrationReport& r) {
  nlohmann::ordered_json j;
  j["sigma"] = r.params.sigma;
  j["theta_deg"] = r.params.theta_deg;
  j["tx"] = r.params.tx;
  j["ty"] = r.params.ty;
  j["ncc"] = r.ncc;
  j["raw_scale"] = r.raw_scale;
  j["initial_theta_deg"] = r.initial_theta_deg;
  j["first_theta_deg"] = r.first_theta_deg;
  j["k"] = r.k;
  j["converged"] = r.translation.converged;
  j["iterations"] = r.translation.iterations;
  j["splits"] = r.translation.splits;
  j["evaluations"] = r.translation.evaluations;
  j["elapsed_ms"] = r.elapsed_ms;
  return j.dump(2) + "\n";
}

std::string format_shift(const DyadicShift& x, const DyadicShift& y) {
  auto one = [](const DyadicShift& s) {
    return std::to_string(s.numerator) + "/2^" + std::to_string(s.added_levels) + " = " + format_number(s.pixels());
  };
  return "dx " + one(x) + ", dy " + one(y);
}

}  // namespace inband::io
