#include "inband/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "inband/error.hpp"

namespace inband::io {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

namespace {

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string format_csv(const std::vector<sim::ExperimentRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    const double fields[] = {r.truth.tx,       r.truth.ty,       r.truth.theta_deg,    r.truth.sigma,
                             r.estimate.tx,    r.estimate.ty,    r.estimate.theta_deg, r.estimate.sigma,
                             r.psnr_db,        r.mse,            r.ncc};
    out += quoted(r.scenario);
    for (double f : fields) out += "," + format_number(f);
    out += "," + std::to_string(r.iterations) + "," + (r.outlier ? "1" : "0") + "," + format_number(r.ms) + "\n";
  }
  return out;
}

void emit_csv(const std::vector<sim::ExperimentRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string text = format_csv(records);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace inband::io
