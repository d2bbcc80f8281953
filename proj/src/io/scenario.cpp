#include "inband/io/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "inband/error.hpp"

namespace inband::io {

using nlohmann::json;

ThresholdMode parse_threshold(const std::string& text) {
  if (text == "universal") return threshold::Universal{};
  if (text.rfind("frac=", 0) == 0) {
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(text.substr(5), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used > 0 && used == text.size() - 5 && p > 0.0 && p <= 1.0) return threshold::KeepFraction{p};
  }
  throw FormatError("threshold must be 'universal' or 'frac=P' with 0 < P <= 1, got '" + text + "'");
}

namespace {

void apply(sim::ScenarioSpec& s, const json& obj, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + ": expected an object");
  for (const auto& [key, v] : obj.items()) {
    auto bad = [&](const std::string& what) { throw FormatError(where + ": key '" + key + "' " + what); };
    auto num = [&] {
      if (!v.is_number()) bad("must be a number");
      return v.get<double>();
    };
    auto integer = [&] {
      if (!v.is_number_integer()) bad("must be an integer");
      return v.get<long long>();
    };
    auto text = [&] {
      if (!v.is_string()) bad("must be a string");
      return v.get<std::string>();
    };
    auto flag = [&] {
      if (!v.is_boolean()) bad("must be true or false");
      return v.get<bool>();
    };
    if (key == "id") s.id = text();
    else if (key == "scene") s.scene = text();
    else if (key == "scene_seed") s.scene_seed = static_cast<std::uint64_t>(integer());
    else if (key == "source_side") s.source_side = static_cast<int>(integer());
    else if (key == "target_side") s.target_side = static_cast<int>(integer());
    else if (key == "sigma") s.truth.sigma = num();
    else if (key == "theta") s.truth.theta_deg = num();
    else if (key == "tx") s.truth.tx = num();
    else if (key == "ty") s.truth.ty = num();
    else if (key == "mode") {
      const std::string m = text();
      if (m == "bicubic") s.mode = sim::SynthesisMode::bicubic;
      else if (m == "exact") s.mode = sim::SynthesisMode::exact;
      else bad("must be 'bicubic' or 'exact'");
    } else if (key == "snr_db") {
      if (v.is_null()) s.snr_db.reset();
      else if (!std::isfinite(num())) bad("must be finite");
      else s.snr_db = num();
    } else if (key == "sparsity") {
      if (v.is_null()) s.sparsity.reset();
      else if (const double p = num(); p > 0.0 && p <= 1.0) s.sparsity = p;
      else bad("must lie in (0, 1]");
    } else if (key == "sparsity_mode") {
      const std::string m = text();
      if (m == "largest") s.sparsity_mode = sim::SparsityMode::largest;
      else if (m == "random") s.sparsity_mode = sim::SparsityMode::random;
      else bad("must be 'largest' or 'random'");
    } else if (key == "sparsify_reference") s.sparsify_reference = flag();
    else if (key == "seed") s.seed = static_cast<std::uint64_t>(integer());
    else if (key == "tau") s.config.bnb.tau = num();
    else if (key == "k") {
      if (v.is_string() && v.get<std::string>() == "auto") s.config.k.reset();
      else s.config.k = static_cast<int>(integer());
    } else if (key == "h_max") s.config.bnb.h_max = static_cast<int>(integer());
    else if (key == "bins") s.config.bins = static_cast<int>(integer());
    else if (key == "threshold") s.config.threshold = parse_threshold(text());
    else if (key == "estimate_scale") s.config.estimate_scale = flag();
    else if (key == "estimate_rotation") s.config.estimate_rotation = flag();
    else bad("is not recognised");
  }
}

}  // namespace

std::vector<sim::ScenarioSpec> parse_scenarios(const std::string& json_text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(name + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError(name + ": top level must be an object");
  for (const auto& [key, v] : doc.items())
    if (key != "defaults" && key != "scenarios") throw FormatError(name + ": unknown top-level key '" + key + "'");
  sim::ScenarioSpec base;
  if (doc.contains("defaults")) apply(base, doc["defaults"], name + ": defaults");
  if (!doc.contains("scenarios") || !doc["scenarios"].is_array() || doc["scenarios"].empty())
    throw FormatError(name + ": 'scenarios' must be a non-empty array");
  std::vector<sim::ScenarioSpec> out;
  for (std::size_t i = 0; i < doc["scenarios"].size(); ++i) {
    sim::ScenarioSpec s = base;
    apply(s, doc["scenarios"][i], name + ": scenario " + std::to_string(i));
    if (s.id.empty()) s.id = "scenario" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<sim::ScenarioSpec> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_scenarios(text, path.string());
}

}  // namespace inband::io
