#include "inband/io/cli.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>

#include "inband/error.hpp"
#include "inband/estimators.hpp"
#include "inband/haar.hpp"
#include "inband/io/csv.hpp"
#include "inband/io/image_io.hpp"
#include "inband/io/report.hpp"
#include "inband/io/scenario.hpp"
#include "inband/sim/harness.hpp"

namespace inband::io {

void configure_logging() {
  const char* env = std::getenv("INBAND_LOG");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (env != nullptr) {
    const auto parsed = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour "off" when spelled out.
    if (parsed != spdlog::level::off || std::string(env) == "off") level = parsed;
  }
  spdlog::set_level(level);
}

namespace {

struct Options {
  std::vector<std::string> inputs;
  std::optional<double> tau;
  std::string k = "auto";
  std::optional<int> h_max;
  std::optional<int> bins;
  std::optional<std::string> threshold;
  std::optional<double> sparsity;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::string out;
  double dx = 0.0, dy = 0.0;
  int threads = 0;
};

std::optional<int> parse_k(const std::string& text) {
  if (text == "auto") return std::nullopt;
  std::size_t used = 0;
  int k = 0;
  try {
    k = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || k < 1) throw CLI::ValidationError("--k", "must be 'auto' or a positive integer");
  return k;
}

// Power-of-two input, cropped centrally with a notice when needed.
ImageGrid load(const std::string& path, std::ostream& err) {
  const LoadedImage img = read_image(path);
  for (const auto& w : img.warnings) err << "warning: " << w << "\n";
  const Grid& g = img.pixels;
  if (g.is_square() && g.rows() >= 2 && (g.rows() & (g.rows() - 1)) == 0) return ImageGrid(g);
  const Subregion s = extract_pow2_subregion(g);
  err << "notice: " << path << " is " << g.cols() << "x" << g.rows() << "; using the centred " << s.image.side()
      << "x" << s.image.side() << " crop at (" << s.left << ", " << s.top << ")\n";
  return s.image;
}

void apply_overrides(RegistrationConfig& c, const Options& o) {
  if (o.tau) c.bnb.tau = *o.tau;
  if (o.h_max) c.bnb.h_max = *o.h_max;
  if (o.bins) c.bins = *o.bins;
  if (o.threshold) c.threshold = parse_threshold(*o.threshold);
}

int run_register(const Options& o, std::ostream& out, std::ostream& err) {
  const ImageGrid ref = load(o.inputs.at(0), err);
  const ImageGrid sen = load(o.inputs.at(1), err);
  RegistrationConfig config;
  apply_overrides(config, o);
  config.k = parse_k(o.k);
  RegistrationReport r;
  if (o.sparsity) {
    config.sensed_support = true;
    r = register_pyramids(sim::sparsify_pyramid(forward_haar(ref), *o.sparsity).pyramid,
                          sim::sparsify_pyramid(forward_haar(sen), *o.sparsity).pyramid, config);
  } else {
    r = register_similarity(ref, sen, config);
  }
  out << format_estimate(r.params) << "\n";
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw IoError("cannot write " + o.out);
    f << report_json(r);
  }
  return 0;
}

int run_shift(const Options& o, std::ostream& out, std::ostream& err) {
  const ImageGrid img = load(o.inputs.at(0), err);
  const int h_max = o.h_max.value_or(6);
  const int k = parse_k(o.k).value_or(1);
  const HaarPyramid pyr = forward_haar(img);
  if (k > pyr.levels()) throw RangeError("--k exceeds the image's " + std::to_string(pyr.levels()) + " levels");
  const DifferenceField d = compute_difference_field(pyr, pyr.levels());
  const DyadicShift sx = quantize_shift(o.dx, h_max, Axis::horizontal);
  const DyadicShift sy = quantize_shift(o.dy, h_max, Axis::vertical);
  const int h = std::max(sx.added_levels, sy.added_levels);
  const ShiftedDetailPair pair = shifted_detail_pair(d, sx, sy, k + h);
  const ShiftedDetailPlane diag = shifted_diagonal_plane(d, sx, sy, k + h);
  const std::string stem = o.out.empty() ? "shifted" : o.out;
  auto save = [&](const Grid& g, const char* suffix) {
    // Zero detail maps to mid-grey.
    double peak = 0.0;
    for (double v : g.values()) peak = std::max(peak, std::abs(v));
    Grid scaled = g;
    for (double& v : scaled.values()) v = 127.5 + (peak > 0.0 ? 127.5 * v / peak : 0.0);
    const std::string path = stem + suffix;
    write_image(path, scaled);
    out << path << "\n";
  };
  out << format_shift(sx, sy) << " at level " << pair.horizontal.level << "\n";
  save(pair.horizontal.values, "_horizontal.pgm");
  save(pair.vertical.values, "_vertical.pgm");
  save(diag.values, "_diagonal.pgm");
  return 0;
}

int run_sweep(const Options& o, std::ostream& out) {
  std::vector<sim::ScenarioSpec> specs = load_scenarios(o.inputs.at(0));
  for (auto& s : specs) {
    apply_overrides(s.config, o);
    if (o.k != "auto") s.config.k = parse_k(o.k);
    if (o.sparsity) s.sparsity = *o.sparsity;
    if (o.seed) s.seed = *o.seed;
    if (o.mode) s.mode = *o.mode == "exact" ? sim::SynthesisMode::exact : sim::SynthesisMode::bicubic;
  }
  spdlog::info("running {} scenarios", specs.size());
  const auto records = sim::run_experiment(specs, o.threads);
  for (const auto& r : records)
    if (!r.error.empty()) spdlog::warn("{}: {}", r.scenario, r.error);
  if (o.out.empty())
    out << format_csv(records);
  else
    emit_csv(records, o.out);
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Sub-pixel registration of Haar wavelet coefficients", "inband"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--tau", o.tau, "BnB stopping threshold in (0, 2]")->check(CLI::Range(0.0, 2.0));
    sub->add_option("--k", o.k, "comparison level below the finest, or 'auto'");
    sub->add_option("--h-max", o.h_max, "shift lattice 1/2^h")->check(CLI::Range(1, 20));
    sub->add_option("--bins", o.bins, "slope histogram bins")->check(CLI::Range(2, 100000));
    sub->add_option("--threshold", o.threshold, "universal | frac=P");
    sub->add_option("--sparsity", o.sparsity, "keep this fraction of detail coefficients")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--mode", o.mode, "synthesis mode")->check(CLI::IsMember({"bicubic", "exact"}));
  };

  CLI::App* reg = app.add_subcommand("register", "estimate (sigma, theta, tx, ty) between two images");
  reg->add_option("images", o.inputs, "reference and sensed image")->required()->expected(2)->check(CLI::ExistingFile);
  reg->add_option("--out", o.out, "write a JSON report");
  common(reg);

  CLI::App* sh = app.add_subcommand("shift", "write in-band shifted detail planes");
  sh->add_option("image", o.inputs, "input image")->required()->expected(1)->check(CLI::ExistingFile);
  sh->add_option("--dx", o.dx, "horizontal shift in pixels");
  sh->add_option("--dy", o.dy, "vertical shift in pixels");
  sh->add_option("--out", o.out, "output file stem");
  common(sh);

  CLI::App* sw = app.add_subcommand("sweep", "run a scenario file");
  sw->add_option("scenarios", o.inputs, "scenario file (JSON)")->required()->expected(1)->check(CLI::ExistingFile);
  sw->add_option("--out", o.out, "CSV path (stdout when omitted)");
  sw->add_option("--threads", o.threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  common(sw);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    // Help and version requests are successes.
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  try {
    if (o.threshold) parse_threshold(*o.threshold);
    parse_k(o.k);
    if (reg->parsed()) return run_register(o, out, err);
    if (sh->parsed()) return run_shift(o, out, err);
    return run_sweep(o, out);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const EstimationError& e) {
    err << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return 1;
  } catch (const DegenerateInputError& e) {
    err << "degenerate input: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace inband::io
