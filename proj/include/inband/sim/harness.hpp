#pragma once

// Synthetic experiments: procedural test scenes, pair synthesis, noise,
// sparsification, metrics and a parallel scenario runner.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inband/estimators.hpp"
#include "inband/grid.hpp"
#include "inband/haar.hpp"

namespace inband::sim {

/// Names accepted by make_scene.
const std::vector<std::string>& scene_names();

/// Deterministic procedural grayscale scene in [0, 255]. Throws ContractError
/// for unknown names.
Grid make_scene(std::string_view name, int side, std::uint64_t seed = 1);

/// Catmull-Rom sample with clamped borders.
double sample_bicubic(const Grid& g, double y, double x);

/// Mean over factor x factor blocks.
Grid block_mean(const Grid& g, int factor);

/// Resize a square grid to new_side: block means when shrinking by a power of
/// two, Catmull-Rom otherwise.
Grid resize(const Grid& g, int new_side);

/// out(q) = g(p) with q = R(p + t - c) + c about the grid centre c; t in
/// pixels of `g`.
Grid warp_rigid(const Grid& g, double theta_deg, double tx, double ty);

/// Circular translation with linear interpolation: out(x) = g(x - t). For
/// t = s / 2^h this equals block-averaging the 2^h-upsampled grid shifted by s.
Grid circular_translate(const Grid& g, double tx, double ty);

enum class SynthesisMode { bicubic, exact };

struct Pair {
  ImageGrid ref;
  ImageGrid sen;
};

/// Reference and sensed images of side target_side from a source of side at
/// least 2 * target_side. Bicubic mode warps the source with bicubic
/// interpolation (translate, then rotate), crops the centre, halves by block
/// means and resizes the sensed image by sigma. Exact mode supports
/// translation only and shifts the reference circularly.
Pair synthesize_pair(const Grid& hi_res, const SimilarityParams& params, SynthesisMode mode, int target_side);

/// Adds N(0, v) with v = signal power / 10^(snr/10). An infinite SNR returns
/// the image unchanged. Throws DegenerateInputError for a constant image.
ImageGrid add_gaussian_noise(const ImageGrid& img, double snr_db, std::uint64_t seed);

/// SNR of `noisy` against `clean` in dB.
double measured_snr_db(const ImageGrid& clean, const ImageGrid& noisy);

enum class SparsityMode { largest, random };

ThresholdResult sparsify_pyramid(const HaarPyramid& pyr, double fraction, SparsityMode mode = SparsityMode::largest,
                                 std::uint64_t seed = 0);

struct Metrics {
  double psnr_db = 0.0;
  double mse = 0.0;
};

/// mse = mean squared difference; psnr = 10 log10(255^2 / mse), +inf for mse = 0.
Metrics image_metrics(const ImageGrid& ref, const ImageGrid& test);

struct ScenarioSpec {
  std::string id;
  std::string scene = "portrait";
  std::uint64_t scene_seed = 1;
  int source_side = 512;
  int target_side = 256;
  SimilarityParams truth;
  SynthesisMode mode = SynthesisMode::exact;
  std::optional<double> snr_db;
  std::optional<double> sparsity;
  SparsityMode sparsity_mode = SparsityMode::largest;
  bool sparsify_reference = true;  // false: only the sensed pyramid is sparsified
  std::uint64_t seed = 1;
  RegistrationConfig config;
};

struct ExperimentRecord {
  std::string scenario;
  SimilarityParams truth;
  SimilarityParams estimate;
  double psnr_db = 0.0;
  double mse = 0.0;
  double ncc = 0.0;
  int iterations = 0;
  bool outlier = false;
  double ms = 0.0;
  std::string error;  // non-empty when the scenario threw
};

/// Prediction of the sensed image from the reference and an estimate: the
/// in-band shifted pyramid in exact mode, a bicubic warp otherwise.
ImageGrid predict_sensed(const ImageGrid& ref, const SimilarityParams& estimate, SynthesisMode mode, int sensed_side);

ExperimentRecord run_scenario(const ScenarioSpec& spec);

/// Runs every scenario; records come back in input order. threads = 0 uses
/// the hardware concurrency.
std::vector<ExperimentRecord> run_experiment(const std::vector<ScenarioSpec>& specs, int threads = 0);

struct BnBChoice {
  double tau = 2.0;
  int k = 1;
  double mean_error = 0.0;  // mean max-axis shift error over the calibration pairs
};

/// Picks tau and k on calibration pairs synthesised from `base` with the given
/// shifts and fresh noise seeds, minimising the mean shift error (ties go to
/// the larger tau, then the smaller k).
BnBChoice cross_validate_bnb(const ScenarioSpec& base, const std::vector<std::pair<double, double>>& shifts,
                             const std::vector<double>& taus, const std::vector<int>& ks, std::uint64_t seed);

}  // namespace inband::sim
