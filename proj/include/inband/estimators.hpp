#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inband/grid.hpp"
#include "inband/haar.hpp"
#include "inband/inband_shift.hpp"

namespace inband {

/// q = S R T p: translate by (tx, ty), rotate by theta about the image centre,
/// then scale by sigma. Angles are in degrees, measured from +x (columns)
/// towards +y (rows).
struct SimilarityParams {
  double sigma = 1.0;
  double theta_deg = 0.0;
  double tx = 0.0;
  double ty = 0.0;
};

/// Maps an angle to (-180, 180].
double normalize_angle(double deg);

// ---------------------------------------------------------------- rotation

enum class SlopeWeighting { count, magnitude };

/// Histogram of arctan(b / a) over 180 degrees. Bin i is centred on
/// -90 + (i + 1) * width, so centres span (-90, 90].
struct SlopeHistogram {
  int bins = 0;
  std::vector<double> counts;

  double bin_width() const noexcept { return 180.0 / bins; }
  double center(int bin) const noexcept { return -90.0 + (bin + 1) * bin_width(); }
  int bin_of(double angle_deg) const noexcept;
};

/// Locations retained in either the a or the b plane of `level`.
std::vector<std::uint8_t> location_mask(const SparseMask& mask, int level);

/// Accumulates arctan(b/a) over retained locations with (a, b) != (0, 0).
/// An empty `retained` span means every location. Throws DegenerateInputError
/// when nothing is accumulated.
SlopeHistogram wavelet_slope_histogram(const Grid& a, const Grid& b, std::span<const std::uint8_t> retained,
                                       int bins, SlopeWeighting weighting = SlopeWeighting::count);

/// Argmax of the circular cross-correlation, as an angle in (-90, 90].
double estimate_rotation_initial(const SlopeHistogram& h_ref, const SlopeHistogram& h_sen);

/// Up to `count` local maxima of the same correlation, strongest first.
std::vector<double> rotation_candidates(const SlopeHistogram& h_ref, const SlopeHistogram& h_sen, int count);

struct CoeffPlanes {
  Grid a;
  Grid b;
};

/// Channel mix by the rotation matrix plus bilinear rotation of the grid about
/// its centre; samples falling outside the plane are zero.
CoeffPlanes rotate_coeff_planes(const Grid& a, const Grid& b, double theta_deg);

/// 1 inside the disk inscribed in a side x side plane, 0 outside.
Grid support_disk(int side);

struct RefineConfig {
  double half_range_deg = 5.0;
  double step_deg = 0.1;
  bool resolve_half_turn = true;
  /// Rotate the reference by theta/2 and the sensed planes by -theta/2 rather
  /// than the reference alone.
  bool symmetric = true;
};

struct RotationRefinement {
  double theta_deg = 0.0;
  double residual = 0.0;
};

/// Grid search around theta0 minimising |a_J - R a_I| + |b_J - R b_I| over the
/// inscribed disk (a disk shrunk by the rotation in symmetric mode). With resolve_half_turn the minimiser is compared against
/// its 180-degree twin and the smaller residual wins.
RotationRefinement refine_rotation(const CoeffPlanes& ref, const CoeffPlanes& sen, double theta0_deg,
                                   const RefineConfig& config = {});

// ------------------------------------------------------------------- scale

/// Mean of 1/kappa over retained interior locations with kappa > kappa_min,
/// where kappa is the level-set curvature from central differences. A
/// non-positive kappa_min selects 1 / side. Throws DegenerateInputError when
/// no location qualifies.
double mean_curvature_radius(const Grid& plane, std::span<const std::uint8_t> retained, double kappa_min = 0.0);

/// |plane| over retained locations (zero elsewhere), smoothed by a Gaussian
/// whose standard deviation is `width` times the plane side. Borders are
/// clamped. A non-positive width returns the magnitudes unsmoothed.
Grid coefficient_envelope(const Grid& plane, std::span<const std::uint8_t> retained, double width);

struct ScaleConfig {
  /// Level used for the radii, counted upwards from each pyramid's finest level.
  int levels_above_finest = 1;
  double kappa_min = 0.0;
  /// Radii are taken on the coefficient envelope at this relative width,
  /// averaged over the whole plane. Zero takes them on the thresholded plane
  /// itself at retained locations.
  double envelope_width = 0.25;
};

struct ScaleEstimate {
  double raw = 1.0;      // average radius ratio, sensed over reference
  double snapped = 1.0;  // nearest power of two
};

/// Scale of the sensed image relative to the reference (sigma in q = S R T p).
ScaleEstimate estimate_scale(const HaarPyramid& ref, const SparseMask& ref_mask, const HaarPyramid& sen,
                             const SparseMask& sen_mask, const ScaleConfig& config = {});

/// Relabels the levels of a pyramid of an image sampled at sigma times the
/// reference resolution so that it lines up with the reference pyramid: the
/// result has levels() - log2(sigma) levels; finest levels are dropped for
/// sigma > 1 and zero-filled for sigma < 1.
HaarPyramid rescale_coeffs(const HaarPyramid& pyr, double sigma);

// ------------------------------------------------------------- translation

/// Sum of the normalized correlations of the a and b planes, in [-2, 2].
/// Throws DegenerateInputError on a zero-norm plane.
double ncc_score(const Grid& a_ref, const Grid& b_ref, const Grid& a_sen, const Grid& b_sen);

struct BnBConfig {
  double tau = 2.0 - 1e-9;
  int k = 1;       // comparison level is N - k
  int h_max = 6;   // shift lattice 1 / 2^h_max
  double epsilon = 0.0;  // oscillation tolerance; <= 0 selects 1 / 2^(h_max + 1)
  int max_iterations = 64;  // per descent
  int max_evaluations = 0;  // backtracking budget; the first descent always runs
  bool polish = true;  // hill-climb on the lattice after the search stops
  bool probe_midpoints = true;  // also score edge midpoints and centre before each split
};

/// Search rectangle and bookkeeping of one BnB iteration.
struct BnBState {
  double low_x = -1.0, high_x = 1.0;
  double low_y = -1.0, high_y = 1.0;
  int iteration = 0;
  double best_score = -2.0;
  double best_x = 0.0, best_y = 0.0;
  double second_score = -2.0;
  double second_x = 0.0, second_y = 0.0;
  bool split = false;  // the rectangle was halved after this iteration
  bool restart = false;  // first iteration of a backtracked descent
  std::vector<std::pair<double, double>> recent_centers;
};

struct TranslationEstimate {
  double tx = 0.0;
  double ty = 0.0;
  double score = -2.0;
  bool converged = false;
  int iterations = 0;
  int splits = 0;
  int evaluations = 0;
  int polish_steps = 0;
  int restarts = 0;
  std::vector<BnBState> trace;
};

/// Sensed detail planes at the comparison level, optionally with a support
/// mask (1 where the sensed planes carry data) applied to the reference.
struct SensedPlanes {
  Grid a;
  Grid b;
  std::optional<Grid> support;
  /// Gaussian applied to the shifted reference planes before correlation; the
  /// caller smooths a and b by the same amount.
  double smoothing = 0.0;
  /// When set, the shifted reference planes are rotated by this angle and back
  /// before correlation, matching the resampling the sensed planes went
  /// through when they were de-rotated.
  std::optional<double> round_trip_deg;
};

/// Score of the candidate translation (tx, ty): correlation of the sensed
/// planes with the reference shifted in-band by (-tx, -ty).
double translation_score(const DifferenceField& ref, const SensedPlanes& sen, double tx, double ty, int k, int h_max);

/// Branch-and-bound maximisation of translation_score over [-1, 1]^2 on the
/// 1 / 2^h_max lattice. A descent halves the square towards its best quadrant
/// until the lattice is reached, then slides across the best corner until it
/// oscillates, and stops early once a score exceeds tau. With a nonzero
/// max_evaluations, quadrants passed over are revisited best first while no
/// score has exceeded tau.
TranslationEstimate estimate_translation_bnb(const DifferenceField& ref, const SensedPlanes& sen,
                                             const BnBConfig& config = {});

// ------------------------------------------------------------ registration

/// Alternating refinement of the angle and the shift on the translation score
/// once both have a first estimate.
struct JointPolishConfig {
  int rounds = 4;  // zero disables
  double half_range_deg = 0.3;
  double step_deg = 0.02;
};

struct RegistrationConfig {
  ThresholdMode threshold = threshold::Universal{};
  int bins = 180;
  SlopeWeighting weighting = SlopeWeighting::magnitude;
  int rotation_levels_above_finest = 0;
  /// Histogram peaks refined before keeping the lowest residual.
  int rotation_candidates = 4;
  RefineConfig refine;
  /// Coefficients this close to the border are left out of the translation
  /// score; the periodic in-band shift wraps them around otherwise.
  int translation_margin = 2;
  /// Gaussian (in coefficients) applied to both sides of the translation
  /// score. Zero disables.
  double translation_smoothing = 0.0;
  /// Resample the reference through the same rotation round trip.
  bool round_trip_reference = true;
  /// Restrict the translation score to locations where the sensed planes are
  /// nonzero; meant for sparsified input.
  bool sensed_support = false;
  ScaleConfig scale;
  /// A snapped scale that disagrees with the image sides is replaced by the
  /// scale the sides imply when the raw estimate lies within this many octaves
  /// of it; otherwise the scale stage fails. Zero keeps the check strict.
  double scale_tolerance_octaves = 1.0;
  bool estimate_scale = true;
  bool estimate_rotation = true;
  BnBConfig bnb;
  JointPolishConfig joint;
  std::optional<int> k;  // unset: 1 when sigma < 1, sigma + 1 otherwise
  /// With the default k, a rotated pair is compared at the finest valid level.
  bool rotated_finest = true;
  /// Also search the shift unrotated and keep it when it scores at least as well.
  bool zero_angle_hypothesis = true;
};

struct RegistrationReport {
  SimilarityParams params;
  double ncc = 0.0;
  double raw_scale = 1.0;
  double initial_theta_deg = 0.0;  // histogram cross-correlation peak
  double first_theta_deg = 0.0;    // residual refinement, before the joint polish
  int k = 1;
  TranslationEstimate translation;
  double elapsed_ms = 0.0;
};

/// Full pipeline: transform, threshold, scale, rotation, translation. Stage
/// failures surface as EstimationError naming the stage.
RegistrationReport register_similarity(const ImageGrid& ref, const ImageGrid& sen, const RegistrationConfig& config = {});

/// Same, starting from pyramids already in hand (possibly sparsified).
RegistrationReport register_pyramids(const HaarPyramid& ref, const HaarPyramid& sen, const RegistrationConfig& config = {});

}  // namespace inband
