#include "inband/kernels/kernels.hpp"

namespace inband::kernels {
namespace {

Dot3 dot3_scalar(std::span<const double> x, std::span<const double> y) {
  Dot3 r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.xy += x[i] * y[i];
    r.xx += x[i] * x[i];
    r.yy += y[i] * y[i];
  }
  return r;
}

double sum_scalar(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double sq_diff_scalar(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void haar_analyze_row_scalar(const double* top, const double* bottom, std::size_t n, double* approx, double* horiz,
                             double* vert, double* diag) {
  for (std::size_t j = 0; j < n; ++j) {
    const double p00 = top[2 * j], p01 = top[2 * j + 1];
    const double p10 = bottom[2 * j], p11 = bottom[2 * j + 1];
    approx[j] = ((p00 + p01) + (p10 + p11)) * 0.25;
    horiz[j] = ((p00 - p01) + (p10 - p11)) * 0.25;
    vert[j] = ((p00 + p01) - (p10 + p11)) * 0.25;
    diag[j] = ((p00 - p01) - (p10 - p11)) * 0.25;
  }
}

void haar_synthesize_row_scalar(const double* approx, const double* horiz, const double* vert, const double* diag,
                                std::size_t n, double* top, double* bottom) {
  for (std::size_t j = 0; j < n; ++j) {
    const double s = approx[j] + horiz[j];
    const double d = approx[j] - horiz[j];
    const double u = vert[j] + diag[j];
    const double v = vert[j] - diag[j];
    top[2 * j] = s + u;
    top[2 * j + 1] = d + v;
    bottom[2 * j] = s - u;
    bottom[2 * j + 1] = d - v;
  }
}

constexpr KernelTable kScalar{"scalar",       dot3_scalar, sum_scalar, sq_diff_scalar, haar_analyze_row_scalar,
                              haar_synthesize_row_scalar};

}  // namespace

const KernelTable& scalar() { return kScalar; }

}  // namespace inband::kernels
