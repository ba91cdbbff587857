#include "sinodiff/projector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sinodiff/error.hpp"

namespace sinodiff {

namespace {

struct Vec2 {
  double x;
  double y;
};

// Accumulates sum_i overlap(pixel_i, bin_k) * value_i into acc[k]. Both
// boundary lists must be increasing.
void accumulate_overlaps(const std::vector<double>& pix, const double* values,
                         Eigen::Index value_stride, const std::vector<double>& det,
                         std::vector<double>& acc) {
  const std::size_t n_pix = pix.size() - 1;
  const std::size_t n_det = det.size() - 1;
  std::size_t i = 0;
  std::size_t k = 0;
  while (i < n_pix && pix[i + 1] <= det[0]) ++i;
  while (k < n_det && det[k + 1] <= pix[0]) ++k;
  if (i == n_pix || k == n_det) return;
  double pos = std::max(pix[i], det[k]);
  while (i < n_pix && k < n_det) {
    const double v = values[i * value_stride];
    if (pix[i + 1] < det[k + 1]) {
      acc[k] += (pix[i + 1] - pos) * v;
      pos = pix[i + 1];
      ++i;
    } else {
      acc[k] += (det[k + 1] - pos) * v;
      pos = det[k + 1];
      ++k;
    }
  }
}

}  // namespace

Sinogram project(const Image& image, const FanBeamGeometry& geometry) {
  const int n = geometry.image_size;
  if (image.values.rows() != n || image.values.cols() != n) {
    throw ValidationError("image is " + std::to_string(image.values.rows()) + "x" +
                          std::to_string(image.values.cols()) + ", geometry expects " +
                          std::to_string(n) + "x" + std::to_string(n));
  }
  if (std::abs(image.pixel_size - geometry.pixel_size) > 1e-9 * geometry.pixel_size) {
    throw ValidationError("image pixel size does not match geometry");
  }

  const int n_det = geometry.n_detectors;
  const int n_views = geometry.n_views_full;
  const double d = geometry.pixel_size;
  const double half = 0.5 * (n - 1);
  const double sod = geometry.source_to_isocenter;
  const double idd = geometry.source_to_detector - sod;

  Sinogram sino{Eigen::ArrayXXd::Zero(n_views, n_det)};

  std::vector<double> pix(n + 1);
  for (int j = 0; j <= n; ++j) pix[j] = (j - half - 0.5) * d;

  std::vector<Vec2> det_points(n_det + 1);
  std::vector<double> mapped(n_det + 1);
  std::vector<double> acc(n_det);
  std::vector<double> path(n_det);

  for (int v = 0; v < n_views; ++v) {
    const double theta = geometry.angle(v);
    const Vec2 es{std::cos(theta), std::sin(theta)};
    const Vec2 eu{-es.y, es.x};
    const Vec2 src{sod * es.x, sod * es.y};
    for (int b = 0; b <= n_det; ++b) {
      const double u = (b - 0.5 * n_det) * geometry.detector_pitch;
      det_points[b] = {-idd * es.x + u * eu.x, -idd * es.y + u * eu.y};
    }

    // Sweep columns (fixed x) when rays run mostly along x, rows otherwise.
    const bool along_x = std::abs(es.x) >= std::abs(es.y);
    for (int k = 0; k < n_det; ++k) {
      const double u = geometry.detector_center(k);
      const Vec2 p{-idd * es.x + u * eu.x, -idd * es.y + u * eu.y};
      const double dx = p.x - src.x;
      const double dy = p.y - src.y;
      const double len = std::hypot(dx, dy);
      path[k] = d * len / std::abs(along_x ? dx : dy);
    }

    std::fill(acc.begin(), acc.end(), 0.0);
    std::vector<double> acc_sorted(n_det);
    for (int line = 0; line < n; ++line) {
      const double c = (line - half) * d;
      for (int b = 0; b <= n_det; ++b) {
        const Vec2& p = det_points[b];
        if (along_x) {
          const double tau = (c - src.x) / (p.x - src.x);
          mapped[b] = src.y + tau * (p.y - src.y);
        } else {
          const double tau = (c - src.y) / (p.y - src.y);
          mapped[b] = src.x + tau * (p.x - src.x);
        }
      }
      const bool reversed = mapped[n_det] < mapped[0];
      if (reversed) std::reverse(mapped.begin(), mapped.end());

      std::fill(acc_sorted.begin(), acc_sorted.end(), 0.0);
      // Column `line` runs down the rows (stride 1 in column-major storage);
      // row `line` runs across columns (stride n).
      const double* values = along_x ? &image.values(0, line) : &image.values(line, 0);
      const Eigen::Index stride = along_x ? 1 : image.values.outerStride();
      accumulate_overlaps(pix, values, stride, mapped, acc_sorted);
      for (int k = 0; k < n_det; ++k) {
        const int kk = reversed ? n_det - 1 - k : k;
        const double width = mapped[k + 1] - mapped[k];
        if (width > 0.0) acc[kk] += acc_sorted[k] / width;
      }
    }
    for (int k = 0; k < n_det; ++k) sino.values(v, k) = acc[k] * path[k];
  }
  return sino;
}

}  // namespace sinodiff
