#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sinodiff/error.hpp"
#include "sinodiff/projector.hpp"

namespace sinodiff {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Band-limited ramp impulse response sampled at spacing `ds`, halved as the
// fan-beam formula requires, laid out circularly for a length-`len` FFT.
std::vector<double> ramp_kernel(int n_det, double ds, std::size_t len) {
  std::vector<double> h(len, 0.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  h[0] = 0.5 / (4.0 * ds * ds);
  for (int n = 1; n < n_det; ++n) {
    if (n % 2 == 0) continue;
    const double value = -0.5 / (n * n * pi2 * ds * ds);
    h[n] = value;
    h[len - n] = value;
  }
  return h;
}

}  // namespace

Image fbp(const Sinogram& sinogram, const FanBeamGeometry& geometry) {
  const int n_det = geometry.n_detectors;
  const int n_views = geometry.n_views_full;
  if (sinogram.views() != n_views || sinogram.detectors() != n_det) {
    throw ValidationError("fbp expects a full " + std::to_string(n_views) + "x" +
                          std::to_string(n_det) + " sinogram, got " +
                          std::to_string(sinogram.views()) + "x" +
                          std::to_string(sinogram.detectors()));
  }
  if (!sinogram.values.allFinite()) throw NumericError("fbp input contains non-finite values");

  const double sod = geometry.source_to_isocenter;
  const double ds = geometry.iso_pitch();
  const std::size_t len = next_pow2(2 * static_cast<std::size_t>(n_det) - 1);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> kernel_hat;
  fft.fwd(kernel_hat, ramp_kernel(n_det, ds, len));

  // Cosine pre-weighting, then ramp filtering of every view.
  Eigen::ArrayXXd filtered(n_views, n_det);
  std::vector<double> row(len);
  std::vector<std::complex<double>> row_hat;
  std::vector<double> conv;
  for (int v = 0; v < n_views; ++v) {
    std::fill(row.begin(), row.end(), 0.0);
    for (int k = 0; k < n_det; ++k) {
      const double s = geometry.detector_center(k) / geometry.magnification();
      row[k] = sinogram.values(v, k) * sod / std::sqrt(sod * sod + s * s);
    }
    fft.fwd(row_hat, row);
    for (std::size_t i = 0; i < len; ++i) row_hat[i] *= kernel_hat[i];
    fft.inv(conv, row_hat);
    for (int k = 0; k < n_det; ++k) filtered(v, k) = ds * conv[k];
  }

  const int n = geometry.image_size;
  const double d = geometry.pixel_size;
  const double half = 0.5 * (n - 1);
  const double center_bin = 0.5 * (n_det - 1);
  Image img{Eigen::ArrayXXd::Zero(n, n), d};

  for (int v = 0; v < n_views; ++v) {
    const double theta = geometry.angle(v);
    // Angular weight: spacing to neighbouring views (uniform scans give 2*pi/n).
    const double prev = v > 0 ? geometry.angle(v - 1) : geometry.angle(n_views - 1) - 2.0 * std::numbers::pi;
    const double next = v + 1 < n_views ? geometry.angle(v + 1) : geometry.angle(0) + 2.0 * std::numbers::pi;
    const double dbeta = 0.5 * (next - prev);
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    for (int ix = 0; ix < n; ++ix) {
      const double x = (ix - half) * d;
      for (int iy = 0; iy < n; ++iy) {
        const double y = (iy - half) * d;
        const double along = x * cs + y * sn;
        const double across = -x * sn + y * cs;
        const double l = sod - along;
        const double u = l / sod;
        const double bin = sod * across / l / ds + center_bin;
        const int k0 = static_cast<int>(std::floor(bin));
        if (k0 < 0 || k0 + 1 >= n_det) {
          if (k0 == n_det - 1 && bin == k0) img.values(iy, ix) += dbeta * filtered(v, k0) / (u * u);
          continue;
        }
        const double w = bin - k0;
        const double q = (1.0 - w) * filtered(v, k0) + w * filtered(v, k0 + 1);
        img.values(iy, ix) += dbeta * q / (u * u);
      }
    }
  }
  return img;
}

}  // namespace sinodiff
