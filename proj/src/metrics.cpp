#include "sinodiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sinodiff/error.hpp"

namespace sinodiff {

namespace {

void check_shapes(const Eigen::ArrayXXd& a, const Eigen::ArrayXXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("image shapes differ: " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}

// |DFT|^2 of a real square block.
Eigen::ArrayXXd power_2d(const Eigen::ArrayXXd& block, Eigen::FFT<double>& fft) {
  const Eigen::Index n = block.rows();
  Eigen::ArrayXXcd work(n, n);
  std::vector<double> col_in(n);
  std::vector<std::complex<double>> out;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) col_in[r] = block(r, c);
    fft.fwd(out, col_in);
    for (Eigen::Index r = 0; r < n; ++r) work(r, c) = out[r];
  }
  std::vector<std::complex<double>> row_in(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) row_in[c] = work(r, c);
    fft.fwd(out, row_in);
    for (Eigen::Index c = 0; c < n; ++c) work(r, c) = out[c];
  }
  return work.abs2();
}

Eigen::VectorXd gaussian_window(int size, double sigma) {
  Eigen::VectorXd w(size);
  const double c = 0.5 * (size - 1);
  for (int i = 0; i < size; ++i) w(i) = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
  return w / w.sum();
}

// Separable "valid" filtering.
Eigen::ArrayXXd filter_valid(const Eigen::ArrayXXd& a, const Eigen::VectorXd& w) {
  const Eigen::Index k = w.size();
  const Eigen::Index rows = a.rows() - k + 1;
  const Eigen::Index cols = a.cols() - k + 1;
  Eigen::ArrayXXd tmp = Eigen::ArrayXXd::Zero(rows, a.cols());
  for (Eigen::Index i = 0; i < k; ++i) tmp += w(i) * a.middleRows(i, rows);
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(rows, cols);
  for (Eigen::Index i = 0; i < k; ++i) out += w(i) * tmp.middleCols(i, cols);
  return out;
}

}  // namespace

void NpsConfig::validate(Eigen::Index rows, Eigen::Index cols) const {
  if (roi_side < 1 || roi_side > rows || roi_side > cols) {
    throw ValidationError("ROI side " + std::to_string(roi_side) + " does not fit the image");
  }
  if (roi_stride < 1) throw ValidationError("ROI stride must be positive");
  if (!(pixel_size > 0.0)) throw ValidationError("pixel size must be positive");
}

Eigen::ArrayXXd nps(const Eigen::ArrayXXd& recon, const Eigen::ArrayXXd& truth,
                    const NpsConfig& config) {
  check_shapes(recon, truth);
  config.validate(recon.rows(), recon.cols());
  const int n = config.roi_side;
  const Eigen::ArrayXXd diff = recon - truth;
  Eigen::FFT<double> fft;
  Eigen::ArrayXXd acc = Eigen::ArrayXXd::Zero(n, n);
  const int per_row = config.rois_per_axis(diff.rows());
  const int per_col = config.rois_per_axis(diff.cols());
  for (int i = 0; i < per_row; ++i) {
    for (int j = 0; j < per_col; ++j) {
      Eigen::ArrayXXd roi = diff.block(i * config.roi_stride, j * config.roi_stride, n, n);
      if (config.remove_mean) roi -= roi.mean();
      acc += power_2d(roi, fft);
    }
  }
  const double count = static_cast<double>(per_row) * per_col;
  const double scale = config.pixel_size * config.pixel_size / (static_cast<double>(n) * n);
  return acc * (scale / count);
}

Eigen::ArrayXXd fftshift(const Eigen::ArrayXXd& a) {
  Eigen::ArrayXXd out(a.rows(), a.cols());
  const Eigen::Index sr = a.rows() / 2;
  const Eigen::Index sc = a.cols() / 2;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      out((r + sr) % a.rows(), (c + sc) % a.cols()) = a(r, c);
  return out;
}

double data_range(const Eigen::ArrayXXd& truth) { return truth.maxCoeff() - truth.minCoeff(); }

double psnr(const Eigen::ArrayXXd& recon, const Eigen::ArrayXXd& truth, double range) {
  check_shapes(recon, truth);
  if (!(range > 0.0)) throw ValidationError("PSNR data range must be positive");
  const double mse = (recon - truth).square().mean();
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(range * range / mse);
}

double ssim(const Eigen::ArrayXXd& recon, const Eigen::ArrayXXd& truth, double range,
            const SsimConfig& config) {
  check_shapes(recon, truth);
  if (!(range > 0.0)) throw ValidationError("SSIM data range must be positive");
  if (config.window > recon.rows() || config.window > recon.cols()) {
    throw ValidationError("SSIM window larger than the image");
  }
  const Eigen::VectorXd w = gaussian_window(config.window, config.sigma);
  const double c1 = std::pow(config.k1 * range, 2);
  const double c2 = std::pow(config.k2 * range, 2);
  const Eigen::ArrayXXd mx = filter_valid(recon, w);
  const Eigen::ArrayXXd my = filter_valid(truth, w);
  const Eigen::ArrayXXd sxx = filter_valid(recon * recon, w) - mx * mx;
  const Eigen::ArrayXXd syy = filter_valid(truth * truth, w) - my * my;
  const Eigen::ArrayXXd sxy = filter_valid(recon * truth, w) - mx * my;
  const Eigen::ArrayXXd map = ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
                              ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean();
}

void write_pgm(const std::string& path, const Eigen::ArrayXXd& a, double lo, double hi) {
  if (!(hi > lo)) throw ValidationError("display window must have hi > lo");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << "P5\n" << a.cols() << " " << a.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double v = std::clamp((a(r, c) - lo) / (hi - lo), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
}

}  // namespace sinodiff
