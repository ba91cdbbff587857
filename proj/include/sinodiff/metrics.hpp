#pragma once

#include <limits>
#include <string>

#include <Eigen/Core>

namespace sinodiff {

/// Square ROIs of side `roi_side` placed on a regular grid with spacing
/// `roi_stride`, starting at the top-left corner.
struct NpsConfig {
  int roi_side = 32;
  int roi_stride = 4;
  double pixel_size = 1.0;  // mm
  /// Subtract each ROI's mean before the DFT.
  bool remove_mean = true;

  void validate(Eigen::Index rows, Eigen::Index cols) const;
  int rois_per_axis(Eigen::Index extent) const { return static_cast<int>((extent - roi_side) / roi_stride) + 1; }
};

/// Noise power spectrum of (recon - truth):
///   NPS(f) = (dx dy / (Nx Ny)) < |DFT(roi)|^2 >
/// ensemble-averaged over the ROI grid. Units are input units squared times
/// mm^2. Bins are in DFT order (zero frequency at index 0).
Eigen::ArrayXXd nps(const Eigen::ArrayXXd& recon, const Eigen::ArrayXXd& truth,
                    const NpsConfig& config);

/// Moves the zero-frequency bin to the centre.
Eigen::ArrayXXd fftshift(const Eigen::ArrayXXd& a);

inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10 log10(range^2 / MSE); +infinity for identical inputs.
double psnr(const Eigen::ArrayXXd& recon, const Eigen::ArrayXXd& truth, double data_range);

/// max(truth) - min(truth).
double data_range(const Eigen::ArrayXXd& truth);

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over all valid (fully inside) Gaussian windows.
double ssim(const Eigen::ArrayXXd& recon, const Eigen::ArrayXXd& truth, double data_range,
            const SsimConfig& config = {});

/// 8-bit grayscale PGM render with the given display window.
void write_pgm(const std::string& path, const Eigen::ArrayXXd& a, double lo, double hi);

}  // namespace sinodiff
