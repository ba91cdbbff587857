#pragma once

#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace sinodiff {

/// Linear attenuation of water, per mm.
inline constexpr double kMuWater = 0.0192;

/// Flat-detector fan-beam geometry with a square reconstruction grid.
///
/// Lengths are in mm, angles in radians. The detector is a line array with
/// equispaced bins centred on the central ray; bin k sits at
/// u_k = (k - (n_detectors - 1) / 2) * detector_pitch.
struct FanBeamGeometry {
  double source_to_isocenter = 595.0;
  double source_to_detector = 1085.6;
  int n_detectors = 368;
  double detector_pitch = 2.5708;
  int n_views_full = 360;
  std::vector<double> view_angles;  // empty means uniform over [0, 2*pi)
  int image_size = 128;
  double pixel_size = 2.6564;

  /// Throws ValidationError when an invariant is broken. Fills view_angles
  /// with the uniform default when empty.
  void validate();

  double magnification() const { return source_to_detector / source_to_isocenter; }
  /// Detector bin spacing rescaled to the isocenter plane.
  double iso_pitch() const { return detector_pitch / magnification(); }
  double detector_center(int k) const { return (k - 0.5 * (n_detectors - 1)) * detector_pitch; }
  double angle(int view) const;
  /// Radius of the circle at the isocenter covered by every view's fan.
  double fan_radius() const;
};

/// Desk-scale default: a proportional shrink of a 512^2 / 736-detector /
/// 736-view clinical geometry to 128^2 / 368 / 360.
FanBeamGeometry desk_geometry();
/// Full-scale clinical geometry.
FanBeamGeometry clinical_geometry();

void to_json(nlohmann::json& j, const FanBeamGeometry& g);
void from_json(const nlohmann::json& j, FanBeamGeometry& g);

struct Image {
  Eigen::ArrayXXd values;  // (row = y index, col = x index), per mm
  double pixel_size = 1.0;
};

/// Views x detectors line integrals.
struct Sinogram {
  Eigen::ArrayXXd values;

  Eigen::Index views() const { return values.rows(); }
  Eigen::Index detectors() const { return values.cols(); }
};

inline Eigen::ArrayXXd to_hu(const Eigen::ArrayXXd& mu) {
  return (mu - kMuWater) / kMuWater * 1000.0;
}

}  // namespace sinodiff
