#pragma once

#include <cstdint>
#include <vector>

#include "sinodiff/geometry.hpp"

namespace sinodiff {

/// Ellipse in physical coordinates (mm), rotation in radians.
struct Ellipse {
  double value;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double rotation;
};

/// Rasterize a sum of ellipses with `oversample`^2 sub-samples per pixel.
/// The grid is centred on the isocenter; row index grows with y.
Image rasterize(const std::vector<Ellipse>& ellipses, int size, double pixel_size,
                int oversample = 4);

/// Classic 10-ellipse Shepp-Logan head phantom (peak value 2.0 on the
/// skull) scaled to the inscribed circle of the grid.
Image shepp_logan(int size, double pixel_size, double value_scale = 1.0);

/// Uniform disk; center and radius in mm.
Image disk(int size, double pixel_size, double center_x, double center_y, double radius,
           double value);

/// Random ellipse phantom: an outer body ellipse plus a handful of inner
/// features, reproducible from `seed`. Used as training material.
Image random_ellipses(int size, double pixel_size, std::uint64_t seed, double value_scale = 1.0);

}  // namespace sinodiff
