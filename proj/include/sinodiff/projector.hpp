#pragma once

#include "sinodiff/geometry.hpp"

namespace sinodiff {

/// Distance-driven fan-beam forward projection onto a flat detector.
///
/// For each view the image is swept along the axis most perpendicular to the
/// central ray. Pixel boundaries of each row (or column) and the detector
/// bin boundaries are mapped onto that line, and every pixel contributes to
/// a bin in proportion to their overlap, scaled by the ray path length
/// through the row. Returns a views x detectors sinogram of line integrals.
Sinogram project(const Image& image, const FanBeamGeometry& geometry);

/// Ramp-filtered, distance-weighted fan-beam back-projection (Ram-Lak
/// filter, FFT convolution with zero padding to the next power of two,
/// linear interpolation along the detector).
Image fbp(const Sinogram& sinogram, const FanBeamGeometry& geometry);

}  // namespace sinodiff
