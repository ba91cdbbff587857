#include "sinodiff/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "sinodiff/error.hpp"

namespace sinodiff {

double FanBeamGeometry::angle(int view) const {
  if (!view_angles.empty()) return view_angles.at(view);
  return 2.0 * std::numbers::pi * view / n_views_full;
}

double FanBeamGeometry::fan_radius() const {
  const double half_width = 0.5 * n_detectors * detector_pitch;
  return source_to_isocenter * std::sin(std::atan(half_width / source_to_detector));
}

void FanBeamGeometry::validate() {
  if (!(source_to_isocenter > 0.0)) throw ValidationError("source_to_isocenter must be positive");
  if (!(source_to_detector > source_to_isocenter)) {
    throw ValidationError("source_to_detector must exceed source_to_isocenter");
  }
  if (n_detectors < 1) throw ValidationError("n_detectors must be at least 1");
  if (!(detector_pitch > 0.0)) throw ValidationError("detector_pitch must be positive");
  if (n_views_full < 1) throw ValidationError("n_views_full must be at least 1");
  if (image_size < 1) throw ValidationError("image_size must be at least 1");
  if (!(pixel_size > 0.0)) throw ValidationError("pixel_size must be positive");

  if (view_angles.empty()) {
    view_angles.resize(n_views_full);
    for (int v = 0; v < n_views_full; ++v) view_angles[v] = 2.0 * std::numbers::pi * v / n_views_full;
  }
  if (static_cast<int>(view_angles.size()) != n_views_full) {
    throw ValidationError("view_angles has " + std::to_string(view_angles.size()) +
                          " entries, expected " + std::to_string(n_views_full));
  }
  for (std::size_t v = 1; v < view_angles.size(); ++v) {
    if (!(view_angles[v] > view_angles[v - 1])) {
      throw ValidationError("view_angles must be strictly increasing");
    }
  }
  // The inscribed circle of the image grid must stay inside every fan.
  const double half_side = 0.5 * image_size * pixel_size;
  if (half_side > fan_radius()) {
    throw ValidationError("image field of view (half side " + std::to_string(half_side) +
                          " mm) exceeds the fan coverage radius " + std::to_string(fan_radius()) +
                          " mm");
  }
}

FanBeamGeometry desk_geometry() {
  FanBeamGeometry g;
  g.validate();
  return g;
}

FanBeamGeometry clinical_geometry() {
  FanBeamGeometry g;
  g.n_detectors = 736;
  g.detector_pitch = 1.2854;
  g.n_views_full = 736;
  g.image_size = 512;
  g.pixel_size = 0.6641;
  g.validate();
  return g;
}

void to_json(nlohmann::json& j, const FanBeamGeometry& g) {
  j = nlohmann::json{{"source_to_isocenter", g.source_to_isocenter},
                     {"source_to_detector", g.source_to_detector},
                     {"n_detectors", g.n_detectors},
                     {"detector_pitch", g.detector_pitch},
                     {"n_views_full", g.n_views_full},
                     {"image_size", g.image_size},
                     {"pixel_size", g.pixel_size}};
  // Uniform angles are implied; only non-default lists are written out.
  bool uniform = true;
  for (int v = 0; v < static_cast<int>(g.view_angles.size()); ++v) {
    if (g.view_angles[v] != 2.0 * std::numbers::pi * v / g.n_views_full) uniform = false;
  }
  if (!uniform) j["view_angles"] = g.view_angles;
}

void from_json(const nlohmann::json& j, FanBeamGeometry& g) {
  FanBeamGeometry d;
  g.source_to_isocenter = j.value("source_to_isocenter", d.source_to_isocenter);
  g.source_to_detector = j.value("source_to_detector", d.source_to_detector);
  g.n_detectors = j.value("n_detectors", d.n_detectors);
  g.detector_pitch = j.value("detector_pitch", d.detector_pitch);
  g.n_views_full = j.value("n_views_full", d.n_views_full);
  g.image_size = j.value("image_size", d.image_size);
  g.pixel_size = j.value("pixel_size", d.pixel_size);
  g.view_angles = j.value("view_angles", std::vector<double>{});
  g.validate();
}

}  // namespace sinodiff
