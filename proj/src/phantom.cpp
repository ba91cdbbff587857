#include "sinodiff/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "sinodiff/error.hpp"

namespace sinodiff {

namespace {

constexpr int kMinSize = 16;

void check_grid(int size, double pixel_size) {
  if (size < kMinSize) {
    throw ValidationError("phantom size " + std::to_string(size) + " is below the minimum of 16");
  }
  if (!(pixel_size > 0.0)) throw ValidationError("pixel_size must be positive");
}

}  // namespace

Image rasterize(const std::vector<Ellipse>& ellipses, int size, double pixel_size,
                int oversample) {
  Image img{Eigen::ArrayXXd::Zero(size, size), pixel_size};
  const double half = 0.5 * (size - 1);
  const double inv_n = 1.0 / (oversample * oversample);

  for (const auto& e : ellipses) {
    const double c = std::cos(e.rotation);
    const double s = std::sin(e.rotation);
    const double reach = std::max(e.semi_x, e.semi_y);
    // Bounding box in pixel indices.
    const int x0 = std::max(0, static_cast<int>(std::floor((e.center_x - reach) / pixel_size + half)) - 1);
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil((e.center_x + reach) / pixel_size + half)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor((e.center_y - reach) / pixel_size + half)) - 1);
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil((e.center_y + reach) / pixel_size + half)) + 1);
    if (e.semi_x <= 0.0 || e.semi_y <= 0.0) continue;

    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        int inside = 0;
        for (int sy = 0; sy < oversample; ++sy) {
          const double y = (iy - half + (sy + 0.5) / oversample - 0.5) * pixel_size - e.center_y;
          for (int sx = 0; sx < oversample; ++sx) {
            const double x = (ix - half + (sx + 0.5) / oversample - 0.5) * pixel_size - e.center_x;
            const double u = (c * x + s * y) / e.semi_x;
            const double v = (-s * x + c * y) / e.semi_y;
            if (u * u + v * v <= 1.0) ++inside;
          }
        }
        img.values(iy, ix) += e.value * inside * inv_n;
      }
    }
  }
  return img;
}

Image shepp_logan(int size, double pixel_size, double value_scale) {
  check_grid(size, pixel_size);
  // value, a, b, x0, y0, phi (degrees) in the unit square [-1, 1]^2.
  static constexpr double kTable[10][6] = {
      {2.00, 0.6900, 0.9200, 0.00, 0.0000, 0},
      {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0},
      {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18},
      {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18},
      {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0},
      {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0},
      {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0},
      {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0},
      {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0},
      {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0},
  };
  const double r = 0.5 * size * pixel_size;
  std::vector<Ellipse> ellipses;
  for (const auto& row : kTable) {
    ellipses.push_back({row[0] * value_scale, row[1] * r, row[2] * r, row[3] * r, row[4] * r,
                        row[5] * std::numbers::pi / 180.0});
  }
  return rasterize(ellipses, size, pixel_size);
}

Image disk(int size, double pixel_size, double center_x, double center_y, double radius,
           double value) {
  check_grid(size, pixel_size);
  if (radius < 0.0) throw ValidationError("disk radius must be non-negative");
  const double half_side = 0.5 * size * pixel_size;
  if (std::hypot(center_x, center_y) + radius > half_side) {
    throw ValidationError("disk of radius " + std::to_string(radius) +
                          " mm exceeds the field of view");
  }
  if (radius == 0.0) return Image{Eigen::ArrayXXd::Zero(size, size), pixel_size};
  return rasterize({{value, radius, radius, center_x, center_y, 0.0}}, size, pixel_size);
}

Image random_ellipses(int size, double pixel_size, std::uint64_t seed, double value_scale) {
  check_grid(size, pixel_size);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double r = 0.5 * size * pixel_size;
  std::vector<Ellipse> ellipses;
  const double body_x = uniform(0.55, 0.75) * r;
  const double body_y = uniform(0.7, 0.92) * r;
  const double body_rot = uniform(-0.3, 0.3);
  const double shell = uniform(1.5, 2.2);
  const double interior = uniform(0.9, 1.1);
  ellipses.push_back({shell, body_x, body_y, 0.0, 0.0, body_rot});
  ellipses.push_back({interior - shell, body_x * 0.95, body_y * 0.95, 0.0, 0.0, body_rot});

  const int features = 3 + static_cast<int>(unit(rng) * 8);
  for (int i = 0; i < features; ++i) {
    const double a = uniform(0.03, 0.3) * r;
    const double b = uniform(0.03, 0.3) * r;
    // Keep the feature centre inside the body interior.
    const double rho = std::sqrt(unit(rng)) * 0.7;
    const double phi = uniform(0.0, 2.0 * std::numbers::pi);
    const double lx = rho * body_x * std::cos(phi);
    const double ly = rho * body_y * std::sin(phi);
    const double cx = std::cos(body_rot) * lx - std::sin(body_rot) * ly;
    const double cy = std::sin(body_rot) * lx + std::cos(body_rot) * ly;
    const double value = uniform(-0.3, 0.3);
    ellipses.push_back({value, a, b, cx, cy, uniform(0.0, std::numbers::pi)});
  }
  for (auto& e : ellipses) e.value *= value_scale;
  Image img = rasterize(ellipses, size, pixel_size);
  img.values = img.values.max(0.0);
  return img;
}

}  // namespace sinodiff
