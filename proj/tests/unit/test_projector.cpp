#include <doctest.h>

#include <cmath>

#include "sinodiff/error.hpp"
#include "sinodiff/mask.hpp"
#include "sinodiff/phantom.hpp"
#include "sinodiff/projector.hpp"

using namespace sinodiff;

namespace {

double relative_rmse(const Eigen::ArrayXXd& a, const Eigen::ArrayXXd& ref) {
  return std::sqrt((a - ref).square().mean()) / std::sqrt(ref.square().mean());
}

FanBeamGeometry coarse_geometry(int views) {
  auto g = desk_geometry();
  g.n_views_full = views;
  g.view_angles.clear();
  g.validate();
  return g;
}

}  // namespace

TEST_CASE("projection is linear") {
  const auto g = coarse_geometry(36);
  auto a = random_ellipses(128, g.pixel_size, 1);
  auto b = random_ellipses(128, g.pixel_size, 2);
  Image c{2.0 * a.values - 0.5 * b.values, g.pixel_size};
  auto pa = project(a, g).values;
  auto pb = project(b, g).values;
  auto pc = project(c, g).values;
  CHECK((pc - (2.0 * pa - 0.5 * pb)).abs().maxCoeff() < 1e-9 * pa.abs().maxCoeff());
}

TEST_CASE("disk chords match the analytic length") {
  const auto g = coarse_geometry(8);
  const double r = 60.0;
  const double mu = 0.02;
  auto sino = project(disk(128, g.pixel_size, 0, 0, r, mu), g);
  const double D = g.source_to_isocenter;
  const double Dsd = g.source_to_detector;
  int checked = 0;
  for (int v = 0; v < sino.views(); ++v) {
    for (int k = 0; k < g.n_detectors; ++k) {
      const double u = g.detector_center(k);
      const double dist = D * std::abs(u) / std::hypot(Dsd, u);
      if (dist > 0.75 * r) continue;
      const double chord = 2.0 * std::sqrt(r * r - dist * dist) * mu;
      CHECK(sino.values(v, k) == doctest::Approx(chord).epsilon(0.02));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("off-centre disk traces the projected centre") {
  const auto g = coarse_geometry(12);
  const double cx = 40.0, cy = -25.0;
  auto sino = project(disk(128, g.pixel_size, cx, cy, 20.0, 1.0), g);
  for (int v = 0; v < sino.views(); ++v) {
    const double th = g.angle(v);
    const double es = cx * std::cos(th) + cy * std::sin(th);
    const double eu = -cx * std::sin(th) + cy * std::cos(th);
    const double u_expected = g.source_to_detector * eu / (g.source_to_isocenter - es);
    double m0 = 0.0, m1 = 0.0;
    for (int k = 0; k < g.n_detectors; ++k) {
      m0 += sino.values(v, k);
      m1 += sino.values(v, k) * g.detector_center(k);
    }
    CHECK(m1 / m0 == doctest::Approx(u_expected).epsilon(0.01).scale(g.detector_pitch));
  }
}

TEST_CASE("fbp of the projection returns the phantom") {
  const auto g = desk_geometry();
  auto sl = shepp_logan(128, g.pixel_size);
  auto rec = fbp(project(sl, g), g);
  CHECK(relative_rmse(rec.values, sl.values) < 0.05);
}

TEST_CASE("fbp of a uniform disk is flat inside") {
  const auto g = desk_geometry();
  auto rec = fbp(project(disk(128, g.pixel_size, 0, 0, 80.0, 0.02), g), g);
  CHECK(rec.values(64, 64) == doctest::Approx(0.02).epsilon(0.02));
  CHECK(rec.values(64, 40) == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("fbp rejects partial or non-finite input") {
  const auto g = desk_geometry();
  Sinogram partial{Eigen::ArrayXXd::Zero(45, 368)};
  CHECK_THROWS_AS(fbp(partial, g), ValidationError);
  Sinogram bad{Eigen::ArrayXXd::Zero(360, 368)};
  bad.values(3, 4) = std::nan("");
  CHECK_THROWS(fbp(bad, g));
}

TEST_CASE("uniform mask keeps every eighth view") {
  auto m = ViewMask::uniform(360, 45);
  CHECK(m.count() == 45);
  auto idx = m.indices();
  CHECK(idx.front() == 0);
  CHECK(idx[1] == 8);
  CHECK(idx.back() == 352);
  auto mat = m.matrix(368);
  CHECK(mat.rows() == 360);
  CHECK(mat.row(8).minCoeff() == 1.0);
  CHECK(mat.row(9).maxCoeff() == 0.0);
}

TEST_CASE("mask round trip") {
  const auto g = desk_geometry();
  auto full = project(shepp_logan(128, g.pixel_size), g);
  auto m = ViewMask::uniform(360, 45);
  auto down = apply_mask(full, m);
  CHECK(down.views() == 45);
  CHECK(down.detectors() == 368);
  auto back = embed_mask(down, m);
  CHECK(((back.values - full.values) * m.matrix(368)).abs().maxCoeff() == 0.0);
  CHECK((back.values * (1.0 - m.matrix(368))).abs().maxCoeff() == 0.0);
}

TEST_CASE("from_indices validates") {
  CHECK_THROWS_AS(ViewMask::from_indices(10, {3, 3}), ValidationError);
  CHECK_THROWS_AS(ViewMask::from_indices(10, {11}), ValidationError);
  CHECK(ViewMask::from_indices(10, {1, 4}).count() == 2);
}

TEST_CASE("pseudo-full sinogram keeps measured rows and beats zero filling") {
  const auto g = desk_geometry();
  auto full = project(shepp_logan(128, g.pixel_size), g);
  auto m = ViewMask::uniform(360, 45);
  auto down = apply_mask(full, m);
  auto pf = pseudo_full_sinogram(down, m, g);
  for (int i : m.indices()) CHECK((pf.values.row(i) == full.values.row(i)).all());
  CHECK(relative_rmse(pf.values, full.values) < relative_rmse(embed_mask(down, m).values, full.values));
  auto sparse = fbp_sparse(down, m, g);
  CHECK(sparse.values.rows() == 128);
}
