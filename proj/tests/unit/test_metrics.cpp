#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "sinodiff/error.hpp"
#include "sinodiff/metrics.hpp"

using namespace sinodiff;

namespace {

Eigen::ArrayXXd white(int n, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::ArrayXXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = normal(rng);
  return a;
}

}  // namespace

TEST_CASE("white noise has a flat spectrum at dx dy sigma^2") {
  const int n = 512;
  const double sd = 3.0, px = 0.7;
  auto noise = white(n, sd, 1);
  Eigen::ArrayXXd truth = Eigen::ArrayXXd::Constant(n, n, 5.0);
  NpsConfig cfg{32, 32, px, true};
  auto s = nps(truth + noise, truth, cfg);
  const double expected = px * px * sd * sd;
  const double k = cfg.rois_per_axis(n) * cfg.rois_per_axis(n);
  const double bin_se = expected / std::sqrt(k);

  CHECK(s(0, 0) == doctest::Approx(0.0).scale(expected));
  double sum = 0.0;
  int inside = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (i == 0) continue;
    sum += s(i);
    if (std::abs(s(i) - expected) <= 3.0 * bin_se) ++inside;
  }
  const double bins = s.size() - 1;
  const double mean = sum / bins;
  // Conjugate symmetry leaves about half the bins independent.
  CHECK(std::abs(mean - expected) <= 3.0 * bin_se / std::sqrt(bins / 2));
  CHECK(inside / bins > 0.97);
  auto shifted = fftshift(s);
  const double low = shifted.block(8, 8, 16, 16).mean();
  const double high = (shifted.sum() - shifted.block(8, 8, 16, 16).sum()) / (1024 - 256);
  CHECK(std::abs(low - high) <= 6.0 * bin_se / std::sqrt(128.0));
}

TEST_CASE("noise-free input gives a zero spectrum") {
  Eigen::ArrayXXd a = white(64, 1.0, 2);
  auto s = nps(a, a, NpsConfig{});
  CHECK(s.abs().maxCoeff() == 0.0);
}

TEST_CASE("a sinusoid lands in its frequency bin") {
  const int n = 32;
  Eigen::ArrayXXd a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = std::cos(2 * std::numbers::pi * 4 * c / n);
  auto s = nps(a, Eigen::ArrayXXd::Zero(n, n), NpsConfig{32, 4, 1.0, true});
  CHECK(s(0, 4) == doctest::Approx(n * n / 4.0));
  CHECK(s(0, n - 4) == doctest::Approx(n * n / 4.0));
  CHECK(s.sum() == doctest::Approx(n * n / 2.0));
}

TEST_CASE("fftshift centres the zero frequency") {
  Eigen::ArrayXXd a = Eigen::ArrayXXd::Zero(4, 5);
  a(0, 0) = 1.0;
  auto s = fftshift(a);
  CHECK(s(2, 2) == 1.0);
}

TEST_CASE("nps validation") {
  Eigen::ArrayXXd a = Eigen::ArrayXXd::Zero(16, 16);
  CHECK_THROWS_AS(nps(a, a, NpsConfig{32, 4, 1.0, true}), ValidationError);
  CHECK_THROWS_AS(nps(a, Eigen::ArrayXXd::Zero(8, 8), NpsConfig{4, 4, 1.0, true}), ValidationError);
}

TEST_CASE("psnr") {
  Eigen::ArrayXXd a = white(32, 1.0, 3);
  CHECK(psnr(a, a, 1.0) == kPsnrIdentical);
  Eigen::ArrayXXd b = a + 0.1;
  CHECK(psnr(b, a, 1.0) == doctest::Approx(20.0));
  CHECK(psnr(a + 0.2, a, 1.0) < psnr(b, a, 1.0));
  CHECK_THROWS_AS(psnr(a, a, 0.0), ValidationError);
  CHECK(data_range(a) == doctest::Approx(a.maxCoeff() - a.minCoeff()));
}

TEST_CASE("ssim") {
  Eigen::ArrayXXd a = white(64, 1.0, 4);
  const double r = data_range(a);
  CHECK(ssim(a, a, r) == doctest::Approx(1.0));
  Eigen::ArrayXXd b = a + white(64, 0.3, 5);
  Eigen::ArrayXXd c = a + white(64, 0.9, 6);
  CHECK(ssim(b, a, r) == doctest::Approx(ssim(a, b, r)));
  CHECK(ssim(b, a, r) < 1.0);
  CHECK(ssim(c, a, r) < ssim(b, a, r));
  Eigen::ArrayXXd lifted = a + 5.0;
  CHECK(ssim(10.0 - lifted, lifted, r) < -0.9);
  CHECK_THROWS_AS(ssim(a, Eigen::ArrayXXd::Zero(8, 8), r), ValidationError);
  CHECK_THROWS_AS(ssim(Eigen::ArrayXXd::Zero(8, 8), Eigen::ArrayXXd::Zero(8, 8), 1.0), ValidationError);
}

TEST_CASE("pgm render") {
  const auto path = std::filesystem::temp_directory_path() / "sinodiff_render.pgm";
  Eigen::ArrayXXd a(2, 3);
  a << 0, 0.5, 1, 2, -1, 0.25;
  write_pgm(path.string(), a, 0.0, 1.0);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  in.get();
  std::vector<unsigned char> px(6);
  in.read(reinterpret_cast<char*>(px.data()), 6);
  CHECK(magic == "P5");
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK(px[0] == 0);
  CHECK(px[2] == 255);
  CHECK(px[3] == 255);
  CHECK(px[4] == 0);
  std::filesystem::remove(path);
}
