// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sinodiff/config.hpp"
#include "sinodiff/mask.hpp"
#include "sinodiff/metrics.hpp"
#include "sinodiff/patches.hpp"
#include "sinodiff/phantom.hpp"
#include "sinodiff/projector.hpp"
#include "sinodiff/reconstruct.hpp"
#include "sinodiff/samplers.hpp"
#include "sinodiff/score.hpp"
#include "sinodiff/train.hpp"

using namespace sinodiff;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double relative_rmse(const Eigen::ArrayXXd& a, const Eigen::ArrayXXd& ref) {
  return std::sqrt((a - ref).square().mean()) / std::sqrt(ref.square().mean());
}

Outcome schedule_identities() {
  Schedule<double> s;
  double worst_norm = 0, worst_quad = 0, worst_inv = 0;
  for (int i = 0; i < 1000; ++i) {
    const double t = s.t_min() + (1.0 - s.t_min()) * i / 999.0;
    const double a = s.alpha(t), b = s.sigma(t);
    worst_norm = std::max(worst_norm, std::abs(a * a + b * b - 1.0));
    worst_inv = std::max(worst_inv, std::abs(s.inverse_log_snr(s.log_snr(t)) - t));
  }
  // Composite Simpson on a fine grid; exact for the affine beta up to rounding.
  for (double t : {0.01, 0.1, 0.37, 0.5, 0.81, 1.0}) {
    const int n = 2000;
    const double h = t / n;
    double sum = s.beta(0.0) + s.beta(t);
    for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * s.beta(k * h);
    const double quad = sum * h / 3.0;
    worst_quad = std::max(worst_quad, std::abs(quad - s.beta_integral(t)) / s.beta_integral(t));
  }
  return {worst_norm <= 1e-12 && worst_quad <= 1e-9 && worst_inv <= 1e-8,
          fmt("max |a^2+b^2-1| %.2e, quadrature rel %.2e, lambda round trip %.2e", worst_norm,
              worst_quad, worst_inv)};
}

Outcome score_oracle() {
  Schedule<double> s;
  AnalyticGaussianScore oracle(s, 0.8, 1.3);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double t = s.t_min() + (1.0 - s.t_min()) * unit(rng);
    Eigen::VectorXd y(4);
    for (int i = 0; i < 4; ++i) y(i) = 2.0 * normal(rng);
    const Eigen::VectorXd sc = oracle.score(y, t);
    for (int i = 0; i < 4; ++i) {
      const double h = 1e-4;
      Eigen::VectorXd yp = y, ym = y;
      yp(i) += h;
      ym(i) -= h;
      const double fd = (oracle.log_density(yp, t) - oracle.log_density(ym, t)) / (2 * h);
      worst = std::max(worst, std::abs(fd - sc(i)) / std::max(1.0, std::abs(sc(i))));
    }
  }
  return {worst <= 1e-5, fmt("max relative gap %.2e over 100 draws", worst)};
}

struct GaussianFlow {
  Schedule<double> s;
  double mu = 2.0;
  double sd = 0.5;
  double var(double t) const { return std::pow(s.alpha(t) * sd, 2) + std::pow(s.sigma(t), 2); }
  double exact(double y1, double t) const {
    return s.alpha(t) * mu + std::sqrt(var(t) / var(1.0)) * (y1 - s.alpha(1.0) * mu);
  }
  double solve(int order, int steps, double y1) const {
    const auto grid = time_grid(steps, s, TimeSpacing::UniformLambda);
    Eigen::MatrixXd y = Eigen::MatrixXd::Constant(1, 1, y1);
    auto eps = [&](const Eigen::MatrixXd& v, double t) -> Eigen::MatrixXd {
      return s.sigma(t) * (v.array() - s.alpha(t) * mu) / var(t);
    };
    for (int i = 0; i < steps; ++i) y = dpm_solver_step(order, s, y, grid[i], grid[i + 1], eps);
    return y(0, 0);
  }
};

Outcome solver_orders() {
  GaussianFlow f;
  const std::vector<int> ns{5, 10, 20, 40, 80};
  const double target[] = {1.0, 2.0, 3.0};
  const double tol[] = {0.3, 0.3, 0.4};
  double slopes[3];
  bool ok = true;
  for (int order = 1; order <= 3; ++order) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int n : ns) {
      const double x = std::log(n);
      const double y = std::log(std::abs(f.solve(order, n, 1.0) - f.exact(1.0, f.s.t_min())));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double k = ns.size();
    slopes[order - 1] = -(k * sxy - sx * sy) / (k * sxx - sx * sx);
    ok = ok && std::abs(slopes[order - 1] - target[order - 1]) <= tol[order - 1];
  }
  return {ok, fmt("slopes %.3f / %.3f / %.3f", slopes[0], slopes[1], slopes[2])};
}

Outcome solver_consistency() {
  Schedule<double> s;
  std::mt19937_64 rng(3);
  Eigen::MatrixXd y(16, 8), c(16, 8);
  fill_standard_normal(y, rng);
  fill_standard_normal(c, rng);
  auto eps = [&](const Eigen::MatrixXd&, double) { return c; };
  double worst = 0;
  const auto grid = time_grid(10, s);
  for (int i = 0; i < 10; ++i) {
    auto y1 = dpm_solver_1_step(s, y, grid[i], grid[i + 1], eps);
    auto y2 = dpm_solver_2_step(s, y, grid[i], grid[i + 1], eps);
    auto y3 = dpm_solver_3_step(s, y, grid[i], grid[i + 1], eps);
    worst = std::max({worst, (y1 - y2).cwiseAbs().maxCoeff(), (y1 - y3).cwiseAbs().maxCoeff()});
  }
  return {worst <= 1e-12, fmt("max difference %.2e", worst)};
}

Outcome em_stationarity() {
  Schedule<double> s;
  AnalyticGaussianScore oracle(s, 0.0, 1.0);
  std::mt19937_64 rng(11);
  Eigen::MatrixXd y(1, 10000);
  fill_standard_normal(y, rng);
  const auto grid = time_grid(1000, s);
  auto score = [&](const Eigen::MatrixXd& v, double t) { return oracle.score(v, t); };
  for (int i = 0; i < 1000; ++i) y = euler_maruyama_step(s, y, grid[i], grid[i + 1] - grid[i], score, rng);
  const double mean = y.mean();
  const double var = (y.array() - mean).square().mean();
  return {std::abs(mean) <= 0.05 && var >= 0.9 && var <= 1.1,
          fmt("mean %.4f, variance %.4f", mean, var)};
}

Outcome projector_fbp() {
  const auto g = desk_geometry();
  auto sl = shepp_logan(128, g.pixel_size);
  const double rt = relative_rmse(fbp(project(sl, g), g).values, sl.values);

  const double r = 60.0, mu = 0.02;
  auto sino = project(disk(128, g.pixel_size, 0, 0, r, mu), g);
  double worst = 0;
  for (int v = 0; v < sino.views(); v += 15) {
    for (int k = 0; k < g.n_detectors; ++k) {
      const double u = g.detector_center(k);
      const double dist = g.source_to_isocenter * std::abs(u) / std::hypot(g.source_to_detector, u);
      if (dist > 0.75 * r) continue;
      const double chord = 2.0 * std::sqrt(r * r - dist * dist) * mu;
      worst = std::max(worst, std::abs(sino.values(v, k) - chord) / chord);
    }
  }
  return {rt < 0.05 && worst <= 0.02,
          fmt("round trip relative RMSE %.4f, worst chord error %.4f", rt, worst)};
}

Outcome patch_algebra() {
  struct Case {
    int rows, cols, side, stride;
  };
  const std::vector<Case> cases{{736, 736, 64, 32}, {360, 368, 16, 8}, {360, 368, 16, 16},
                                {37, 20, 16, 8},    {50, 50, 7, 7},    {19, 23, 5, 3},
                                {64, 64, 64, 64},   {100, 41, 9, 1}};
  std::mt19937_64 rng(5);
  double worst = 0;
  for (const auto& c : cases) {
    Eigen::ArrayXXd a(c.rows, c.cols);
    fill_standard_normal(a, rng);
    PatchGrid grid(c.rows, c.cols, c.side, c.stride);
    worst = std::max(worst, (assemble_patches(extract_patches(a, grid), grid) - a).abs().maxCoeff());
  }
  const auto clinical = PatchGrid(736, 736, 64, 32).count();
  return {worst <= 1e-12 && clinical == 484,
          fmt("max round trip error %.2e, 736/64/32 grid has %.0f patches", worst,
              static_cast<double>(clinical))};
}

Outcome nfe_scheduler() {
  Schedule<double> s;
  const std::vector<std::pair<int, std::vector<int>>> traces{
      {1, {1}}, {2, {2}}, {3, {2, 1}}, {4, {3, 1}}, {7, {3, 3, 1}}};
  bool ok = true;
  for (const auto& [j, expected] : traces) {
    auto steps = nfe_schedule(j, s);
    std::vector<int> got;
    for (const auto& st : steps) got.push_back(st.order);
    ok = ok && got == expected && nfe_cost(steps) == j;
  }
  std::vector<int> big_expected(333, 3);
  big_expected.push_back(1);
  auto big = nfe_schedule(1000, s);
  std::vector<int> big_got;
  for (const auto& st : big) big_got.push_back(st.order);
  ok = ok && big_got == big_expected && nfe_cost(big) == 1000;
  return {ok, "J in {1,2,3,4,7,1000} spend exactly J with the traced orders"};
}

Outcome conditioning() {
  Schedule<double> s;
  std::mt19937_64 rng(8);
  Eigen::MatrixXd y(64, 10), z(64, 10), m(64, 10);
  fill_standard_normal(y, rng);
  fill_standard_normal(z, rng);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = (i / 3) % 2;
  const Eigen::MatrixXd z_t = diffuse_condition(z, 0.3, s, rng);
  const Eigen::MatrixXd out = condition_patch(y, z_t, m, ConditioningParams{1.0, 0.1});
  bool exact = true;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m(i) == 1.0 && out(i) != z_t(i)) exact = false;
  }

  const auto g = desk_geometry();
  auto full = project(shepp_logan(128, g.pixel_size), g);
  AnalyticGaussianScore prior(s, 0.0, 1.0);
  SamplerSettings st;
  st.nfe = 10;
  st.conditioning = {1.0, 1.0};
  auto rec = reconstruct(full, ViewMask::all(360), g, prior, st);
  const double rel = relative_rmse(rec.image.values, fbp(full, g).values);
  return {exact && rel < 0.01,
          std::string("measured pixels ") + (exact ? "exact" : "NOT exact") +
              fmt("; full-mask reconstruction relative RMSE %.2e", rel)};
}

Outcome end_to_end(double& seconds) {
  const auto start = std::chrono::steady_clock::now();
  const auto g = desk_geometry();
  Schedule<double> s;
  auto model = train(phantom_training_set(g, 24, 1000), desk_train_config(), s).model;

  auto truth = shepp_logan(128, g.pixel_size);
  auto full = project(truth, g);
  auto mask = ViewMask::uniform(360, 45);
  auto measured = apply_mask(full, mask);
  const double range = data_range(truth.values);
  auto sparse = fbp_sparse(measured, mask, g);

  SamplerSettings st = desk_sampler_settings();
  st.workers = 1;
  auto rec = reconstruct(measured, mask, g, model, st);
  st.workers = 8;
  auto rec8 = reconstruct(measured, mask, g, model, st);
  auto again = reconstruct(measured, mask, g, model, st);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double p0 = psnr(sparse.values, truth.values, range);
  const double p1 = psnr(rec.image.values, truth.values, range);
  const double s0 = ssim(sparse.values, truth.values, range);
  const double s1 = ssim(rec.image.values, truth.values, range);
  const bool same = (rec.image.values == rec8.image.values).all() &&
                    (rec8.image.values == again.image.values).all();
  return {p1 - p0 >= 2.0 && s1 - s0 >= 0.05 && same && seconds < 900.0,
          fmt("PSNR %.2f -> %.2f dB, SSIM %.3f -> %.3f", p0, p1, s0, s1) +
              (same ? ", identical for 1 and 8 workers and on repeat" : ", NOT deterministic") +
              fmt(", %.0f s", seconds)};
}

Outcome noise_power() {
  const int n = 512;
  const double sd = 2.0, px = 0.5;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::ArrayXXd noise(n, n);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = normal(rng);
  Eigen::ArrayXXd truth = Eigen::ArrayXXd::Constant(n, n, 1.0);
  NpsConfig cfg{32, 32, px, true};
  auto spec = nps(truth + noise, truth, cfg);
  const double expected = px * px * sd * sd;
  const double rois = cfg.rois_per_axis(n) * cfg.rois_per_axis(n);
  const double bins = spec.size() - 1;
  const double mean = (spec.sum() - spec(0, 0)) / bins;
  const double se = expected / std::sqrt(rois * bins / 2.0);
  auto zero = nps(truth, truth, cfg);
  return {std::abs(mean - expected) <= 3.0 * se && zero.abs().maxCoeff() == 0.0,
          fmt("mean %.5f vs %.5f (3 SE = %.5f); zero-noise max %.1e", mean, expected, 3 * se,
              zero.abs().maxCoeff())};
}

Outcome training_loop() {
  Schedule<double> s;
  DenoiserArchitecture tiny{3, 5, 4};
  PatchDenoiser m(tiny, s);
  m.initialize(1);
  std::mt19937_64 rng(4);
  Eigen::MatrixXd y(9, 4), target(9, 4);
  fill_standard_normal(y, rng);
  fill_standard_normal(target, rng);
  Eigen::VectorXd t(4), w(4);
  t << 0.02, 0.25, 0.6, 1.0;
  w << 1.0, 3.0, 0.5, 2.0;
  auto grad = DenoiserParams::zeros(tiny);
  m.loss(y, t, target, w, &grad);
  const Eigen::VectorXd g = grad.flatten();
  const Eigen::VectorXd p0 = m.params().flatten();
  double worst = 0;
  for (Eigen::Index k = 0; k < p0.size(); ++k) {
    Eigen::VectorXd p = p0;
    p(k) += 1e-6;
    m.params().unflatten(p);
    const double up = m.loss(y, t, target, w);
    p(k) -= 2e-6;
    m.params().unflatten(p);
    const double down = m.loss(y, t, target, w);
    worst = std::max(worst, std::abs((up - down) / 2e-6 - g(k)) / std::max(1e-3, std::abs(g(k))));
  }

  std::vector<Sinogram> data;
  std::normal_distribution<double> normal;
  for (int i = 0; i < 4; ++i) {
    Sinogram sino{Eigen::ArrayXXd(48, 48)};
    for (Eigen::Index k = 0; k < sino.values.size(); ++k) sino.values(k) = normal(rng);
    data.push_back(sino);
  }
  TrainConfig cfg;
  cfg.architecture = DenoiserArchitecture{8, 64, 16};
  cfg.batch_size = 32;
  cfg.iterations = 2000;
  cfg.seed = 5;
  auto model = train(data, cfg, s).model;
  const auto norm = *model.normalization();
  const double mean = -norm.offset / norm.scale, sd = 1.0 / norm.scale;
  std::uniform_real_distribution<double> unit(s.t_min(), 1.0);
  const int n = 1000;
  Eigen::MatrixXd yy(64, n), exact(64, n);
  Eigen::VectorXd tt(n);
  for (int j = 0; j < n; ++j) {
    tt(j) = unit(rng);
    const double a = s.alpha(tt(j)), b = s.sigma(tt(j));
    const double var = a * a * sd * sd + b * b;
    for (int i = 0; i < 64; ++i) {
      yy(i, j) = a * (mean + sd * normal(rng)) + b * normal(rng);
      exact(i, j) = b * (yy(i, j) - a * mean) / var;
    }
  }
  const Eigen::MatrixXd pred = model.eps(yy, tt);
  double cosine = 0;
  for (int j = 0; j < n; ++j) {
    cosine += pred.col(j).dot(exact.col(j)) / (pred.col(j).norm() * exact.col(j).norm());
  }
  cosine /= n;
  return {worst <= 1e-4 && cosine > 0.9,
          fmt("gradient max relative gap %.2e, held-out cosine %.4f", worst, cosine)};
}

}  // namespace

int main() {
  double e2e_seconds = 0;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"schedule identities", schedule_identities},
      {"score oracle", score_oracle},
      {"solver convergence orders", solver_orders},
      {"solver consistency", solver_consistency},
      {"Euler-Maruyama stationarity", em_stationarity},
      {"projector and FBP", projector_fbp},
      {"patch algebra", patch_algebra},
      {"NFE scheduler", nfe_scheduler},
      {"conditioning", conditioning},
      {"end-to-end desk reconstruction", [&] { return end_to_end(e2e_seconds); }},
      {"noise power spectrum", noise_power},
      {"training loop", training_loop},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2zu %s: %s (%s) [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str(), sec);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
