#include "sinodiff/reconstruct.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "sinodiff/error.hpp"
#include "sinodiff/patches.hpp"
#include "sinodiff/projector.hpp"

namespace sinodiff {

namespace {

constexpr Eigen::Index kChunk = 64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Runs the sampler on columns [first, first + count) of the patch set.
Eigen::MatrixXd sample_chunk(const PatchSet& set, Eigen::Index first, Eigen::Index count,
                             const ScoreEvaluator& evaluator, const SamplerSettings& settings,
                             const std::vector<SolverStep>& ode_steps,
                             const std::vector<double>& sde_grid) {
  const auto& schedule = evaluator.schedule();
  const Eigen::Index p = set.conditions.rows();
  const Eigen::MatrixXd z = set.conditions.middleCols(first, count);
  const Eigen::MatrixXd m = set.masks.middleCols(first, count);

  std::vector<std::mt19937_64> streams;
  streams.reserve(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    streams.emplace_back(patch_seed(settings.seed, static_cast<std::uint64_t>(first + j)));
  }
  auto draw = [&](Eigen::MatrixXd& out) {
    for (Eigen::Index j = 0; j < count; ++j) {
      std::normal_distribution<double> normal;
      for (Eigen::Index i = 0; i < p; ++i) out(i, j) = normal(streams[j]);
    }
  };
  auto condition_at = [&](const Eigen::MatrixXd& y, double t) {
    Eigen::MatrixXd xi(p, count);
    draw(xi);
    const Eigen::MatrixXd z_t = schedule.perturb(z, xi, t).matrix();
    return condition_patch(y, z_t, m, settings.conditioning);
  };
  auto eps = [&](const Eigen::MatrixXd& y, double t) -> Eigen::MatrixXd { return evaluator.eps(y, t); };
  auto score = [&](const Eigen::MatrixXd& y, double t) -> Eigen::MatrixXd { return evaluator.score(y, t); };

  Eigen::MatrixXd y(p, count);
  draw(y);
  if (settings.family == SolverFamily::Ode) {
    for (const auto& step : ode_steps) {
      const Eigen::MatrixXd y_hat = condition_at(y, step.t_prev);
      y = dpm_solver_step(step.order, schedule, y_hat, step.t_prev, step.t_next, eps);
    }
  } else {
    for (std::size_t j = 0; j + 1 < sde_grid.size(); ++j) {
      const double t = sde_grid[j];
      const Eigen::MatrixXd y_hat = condition_at(y, t);
      Eigen::MatrixXd noise(p, count);
      draw(noise);
      y = euler_maruyama_step(schedule, y_hat, t, sde_grid[j + 1] - t, score, noise);
    }
  }
  // The diffused condition at t = 0 is the condition itself; no score is
  // needed there, so the t_min clamp does not apply.
  if (settings.final_conditioning) y = condition_patch(y, z, m, settings.conditioning);

  for (Eigen::Index j = 0; j < count; ++j) {
    if (!y.col(j).allFinite()) {
      throw NumericError("sampling produced non-finite values in patch " + std::to_string(first + j));
    }
  }
  return y;
}

}  // namespace

void SamplerSettings::validate() const {
  if (nfe < 1) throw ValidationError("nfe must be at least 1");
  if (workers < 1) throw ValidationError("workers must be at least 1");
  conditioning.validate();
}

std::uint64_t patch_seed(std::uint64_t seed, std::uint64_t patch_index) {
  return splitmix64(splitmix64(seed) ^ patch_index);
}

Reconstruction reconstruct(const Sinogram& measured, const ViewMask& mask,
                           const FanBeamGeometry& geometry, const ScoreEvaluator& evaluator,
                           const SamplerSettings& settings) {
  settings.validate();
  if (mask.size() != geometry.n_views_full) {
    throw ValidationError("mask covers " + std::to_string(mask.size()) + " views, geometry has " +
                          std::to_string(geometry.n_views_full));
  }
  if (evaluator.patch_side() != 0 && evaluator.patch_side() != settings.patch_side) {
    throw ValidationError("model expects patch side " + std::to_string(evaluator.patch_side()) +
                          ", settings ask for " + std::to_string(settings.patch_side));
  }
  if (measured.detectors() != geometry.n_detectors) {
    throw ValidationError("measured sinogram has " + std::to_string(measured.detectors()) +
                          " detector bins, geometry has " + std::to_string(geometry.n_detectors));
  }

  Reconstruction out;
  out.pseudo_full = pseudo_full_sinogram(measured, mask, geometry);

  Normalization norm;
  if (auto n = evaluator.normalization()) {
    norm = *n;
  } else {
    const double mean = measured.values.mean();
    const double std = std::sqrt((measured.values - mean).square().mean());
    norm = {mean, std > 0.0 ? std : 1.0};
  }

  const PatchGrid grid(geometry.n_views_full, geometry.n_detectors, settings.patch_side,
                       settings.stride);
  PatchSet set;
  set.conditions = extract_patches((out.pseudo_full.values - norm.offset) / norm.scale, grid);
  set.masks = extract_patches(mask.matrix(geometry.n_detectors), grid);
  set.patches.resize(set.conditions.rows(), set.conditions.cols());
  out.patch_count = grid.count();

  const auto& schedule = evaluator.schedule();
  std::vector<SolverStep> ode_steps;
  std::vector<double> sde_grid;
  if (settings.family == SolverFamily::Ode) {
    ode_steps = nfe_schedule(settings.nfe, schedule, settings.spacing);
    out.nfe_per_patch = nfe_cost(ode_steps);
  } else {
    sde_grid = time_grid(settings.nfe, schedule, settings.spacing);
    out.nfe_per_patch = settings.nfe;
  }

  const Eigen::Index n_chunks = (grid.count() + kChunk - 1) / kChunk;
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    for (;;) {
      const Eigen::Index c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const Eigen::Index first = c * kChunk;
      const Eigen::Index count = std::min(kChunk, grid.count() - first);
      try {
        set.patches.middleCols(first, count) =
            sample_chunk(set, first, count, evaluator, settings, ode_steps, sde_grid);
      } catch (const NumericError&) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
        next = n_chunks;
        return;
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_lock);
        if (!failure) {
          failure = std::make_exception_ptr(NumericError(
              "sampling failed in patches " + std::to_string(first) + ".." +
              std::to_string(first + count - 1) + ": " + e.what()));
        }
        next = n_chunks;
        return;
      }
    }
  };
  const int n_threads = static_cast<int>(std::min<Eigen::Index>(settings.workers, n_chunks));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  out.sinogram.values = assemble_patches(set.patches, grid) * norm.scale + norm.offset;
  out.image = fbp(out.sinogram, geometry);
  return out;
}

}  // namespace sinodiff
