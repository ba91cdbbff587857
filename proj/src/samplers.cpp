#include "sinodiff/samplers.hpp"

namespace sinodiff {

std::vector<double> time_grid(int steps, const Schedule<double>& schedule, TimeSpacing spacing) {
  if (steps < 1) throw ValidationError("time grid needs at least one step");
  std::vector<double> grid(steps + 1);
  if (spacing == TimeSpacing::UniformT) {
    const double span = 1.0 - schedule.t_min();
    for (int i = 0; i <= steps; ++i) grid[i] = 1.0 - span * i / steps;
  } else {
    const double lo = schedule.lambda_min();
    const double hi = schedule.lambda_max();
    for (int i = 0; i <= steps; ++i) grid[i] = schedule.inverse_log_snr(lo + (hi - lo) * i / steps);
  }
  grid.front() = 1.0;
  grid.back() = schedule.t_min();
  return grid;
}

std::vector<SolverStep> nfe_schedule(int budget, const Schedule<double>& schedule,
                                     TimeSpacing spacing) {
  if (budget < 1) throw ValidationError("NFE budget must be at least 1");
  const int steps = budget / 3 + 1;
  const auto grid = time_grid(steps, schedule, spacing);
  std::vector<SolverStep> out;
  int remaining = budget;
  for (int j = 0; j < steps && remaining > 0; ++j) {
    int order;
    if (remaining >= 4) {
      order = 3;
    } else if (remaining == 3 || remaining == 2) {
      order = 2;
    } else {
      order = 1;
    }
    remaining -= order;
    out.push_back({order, grid[j], grid[j + 1]});
  }
  return out;
}

int nfe_cost(const std::vector<SolverStep>& steps) {
  int total = 0;
  for (const auto& s : steps) total += s.order;
  return total;
}

}  // namespace sinodiff
