#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sinodiff/geometry.hpp"
#include "sinodiff/mask.hpp"
#include "sinodiff/reconstruct.hpp"
#include "sinodiff/schedule.hpp"
#include "sinodiff/train.hpp"

namespace sinodiff {

struct ScheduleParams {
  double beta_1 = 1e-4;
  double beta_T = 0.02;
  double t_min = 1e-3;

  Schedule<double> make() const { return Schedule<double>(beta_1, beta_T, t_min); }
};

/// Either a kept-view count (uniform stride from view 0) or explicit indices.
struct MaskSpec {
  std::optional<int> kept;
  std::vector<int> indices;

  ViewMask make(int n_full) const;
};

void to_json(nlohmann::json& j, const ScheduleParams& s);
void from_json(const nlohmann::json& j, ScheduleParams& s);
void to_json(nlohmann::json& j, const MaskSpec& m);
void from_json(const nlohmann::json& j, MaskSpec& m);
void to_json(nlohmann::json& j, const SamplerSettings& s);
void from_json(const nlohmann::json& j, SamplerSettings& s);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Settings that work for the desk geometry with the small patch network:
/// 8000 Adam steps on noise-space error with equal weight across t, and an
/// ODE sampler at 100 evaluations with eta_c = 0.6.
TrainConfig desk_train_config();
SamplerSettings desk_sampler_settings();

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace sinodiff
