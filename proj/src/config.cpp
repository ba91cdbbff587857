#include "sinodiff/config.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "sinodiff/error.hpp"

namespace sinodiff {

ViewMask MaskSpec::make(int n_full) const {
  if (!indices.empty()) return ViewMask::from_indices(n_full, indices);
  if (kept) return ViewMask::uniform(n_full, *kept);
  return ViewMask::all(n_full);
}

void to_json(nlohmann::json& j, const ScheduleParams& s) {
  j = {{"beta_1", s.beta_1}, {"beta_T", s.beta_T}, {"t_min", s.t_min}};
}

void from_json(const nlohmann::json& j, ScheduleParams& s) {
  ScheduleParams d;
  s.beta_1 = j.value("beta_1", d.beta_1);
  s.beta_T = j.value("beta_T", d.beta_T);
  s.t_min = j.value("t_min", d.t_min);
}

void to_json(nlohmann::json& j, const MaskSpec& m) {
  j = nlohmann::json::object();
  if (m.kept) j["kept"] = *m.kept;
  if (!m.indices.empty()) j["indices"] = m.indices;
}

void from_json(const nlohmann::json& j, MaskSpec& m) {
  if (j.contains("kept")) m.kept = j.at("kept").get<int>();
  m.indices = j.value("indices", std::vector<int>{});
}

void to_json(nlohmann::json& j, const SamplerSettings& s) {
  j = {{"nfe", s.nfe},
       {"family", s.family == SolverFamily::Ode ? "ode" : "sde"},
       {"spacing", s.spacing == TimeSpacing::UniformT ? "uniform_t" : "uniform_lambda"},
       {"gamma", s.conditioning.gamma},
       {"eta_c", s.conditioning.eta_c},
       {"patch_side", s.patch_side},
       {"stride", s.stride},
       {"seed", s.seed},
       {"workers", s.workers},
       {"final_conditioning", s.final_conditioning}};
}

void from_json(const nlohmann::json& j, SamplerSettings& s) {
  SamplerSettings d;
  s.nfe = j.value("nfe", d.nfe);
  const std::string family = j.value("family", std::string("ode"));
  if (family != "ode" && family != "sde") throw ValidationError("family must be ode or sde");
  s.family = family == "ode" ? SolverFamily::Ode : SolverFamily::Sde;
  const std::string spacing = j.value("spacing", std::string("uniform_t"));
  if (spacing != "uniform_t" && spacing != "uniform_lambda") {
    throw ValidationError("spacing must be uniform_t or uniform_lambda");
  }
  s.spacing = spacing == "uniform_t" ? TimeSpacing::UniformT : TimeSpacing::UniformLambda;
  s.conditioning.gamma = j.value("gamma", d.conditioning.gamma);
  s.conditioning.eta_c = j.value("eta_c", d.conditioning.eta_c);
  s.patch_side = j.value("patch_side", d.patch_side);
  s.stride = j.value("stride", d.stride);
  s.seed = j.value("seed", d.seed);
  s.workers = j.value("workers", d.workers);
  s.final_conditioning = j.value("final_conditioning", d.final_conditioning);
  s.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate},
       {"iterations", c.iterations},
       {"batch_size", c.batch_size},
       {"architecture", c.architecture},
       {"seed", c.seed},
       {"weighting", c.weighting == LossWeighting::Likelihood ? "likelihood" : "uniform"}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.iterations = j.value("iterations", d.iterations);
  c.batch_size = j.value("batch_size", d.batch_size);
  if (j.contains("architecture")) {
    c.architecture = j.at("architecture").get<DenoiserArchitecture>();
  }
  c.seed = j.value("seed", d.seed);
  const std::string weighting = j.value("weighting", std::string("likelihood"));
  if (weighting != "likelihood" && weighting != "uniform") {
    throw ValidationError("weighting must be likelihood or uniform");
  }
  c.weighting = weighting == "likelihood" ? LossWeighting::Likelihood : LossWeighting::Uniform;
  c.validate();
}

TrainConfig desk_train_config() {
  TrainConfig c;
  c.iterations = 8000;
  c.batch_size = 64;
  c.seed = 7;
  c.weighting = LossWeighting::Uniform;
  return c;
}

SamplerSettings desk_sampler_settings() {
  SamplerSettings s;
  s.nfe = 100;
  s.conditioning.eta_c = 0.6;
  s.seed = 3;
  return s;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sinodiff
