#include "sinodiff/denoiser.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "sinodiff/error.hpp"

namespace sinodiff {

namespace {

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& a) { return 1.0 / (1.0 + (-a).exp()); }

}  // namespace

void DenoiserArchitecture::validate() const {
  if (patch_side < 1) throw ValidationError("patch_side must be positive");
  if (hidden < 1) throw ValidationError("hidden width must be positive");
  if (time_features < 2 || time_features % 2 != 0) {
    throw ValidationError("time_features must be a positive even number");
  }
}

void to_json(nlohmann::json& j, const DenoiserArchitecture& a) {
  j = nlohmann::json{{"type", "patch_mlp"},
                     {"activation", "silu"},
                     {"patch_side", a.patch_side},
                     {"hidden", a.hidden},
                     {"time_features", a.time_features}};
}

void from_json(const nlohmann::json& j, DenoiserArchitecture& a) {
  if (j.value("type", "") != "patch_mlp") {
    throw FormatError("architecture descriptor: unknown model type");
  }
  if (j.value("activation", "") != "silu") {
    throw FormatError("architecture descriptor: unknown activation");
  }
  a.patch_side = j.at("patch_side").get<int>();
  a.hidden = j.at("hidden").get<int>();
  a.time_features = j.at("time_features").get<int>();
  a.validate();
}

DenoiserParams DenoiserParams::zeros(const DenoiserArchitecture& arch) {
  const int p = arch.inputs();
  const int h = arch.hidden;
  return {Eigen::MatrixXd::Zero(h, p), Eigen::MatrixXd::Zero(h, arch.time_features),
          Eigen::MatrixXd::Zero(h, h), Eigen::MatrixXd::Zero(p, h),
          Eigen::VectorXd::Zero(h),    Eigen::VectorXd::Zero(h),
          Eigen::VectorXd::Zero(p)};
}

Eigen::Index DenoiserParams::size() const {
  return w1.size() + u1.size() + w2.size() + w3.size() + b1.size() + b2.size() + b3.size();
}

Eigen::VectorXd DenoiserParams::flatten() const {
  Eigen::VectorXd flat(size());
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    flat.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  };
  put(w1); put(u1); put(w2); put(w3); put(b1); put(b2); put(b3);
  return flat;
}

void DenoiserParams::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != size()) throw ValidationError("flat parameter vector has the wrong length");
  Eigen::Index at = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
    at += m.size();
  };
  take(w1); take(u1); take(w2); take(w3); take(b1); take(b2); take(b3);
}

bool DenoiserParams::all_finite() const {
  return w1.allFinite() && u1.allFinite() && w2.allFinite() && w3.allFinite() &&
         b1.allFinite() && b2.allFinite() && b3.allFinite();
}

Eigen::MatrixXd time_embedding(const Eigen::VectorXd& t, int features) {
  const int half = features / 2;
  Eigen::MatrixXd e(features, t.size());
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * k / half);
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      const double arg = 1000.0 * t(j) * freq;
      e(k, j) = std::sin(arg);
      e(half + k, j) = std::cos(arg);
    }
  }
  return e;
}

PatchDenoiser::PatchDenoiser(DenoiserArchitecture arch, Schedule<double> schedule,
                             Normalization norm)
    : arch_(arch), schedule_(schedule), norm_(norm), params_(DenoiserParams::zeros(arch)) {
  arch_.validate();
  if (!(norm.scale > 0.0)) throw ValidationError("normalization scale must be positive");
}

void PatchDenoiser::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto fill = [&](Eigen::MatrixXd& m, double fan_in) {
    const double s = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = s * normal(rng);
  };
  fill(params_.w1, arch_.inputs() + arch_.time_features);
  fill(params_.u1, arch_.inputs() + arch_.time_features);
  fill(params_.w2, arch_.hidden);
  fill(params_.w3, arch_.hidden);
  params_.b1.setZero();
  params_.b2.setZero();
  params_.b3.setZero();
}

Eigen::MatrixXd PatchDenoiser::eps(const Eigen::MatrixXd& y, double t) const {
  schedule_.check_range(t);
  return eps(y, Eigen::VectorXd::Constant(y.cols(), t));
}

Eigen::MatrixXd PatchDenoiser::denoise(const Eigen::MatrixXd& y, const Eigen::VectorXd& t) const {
  if (y.rows() != arch_.inputs()) {
    throw ValidationError("denoiser expects " + std::to_string(arch_.inputs()) +
                          " values per patch, got " + std::to_string(y.rows()));
  }
  if (t.size() != y.cols()) throw ValidationError("denoiser needs one time per patch");
  const auto& p = params_;
  Eigen::MatrixXd a1 = p.w1 * y + p.u1 * time_embedding(t, arch_.time_features);
  a1.colwise() += p.b1;
  const Eigen::MatrixXd h1 = a1.array() * sigmoid(a1.array());
  Eigen::MatrixXd a2 = p.w2 * h1;
  a2.colwise() += p.b2;
  const Eigen::MatrixXd h2 = a2.array() * sigmoid(a2.array());
  Eigen::MatrixXd out = p.w3 * h2;
  out.colwise() += p.b3;
  return out;
}

Eigen::MatrixXd PatchDenoiser::eps(const Eigen::MatrixXd& y, const Eigen::VectorXd& t) const {
  Eigen::MatrixXd out = denoise(y, t);
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const double a = schedule_.alpha(t(j));
    const double b = schedule_.sigma(t(j));
    out.col(j) = (y.col(j) - a * out.col(j)) / b;
  }
  return out;
}

Eigen::MatrixXd PatchDenoiser::score(const Eigen::MatrixXd& y, double t) const {
  return score_from_eps(eps(y, t), t, schedule_);
}

double PatchDenoiser::loss(const Eigen::MatrixXd& y, const Eigen::VectorXd& t,
                           const Eigen::MatrixXd& target, const Eigen::VectorXd& weights,
                           DenoiserParams* grad) const {
  const Eigen::Index n = y.cols();
  if (target.rows() != y.rows() || target.cols() != n || t.size() != n || weights.size() != n) {
    throw ValidationError("loss: batch shapes disagree");
  }
  const auto& p = params_;
  const Eigen::MatrixXd emb = time_embedding(t, arch_.time_features);
  Eigen::MatrixXd a1 = p.w1 * y + p.u1 * emb;
  a1.colwise() += p.b1;
  const Eigen::ArrayXXd s1 = sigmoid(a1.array());
  const Eigen::MatrixXd h1 = a1.array() * s1;
  Eigen::MatrixXd a2 = p.w2 * h1;
  a2.colwise() += p.b2;
  const Eigen::ArrayXXd s2 = sigmoid(a2.array());
  const Eigen::MatrixXd h2 = a2.array() * s2;
  Eigen::MatrixXd out = p.w3 * h2;
  out.colwise() += p.b3;

  // Network output is the clean-patch estimate; compare in noise space.
  Eigen::VectorXd to_eps(n);
  Eigen::MatrixXd predicted(out.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double a = schedule_.alpha(t(j));
    const double b = schedule_.sigma(t(j));
    to_eps(j) = -a / b;
    predicted.col(j) = (y.col(j) - a * out.col(j)) / b;
  }
  const Eigen::MatrixXd diff = predicted - target;
  const double scale = 1.0 / (static_cast<double>(n) * y.rows());
  const double value = scale * (diff.colwise().squaredNorm().transpose().array() * weights.array()).sum();
  if (!grad) return value;

  const Eigen::MatrixXd d_out =
      2.0 * scale * (diff * (weights.array() * to_eps.array()).matrix().asDiagonal());
  grad->w3 = d_out * h2.transpose();
  grad->b3 = d_out.rowwise().sum();
  const Eigen::MatrixXd d_a2 =
      (p.w3.transpose() * d_out).array() * (s2 * (1.0 + a2.array() * (1.0 - s2)));
  grad->w2 = d_a2 * h1.transpose();
  grad->b2 = d_a2.rowwise().sum();
  const Eigen::MatrixXd d_a1 =
      (p.w2.transpose() * d_a2).array() * (s1 * (1.0 + a1.array() * (1.0 - s1)));
  grad->w1 = d_a1 * y.transpose();
  grad->u1 = d_a1 * emb.transpose();
  grad->b1 = d_a1.rowwise().sum();
  return value;
}

std::filesystem::path descriptor_path(const std::filesystem::path& weights) {
  return weights.string() + ".arch.json";
}

void save_weights(const PatchDenoiser& model, const std::filesystem::path& path) {
  TensorMap tensors;
  auto put = [&](const std::string& name, const Eigen::MatrixXd& m) {
    tensors[name] = to_tensor(m.array());
  };
  const auto& p = model.params();
  put("w1", p.w1);
  put("u1", p.u1);
  put("w2", p.w2);
  put("w3", p.w3);
  put("b1", p.b1);
  put("b2", p.b2);
  put("b3", p.b3);
  write_tensors(path, tensors, DType::Float64);

  const auto norm = *model.normalization();
  nlohmann::json desc = model.architecture();
  desc["normalization"] = {{"offset", norm.offset}, {"scale", norm.scale}};
  desc["schedule"] = {{"beta_1", model.schedule().beta_1()},
                      {"beta_T", model.schedule().beta_T()},
                      {"t_min", model.schedule().t_min()}};
  desc["parameter_count"] = model.parameter_count();
  std::ofstream out(descriptor_path(path));
  if (!out) throw ValidationError("cannot write " + descriptor_path(path).string());
  out << desc.dump(2) << "\n";
}

PatchDenoiser load_weights(const std::filesystem::path& path) {
  const auto desc_file = descriptor_path(path);
  std::ifstream in(desc_file);
  if (!in) throw ValidationError("cannot open architecture descriptor " + desc_file.string());
  nlohmann::json desc;
  DenoiserArchitecture arch;
  Normalization norm;
  double beta_1, beta_T, t_min;
  try {
    desc = nlohmann::json::parse(in);
    arch = desc.get<DenoiserArchitecture>();
    norm.offset = desc.at("normalization").at("offset").get<double>();
    norm.scale = desc.at("normalization").at("scale").get<double>();
    beta_1 = desc.at("schedule").at("beta_1").get<double>();
    beta_T = desc.at("schedule").at("beta_T").get<double>();
    t_min = desc.at("schedule").at("t_min").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("architecture descriptor " + desc_file.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw FormatError("architecture descriptor " + desc_file.string() + ": " + e.what());
  }

  PatchDenoiser model(arch, Schedule<double>(beta_1, beta_T, t_min), norm);
  const TensorMap tensors = read_tensors(path);
  auto& p = model.params();
  auto take = [&](const std::string& name, auto& dst) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("weights file lacks tensor '" + name + "'");
    const Tensor& t = it->second;
    if (t.dims.size() != 2 || t.dims[0] != static_cast<std::uint64_t>(dst.rows()) ||
        t.dims[1] != static_cast<std::uint64_t>(dst.cols())) {
      throw FormatError("tensor '" + name + "' shape does not match the declared architecture");
    }
    dst = to_array(t).matrix();
  };
  take("w1", p.w1);
  take("u1", p.u1);
  take("w2", p.w2);
  take("w3", p.w3);
  take("b1", p.b1);
  take("b2", p.b2);
  take("b3", p.b3);
  if (tensors.size() != 7) throw FormatError("weights file carries unexpected tensors");
  if (!p.all_finite()) throw FormatError("weights file " + path.string() + " holds non-finite values");
  return model;
}

}  // namespace sinodiff
