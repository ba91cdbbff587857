#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sinodiff/config.hpp"
#include "sinodiff/error.hpp"
#include "sinodiff/mask.hpp"
#include "sinodiff/metrics.hpp"
#include "sinodiff/phantom.hpp"
#include "sinodiff/projector.hpp"
#include "sinodiff/reconstruct.hpp"
#include "sinodiff/tensor_io.hpp"
#include "sinodiff/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sinodiff;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

// Options shared by every subcommand. A --config file supplies defaults;
// explicit flags win.
struct Common {
  std::string config_file;
  std::string geometry_file;
  std::string out;
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

struct Run {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  json outputs = json::object();
  json results = json::object();
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ValidationError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path)) throw ValidationError(std::string(what) + " not found: " + path);
}

json load_config(const Common& c) {
  if (c.config_file.empty()) return json::object();
  require_file(c.config_file, "config file");
  json j = read_json(c.config_file);
  if (!j.is_object()) throw ValidationError("config file " + c.config_file + " must hold an object");
  return j;
}

FanBeamGeometry load_geometry(const Common& c, const json& config, Run& run) {
  FanBeamGeometry g;
  if (!c.geometry_file.empty()) {
    require_file(c.geometry_file, "geometry file");
    g = read_json(c.geometry_file).get<FanBeamGeometry>();
    run.inputs["geometry"] = {{"path", c.geometry_file}, {"digest", file_digest(c.geometry_file)}};
  } else if (config.contains("geometry")) {
    g = config.at("geometry").get<FanBeamGeometry>();
  } else {
    g = desk_geometry();
  }
  g.validate();
  json gj = g;
  gj.erase("view_angles");
  run.config["geometry"] = gj;
  return g;
}

void add_input(Run& run, const std::string& key, const std::string& path) {
  run.inputs[key] = {{"path", path}, {"digest", file_digest(path)}};
}

void add_output(Run& run, const std::string& key, const std::string& path) {
  run.outputs[key] = {{"path", path}, {"digest", file_digest(path)}};
}

void write_manifest(const Common& c, const Run& run) {
  const std::string path = c.manifest.empty() ? c.out + ".manifest.json" : c.manifest;
  json m = {{"command", run.command},
            {"config", run.config},
            {"inputs", run.inputs},
            {"outputs", run.outputs},
            {"results", run.results}};
  write_json(path, m);
}

Sinogram read_sinogram(const std::string& path) {
  require_file(path, "input sinogram");
  return Sinogram{read_array(path)};
}

Image read_image(const std::string& path, double pixel_size) {
  require_file(path, "input image");
  return Image{read_array(path), pixel_size};
}

std::uint64_t seed_or(const Common& c, const json& config, std::uint64_t fallback) {
  if (c.seed) return *c.seed;
  return config.value("seed", fallback);
}

MaskSpec mask_spec(const json& config, std::optional<int> kept, const std::vector<int>& indices) {
  MaskSpec spec;
  if (config.contains("mask")) spec = config.at("mask").get<MaskSpec>();
  if (kept) {
    spec.kept = kept;
    spec.indices.clear();
  }
  if (!indices.empty()) {
    spec.indices = indices;
    spec.kept.reset();
  }
  if (!spec.kept && spec.indices.empty()) spec.kept = 45;
  return spec;
}

void add_common(CLI::App* sub, Common& c, bool with_seed) {
  sub->add_option("--config", c.config_file, "JSON run configuration (flags override it)");
  sub->add_option("--geometry", c.geometry_file, "JSON geometry (defaults to the desk geometry)");
  sub->add_option("-o,--out", c.out, "Output file")->required();
  sub->add_option("--manifest", c.manifest, "Manifest path (default: <out>.manifest.json)");
  if (with_seed) sub->add_option("--seed", c.seed, "Random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-based score-diffusion inpainting of sparse-view CT sinograms"};
  app.require_subcommand(1);

  Common common;

  std::string phantom_kind = "shepp-logan";
  double disk_radius = 40.0, disk_x = 0.0, disk_y = 0.0, value_scale = 1.0;
  auto* phantom = app.add_subcommand("phantom", "Write a phantom image");
  add_common(phantom, common, true);
  phantom->add_option("--kind", phantom_kind, "shepp-logan, disk or random")
      ->check(CLI::IsMember({"shepp-logan", "disk", "random"}));
  phantom->add_option("--radius", disk_radius, "Disk radius in mm");
  phantom->add_option("--center-x", disk_x, "Disk centre x in mm");
  phantom->add_option("--center-y", disk_y, "Disk centre y in mm");
  phantom->add_option("--scale", value_scale, "Multiply phantom values");

  std::string input;
  auto* project_cmd = app.add_subcommand("project", "Forward-project an image to a full sinogram");
  add_common(project_cmd, common, false);
  project_cmd->add_option("-i,--input", input, "Image file")->required();

  std::optional<int> kept;
  std::vector<int> indices;
  auto* mask_cmd = app.add_subcommand("mask", "Keep a subset of views from a full sinogram");
  add_common(mask_cmd, common, false);
  mask_cmd->add_option("-i,--input", input, "Full sinogram")->required();
  mask_cmd->add_option("--kept", kept, "Number of uniformly spaced views to keep");
  mask_cmd->add_option("--indices", indices, "Explicit view indices")->delimiter(',');

  std::optional<int> iterations, batch, hidden, patch_side, phantoms;
  std::optional<double> lr;
  std::optional<std::string> weighting;
  std::vector<std::string> data_files;
  std::uint64_t data_seed = 1000;
  auto* train_cmd = app.add_subcommand("train", "Train the patch denoiser");
  add_common(train_cmd, common, true);
  train_cmd->add_option("--data", data_files, "Full sinograms to train on");
  train_cmd->add_option("--phantoms", phantoms, "Train on this many random phantoms instead");
  train_cmd->add_option("--data-seed", data_seed, "First seed of the random phantoms");
  train_cmd->add_option("--iterations", iterations, "Optimizer steps");
  train_cmd->add_option("--batch", batch, "Patches per step");
  train_cmd->add_option("--lr", lr, "Adam learning rate");
  train_cmd->add_option("--hidden", hidden, "Hidden layer width");
  train_cmd->add_option("--patch-side", patch_side, "Patch side in pixels");
  train_cmd->add_option("--weighting", weighting, "likelihood or uniform")
      ->check(CLI::IsMember({"likelihood", "uniform"}));

  std::string model_path, sinogram_out;
  std::optional<int> nfe, stride;
  std::optional<double> gamma, eta_c;
  std::optional<std::string> family, spacing;
  auto* recon_cmd = app.add_subcommand("reconstruct", "Inpaint missing views and reconstruct");
  add_common(recon_cmd, common, true);
  recon_cmd->add_option("-i,--input", input, "Down-sampled sinogram")->required();
  recon_cmd->add_option("--model", model_path, "Trained weights")->required();
  recon_cmd->add_option("--kept", kept, "Kept view count used when masking");
  recon_cmd->add_option("--indices", indices, "Explicit kept view indices")->delimiter(',');
  recon_cmd->add_option("--nfe", nfe, "Score evaluations per patch");
  recon_cmd->add_option("--family", family, "ode or sde")->check(CLI::IsMember({"ode", "sde"}));
  recon_cmd->add_option("--spacing", spacing, "uniform_t or uniform_lambda")
      ->check(CLI::IsMember({"uniform_t", "uniform_lambda"}));
  recon_cmd->add_option("--gamma", gamma, "Weight on measured views");
  recon_cmd->add_option("--eta-c", eta_c, "Weight on inpainted views");
  recon_cmd->add_option("--stride", stride, "Patch stride");
  recon_cmd->add_option("--workers", common.workers, "Sampling threads");
  recon_cmd->add_option("--sinogram-out", sinogram_out, "Also write the inpainted sinogram");

  std::string recon_file, truth_file, nps_out, render;
  int roi_side = 32, roi_stride = 4;
  auto* eval_cmd = app.add_subcommand("evaluate", "Compare a reconstruction with the truth");
  add_common(eval_cmd, common, false);
  eval_cmd->add_option("--recon", recon_file, "Reconstructed image")->required();
  eval_cmd->add_option("--truth", truth_file, "Reference image")->required();
  eval_cmd->add_option("--nps-out", nps_out, "Write the noise power spectrum here");
  eval_cmd->add_option("--roi", roi_side, "NPS ROI side");
  eval_cmd->add_option("--roi-stride", roi_stride, "NPS ROI spacing");
  eval_cmd->add_option("--render", render, "Write a PGM of the reconstruction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    Run run;
    const json config = load_config(common);
    if (!common.config_file.empty()) add_input(run, "config", common.config_file);

    if (*phantom) {
      run.command = "phantom";
      const auto g = load_geometry(common, config, run);
      const auto seed = seed_or(common, config, 0);
      Image img;
      if (phantom_kind == "shepp-logan") {
        img = shepp_logan(g.image_size, g.pixel_size, value_scale);
      } else if (phantom_kind == "disk") {
        img = disk(g.image_size, g.pixel_size, disk_x, disk_y, disk_radius, value_scale);
      } else {
        img = random_ellipses(g.image_size, g.pixel_size, seed, value_scale);
      }
      write_array(common.out, img.values);
      run.config["phantom"] = {{"kind", phantom_kind}, {"scale", value_scale}, {"seed", seed}};
      if (phantom_kind == "disk") {
        run.config["phantom"]["disk"] = {{"radius", disk_radius}, {"x", disk_x}, {"y", disk_y}};
      }
      add_output(run, "image", common.out);
    } else if (*project_cmd) {
      run.command = "project";
      const auto g = load_geometry(common, config, run);
      const auto img = read_image(input, g.pixel_size);
      add_input(run, "image", input);
      if (img.values.rows() != g.image_size || img.values.cols() != g.image_size) {
        throw ValidationError("image is " + std::to_string(img.values.rows()) + "x" +
                              std::to_string(img.values.cols()) + ", geometry expects " +
                              std::to_string(g.image_size) + "x" + std::to_string(g.image_size));
      }
      write_array(common.out, project(img, g).values);
      add_output(run, "sinogram", common.out);
    } else if (*mask_cmd) {
      run.command = "mask";
      const auto g = load_geometry(common, config, run);
      const auto full = read_sinogram(input);
      add_input(run, "sinogram", input);
      if (full.views() != g.n_views_full) {
        throw ValidationError("sinogram has " + std::to_string(full.views()) +
                              " views, geometry has " + std::to_string(g.n_views_full));
      }
      const auto spec = mask_spec(config, kept, indices);
      const auto mask = spec.make(g.n_views_full);
      write_array(common.out, apply_mask(full, mask).values);
      run.config["mask"] = spec;
      run.results["kept_indices"] = mask.indices();
      add_output(run, "sinogram", common.out);
    } else if (*train_cmd) {
      run.command = "train";
      const auto g = load_geometry(common, config, run);
      TrainConfig cfg = config.contains("train") ? config.at("train").get<TrainConfig>()
                                                 : desk_train_config();
      cfg.seed = seed_or(common, config, cfg.seed);
      if (iterations) cfg.iterations = *iterations;
      if (batch) cfg.batch_size = *batch;
      if (lr) cfg.learning_rate = *lr;
      if (hidden) cfg.architecture.hidden = *hidden;
      if (patch_side) cfg.architecture.patch_side = *patch_side;
      if (weighting) cfg.weighting = *weighting == "uniform" ? LossWeighting::Uniform : LossWeighting::Likelihood;
      cfg.validate();
      ScheduleParams sp = config.value("schedule", ScheduleParams{});

      std::vector<Sinogram> data;
      if (!data_files.empty()) {
        for (const auto& f : data_files) {
          data.push_back(read_sinogram(f));
          add_input(run, "data:" + f, f);
        }
      } else {
        const int count = phantoms.value_or(config.value("phantoms", 24));
        data = phantom_training_set(g, count, data_seed);
        run.config["phantoms"] = {{"count", count}, {"first_seed", data_seed}};
      }
      auto result = train(data, cfg, sp.make());
      save_weights(result.model, common.out);
      const std::string log = common.out + ".loss.txt";
      {
        std::ofstream out(log);
        if (!out) throw ValidationError("cannot write " + log);
        char buf[32];
        for (double v : result.loss_trace) {
          std::snprintf(buf, sizeof buf, "%.17g\n", v);
          out << buf;
        }
      }
      run.config["train"] = cfg;
      run.config["schedule"] = sp;
      const auto& trace = result.loss_trace;
      const int n = static_cast<int>(trace.size());
      run.results["smoothed_loss_first"] = smoothed_loss(trace, std::min(n, 100));
      run.results["smoothed_loss_last"] = smoothed_loss(trace, n);
      run.results["parameter_count"] = result.model.parameter_count();
      add_output(run, "weights", common.out);
      add_output(run, "descriptor", descriptor_path(common.out).string());
      add_output(run, "loss_log", log);
    } else if (*recon_cmd) {
      run.command = "reconstruct";
      const auto g = load_geometry(common, config, run);
      require_file(model_path, "model");
      require_file(descriptor_path(model_path).string(), "model descriptor");
      const auto measured = read_sinogram(input);
      const auto model = load_weights(model_path);
      add_input(run, "sinogram", input);
      add_input(run, "model", model_path);
      add_input(run, "model_descriptor", descriptor_path(model_path).string());

      SamplerSettings st = config.contains("sampler") ? config.at("sampler").get<SamplerSettings>()
                                                      : desk_sampler_settings();
      st.seed = seed_or(common, config, st.seed);
      if (common.workers) st.workers = *common.workers;
      else if (config.contains("workers")) st.workers = config.at("workers").get<int>();
      if (nfe) st.nfe = *nfe;
      if (family) st.family = *family == "ode" ? SolverFamily::Ode : SolverFamily::Sde;
      if (spacing) st.spacing = *spacing == "uniform_t" ? TimeSpacing::UniformT : TimeSpacing::UniformLambda;
      if (gamma) st.conditioning.gamma = *gamma;
      if (eta_c) st.conditioning.eta_c = *eta_c;
      if (stride) st.stride = *stride;
      st.patch_side = model.patch_side();
      st.validate();

      const auto spec = mask_spec(config, kept, indices);
      const auto mask = spec.make(g.n_views_full);
      if (measured.views() != mask.count()) {
        throw ValidationError("sinogram has " + std::to_string(measured.views()) +
                              " views but the mask keeps " + std::to_string(mask.count()));
      }
      const auto start = std::chrono::steady_clock::now();
      const auto rec = reconstruct(measured, mask, g, model, st);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_array(common.out, rec.image.values);
      add_output(run, "image", common.out);
      if (!sinogram_out.empty()) {
        write_array(sinogram_out, rec.sinogram.values);
        add_output(run, "sinogram", sinogram_out);
      }
      run.config["sampler"] = st;
      run.config["mask"] = spec;
      run.config["schedule"] = ScheduleParams{model.schedule().beta_1(), model.schedule().beta_T(),
                                              model.schedule().t_min()};
      run.results["patches"] = rec.patch_count;
      run.results["nfe_per_patch"] = rec.nfe_per_patch;
      run.results["sampling_seconds"] = seconds;
    } else if (*eval_cmd) {
      run.command = "evaluate";
      const auto g = load_geometry(common, config, run);
      const auto recon = read_image(recon_file, g.pixel_size);
      const auto truth = read_image(truth_file, g.pixel_size);
      add_input(run, "recon", recon_file);
      add_input(run, "truth", truth_file);
      if (recon.values.rows() != truth.values.rows() || recon.values.cols() != truth.values.cols()) {
        throw ValidationError("shape mismatch: recon " + std::to_string(recon.values.rows()) + "x" +
                              std::to_string(recon.values.cols()) + ", truth " +
                              std::to_string(truth.values.rows()) + "x" +
                              std::to_string(truth.values.cols()));
      }
      const double range = data_range(truth.values);
      const double p = psnr(recon.values, truth.values, range > 0.0 ? range : 1.0);
      json metrics = {{"psnr_db", std::isinf(p) ? json("inf") : json(p)},
                      {"ssim", ssim(recon.values, truth.values, range > 0.0 ? range : 1.0)},
                      {"data_range", range},
                      {"rmse", std::sqrt((recon.values - truth.values).square().mean())}};
      if (!nps_out.empty()) {
        NpsConfig nc{roi_side, roi_stride, g.pixel_size, true};
        const auto spec = nps(recon.values, truth.values, nc);
        write_tensor(nps_out, to_tensor(spec), DType::Float64);
        add_output(run, "nps", nps_out);
        run.config["nps"] = {{"roi_side", roi_side}, {"roi_stride", roi_stride}};
        metrics["nps_mean"] = spec.mean();
      }
      if (!render.empty()) {
        write_pgm(render, recon.values, truth.values.minCoeff(), truth.values.maxCoeff());
        add_output(run, "render", render);
      }
      write_json(common.out, metrics);
      run.results = metrics;
      add_output(run, "metrics", common.out);
    }
    write_manifest(common, run);
    return 0;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
