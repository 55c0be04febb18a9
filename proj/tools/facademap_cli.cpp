#include "facademap/pipeline.hpp"
#include "facademap/text_format.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Facade mapping from street laser scans, cadastral segments and images"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress on stderr");

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset and its ground truth");
  std::string scene_path;
  std::uint64_t seed = 1;
  std::string sim_out;
  sim->add_option("--scene,scene", scene_path, "Scene description file")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Noise seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output directory (dataset/ and truth/ are created)")->required();

  auto* run = app.add_subcommand("run-pipeline", "Extract facades, masks and textures from a dataset");
  std::string dataset_dir, points, frames, cadastre, cameras, config_path, run_out;
  int threads = 0;
  bool timings = false;
  run->add_option("--dataset", dataset_dir, "Directory holding points.txt, frames.txt, cadastre.txt, cameras.txt");
  run->add_option("--points", points, "Point file (overrides --dataset)");
  run->add_option("--frames", frames, "Frame file (overrides --dataset)");
  run->add_option("--cadastre", cadastre, "Cadastre file (overrides --dataset)");
  run->add_option("--cameras", cameras, "Camera file (overrides --dataset)");
  run->add_option("--config", config_path, "Pipeline configuration")->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--threads", threads, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  run->add_flag("--timings", timings, "Record per-stage timings in the manifest");

  auto* eval = app.add_subcommand("evaluate", "Compare a run with simulator ground truth");
  std::string run_dir, truth_dir, metrics_out;
  eval->add_option("--run", run_dir, "Output directory of run-pipeline")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--truth", truth_dir, "Ground-truth directory written by simulate")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--out", metrics_out, "Metrics file (default: <run>/metrics.txt)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      facademap::simulate(scene_path, seed, sim_out);
      if (verbose) fmt::print(stderr, "simulation written to {}\n", sim_out);
    } else if (*run) {
      facademap::DatasetPaths paths;
      if (!dataset_dir.empty()) paths = facademap::DatasetPaths::in_directory(dataset_dir);
      if (!points.empty()) paths.points = points;
      if (!frames.empty()) paths.frames = frames;
      if (!cadastre.empty()) paths.cadastre = cadastre;
      if (!cameras.empty()) paths.cameras = cameras;
      if (paths.points.empty() || paths.frames.empty() || paths.cadastre.empty() || paths.cameras.empty()) {
        fmt::print(stderr, "error: give --dataset or all of --points --frames --cadastre --cameras\n");
        return 2;
      }
      facademap::RunOptions opts;
      opts.threads = threads;
      opts.verbose = verbose;
      opts.record_timings = timings;
      std::optional<fs::path> cfg;
      if (!config_path.empty()) cfg = config_path;
      const auto manifest = facademap::run_pipeline(paths, cfg, run_out, opts);
      if (verbose) {
        fmt::print(stderr, "{} quads, {} segments skipped\n", manifest.facades.size(), manifest.skipped_segments.size());
      }
    } else if (*eval) {
      const std::string table = facademap::evaluate(run_dir, truth_dir);
      const fs::path out = metrics_out.empty() ? fs::path(run_dir) / "metrics.txt" : fs::path(metrics_out);
      facademap::text::write_file(out, table);
      fmt::print("{}", table);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
