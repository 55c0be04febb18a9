#pragma once

#include "facademap/config.hpp"
#include "facademap/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace facademap {

/// Failure of one pipeline stage; what() reads "<stage>: <cause>".
class StageError : public std::runtime_error {
public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

struct RunOptions {
  int threads = 0;           // 0: all hardware threads
  bool verbose = false;      // stage progress on stderr
  bool record_timings = false;
};

struct MaskRecord {
  std::int64_t camera_id = 0;
  std::string hard_path;
  std::string soft_path;
  std::size_t masked_pixels = 0;
};

struct FacadeRecord {
  std::int64_t segment_id = 0;
  std::size_t cluster_points = 0;
  std::size_t occluders_measured = 0;
  std::size_t occluders_synthetic = 0;
  std::vector<std::int64_t> views;  // camera ids
  std::vector<MaskRecord> masks;
  std::size_t hole_pixels = 0;
  std::size_t ortho_pixels = 0;
  std::string ortho_path;
  std::string ortho_raw_path;
  std::string holes_path;
  std::string sidecar_path;
  std::string occluders_path;
  std::string cluster_path;
};

struct RunManifest {
  std::string status = "ok";
  std::string failed_stage;
  std::string error;
  std::string points_path, frames_path, cadastre_path, cameras_path;  // relative to the out dir
  std::string config_path;
  std::string quads_path;
  std::size_t points = 0;
  std::size_t frames = 0;
  std::size_t segments = 0;
  std::size_t cameras = 0;
  std::size_t hyper_points = 0;
  std::size_t surface_points = 0;
  std::size_t clusters = 0;
  std::vector<std::int64_t> skipped_segments;  // no cluster
  std::vector<FacadeRecord> facades;            // by segment_id
  std::vector<std::pair<std::string, double>> timings;  // seconds, only when recorded

  std::string to_text() const;
};

/// Input file paths recorded in a manifest, resolved against the run dir.
DatasetPaths manifest_inputs(const std::filesystem::path& run_dir);

/// load -> accumulation -> extract -> fit -> occlusion -> masking ->
/// texturing -> export into `out_dir`. Outputs depend only on the inputs and
/// the configuration, never on the thread count. On failure the manifest is
/// written with status = failed and the StageError is rethrown.
RunManifest run_pipeline(const DatasetPaths& inputs, const std::optional<std::filesystem::path>& config_path,
                         const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Same, with an in-memory configuration.
RunManifest run_pipeline(const DatasetPaths& inputs, const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                         const RunOptions& options = {});

/// Runs the scene simulator: out_dir/dataset and out_dir/truth.
DatasetPaths simulate(const std::filesystem::path& scene_path, std::uint64_t seed, const std::filesystem::path& out_dir);

/// Compares a run against a simulator truth directory and returns the metrics
/// table. Texture truth is re-rendered from truth/scene.txt on the run's ortho
/// grids when available, else read from truth/textures. Occlusion rows need
/// truth/labels.txt.
std::string evaluate(const std::filesystem::path& run_dir, const std::filesystem::path& truth_dir);

/// Calls fn(i) for i in [0, n) on up to `threads` workers. The first exception
/// (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace facademap
