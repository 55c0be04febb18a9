#include "facademap/pipeline.hpp"

#include "facademap/accumulation.hpp"
#include "facademap/evaluation.hpp"
#include "facademap/facade_extract.hpp"
#include "facademap/facade_fit.hpp"
#include "facademap/masking.hpp"
#include "facademap/occlusion.hpp"
#include "facademap/synthscene.hpp"
#include "facademap/text_format.hpp"
#include "facademap/texturing.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace facademap {

namespace fs = std::filesystem;

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::string relative_to(const fs::path& p, const fs::path& base) {
  const fs::path abs_p = fs::absolute(p).lexically_normal();
  const fs::path abs_base = fs::absolute(base).lexically_normal();
  const fs::path rel = abs_p.lexically_relative(abs_base);
  return (rel.empty() ? abs_p : rel).generic_string();
}

class StageClock {
public:
  StageClock(const RunOptions& opts, RunManifest& manifest) : opts_(opts), manifest_(manifest) {}

  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    if (opts_.verbose) fmt::print(stderr, "[{}] start\n", stage);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        finish(stage, t0);
      } else {
        auto result = fn();
        finish(stage, t0);
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

private:
  void finish(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opts_.verbose) fmt::print(stderr, "[{}] done in {:.3f} s\n", stage, secs);
    if (opts_.record_timings) manifest_.timings.emplace_back(stage, secs);
  }

  const RunOptions& opts_;
  RunManifest& manifest_;
};

/// Everything one facade produces after the fit.
struct FacadeWork {
  FacadeQuad quad;
  FacadeRecord record;
};

void clear_previous_outputs(const fs::path& out_dir) {
  for (const char* dir : {"masks", "facades"}) fs::remove_all(out_dir / dir);
  for (const char* file : {"quads.txt", "config.txt", "manifest.txt", "metrics.txt"}) fs::remove(out_dir / file);
}

}  // namespace

std::string RunManifest::to_text() const {
  std::string out;
  out += fmt::format("status = {}\n", status);
  if (status != "ok") {
    out += fmt::format("failed_stage = {}\n", failed_stage);
    out += fmt::format("error = {}\n", error);
  }
  out += fmt::format("points = {}\n", points_path);
  out += fmt::format("frames = {}\n", frames_path);
  out += fmt::format("cadastre = {}\n", cadastre_path);
  out += fmt::format("cameras = {}\n", cameras_path);
  out += fmt::format("config = {}\n", config_path);
  if (!quads_path.empty()) out += fmt::format("quads = {}\n", quads_path);
  out += fmt::format("count_points = {}\n", points);
  out += fmt::format("count_frames = {}\n", frames);
  out += fmt::format("count_segments = {}\n", segments);
  out += fmt::format("count_cameras = {}\n", cameras);
  out += fmt::format("count_hyper_points = {}\n", hyper_points);
  out += fmt::format("count_surface_points = {}\n", surface_points);
  out += fmt::format("count_clusters = {}\n", clusters);
  out += fmt::format("count_quads = {}\n", facades.size());
  std::size_t occluders = 0;
  for (const auto& f : facades) occluders += f.occluders_measured;
  out += fmt::format("count_occluders = {}\n", occluders);
  out += fmt::format("skipped_segments = {}\n", fmt::join(skipped_segments, " "));
  for (const auto& f : facades) {
    out += "\n[facade]\n";
    out += fmt::format("segment_id = {}\n", f.segment_id);
    out += fmt::format("cluster_points = {}\n", f.cluster_points);
    out += fmt::format("occluders_measured = {}\n", f.occluders_measured);
    out += fmt::format("occluders_synthetic = {}\n", f.occluders_synthetic);
    out += fmt::format("views = {}\n", fmt::join(f.views, " "));
    out += fmt::format("ortho_pixels = {}\n", f.ortho_pixels);
    out += fmt::format("hole_pixels = {}\n", f.hole_pixels);
    out += fmt::format("ortho = {}\n", f.ortho_path);
    out += fmt::format("ortho_raw = {}\n", f.ortho_raw_path);
    out += fmt::format("holes = {}\n", f.holes_path);
    out += fmt::format("sidecar = {}\n", f.sidecar_path);
    out += fmt::format("occluders = {}\n", f.occluders_path);
    out += fmt::format("cluster = {}\n", f.cluster_path);
    for (const auto& m : f.masks) {
      out += fmt::format("mask = {} {} {} {}\n", m.camera_id, m.hard_path, m.soft_path, m.masked_pixels);
    }
  }
  if (!timings.empty()) {
    out += "\n[timings]\n";
    for (const auto& [stage, secs] : timings) out += fmt::format("{} = {:.6f}\n", stage, secs);
  }
  return out;
}

DatasetPaths manifest_inputs(const fs::path& run_dir) {
  const fs::path path = run_dir / "manifest.txt";
  if (!fs::exists(path)) throw std::runtime_error("missing " + path.string());
  const auto sections = text::parse_sections(path);
  std::map<std::string, std::string> kv;
  for (const auto& e : sections.front().entries) kv[e.key] = e.value;
  auto get = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(path.string() + ": missing key '" + key + "'");
    const fs::path p(it->second);
    return p.is_absolute() ? p : run_dir / p;
  };
  return {get("points"), get("frames"), get("cadastre"), get("cameras")};
}

RunManifest run_pipeline(const DatasetPaths& inputs, const std::optional<fs::path>& config_path,
                         const fs::path& out_dir, const RunOptions& options) {
  PipelineConfig cfg;
  try {
    if (config_path) cfg = load_config(*config_path);
    cfg.validate();
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  return run_pipeline(inputs, cfg, out_dir, options);
}

RunManifest run_pipeline(const DatasetPaths& inputs, const PipelineConfig& cfg, const fs::path& out_dir,
                         const RunOptions& options) {
  RunManifest manifest;
  manifest.points_path = relative_to(inputs.points, out_dir);
  manifest.frames_path = relative_to(inputs.frames, out_dir);
  manifest.cadastre_path = relative_to(inputs.cadastre, out_dir);
  manifest.cameras_path = relative_to(inputs.cameras, out_dir);
  manifest.config_path = "config.txt";

  StageClock clock(options, manifest);
  try {
    clock.run("config", [&] { cfg.validate(); });
    clock.run("prepare", [&] {
      fs::create_directories(out_dir);
      clear_previous_outputs(out_dir);
      text::write_file(out_dir / manifest.config_path, cfg.to_text());
    });

    const Dataset ds = clock.run("load", [&] { return load_dataset(inputs); });
    manifest.points = ds.points.size();
    manifest.frames = ds.frames.size();
    manifest.segments = ds.cadastre.size();
    manifest.cameras = ds.cameras.size();
    std::vector<RgbImage> images;
    std::vector<PinholeCamera> cameras;
    clock.run("load-images", [&] {
      for (const auto& c : ds.cameras) {
        images.push_back(read_image(c.image_path));
        cameras.push_back(c.camera);
      }
    });

    const HyperPointSplit split = clock.run("accumulation", [&] {
      const AccumulationGrid grid = build_accumulation_map(ds.points, cfg.grid_step);
      return split_hyper_points(grid);
    });
    manifest.hyper_points = split.vertical.size();
    manifest.surface_points = split.surface.size();

    const std::vector<FacadeCluster> clusters =
        clock.run("extract", [&] { return extract_facade_clusters(split.vertical, ds.points, ds.cadastre, cfg); });
    manifest.clusters = clusters.size();
    for (const auto& seg : ds.cadastre) {
      const bool found = std::any_of(clusters.begin(), clusters.end(),
                                     [&](const FacadeCluster& c) { return c.segment_id == seg.id; });
      if (!found) manifest.skipped_segments.push_back(seg.id);
    }
    std::sort(manifest.skipped_segments.begin(), manifest.skipped_segments.end());

    std::vector<FacadeWork> work(clusters.size());
    clock.run("fit", [&] {
      std::map<std::int64_t, const Segment2*> segment_by_id;
      for (const auto& s : ds.cadastre) segment_by_id[s.id] = &s;
      parallel_for(clusters.size(), options.threads, [&](std::size_t i) {
        const auto& c = clusters[i];
        work[i].quad = fit_facade(c, *segment_by_id.at(c.segment_id), ds.points, ds.frames, cfg);
        work[i].record.segment_id = c.segment_id;
        work[i].record.cluster_points = c.count();
      });
    });
    clock.run("export-quads", [&] {
      std::vector<FacadeQuad> quads;
      for (const auto& w : work) quads.push_back(w.quad);
      text::write_file(out_dir / "quads.txt", quads_to_text(quads));
      manifest.quads_path = "quads.txt";
    });

    std::vector<OccluderSet> occluders(work.size());
    clock.run("occlusion", [&] {
      parallel_for(work.size(), options.threads, [&](std::size_t i) {
        OccluderSet occ = detect_occluding_points(ds.points, work[i].quad, cfg);
        if (cfg.cube_dilation_enabled && !occ.empty()) occ = cube_dilate(occ, cfg.cube_half_edge);
        work[i].record.occluders_measured = occ.measured_count();
        work[i].record.occluders_synthetic = occ.size() - occ.measured_count();
        occluders[i] = std::move(occ);
      });
    });

    // Masking and texturing run per facade so that full-resolution masks do
    // not all have to be alive at once.
    fs::create_directories(out_dir / "masks");
    fs::create_directories(out_dir / "facades");
    clock.run("masking+texturing", [&] {
      parallel_for(work.size(), options.threads, [&](std::size_t i) {
        FacadeWork& w = work[i];
        const std::int64_t id = w.quad.segment_id;
        const std::string dir = fmt::format("facades/seg_{}", id);
        fs::create_directories(out_dir / dir);

        const auto views = select_views(cameras, w.quad, cfg.view_min_frac);
        const OrthoGrid grid = make_ortho_grid(w.quad, cfg.ortho_gsd);
        std::vector<OrthoLayer> layers;
        std::vector<std::int64_t> view_ids;
        std::vector<double> view_scores;
        for (const auto& v : views) {
          const auto& cam = cameras[v.camera_index];
          const std::int64_t cam_id = ds.cameras[v.camera_index].id;
          OcclusionMasks masks;
          try {
            masks = build_occlusion_masks(cam, occluders[i], cfg);
          } catch (const std::exception& e) {
            throw StageError("masking", fmt::format("segment {} camera {}: {}", id, cam_id, e.what()));
          }
          MaskRecord mr;
          mr.camera_id = cam_id;
          mr.hard_path = fmt::format("masks/seg_{}_cam_{}.pgm", id, cam_id);
          mr.soft_path = fmt::format("masks/seg_{}_cam_{}_soft.pgm", id, cam_id);
          mr.masked_pixels = masks.hard.count();
          write_mask(masks.hard, out_dir / mr.hard_path);
          write_gray(to_gray(masks.soft), out_dir / mr.soft_path);
          w.record.masks.push_back(mr);
          try {
            layers.push_back(rectify_view(cam, images[v.camera_index], masks.hard, masks.soft, grid,
                                          static_cast<std::int64_t>(v.camera_index), v.score));
          } catch (const std::exception& e) {
            throw StageError("texturing", fmt::format("segment {} camera {}: {}", id, cam_id, e.what()));
          }
          view_ids.push_back(cam_id);
          view_scores.push_back(v.score);
        }
        OrthoFrame frame;
        OrthoFrame balanced;
        try {
          frame = mosaic(grid, layers);
          balanced = gray_world_balance(frame);
        } catch (const std::exception& e) {
          throw StageError("texturing", fmt::format("segment {}: {}", id, e.what()));
        }
        FacadeRecord& r = w.record;
        r.views = view_ids;
        r.ortho_pixels = grid.pixel_count();
        r.hole_pixels = frame.hole_count();
        r.ortho_path = dir + "/ortho.ppm";
        r.ortho_raw_path = dir + "/ortho_raw.ppm";
        r.holes_path = dir + "/holes.pgm";
        r.sidecar_path = dir + "/sidecar.txt";
        r.occluders_path = dir + "/occluders.txt";
        r.cluster_path = dir + "/cluster.txt";
        write_image(balanced.color, out_dir / r.ortho_path);
        write_image(frame.color, out_dir / r.ortho_raw_path);
        write_mask(export_hole_map(frame), out_dir / r.holes_path);
        text::write_file(out_dir / r.sidecar_path, ortho_sidecar(grid, view_ids, view_scores, r.hole_pixels));
        text::write_file(out_dir / r.occluders_path, occluders_to_text(occluders[i]));
        text::write_file(out_dir / r.cluster_path, cluster_to_text(clusters[i], ds.points));
      });
    });
    for (auto& w : work) manifest.facades.push_back(std::move(w.record));
    text::write_file(out_dir / "manifest.txt", manifest.to_text());
  } catch (const StageError& e) {
    manifest.status = "failed";
    manifest.failed_stage = e.stage();
    manifest.error = e.what();
    try {
      fs::create_directories(out_dir);
      text::write_file(out_dir / "manifest.txt", manifest.to_text());
    } catch (const std::exception&) {
      // The original stage error is the one worth reporting.
    }
    throw;
  }
  return manifest;
}

DatasetPaths simulate(const fs::path& scene_path, std::uint64_t seed, const fs::path& out_dir) {
  const synth::SceneSpec scene = synth::load_scene(scene_path);
  return synth::write_simulation(scene, seed, out_dir);
}

namespace {

OrthoFrame load_ortho_frame(const fs::path& image, const fs::path& holes, const OrthoGrid& grid) {
  OrthoFrame frame;
  frame.grid = grid;
  frame.color = read_image(image);
  const BinaryMask hole_map = read_mask(holes);
  if (frame.color.width != grid.width || frame.color.height != grid.height || hole_map.width != grid.width ||
      hole_map.height != grid.height) {
    throw std::runtime_error(fmt::format("{}: raster size does not match its sidecar", image.string()));
  }
  frame.valid.resize(grid.pixel_count());
  frame.source.assign(grid.pixel_count(), -1);
  for (std::size_t i = 0; i < frame.valid.size(); ++i) frame.valid[i] = hole_map.bits[i] ? 0 : 1;
  return frame;
}

void require(const fs::path& p) {
  if (!fs::exists(p)) throw std::runtime_error("missing artifact " + p.string());
}

}  // namespace

std::string evaluate(const fs::path& run_dir, const fs::path& truth_dir) {
  const fs::path est_path = run_dir / "quads.txt";
  const fs::path truth_path = truth_dir / "quads.txt";
  require(est_path);
  require(truth_path);
  const auto est = load_quads(est_path);
  const auto truth = load_quads(truth_path);
  const DeviationStats deviation = planimetric_deviation(est, truth);

  const fs::path config_path = run_dir / "config.txt";
  require(config_path);
  const PipelineConfig cfg = load_config(config_path);

  std::optional<synth::SceneSpec> scene;
  if (fs::exists(truth_dir / "scene.txt")) scene = synth::load_scene(truth_dir / "scene.txt");

  std::vector<PointRecord> points;
  std::vector<Point3> sensors;
  std::vector<synth::PointLabel> labels;
  const bool have_labels = fs::exists(truth_dir / "labels.txt");
  if (have_labels) {
    const DatasetPaths inputs = manifest_inputs(run_dir);
    points = load_points(inputs.points);
    for (const auto& [id, f] : load_frames(inputs.frames)) sensors.push_back(f.sensor_pos);
    labels = synth::load_labels(truth_dir / "labels.txt");
    if (labels.size() != points.size()) {
      throw std::runtime_error(fmt::format("labels cover {} points, dataset has {}", labels.size(), points.size()));
    }
  }

  std::vector<FacadeMetrics> metrics;
  for (const auto& q : est) {
    FacadeMetrics m;
    m.segment_id = q.segment_id;
    const fs::path dir = run_dir / "facades" / fmt::format("seg_{}", q.segment_id);
    const fs::path sidecar = dir / "sidecar.txt";
    require(sidecar);
    require(dir / "ortho.ppm");
    require(dir / "ortho_raw.ppm");
    require(dir / "holes.pgm");
    const OrthoGrid grid = load_ortho_sidecar(sidecar);
    RgbImage truth_tex;
    if (scene) {
      truth_tex = synth::truth_texture(*scene, grid);
    } else {
      const fs::path tex = truth_dir / "textures" / fmt::format("seg_{}.ppm", q.segment_id);
      require(tex);
      truth_tex = read_image(tex);
    }
    m.texture = texture_error(load_ortho_frame(dir / "ortho.ppm", dir / "holes.pgm", grid), truth_tex);
    m.texture_mosaic = texture_error(load_ortho_frame(dir / "ortho_raw.ppm", dir / "holes.pgm", grid), truth_tex);

    if (have_labels) {
      require(dir / "occluders.txt");
      const auto t_it = std::find_if(truth.begin(), truth.end(),
                                     [&](const FacadeQuad& t) { return t.segment_id == q.segment_id; });
      const FacadeQuad true_quad = orient_toward(*t_it, sensors);
      const auto truth_idx = true_occluder_indices(points, labels, true_quad, cfg);
      const auto detected = load_occluder_indices(dir / "occluders.txt");
      m.occlusion = occlusion_recall(detected, truth_idx, labels);
    }
    metrics.push_back(m);
  }
  return metrics_table(deviation, metrics);
}

}  // namespace facademap
