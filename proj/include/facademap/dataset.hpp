#pragma once

#include "facademap/geometry.hpp"
#include "facademap/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace facademap {

/// A laser return and the sweep (frame) that produced it.
struct PointRecord {
  Point3 point = Point3::Zero();
  std::int64_t frame_id = 0;
};

/// Sensor position for one vertical sweep.
struct LaserFrame {
  std::int64_t frame_id = 0;
  Point3 sensor_pos = Point3::Zero();
};

struct CameraEntry {
  std::int64_t id = 0;
  PinholeCamera camera;
  /// Resolved image path (relative paths in the camera file are taken
  /// relative to the camera file's directory).
  std::filesystem::path image_path;
  /// Path exactly as written in the camera file.
  std::string image_ref;
};

using FrameTable = std::map<std::int64_t, LaserFrame>;

struct Dataset {
  std::vector<PointRecord> points;
  FrameTable frames;
  std::vector<Segment2> cadastre;
  std::vector<CameraEntry> cameras;
};

class IntegrityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DatasetPaths {
  std::filesystem::path points;
  std::filesystem::path frames;
  std::filesystem::path cadastre;
  std::filesystem::path cameras;

  /// points.txt, frames.txt, cadastre.txt, cameras.txt under `dir`.
  static DatasetPaths in_directory(const std::filesystem::path& dir);
};

// Line formats (whitespace separated, '#' starts a comment):
//   points    x y z frame_id
//   frames    frame_id x y z
//   cadastre  id x1 y1 x2 y2
//   cameras   cam_id image_path fx fy cx cy width height r11 .. r33 tx ty tz
std::vector<PointRecord> load_points(const std::filesystem::path& path);
FrameTable load_frames(const std::filesystem::path& path);
std::vector<Segment2> load_cadastre(const std::filesystem::path& path);
std::vector<CameraEntry> load_cameras(const std::filesystem::path& path);

/// Parses and cross-references all four files. Camera images are checked for
/// existence and a readable PPM header.
Dataset load_dataset(const DatasetPaths& paths);

void write_points(const std::filesystem::path& path, const std::vector<PointRecord>& points);
void write_frames(const std::filesystem::path& path, const FrameTable& frames);
void write_cadastre(const std::filesystem::path& path, const std::vector<Segment2>& segments);
void write_cameras(const std::filesystem::path& path, const std::vector<CameraEntry>& cameras);

/// Binary PPM (P6, maxval 255).
RgbImage read_image(const std::filesystem::path& path);
void write_image(const RgbImage& image, const std::filesystem::path& path);
/// Binary PGM (P5, maxval 255).
GrayImage read_gray(const std::filesystem::path& path);
void write_gray(const GrayImage& image, const std::filesystem::path& path);
/// Masks as P5 with 0 = clear and 255 = set.
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask read_mask(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_ppm(const RgbImage& image);
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);

}  // namespace facademap
