#include "facademap/dataset.hpp"

#include "facademap/text_format.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

namespace facademap {

namespace fs = std::filesystem;
using text::format_double;

DatasetPaths DatasetPaths::in_directory(const fs::path& dir) {
  return {dir / "points.txt", dir / "frames.txt", dir / "cadastre.txt", dir / "cameras.txt"};
}

namespace {

/// Calls `fn(tokens, lineno)` for each non-blank, non-comment line and turns
/// parse failures into FormatError with the file and line.
template <typename Fn>
void for_each_record(const fs::path& path, std::size_t expected_fields, Fn&& fn) {
  const auto lines = text::read_lines(path);
  const std::string file = path.string();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = text::split_ws(text::strip_comment(lines[i]));
    if (tokens.empty()) continue;
    if (tokens.size() != expected_fields) {
      throw FormatError(file, i + 1,
                        fmt::format("expected {} fields, found {}", expected_fields, tokens.size()));
    }
    try {
      fn(tokens, i + 1);
    } catch (const std::invalid_argument& e) {
      throw FormatError(file, i + 1, e.what());
    } catch (const GeometryError& e) {
      throw FormatError(file, i + 1, e.what());
    }
  }
}

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

PnmHeader read_pnm_header(std::istream& in, const std::string& file) {
  PnmHeader h;
  auto next_token = [&]() {
    std::string tok;
    char c = 0;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(c);
    }
    if (tok.empty()) throw FormatError(file + ": truncated PNM header");
    return tok;
  };
  h.magic = next_token();
  try {
    h.width = static_cast<int>(text::parse_int(next_token()));
    h.height = static_cast<int>(text::parse_int(next_token()));
    h.maxval = static_cast<int>(text::parse_int(next_token()));
  } catch (const std::invalid_argument& e) {
    throw FormatError(file + ": bad PNM header: " + e.what());
  }
  if (h.width <= 0 || h.height <= 0) throw FormatError(file + ": PNM dimensions must be positive");
  return h;
}

std::vector<std::uint8_t> read_pnm(const fs::path& path, const char* magic, std::size_t channels, int& w, int& h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const auto header = read_pnm_header(in, path.string());
  if (header.magic != magic) {
    throw FormatError(path.string() + ": expected " + magic + " image, found '" + header.magic + "'");
  }
  if (header.maxval != 255) throw FormatError(path.string() + ": only maxval 255 is supported");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(header.width) * header.height * channels);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) {
    throw FormatError(path.string() + ": truncated pixel data");
  }
  w = header.width;
  h = header.height;
  return data;
}

std::vector<std::uint8_t> encode_pnm(const char* magic, int w, int h, const std::vector<std::uint8_t>& data) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("cannot encode an empty raster");
  const std::string header = fmt::format("{}\n{} {}\n255\n", magic, w, h);
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  text::write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace

std::vector<PointRecord> load_points(const fs::path& path) {
  std::vector<PointRecord> out;
  for_each_record(path, 4, [&](const auto& tok, std::size_t) {
    PointRecord r;
    r.point = Point3(text::parse_double(tok[0]), text::parse_double(tok[1]), text::parse_double(tok[2]));
    r.frame_id = text::parse_int(tok[3]);
    if (r.frame_id < 0) throw std::invalid_argument("frame_id must be non-negative");
    out.push_back(r);
  });
  return out;
}

FrameTable load_frames(const fs::path& path) {
  FrameTable out;
  for_each_record(path, 4, [&](const auto& tok, std::size_t) {
    LaserFrame f;
    f.frame_id = text::parse_int(tok[0]);
    if (f.frame_id < 0) throw std::invalid_argument("frame_id must be non-negative");
    f.sensor_pos = Point3(text::parse_double(tok[1]), text::parse_double(tok[2]), text::parse_double(tok[3]));
    if (!out.emplace(f.frame_id, f).second) {
      throw std::invalid_argument("duplicate frame_id " + std::to_string(f.frame_id));
    }
  });
  return out;
}

std::vector<Segment2> load_cadastre(const fs::path& path) {
  std::vector<Segment2> out;
  std::set<std::int64_t> ids;
  for_each_record(path, 5, [&](const auto& tok, std::size_t) {
    const auto id = text::parse_int(tok[0]);
    if (!ids.insert(id).second) throw std::invalid_argument("duplicate segment id " + std::to_string(id));
    out.emplace_back(id, Point2(text::parse_double(tok[1]), text::parse_double(tok[2])),
                     Point2(text::parse_double(tok[3]), text::parse_double(tok[4])));
  });
  return out;
}

std::vector<CameraEntry> load_cameras(const fs::path& path) {
  std::vector<CameraEntry> out;
  std::set<std::int64_t> ids;
  const fs::path base = path.parent_path();
  for_each_record(path, 20, [&](const auto& tok, std::size_t) {
    CameraEntry e;
    e.id = text::parse_int(tok[0]);
    if (!ids.insert(e.id).second) throw std::invalid_argument("duplicate camera id " + std::to_string(e.id));
    e.image_ref = std::string(tok[1]);
    const fs::path ref(e.image_ref);
    e.image_path = ref.is_absolute() ? ref : base / ref;
    auto& cam = e.camera;
    cam.fx = text::parse_double(tok[2]);
    cam.fy = text::parse_double(tok[3]);
    cam.cx = text::parse_double(tok[4]);
    cam.cy = text::parse_double(tok[5]);
    cam.width = static_cast<int>(text::parse_int(tok[6]));
    cam.height = static_cast<int>(text::parse_int(tok[7]));
    Matrix3 r;
    for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = text::parse_double(tok[8 + k]);
    const Point3 t(text::parse_double(tok[17]), text::parse_double(tok[18]), text::parse_double(tok[19]));
    cam.pose = RigidPose(r, t, 1e-6);
    cam.validate();
    out.push_back(std::move(e));
  });
  return out;
}

Dataset load_dataset(const DatasetPaths& paths) {
  Dataset ds;
  ds.frames = load_frames(paths.frames);
  ds.points = load_points(paths.points);
  ds.cadastre = load_cadastre(paths.cadastre);
  ds.cameras = load_cameras(paths.cameras);

  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    if (!ds.frames.count(ds.points[i].frame_id)) {
      throw IntegrityError(fmt::format("{}: point {} references unknown frame {}", paths.points.string(), i + 1,
                                       ds.points[i].frame_id));
    }
  }
  for (const auto& cam : ds.cameras) {
    const RgbImage img = read_image(cam.image_path);
    if (img.width != cam.camera.width || img.height != cam.camera.height) {
      throw IntegrityError(fmt::format("camera {}: image {} is {}x{}, expected {}x{}", cam.id,
                                       cam.image_path.string(), img.width, img.height, cam.camera.width,
                                       cam.camera.height));
    }
  }
  return ds;
}

void write_points(const fs::path& path, const std::vector<PointRecord>& points) {
  std::string out;
  out.reserve(points.size() * 48);
  for (const auto& p : points) {
    out += fmt::format("{} {} {} {}\n", p.point.x(), p.point.y(), p.point.z(), p.frame_id);
  }
  text::write_file(path, out);
}

void write_frames(const fs::path& path, const FrameTable& frames) {
  std::string out;
  for (const auto& [id, f] : frames) {
    out += fmt::format("{} {} {} {}\n", id, f.sensor_pos.x(), f.sensor_pos.y(), f.sensor_pos.z());
  }
  text::write_file(path, out);
}

void write_cadastre(const fs::path& path, const std::vector<Segment2>& segments) {
  std::string out;
  for (const auto& s : segments) {
    out += fmt::format("{} {} {} {} {}\n", s.id, s.p1.x(), s.p1.y(), s.p2.x(), s.p2.y());
  }
  text::write_file(path, out);
}

void write_cameras(const fs::path& path, const std::vector<CameraEntry>& cameras) {
  std::string out;
  for (const auto& e : cameras) {
    const auto& c = e.camera;
    out += fmt::format("{} {} {} {} {} {} {} {}", e.id, e.image_ref, c.fx, c.fy, c.cx, c.cy, c.width, c.height);
    for (int k = 0; k < 9; ++k) out += " " + format_double(c.pose.rotation(k / 3, k % 3));
    const auto& t = c.pose.translation;
    out += fmt::format(" {} {} {}\n", t.x(), t.y(), t.z());
  }
  text::write_file(path, out);
}

RgbImage read_image(const fs::path& path) {
  RgbImage img;
  img.data = read_pnm(path, "P6", 3, img.width, img.height);
  return img;
}

GrayImage read_gray(const fs::path& path) {
  GrayImage img;
  img.data = read_pnm(path, "P5", 1, img.width, img.height);
  return img;
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& image) {
  return encode_pnm("P6", image.width, image.height, image.data);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  return encode_pnm("P5", image.width, image.height, image.data);
}

void write_image(const RgbImage& image, const fs::path& path) { write_bytes(path, encode_ppm(image)); }

void write_gray(const GrayImage& image, const fs::path& path) { write_bytes(path, encode_pgm(image)); }

void write_mask(const BinaryMask& mask, const fs::path& path) { write_gray(to_gray(mask), path); }

BinaryMask read_mask(const fs::path& path) { return from_gray(read_gray(path)); }

}  // namespace facademap
