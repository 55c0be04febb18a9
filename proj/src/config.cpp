#include "facademap/config.hpp"

#include "facademap/text_format.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <variant>

namespace facademap {

namespace {

using Field = std::variant<double PipelineConfig::*, int PipelineConfig::*, bool PipelineConfig::*>;

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"grid_step", &PipelineConfig::grid_step},
      {"neighborhood", &PipelineConfig::neighborhood},
      {"min_cluster_pts", &PipelineConfig::min_cluster_pts},
      {"h_vehicle", &PipelineConfig::h_vehicle},
      {"h_curb", &PipelineConfig::h_curb},
      {"tau_msd", &PipelineConfig::tau_msd},
      {"occ_d_min", &PipelineConfig::occ_d_min},
      {"occ_d_max", &PipelineConfig::occ_d_max},
      {"occ_ground_eps", &PipelineConfig::occ_ground_eps},
      {"occ_extent_margin", &PipelineConfig::occ_extent_margin},
      {"occ_min_pts", &PipelineConfig::occ_min_pts},
      {"dilate_r", &PipelineConfig::dilate_r},
      {"erode_r", &PipelineConfig::erode_r},
      {"feather_w", &PipelineConfig::feather_w},
      {"ortho_gsd", &PipelineConfig::ortho_gsd},
      {"view_min_frac", &PipelineConfig::view_min_frac},
      {"cube_half_edge", &PipelineConfig::cube_half_edge},
      {"cube_dilation_enabled", &PipelineConfig::cube_dilation_enabled},
  };
  return table;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid configuration: ") + what);
}

}  // namespace

void PipelineConfig::validate() const {
  require(grid_step > 0.0, "grid_step must be > 0");
  require(neighborhood > 0.0, "neighborhood must be > 0");
  require(min_cluster_pts > 0, "min_cluster_pts must be > 0");
  require(h_vehicle > 0.0, "h_vehicle must be > 0");
  require(h_curb > 0.0, "h_curb must be > 0");
  require(tau_msd > 0.0, "tau_msd must be > 0");
  require(occ_d_min > 0.0, "occ_d_min must be > 0");
  require(occ_d_max > occ_d_min, "occ_d_max must exceed occ_d_min");
  require(occ_ground_eps > 0.0, "occ_ground_eps must be > 0");
  require(occ_extent_margin > 0.0, "occ_extent_margin must be > 0");
  require(occ_min_pts > 0, "occ_min_pts must be > 0");
  require(dilate_r > 0, "dilate_r must be > 0");
  require(erode_r > 0, "erode_r must be > 0");
  require(erode_r < dilate_r, "erode_r must be smaller than dilate_r");
  require(feather_w >= 0, "feather_w must be >= 0");
  require(ortho_gsd > 0.0, "ortho_gsd must be > 0");
  require(view_min_frac > 0.0 && view_min_frac <= 1.0, "view_min_frac must lie in (0, 1]");
  require(cube_half_edge > 0.0, "cube_half_edge must be > 0");
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const auto& [key, field] : fields()) {
    out += key + " = ";
    std::visit(
        [&](auto member) {
          const auto& value = this->*member;
          using T = std::decay_t<decltype(value)>;
          if constexpr (std::is_same_v<T, double>) {
            out += text::format_double(value);
          } else if constexpr (std::is_same_v<T, bool>) {
            out += value ? "true" : "false";
          } else {
            out += std::to_string(value);
          }
        },
        field);
    out += '\n';
  }
  return out;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto sections = text::parse_sections(path);
  const std::string file = path.string();
  if (sections.size() > 1) throw FormatError(file, sections[1].line, "sections are not allowed in a pipeline config");

  PipelineConfig cfg;
  for (const auto& kv : sections.front().entries) {
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const auto& f) { return f.first == kv.key; });
    if (it == fields().end()) throw FormatError(file, kv.line, "unknown key '" + kv.key + "'");
    try {
      std::visit(
          [&](auto member) {
            auto& target = cfg.*member;
            using T = std::decay_t<decltype(target)>;
            if constexpr (std::is_same_v<T, double>) {
              target = text::parse_double(kv.value);
            } else if constexpr (std::is_same_v<T, bool>) {
              target = text::parse_bool(kv.value);
            } else {
              const auto v = text::parse_int(kv.value);
              if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
                throw std::invalid_argument("integer out of range");
              }
              target = static_cast<int>(v);
            }
          },
          it->second);
    } catch (const std::invalid_argument& e) {
      throw FormatError(file, kv.line, "key '" + kv.key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace facademap
