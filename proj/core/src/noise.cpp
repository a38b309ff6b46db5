#include "crosscheck/noise.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crosscheck/errors.hpp"
#include "json_reader.hpp"

namespace crosscheck {

using nlohmann::json;

std::size_t color_index(LightColor c) {
  switch (c) {
    case LightColor::red: return 0;
    case LightColor::yellow: return 1;
    case LightColor::green: return 2;
  }
  return 0;
}

namespace {

constexpr const char* kColorNames[3] = {"red", "yellow", "green"};
constexpr LightColor kColors[3] = {LightColor::red, LightColor::yellow, LightColor::green};

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

std::array<double, 3> confusion_row(const json& j, std::size_t true_idx, const std::string& ctx) {
  detail::ObjectReader r(j, ctx);
  std::array<double, 3> row{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < 3; ++i) {
    if (const json* v = r.optional(kColorNames[i])) {
      if (!v->is_number()) throw ConfigError(ctx + ": field '" + kColorNames[i] + "' must be a number");
      row[i] = v->get<double>();
    }
  }
  r.finish();
  if (row[true_idx] != 0.0)
    throw ConfigError(ctx + ": probability of reporting the true color must be 0");
  double sum = 0.0;
  for (double p : row) {
    if (p < 0.0 || p > 1.0) throw ConfigError(ctx + ": probabilities must be in [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError(ctx + ": probabilities must sum to 1");
  return row;
}

void check_p(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError(std::string("noise config: field '") + field + "' must be in [0, 1]");
}

} // namespace

NoiseConfig noise_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("noise config: invalid JSON: ") + e.what());
  }

  NoiseConfig cfg;
  detail::ObjectReader top(j, "noise config");
  cfg.light_flip_p = top.number_or("light_flip_p", 0.0);
  if (const json* conf = top.optional("light_confusion")) {
    detail::ObjectReader rows(*conf, "light_confusion");
    for (std::size_t i = 0; i < 3; ++i) {
      if (const json* row = rows.optional(kColorNames[i]))
        cfg.light_confusion[i] = confusion_row(*row, i, std::string("light_confusion.") + kColorNames[i]);
    }
    rows.finish();
  }
  cfg.occlusion_enabled = top.boolean_or("occlusion_enabled", false);
  cfg.detection_range_m = top.number_or("detection_range_m", 60.0);
  cfg.dropout_p = top.number_or("dropout_p", 0.0);
  cfg.seed = top.uinteger_or("seed", 0);
  top.finish();

  validate_noise_config(cfg);
  return cfg;
}

NoiseConfig noise_config_from_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open noise config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return noise_config_from_json(ss.str());
}

void validate_noise_config(const NoiseConfig& cfg) {
  check_p(cfg.light_flip_p, "light_flip_p");
  check_p(cfg.dropout_p, "dropout_p");
  if (!(cfg.detection_range_m > 0))
    throw ConfigError("noise config: field 'detection_range_m' must be > 0");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = cfg.light_confusion[i];
    if (row[i] != 0.0)
      throw ConfigError("noise config: light_confusion diagonal must be 0");
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0 || p > 1.0) throw ConfigError("noise config: light_confusion entries must be in [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("noise config: light_confusion rows must sum to 1");
  }
}

bool occluded(Vec2 ego_pos, const Rect& target, const std::vector<Rect>& occluders) {
  Vec2 center = target.center();
  for (const Rect& r : occluders)
    if (segment_intersects_interior(ego_pos, center, r)) return true;
  return false;
}

namespace {

LightColor draw_confused_color(const NoiseConfig& cfg, LightColor true_color, double u) {
  const auto& row = cfg.light_confusion[color_index(true_color)];
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    acc += row[i];
    if (u < acc) return kColors[i];
  }
  for (std::size_t i = 3; i-- > 0;)
    if (row[i] > 0.0) return kColors[i];
  return true_color;
}

} // namespace

FrameRecord corrupt_frame(const FrameRecord& gt, const NoiseConfig& cfg, std::mt19937_64& rng) {
  FrameRecord out = gt;

  for (LightState& light : out.lights) {
    double u = uniform01(rng);
    if (u < cfg.light_flip_p) light.color = draw_confused_color(cfg, light.color, uniform01(rng));
  }

  Vec2 ego_pos{gt.ego.x, gt.ego.y};
  std::vector<Rect> vehicle_boxes;
  vehicle_boxes.reserve(gt.vehicles.size());
  for (const VehicleState& v : gt.vehicles) vehicle_boxes.push_back(v.bbox);

  out.vehicles.clear();
  for (std::size_t i = 0; i < gt.vehicles.size(); ++i) {
    const VehicleState& v = gt.vehicles[i];
    if (cfg.occlusion_enabled) {
      std::vector<Rect> others;
      others.reserve(vehicle_boxes.size() - 1);
      for (std::size_t k = 0; k < vehicle_boxes.size(); ++k)
        if (k != i) others.push_back(vehicle_boxes[k]);
      if (occluded(ego_pos, v.bbox, others)) continue;
    }
    if (norm(v.bbox.center() - ego_pos) > cfg.detection_range_m) continue;
    if (uniform01(rng) < cfg.dropout_p) continue;
    out.vehicles.push_back(v);
  }

  out.obstacles.clear();
  for (const ObstacleState& o : gt.obstacles) {
    if (cfg.occlusion_enabled && occluded(ego_pos, o.bbox, vehicle_boxes)) continue;
    if (norm(o.bbox.center() - ego_pos) > cfg.detection_range_m) continue;
    out.obstacles.push_back(o);
  }

  return out;
}

FrameLog corrupt_log(const FrameLog& gt, const NoiseConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  FrameLog out;
  out.reserve(gt.size());
  for (const FrameRecord& rec : gt) out.push_back(corrupt_frame(rec, cfg, rng));
  return out;
}

} // namespace crosscheck
