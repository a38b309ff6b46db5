#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crosscheck/frame.hpp"
#include "crosscheck/geometry.hpp"

namespace crosscheck {

// Detector corruption parameters. Confusion rows/columns are indexed
// red=0, yellow=1, green=2; each row is a distribution over the reported
// color given a flip, zero on the true color.
struct NoiseConfig {
  double light_flip_p = 0.0;
  std::array<std::array<double, 3>, 3> light_confusion{{
      {0.0, 0.5, 0.5},
      {0.5, 0.0, 0.5},
      {0.5, 0.5, 0.0},
  }};
  bool occlusion_enabled = false;
  double detection_range_m = 60.0;
  double dropout_p = 0.0;
  std::uint64_t seed = 0;
};

std::size_t color_index(LightColor c);

NoiseConfig noise_config_from_json(const std::string& text);
NoiseConfig noise_config_from_file(const std::string& path);
void validate_noise_config(const NoiseConfig& cfg);

// True iff the segment from ego_pos to the target's center crosses the
// interior of any occluder. The target must not be among the occluders.
bool occluded(Vec2 ego_pos, const Rect& target, const std::vector<Rect>& occluders);

// One frame of detector output. Lights are never dropped, only recolored;
// obstacles are dropped when occluded or out of range; non-ego vehicles
// when occluded, out of range, or by dropout. Kept objects carry
// ground-truth geometry. Draw order per frame: one flip draw per light in
// stored order (plus one confusion draw when flipped), then one dropout
// draw per vehicle that survived the deterministic occlusion and range
// checks, in stored order. Obstacles consume no draws.
FrameRecord corrupt_frame(const FrameRecord& gt, const NoiseConfig& cfg, std::mt19937_64& rng);

// Applies corrupt_frame over the whole log with a fresh generator seeded
// from cfg.seed, so equal inputs give byte-identical detection logs.
FrameLog corrupt_log(const FrameLog& gt, const NoiseConfig& cfg);

} // namespace crosscheck
