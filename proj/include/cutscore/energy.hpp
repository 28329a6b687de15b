#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "cutscore/mood.hpp"
#include "cutscore/scene_detect.hpp"

namespace cutscore {

enum class Direction { kUp, kDown };
enum class Slope { kStay, kGradual, kSteep };

std::string_view to_string(Direction d);
std::string_view to_string(Slope s);
Direction parse_direction(std::string_view text);
Slope parse_slope(std::string_view text);

struct DirectionSlope {
  Direction direction = Direction::kUp;
  Slope slope = Slope::kStay;

  friend bool operator==(const DirectionSlope&, const DirectionSlope&) = default;
};

// scene id -> object count (a per-frame mean once aggregated)
using SceneCounts = std::map<std::uint32_t, double>;

// Detections document, either
//   {"per_scene": {"<id>": count, ...}}  or
//   {"per_frame": [{"frame": i, "count": c}, ...]}
// Per-frame records are attributed to scenes through `scenes` and reduced to
// the per-scene mean rounded half up.
SceneCounts parse_detections(std::string_view text, const SceneList& scenes);
SceneCounts load_detections(const std::filesystem::path& path, const SceneList& scenes);

// Population mean/std: below mean-std -> low, at/above mean+std -> high,
// medium otherwise; constant input is all medium. Integral counts are
// classified exactly (no square roots), so affine rescaling with integral
// coefficients never moves a count across a cut point.
std::vector<Energy> classify_energy(std::span<const double> counts);
std::map<std::uint32_t, Energy> classify_energy(const SceneCounts& counts);

// Mood tempo range split into thirds; interior cut points are floored and
// shared by the neighbouring bands.
TempoRange assign_tempo_band(Energy label, const TempoRange& mood_range);
inline TempoRange assign_tempo_band(Energy label, const MoodConfig& mood) {
  return assign_tempo_band(label, mood.tempo_range);
}

// Compares each label with the next one (the last scene compares with itself).
DirectionSlope direction_slope_for(Energy current, Energy next);
std::vector<DirectionSlope> choose_direction_slope(std::span<const Energy> labels);

}  // namespace cutscore
