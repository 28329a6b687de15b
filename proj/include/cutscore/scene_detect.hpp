#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cutscore/frame.hpp"

namespace cutscore {

struct DetectorConfig {
  double fade_threshold = 12.0;  // on mean intensity, 0..255
  double cut_threshold = 30.0;   // on HSV content delta, 0..255
  std::uint32_t min_scene_frames = 15;
  double merge_tolerance_s = 0.1;

  void validate() const;
};

enum class OpenKind { kStartOfVideo, kCut, kFadeIn };
enum class CloseKind { kEndOfVideo, kCut, kFadeOut };

std::string_view to_string(OpenKind kind);
std::string_view to_string(CloseKind kind);

struct Scene {
  std::uint32_t id = 0;
  std::uint64_t start_frame = 0;
  std::uint64_t end_frame = 0;  // exclusive
  double start_s = 0.0;
  double end_s = 0.0;
  OpenKind opens_with = OpenKind::kStartOfVideo;
  CloseKind closes_with = CloseKind::kEndOfVideo;

  std::uint64_t frame_count() const { return end_frame - start_frame; }
  double duration_s() const { return end_s - start_s; }

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct FadeInterval {
  std::uint64_t start_frame = 0;  // first frame below the fade threshold
  std::uint64_t end_frame = 0;    // first frame back at/above it (or last frame)

  friend bool operator==(const FadeInterval&, const FadeInterval&) = default;
};

// One pass over the statistics stream evaluating both thresholds.
//
// A frame pair where either side is darker than the fade threshold is never
// reported as a cut: the fade detector owns that transition (hue and
// saturation collapse to zero at black, which would otherwise read as a
// hard cut on every fade).
class TransitionDetector {
 public:
  explicit TransitionDetector(const DetectorConfig& config);

  void push(const FrameStats& stats);
  // Closes an unterminated fade at the last pushed frame.
  void finish();

  const std::vector<std::uint64_t>& cuts() const { return cuts_; }
  const std::vector<FadeInterval>& fades() const { return fades_; }

 private:
  DetectorConfig config_;
  std::vector<std::uint64_t> cuts_;
  std::vector<FadeInterval> fades_;
  bool have_prev_ = false;
  double prev_intensity_ = 0.0;
  std::uint64_t last_index_ = 0;
  bool in_fade_ = false;
  std::uint64_t fade_start_ = 0;
  bool finished_ = false;
};

std::vector<std::uint64_t> detect_cuts(std::span<const FrameStats> stats,
                                       const DetectorConfig& config);
std::vector<FadeInterval> detect_fades(std::span<const FrameStats> stats,
                                       const DetectorConfig& config);

// Boundaries: cuts plus the floor midpoint of each fade. Candidates closer
// than merge_tolerance_s coalesce onto the earliest (a fade wins a tie at
// the same frame); a boundary closer than min_scene_frames to the previous
// kept boundary (or to frame 0) is dropped. Throws kEmptyVideo when
// total_frames is 0.
std::vector<Scene> merge_scene_lists(std::span<const std::uint64_t> cuts,
                                     std::span<const FadeInterval> fades,
                                     std::uint64_t total_frames, const Fps& fps,
                                     const DetectorConfig& config);

std::vector<Scene> detect_scenes(std::span<const FrameStats> stats, const Fps& fps,
                                 const DetectorConfig& config);

struct SceneList {
  Fps fps;
  std::uint64_t total_frames = 0;
  std::vector<Scene> scenes;

  friend bool operator==(const SceneList&, const SceneList&) = default;
};

// Throws kParseError unless the scenes tile [0, total_frames) in id order.
void validate_scene_list(const SceneList& list);

std::string scenes_to_json(const SceneList& list);
// Times are recomputed from frame numbers and fps; the millisecond values in
// the document must agree with them.
SceneList parse_scenes_json(std::string_view text);

}  // namespace cutscore
