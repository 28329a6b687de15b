#pragma once

// Synthetic inputs shared by unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cutscore/frame.hpp"
#include "cutscore/mood.hpp"
#include "cutscore/scene_detect.hpp"

namespace cutscore::testing {

// Unique directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct Color {
  std::uint8_t r, g, b;
};

// How a shot ends. Fades ramp the shot down, hold `black_frames` all-black
// frames, and ramp the next shot up; the ramp frames stay well above the
// default fade threshold.
enum class Transition { kCut, kFade };

struct Shot {
  std::uint32_t frames = 0;
  Color color{128, 128, 128};
  Transition into_next = Transition::kCut;
  std::uint32_t black_frames = 6;
};

inline constexpr double kRampLevels[] = {0.75, 0.5, 0.3, 0.15};
inline constexpr std::uint32_t kRampFrames = 4;

// Ground truth derived from how the video was built.
struct VideoTruth {
  std::uint64_t total_frames = 0;
  std::vector<std::uint64_t> cuts;         // first frame of the new shot
  std::vector<FadeInterval> fades;         // [first black, first non-black)
  std::vector<std::uint64_t> boundaries;   // cuts and floor fade midpoints, sorted
};

// Frames are generated on demand so long fixtures never sit in memory.
class SyntheticVideo {
 public:
  SyntheticVideo(FrameSpec spec, std::vector<Shot> shots);

  const FrameSpec& spec() const { return spec_; }
  const VideoTruth& truth() const { return truth_; }
  std::uint64_t frame_count() const { return truth_.total_frames; }

  Frame frame(std::uint64_t index) const;

  // <dir>/<name>.rgb24 plus <dir>/<name>.hdr; returns the stream path.
  std::filesystem::path write_raw(const std::filesystem::path& dir, const std::string& name) const;

 private:
  struct Span {
    std::uint64_t start;
    std::uint64_t end;
    std::size_t shot;
  };

  FrameSpec spec_;
  std::vector<Shot> shots_;
  std::vector<Span> spans_;  // content frames of each shot including its ramps
  VideoTruth truth_;
};

// FrameSource over a SyntheticVideo.
class SyntheticSource : public FrameSource {
 public:
  explicit SyntheticSource(const SyntheticVideo& video) : video_(video) {}
  const FrameSpec& spec() const override { return video_.spec(); }
  std::uint64_t frame_count() const override { return video_.frame_count(); }
  std::optional<Frame> next() override;

 private:
  const SyntheticVideo& video_;
  std::uint64_t next_ = 0;
};

// Alternates vivid and muted colors of opposed hue so every shot change is
// a large HSV jump.
Color palette_color(std::size_t shot_index);

// Random shots of [min_frames, max_frames] frames with random transitions.
std::vector<Shot> random_shots(std::mt19937_64& rng, std::size_t count, std::uint32_t min_frames,
                               std::uint32_t max_frames, double fade_probability);

Frame solid_frame(std::uint32_t width, std::uint32_t height, Color c, std::uint64_t index = 0);

// Small mood used by fixture plans.
MoodConfig test_mood();

}  // namespace cutscore::testing
