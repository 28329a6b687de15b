#include "cutscore/scene_detect.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "cutscore/error.hpp"

namespace cutscore {

using nlohmann::json;

void DetectorConfig::validate() const {
  if (!(fade_threshold > 0.0 && fade_threshold < 255.0)) {
    throw Error(ErrorCode::kInvalidConfig, "fade_threshold must lie in (0, 255)");
  }
  if (!(cut_threshold > 0.0 && cut_threshold < 255.0)) {
    throw Error(ErrorCode::kInvalidConfig, "cut_threshold must lie in (0, 255)");
  }
  if (min_scene_frames < 1) throw Error(ErrorCode::kInvalidConfig, "min_scene_frames must be >= 1");
  if (!(merge_tolerance_s >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "merge_tolerance_s must be >= 0");
  }
}

std::string_view to_string(OpenKind kind) {
  switch (kind) {
    case OpenKind::kStartOfVideo: return "start-of-video";
    case OpenKind::kCut: return "cut";
    case OpenKind::kFadeIn: return "fade-in";
  }
  return "?";
}

std::string_view to_string(CloseKind kind) {
  switch (kind) {
    case CloseKind::kEndOfVideo: return "end-of-video";
    case CloseKind::kCut: return "cut";
    case CloseKind::kFadeOut: return "fade-out";
  }
  return "?";
}

TransitionDetector::TransitionDetector(const DetectorConfig& config) : config_(config) {
  config_.validate();
}

void TransitionDetector::push(const FrameStats& stats) {
  const bool dark = stats.avg_intensity < config_.fade_threshold;

  if (have_prev_ && stats.index >= 1 && stats.hsv_delta &&
      *stats.hsv_delta >= config_.cut_threshold && !dark &&
      !(prev_intensity_ < config_.fade_threshold)) {
    if (cuts_.empty() || stats.index - cuts_.back() >= config_.min_scene_frames) {
      cuts_.push_back(stats.index);
    }
  }

  if (!in_fade_ && dark) {
    in_fade_ = true;
    fade_start_ = stats.index;
  } else if (in_fade_ && !dark) {
    fades_.push_back({fade_start_, stats.index});
    in_fade_ = false;
  }

  have_prev_ = true;
  prev_intensity_ = stats.avg_intensity;
  last_index_ = stats.index;
}

void TransitionDetector::finish() {
  if (finished_) return;
  finished_ = true;
  if (in_fade_) {
    fades_.push_back({fade_start_, last_index_});
    in_fade_ = false;
  }
}

std::vector<std::uint64_t> detect_cuts(std::span<const FrameStats> stats,
                                       const DetectorConfig& config) {
  TransitionDetector detector(config);
  for (const FrameStats& s : stats) detector.push(s);
  detector.finish();
  return detector.cuts();
}

std::vector<FadeInterval> detect_fades(std::span<const FrameStats> stats,
                                       const DetectorConfig& config) {
  TransitionDetector detector(config);
  for (const FrameStats& s : stats) detector.push(s);
  detector.finish();
  return detector.fades();
}

namespace {

struct Boundary {
  std::uint64_t frame;
  bool fade;
};

}  // namespace

std::vector<Scene> merge_scene_lists(std::span<const std::uint64_t> cuts,
                                     std::span<const FadeInterval> fades,
                                     std::uint64_t total_frames, const Fps& fps,
                                     const DetectorConfig& config) {
  if (total_frames == 0) throw Error(ErrorCode::kEmptyVideo, "video has no frames");
  config.validate();

  std::vector<Boundary> candidates;
  candidates.reserve(cuts.size() + fades.size());
  for (std::uint64_t c : cuts) candidates.push_back({c, false});
  for (const FadeInterval& f : fades) {
    candidates.push_back({(f.start_frame + f.end_frame) / 2, true});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Boundary& a, const Boundary& b) {
    return a.frame != b.frame ? a.frame < b.frame : (a.fade && !b.fade);
  });

  const double period = fps.frame_period_s();
  std::vector<Boundary> coalesced;
  for (const Boundary& b : candidates) {
    if (b.frame == 0 || b.frame >= total_frames) continue;
    if (!coalesced.empty() &&
        static_cast<double>(b.frame - coalesced.back().frame) * period <=
            config.merge_tolerance_s) {
      continue;
    }
    coalesced.push_back(b);
  }

  std::vector<Boundary> kept;
  std::uint64_t prev = 0;
  for (const Boundary& b : coalesced) {
    if (b.frame - prev < config.min_scene_frames) continue;
    kept.push_back(b);
    prev = b.frame;
  }

  std::vector<Scene> scenes;
  scenes.reserve(kept.size() + 1);
  Scene current;
  current.start_frame = 0;
  current.opens_with = OpenKind::kStartOfVideo;
  for (const Boundary& b : kept) {
    current.end_frame = b.frame;
    current.closes_with = b.fade ? CloseKind::kFadeOut : CloseKind::kCut;
    scenes.push_back(current);
    current = Scene{};
    current.start_frame = b.frame;
    current.opens_with = b.fade ? OpenKind::kFadeIn : OpenKind::kCut;
  }
  current.end_frame = total_frames;
  current.closes_with = CloseKind::kEndOfVideo;
  scenes.push_back(current);

  for (std::size_t i = 0; i < scenes.size(); ++i) {
    scenes[i].id = static_cast<std::uint32_t>(i);
    scenes[i].start_s = fps.seconds_at(scenes[i].start_frame);
    scenes[i].end_s = fps.seconds_at(scenes[i].end_frame);
  }
  return scenes;
}

std::vector<Scene> detect_scenes(std::span<const FrameStats> stats, const Fps& fps,
                                 const DetectorConfig& config) {
  TransitionDetector detector(config);
  for (const FrameStats& s : stats) detector.push(s);
  detector.finish();
  return merge_scene_lists(detector.cuts(), detector.fades(), stats.size(), fps, config);
}

void validate_scene_list(const SceneList& list) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::kParseError, what); };
  if (list.fps.num == 0 || list.fps.den == 0) fail("fps terms must be positive");
  if (list.total_frames == 0) throw Error(ErrorCode::kEmptyVideo, "scene list covers no frames");
  if (list.scenes.empty()) fail("scene list is empty");
  std::uint64_t expect = 0;
  for (std::size_t i = 0; i < list.scenes.size(); ++i) {
    const Scene& s = list.scenes[i];
    if (s.id != i) fail("scene ids must be consecutive from 0 (saw " + std::to_string(s.id) + ")");
    if (s.start_frame != expect) fail("scene " + std::to_string(i) + " leaves a gap or overlap");
    if (s.end_frame <= s.start_frame) fail("scene " + std::to_string(i) + " is empty");
    expect = s.end_frame;
  }
  if (expect != list.total_frames) fail("scenes do not reach total_frames");
  if (list.scenes.front().opens_with != OpenKind::kStartOfVideo) {
    fail("first scene must open with start-of-video");
  }
  if (list.scenes.back().closes_with != CloseKind::kEndOfVideo) {
    fail("last scene must close with end-of-video");
  }
}

namespace {

double to_ms_precision(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

OpenKind parse_open(const std::string& s) {
  if (s == "start-of-video") return OpenKind::kStartOfVideo;
  if (s == "cut") return OpenKind::kCut;
  if (s == "fade-in") return OpenKind::kFadeIn;
  throw Error(ErrorCode::kParseError, "unknown opens_with value: " + s);
}

CloseKind parse_close(const std::string& s) {
  if (s == "end-of-video") return CloseKind::kEndOfVideo;
  if (s == "cut") return CloseKind::kCut;
  if (s == "fade-out") return CloseKind::kFadeOut;
  throw Error(ErrorCode::kParseError, "unknown closes_with value: " + s);
}

}  // namespace

std::string scenes_to_json(const SceneList& list) {
  json doc;
  doc["fps"] = {list.fps.num, list.fps.den};
  doc["total_frames"] = list.total_frames;
  json scenes = json::array();
  for (const Scene& s : list.scenes) {
    scenes.push_back({{"id", s.id},
                      {"start_frame", s.start_frame},
                      {"end_frame", s.end_frame},
                      {"start_s", to_ms_precision(s.start_s)},
                      {"end_s", to_ms_precision(s.end_s)},
                      {"opens_with", std::string(to_string(s.opens_with))},
                      {"closes_with", std::string(to_string(s.closes_with))}});
  }
  doc["scenes"] = std::move(scenes);
  return doc.dump(2) + "\n";
}

SceneList parse_scenes_json(std::string_view text) {
  SceneList list;
  try {
    const json doc = json::parse(text);
    const auto& fps = doc.at("fps");
    if (!fps.is_array() || fps.size() != 2) {
      throw Error(ErrorCode::kParseError, "fps must be [num, den]");
    }
    list.fps = {fps[0].get<std::uint32_t>(), fps[1].get<std::uint32_t>()};
    list.total_frames = doc.at("total_frames").get<std::uint64_t>();
    for (const auto& item : doc.at("scenes")) {
      Scene s;
      s.id = item.at("id").get<std::uint32_t>();
      s.start_frame = item.at("start_frame").get<std::uint64_t>();
      s.end_frame = item.at("end_frame").get<std::uint64_t>();
      s.opens_with = parse_open(item.at("opens_with").get<std::string>());
      s.closes_with = parse_close(item.at("closes_with").get<std::string>());
      const double start_s = item.at("start_s").get<double>();
      const double end_s = item.at("end_s").get<double>();
      if (list.fps.num == 0 || list.fps.den == 0) {
        throw Error(ErrorCode::kParseError, "fps terms must be positive");
      }
      s.start_s = list.fps.seconds_at(s.start_frame);
      s.end_s = list.fps.seconds_at(s.end_frame);
      if (std::abs(start_s - s.start_s) > 0.0015 || std::abs(end_s - s.end_s) > 0.0015) {
        throw Error(ErrorCode::kParseError, "scene " + std::to_string(s.id) +
                                                " times disagree with its frame range");
      }
      list.scenes.push_back(s);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("scenes document: ") + e.what());
  }
  validate_scene_list(list);
  return list;
}

}  // namespace cutscore
