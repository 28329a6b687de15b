#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <unistd.h>

namespace cutscore::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("cutscore_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

SyntheticVideo::SyntheticVideo(FrameSpec spec, std::vector<Shot> shots)
    : spec_(spec), shots_(std::move(shots)) {
  std::uint64_t at = 0;
  for (std::size_t i = 0; i < shots_.size(); ++i) {
    const Shot& s = shots_[i];
    const bool fade_in = i > 0 && shots_[i - 1].into_next == Transition::kFade;
    const bool fade_out = i + 1 < shots_.size() && s.into_next == Transition::kFade;
    if (s.frames < (fade_in ? kRampFrames : 0) + (fade_out ? kRampFrames : 0) + 1) {
      throw std::invalid_argument("shot too short for its ramps");
    }
    if (i > 0 && !fade_in) {
      truth_.cuts.push_back(at);
      truth_.boundaries.push_back(at);
    }
    spans_.push_back({at, at + s.frames, i});
    at += s.frames;
    if (fade_out) {
      const FadeInterval f{at, at + s.black_frames};
      truth_.fades.push_back(f);
      truth_.boundaries.push_back((f.start_frame + f.end_frame) / 2);
      at += s.black_frames;
    }
  }
  truth_.total_frames = at;
}

Frame SyntheticVideo::frame(std::uint64_t index) const {
  Frame f;
  f.index = index;
  f.width = spec_.width;
  f.height = spec_.height;
  f.pixels.assign(spec_.frame_bytes(), 0);
  const auto it = std::find_if(spans_.begin(), spans_.end(),
                               [&](const Span& s) { return index >= s.start && index < s.end; });
  if (it == spans_.end()) return f;  // black hold inside a fade

  const std::size_t i = it->shot;
  const Shot& shot = shots_[i];
  const std::uint64_t local = index - it->start;
  double level = 1.0;
  const bool fade_in = i > 0 && shots_[i - 1].into_next == Transition::kFade;
  const bool fade_out = i + 1 < shots_.size() && shot.into_next == Transition::kFade;
  if (fade_in && local < kRampFrames) level = kRampLevels[kRampFrames - 1 - local];
  const std::uint64_t from_end = it->end - 1 - index;
  if (fade_out && from_end < kRampFrames) level = kRampLevels[kRampFrames - 1 - from_end];

  const std::uint32_t w = spec_.width;
  std::vector<std::uint8_t> row(3 * std::size_t{w});
  for (std::uint32_t x = 0; x < w; ++x) {
    // Slow horizontal drift so consecutive frames differ slightly.
    const double factor = 0.9 + 0.1 * static_cast<double>((x + 2 * index) % w) / w;
    const double k = level * factor;
    row[3 * x] = static_cast<std::uint8_t>(std::lround(shot.color.r * k));
    row[3 * x + 1] = static_cast<std::uint8_t>(std::lround(shot.color.g * k));
    row[3 * x + 2] = static_cast<std::uint8_t>(std::lround(shot.color.b * k));
  }
  for (std::uint32_t y = 0; y < spec_.height; ++y) {
    std::copy(row.begin(), row.end(), f.pixels.begin() + static_cast<std::ptrdiff_t>(y * row.size()));
  }
  return f;
}

fs::path SyntheticVideo::write_raw(const fs::path& dir, const std::string& name) const {
  const fs::path stream = dir / (name + ".rgb24");
  {
    std::ofstream hdr(dir / (name + ".hdr"));
    hdr << format_stream_header(spec_);
  }
  std::ofstream out(stream, std::ios::binary);
  for (std::uint64_t i = 0; i < frame_count(); ++i) {
    const Frame f = frame(i);
    out.write(reinterpret_cast<const char*>(f.pixels.data()),
              static_cast<std::streamsize>(f.pixels.size()));
  }
  if (!out) throw std::runtime_error("cannot write " + stream.string());
  return stream;
}

std::optional<Frame> SyntheticSource::next() {
  if (next_ >= video_.frame_count()) return std::nullopt;
  return video_.frame(next_++);
}

Color palette_color(std::size_t shot_index) {
  // Two equal channels keep the hue exact under any brightness scaling.
  static constexpr Color kVivid[] = {{230, 50, 50}, {50, 210, 50}, {60, 60, 230}, {210, 210, 40}};
  static constexpr Color kMuted[] = {{90, 140, 140}, {150, 100, 150}, {140, 140, 95}, {100, 100, 150}};
  const std::size_t k = (shot_index / 2) % 4;
  return shot_index % 2 == 0 ? kVivid[k] : kMuted[k];
}

std::vector<Shot> random_shots(std::mt19937_64& rng, std::size_t count, std::uint32_t min_frames,
                               std::uint32_t max_frames, double fade_probability) {
  std::uniform_int_distribution<std::uint32_t> len(min_frames, max_frames);
  std::uniform_int_distribution<std::uint32_t> black(5, 12);
  std::bernoulli_distribution fade(fade_probability);
  std::vector<Shot> shots;
  for (std::size_t i = 0; i < count; ++i) {
    Shot s;
    s.frames = len(rng);
    s.color = palette_color(i);
    s.into_next = fade(rng) ? Transition::kFade : Transition::kCut;
    s.black_frames = black(rng);
    shots.push_back(s);
  }
  return shots;
}

Frame solid_frame(std::uint32_t width, std::uint32_t height, Color c, std::uint64_t index) {
  Frame f;
  f.index = index;
  f.width = width;
  f.height = height;
  f.pixels.resize(3 * std::size_t{width} * height);
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    f.pixels[i] = c.r;
    f.pixels[i + 1] = c.g;
    f.pixels[i + 2] = c.b;
  }
  return f;
}

MoodConfig test_mood() {
  MoodConfig m;
  m.name = "Test";
  m.tempo_range = {60, 140};
  m.time_signatures = {{2, 4}, {3, 4}, {4, 4}, {6, 8}};
  m.phrase_length_bars = 4;
  m.layers_per_energy = {{Energy::kLow, {1, 2}}, {Energy::kMedium, {2, 3}}, {Energy::kHigh, {3, 5}}};
  m.scale = {0, ScaleMode::kMajor};
  m.progressions = {{Complexity::kSimple, {{0, 3, 4, 0}}},
                    {Complexity::kSemiComplex, {{0, 5, 3, 4}}},
                    {Complexity::kComplex, {{0, 5, 1, 4}, {0, 2, 5, 1, 4}}}};
  m.instrument_layers = {{"pad", 1, 48, 72, RhythmDensity::kSparse},
                         {"bass", 2, 36, 52, RhythmDensity::kMedium},
                         {"piano", 3, 55, 79, RhythmDensity::kDense},
                         {"melody", 4, 64, 88, RhythmDensity::kMedium},
                         {"percussion", 5, 35, 51, RhythmDensity::kDense}};
  m.validate();
  return m;
}

}  // namespace cutscore::testing
