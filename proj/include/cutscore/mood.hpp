#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cutscore {

enum class Energy : int { kLow = 1, kMedium = 2, kHigh = 3 };

constexpr int rank(Energy e) { return static_cast<int>(e); }
std::string_view to_string(Energy e);
Energy parse_energy(std::string_view text);  // throws kParseError

enum class Complexity { kSimple, kSemiComplex, kComplex };
std::string_view to_string(Complexity c);
Complexity parse_complexity(std::string_view text);

struct TimeSignature {
  int beats = 4;  // numerator, 2..12
  int unit = 4;   // denominator, one of 2, 4, 8

  // Quarter-note tempo reference: one beat lasts (60 / bpm) * (4 / unit) s.
  double bar_seconds(double bpm) const { return beats * (4.0 / unit) * 60.0 / bpm; }
  // Bar length in quarter notes, as a rational beats*4/unit.
  int bar_ticks(int ppqn) const { return beats * 4 * ppqn / unit; }

  friend auto operator<=>(const TimeSignature&, const TimeSignature&) = default;
};

std::string to_string(const TimeSignature& ts);
TimeSignature parse_time_signature(std::string_view text);

struct TempoRange {
  int lo = 0;
  int hi = 0;

  bool contains(int bpm) const { return bpm >= lo && bpm <= hi; }
  friend bool operator==(const TempoRange&, const TempoRange&) = default;
};

struct LayerRange {
  int min = 1;
  int max = 1;
};

enum class RhythmDensity { kSparse, kMedium, kDense };
std::string_view to_string(RhythmDensity d);

struct LayerDef {
  std::string label;
  int activation_rank = 1;
  int register_lo = 48;
  int register_hi = 72;
  RhythmDensity density = RhythmDensity::kMedium;
};

enum class ScaleMode { kMajor, kMinor, kDorian, kMixolydian, kLydian, kPhrygian, kHarmonicMinor };

struct Scale {
  int tonic = 0;  // pitch class, 0 = C
  ScaleMode mode = ScaleMode::kMajor;

  // Seven ascending semitone offsets from the tonic.
  const std::array<int, 7>& intervals() const;
  bool contains(int pitch) const;
  // Pitch of a scale degree (0-based, may exceed 6 or be negative) above
  // the tonic in the octave starting at `octave_base` (a multiple of 12).
  int degree_pitch(int degree, int octave_base) const;
};

struct MoodConfig {
  std::string name;
  TempoRange tempo_range;
  std::vector<TimeSignature> time_signatures;
  int phrase_length_bars = 4;
  std::map<Energy, LayerRange> layers_per_energy;
  Scale scale;
  std::map<Complexity, std::vector<std::vector<int>>> progressions;  // 0-based degrees
  std::vector<LayerDef> instrument_layers;  // sorted by activation_rank

  int total_layers() const { return static_cast<int>(instrument_layers.size()); }
  // Throws kInvalidConfig on any broken invariant.
  void validate() const;
};

MoodConfig parse_mood_json(std::string_view text);
MoodConfig load_mood(const std::filesystem::path& file);

// Looks up <dir>/<name>.json, case-insensitively on the name.
MoodConfig load_mood_preset(const std::filesystem::path& dir, std::string_view name);
std::vector<std::string> list_mood_presets(const std::filesystem::path& dir);

// Directory baked in at build time; CUTSCORE_DATA_DIR overrides it.
std::filesystem::path default_data_dir();

}  // namespace cutscore
