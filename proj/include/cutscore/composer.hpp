#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cutscore/mood.hpp"
#include "cutscore/planner.hpp"

namespace cutscore {

struct MidiDocument;

inline constexpr int kPpqn = 480;

// MIDI tempo meta value for an integer tempo: round(60e6 / bpm).
std::uint32_t microseconds_per_quarter(int bpm);

struct NoteEvent {
  std::int64_t start_tick = 0;  // relative to the owning section
  std::int64_t duration_ticks = 1;
  int pitch = 60;
  int velocity = 80;
  std::string layer_label;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

struct LayerEvents {
  std::string label;
  std::vector<NoteEvent> events;  // sorted by (start_tick, pitch)

  friend bool operator==(const LayerEvents&, const LayerEvents&) = default;
};

struct SectionScore {
  std::uint32_t section_id = 0;
  std::int64_t start_tick = 0;  // set by assemble_score
  std::int64_t length_ticks = 0;
  std::vector<LayerEvents> layers;  // one entry per mood layer, rank order

  friend bool operator==(const SectionScore&, const SectionScore&) = default;
};

struct TempoChange {
  std::int64_t tick = 0;
  int bpm = 120;
};

struct MeterChange {
  std::int64_t tick = 0;
  TimeSignature time_signature;
};

struct Score {
  std::vector<SectionScore> sections;
  std::vector<TempoChange> tempo_map;
  std::vector<MeterChange> meter_map;
  std::vector<std::string> layer_labels;  // rank order
  std::string mood;
  std::uint64_t seed = 0;

  std::int64_t total_ticks() const;
  // Integrates the tempo map using the exact tempo meta values written to
  // the MIDI file.
  double seconds_at_tick(std::int64_t tick) const;
  double duration_seconds() const { return seconds_at_tick(total_ticks()); }
};

// A seed melody on a 16th-note grid at kPpqn, starting at tick 0.
struct MotifNote {
  std::int64_t offset_ticks = 0;
  std::int64_t duration_ticks = 0;
  int pitch = 60;

  friend bool operator==(const MotifNote&, const MotifNote&) = default;
};

struct Motif {
  std::vector<MotifNote> notes;

  bool empty() const { return notes.empty(); }
};

// First track with notes; simultaneous or overlapping notes keep the
// highest pitch; onsets and durations snapped to the nearest 16th; capped
// at two phrases of 4/4. Throws kEmptyMelody when there are no notes.
Motif load_seed_melody(const MidiDocument& doc, int phrase_bars = 4);

bool is_percussion_label(std::string_view label);

// Number of layers sounding in `bar_index` of the section. Starts at the
// floor midpoint of the energy's layer range; stay holds, gradual moves one
// layer per phrase, steep one per bar, in the direction's sign. Bounded by
// the energy range widened to the adjacent energy on the side the direction
// points to, and by [1, total layers].
int active_layer_count(const SectionSpec& section, const MoodConfig& mood, int bar_index);

// Tick span of every plan section. Lengths are derived from cumulative
// target time, so section starts stay within half a tick of the scene
// starts however many sections there are.
std::vector<std::int64_t> section_tick_lengths(const CompositionPlan& plan);

SectionScore compose_section(const SectionSpec& section, Role role, const MoodConfig& mood,
                             Complexity complexity, const Motif& motif, std::uint64_t seed,
                             std::int64_t length_ticks);

// Places sections end to end and builds the tempo and meter maps. Throws
// kInconsistentPlan when the section scores do not match the plan.
Score assemble_score(const CompositionPlan& plan, std::vector<SectionScore> section_scores,
                     const MoodConfig& mood);

// compose_section over every plan section, then assemble_score.
Score compose_score(const CompositionPlan& plan, const MoodConfig& mood, const Motif& motif);

// Per-section event lists for inspection.
std::string score_debug_json(const Score& score);

}  // namespace cutscore
