#include "cutscore/composer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "cutscore/error.hpp"
#include "cutscore/midi.hpp"
#include "cutscore/rng.hpp"

namespace cutscore {

std::uint32_t microseconds_per_quarter(int bpm) {
  return static_cast<std::uint32_t>(std::llround(60'000'000.0 / bpm));
}

std::int64_t Score::total_ticks() const {
  if (sections.empty()) return 0;
  return sections.back().start_tick + sections.back().length_ticks;
}

double Score::seconds_at_tick(std::int64_t tick) const {
  double seconds = 0.0;
  std::int64_t at = 0;
  double us_per_quarter = 500000.0;
  for (const TempoChange& t : tempo_map) {
    if (t.tick >= tick) break;
    seconds += static_cast<double>(t.tick - at) * us_per_quarter / (1e6 * kPpqn);
    at = t.tick;
    us_per_quarter = microseconds_per_quarter(t.bpm);
  }
  return seconds + static_cast<double>(tick - at) * us_per_quarter / (1e6 * kPpqn);
}

bool is_percussion_label(std::string_view label) {
  return label == "percussion" || label == "drums";
}

Motif load_seed_melody(const MidiDocument& doc, int phrase_bars) {
  const MidiTrack* source = nullptr;
  std::vector<DecodedNote> notes;
  for (const MidiTrack& track : doc.tracks) {
    notes = extract_notes(track);
    if (!notes.empty()) {
      source = &track;
      break;
    }
  }
  if (source == nullptr) throw Error(ErrorCode::kEmptyMelody, "seed melody has no notes");

  // Snap to the source's 16th grid, then rescale to kPpqn.
  const double grid = doc.ppqn / 4.0;
  const std::int64_t out_grid = kPpqn / 4;
  const auto snap = [&](std::int64_t ticks) {
    return static_cast<std::int64_t>(std::floor(static_cast<double>(ticks) / grid + 0.5));
  };

  // Highest pitch wins at a shared onset.
  std::map<std::int64_t, MotifNote> by_onset;
  for (const DecodedNote& n : notes) {
    const std::int64_t onset = snap(n.tick) * out_grid;
    const std::int64_t length = std::max<std::int64_t>(1, snap(n.duration)) * out_grid;
    auto [it, inserted] = by_onset.try_emplace(onset, MotifNote{onset, length, n.pitch});
    if (!inserted && n.pitch > it->second.pitch) it->second = MotifNote{onset, length, n.pitch};
  }

  Motif motif;
  for (auto& [onset, note] : by_onset) {
    if (!motif.notes.empty()) {
      MotifNote& prev = motif.notes.back();
      if (prev.offset_ticks + prev.duration_ticks > onset) {
        // Overlap: the higher line survives.
        if (note.pitch > prev.pitch) {
          prev.duration_ticks = onset - prev.offset_ticks;
        } else {
          continue;
        }
      }
    }
    motif.notes.push_back(note);
  }

  const std::int64_t origin = motif.notes.front().offset_ticks;
  const std::int64_t cap = std::int64_t{2} * phrase_bars * 4 * kPpqn;
  Motif capped;
  for (MotifNote n : motif.notes) {
    n.offset_ticks -= origin;
    if (n.offset_ticks >= cap) break;
    n.duration_ticks = std::min(n.duration_ticks, cap - n.offset_ticks);
    capped.notes.push_back(n);
  }
  return capped;
}

int active_layer_count(const SectionSpec& section, const MoodConfig& mood, int bar_index) {
  const LayerRange range = mood.layers_per_energy.at(section.energy);
  const int start = (range.min + range.max) / 2;
  int step = 0;
  switch (section.slope) {
    case Slope::kStay: step = 0; break;
    case Slope::kGradual: step = bar_index / std::max(1, mood.phrase_length_bars); break;
    case Slope::kSteep: step = bar_index; break;
  }
  int lo = range.min;
  int hi = range.max;
  if (section.slope != Slope::kStay) {
    if (section.direction == Direction::kUp) {
      if (section.energy != Energy::kHigh) {
        hi = mood.layers_per_energy.at(static_cast<Energy>(rank(section.energy) + 1)).max;
      }
    } else if (section.energy != Energy::kLow) {
      lo = mood.layers_per_energy.at(static_cast<Energy>(rank(section.energy) - 1)).min;
    }
  }
  const int sign = section.direction == Direction::kUp ? 1 : -1;
  const int count = std::clamp(start + sign * step, lo, std::max(lo, hi));
  return std::clamp(count, 1, std::max(1, mood.total_layers()));
}

std::vector<std::int64_t> section_tick_lengths(const CompositionPlan& plan) {
  std::vector<std::int64_t> lengths;
  lengths.reserve(plan.sections.size());
  double target = 0.0;
  double realized = 0.0;
  for (const SectionSpec& s : plan.sections) {
    target += s.duration_s;
    const double seconds_per_tick = microseconds_per_quarter(s.tempo) / (1e6 * kPpqn);
    const std::int64_t ticks =
        std::max<std::int64_t>(1, std::llround((target - realized) / seconds_per_tick));
    realized += static_cast<double>(ticks) * seconds_per_tick;
    lengths.push_back(ticks);
  }
  return lengths;
}

namespace {

enum class Voice { kBass, kChords, kArpeggio, kMelody, kDrums };

Voice voice_for(std::string_view label) {
  const auto has = [&](std::string_view part) { return label.find(part) != std::string_view::npos; };
  if (is_percussion_label(label) || has("drum") || has("perc")) return Voice::kDrums;
  if (has("bass")) return Voice::kBass;
  if (has("arp")) return Voice::kArpeggio;
  if (has("melody") || has("lead")) return Voice::kMelody;
  return Voice::kChords;
}

int velocity_for(RhythmDensity d) {
  switch (d) {
    case RhythmDensity::kSparse: return 64;
    case RhythmDensity::kMedium: return 80;
    case RhythmDensity::kDense: return 96;
  }
  return 80;
}

// Same pitch class, moved by octaves into [lo, hi] as close to the middle
// as possible. Registers span at least an octave, so this always succeeds.
int fit_register(int pitch, const LayerDef& layer) {
  const int lo = layer.register_lo;
  const int hi = layer.register_hi;
  const int mid = (lo + hi) / 2;
  int p = lo + ((pitch - lo) % 12 + 12) % 12;
  while (p + 12 <= hi && std::abs(p + 12 - mid) < std::abs(p - mid)) p += 12;
  return p;
}

// Diatonic index of the scale tone nearest to `pitch` (lower on ties).
int nearest_degree(const Scale& scale, int pitch) {
  const int base = ((pitch - scale.tonic) >= 0 ? (pitch - scale.tonic) / 12
                                               : -((scale.tonic - pitch + 11) / 12)) * 7;
  int best = base;
  int best_dist = 1 << 30;
  for (int k = base - 7; k <= base + 14; ++k) {
    const int dist = std::abs(scale.degree_pitch(k, 0) - pitch);
    if (dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

struct SectionGrid {
  std::int64_t bar_ticks;
  std::int64_t beat_ticks;
  int beats;
  int bars;  // musical bars: phrases * phrase length
  int phrase_bars;
  std::int64_t span;  // section length in ticks
};

class SectionWriter {
 public:
  SectionWriter(const SectionSpec& section, Role role, const MoodConfig& mood,
                Complexity complexity, const SectionGrid& grid, std::uint64_t seed)
      : section_(section), role_(role), mood_(mood), complexity_(complexity), grid_(grid) {
    Rng base = Rng::for_stream(seed, section.section_id);
    const auto& progs = mood.progressions.at(complexity);
    progression_ = progs[base.below(progs.size())];
    layer_seed_ = base.next();
    active_.reserve(static_cast<std::size_t>(grid.bars));
    for (int b = 0; b < grid.bars; ++b) active_.push_back(active_layer_count(section, mood, b));
  }

  LayerEvents write_layer(std::size_t layer_index, const Motif& motif) {
    const LayerDef& layer = mood_.instrument_layers[layer_index];
    LayerEvents out{layer.label, {}};
    Rng rng = Rng::for_stream(layer_seed_, static_cast<std::uint64_t>(layer.activation_rank));
    const Voice voice = voice_for(layer.label);
    const int velocity = velocity_for(layer.density);
    for (int bar = 0; bar < grid_.bars; ++bar) {
      if (!is_active(layer_index, bar)) continue;
      const std::int64_t bar_start = bar * grid_.bar_ticks;
      if (bar_start >= grid_.span) break;
      switch (voice) {
        case Voice::kBass: bass_bar(layer, bar, velocity, out); break;
        case Voice::kChords: chord_bar(layer, bar, velocity, out); break;
        case Voice::kArpeggio: arpeggio_bar(layer, bar, velocity, out); break;
        case Voice::kDrums: drum_bar(layer, bar, velocity, out); break;
        case Voice::kMelody:
          if (motif.empty()) improvise_bar(layer, bar, velocity, rng, out);
          break;
      }
    }
    if (voice == Voice::kMelody && !motif.empty()) motif_line(layer_index, layer, velocity, motif, out);
    finish(layer_index, out);
    return out;
  }

 private:
  bool is_active(std::size_t layer_index, int bar) const {
    return bar >= 0 && bar < grid_.bars &&
           static_cast<int>(layer_index) < active_[static_cast<std::size_t>(bar)];
  }

  int chord_root(int bar) const {
    if (role_ == Role::kCoda && bar == grid_.bars - 1) return 0;  // close on the tonic
    return progression_[static_cast<std::size_t>(bar) % progression_.size()];
  }

  std::vector<int> chord_degrees(int bar) const {
    const int r = chord_root(bar);
    std::vector<int> degrees{r, r + 2, r + 4};
    if (complexity_ == Complexity::kComplex) degrees.push_back(r + 6);
    return degrees;
  }

  void emit(LayerEvents& out, std::int64_t start, std::int64_t length, int pitch, int velocity) {
    out.events.push_back({start, length, pitch, std::clamp(velocity, 1, 127), out.label});
  }

  void bass_bar(const LayerDef& layer, int bar, int velocity, LayerEvents& out) {
    const std::int64_t t0 = bar * grid_.bar_ticks;
    const int root = fit_register(mood_.scale.degree_pitch(chord_root(bar), 0), layer);
    const int fifth = fit_register(mood_.scale.degree_pitch(chord_root(bar) + 4, 0), layer);
    switch (layer.density) {
      case RhythmDensity::kSparse:
        emit(out, t0, grid_.bar_ticks, root, velocity);
        break;
      case RhythmDensity::kMedium:
        for (int beat = 0; beat < grid_.beats; ++beat) {
          const bool last = beat == grid_.beats - 1 && grid_.beats >= 3;
          emit(out, t0 + beat * grid_.beat_ticks, grid_.beat_ticks, last ? fifth : root,
               velocity + (beat == 0 ? 10 : 0));
        }
        break;
      case RhythmDensity::kDense: {
        const std::int64_t step = grid_.beat_ticks / 2;
        for (int i = 0; i < 2 * grid_.beats; ++i) {
          emit(out, t0 + i * step, step, i % 2 == 0 ? root : fifth, velocity + (i == 0 ? 10 : 0));
        }
        break;
      }
    }
  }

  std::vector<int> chord_pitches(const LayerDef& layer, int bar) const {
    std::vector<int> pitches;
    for (int d : chord_degrees(bar)) {
      pitches.push_back(fit_register(mood_.scale.degree_pitch(d, 0), layer));
    }
    std::sort(pitches.begin(), pitches.end());
    pitches.erase(std::unique(pitches.begin(), pitches.end()), pitches.end());
    return pitches;
  }

  void chord_bar(const LayerDef& layer, int bar, int velocity, LayerEvents& out) {
    const std::int64_t t0 = bar * grid_.bar_ticks;
    const std::vector<int> pitches = chord_pitches(layer, bar);
    std::vector<std::pair<std::int64_t, std::int64_t>> hits;  // (offset, length)
    switch (layer.density) {
      case RhythmDensity::kSparse:
        hits.emplace_back(0, grid_.bar_ticks);
        break;
      case RhythmDensity::kMedium: {
        const std::int64_t split = (grid_.beats / 2) * grid_.beat_ticks;
        hits.emplace_back(0, split);
        hits.emplace_back(split, grid_.bar_ticks - split);
        break;
      }
      case RhythmDensity::kDense:
        for (int beat = 0; beat < grid_.beats; ++beat) {
          hits.emplace_back(beat * grid_.beat_ticks, grid_.beat_ticks);
        }
        break;
    }
    for (const auto& [offset, length] : hits) {
      for (int p : pitches) emit(out, t0 + offset, length, p, velocity);
    }
  }

  void arpeggio_bar(const LayerDef& layer, int bar, int velocity, LayerEvents& out) {
    const std::int64_t t0 = bar * grid_.bar_ticks;
    std::vector<int> tones = chord_pitches(layer, bar);
    if (tones.front() + 12 <= layer.register_hi) tones.push_back(tones.front() + 12);
    if (section_.direction == Direction::kDown) std::reverse(tones.begin(), tones.end());
    std::int64_t step = grid_.beat_ticks;
    if (layer.density == RhythmDensity::kMedium) step = grid_.beat_ticks / 2;
    if (layer.density == RhythmDensity::kDense) step = grid_.beat_ticks / 4;
    const std::int64_t count = grid_.bar_ticks / step;
    for (std::int64_t i = 0; i < count; ++i) {
      emit(out, t0 + i * step, step, tones[static_cast<std::size_t>(i) % tones.size()],
           velocity + (i == 0 ? 6 : 0));
    }
  }

  void drum_bar(const LayerDef& layer, int bar, int velocity, LayerEvents& out) {
    constexpr int kKick = 36, kSnare = 38, kClosedHat = 42, kCrash = 49;
    const std::int64_t t0 = bar * grid_.bar_ticks;
    const std::int64_t hit = std::min<std::int64_t>(60, grid_.beat_ticks / 2);
    const auto drum = [&](std::int64_t at, int pitch, int vel) {
      if (pitch >= layer.register_lo && pitch <= layer.register_hi) emit(out, at, hit, pitch, vel);
    };
    if (bar == 0) drum(t0, kCrash, velocity + 10);
    const int backbeat_from = grid_.beats >= 4 ? 1 : grid_.beats;
    for (int beat = 0; beat < grid_.beats; ++beat) {
      const std::int64_t at = t0 + beat * grid_.beat_ticks;
      const bool strong = beat == 0 || (layer.density != RhythmDensity::kSparse &&
                                        grid_.beats >= 4 && beat == grid_.beats / 2);
      if (strong) drum(at, kKick, velocity + 10);
      if (layer.density != RhythmDensity::kSparse && beat >= backbeat_from && beat % 2 == 1) {
        drum(at, kSnare, velocity);
      }
      drum(at, kClosedHat, velocity - 16);
      if (layer.density == RhythmDensity::kDense) {
        drum(at + grid_.beat_ticks / 2, kClosedHat, velocity - 24);
      }
    }
  }

  void improvise_bar(const LayerDef& layer, int bar, int velocity, Rng& rng, LayerEvents& out) {
    const std::int64_t t0 = bar * grid_.bar_ticks;
    std::int64_t step = grid_.beat_ticks;
    if (layer.density == RhythmDensity::kSparse) step = grid_.beat_ticks * std::max(1, grid_.beats / 2);
    if (layer.density == RhythmDensity::kDense) step = grid_.beat_ticks / 2;
    const std::vector<int> chord = chord_degrees(bar);
    int degree = chord[rng.below(std::min<std::size_t>(3, chord.size()))];
    static constexpr int kSteps[] = {-2, -1, 1, 2};
    for (std::int64_t at = 0; at < grid_.bar_ticks; at += step) {
      const std::int64_t len = std::min(step, grid_.bar_ticks - at);
      emit(out, t0 + at, len, fit_register(mood_.scale.degree_pitch(degree, 0), layer), velocity);
      degree += kSteps[rng.below(4)];
      degree = std::clamp(degree, -7, 14);
    }
  }

  // The motif restarts on every bar boundary after it ends, each time
  // transposed diatonically so its first note lands on that bar's chord
  // root (a third higher in choruses).
  void motif_line(std::size_t layer_index, const LayerDef& layer, int velocity,
                  const Motif& motif, LayerEvents& out) {
    std::vector<int> degrees;
    degrees.reserve(motif.notes.size());
    for (const MotifNote& n : motif.notes) degrees.push_back(nearest_degree(mood_.scale, n.pitch));
    const std::int64_t motif_end = motif.notes.back().offset_ticks + motif.notes.back().duration_ticks;
    const std::int64_t loop = std::max<std::int64_t>(
        1, (motif_end + grid_.bar_ticks - 1) / grid_.bar_ticks) * grid_.bar_ticks;
    const std::int64_t phrase_ticks = grid_.phrase_bars * grid_.bar_ticks;
    const int lift = role_ == Role::kChorus ? 2 : 0;
    const std::int64_t music_end = grid_.bars * grid_.bar_ticks;

    for (std::int64_t phrase_start = 0; phrase_start < music_end; phrase_start += phrase_ticks) {
      const std::int64_t phrase_end = std::min(phrase_start + phrase_ticks, music_end);
      for (std::int64_t rep = phrase_start; rep < phrase_end; rep += loop) {
        const int bar = static_cast<int>(rep / grid_.bar_ticks);
        const int shift = chord_root(bar) + lift - degrees.front();
        for (std::size_t i = 0; i < motif.notes.size(); ++i) {
          const std::int64_t start = rep + motif.notes[i].offset_ticks;
          if (start >= phrase_end) break;
          const int onset_bar = static_cast<int>(start / grid_.bar_ticks);
          if (!is_active(layer_index, onset_bar)) continue;
          std::int64_t end = std::min(start + motif.notes[i].duration_ticks, phrase_end);
          // Do not sustain into a bar where the layer is silent.
          const std::int64_t bar_end = (onset_bar + 1) * grid_.bar_ticks;
          if (end > bar_end && !is_active(layer_index, onset_bar + 1)) end = bar_end;
          const int pitch = fit_register(mood_.scale.degree_pitch(degrees[i] + shift, 0), layer);
          emit(out, start, end - start, pitch, velocity);
        }
      }
    }
  }

  void finish(std::size_t layer_index, LayerEvents& out) const {
    (void)layer_index;
    std::vector<NoteEvent> kept;
    kept.reserve(out.events.size());
    for (NoteEvent e : out.events) {
      if (e.start_tick >= grid_.span || e.duration_ticks <= 0) continue;
      e.duration_ticks = std::min(e.duration_ticks, grid_.span - e.start_tick);
      kept.push_back(std::move(e));
    }
    std::stable_sort(kept.begin(), kept.end(), [](const NoteEvent& a, const NoteEvent& b) {
      return a.start_tick != b.start_tick ? a.start_tick < b.start_tick : a.pitch < b.pitch;
    });
    out.events = std::move(kept);
  }

  const SectionSpec& section_;
  Role role_;
  const MoodConfig& mood_;
  Complexity complexity_;
  SectionGrid grid_;
  std::vector<int> progression_;
  std::uint64_t layer_seed_ = 0;
  std::vector<int> active_;
};

}  // namespace

SectionScore compose_section(const SectionSpec& section, Role role, const MoodConfig& mood,
                             Complexity complexity, const Motif& motif, std::uint64_t seed,
                             std::int64_t length_ticks) {
  SectionGrid grid;
  grid.bar_ticks = section.time_signature.bar_ticks(kPpqn);
  grid.beat_ticks = 4 * kPpqn / section.time_signature.unit;
  grid.beats = section.time_signature.beats;
  grid.phrase_bars = mood.phrase_length_bars;
  grid.bars = section.phrases * mood.phrase_length_bars;
  grid.span = length_ticks;

  SectionWriter writer(section, role, mood, complexity, grid, seed);
  SectionScore out;
  out.section_id = section.section_id;
  out.length_ticks = length_ticks;
  for (std::size_t i = 0; i < mood.instrument_layers.size(); ++i) {
    out.layers.push_back(writer.write_layer(i, motif));
  }
  return out;
}

Score assemble_score(const CompositionPlan& plan, std::vector<SectionScore> section_scores,
                     const MoodConfig& mood) {
  if (section_scores.size() != plan.sections.size()) {
    throw Error(ErrorCode::kInconsistentPlan,
                "plan has " + std::to_string(plan.sections.size()) + " sections but " +
                    std::to_string(section_scores.size()) + " section scores were given");
  }
  const std::vector<std::int64_t> lengths = section_tick_lengths(plan);
  Score score;
  score.mood = plan.mood;
  score.seed = plan.rng_seed;
  for (const LayerDef& l : mood.instrument_layers) score.layer_labels.push_back(l.label);

  std::int64_t at = 0;
  for (std::size_t i = 0; i < section_scores.size(); ++i) {
    SectionScore& s = section_scores[i];
    const SectionSpec& spec = plan.sections[i];
    if (s.section_id != spec.section_id) {
      throw Error(ErrorCode::kInconsistentPlan,
                  "section score " + std::to_string(s.section_id) + " found where plan section " +
                      std::to_string(spec.section_id) + " belongs");
    }
    if (s.length_ticks != lengths[i]) {
      throw Error(ErrorCode::kInconsistentPlan,
                  "section " + std::to_string(s.section_id) + " length does not match the plan");
    }
    s.start_tick = at;
    score.tempo_map.push_back({at, spec.tempo});
    score.meter_map.push_back({at, spec.time_signature});
    at += s.length_ticks;
    score.sections.push_back(std::move(s));
  }
  return score;
}

Score compose_score(const CompositionPlan& plan, const MoodConfig& mood, const Motif& motif) {
  validate_plan(plan);
  for (const SectionSpec& s : plan.sections) {
    if (s.duration_range) {
      throw Error(ErrorCode::kInconsistentPlan,
                  "section " + std::to_string(s.section_id) + " still has an unresolved duration range");
    }
  }
  const std::vector<std::int64_t> lengths = section_tick_lengths(plan);
  std::vector<SectionScore> sections;
  sections.reserve(plan.sections.size());
  for (std::size_t i = 0; i < plan.sections.size(); ++i) {
    sections.push_back(compose_section(plan.sections[i], plan.roles[i], mood, plan.complexity,
                                       motif, plan.rng_seed, lengths[i]));
  }
  return assemble_score(plan, std::move(sections), mood);
}

std::string score_debug_json(const Score& score) {
  using nlohmann::json;
  json doc;
  doc["mood"] = score.mood;
  doc["seed"] = score.seed;
  doc["ppqn"] = kPpqn;
  json sections = json::array();
  for (std::size_t i = 0; i < score.sections.size(); ++i) {
    const SectionScore& s = score.sections[i];
    json layers = json::object();
    for (const LayerEvents& l : s.layers) {
      json events = json::array();
      for (const NoteEvent& e : l.events) {
        events.push_back({e.start_tick, e.duration_ticks, e.pitch, e.velocity});
      }
      layers[l.label] = std::move(events);
    }
    sections.push_back({{"section_id", s.section_id},
                        {"start_tick", s.start_tick},
                        {"length_ticks", s.length_ticks},
                        {"bpm", score.tempo_map[i].bpm},
                        {"time_sig", to_string(score.meter_map[i].time_signature)},
                        {"layers", std::move(layers)}});
  }
  doc["sections"] = std::move(sections);
  return doc.dump(2) + "\n";
}

}  // namespace cutscore
