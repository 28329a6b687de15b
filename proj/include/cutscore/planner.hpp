#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cutscore/energy.hpp"
#include "cutscore/mood.hpp"
#include "cutscore/scene_detect.hpp"

namespace cutscore {

enum class Role { kIntro, kVerse, kChorus, kCoda };
std::string_view to_string(Role r);
Role parse_role(std::string_view text);

struct DraftSection {
  std::uint32_t section_id = 0;
  double duration_s = 0.0;
  Role role = Role::kIntro;
};

// One exact-duration candidate: `phrases` phrases of the mood's phrase
// length at `tempo` in `time_signature`.
struct Fit {
  int tempo = 0;
  TimeSignature time_signature;
  int phrases = 0;

  friend bool operator==(const Fit&, const Fit&) = default;
};

double phrase_seconds(int phrase_bars, const TimeSignature& ts, double bpm);

// min(10 ms, half a frame period).
double fit_tolerance(const Fps& fps);
inline constexpr double kMaxFitTolerance = 0.010;

enum class PlannerMode { kGlobal, kPerSceneEnergy };
std::string_view to_string(PlannerMode m);
PlannerMode parse_planner_mode(std::string_view text);

struct SectionSpec {
  std::uint32_t section_id = 0;
  TimeSignature time_signature;
  int tempo = 0;
  Energy energy = Energy::kMedium;
  double duration_s = 0.0;  // exact target
  int phrases = 0;
  Direction direction = Direction::kUp;
  Slope slope = Slope::kStay;
  // Only set on sections parsed from "a to b" and not yet resolved.
  std::optional<std::pair<double, double>> duration_range;

  // phrases * phrase_bars bars at tempo.
  double realized_duration_s(int phrase_bars) const;

  friend bool operator==(const SectionSpec&, const SectionSpec&) = default;
};

struct CompositionPlan {
  double total_duration_s = 0.0;
  std::string mood;
  Complexity complexity = Complexity::kSimple;
  std::uint64_t rng_seed = 0;
  int phrase_bars = 4;
  std::vector<SectionSpec> sections;
  std::vector<Role> roles;

  friend bool operator==(const CompositionPlan&, const CompositionPlan&) = default;
};

// One section per scene; interior roles alternate verse/chorus.
std::vector<DraftSection> sections_from_scenes(std::span<const Scene> scenes);

// Every integer tempo in the mood range x every allowed signature whose
// nearest whole phrase count lands within tolerance_s of the duration,
// ordered by (tempo, beats, unit).
std::vector<Fit> enumerate_fits(double duration_s, const MoodConfig& mood, double tolerance_s);

// Global: keep only tempos valid for every section (kNoConsistentTempo if
// none). Per-scene-energy: keep each section's fits inside its energy tempo
// band, or all of its fits when the band has none.
std::vector<std::vector<Fit>> harmonize_tempo(std::span<const std::vector<Fit>> per_section_fits,
                                              PlannerMode mode, std::span<const Energy> energies,
                                              const MoodConfig& mood);

// Draws one candidate per section from Rng::for_stream(seed, section_id).
// Throws kUnplannableSection naming the first section with no candidate.
CompositionPlan finalize_plan(std::span<const DraftSection> sections,
                              std::span<const std::vector<Fit>> candidates,
                              std::span<const Energy> energies,
                              std::span<const DirectionSlope> direction_slopes,
                              const MoodConfig& mood, Complexity complexity,
                              std::uint64_t rng_seed);

struct PlannerOptions {
  Complexity complexity = Complexity::kSimple;
  std::uint64_t rng_seed = 0;
  PlannerMode mode = PlannerMode::kGlobal;
  // Retry in per-scene-energy mode when global mode has no shared tempo.
  bool fallback_to_energy_mode = true;
  double tolerance_s = kMaxFitTolerance;
};

struct PlanResult {
  CompositionPlan plan;
  PlannerMode mode_used = PlannerMode::kGlobal;
};

// Whole planner: roles, fits, tempo harmonization and the seeded draw. In
// global mode one shared tempo is drawn first, so every section uses it.
PlanResult plan_composition(std::span<const Scene> scenes, std::span<const Energy> energies,
                            const MoodConfig& mood, const PlannerOptions& options);

// Throws kInconsistentPlan when a structural invariant does not hold.
void validate_plan(const CompositionPlan& plan);

std::string plan_to_ini(const CompositionPlan& plan);
// Throws kParseError ("line N: ...") on unknown keys, section id gaps and
// out-of-vocabulary values. "a to b" durations are kept as ranges.
CompositionPlan parse_ini(std::string_view text);

// Resolves every range section to an exact (tempo, signature, phrases)
// whose duration lies in the range, drawing from the section's stream.
void resolve_duration_ranges(CompositionPlan& plan, const MoodConfig& mood);

}  // namespace cutscore
